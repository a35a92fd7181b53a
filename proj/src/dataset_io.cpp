#include "adsurv/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "adsurv/io_util.hpp"
#include "json.hpp"

namespace adsurv {

using json = nlohmann::ordered_json;

void validate_creative(const AdCreative& creative) {
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("creative " + creative.creative_id + ": " + why);
  };
  if (creative.creative_id.empty()) fail("empty creative_id");
  if (creative.campaign_id.empty()) fail("empty campaign_id");
  if (creative.gender != "all" && creative.gender != "male" &&
      creative.gender != "female")
    fail("invalid gender target '" + creative.gender + "'");
  if (!(creative.target_cpa > 0.0) || !std::isfinite(creative.target_cpa))
    fail("target_cpa must be positive and finite");
  for (double v : creative.text_embedding)
    if (!std::isfinite(v)) fail("non-finite text embedding value");
  for (double v : creative.image_embedding)
    if (!std::isfinite(v)) fail("non-finite image embedding value");
  if (creative.daily.empty()) fail("no daily rows");
  for (std::size_t i = 0; i < creative.daily.size(); ++i) {
    const DailyPerformance& row = creative.daily[i];
    if (row.day != static_cast<int>(i) + 1)
      fail("daily rows must be contiguous from day 1");
    if (row.clicks > row.impressions) fail("clicks exceed impressions");
    if (row.conversions > row.clicks) fail("conversions exceed clicks");
    if (!(row.spend >= 0.0) || !std::isfinite(row.spend))
      fail("spend must be finite and non-negative");
  }
  if (!(creative.lifetime_days >= 1.0) || !std::isfinite(creative.lifetime_days))
    fail("lifetime must be >= 1");
  if (!(creative.total_sales >= 0.0) || !std::isfinite(creative.total_sales))
    fail("total_sales must be finite and non-negative");
}

namespace {

// Serialized ratio series use null for "nothing converted yet" (+inf); JSON
// has no literal for it.
json ratio_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double ratio_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json creative_to_json(const AdCreative& c) {
  json daily = json::array();
  for (const DailyPerformance& row : c.daily) {
    daily.push_back({{"day", row.day},
                     {"impressions", row.impressions},
                     {"clicks", row.clicks},
                     {"conversions", row.conversions},
                     {"spend", row.spend}});
  }
  return json{{"creative_id", c.creative_id},
              {"campaign_id", c.campaign_id},
              {"gender", c.gender},
              {"genre", c.genre},
              {"target_cpa", c.target_cpa},
              {"text_embedding", c.text_embedding},
              {"image_embedding", c.image_embedding},
              {"lifetime_days", c.lifetime_days},
              {"censored", c.censored},
              {"total_sales", c.total_sales},
              {"daily", daily}};
}

AdCreative creative_from_json(const json& j) {
  AdCreative c;
  c.creative_id = j.at("creative_id").get<std::string>();
  c.campaign_id = j.at("campaign_id").get<std::string>();
  c.gender = j.at("gender").get<std::string>();
  c.genre = j.at("genre").get<std::string>();
  c.target_cpa = j.at("target_cpa").get<double>();
  c.text_embedding = j.at("text_embedding").get<std::vector<double>>();
  c.image_embedding = j.at("image_embedding").get<std::vector<double>>();
  c.lifetime_days = j.at("lifetime_days").get<double>();
  c.censored = j.at("censored").get<bool>();
  c.total_sales = j.at("total_sales").get<double>();
  for (const json& row : j.at("daily")) {
    DailyPerformance d;
    d.day = row.at("day").get<int>();
    d.impressions = row.at("impressions").get<std::uint64_t>();
    d.clicks = row.at("clicks").get<std::uint64_t>();
    d.conversions = row.at("conversions").get<std::uint64_t>();
    d.spend = row.at("spend").get<double>();
    c.daily.push_back(d);
  }
  validate_creative(c);
  return c;
}

// Parses one record per line, decorating any failure with the line number.
template <typename Fn>
auto parse_jsonl(const std::string& path, Fn&& from_json_fn)
    -> std::vector<decltype(from_json_fn(json{}))> {
  std::vector<decltype(from_json_fn(json{}))> out;
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_fn(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

}  // namespace

void write_creatives_jsonl(const std::string& path,
                           const std::vector<AdCreative>& creatives) {
  std::string out;
  for (const AdCreative& c : creatives) {
    validate_creative(c);
    out += creative_to_json(c).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<AdCreative> read_creatives_jsonl(const std::string& path) {
  return parse_jsonl(path, [](const json& j) { return creative_from_json(j); });
}

void write_oracle_jsonl(const std::string& path,
                        const std::vector<OracleTrace>& traces) {
  std::string out;
  for (const OracleTrace& t : traces) {
    json ratios = json::array();
    for (double v : t.cpa_ratio_series) ratios.push_back(ratio_to_json(v));
    const json j{{"creative_id", t.creative_id},
                 {"discontinuation_day", t.discontinuation_day},
                 {"mechanism", t.mechanism},
                 {"cpa_ratio_series", ratios}};
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<OracleTrace> read_oracle_jsonl(const std::string& path) {
  return parse_jsonl(path, [](const json& j) {
    OracleTrace t;
    t.creative_id = j.at("creative_id").get<std::string>();
    t.discontinuation_day = j.at("discontinuation_day").get<double>();
    t.mechanism = j.at("mechanism").get<std::string>();
    for (const json& v : j.at("cpa_ratio_series"))
      t.cpa_ratio_series.push_back(ratio_from_json(v));
    return t;
  });
}

void write_daily_csv(const std::string& path,
                     const std::vector<AdCreative>& creatives) {
  std::string out = "creative_id,day,impressions,clicks,conversions,spend\n";
  for (const AdCreative& c : creatives) {
    for (const DailyPerformance& row : c.daily) {
      out += c.creative_id;
      out += ',';
      out += std::to_string(row.day);
      out += ',';
      out += std::to_string(row.impressions);
      out += ',';
      out += std::to_string(row.clicks);
      out += ',';
      out += std::to_string(row.conversions);
      out += ',';
      out += format_double(row.spend);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

void apply_daily_csv(std::vector<AdCreative>& creatives,
                     const std::string& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;

  const auto fail = [&](const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
  };

  if (!std::getline(in, line)) fail("empty file");
  ++lineno;
  if (line == "creative_id,day,impressions,clicks,conversions,spend\r")
    line.pop_back();
  if (line != "creative_id,day,impressions,clicks,conversions,spend")
    fail("unexpected header '" + line + "'");

  std::map<std::string, std::vector<DailyPerformance>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 6) fail("expected 6 fields");
    DailyPerformance d;
    try {
      d.day = std::stoi(fields[1]);
      d.impressions = std::stoull(fields[2]);
      d.clicks = std::stoull(fields[3]);
      d.conversions = std::stoull(fields[4]);
      d.spend = std::stod(fields[5]);
    } catch (const std::exception&) {
      fail("malformed numeric field");
    }
    rows[fields[0]].push_back(d);
  }

  std::map<std::string, AdCreative*> by_id;
  for (AdCreative& c : creatives) by_id[c.creative_id] = &c;
  for (auto& [id, daily] : rows) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::runtime_error(path + ": daily rows for unknown creative '" +
                               id + "'");
    std::sort(daily.begin(), daily.end(),
              [](const DailyPerformance& a, const DailyPerformance& b) {
                return a.day < b.day;
              });
    it->second->daily = daily;
    validate_creative(*it->second);
  }
}

void write_metadata_json(const std::string& path, const DatasetMetadata& meta) {
  json split = json::object();
  for (const auto& [campaign, name] : meta.campaign_split)
    split[campaign] = name;
  const json j{{"schema_version", meta.schema_version},
               {"seed", meta.seed},
               {"n_campaigns", meta.n_campaigns},
               {"n_creatives", meta.n_creatives},
               {"text_dim", meta.text_dim},
               {"image_dim", meta.image_dim},
               {"genre_vocab", meta.genre_vocab},
               {"p95_impressions", meta.p95_impressions},
               {"campaign_split", split}};
  write_file_atomic(path, j.dump(2) + "\n");
}

DatasetMetadata read_metadata_json(const std::string& path) {
  const json j = json::parse(read_file(path));
  DatasetMetadata meta;
  meta.schema_version = j.at("schema_version").get<std::uint32_t>();
  if (meta.schema_version != 1)
    throw std::runtime_error(path + ": unsupported schema_version " +
                             std::to_string(meta.schema_version));
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.n_campaigns = j.at("n_campaigns").get<std::size_t>();
  meta.n_creatives = j.at("n_creatives").get<std::size_t>();
  meta.text_dim = j.at("text_dim").get<std::size_t>();
  meta.image_dim = j.at("image_dim").get<std::size_t>();
  meta.genre_vocab = j.at("genre_vocab").get<std::vector<std::string>>();
  meta.p95_impressions = j.at("p95_impressions").get<double>();
  for (const auto& [campaign, name] : j.at("campaign_split").items())
    meta.campaign_split[campaign] = name.get<std::string>();
  return meta;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const PredictionRecord& r : records) {
    json heads = json::object();
    for (const auto& [name, values] : r.heads) heads[name] = values;
    json j{{"creative_id", r.creative_id},
           {"heads", heads},
           {"merged", r.merged},
           {"risk_score", r.risk_score}};
    if (r.flagged_interval)
      j["flagged_interval"] = *r.flagged_interval;
    else
      j["flagged_interval"] = nullptr;
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
  return parse_jsonl(path, [](const json& j) {
    PredictionRecord r;
    r.creative_id = j.at("creative_id").get<std::string>();
    for (const auto& [name, values] : j.at("heads").items())
      r.heads.emplace_back(name, values.get<std::vector<double>>());
    r.merged = j.at("merged").get<std::vector<double>>();
    r.risk_score = j.at("risk_score").get<double>();
    const json& flagged = j.at("flagged_interval");
    if (!flagged.is_null()) r.flagged_interval = flagged.get<std::size_t>();
    return r;
  });
}

}  // namespace adsurv
