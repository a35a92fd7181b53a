#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "adsurv/creative.hpp"
#include "adsurv/dataset_io.hpp"
#include "adsurv/features.hpp"
#include "adsurv/io_util.hpp"
#include "doctest.h"

using namespace adsurv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("adsurv-io-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::vector<AdCreative> sample_corpus() {
  std::vector<AdCreative> out;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    AdCreative c;
    c.creative_id = "cr-" + std::to_string(k);
    c.campaign_id = "cp-" + std::to_string(k / 2);
    c.gender = (k == 0) ? "all" : (k == 1 ? "male" : "female");
    c.genre = (k == 2) ? "games" : "beauty";
    c.target_cpa = 9.75 + unit(rng);
    c.text_embedding.resize(4);
    c.image_embedding.resize(4);
    for (auto& v : c.text_embedding) v = unit(rng);
    for (auto& v : c.image_embedding) v = unit(rng);
    const int days = 2 + k;
    for (int d = 1; d <= days; ++d) {
      DailyPerformance row;
      row.day = d;
      row.impressions = 100 * static_cast<std::uint64_t>(d) + 7;
      row.clicks = 10 * static_cast<std::uint64_t>(d);
      row.conversions = static_cast<std::uint64_t>(d) - 1;
      row.spend = 3.14159 * d;
      c.daily.push_back(row);
    }
    c.lifetime_days = days;
    c.censored = (k == 2);
    c.total_sales = 123.456 * (k + 1);
    out.push_back(c);
  }
  return out;
}

bool creatives_equal(const AdCreative& a, const AdCreative& b) {
  if (a.creative_id != b.creative_id || a.campaign_id != b.campaign_id)
    return false;
  if (a.gender != b.gender || a.genre != b.genre) return false;
  if (a.target_cpa != b.target_cpa) return false;
  if (a.text_embedding != b.text_embedding) return false;
  if (a.image_embedding != b.image_embedding) return false;
  if (a.lifetime_days != b.lifetime_days || a.censored != b.censored)
    return false;
  if (a.total_sales != b.total_sales) return false;
  if (a.daily.size() != b.daily.size()) return false;
  for (std::size_t i = 0; i < a.daily.size(); ++i) {
    const auto& x = a.daily[i];
    const auto& y = b.daily[i];
    if (x.day != y.day || x.impressions != y.impressions ||
        x.clicks != y.clicks || x.conversions != y.conversions ||
        x.spend != y.spend)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("creative validation catches malformed records") {
  AdCreative good = sample_corpus()[0];
  validate_creative(good);

  AdCreative c = good;
  c.daily[0].clicks = c.daily[0].impressions + 1;
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.daily[0].conversions = c.daily[0].clicks + 1;
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.daily[1].day = 5;
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.daily.clear();
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.gender = "any";
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.target_cpa = 0.0;
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.daily[0].spend = -1.0;
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);

  c = good;
  c.text_embedding[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_creative(c), std::invalid_argument);
}

TEST_CASE("creatives JSONL round-trips exactly and writes deterministically") {
  const TempDir dir;
  const auto corpus = sample_corpus();
  const std::string path = dir.file("creatives.jsonl");
  write_creatives_jsonl(path, corpus);

  const auto loaded = read_creatives_jsonl(path);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    CHECK(creatives_equal(corpus[i], loaded[i]));

  const std::string again = dir.file("creatives2.jsonl");
  write_creatives_jsonl(again, loaded);
  CHECK(read_file(path) == read_file(again));
}

TEST_CASE("creatives JSONL read reports offending line") {
  const TempDir dir;
  const std::string path = dir.file("broken.jsonl");
  write_creatives_jsonl(path, sample_corpus());
  std::string content = read_file(path);
  content += "{\"creative_id\": \"cr-x\"}\n";  // line 4: missing fields
  write_file_atomic(path, content);
  try {
    read_creatives_jsonl(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
}

TEST_CASE("oracle JSONL represents +inf ratios as null") {
  const TempDir dir;
  std::vector<OracleTrace> traces(2);
  traces[0].creative_id = "cr-0";
  traces[0].discontinuation_day = 4;
  traces[0].mechanism = "cut-out";
  traces[0].cpa_ratio_series = {std::numeric_limits<double>::infinity(), 2.5,
                                1.75, 1.9};
  traces[1].creative_id = "cr-1";
  traces[1].discontinuation_day = 120;
  traces[1].mechanism = "censored";
  traces[1].cpa_ratio_series = {0.5, 0.25};

  const std::string path = dir.file("oracle.jsonl");
  write_oracle_jsonl(path, traces);
  CHECK(read_file(path).find("null") != std::string::npos);

  const auto loaded = read_oracle_jsonl(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].creative_id == "cr-0");
  CHECK(loaded[0].mechanism == "cut-out");
  REQUIRE(loaded[0].cpa_ratio_series.size() == 4);
  CHECK(std::isinf(loaded[0].cpa_ratio_series[0]));
  CHECK(loaded[0].cpa_ratio_series[1] == 2.5);
  CHECK(loaded[1].cpa_ratio_series == std::vector<double>{0.5, 0.25});
}

TEST_CASE("daily CSV round-trips through apply_daily_csv") {
  const TempDir dir;
  const auto corpus = sample_corpus();
  const std::string path = dir.file("daily.csv");
  write_daily_csv(path, corpus);

  const std::string content = read_file(path);
  CHECK(content.rfind("creative_id,day,impressions,clicks,conversions,spend\n",
                      0) == 0);

  auto stripped = corpus;
  for (auto& c : stripped) c.daily.clear();
  apply_daily_csv(stripped, path);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    CHECK(creatives_equal(corpus[i], stripped[i]));
}

TEST_CASE("daily CSV rejects unknown creatives and malformed rows") {
  const TempDir dir;
  auto corpus = sample_corpus();
  const std::string path = dir.file("daily.csv");

  write_file_atomic(path,
                    "creative_id,day,impressions,clicks,conversions,spend\n"
                    "cr-unknown,1,10,1,0,1.0\n");
  CHECK_THROWS_AS(apply_daily_csv(corpus, path), std::runtime_error);

  write_file_atomic(path,
                    "creative_id,day,impressions,clicks,conversions,spend\n"
                    "cr-0,1,10,abc,0,1.0\n");
  CHECK_THROWS_AS(apply_daily_csv(corpus, path), std::runtime_error);

  write_file_atomic(path, "wrong,header\n");
  CHECK_THROWS_AS(apply_daily_csv(corpus, path), std::runtime_error);

  // Rows violating the count ordering fail creative validation on apply.
  write_file_atomic(path,
                    "creative_id,day,impressions,clicks,conversions,spend\n"
                    "cr-0,1,10,20,0,1.0\n");
  CHECK_THROWS_AS(apply_daily_csv(corpus, path), std::invalid_argument);
}

TEST_CASE("metadata JSON round-trips") {
  const TempDir dir;
  DatasetMetadata meta;
  meta.seed = 42;
  meta.n_campaigns = 120;
  meta.n_creatives = 5000;
  meta.text_dim = 16;
  meta.image_dim = 16;
  meta.genre_vocab = {kUnknownGenre, "auto", "beauty"};
  meta.p95_impressions = 123456.789;
  meta.campaign_split = {{"cp-0", "train"}, {"cp-1", "val"}, {"cp-2", "test"}};

  const std::string path = dir.file("metadata.json");
  write_metadata_json(path, meta);
  const DatasetMetadata loaded = read_metadata_json(path);
  CHECK(loaded.schema_version == 1);
  CHECK(loaded.seed == 42);
  CHECK(loaded.n_campaigns == 120);
  CHECK(loaded.n_creatives == 5000);
  CHECK(loaded.text_dim == 16);
  CHECK(loaded.image_dim == 16);
  CHECK(loaded.genre_vocab == meta.genre_vocab);
  CHECK(loaded.p95_impressions == meta.p95_impressions);
  CHECK(loaded.campaign_split == meta.campaign_split);
}

TEST_CASE("metadata JSON rejects unsupported schema versions") {
  const TempDir dir;
  const std::string path = dir.file("metadata.json");
  write_file_atomic(path, "{\"schema_version\": 9}\n");
  CHECK_THROWS_AS(read_metadata_json(path), std::runtime_error);
}

TEST_CASE("predictions JSONL round-trips, preserving head order") {
  const TempDir dir;
  std::vector<PredictionRecord> records(2);
  records[0].creative_id = "cr-0";
  records[0].heads = {{"short", {0.1, 0.2, 0.3, 0.4}},
                      {"long", {0.5, 0.4, 0.3, 0.2, 0.1}}};
  records[0].merged = {0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.2, 0.1};
  records[0].risk_score = -3.25;
  records[0].flagged_interval = 2;
  records[1].creative_id = "cr-1";
  records[1].heads = {{"overall", {0.9, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}};
  records[1].risk_score = -0.105;

  const std::string path = dir.file("predictions.jsonl");
  write_predictions_jsonl(path, records);
  const auto loaded = read_predictions_jsonl(path);
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded[0].heads.size() == 2);
  CHECK(loaded[0].heads[0].first == "short");
  CHECK(loaded[0].heads[1].first == "long");
  CHECK(loaded[0].heads[0].second == records[0].heads[0].second);
  CHECK(loaded[0].merged == records[0].merged);
  CHECK(loaded[0].risk_score == -3.25);
  REQUIRE(loaded[0].flagged_interval.has_value());
  CHECK(*loaded[0].flagged_interval == 2);
  CHECK_FALSE(loaded[1].flagged_interval.has_value());
  CHECK(loaded[1].merged.empty());

  const std::string again = dir.file("predictions2.jsonl");
  write_predictions_jsonl(again, loaded);
  CHECK(read_file(path) == read_file(again));
}
