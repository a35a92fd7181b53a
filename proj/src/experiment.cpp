#include "adsurv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "adsurv/io_util.hpp"
#include "json.hpp"

namespace adsurv {

using json = nlohmann::ordered_json;

// ---------- strict config parsing ----------

namespace {

// Tracks which keys of one JSON object get consumed; finish() rejects the
// leftovers so a typo fails loudly instead of silently defaulting.
class StrictView {
 public:
  StrictView(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw std::invalid_argument("config: " + label() + " must be an object");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    consumed_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad value at " + joined(key) + ": " +
                                  e.what());
    }
  }

  const json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    consumed_.insert(key);
    return &j_.at(key);
  }

  std::string joined(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!consumed_.count(item.key())) {
        throw std::invalid_argument("config: unknown key " + joined(item.key()));
      }
    }
  }

 private:
  std::string label() const { return path_.empty() ? "top level" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

void read_generator(const json& j, GeneratorConfig& g) {
  StrictView v(j, "generator");
  v.read("seed", g.seed);
  v.read("n_campaigns", g.n_campaigns);
  v.read("campaign_size_min", g.campaign_size_min);
  v.read("campaign_size_max", g.campaign_size_max);
  v.read("n_creatives", g.n_creatives);
  v.read("cutout_fraction", g.cutout_fraction);
  v.read("horizon_days", g.horizon_days);
  v.read("censor_at_horizon", g.censor_at_horizon);
  v.read("oracle_threshold", g.oracle_threshold);
  v.read("oracle_window", g.oracle_window);
  v.read("doomed_q_lo", g.doomed_q_lo);
  v.read("doomed_q_hi", g.doomed_q_hi);
  v.read("healthy_q_lo", g.healthy_q_lo);
  v.read("healthy_q_hi", g.healthy_q_hi);
  v.read("impressions_log_mean", g.impressions_log_mean);
  v.read("impressions_log_sigma", g.impressions_log_sigma);
  v.read("daily_impression_sigma", g.daily_impression_sigma);
  v.read("base_ctr_lo", g.base_ctr_lo);
  v.read("base_ctr_hi", g.base_ctr_hi);
  v.read("cpc_lo", g.cpc_lo);
  v.read("cpc_hi", g.cpc_hi);
  v.read("ratio_scale", g.ratio_scale);
  v.read("ratio_log_jitter", g.ratio_log_jitter);
  v.read("target_slack_lo", g.target_slack_lo);
  v.read("target_slack_hi", g.target_slack_hi);
  v.read("cvr_scale", g.cvr_scale);
  v.read("doomed_decay_lo", g.doomed_decay_lo);
  v.read("doomed_decay_hi", g.doomed_decay_hi);
  v.read("wearout_decay_lo", g.wearout_decay_lo);
  v.read("wearout_decay_hi", g.wearout_decay_hi);
  v.read("wearout_shape", g.wearout_shape);
  v.read("random_stop_hazard", g.random_stop_hazard);
  v.read("text_dim", g.text_dim);
  v.read("image_dim", g.image_dim);
  v.read("embed_noise", g.embed_noise);
  v.read("embed_signal", g.embed_signal);
  v.read("embed_signal_u", g.embed_signal_u);
  v.read("embed_signal_u_text", g.embed_signal_u_text);
  v.read("embed_interact", g.embed_interact);
  v.read("sales_value_log_mean", g.sales_value_log_mean);
  v.read("sales_value_log_sigma", g.sales_value_log_sigma);
  v.finish();
}

void read_model(const json& j, ModelSection& m) {
  StrictView v(j, "model");
  v.read("task", m.task);
  v.read("use_text", m.use_text);
  v.read("use_image", m.use_image);
  v.read("use_stats", m.use_stats);
  v.read("use_series", m.use_series);
  v.read("genre_dim", m.genre_dim);
  v.read("rnn_hidden", m.rnn_hidden);
  v.read("trunk", m.trunk);
  v.read("classifier_horizon", m.classifier_horizon);
  v.finish();
}

void read_training(const json& j, TrainingSection& t) {
  StrictView v(j, "training");
  v.read("batch_size", t.batch_size);
  v.read("epochs", t.epochs);
  v.read("lr", t.lr);
  v.read("seed", t.seed);
  v.read("weighting", t.weighting);
  v.read("lambda", t.lambda);
  v.read("observe_day", t.observe_day);
  v.finish();
}

void read_evaluation(const json& j, EvaluationSection& e) {
  StrictView v(j, "evaluation");
  v.read("threshold", e.threshold);
  v.read("horizons", e.horizons);
  v.read("top_sales_fraction", e.top_sales_fraction);
  v.read("long_observe_day", e.long_observe_day);
  v.read("checkpoint_step", e.checkpoint_step);
  v.read("ablation_days", e.ablation_days);
  v.finish();
}

void read_paths(const json& j, PathsSection& p) {
  StrictView v(j, "paths");
  v.read("dataset_dir", p.dataset_dir);
  v.read("checkpoint", p.checkpoint);
  v.read("report_dir", p.report_dir);
  v.finish();
}

json generator_json(const GeneratorConfig& g) {
  return json{{"seed", g.seed},
              {"n_campaigns", g.n_campaigns},
              {"campaign_size_min", g.campaign_size_min},
              {"campaign_size_max", g.campaign_size_max},
              {"n_creatives", g.n_creatives},
              {"cutout_fraction", g.cutout_fraction},
              {"horizon_days", g.horizon_days},
              {"censor_at_horizon", g.censor_at_horizon},
              {"oracle_threshold", g.oracle_threshold},
              {"oracle_window", g.oracle_window},
              {"doomed_q_lo", g.doomed_q_lo},
              {"doomed_q_hi", g.doomed_q_hi},
              {"healthy_q_lo", g.healthy_q_lo},
              {"healthy_q_hi", g.healthy_q_hi},
              {"impressions_log_mean", g.impressions_log_mean},
              {"impressions_log_sigma", g.impressions_log_sigma},
              {"daily_impression_sigma", g.daily_impression_sigma},
              {"base_ctr_lo", g.base_ctr_lo},
              {"base_ctr_hi", g.base_ctr_hi},
              {"cpc_lo", g.cpc_lo},
              {"cpc_hi", g.cpc_hi},
              {"ratio_scale", g.ratio_scale},
              {"ratio_log_jitter", g.ratio_log_jitter},
              {"target_slack_lo", g.target_slack_lo},
              {"target_slack_hi", g.target_slack_hi},
              {"cvr_scale", g.cvr_scale},
              {"doomed_decay_lo", g.doomed_decay_lo},
              {"doomed_decay_hi", g.doomed_decay_hi},
              {"wearout_decay_lo", g.wearout_decay_lo},
              {"wearout_decay_hi", g.wearout_decay_hi},
              {"wearout_shape", g.wearout_shape},
              {"random_stop_hazard", g.random_stop_hazard},
              {"text_dim", g.text_dim},
              {"image_dim", g.image_dim},
              {"embed_noise", g.embed_noise},
              {"embed_signal", g.embed_signal},
              {"embed_signal_u", g.embed_signal_u},
              {"embed_signal_u_text", g.embed_signal_u_text},
              {"embed_interact", g.embed_interact},
              {"sales_value_log_mean", g.sales_value_log_mean},
              {"sales_value_log_sigma", g.sales_value_log_sigma}};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") +
                                e.what());
  }
  ExperimentConfig cfg;
  StrictView top(j, "");
  top.read("schema_version", cfg.schema_version);
  if (cfg.schema_version != 1) {
    throw std::invalid_argument("config: unsupported schema_version " +
                                std::to_string(cfg.schema_version));
  }
  if (const json* g = top.child("generator")) read_generator(*g, cfg.generator);
  if (const json* m = top.child("model")) read_model(*m, cfg.model);
  if (const json* t = top.child("training")) read_training(*t, cfg.training);
  if (const json* e = top.child("evaluation")) read_evaluation(*e, cfg.evaluation);
  if (const json* p = top.child("paths")) read_paths(*p, cfg.paths);
  top.finish();
  validate_experiment_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path));
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  validate_config(cfg.generator);
  task_mode_from_name(cfg.model.task);          // throws on unknown names
  weight_mode_from_name(cfg.training.weighting);
  require(cfg.model.genre_dim >= 1, "model.genre_dim must be >= 1");
  require(cfg.model.rnn_hidden >= 1, "model.rnn_hidden must be >= 1");
  require(!cfg.model.trunk.empty(), "model.trunk must not be empty");
  for (std::size_t w : cfg.model.trunk) {
    require(w >= 1, "model.trunk widths must be >= 1");
  }
  require(cfg.model.classifier_horizon >= 1,
          "model.classifier_horizon must be >= 1");
  require(cfg.training.batch_size >= 1, "training.batch_size must be >= 1");
  require(std::isfinite(cfg.training.lr) && cfg.training.lr > 0.0,
          "training.lr must be positive and finite");
  require(cfg.training.lambda >= 0.0 && cfg.training.lambda <= 1.0,
          "training.lambda must lie in [0, 1]");
  require(cfg.training.observe_day >= 1, "training.observe_day must be >= 1");
  require(cfg.evaluation.threshold > 0.0 && cfg.evaluation.threshold < 1.0,
          "evaluation.threshold must lie in (0, 1)");
  require(!cfg.evaluation.horizons.empty(),
          "evaluation.horizons must not be empty");
  for (std::size_t h : cfg.evaluation.horizons) {
    require(h >= 1, "evaluation.horizons entries must be >= 1");
  }
  require(cfg.evaluation.top_sales_fraction > 0.0 &&
              cfg.evaluation.top_sales_fraction <= 1.0,
          "evaluation.top_sales_fraction must lie in (0, 1]");
  require(cfg.evaluation.long_observe_day >= 1,
          "evaluation.long_observe_day must be >= 1");
  require(cfg.evaluation.checkpoint_step >= 1,
          "evaluation.checkpoint_step must be >= 1");
  require(!cfg.paths.dataset_dir.empty(), "paths.dataset_dir must not be empty");
  require(!cfg.paths.checkpoint.empty(), "paths.checkpoint must not be empty");
  require(!cfg.paths.report_dir.empty(), "paths.report_dir must not be empty");
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  const json j{
      {"schema_version", cfg.schema_version},
      {"generator", generator_json(cfg.generator)},
      {"model",
       {{"task", cfg.model.task},
        {"use_text", cfg.model.use_text},
        {"use_image", cfg.model.use_image},
        {"use_stats", cfg.model.use_stats},
        {"use_series", cfg.model.use_series},
        {"genre_dim", cfg.model.genre_dim},
        {"rnn_hidden", cfg.model.rnn_hidden},
        {"trunk", cfg.model.trunk},
        {"classifier_horizon", cfg.model.classifier_horizon}}},
      {"training",
       {{"batch_size", cfg.training.batch_size},
        {"epochs", cfg.training.epochs},
        {"lr", cfg.training.lr},
        {"seed", cfg.training.seed},
        {"weighting", cfg.training.weighting},
        {"lambda", cfg.training.lambda},
        {"observe_day", cfg.training.observe_day}}},
      {"evaluation",
       {{"threshold", cfg.evaluation.threshold},
        {"horizons", cfg.evaluation.horizons},
        {"top_sales_fraction", cfg.evaluation.top_sales_fraction},
        {"long_observe_day", cfg.evaluation.long_observe_day},
        {"checkpoint_step", cfg.evaluation.checkpoint_step},
        {"ablation_days", cfg.evaluation.ablation_days}}},
      {"paths",
       {{"dataset_dir", cfg.paths.dataset_dir},
        {"checkpoint", cfg.paths.checkpoint},
        {"report_dir", cfg.paths.report_dir}}}};
  return j.dump(2) + "\n";
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  const std::string text = experiment_config_json(cfg);
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a 64-bit
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

WeightMode weight_mode_from_name(const std::string& name) {
  if (name == "none") return WeightMode::kNone;
  if (name == "ctr") return WeightMode::kCtr;
  if (name == "impression") return WeightMode::kImpression;
  throw std::invalid_argument("unknown weighting mode: " + name);
}

std::string weight_mode_name(WeightMode mode) {
  switch (mode) {
    case WeightMode::kNone: return "none";
    case WeightMode::kCtr: return "ctr";
    case WeightMode::kImpression: return "impression";
  }
  throw std::logic_error("unknown weighting mode");
}

ModelSpec model_spec_from(const ExperimentConfig& cfg,
                          std::size_t genre_vocab_size) {
  ModelSpec spec;
  spec.task = task_mode_from_name(cfg.model.task);
  spec.mask.text = cfg.model.use_text;
  spec.mask.image = cfg.model.use_image;
  spec.mask.stats = cfg.model.use_stats;
  spec.mask.series = cfg.model.use_series;
  spec.text_dim = cfg.generator.text_dim;
  spec.image_dim = cfg.generator.image_dim;
  spec.genre_vocab = genre_vocab_size;
  spec.genre_dim = cfg.model.genre_dim;
  spec.rnn_hidden = cfg.model.rnn_hidden;
  spec.trunk = cfg.model.trunk;
  return spec;
}

LossWeighting weighting_from(const TrainingSection& training) {
  return LossWeighting{weight_mode_from_name(training.weighting),
                       training.lambda};
}

// ---------- dataset plumbing ----------

namespace {

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split name: " + name);
}

}  // namespace

DatasetBundle build_dataset(const GeneratorConfig& generator) {
  DatasetBundle data;
  GeneratedDataset raw = generate(generator);
  data.creatives = std::move(raw.creatives);
  data.traces = std::move(raw.traces);

  const SplitResult split =
      split_campaigns(data.creatives, SplitFractions{}, generator.seed);
  std::vector<std::string> train_genres;
  std::vector<const AdCreative*> train_ptrs;
  for (const AdCreative& c : data.creatives) {
    if (split.by_campaign.at(c.campaign_id) == Split::kTrain) {
      train_genres.push_back(c.genre);
      train_ptrs.push_back(&c);
    }
  }
  // Vocabulary and the impression normalizer come from the training split
  // only; val/test genres fall back to the unknown bucket.
  data.vocab = GenreVocab::build(train_genres);

  data.meta.schema_version = 1;
  data.meta.seed = generator.seed;
  data.meta.n_campaigns = split.by_campaign.size();
  data.meta.n_creatives = data.creatives.size();
  data.meta.text_dim = generator.text_dim;
  data.meta.image_dim = generator.image_dim;
  data.meta.genre_vocab = data.vocab.names;
  data.meta.p95_impressions = p95_impressions(train_ptrs);
  for (const auto& [campaign, s] : split.by_campaign) {
    data.meta.campaign_split[campaign] = split_name(s);
  }
  return data;
}

void save_dataset(const std::filesystem::path& dir, const DatasetBundle& data) {
  std::filesystem::create_directories(dir);
  write_creatives_jsonl((dir / "creatives.jsonl").string(), data.creatives);
  write_oracle_jsonl((dir / "oracle.jsonl").string(), data.traces);
  write_metadata_json((dir / "metadata.json").string(), data.meta);
  std::string split = "campaign_id,split\n";
  for (const auto& [campaign, name] : data.meta.campaign_split) {
    split += campaign + "," + name + "\n";
  }
  write_file_atomic(dir / "split.csv", split);
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  DatasetBundle data;
  data.creatives = read_creatives_jsonl((dir / "creatives.jsonl").string());
  data.traces = read_oracle_jsonl((dir / "oracle.jsonl").string());
  data.meta = read_metadata_json((dir / "metadata.json").string());
  if (data.meta.genre_vocab.empty() ||
      data.meta.genre_vocab.front() != kUnknownGenre) {
    throw std::runtime_error("dataset: metadata genre vocabulary must reserve "
                             "slot 0 for unknown genres");
  }
  data.vocab.names = data.meta.genre_vocab;
  if (data.traces.size() != data.creatives.size()) {
    throw std::runtime_error("dataset: oracle traces do not align with "
                             "creatives");
  }
  for (const AdCreative& c : data.creatives) {
    auto it = data.meta.campaign_split.find(c.campaign_id);
    if (it == data.meta.campaign_split.end()) {
      throw std::runtime_error("dataset: campaign " + c.campaign_id +
                               " missing from the split map");
    }
    split_from_name(it->second);  // validates the stored name
  }

  // split.csv restates the metadata split map for flat-file consumers; if
  // present it must agree.
  const std::filesystem::path split_path = dir / "split.csv";
  if (std::filesystem::exists(split_path)) {
    std::istringstream in(read_file(split_path));
    std::string line;
    if (!std::getline(in, line) || line != "campaign_id,split") {
      throw std::runtime_error("dataset: split.csv has a bad header");
    }
    std::map<std::string, std::string> from_csv;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw std::runtime_error("dataset: malformed split.csv row: " + line);
      }
      from_csv[line.substr(0, comma)] = line.substr(comma + 1);
    }
    if (from_csv != data.meta.campaign_split) {
      throw std::runtime_error("dataset: split.csv disagrees with metadata");
    }
  }
  return data;
}

Split split_of(const DatasetBundle& data, const AdCreative& creative) {
  auto it = data.meta.campaign_split.find(creative.campaign_id);
  if (it == data.meta.campaign_split.end()) {
    throw std::out_of_range("campaign " + creative.campaign_id +
                            " missing from the split map");
  }
  return split_from_name(it->second);
}

std::vector<const AdCreative*> creatives_in(const DatasetBundle& data,
                                            Split which) {
  std::vector<const AdCreative*> out;
  for (const AdCreative& c : data.creatives) {
    if (split_of(data, c) == which) out.push_back(&c);
  }
  return out;
}

double p95_impressions(const std::vector<const AdCreative*>& creatives) {
  if (creatives.empty()) return 0.0;
  std::vector<double> totals;
  totals.reserve(creatives.size());
  for (const AdCreative* c : creatives) {
    totals.push_back(static_cast<double>(total_impressions(*c)));
  }
  std::sort(totals.begin(), totals.end());
  // nearest-rank percentile: rank = ceil(0.95 n), 1-based
  const std::size_t rank = (totals.size() * 95 + 99) / 100;
  return totals[rank - 1];
}

// ---------- supervision ----------

SampleTargets targets_for(const AdCreative& creative,
                          const SupervisionContext& ctx) {
  SampleTargets t;
  t.short_labels = labels_from_lifetime(TimeGrid::short_term(),
                                        creative.lifetime_days,
                                        creative.censored);
  t.long_labels = labels_from_lifetime(TimeGrid::long_term(),
                                       creative.lifetime_days,
                                       creative.censored);
  t.overall_labels = labels_from_lifetime(TimeGrid::overall(),
                                          creative.lifetime_days,
                                          creative.censored);
  t.binary_label =
      creative.lifetime_days > static_cast<double>(ctx.classifier_horizon)
          ? 1.0
          : 0.0;
  t.day_target = std::min(creative.lifetime_days, ctx.day_scale) / ctx.day_scale;
  t.ctr = lifetime_ctr(creative);
  t.impression_ratio = impression_weight(
      static_cast<double>(total_impressions(creative)), ctx.p95);
  return t;
}

std::vector<LabeledExample> make_examples(
    const std::vector<const AdCreative*>& creatives, const GenreVocab& vocab,
    std::size_t observe_day, const SupervisionContext& ctx) {
  if (observe_day < 1) {
    throw std::invalid_argument("observe_day must be >= 1");
  }
  std::vector<LabeledExample> out;
  out.reserve(creatives.size());
  for (const AdCreative* c : creatives) {
    const std::size_t day = std::min(observe_day, c->daily.size());
    out.push_back({model_input_from(*c, vocab, day), targets_for(*c, ctx)});
  }
  return out;
}

// ---------- evaluation building blocks ----------

GridRisks grid_risks(const ModelSpec& spec, const HazardPrediction& pred) {
  GridRisks out;
  switch (spec.task) {
    case TaskMode::kShort:
      out.short_risk = risk_score(pred.heads.front());
      break;
    case TaskMode::kLong:
      out.long_risk = risk_score(pred.heads.front());
      break;
    case TaskMode::kMultiTask:
      out.short_risk = risk_score(pred.heads[0]);
      out.long_risk = risk_score(pred.heads[1]);
      out.overall_risk = risk_score(*pred.merged);
      break;
    case TaskMode::kOverall: {
      const HazardVector& h = pred.heads.front();
      const std::vector<double>& v = h.values();
      out.short_risk = risk_score(HazardVector(
          TimeGrid::short_term(), std::vector<double>(v.begin(), v.begin() + 4)));
      // The long grid's first interval spans the whole short grid; the
      // equivalent hazard is the chance of not surviving all four.
      double survive_short = 1.0;
      for (std::size_t l = 1; l <= 4; ++l) survive_short *= 1.0 - h[l];
      out.long_risk = risk_score(HazardVector(
          TimeGrid::long_term(),
          {1.0 - survive_short, h[5], h[6], h[7], h[8]}));
      out.overall_risk = risk_score(h);
      break;
    }
    case TaskMode::kClassifier:
    case TaskMode::kRegressor:
      throw std::logic_error("grid_risks requires a hazard task");
  }
  return out;
}

double survival_past(const HazardVector& hazards, std::size_t horizon_day) {
  const TimeGrid& grid = hazards.grid();
  double s = 1.0;
  for (std::size_t l = 1; l <= grid.interval_count(); ++l) {
    s *= 1.0 - hazards[l];
    if (grid.upper(l) == static_cast<double>(horizon_day)) return s;
  }
  throw std::invalid_argument("day " + std::to_string(horizon_day) +
                              " is not an interval bound of the model's grid");
}

PredictionRecord prediction_record(const ModelSpec& spec, const Prediction& pred,
                                   const std::string& creative_id,
                                   double threshold) {
  PredictionRecord rec;
  rec.creative_id = creative_id;
  const std::vector<std::string> names = spec.head_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    rec.heads.emplace_back(names[i], pred.heads[i]);
  }
  switch (spec.task) {
    case TaskMode::kClassifier:
      // survival probability; risk ranks low-survival creatives first
      rec.risk_score = 1.0 - pred.heads[0][0];
      break;
    case TaskMode::kRegressor:
      rec.risk_score = -pred.heads[0][0];
      break;
    default: {
      const std::vector<HazardVector> hv = to_hazards(spec, pred);
      std::optional<HazardVector> merged;
      if (spec.task == TaskMode::kMultiTask) {
        merged = merge_two_term(hv[0], hv[1]);
        rec.merged = merged->values();
      }
      const HazardVector& full = merged ? *merged : hv.front();
      rec.risk_score = risk_score(full);
      rec.flagged_interval = decide_discontinuation(full, threshold);
      break;
    }
  }
  return rec;
}

// ---------- experiment presets ----------

namespace {

struct ModelPlan {
  std::string name;
  TaskMode task = TaskMode::kMultiTask;
  FeatureMask mask;
  WeightMode weighting = WeightMode::kNone;
  std::size_t classifier_horizon = 0;  // nonzero for classifiers only
};

// Everything evaluation needs from one trained model over the test split,
// index-aligned with the test creatives.
struct ModelOutputs {
  std::vector<double> short_risk, long_risk, overall_risk;
  std::map<std::size_t, std::vector<double>> survive;  // horizon -> P(past it)
  std::vector<double> scalar;                          // classifier/regressor
};

HazardPrediction lift_to_hazards(const ModelSpec& spec, const Prediction& pred) {
  HazardPrediction hp;
  hp.heads = to_hazards(spec, pred);
  if (spec.task == TaskMode::kMultiTask) {
    hp.merged = merge_two_term(hp.heads[0], hp.heads[1]);
  }
  return hp;
}

bool is_hazard_task(TaskMode task) {
  return task != TaskMode::kClassifier && task != TaskMode::kRegressor;
}

bool grid_has_bound(const TimeGrid& grid, std::size_t day) {
  for (std::size_t l = 1; l <= grid.interval_count(); ++l) {
    if (grid.upper(l) == static_cast<double>(day)) return true;
  }
  return false;
}

void log_line(std::ostream* log, std::mutex& mu, const std::string& line) {
  if (!log) return;
  std::lock_guard<std::mutex> lock(mu);
  (*log) << line << "\n" << std::flush;
}

// Runs job(i) for i in [0, n) on up to `threads` workers. Each job writes only
// its own slot, so results are identical for any thread count.
void run_indexed(std::size_t n, std::size_t threads,
                 const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(
      1, std::min(threads == 0 ? 1 : threads, n == 0 ? 1 : n));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

OfflineSuiteResult run_offline_suite(const ExperimentConfig& cfg,
                                     const DatasetBundle& data,
                                     std::size_t threads, std::ostream* log) {
  const std::string fingerprint = config_fingerprint(cfg);
  const double threshold = cfg.evaluation.threshold;

  const std::vector<const AdCreative*> train_ptrs =
      creatives_in(data, Split::kTrain);
  const std::vector<const AdCreative*> val_ptrs =
      creatives_in(data, Split::kVal);
  const std::vector<const AdCreative*> test_ptrs =
      creatives_in(data, Split::kTest);
  if (train_ptrs.empty() || val_ptrs.empty() || test_ptrs.empty()) {
    throw std::invalid_argument(
        "offline suite needs non-empty train/val/test splits");
  }
  for (std::size_t h : cfg.evaluation.horizons) {
    if (!grid_has_bound(TimeGrid::overall(), h)) {
      throw std::invalid_argument(
          "evaluation horizon " + std::to_string(h) +
          " is not an interval bound of the overall grid");
    }
  }

  SupervisionContext ctx;
  ctx.p95 = data.meta.p95_impressions;
  ctx.classifier_horizon = cfg.model.classifier_horizon;

  const std::size_t observe = cfg.training.observe_day;
  const std::vector<LabeledExample> base_train =
      make_examples(train_ptrs, data.vocab, observe, ctx);
  const std::vector<LabeledExample> base_val =
      make_examples(val_ptrs, data.vocab, observe, ctx);
  const std::vector<LabeledExample> base_test =
      make_examples(test_ptrs, data.vocab, observe, ctx);

  const ModelSpec base_spec = model_spec_from(cfg, data.vocab.size());
  const FeatureMask full_mask{};  // all blocks on
  FeatureMask content_only = full_mask;
  content_only.image = false;
  content_only.series = false;

  std::vector<ModelPlan> plans;
  plans.push_back({"single-short", TaskMode::kShort, full_mask,
                   WeightMode::kNone, 0});
  plans.push_back({"single-short-stats-text", TaskMode::kShort, content_only,
                   WeightMode::kNone, 0});
  plans.push_back({"single-long", TaskMode::kLong, full_mask, WeightMode::kNone,
                   0});
  plans.push_back({"single-overall", TaskMode::kOverall, full_mask,
                   WeightMode::kNone, 0});
  plans.push_back({"multi-task", TaskMode::kMultiTask, full_mask,
                   WeightMode::kNone, 0});
  plans.push_back({"multi-task-imp", TaskMode::kMultiTask, full_mask,
                   WeightMode::kImpression, 0});
  plans.push_back({"multi-task-ctr", TaskMode::kMultiTask, full_mask,
                   WeightMode::kCtr, 0});
  for (std::size_t h : cfg.evaluation.horizons) {
    plans.push_back({"classifier-h" + std::to_string(h), TaskMode::kClassifier,
                     full_mask, WeightMode::kCtr, h});
  }
  plans.push_back({"regressor", TaskMode::kRegressor, full_mask,
                   WeightMode::kCtr, 0});

  OfflineSuiteResult result;
  result.models.resize(plans.size());
  std::vector<ModelOutputs> outputs(plans.size());
  std::mutex log_mutex;

  auto run_one = [&](std::size_t i) {
    const ModelPlan& plan = plans[i];
    ModelSpec spec = base_spec;
    spec.task = plan.task;
    spec.mask = plan.mask;

    TrainConfig tcfg;
    tcfg.batch_size = cfg.training.batch_size;
    tcfg.epochs = cfg.training.epochs;
    tcfg.adam.lr = cfg.training.lr;
    tcfg.seed = cfg.training.seed;
    tcfg.weighting = LossWeighting{plan.weighting, cfg.training.lambda};

    TrainResult trained;
    if (plan.classifier_horizon != 0) {
      // Rebind the binary target to this classifier's horizon.
      std::vector<LabeledExample> train_ex = base_train;
      std::vector<LabeledExample> val_ex = base_val;
      const double horizon = static_cast<double>(plan.classifier_horizon);
      for (std::size_t j = 0; j < train_ex.size(); ++j) {
        train_ex[j].targets.binary_label =
            train_ptrs[j]->lifetime_days > horizon ? 1.0 : 0.0;
      }
      for (std::size_t j = 0; j < val_ex.size(); ++j) {
        val_ex[j].targets.binary_label =
            val_ptrs[j]->lifetime_days > horizon ? 1.0 : 0.0;
      }
      trained = train(spec, train_ex, &val_ex, tcfg);
    } else {
      trained = train(spec, base_train, &base_val, tcfg);
    }

    log_line(log, log_mutex,
             "[suite] " + plan.name + ": best epoch " +
                 std::to_string(trained.best_epoch) + " of " +
                 std::to_string(tcfg.epochs));

    ModelOutputs& out = outputs[i];
    SuiteModelResult& slot = result.models[i];
    const ModelState& state = trained.final_state;
    for (std::size_t j = 0; j < base_test.size(); ++j) {
      const Prediction pred = forward(spec, state, base_test[j].input);
      slot.predictions.push_back(prediction_record(
          spec, pred, test_ptrs[j]->creative_id, threshold));
      if (is_hazard_task(spec.task)) {
        const HazardPrediction hp = lift_to_hazards(spec, pred);
        const GridRisks risks = grid_risks(spec, hp);
        if (risks.short_risk) out.short_risk.push_back(*risks.short_risk);
        if (risks.long_risk) out.long_risk.push_back(*risks.long_risk);
        if (risks.overall_risk) out.overall_risk.push_back(*risks.overall_risk);
        const HazardVector& full = full_hazards(hp);
        for (std::size_t h : cfg.evaluation.horizons) {
          if (grid_has_bound(full.grid(), h)) {
            out.survive[h].push_back(survival_past(full, h));
          }
        }
      } else {
        out.scalar.push_back(pred.heads[0][0]);
      }
    }

    slot.name = plan.name;
    slot.spec = spec;
    slot.weighting = tcfg.weighting;
    slot.classifier_horizon = plan.classifier_horizon;
    slot.train = std::move(trained);
  };

  run_indexed(plans.size(), threads, run_one);

  // ----- concordance tables -----
  std::vector<AdCreative> test_creatives;
  test_creatives.reserve(test_ptrs.size());
  for (const AdCreative* c : test_ptrs) test_creatives.push_back(*c);

  const std::vector<std::string> top_ids =
      top_sales_slice(test_creatives, cfg.evaluation.top_sales_fraction);
  const std::unordered_set<std::string> top_set(top_ids.begin(), top_ids.end());
  std::vector<std::size_t> top_index;
  for (std::size_t j = 0; j < test_ptrs.size(); ++j) {
    if (top_set.count(test_ptrs[j]->creative_id)) top_index.push_back(j);
  }

  struct GridDef {
    const char* name;
    TimeGrid grid;
    const std::vector<double> ModelOutputs::* risks;
  };
  const GridDef grids[] = {
      {"short", TimeGrid::short_term(), &ModelOutputs::short_risk},
      {"long", TimeGrid::long_term(), &ModelOutputs::long_risk},
      {"overall", TimeGrid::overall(), &ModelOutputs::overall_risk},
  };

  // key: model|grid|slice -> concordance index
  std::map<std::string, double> ci_of;
  std::string ci_csv = "model,weighting,grid,slice,ci,n_pairs\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!is_hazard_task(plans[i].task)) continue;
    for (const GridDef& g : grids) {
      const std::vector<double>& risks = outputs[i].*(g.risks);
      if (risks.empty()) continue;
      std::vector<SurvivalObservation> obs;
      obs.reserve(test_ptrs.size());
      for (const AdCreative* c : test_ptrs) {
        obs.push_back(
            observe_on_grid(c->lifetime_days, c->censored, g.grid.horizon()));
      }
      const auto emit = [&](const std::string& slice,
                            const std::vector<double>& r,
                            const std::vector<SurvivalObservation>& o) {
        const ConcordanceCounts counts = concordance_index(r, o);
        const double ci = counts.index();
        ci_of[plans[i].name + "|" + g.name + "|" + slice] = ci;
        ci_csv += plans[i].name + "," + weight_mode_name(plans[i].weighting) +
                  "," + g.name + "," + slice + "," + fmt(ci) + "," +
                  std::to_string(counts.admissible) + "\n";
        result.rows.push_back({plans[i].name + ".ci-" + g.name, slice, ci,
                               static_cast<std::size_t>(counts.admissible),
                               fingerprint});
      };
      emit("all", risks, obs);
      std::vector<double> top_risks;
      std::vector<SurvivalObservation> top_obs;
      for (std::size_t j : top_index) {
        top_risks.push_back(risks[j]);
        top_obs.push_back(obs[j]);
      }
      emit("top-sales", top_risks, top_obs);
    }
  }
  result.ci_csv = std::move(ci_csv);

  // ----- F1 per horizon: hazard framework vs the scalar baselines -----
  const auto plan_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (plans[i].name == name) return i;
    }
    throw std::logic_error("missing suite model " + name);
  };
  const std::size_t hazard_i = plan_index("multi-task-ctr");
  const std::size_t regressor_i = plan_index("regressor");

  struct F1Cell {
    F1Result f1;
    std::size_t n = 0;
  };
  std::map<std::string, F1Cell> f1_of;  // framework|horizon
  std::string f1_csv = "framework,horizon,f1,precision,recall,n\n";
  for (std::size_t h : cfg.evaluation.horizons) {
    const double horizon = static_cast<double>(h);
    // Creatives censored at or before the horizon have an unknowable label.
    std::vector<std::size_t> keep;
    std::vector<bool> actual;
    for (std::size_t j = 0; j < test_ptrs.size(); ++j) {
      const AdCreative& c = *test_ptrs[j];
      if (c.censored && c.lifetime_days <= horizon) continue;
      keep.push_back(j);
      actual.push_back(c.lifetime_days > horizon);
    }
    const auto emit = [&](const std::string& framework,
                          const std::vector<bool>& predicted) {
      const F1Result r = f1_score(predicted, actual);
      f1_of[framework + "|" + std::to_string(h)] = {r, keep.size()};
      f1_csv += framework + "," + std::to_string(h) + "," + fmt(r.f1) + "," +
                fmt(r.precision) + "," + fmt(r.recall) + "," +
                std::to_string(keep.size()) + "\n";
      result.rows.push_back({"f1-" + framework, "h" + std::to_string(h), r.f1,
                             keep.size(), fingerprint});
    };

    const std::vector<double>& survive = outputs[hazard_i].survive.at(h);
    std::vector<bool> hazard_pred;
    for (std::size_t j : keep) hazard_pred.push_back(survive[j] >= 0.5);
    emit("hazard", hazard_pred);

    const std::size_t cls_i = plan_index("classifier-h" + std::to_string(h));
    std::vector<bool> cls_pred;
    for (std::size_t j : keep) cls_pred.push_back(outputs[cls_i].scalar[j] >= 0.5);
    emit("classification", cls_pred);

    std::vector<bool> reg_pred;
    for (std::size_t j : keep) {
      reg_pred.push_back(outputs[regressor_i].scalar[j] * ctx.day_scale >
                         horizon);
    }
    emit("regression", reg_pred);
  }
  result.f1_csv = std::move(f1_csv);

  // ----- directional checks -----
  const auto ci_at = [&](const std::string& model, const std::string& grid,
                         const std::string& slice) {
    return ci_of.at(model + "|" + grid + "|" + slice);
  };
  const auto add_check = [&](const std::string& name, double observed,
                             double required, const std::string& detail) {
    DirectionalCheck c{name, observed, required, observed >= required, detail};
    result.rows.push_back({"check." + name, c.pass ? "pass" : "fail", observed,
                           0, fingerprint});
    result.checks.push_back(std::move(c));
  };

  {
    const double mtl = ci_at("multi-task", "overall", "all");
    const double single = ci_at("single-overall", "overall", "all");
    add_check("mtl-overall-gain", mtl - single, 0.03,
              "multi-task " + fmt(mtl) + " vs single-task " + fmt(single));
  }
  {
    const double full = ci_at("single-short", "short", "all");
    const double ablated = ci_at("single-short-stats-text", "short", "all");
    add_check("short-feature-gain", full - ablated, 0.0,
              "all features " + fmt(full) + " vs stats+text " + fmt(ablated));
  }
  add_check("short-ci-floor", ci_at("multi-task", "short", "all"), 0.75,
            "multi-task short-grid concordance");
  add_check("long-ci-floor", ci_at("multi-task", "long", "all"), 0.75,
            "multi-task long-grid concordance");
  for (const GridDef& g : grids) {
    const double weighted = ci_at("multi-task-ctr", g.name, "all");
    const double plain = ci_at("multi-task", g.name, "all");
    add_check(std::string("ctr-gain-") + g.name, weighted - plain, 0.0,
              "ctr " + fmt(weighted) + " vs none " + fmt(plain));
  }
  {
    const double weighted = ci_at("multi-task-ctr", "overall", "top-sales");
    const double plain = ci_at("multi-task", "overall", "top-sales");
    add_check("ctr-gain-top-sales", weighted - plain, 0.0,
              "ctr " + fmt(weighted) + " vs none " + fmt(plain) +
                  " on the top-sales slice");
  }
  for (std::size_t h : cfg.evaluation.horizons) {
    const std::string hs = std::to_string(h);
    const double hazard = f1_of.at("hazard|" + hs).f1.f1;
    const double baseline = std::max(f1_of.at("classification|" + hs).f1.f1,
                                     f1_of.at("regression|" + hs).f1.f1);
    // Strictly better everywhere; a wide margin is demanded late, where the
    // scalar baselines collapse to the majority answer.
    const double required = h >= 30 ? 0.10 : 1e-9;
    add_check("f1-margin-h" + hs, hazard - baseline, required,
              "hazard " + fmt(hazard) + " vs best baseline " + fmt(baseline));
  }

  result.all_checks_pass = true;
  for (const DirectionalCheck& c : result.checks) {
    result.all_checks_pass = result.all_checks_pass && c.pass;
  }

  // ----- digest -----
  std::ostringstream digest;
  digest << "offline suite (config " << fingerprint << ")\n";
  digest << "test creatives: " << test_ptrs.size() << ", top-sales slice: "
         << top_index.size() << "\n\nconcordance (slice=all)\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!is_hazard_task(plans[i].task)) continue;
    digest << "  " << plans[i].name;
    for (const GridDef& g : grids) {
      const auto it = ci_of.find(plans[i].name + "|" + std::string(g.name) +
                                 "|all");
      if (it != ci_of.end()) {
        digest << "  " << g.name << "=" << fmt(it->second);
      }
    }
    digest << "\n";
  }
  digest << "\nF1 by horizon\n";
  for (std::size_t h : cfg.evaluation.horizons) {
    const std::string hs = std::to_string(h);
    digest << "  h" << hs << "  hazard=" << fmt(f1_of.at("hazard|" + hs).f1.f1)
           << "  classification="
           << fmt(f1_of.at("classification|" + hs).f1.f1)
           << "  regression=" << fmt(f1_of.at("regression|" + hs).f1.f1)
           << "\n";
  }
  digest << "\nchecks\n";
  for (const DirectionalCheck& c : result.checks) {
    digest << "  " << (c.pass ? "[ok]  " : "[FAIL]") << " " << c.name
           << " observed=" << fmt(c.observed) << " required=" << fmt(c.required)
           << " (" << c.detail << ")\n";
  }
  result.summary = digest.str();
  return result;
}

CaseStudiesResult run_case_studies(const ExperimentConfig& cfg,
                                   const DatasetBundle& data,
                                   std::ostream* log) {
  const std::string fingerprint = config_fingerprint(cfg);
  const double threshold = cfg.evaluation.threshold;

  const std::vector<const AdCreative*> train_ptrs =
      creatives_in(data, Split::kTrain);
  const std::vector<const AdCreative*> val_ptrs =
      creatives_in(data, Split::kVal);
  const std::vector<const AdCreative*> test_ptrs =
      creatives_in(data, Split::kTest);
  if (train_ptrs.empty() || val_ptrs.empty() || test_ptrs.empty()) {
    throw std::invalid_argument(
        "case studies need non-empty train/val/test splits");
  }

  SupervisionContext ctx;
  ctx.p95 = data.meta.p95_impressions;
  ctx.classifier_horizon = cfg.model.classifier_horizon;

  CaseStudiesResult result;
  result.model_name = "multi-task-ctr";
  ModelSpec spec = model_spec_from(cfg, data.vocab.size());
  spec.task = TaskMode::kMultiTask;
  result.spec = spec;

  TrainConfig tcfg;
  tcfg.batch_size = cfg.training.batch_size;
  tcfg.epochs = cfg.training.epochs;
  tcfg.adam.lr = cfg.training.lr;
  tcfg.seed = cfg.training.seed;
  tcfg.weighting = LossWeighting{WeightMode::kCtr, cfg.training.lambda};

  std::mutex log_mutex;
  // One model per study so training and decision time observe the same
  // window: the stop simulation acts on day-1 data, the ordering study on
  // `long_observe_day` days of history.
  const auto fit_at = [&](std::size_t observe) {
    const std::vector<LabeledExample> train_ex =
        make_examples(train_ptrs, data.vocab, observe, ctx);
    const std::vector<LabeledExample> val_ex =
        make_examples(val_ptrs, data.vocab, observe, ctx);
    log_line(log, log_mutex,
             "[case] training " + result.model_name + " at observe day " +
                 std::to_string(observe));
    TrainResult fitted = train(spec, train_ex, &val_ex, tcfg);
    log_line(log, log_mutex,
             "[case] best epoch " + std::to_string(fitted.best_epoch));
    return fitted;
  };
  result.train = fit_at(1);
  result.train_long = fit_at(cfg.evaluation.long_observe_day);

  std::vector<AdCreative> test_creatives;
  test_creatives.reserve(test_ptrs.size());
  for (const AdCreative* c : test_ptrs) test_creatives.push_back(*c);

  result.short_study = short_term_case_study(
      spec, result.train.final_state, data.vocab, test_creatives, threshold);
  result.long_study = long_term_case_study(
      spec, result.train_long.final_state, data.vocab, test_creatives, threshold,
      cfg.evaluation.long_observe_day, cfg.evaluation.checkpoint_step);

  // ----- reports -----
  const ShortTermCaseStudy& ss = result.short_study;
  std::string short_csv = "aggregate,value,n\n";
  const auto srow = [&](const std::string& name, double value, std::size_t n) {
    short_csv += name + "," + fmt(value) + "," + std::to_string(n) + "\n";
  };
  srow("model-cpa-ratio-mean", ss.model.mean, ss.model.n_finite);
  srow("model-cpa-ratio-stddev", ss.model.stddev, ss.model.n_finite);
  srow("model-cpa-ratio-infinite", static_cast<double>(ss.model.n_infinite),
       ss.n);
  srow("actual-cpa-ratio-mean", ss.actual.mean, ss.actual.n_finite);
  srow("actual-cpa-ratio-stddev", ss.actual.stddev, ss.actual.n_finite);
  srow("actual-cpa-ratio-infinite", static_cast<double>(ss.actual.n_infinite),
       ss.n);
  srow("flagged", static_cast<double>(ss.n_flagged), ss.n);
  result.short_csv = std::move(short_csv);
  result.rows.push_back({"case-short.cpa-ratio-mean", "model", ss.model.mean,
                         ss.model.n_finite, fingerprint});
  result.rows.push_back({"case-short.cpa-ratio-mean", "actual", ss.actual.mean,
                         ss.actual.n_finite, fingerprint});
  result.rows.push_back({"case-short.flagged", "model",
                         static_cast<double>(ss.n_flagged), ss.n, fingerprint});

  std::string long_csv = "checkpoint_day,method,ndcg,n\n";
  for (const OrderCheckpoint& cp : result.long_study.checkpoints) {
    if (cp.skipped) continue;
    const std::string day = std::to_string(cp.day);
    const std::string n = std::to_string(cp.n);
    long_csv += day + ",model," + fmt(cp.model_ndcg) + "," + n + "\n";
    long_csv += day + ",sales-rule," + fmt(cp.sales_rule_ndcg) + "," + n + "\n";
    long_csv += day + ",cpa-rule," + fmt(cp.cpa_rule_ndcg) + "," + n + "\n";
    const std::string slice = "d" + day;
    result.rows.push_back({"case-long.ndcg-model", slice, cp.model_ndcg, cp.n,
                           fingerprint});
    result.rows.push_back({"case-long.ndcg-sales-rule", slice,
                           cp.sales_rule_ndcg, cp.n, fingerprint});
    result.rows.push_back({"case-long.ndcg-cpa-rule", slice, cp.cpa_rule_ndcg,
                           cp.n, fingerprint});
  }
  result.long_csv = std::move(long_csv);

  // ----- checks -----
  const auto add_check = [&](const std::string& name, double observed,
                             double required, const std::string& detail) {
    DirectionalCheck c{name, observed, required, observed >= required, detail};
    result.rows.push_back({"check." + name, c.pass ? "pass" : "fail", observed,
                           0, fingerprint});
    result.checks.push_back(std::move(c));
  };
  add_check("cpa-ratio-slack", 0.15 - std::abs(ss.model.mean - ss.actual.mean),
            0.0,
            "model mean " + fmt(ss.model.mean) + " vs actual " +
                fmt(ss.actual.mean) + ", tolerance 0.15");
  for (const OrderCheckpoint& cp : result.long_study.checkpoints) {
    if (cp.day < 30 || cp.skipped) continue;
    add_check("order-ndcg-d" + std::to_string(cp.day),
              cp.model_ndcg - cp.cpa_rule_ndcg, 0.0,
              "model " + fmt(cp.model_ndcg) + " vs cpa-rule " +
                  fmt(cp.cpa_rule_ndcg) + " over " + std::to_string(cp.n) +
                  " creatives");
  }
  result.all_checks_pass = true;
  for (const DirectionalCheck& c : result.checks) {
    result.all_checks_pass = result.all_checks_pass && c.pass;
  }

  std::ostringstream digest;
  digest << "case studies (config " << fingerprint << ")\n";
  digest << "short-term stop simulation: n=" << ss.n << " flagged="
         << ss.n_flagged << "\n";
  digest << "  model  cpa-ratio " << fmt(ss.model.mean) << " +- "
         << fmt(ss.model.stddev) << " (" << ss.model.n_infinite
         << " unconverted)\n";
  digest << "  actual cpa-ratio " << fmt(ss.actual.mean) << " +- "
         << fmt(ss.actual.stddev) << " (" << ss.actual.n_infinite
         << " unconverted)\n";
  digest << "discontinuation order: population " << result.long_study.population
         << "\n";
  for (const OrderCheckpoint& cp : result.long_study.checkpoints) {
    digest << "  day " << cp.day;
    if (cp.skipped) {
      digest << "  skipped (" << cp.note << ")\n";
      continue;
    }
    digest << "  n=" << cp.n << "  model=" << fmt(cp.model_ndcg)
           << "  sales-rule=" << fmt(cp.sales_rule_ndcg)
           << "  cpa-rule=" << fmt(cp.cpa_rule_ndcg) << "\n";
  }
  digest << "checks\n";
  for (const DirectionalCheck& c : result.checks) {
    digest << "  " << (c.pass ? "[ok]  " : "[FAIL]") << " " << c.name
           << " observed=" << fmt(c.observed) << " required="
           << fmt(c.required) << " (" << c.detail << ")\n";
  }
  result.summary = digest.str();
  return result;
}

std::vector<AblationPoint> day_ablation_sweep(
    const ExperimentConfig& cfg, const DatasetBundle& data,
    const std::vector<std::size_t>& days, std::size_t threads,
    std::ostream* log) {
  const std::vector<const AdCreative*> train_ptrs =
      creatives_in(data, Split::kTrain);
  const std::vector<const AdCreative*> val_ptrs =
      creatives_in(data, Split::kVal);
  const std::vector<const AdCreative*> test_ptrs =
      creatives_in(data, Split::kTest);
  if (train_ptrs.empty() || val_ptrs.empty() || test_ptrs.empty()) {
    throw std::invalid_argument(
        "ablation sweep needs non-empty train/val/test splits");
  }

  SupervisionContext ctx;
  ctx.p95 = data.meta.p95_impressions;
  ctx.classifier_horizon = cfg.model.classifier_horizon;

  std::vector<SurvivalObservation> obs_short, obs_long;
  for (const AdCreative* c : test_ptrs) {
    obs_short.push_back(observe_on_grid(c->lifetime_days, c->censored,
                                        TimeGrid::short_term().horizon()));
    obs_long.push_back(observe_on_grid(c->lifetime_days, c->censored,
                                       TimeGrid::long_term().horizon()));
  }

  std::vector<AblationPoint> points(days.size());
  std::mutex log_mutex;
  auto run_one = [&](std::size_t i) {
    const std::size_t d = days[i];
    ModelSpec spec = model_spec_from(cfg, data.vocab.size());
    spec.task = TaskMode::kMultiTask;
    if (d == 0) spec.mask.series = false;
    const std::size_t observe = d == 0 ? 1 : d;

    TrainConfig tcfg;
    tcfg.batch_size = cfg.training.batch_size;
    tcfg.epochs = cfg.training.epochs;
    tcfg.adam.lr = cfg.training.lr;
    tcfg.seed = cfg.training.seed;
    tcfg.weighting = weighting_from(cfg.training);

    const std::vector<LabeledExample> train_ex =
        make_examples(train_ptrs, data.vocab, observe, ctx);
    const std::vector<LabeledExample> val_ex =
        make_examples(val_ptrs, data.vocab, observe, ctx);
    const std::vector<LabeledExample> test_ex =
        make_examples(test_ptrs, data.vocab, observe, ctx);
    const TrainResult trained = train(spec, train_ex, &val_ex, tcfg);

    std::vector<double> short_risk, long_risk;
    for (const LabeledExample& ex : test_ex) {
      const Prediction pred = forward(spec, trained.final_state, ex.input);
      const HazardPrediction hp = lift_to_hazards(spec, pred);
      const GridRisks risks = grid_risks(spec, hp);
      short_risk.push_back(*risks.short_risk);
      long_risk.push_back(*risks.long_risk);
    }
    points[i].days_used = d;
    points[i].ci_short = concordance_index(short_risk, obs_short).index();
    points[i].ci_long = concordance_index(long_risk, obs_long).index();
    log_line(log, log_mutex,
             "[ablation] days=" + std::to_string(d) + " ci-short=" +
                 fmt(points[i].ci_short) + " ci-long=" +
                 fmt(points[i].ci_long));
  };
  run_indexed(days.size(), threads, run_one);
  return points;
}

SingleTrainResult train_single(const ExperimentConfig& cfg,
                               const DatasetBundle& data, std::ostream* log) {
  const std::vector<const AdCreative*> train_ptrs =
      creatives_in(data, Split::kTrain);
  const std::vector<const AdCreative*> val_ptrs =
      creatives_in(data, Split::kVal);
  if (train_ptrs.empty()) {
    throw std::invalid_argument("training split is empty");
  }

  SupervisionContext ctx;
  ctx.p95 = data.meta.p95_impressions;
  ctx.classifier_horizon = cfg.model.classifier_horizon;

  SingleTrainResult out;
  out.spec = model_spec_from(cfg, data.vocab.size());

  TrainConfig tcfg;
  tcfg.batch_size = cfg.training.batch_size;
  tcfg.epochs = cfg.training.epochs;
  tcfg.adam.lr = cfg.training.lr;
  tcfg.seed = cfg.training.seed;
  tcfg.weighting = weighting_from(cfg.training);

  const std::size_t observe = cfg.training.observe_day;
  const std::vector<LabeledExample> train_ex =
      make_examples(train_ptrs, data.vocab, observe, ctx);
  std::vector<LabeledExample> val_ex;
  if (!val_ptrs.empty()) {
    val_ex = make_examples(val_ptrs, data.vocab, observe, ctx);
  }
  std::mutex log_mutex;
  log_line(log, log_mutex,
           "[train] " + cfg.model.task + " on " +
               std::to_string(train_ex.size()) + " creatives");
  out.result = train(out.spec, train_ex, val_ex.empty() ? nullptr : &val_ex,
                     tcfg);
  return out;
}

}  // namespace adsurv
