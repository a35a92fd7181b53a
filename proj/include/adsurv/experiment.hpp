#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsurv/case_study.hpp"
#include "adsurv/datagen.hpp"
#include "adsurv/dataset_io.hpp"
#include "adsurv/features.hpp"
#include "adsurv/metrics.hpp"
#include "adsurv/train.hpp"

namespace adsurv {

// ---------- configuration ----------
// One JSON document with a versioned schema drives everything. All keys are
// optional (defaults below reproduce the reference setup); unknown keys are
// hard errors so a typo cannot silently fall back to a default.

struct ModelSection {
  std::string task = "multi-task";
  bool use_text = true;
  bool use_image = true;
  bool use_stats = true;
  bool use_series = true;
  std::size_t genre_dim = 8;
  std::size_t rnn_hidden = 10;
  std::vector<std::size_t> trunk = {64, 64};
  std::size_t classifier_horizon = 30;  // read by the classifier task only
};

struct TrainingSection {
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  std::string weighting = "none";  // none | ctr | impression
  double lambda = 0.5;
  std::size_t observe_day = 1;  // serving days visible to the features
};

struct EvaluationSection {
  double threshold = 0.9;
  std::vector<std::size_t> horizons = {3, 7, 30, 90};
  double top_sales_fraction = 0.25;
  std::size_t long_observe_day = 10;  // discontinuation-order study input
  std::size_t checkpoint_step = 10;
  std::vector<std::size_t> ablation_days = {0, 1, 2, 3, 5, 7, 10};
};

struct PathsSection {
  std::string dataset_dir = "data";
  std::string checkpoint = "checkpoints/model.ckpt";
  std::string report_dir = "reports";
};

struct ExperimentConfig {
  std::uint32_t schema_version = 1;
  GeneratorConfig generator;
  ModelSection model;
  TrainingSection training;
  EvaluationSection evaluation;
  PathsSection paths;
};

// Strict parse: malformed JSON, wrong schema_version, unknown keys, or
// out-of-domain values all throw with the offending path in the message.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void validate_experiment_config(const ExperimentConfig& cfg);

// Canonical serialization (fixed key order, shortest-round-trip numbers).
std::string experiment_config_json(const ExperimentConfig& cfg);
// FNV-1a hash of the canonical form, 16 hex chars; stamped on every report.
std::string config_fingerprint(const ExperimentConfig& cfg);

WeightMode weight_mode_from_name(const std::string& name);
std::string weight_mode_name(WeightMode mode);

// ModelSpec assembled from the config's model section; the genre vocabulary
// size comes from dataset metadata.
ModelSpec model_spec_from(const ExperimentConfig& cfg,
                          std::size_t genre_vocab_size);
LossWeighting weighting_from(const TrainingSection& training);

// ---------- dataset plumbing ----------

struct DatasetBundle {
  std::vector<AdCreative> creatives;
  std::vector<OracleTrace> traces;  // index-aligned
  DatasetMetadata meta;             // split map, vocab, p95 normalizer
  GenreVocab vocab;
};

// Generate, split campaigns, build the genre vocabulary and the impression
// normalizer from the training split only.
DatasetBundle build_dataset(const GeneratorConfig& generator);

// creatives.jsonl + oracle.jsonl + metadata.json + split.csv under `dir`.
void save_dataset(const std::filesystem::path& dir, const DatasetBundle& data);
DatasetBundle load_dataset(const std::filesystem::path& dir);

Split split_of(const DatasetBundle& data, const AdCreative& creative);
std::vector<const AdCreative*> creatives_in(const DatasetBundle& data,
                                            Split which);

// Nearest-rank 95th percentile of per-creative total impressions.
double p95_impressions(const std::vector<const AdCreative*>& creatives);

// ---------- supervision ----------

struct SupervisionContext {
  double p95 = 0.0;
  std::size_t classifier_horizon = 30;
  double day_scale = 120.0;  // regression target = min(lifetime, scale)/scale
};

// Labels for every head plus the scalar baselines. The classifier target is
// the survives-past-horizon indicator; weighting ratios are the creative's
// lifetime CTR and normalized total impressions.
SampleTargets targets_for(const AdCreative& creative,
                          const SupervisionContext& ctx);

// Inputs observed through min(observe_day, recorded days); never past them.
std::vector<LabeledExample> make_examples(
    const std::vector<const AdCreative*>& creatives, const GenreVocab& vocab,
    std::size_t observe_day, const SupervisionContext& ctx);

// ---------- evaluation building blocks ----------

// Per-grid risk scores for one prediction. Models without a native head for a
// grid derive it: the overall grid's first four intervals are the short grid,
// and its tail plus the folded short-term survival gives the long grid.
struct GridRisks {
  std::optional<double> short_risk;
  std::optional<double> long_risk;
  std::optional<double> overall_risk;
};
GridRisks grid_risks(const ModelSpec& spec, const HazardPrediction& pred);

// Probability of surviving past `horizon_day` under the model's full-horizon
// hazards; the horizon must be one of the grid bounds.
double survival_past(const HazardVector& hazards, std::size_t horizon_day);

PredictionRecord prediction_record(const ModelSpec& spec, const Prediction& pred,
                                   const std::string& creative_id,
                                   double threshold);

// ---------- experiment presets ----------

struct DirectionalCheck {
  std::string name;
  double observed = 0.0;
  double required = 0.0;  // pass iff observed >= required
  bool pass = false;
  std::string detail;
};

struct SuiteModelResult {
  std::string name;
  ModelSpec spec;
  LossWeighting weighting;
  std::size_t classifier_horizon = 0;  // classifiers only
  TrainResult train;
  std::vector<PredictionRecord> predictions;  // test split, config observe day
};

struct OfflineSuiteResult {
  std::vector<SuiteModelResult> models;
  std::vector<EvalRow> rows;  // every metric, fingerprint attached
  std::string ci_csv;         // model,weighting,grid,slice,ci,n_pairs
  std::string f1_csv;         // framework,horizon,f1,precision,recall,n
  std::string summary;        // human-readable digest
  std::vector<DirectionalCheck> checks;
  bool all_checks_pass = false;
};

// Trains the full comparison grid (single-task short/long/overall, the
// feature-ablated short model, multi-task under the three weightings, one
// classifier per horizon, the day regressor) and evaluates CI tables, the
// top-sales slice, and F1 per horizon on the test split. `threads` trains
// independent models concurrently; results do not depend on it.
OfflineSuiteResult run_offline_suite(const ExperimentConfig& cfg,
                                     const DatasetBundle& data,
                                     std::size_t threads = 1,
                                     std::ostream* log = nullptr);

struct CaseStudiesResult {
  std::string model_name;
  ModelSpec spec;
  TrainResult train;       // day-1 observer behind the stop simulation
  TrainResult train_long;  // long-observe-day observer behind the ordering
  ShortTermCaseStudy short_study;
  LongTermCaseStudy long_study;
  std::vector<EvalRow> rows;
  std::string short_csv;  // aggregate,value,n
  std::string long_csv;   // checkpoint_day,method,ndcg,n  (plot-ready)
  std::string summary;
  std::vector<DirectionalCheck> checks;
  bool all_checks_pass = false;
};

// Trains the CTR-weighted multi-task model and runs both discontinuation
// simulations on the test split. Each study's model observes the same number
// of days at training time as at decision time: day 1 for the stop
// simulation, `evaluation.long_observe_day` for the ordering study.
CaseStudiesResult run_case_studies(const ExperimentConfig& cfg,
                                   const DatasetBundle& data,
                                   std::ostream* log = nullptr);

struct AblationPoint {
  std::size_t days_used = 0;  // 0 = series features disabled
  double ci_short = 0.0;
  double ci_long = 0.0;
};

// Retrains the configured model with inputs truncated at each day count and
// reports short/long CI on the test split.
std::vector<AblationPoint> day_ablation_sweep(
    const ExperimentConfig& cfg, const DatasetBundle& data,
    const std::vector<std::size_t>& days, std::size_t threads = 1,
    std::ostream* log = nullptr);

// One model exactly as the config's model/training sections describe it
// (cmd_train's workhorse).
struct SingleTrainResult {
  ModelSpec spec;
  TrainResult result;
};
SingleTrainResult train_single(const ExperimentConfig& cfg,
                               const DatasetBundle& data,
                               std::ostream* log = nullptr);

}  // namespace adsurv
