#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "adsurv/creative.hpp"
#include "adsurv/features.hpp"
#include "adsurv/metrics.hpp"
#include "adsurv/model.hpp"

namespace adsurv {

// Model output for one creative observed through `observe_day`, lifted into
// hazard space. `merged` is present for the multi-task model only.
struct HazardPrediction {
  std::vector<HazardVector> heads;  // spec.head_names() order
  std::optional<HazardVector> merged;
};

// Runs the network on data through observe_day (clipped to the recorded
// history, so dead creatives are scored on what they had). Hazard task modes
// only; observe_day must be >= 1.
HazardPrediction predict_hazards(const ModelSpec& spec, const ModelState& state,
                                 const GenreVocab& vocab,
                                 const AdCreative& creative,
                                 std::size_t observe_day);

// The hazard sequence spanning the model's whole horizon: the merged overall
// vector for multi-task, otherwise the single head.
const HazardVector& full_hazards(const HazardPrediction& pred);

// Simulates acting on day-1 predictions: a creative is stopped at the upper
// bound of the first short-grid interval whose hazard crosses the threshold,
// and kept to its actual end when none does. CPA ratios are taken at
// min(predicted day, actual day) — a prediction that lands after the actual
// stop cannot change anything — and compared with ratios at the actual day.
struct ShortTermCaseStudy {
  CpaAggregate model;
  CpaAggregate actual;
  std::size_t n = 0;
  std::size_t n_flagged = 0;  // stopped within the short grid by the model
};

ShortTermCaseStudy short_term_case_study(
    const ModelSpec& spec, const ModelState& state, const GenreVocab& vocab,
    const std::vector<AdCreative>& creatives, double threshold = 0.9);

// One slice of the discontinuation-order comparison: creatives still serving
// at `day`, NDCG of each ordering against the actual order restricted to them.
struct OrderCheckpoint {
  std::size_t day = 0;
  std::size_t n = 0;
  double model_ndcg = 0.0;
  double sales_rule_ndcg = 0.0;
  double cpa_rule_ndcg = 0.0;
  bool skipped = false;  // nobody left serving at this day
  std::string note;
};

// Orders creatives that served past `observe_day` by long-grid hazards
// computed from the first `observe_day` days only, and scores that order (plus
// two rule baselines: total sales descending, and day-`observe_day` CPA ratio
// descending with unconverted spend first) against the actual discontinuation
// order (lifetime ascending, id tie-break). Checkpoints run every
// `checkpoint_step` days up to the long-grid horizon.
struct LongTermCaseStudy {
  std::size_t population = 0;
  std::vector<OrderCheckpoint> checkpoints;
};

LongTermCaseStudy long_term_case_study(
    const ModelSpec& spec, const ModelState& state, const GenreVocab& vocab,
    const std::vector<AdCreative>& creatives, double threshold = 0.9,
    std::size_t observe_day = 10, std::size_t checkpoint_step = 10);

}  // namespace adsurv
