#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adsurv/creative.hpp"
#include "adsurv/hazard.hpp"

namespace adsurv {

// One observed (possibly censored) lifetime used for ranking metrics.
struct SurvivalObservation {
  double time = 0.0;
  bool event = false;  // true when the discontinuation was actually observed
};

// Truncates an observation at a grid horizon: anything surviving past t_L is
// treated as censored at t_L, so a grid's CI only measures within-grid order.
SurvivalObservation observe_on_grid(double lifetime, bool censored,
                                    double grid_horizon);

// Harrell's concordance counts. Admissible pairs: distinct observed times with
// the earlier one uncensored. Concordant: the earlier death carries the higher
// risk. Risk ties score one half.
struct ConcordanceCounts {
  std::uint64_t concordant = 0;
  std::uint64_t tied_risk = 0;
  std::uint64_t admissible = 0;
  double index() const;  // throws std::domain_error when nothing is admissible
};

// O(n log n) via a Fenwick tree over compressed risks.
ConcordanceCounts concordance_index(const std::vector<double>& risks,
                                    const std::vector<SurvivalObservation>& obs);

// Reference O(n^2) enumeration; the fast path must match it integer-for-integer.
ConcordanceCounts concordance_brute_force(
    const std::vector<double>& risks,
    const std::vector<SurvivalObservation>& obs);

// The ceil(fraction * n) creatives with the highest total_sales; sales ties
// broken by creative_id so the slice is deterministic.
std::vector<std::string> top_sales_slice(
    const std::vector<AdCreative>& creatives, double fraction);

struct F1Result {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool defined = true;  // false when neither truth nor prediction has positives
};

F1Result f1_score(const std::vector<bool>& predicted,
                  const std::vector<bool>& actual);

// Rank agreement between two permutations of the same id set. Relevance of an
// id is n minus its rank in `actual`; discounts are 1/log2(position + 1) with
// 1-based positions. Returns DCG/IDCG in (0, 1].
double ndcg_order(const std::vector<std::string>& predicted,
                  const std::vector<std::string>& actual);

struct RankedHazards {
  std::string creative_id;
  HazardVector hazards;
};

// Discontinuation order implied by per-creative hazards: flagged creatives
// first (interval ascending, hazard at that interval descending), then the
// never-flagged group by final-interval hazard descending; creative_id breaks
// every remaining tie.
std::vector<std::string> predicted_discontinuation_order(
    const std::vector<RankedHazards>& items, double threshold = 0.9);

struct CpaRatio {
  double value = 0.0;
  bool infinite = false;  // spend but no conversions yet
};

// (cumulative spend / cumulative conversions) / target_cpa over days <= day
// (clipped to the recorded history). Zero spend -> 0; conversions stuck at
// zero with spend -> flagged infinite. Throws std::domain_error on a
// non-positive target and std::out_of_range on day < 1.
CpaRatio cpa_ratio(const AdCreative& creative, std::size_t as_of_day);

struct CpaAggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t n_finite = 0;
  std::size_t n_infinite = 0;
};

// Mean +- std over finite ratios; infinite ones are counted, not averaged.
CpaAggregate aggregate_cpa(const std::vector<CpaRatio>& ratios);

struct EvalRow {
  std::string metric;
  std::string slice;
  double value = 0.0;
  std::size_t n = 0;
  std::string config_fingerprint;
};

std::string eval_report_csv(const std::vector<EvalRow>& rows);

}  // namespace adsurv
