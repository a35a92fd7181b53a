#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adsurv {

// One day of serving results for a creative.
struct DailyPerformance {
  int day = 1;  // 1-based, contiguous
  std::uint64_t impressions = 0;
  std::uint64_t clicks = 0;
  std::uint64_t conversions = 0;
  double spend = 0.0;
};

// One advertising creative with its full observed history.
struct AdCreative {
  std::string creative_id;
  std::string campaign_id;
  std::string gender;  // "all" | "male" | "female"
  std::string genre;
  double target_cpa = 0.0;
  std::vector<double> text_embedding;   // precomputed, fixed width
  std::vector<double> image_embedding;  // precomputed, fixed width
  std::vector<DailyPerformance> daily;  // days 1..lifetime
  double lifetime_days = 1.0;
  bool censored = false;
  double total_sales = 0.0;
};

// Ground truth kept next to a synthetic creative, used only by evaluation.
struct OracleTrace {
  std::string creative_id;
  double discontinuation_day = 0.0;
  std::string mechanism;  // "cut-out" | "wear-out" | "censored"
  std::vector<double> cpa_ratio_series;  // cumulative ratio per day; +inf when
                                         // nothing converted yet
};

// Throws std::invalid_argument when a record breaks the daily-row invariants
// (contiguity from day 1, conversions <= clicks <= impressions, spend >= 0,
// finite embeddings, non-negative sales).
void validate_creative(const AdCreative& creative);

}  // namespace adsurv
