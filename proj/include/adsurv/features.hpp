#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "adsurv/creative.hpp"
#include "adsurv/model.hpp"

namespace adsurv {

inline constexpr char kUnknownGenre[] = "<unknown>";

// Maps genre names to embedding rows. Index 0 is reserved for genres that were
// not seen when the vocabulary was built.
struct GenreVocab {
  std::vector<std::string> names;  // names[0] == kUnknownGenre

  static GenreVocab build(const std::vector<std::string>& genres);
  std::size_t index_of(const std::string& genre) const;
  std::size_t size() const { return names.size(); }
};

// Cumulative statistics through `upto_day`:
//   [log1p(impressions), log1p(clicks), log1p(conversions), ctr, cvr, log1p(cpa)]
// CTR and CVR are raw ratios (0 when the denominator is 0). CPA is
// spend/conversions, falling back to raw spend while nothing has converted.
// Throws std::out_of_range when upto_day is 0 or exceeds the recorded days.
std::array<double, 6> statistical_features(
    const std::vector<DailyPerformance>& daily, std::size_t upto_day);

// "all" -> [1,0,0], "male" -> [0,1,0], "female" -> [0,0,1]; anything else throws.
std::array<double, 3> gender_one_hot(const std::string& gender);

// Per-day recurrent inputs [log1p(impressions_d), log1p(clicks_d)] for
// d = 1..upto_day. Same bounds checking as statistical_features.
std::vector<std::vector<double>> series_inputs(
    const std::vector<DailyPerformance>& daily, std::size_t upto_day);

// min(total/p95, 1); 0 when p95 <= 0.
double impression_weight(double total_impressions, double p95);

std::uint64_t total_impressions(const AdCreative& creative);
std::uint64_t total_clicks(const AdCreative& creative);

// Whole-history clicks/impressions; 0 when there were no impressions.
double lifetime_ctr(const AdCreative& creative);

// Builds the network input for one creative as observed at the end of
// `observe_day`. Rows after observe_day are never touched. Embedding widths
// must match what the caller's ModelSpec expects; this only packages data.
ModelInput model_input_from(const AdCreative& creative, const GenreVocab& vocab,
                            std::size_t observe_day);

// Inspection view of the assembled feature vector: every block separately plus
// the flat concatenation the trunk consumes (masked blocks omitted, series
// block passed through the recurrent encoder).
struct FeatureVector {
  std::vector<double> text;
  std::vector<double> gender;
  std::vector<double> genre;
  std::vector<double> image;
  std::vector<double> stats;
  std::vector<std::vector<double>> series;
  std::vector<double> assembled;
};

FeatureVector assemble_features(const AdCreative& creative,
                                const GenreVocab& vocab, const ModelSpec& spec,
                                const ModelState& state,
                                std::size_t observe_day);

}  // namespace adsurv
