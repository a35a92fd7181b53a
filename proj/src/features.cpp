#include "adsurv/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace adsurv {

GenreVocab GenreVocab::build(const std::vector<std::string>& genres) {
  std::set<std::string> unique(genres.begin(), genres.end());
  unique.erase(kUnknownGenre);
  GenreVocab vocab;
  vocab.names.reserve(unique.size() + 1);
  vocab.names.push_back(kUnknownGenre);
  vocab.names.insert(vocab.names.end(), unique.begin(), unique.end());
  return vocab;
}

std::size_t GenreVocab::index_of(const std::string& genre) const {
  const auto it = std::find(names.begin() + 1, names.end(), genre);
  return it == names.end() ? 0 : static_cast<std::size_t>(it - names.begin());
}

namespace {

void check_day_bounds(const std::vector<DailyPerformance>& daily,
                      std::size_t upto_day) {
  if (upto_day == 0) throw std::out_of_range("observation day must be >= 1");
  if (upto_day > daily.size()) {
    throw std::out_of_range("observation day " + std::to_string(upto_day) +
                            " exceeds recorded history of " +
                            std::to_string(daily.size()) + " days");
  }
}

}  // namespace

std::array<double, 6> statistical_features(
    const std::vector<DailyPerformance>& daily, std::size_t upto_day) {
  check_day_bounds(daily, upto_day);
  double imps = 0.0;
  double clicks = 0.0;
  double convs = 0.0;
  double spend = 0.0;
  for (std::size_t d = 0; d < upto_day; ++d) {
    imps += static_cast<double>(daily[d].impressions);
    clicks += static_cast<double>(daily[d].clicks);
    convs += static_cast<double>(daily[d].conversions);
    spend += daily[d].spend;
  }
  const double ctr = imps > 0.0 ? clicks / imps : 0.0;
  const double cvr = clicks > 0.0 ? convs / clicks : 0.0;
  const double cpa = convs > 0.0 ? spend / convs : spend;
  return {std::log1p(imps), std::log1p(clicks), std::log1p(convs),
          ctr,              cvr,                std::log1p(cpa)};
}

std::array<double, 3> gender_one_hot(const std::string& gender) {
  if (gender == "all") return {1.0, 0.0, 0.0};
  if (gender == "male") return {0.0, 1.0, 0.0};
  if (gender == "female") return {0.0, 0.0, 1.0};
  throw std::invalid_argument("unknown gender target: " + gender);
}

std::vector<std::vector<double>> series_inputs(
    const std::vector<DailyPerformance>& daily, std::size_t upto_day) {
  check_day_bounds(daily, upto_day);
  std::vector<std::vector<double>> series;
  series.reserve(upto_day);
  for (std::size_t d = 0; d < upto_day; ++d) {
    series.push_back({std::log1p(static_cast<double>(daily[d].impressions)),
                      std::log1p(static_cast<double>(daily[d].clicks))});
  }
  return series;
}

double impression_weight(double total_impressions, double p95) {
  if (p95 <= 0.0) return 0.0;
  return std::min(total_impressions / p95, 1.0);
}

std::uint64_t total_impressions(const AdCreative& creative) {
  std::uint64_t total = 0;
  for (const auto& row : creative.daily) total += row.impressions;
  return total;
}

std::uint64_t total_clicks(const AdCreative& creative) {
  std::uint64_t total = 0;
  for (const auto& row : creative.daily) total += row.clicks;
  return total;
}

double lifetime_ctr(const AdCreative& creative) {
  const double imps = static_cast<double>(total_impressions(creative));
  if (imps <= 0.0) return 0.0;
  return static_cast<double>(total_clicks(creative)) / imps;
}

ModelInput model_input_from(const AdCreative& creative, const GenreVocab& vocab,
                            std::size_t observe_day) {
  ModelInput input;
  input.text = creative.text_embedding;
  input.gender = gender_one_hot(creative.gender);
  input.genre_index = vocab.index_of(creative.genre);
  input.image = creative.image_embedding;
  const auto stats = statistical_features(creative.daily, observe_day);
  input.stats.assign(stats.begin(), stats.end());
  input.series = series_inputs(creative.daily, observe_day);
  return input;
}

FeatureVector assemble_features(const AdCreative& creative,
                                const GenreVocab& vocab, const ModelSpec& spec,
                                const ModelState& state,
                                std::size_t observe_day) {
  const ModelInput input = model_input_from(creative, vocab, observe_day);
  if (input.text.size() != spec.text_dim)
    throw std::invalid_argument("text embedding width mismatch");
  if (input.image.size() != spec.image_dim)
    throw std::invalid_argument("image embedding width mismatch");

  FeatureVector fv;
  fv.text = input.text;
  fv.gender.assign(input.gender.begin(), input.gender.end());
  const Tensor& embed = state.find("genre_embed").value;
  fv.genre.resize(spec.genre_dim);
  for (std::size_t j = 0; j < spec.genre_dim; ++j)
    fv.genre[j] = embed.at(input.genre_index, j);
  fv.image = input.image;
  fv.stats = input.stats;
  fv.series = input.series;

  fv.assembled.reserve(spec.input_width());
  if (spec.mask.text)
    fv.assembled.insert(fv.assembled.end(), fv.text.begin(), fv.text.end());
  fv.assembled.insert(fv.assembled.end(), fv.gender.begin(), fv.gender.end());
  fv.assembled.insert(fv.assembled.end(), fv.genre.begin(), fv.genre.end());
  if (spec.mask.image)
    fv.assembled.insert(fv.assembled.end(), fv.image.begin(), fv.image.end());
  if (spec.mask.stats)
    fv.assembled.insert(fv.assembled.end(), fv.stats.begin(), fv.stats.end());
  if (spec.mask.series) {
    const auto encoded = recurrent_encode(spec, state, input.series);
    fv.assembled.insert(fv.assembled.end(), encoded.begin(), encoded.end());
  }
  if (fv.assembled.size() != spec.input_width())
    throw std::logic_error("assembled feature width mismatch");
  return fv;
}

}  // namespace adsurv
