#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "adsurv/creative.hpp"
#include "adsurv/features.hpp"
#include "adsurv/model.hpp"
#include "doctest.h"

using namespace adsurv;

namespace {

AdCreative sample_creative(std::uint64_t seed = 7, std::size_t days = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  AdCreative c;
  c.creative_id = "cr-" + std::to_string(seed);
  c.campaign_id = "cp-1";
  c.gender = "female";
  c.genre = "fashion";
  c.target_cpa = 12.5;
  c.text_embedding.resize(16);
  c.image_embedding.resize(16);
  for (auto& v : c.text_embedding) v = unit(rng);
  for (auto& v : c.image_embedding) v = unit(rng);
  for (std::size_t d = 1; d <= days; ++d) {
    DailyPerformance row;
    row.day = static_cast<int>(d);
    row.impressions = 1000 + 13 * d;
    row.clicks = 40 + d;
    row.conversions = 3;
    row.spend = 21.0 + 0.5 * static_cast<double>(d);
    c.daily.push_back(row);
  }
  c.lifetime_days = static_cast<double>(days);
  c.censored = false;
  c.total_sales = 400.0;
  return c;
}

}  // namespace

TEST_CASE("genre vocabulary reserves slot 0 for unknowns") {
  const GenreVocab vocab = GenreVocab::build({"games", "beauty", "games", "auto"});
  REQUIRE(vocab.size() == 4);
  CHECK(vocab.names[0] == kUnknownGenre);
  CHECK(vocab.names[1] == "auto");  // sorted unique after the reserved slot
  CHECK(vocab.names[2] == "beauty");
  CHECK(vocab.names[3] == "games");
  CHECK(vocab.index_of("beauty") == 2);
  CHECK(vocab.index_of("never-seen") == 0);
  CHECK(vocab.index_of(kUnknownGenre) == 0);

  // A stray unknown marker in the input must not create a second slot.
  const GenreVocab v2 = GenreVocab::build({kUnknownGenre, "x"});
  CHECK(v2.size() == 2);
}

TEST_CASE("statistical features: cumulative log counts, raw rates, log CPA") {
  std::vector<DailyPerformance> daily{
      {1, 100, 10, 2, 20.0},
      {2, 200, 30, 3, 30.0},
  };
  const auto f = statistical_features(daily, 2);
  CHECK(f[0] == doctest::Approx(std::log1p(300.0)).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(std::log1p(40.0)).epsilon(1e-15));
  CHECK(f[2] == doctest::Approx(std::log1p(5.0)).epsilon(1e-15));
  CHECK(f[3] == doctest::Approx(40.0 / 300.0).epsilon(1e-15));
  CHECK(f[4] == doctest::Approx(5.0 / 40.0).epsilon(1e-15));
  // spend 50 over 5 conversions -> CPA 10 -> log(11)
  CHECK(f[5] == doctest::Approx(std::log(11.0)).epsilon(1e-15));

  const auto day1 = statistical_features(daily, 1);
  CHECK(day1[0] == doctest::Approx(std::log1p(100.0)).epsilon(1e-15));
  CHECK(day1[5] == doctest::Approx(std::log1p(10.0)).epsilon(1e-15));
}

TEST_CASE("statistical features fall back cleanly on zero denominators") {
  std::vector<DailyPerformance> daily{{1, 0, 0, 0, 4.0}};
  const auto f = statistical_features(daily, 1);
  CHECK(f[3] == 0.0);  // no impressions -> CTR 0
  CHECK(f[4] == 0.0);  // no clicks -> CVR 0
  CHECK(f[5] == doctest::Approx(std::log1p(4.0)));  // CPA sentinel: raw spend
}

TEST_CASE("statistical features reject out-of-range days") {
  std::vector<DailyPerformance> daily{{1, 10, 1, 0, 1.0}};
  CHECK_THROWS_AS(statistical_features(daily, 0), std::out_of_range);
  CHECK_THROWS_AS(statistical_features(daily, 2), std::out_of_range);
  CHECK_THROWS_AS(series_inputs(daily, 2), std::out_of_range);
}

TEST_CASE("gender one-hot") {
  CHECK(gender_one_hot("all") == std::array<double, 3>{1.0, 0.0, 0.0});
  CHECK(gender_one_hot("male") == std::array<double, 3>{0.0, 1.0, 0.0});
  CHECK(gender_one_hot("female") == std::array<double, 3>{0.0, 0.0, 1.0});
  CHECK_THROWS_AS(gender_one_hot("other"), std::invalid_argument);
  CHECK_THROWS_AS(gender_one_hot(""), std::invalid_argument);
}

TEST_CASE("series inputs are per-day log1p pairs") {
  std::vector<DailyPerformance> daily{
      {1, 100, 10, 2, 20.0},
      {2, 200, 30, 3, 30.0},
      {3, 50, 0, 0, 0.0},
  };
  const auto series = series_inputs(daily, 3);
  REQUIRE(series.size() == 3);
  for (const auto& step : series) REQUIRE(step.size() == 2);
  CHECK(series[0][0] == doctest::Approx(std::log1p(100.0)));
  CHECK(series[0][1] == doctest::Approx(std::log1p(10.0)));
  CHECK(series[2][0] == doctest::Approx(std::log1p(50.0)));
  CHECK(series[2][1] == 0.0);
  CHECK(series_inputs(daily, 2).size() == 2);
}

TEST_CASE("impression weight clips at 1 and handles degenerate p95") {
  CHECK(impression_weight(500.0, 1000.0) == doctest::Approx(0.5));
  CHECK(impression_weight(2000.0, 1000.0) == 1.0);
  CHECK(impression_weight(1000.0, 1000.0) == 1.0);
  CHECK(impression_weight(0.0, 1000.0) == 0.0);
  CHECK(impression_weight(500.0, 0.0) == 0.0);
  CHECK(impression_weight(500.0, -3.0) == 0.0);
}

TEST_CASE("lifetime totals and CTR") {
  const AdCreative c = sample_creative(3, 4);
  std::uint64_t imps = 0;
  std::uint64_t clicks = 0;
  for (const auto& row : c.daily) {
    imps += row.impressions;
    clicks += row.clicks;
  }
  CHECK(total_impressions(c) == imps);
  CHECK(total_clicks(c) == clicks);
  CHECK(lifetime_ctr(c) ==
        doctest::Approx(static_cast<double>(clicks) / static_cast<double>(imps)));

  AdCreative dead = c;
  for (auto& row : dead.daily) {
    row.impressions = 0;
    row.clicks = 0;
    row.conversions = 0;
  }
  CHECK(lifetime_ctr(dead) == 0.0);
}

TEST_CASE("model input never reads past the observation day") {
  const GenreVocab vocab = GenreVocab::build({"fashion", "games"});
  AdCreative clean = sample_creative(11, 8);
  AdCreative poisoned = clean;
  for (std::size_t d = 4; d < poisoned.daily.size(); ++d) {
    poisoned.daily[d].impressions = 99999999;
    poisoned.daily[d].clicks = 12345678;
    poisoned.daily[d].conversions = 1234567;
    poisoned.daily[d].spend = 1e9;
  }
  for (std::size_t day = 1; day <= 4; ++day) {
    const ModelInput a = model_input_from(clean, vocab, day);
    const ModelInput b = model_input_from(poisoned, vocab, day);
    CHECK(a.text == b.text);
    CHECK(a.gender == b.gender);
    CHECK(a.genre_index == b.genre_index);
    CHECK(a.image == b.image);
    CHECK(a.stats == b.stats);
    CHECK(a.series == b.series);
  }
  CHECK(model_input_from(clean, vocab, 5).stats !=
        model_input_from(poisoned, vocab, 5).stats);
}

TEST_CASE("model input is deterministic and maps fields faithfully") {
  const GenreVocab vocab = GenreVocab::build({"fashion", "games"});
  const AdCreative c = sample_creative(21, 6);
  const ModelInput a = model_input_from(c, vocab, 6);
  const ModelInput b = model_input_from(c, vocab, 6);
  CHECK(a.text == b.text);
  CHECK(a.stats == b.stats);
  CHECK(a.series == b.series);
  CHECK(a.genre_index == vocab.index_of("fashion"));
  CHECK(a.gender == gender_one_hot("female"));
  CHECK(a.series.size() == 6);

  AdCreative exotic = c;
  exotic.genre = "unheard-of";
  CHECK(model_input_from(exotic, vocab, 6).genre_index == 0);
}

TEST_CASE("assembled feature width matches the spec for every mask") {
  const GenreVocab vocab = GenreVocab::build({"fashion", "games", "auto"});
  const AdCreative c = sample_creative(31, 5);
  for (int bits = 0; bits < 16; ++bits) {
    ModelSpec spec;
    spec.task = TaskMode::kShort;
    spec.mask.text = bits & 1;
    spec.mask.image = bits & 2;
    spec.mask.stats = bits & 4;
    spec.mask.series = bits & 8;
    spec.genre_vocab = vocab.size();
    const ModelState state = init_state(spec, 99);
    const FeatureVector fv = assemble_features(c, vocab, spec, state, 5);
    CHECK(fv.assembled.size() == spec.input_width());
    // Inspection blocks are always populated, mask or not.
    CHECK(fv.text.size() == 16);
    CHECK(fv.image.size() == 16);
    CHECK(fv.stats.size() == 6);
    CHECK(fv.series.size() == 5);
    CHECK(fv.genre.size() == spec.genre_dim);
    CHECK(fv.gender.size() == 3);
  }
}

TEST_CASE("default assembled width is 59") {
  const GenreVocab vocab = GenreVocab::build({"fashion"});
  const AdCreative c = sample_creative(41, 3);
  ModelSpec spec;
  spec.genre_vocab = vocab.size();
  const ModelState state = init_state(spec, 1);
  const FeatureVector fv = assemble_features(c, vocab, spec, state, 3);
  CHECK(fv.assembled.size() == 59);  // 16 + 3 + 8 + 16 + 6 + 10
}

TEST_CASE("assembled vector carries the genre embedding row") {
  const GenreVocab vocab = GenreVocab::build({"fashion", "games"});
  const AdCreative c = sample_creative(51, 4);
  ModelSpec spec;
  spec.genre_vocab = vocab.size();
  const ModelState state = init_state(spec, 5);
  const FeatureVector fv = assemble_features(c, vocab, spec, state, 4);
  const Tensor& embed = state.find("genre_embed").value;
  const std::size_t row = vocab.index_of("fashion");
  for (std::size_t j = 0; j < spec.genre_dim; ++j)
    CHECK(fv.genre[j] == embed.at(row, j));
  // Layout: text | gender | genre | image | stats | series-encoding.
  for (std::size_t j = 0; j < spec.genre_dim; ++j)
    CHECK(fv.assembled[16 + 3 + j] == fv.genre[j]);
}

TEST_CASE("masked blocks cannot influence the forward pass") {
  const GenreVocab vocab = GenreVocab::build({"fashion"});
  const AdCreative c = sample_creative(61, 5);
  ModelSpec spec;
  spec.task = TaskMode::kShort;
  spec.mask.image = false;
  spec.genre_vocab = vocab.size();
  const ModelState state = init_state(spec, 17);

  AdCreative tweaked = c;
  for (auto& v : tweaked.image_embedding) v += 3.0;
  const ModelInput a = model_input_from(c, vocab, 5);
  const ModelInput b = model_input_from(tweaked, vocab, 5);
  const Prediction pa = forward(spec, state, a);
  const Prediction pb = forward(spec, state, b);
  REQUIRE(pa.heads.size() == 1);
  CHECK(pa.heads[0] == pb.heads[0]);

  const FeatureVector fa = assemble_features(c, vocab, spec, state, 5);
  const FeatureVector fb = assemble_features(tweaked, vocab, spec, state, 5);
  CHECK(fa.assembled == fb.assembled);
}

TEST_CASE("assemble rejects embedding width mismatches") {
  const GenreVocab vocab = GenreVocab::build({"fashion"});
  AdCreative c = sample_creative(71, 3);
  c.text_embedding.resize(9);
  ModelSpec spec;
  spec.genre_vocab = vocab.size();
  const ModelState state = init_state(spec, 1);
  CHECK_THROWS_AS(assemble_features(c, vocab, spec, state, 3),
                  std::invalid_argument);
}
