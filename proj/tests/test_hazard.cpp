#include <cmath>
#include <random>
#include <stdexcept>

#include "adsurv/hazard.hpp"
#include "doctest.h"

using namespace adsurv;

namespace {

std::vector<double> random_hazards(std::mt19937_64& rng, std::size_t n,
                                   double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> h(n);
  for (auto& v : h) v = dist(rng);
  return h;
}

}  // namespace

TEST_CASE("likelihood is the product over observed intervals") {
  const TimeGrid s = TimeGrid::short_term();
  const HazardVector h(s, {0.2, 0.5, 0.3, 0.4});
  const EventLabels y(s, {0, 1});
  CHECK(likelihood(h, y) == doctest::Approx(0.4).epsilon(1e-12));  // 0.8 * 0.5

  const HazardVector zero(s, {0, 0, 0, 0});
  const EventLabels censored_full(s, {0, 0, 0, 0});
  CHECK(likelihood(zero, censored_full) == 1.0);

  const TimeGrid one_interval({1, 3});
  const HazardVector sure(one_interval, {1.0});
  const EventLabels event(one_interval, {1});
  CHECK(likelihood(sure, event) == 1.0);
}

TEST_CASE("likelihood rejects mismatched grids") {
  const HazardVector h(TimeGrid::short_term(), {0.2, 0.5, 0.3, 0.4});
  const EventLabels y(TimeGrid::long_term(), {0, 1});
  CHECK_THROWS_AS(likelihood(h, y), std::invalid_argument);
  CHECK_THROWS_AS(negative_log_likelihood(h, y), std::invalid_argument);
}

TEST_CASE("negative log-likelihood hand values") {
  const TimeGrid s = TimeGrid::short_term();
  const HazardVector h(s, {0.2, 0.5, 0.3, 0.4});
  const EventLabels y(s, {0, 1});
  CHECK(negative_log_likelihood(h, y) ==
        doctest::Approx(-std::log(0.4)).epsilon(1e-12));  // ~0.9163

  const TimeGrid two({1, 3, 5});
  const HazardVector half(two, {0.5, 0.5});
  const EventLabels yh(two, {0, 1});
  CHECK(negative_log_likelihood(half, yh) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));  // ~1.3863

  // perfect prediction gives ~0 loss, bounded by the clamp
  const TimeGrid one({1, 3});
  const HazardVector sure(one, {1.0});
  const EventLabels event(one, {1});
  CHECK(negative_log_likelihood(sure, event) < 1e-6);
  CHECK(negative_log_likelihood(sure, event) >= 0.0);
}

TEST_CASE("exp(-nll) matches the likelihood product on interior hazards") {
  std::mt19937_64 rng(13);
  const TimeGrid grids[] = {TimeGrid::short_term(), TimeGrid::long_term(),
                            TimeGrid::overall()};
  std::bernoulli_distribution cens(0.3);
  for (const auto& g : grids) {
    std::uniform_int_distribution<std::size_t> lprime(1, g.interval_count());
    for (int i = 0; i < 500; ++i) {
      const HazardVector h(
          g, random_hazards(rng, g.interval_count(), kProbEps, 1.0 - kProbEps));
      const std::size_t lp = lprime(rng);
      std::vector<std::uint8_t> delta(lp, 0);
      if (!cens(rng) && lp > 0) delta[lp - 1] = 1;
      const EventLabels y(g, std::move(delta));
      CHECK(std::exp(-negative_log_likelihood(h, y)) ==
            doctest::Approx(likelihood(h, y)).epsilon(1e-9));
    }
  }
}

TEST_CASE("nll is the exact sum of per-interval Bernoulli terms") {
  std::mt19937_64 rng(17);
  const TimeGrid g = TimeGrid::long_term();
  for (int i = 0; i < 200; ++i) {
    const HazardVector h(g, random_hazards(rng, g.interval_count()));
    std::uniform_int_distribution<std::size_t> lprime(1, g.interval_count());
    const std::size_t lp = lprime(rng);
    std::vector<std::uint8_t> delta(lp, 0);
    if (lp > 0) delta[lp - 1] = 1;
    const EventLabels y(g, delta);
    double sum = 0.0;
    for (std::size_t l = 0; l < delta.size(); ++l) {
      sum += bernoulli_nll(h.values()[l], delta[l] != 0);
    }
    CHECK(negative_log_likelihood(h, y) == sum);  // bitwise, same summation
  }
}

TEST_CASE("weighted_loss applies (r + 1) scaling") {
  CHECK(weighted_loss(2.0, 0.0, WeightMode::kCtr) == 2.0);
  CHECK(weighted_loss(2.0, 1.0, WeightMode::kCtr) == 4.0);
  CHECK(weighted_loss(1.2, 0.5, WeightMode::kCtr) ==
        doctest::Approx(1.8).epsilon(1e-12));
  CHECK(weighted_loss(3.5, 0.9, WeightMode::kNone) == 3.5);
  CHECK(weighted_loss(2.0, 0.25, WeightMode::kImpression) == 2.5);
  CHECK_THROWS_AS(weighted_loss(1.0, 1.5, WeightMode::kCtr),
                  std::invalid_argument);
  CHECK_THROWS_AS(weighted_loss(1.0, -0.1, WeightMode::kImpression),
                  std::invalid_argument);
}

TEST_CASE("weighted_loss is linear in the base loss") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> loss_dist(0.0, 10.0);
  std::uniform_real_distribution<double> r_dist(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double l = loss_dist(rng), r = r_dist(rng);
    CHECK(weighted_loss(2.0 * l, r, WeightMode::kCtr) ==
          doctest::Approx(2.0 * weighted_loss(l, r, WeightMode::kCtr))
              .epsilon(1e-12));
  }
}

TEST_CASE("mtl_loss blends the two task losses") {
  CHECK(mtl_loss(1.0, 3.0, 0.5) == 2.0);
  CHECK(mtl_loss(1.0, 3.0, 1.0) == 1.0);
  CHECK(mtl_loss(0.0, 0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(mtl_loss(1.0, 2.0, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(mtl_loss(1.0, 2.0, -0.1), std::invalid_argument);

  // fixed point: equal losses are invariant under the blend
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double a = 10.0 * dist(rng), lambda = dist(rng);
    CHECK(mtl_loss(a, a, lambda) == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("survival_curve is the cumulative product complement") {
  const TimeGrid t3({1, 3, 5, 7});
  CHECK(survival_curve(HazardVector(t3, {0, 0, 0})).values() ==
        std::vector<double>{1, 1, 1});

  const TimeGrid t2({1, 3, 5});
  CHECK(survival_curve(HazardVector(t2, {1.0, 0.4})).values() ==
        std::vector<double>{0, 0});

  const auto s = survival_curve(HazardVector(t2, {0.5, 0.5}));
  CHECK(s.values()[0] == doctest::Approx(0.5));
  CHECK(s.values()[1] == doctest::Approx(0.25));
}

TEST_CASE("survival_curve is non-increasing for random hazards") {
  std::mt19937_64 rng(31);
  const TimeGrid g = TimeGrid::overall();
  for (int i = 0; i < 500; ++i) {
    const auto s =
        survival_curve(HazardVector(g, random_hazards(rng, g.interval_count())));
    for (std::size_t l = 1; l < s.values().size(); ++l) {
      CHECK(s.values()[l] <= s.values()[l - 1]);
      CHECK(s.values()[l] >= 0.0);
      CHECK(s.values()[l] <= 1.0);
    }
  }
}

TEST_CASE("merge_two_term splices the preset grids") {
  const TimeGrid sg = TimeGrid::short_term();
  const TimeGrid lg = TimeGrid::long_term();

  const auto zero = merge_two_term(HazardVector(sg, {0, 0, 0, 0}),
                                   HazardVector(lg, {0.7, 0, 0, 0, 0}));
  CHECK(zero.grid() == TimeGrid::overall());
  CHECK(zero.values() == std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0});
  const auto zero_curve = survival_curve(zero);
  for (double s : zero_curve.values()) CHECK(s == 1.0);

  const auto doomed = merge_two_term(HazardVector(sg, {1.0, 0, 0, 0}),
                                     HazardVector(lg, {0.2, 0.3, 0.1, 0, 0}));
  const auto doomed_curve = survival_curve(doomed);
  for (double s : doomed_curve.values()) CHECK(s == 0.0);

  const auto mixed =
      merge_two_term(HazardVector(sg, {0.1, 0.1, 0.1, 0.1}),
                     HazardVector(lg, {0.9, 0.2, 0.2, 0.2, 0.2}));
  const auto sc = survival_curve(mixed);
  // survival at day 120: 0.9^4 * 0.8^4
  CHECK(sc.values().back() ==
        doctest::Approx(std::pow(0.9, 4) * std::pow(0.8, 4)).epsilon(1e-12));
  CHECK(sc.values().back() == doctest::Approx(0.2687).epsilon(1e-3));

  CHECK_THROWS_AS(merge_two_term(HazardVector(lg, {0, 0, 0, 0, 0}),
                                 HazardVector(lg, {0, 0, 0, 0, 0})),
                  std::invalid_argument);
}

TEST_CASE("merged curve with zero long-term hazards extends the short curve flat") {
  std::mt19937_64 rng(37);
  const TimeGrid sg = TimeGrid::short_term();
  const TimeGrid lg = TimeGrid::long_term();
  for (int i = 0; i < 100; ++i) {
    const HazardVector hs(sg, random_hazards(rng, 4));
    std::vector<double> hl = {0.5, 0, 0, 0, 0};  // dropped first entry arbitrary
    const auto merged = merge_two_term(hs, HazardVector(lg, hl));
    const auto s_short = survival_curve(hs).values();
    const auto s_merged = survival_curve(merged).values();
    for (std::size_t l = 0; l < 4; ++l) {
      CHECK(s_merged[l] == s_short[l]);
    }
    for (std::size_t l = 4; l < 8; ++l) {
      CHECK(s_merged[l] == s_short.back());
    }
  }
}

TEST_CASE("decide_discontinuation finds the first crossing") {
  const TimeGrid t3({1, 3, 5, 7});
  CHECK(decide_discontinuation(HazardVector(t3, {0.1, 0.95, 0.99}), 0.9) == 2);
  CHECK(!decide_discontinuation(HazardVector(TimeGrid({1, 3, 5}), {0.5, 0.5}),
                                0.9)
           .has_value());
  CHECK(decide_discontinuation(HazardVector(t3, {0.91, 0.1, 0.1}), 0.9) == 1);
  // default threshold is 0.9
  CHECK(decide_discontinuation(HazardVector(t3, {0.91, 0.1, 0.1})) == 1);
  CHECK_THROWS_AS(
      decide_discontinuation(HazardVector(t3, {0.5, 0.5, 0.5}), 1.0),
      std::invalid_argument);
}

TEST_CASE("decide_discontinuation is monotone in the threshold") {
  std::mt19937_64 rng(41);
  const TimeGrid g = TimeGrid::long_term();
  std::uniform_real_distribution<double> th(0.05, 0.95);
  for (int i = 0; i < 300; ++i) {
    const HazardVector h(g, random_hazards(rng, g.interval_count()));
    double a = th(rng), b = th(rng);
    if (a > b) std::swap(a, b);
    const auto ia = decide_discontinuation(h, a);
    const auto ib = decide_discontinuation(h, b);
    if (ib.has_value()) {
      REQUIRE(ia.has_value());
      CHECK(*ia <= *ib);  // raising the threshold never moves the crossing earlier
    }
  }
}

TEST_CASE("risk_score spans the expected-survival-time range") {
  const TimeGrid sg = TimeGrid::short_term();
  CHECK(risk_score(HazardVector(sg, {0, 0, 0, 0})) ==
        doctest::Approx(-(sg.horizon() - sg.origin())).epsilon(1e-12));  // -9
  CHECK(risk_score(HazardVector(sg, {1.0, 0.3, 0.2, 0.9})) == 0.0);
}

TEST_CASE("risk_score rises when any hazard rises") {
  std::mt19937_64 rng(43);
  const TimeGrid g = TimeGrid::overall();
  std::uniform_int_distribution<std::size_t> pick(0, g.interval_count() - 1);
  for (int i = 0; i < 300; ++i) {
    auto h = random_hazards(rng, g.interval_count(), 0.0, 0.95);
    auto bumped = h;
    bumped[pick(rng)] += 0.02;
    CHECK(risk_score(HazardVector(g, bumped)) > risk_score(HazardVector(g, h)));
  }
}
