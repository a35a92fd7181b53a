#include "adsurv/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adsurv {

namespace {

double clamp_prob(double p) {
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

void require_same_grid(const HazardVector& h, const EventLabels& y) {
  if (h.grid() != y.grid()) {
    throw std::invalid_argument("hazard and labels use different grids");
  }
}

}  // namespace

HazardVector::HazardVector(TimeGrid grid, std::vector<double> h)
    : grid_(std::move(grid)), h_(std::move(h)) {
  if (h_.size() != grid_.interval_count()) {
    throw std::invalid_argument("HazardVector length must equal interval count");
  }
  for (double v : h_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("hazard probabilities must lie in [0,1]");
    }
  }
}

SurvivalCurve::SurvivalCurve(TimeGrid grid, std::vector<double> s)
    : grid_(std::move(grid)), s_(std::move(s)) {
  if (s_.size() != grid_.interval_count()) {
    throw std::invalid_argument("SurvivalCurve length must equal interval count");
  }
}

double bernoulli_nll(double h, bool event) {
  const double p = clamp_prob(h);
  return event ? -std::log(p) : -std::log1p(-p);
}

double likelihood(const HazardVector& h, const EventLabels& y) {
  require_same_grid(h, y);
  double prod = 1.0;
  const auto& delta = y.delta();
  for (std::size_t l = 0; l < delta.size(); ++l) {
    prod *= delta[l] ? h.values()[l] : 1.0 - h.values()[l];
  }
  return prod;
}

double negative_log_likelihood(const HazardVector& h, const EventLabels& y) {
  require_same_grid(h, y);
  double sum = 0.0;
  const auto& delta = y.delta();
  for (std::size_t l = 0; l < delta.size(); ++l) {
    sum += bernoulli_nll(h.values()[l], delta[l] != 0);
  }
  return sum;
}

double weighted_loss(double base_loss, double r, WeightMode mode) {
  if (mode == WeightMode::kNone) return base_loss;
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("loss weight ratio must lie in [0,1]");
  }
  return (r + 1.0) * base_loss;
}

double mtl_loss(double loss_short, double loss_long, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0,1]");
  }
  return lambda * loss_short + (1.0 - lambda) * loss_long;
}

SurvivalCurve survival_curve(const HazardVector& h) {
  std::vector<double> s(h.values().size());
  double acc = 1.0;
  for (std::size_t l = 0; l < s.size(); ++l) {
    acc *= 1.0 - h.values()[l];
    s[l] = acc;
  }
  return SurvivalCurve(h.grid(), std::move(s));
}

HazardVector merge_two_term(const HazardVector& h_short,
                            const HazardVector& h_long) {
  if (h_short.grid() != TimeGrid::short_term() ||
      h_long.grid() != TimeGrid::long_term()) {
    throw std::invalid_argument(
        "merge_two_term expects the short/long preset grids");
  }
  std::vector<double> merged = h_short.values();
  // skip the long model's (1,10] interval; the short grid already covers it
  merged.insert(merged.end(), h_long.values().begin() + 1,
                h_long.values().end());
  return HazardVector(TimeGrid::overall(), std::move(merged));
}

std::optional<std::size_t> decide_discontinuation(const HazardVector& h,
                                                  double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0,1)");
  }
  for (std::size_t l = 0; l < h.values().size(); ++l) {
    if (h.values()[l] > threshold) return l + 1;
  }
  return std::nullopt;
}

double risk_score(const HazardVector& h) {
  const SurvivalCurve s = survival_curve(h);
  double expected = 0.0;
  for (std::size_t l = 1; l <= h.grid().interval_count(); ++l) {
    expected += s[l] * h.grid().width(l);
  }
  return -expected;
}

}  // namespace adsurv
