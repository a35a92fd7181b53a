#pragma once

#include <optional>
#include <vector>

#include "adsurv/time_grid.hpp"

namespace adsurv {

/// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

/// Per-interval discontinuation probabilities for one creative.
class HazardVector {
 public:
  HazardVector(TimeGrid grid, std::vector<double> h);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return h_; }
  double operator[](std::size_t l) const { return h_[l - 1]; }  // 1-based

 private:
  TimeGrid grid_;
  std::vector<double> h_;
};

/// Survival probabilities s_l = prod_{k<=l} (1 - h_k); non-increasing.
class SurvivalCurve {
 public:
  SurvivalCurve(TimeGrid grid, std::vector<double> s);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return s_; }
  double operator[](std::size_t l) const { return s_[l - 1]; }

 private:
  TimeGrid grid_;
  std::vector<double> s_;
};

enum class WeightMode { kNone, kCtr, kImpression };

/// Loss-shaping configuration: per-record weight mode and the balance
/// coefficient between the short-term and long-term losses.
struct LossWeighting {
  WeightMode mode = WeightMode::kNone;
  double lambda = 0.5;
};

/// Single Bernoulli term -[d log h + (1-d) log(1-h)] with clamping.
double bernoulli_nll(double h, bool event);

/// Product over observed intervals of h^delta (1-h)^(1-delta).
/// Throws std::invalid_argument when h and y disagree on the grid.
double likelihood(const HazardVector& h, const EventLabels& y);

/// Sum of per-interval Bernoulli negative log terms over observed intervals;
/// equals -log(likelihood) up to probability clamping.
double negative_log_likelihood(const HazardVector& h, const EventLabels& y);

/// Engagement weighting: returns (r + 1) * base_loss, or base_loss untouched
/// in WeightMode::kNone. r is a CTR or a normalized impression ratio in [0,1].
double weighted_loss(double base_loss, double r, WeightMode mode);

/// lambda * loss_short + (1 - lambda) * loss_long, lambda in [0,1].
double mtl_loss(double loss_short, double loss_long, double lambda);

SurvivalCurve survival_curve(const HazardVector& h);

/// Splices a short-grid and a long-grid hazard vector into one vector on the
/// overall grid: the four short-term hazards followed by long-term hazards for
/// intervals 2..5. The long model's first interval spans the whole short grid
/// and is dropped; its survival mass is carried by the short-term product.
HazardVector merge_two_term(const HazardVector& h_short,
                            const HazardVector& h_long);

/// Smallest 1-based interval with hazard above `threshold`, or nullopt when
/// the hazard never crosses it.
std::optional<std::size_t> decide_discontinuation(const HazardVector& h,
                                                  double threshold = 0.9);

/// Negative expected survival time on the grid: -sum_l s_l * width_l.
/// Higher score means earlier predicted discontinuation.
double risk_score(const HazardVector& h);

}  // namespace adsurv
