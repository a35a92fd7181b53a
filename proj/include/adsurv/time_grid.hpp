#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adsurv {

/// An ordered sequence of right-closed day intervals (t_{l-1}, t_l].
/// Interval indices are 1-based; interval l covers (bounds[l-1], bounds[l]].
class TimeGrid {
 public:
  /// Bounds must be strictly increasing, non-negative, and define >= 1 interval.
  explicit TimeGrid(std::vector<double> bounds);

  static TimeGrid short_term();   // (1,3] (3,5] (5,7] (7,10]
  static TimeGrid long_term();    // (1,10] (10,30] (30,60] (60,90] (90,120]
  static TimeGrid overall();      // short grid spliced with long intervals 2..5

  /// Preset lookup by config name: "short", "long", "overall-merged".
  static TimeGrid from_name(const std::string& name);

  std::size_t interval_count() const { return bounds_.size() - 1; }
  const std::vector<double>& bounds() const { return bounds_; }
  double lower(std::size_t l) const { return bounds_[l - 1]; }
  double upper(std::size_t l) const { return bounds_[l]; }
  double width(std::size_t l) const { return bounds_[l] - bounds_[l - 1]; }
  double origin() const { return bounds_.front(); }
  double horizon() const { return bounds_.back(); }

  bool operator==(const TimeGrid& other) const = default;

 private:
  std::vector<double> bounds_;
};

/// 1-based interval containing `day`, or nullopt when day > t_L ("beyond-grid").
/// Days at or below the first lower bound collapse into interval 1.
/// Throws std::invalid_argument for day <= 0.
std::optional<std::size_t> interval_index(const TimeGrid& grid, double day);

/// Per-interval event indicators for one record under a grid.
/// delta has length l' (the number of observed intervals); at most one element
/// is 1 and only in the last position. All-zero delta <=> censored.
class EventLabels {
 public:
  EventLabels(TimeGrid grid, std::vector<std::uint8_t> delta);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<std::uint8_t>& delta() const { return delta_; }
  std::size_t observed_count() const { return delta_.size(); }
  bool censored() const;

  /// 1-based interval of the event, or nullopt when censored.
  std::optional<std::size_t> event_interval() const;

 private:
  TimeGrid grid_;
  std::vector<std::uint8_t> delta_;
};

/// Labels for a lifetime in days. Lifetimes beyond the grid horizon are
/// treated as censored at l' = L. Throws std::invalid_argument for
/// lifetime_days <= 0.
EventLabels labels_from_lifetime(const TimeGrid& grid, double lifetime_days,
                                 bool censored);

}  // namespace adsurv
