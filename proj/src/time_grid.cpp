#include "adsurv/time_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace adsurv {

TimeGrid::TimeGrid(std::vector<double> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.size() < 2) {
    throw std::invalid_argument("TimeGrid needs at least two bounds");
  }
  if (bounds_.front() < 0.0) {
    throw std::invalid_argument("TimeGrid bounds must be non-negative");
  }
  for (std::size_t i = 1; i < bounds_.size(); ++i) {
    if (!(bounds_[i] > bounds_[i - 1])) {
      throw std::invalid_argument("TimeGrid bounds must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::short_term() { return TimeGrid({1, 3, 5, 7, 10}); }

TimeGrid TimeGrid::long_term() { return TimeGrid({1, 10, 30, 60, 90, 120}); }

TimeGrid TimeGrid::overall() {
  return TimeGrid({1, 3, 5, 7, 10, 30, 60, 90, 120});
}

TimeGrid TimeGrid::from_name(const std::string& name) {
  if (name == "short") return short_term();
  if (name == "long") return long_term();
  if (name == "overall-merged") return overall();
  throw std::invalid_argument("unknown time grid preset: " + name);
}

std::optional<std::size_t> interval_index(const TimeGrid& grid, double day) {
  if (!(day > 0.0)) {
    throw std::invalid_argument("interval_index: day must be positive");
  }
  const auto& b = grid.bounds();
  if (day > b.back()) return std::nullopt;
  if (day <= b.front()) return 1;  // early discontinuations fold into interval 1
  // first bound >= day gives the right-closed interval
  auto it = std::lower_bound(b.begin(), b.end(), day);
  return static_cast<std::size_t>(it - b.begin());
}

EventLabels::EventLabels(TimeGrid grid, std::vector<std::uint8_t> delta)
    : grid_(std::move(grid)), delta_(std::move(delta)) {
  if (delta_.empty() || delta_.size() > grid_.interval_count()) {
    throw std::invalid_argument("EventLabels: delta length must be in [1, L]");
  }
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    if (delta_[i] > 1) {
      throw std::invalid_argument("EventLabels: delta entries must be 0/1");
    }
    if (delta_[i] == 1 && i + 1 != delta_.size()) {
      throw std::invalid_argument(
          "EventLabels: the event indicator must be the last element");
    }
  }
}

bool EventLabels::censored() const { return delta_.back() == 0; }

std::optional<std::size_t> EventLabels::event_interval() const {
  if (censored()) return std::nullopt;
  return delta_.size();
}

EventLabels labels_from_lifetime(const TimeGrid& grid, double lifetime_days,
                                 bool censored) {
  if (!(lifetime_days > 0.0)) {
    throw std::invalid_argument("labels_from_lifetime: lifetime must be positive");
  }
  const auto idx = interval_index(grid, lifetime_days);
  if (!idx.has_value()) {
    // beyond the horizon: survived every interval on this grid
    return EventLabels(grid,
                       std::vector<std::uint8_t>(grid.interval_count(), 0));
  }
  const std::size_t observed = *idx;  // interval_index never returns 0
  std::vector<std::uint8_t> delta(observed, 0);
  if (!censored) delta[observed - 1] = 1;
  return EventLabels(grid, std::move(delta));
}

}  // namespace adsurv
