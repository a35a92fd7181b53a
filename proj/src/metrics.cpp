#include "adsurv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "adsurv/io_util.hpp"

namespace adsurv {

SurvivalObservation observe_on_grid(double lifetime, bool censored,
                                    double grid_horizon) {
  if (lifetime > grid_horizon) return {grid_horizon, false};
  return {lifetime, !censored};
}

double ConcordanceCounts::index() const {
  if (admissible == 0)
    throw std::domain_error("concordance undefined: no admissible pairs");
  return (static_cast<double>(concordant) +
          0.5 * static_cast<double>(tied_risk)) /
         static_cast<double>(admissible);
}

namespace {

// Fenwick tree over risk ranks, counting active items.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i, std::int64_t delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  std::int64_t prefix(std::size_t count) const {  // sum of first `count` ranks
    std::int64_t s = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

void check_inputs(const std::vector<double>& risks,
                  const std::vector<SurvivalObservation>& obs) {
  if (risks.size() != obs.size())
    throw std::invalid_argument("risks and observations differ in length");
  if (risks.size() < 2)
    throw std::invalid_argument("concordance needs at least 2 items");
  for (double r : risks)
    if (!std::isfinite(r))
      throw std::invalid_argument("risk scores must be finite");
}

}  // namespace

ConcordanceCounts concordance_index(const std::vector<double>& risks,
                                    const std::vector<SurvivalObservation>& obs) {
  check_inputs(risks, obs);
  const std::size_t n = risks.size();

  std::vector<double> sorted_risks = risks;
  std::sort(sorted_risks.begin(), sorted_risks.end());
  sorted_risks.erase(std::unique(sorted_risks.begin(), sorted_risks.end()),
                     sorted_risks.end());
  const auto rank_of = [&](double r) {
    return static_cast<std::size_t>(
        std::lower_bound(sorted_risks.begin(), sorted_risks.end(), r) -
        sorted_risks.begin());
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return obs[a].time < obs[b].time;
  });

  Fenwick active(sorted_risks.size());
  for (std::size_t i = 0; i < n; ++i) active.add(rank_of(risks[i]), 1);
  std::uint64_t n_active = n;

  ConcordanceCounts counts;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && obs[order[j]].time == obs[order[i]].time) ++j;
    // Remove the whole equal-time group first: same-time pairs are excluded,
    // and every remaining active item has a strictly later time.
    for (std::size_t k = i; k < j; ++k) {
      active.add(rank_of(risks[order[k]]), -1);
      --n_active;
    }
    for (std::size_t k = i; k < j; ++k) {
      const std::size_t idx = order[k];
      if (!obs[idx].event) continue;
      const std::size_t r = rank_of(risks[idx]);
      const std::int64_t below = active.prefix(r);
      const std::int64_t at = active.prefix(r + 1) - below;
      counts.admissible += n_active;
      counts.tied_risk += static_cast<std::uint64_t>(at);
      // Concordant: the longer-lived partner carries strictly lower risk.
      counts.concordant += static_cast<std::uint64_t>(below);
    }
    i = j;
  }
  return counts;
}

ConcordanceCounts concordance_brute_force(
    const std::vector<double>& risks,
    const std::vector<SurvivalObservation>& obs) {
  check_inputs(risks, obs);
  ConcordanceCounts counts;
  for (std::size_t a = 0; a < risks.size(); ++a) {
    for (std::size_t b = a + 1; b < risks.size(); ++b) {
      std::size_t early = a;
      std::size_t late = b;
      if (obs[b].time < obs[a].time) {
        early = b;
        late = a;
      } else if (obs[a].time == obs[b].time) {
        continue;  // lifetime ties excluded
      }
      if (!obs[early].event) continue;  // earlier time censored: inadmissible
      ++counts.admissible;
      if (risks[early] > risks[late])
        ++counts.concordant;
      else if (risks[early] == risks[late])
        ++counts.tied_risk;
    }
  }
  return counts;
}

std::vector<std::string> top_sales_slice(
    const std::vector<AdCreative>& creatives, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("slice fraction must lie in (0,1]");
  std::vector<const AdCreative*> sorted;
  sorted.reserve(creatives.size());
  for (const AdCreative& c : creatives) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const AdCreative* a, const AdCreative* b) {
              if (a->total_sales != b->total_sales)
                return a->total_sales > b->total_sales;
              return a->creative_id < b->creative_id;
            });
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(creatives.size())));
  std::vector<std::string> ids;
  ids.reserve(keep);
  for (std::size_t i = 0; i < keep && i < sorted.size(); ++i)
    ids.push_back(sorted[i]->creative_id);
  return ids;
}

F1Result f1_score(const std::vector<bool>& predicted,
                  const std::vector<bool>& actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("prediction and truth lengths differ");
  F1Result r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && actual[i]) ++r.tp;
    else if (predicted[i] && !actual[i]) ++r.fp;
    else if (!predicted[i] && actual[i]) ++r.fn;
    else ++r.tn;
  }
  r.defined = (r.tp + r.fp + r.fn) > 0;
  r.precision = (r.tp + r.fp) > 0
                    ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                    : 0.0;
  r.recall = (r.tp + r.fn) > 0
                 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                 : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

double ndcg_order(const std::vector<std::string>& predicted,
                  const std::vector<std::string>& actual) {
  if (predicted.size() != actual.size() || actual.empty())
    throw std::invalid_argument("orderings must be equal-length and non-empty");
  std::unordered_map<std::string, std::size_t> rank;
  rank.reserve(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!rank.emplace(actual[i], i).second)
      throw std::invalid_argument("duplicate id in actual ordering: " +
                                  actual[i]);
  }
  const std::size_t n = actual.size();
  double dcg = 0.0;
  double idcg = 0.0;
  std::set<std::string> seen;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto it = rank.find(predicted[pos]);
    if (it == rank.end())
      throw std::invalid_argument("predicted ordering is not a permutation: " +
                                  predicted[pos]);
    if (!seen.insert(predicted[pos]).second)
      throw std::invalid_argument("duplicate id in predicted ordering: " +
                                  predicted[pos]);
    const double discount = 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    dcg += static_cast<double>(n - it->second) * discount;
    idcg += static_cast<double>(n - pos) * discount;
  }
  return dcg / idcg;
}

std::vector<std::string> predicted_discontinuation_order(
    const std::vector<RankedHazards>& items, double threshold) {
  struct Key {
    std::size_t interval;  // SIZE_MAX for the never-flagged group
    double hazard;
    const std::string* id;
  };
  std::vector<Key> keys;
  keys.reserve(items.size());
  for (const RankedHazards& item : items) {
    const auto flagged = decide_discontinuation(item.hazards, threshold);
    Key k;
    k.id = &item.creative_id;
    if (flagged) {
      k.interval = *flagged;
      k.hazard = item.hazards[*flagged];
    } else {
      k.interval = std::numeric_limits<std::size_t>::max();
      k.hazard = item.hazards.values().back();
    }
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.interval != b.interval) return a.interval < b.interval;
    if (a.hazard != b.hazard) return a.hazard > b.hazard;
    return *a.id < *b.id;
  });
  std::vector<std::string> out;
  out.reserve(keys.size());
  for (const Key& k : keys) out.push_back(*k.id);
  return out;
}

CpaRatio cpa_ratio(const AdCreative& creative, std::size_t as_of_day) {
  if (!(creative.target_cpa > 0.0))
    throw std::domain_error("cpa_ratio requires a positive target_cpa");
  if (as_of_day < 1) throw std::out_of_range("as_of_day must be >= 1");
  double spend = 0.0;
  std::uint64_t conversions = 0;
  const std::size_t upto = std::min(as_of_day, creative.daily.size());
  for (std::size_t i = 0; i < upto; ++i) {
    spend += creative.daily[i].spend;
    conversions += creative.daily[i].conversions;
  }
  if (spend <= 0.0) return {0.0, false};
  if (conversions == 0)
    return {std::numeric_limits<double>::infinity(), true};
  return {(spend / static_cast<double>(conversions)) / creative.target_cpa,
          false};
}

CpaAggregate aggregate_cpa(const std::vector<CpaRatio>& ratios) {
  CpaAggregate agg;
  double sum = 0.0;
  for (const CpaRatio& r : ratios) {
    if (r.infinite) {
      ++agg.n_infinite;
    } else {
      ++agg.n_finite;
      sum += r.value;
    }
  }
  if (agg.n_finite == 0) return agg;
  agg.mean = sum / static_cast<double>(agg.n_finite);
  double ss = 0.0;
  for (const CpaRatio& r : ratios) {
    if (!r.infinite) {
      const double d = r.value - agg.mean;
      ss += d * d;
    }
  }
  agg.stddev = std::sqrt(ss / static_cast<double>(agg.n_finite));
  return agg;
}

std::string eval_report_csv(const std::vector<EvalRow>& rows) {
  std::string out = "metric,slice,value,n,config_fingerprint\n";
  for (const EvalRow& row : rows) {
    out += row.metric;
    out += ',';
    out += row.slice;
    out += ',';
    out += format_double(row.value);
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += row.config_fingerprint;
    out += '\n';
  }
  return out;
}

}  // namespace adsurv
