#include "adsurv/case_study.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace adsurv {

HazardPrediction predict_hazards(const ModelSpec& spec, const ModelState& state,
                                 const GenreVocab& vocab,
                                 const AdCreative& creative,
                                 std::size_t observe_day) {
  if (observe_day < 1)
    throw std::invalid_argument("observe_day must be >= 1");
  const std::size_t day = std::min(observe_day, creative.daily.size());
  const ModelInput input = model_input_from(creative, vocab, day);
  const Prediction pred = forward(spec, state, input);
  HazardPrediction out;
  out.heads = to_hazards(spec, pred);
  if (spec.task == TaskMode::kMultiTask)
    out.merged = merge_two_term(out.heads[0], out.heads[1]);
  return out;
}

const HazardVector& full_hazards(const HazardPrediction& pred) {
  if (pred.merged) return *pred.merged;
  if (pred.heads.empty())
    throw std::logic_error("prediction carries no hazard output");
  return pred.heads.front();
}

ShortTermCaseStudy short_term_case_study(
    const ModelSpec& spec, const ModelState& state, const GenreVocab& vocab,
    const std::vector<AdCreative>& creatives, double threshold) {
  if (spec.task != TaskMode::kShort && spec.task != TaskMode::kMultiTask)
    throw std::invalid_argument(
        "short-term case study needs a model with a short-grid head");
  ShortTermCaseStudy study;
  std::vector<CpaRatio> model_ratios;
  std::vector<CpaRatio> actual_ratios;
  for (const AdCreative& c : creatives) {
    const HazardPrediction pred = predict_hazards(spec, state, vocab, c, 1);
    const HazardVector& short_head = pred.heads.front();
    const auto flagged = decide_discontinuation(short_head, threshold);
    const auto lifetime = static_cast<std::size_t>(c.lifetime_days);
    std::size_t eval_day = lifetime;
    if (flagged) {
      ++study.n_flagged;
      const auto predicted_day =
          static_cast<std::size_t>(short_head.grid().upper(*flagged));
      eval_day = std::min(predicted_day, lifetime);
    }
    model_ratios.push_back(cpa_ratio(c, eval_day));
    actual_ratios.push_back(cpa_ratio(c, lifetime));
    ++study.n;
  }
  study.model = aggregate_cpa(model_ratios);
  study.actual = aggregate_cpa(actual_ratios);
  return study;
}

namespace {

std::vector<std::string> restrict_order(
    const std::vector<std::string>& order,
    const std::unordered_set<std::string>& keep) {
  std::vector<std::string> out;
  out.reserve(keep.size());
  for (const std::string& id : order)
    if (keep.count(id)) out.push_back(id);
  return out;
}

}  // namespace

LongTermCaseStudy long_term_case_study(
    const ModelSpec& spec, const ModelState& state, const GenreVocab& vocab,
    const std::vector<AdCreative>& creatives, double threshold,
    std::size_t observe_day, std::size_t checkpoint_step) {
  if (spec.task != TaskMode::kLong && spec.task != TaskMode::kMultiTask)
    throw std::invalid_argument(
        "long-term case study needs a model with a long-grid head");
  if (checkpoint_step == 0)
    throw std::invalid_argument("checkpoint_step must be positive");
  const std::size_t long_head_index =
      spec.task == TaskMode::kMultiTask ? 1 : 0;

  std::vector<const AdCreative*> population;
  for (const AdCreative& c : creatives)
    if (c.lifetime_days > observe_day) population.push_back(&c);

  LongTermCaseStudy study;
  study.population = population.size();

  std::vector<std::string> model_order;
  std::vector<std::string> actual_order;
  std::vector<std::string> sales_order;
  std::vector<std::string> cpa_order;
  std::unordered_map<std::string, std::size_t> lifetime_of;

  if (!population.empty()) {
    std::vector<RankedHazards> ranked;
    ranked.reserve(population.size());
    for (const AdCreative* c : population) {
      const HazardPrediction pred =
          predict_hazards(spec, state, vocab, *c, observe_day);
      ranked.push_back({c->creative_id, pred.heads[long_head_index]});
      lifetime_of[c->creative_id] = c->lifetime_days;
    }
    model_order = predicted_discontinuation_order(ranked, threshold);

    std::vector<const AdCreative*> by_lifetime = population;
    std::sort(by_lifetime.begin(), by_lifetime.end(),
              [](const AdCreative* a, const AdCreative* b) {
                if (a->lifetime_days != b->lifetime_days)
                  return a->lifetime_days < b->lifetime_days;
                return a->creative_id < b->creative_id;
              });
    for (const AdCreative* c : by_lifetime)
      actual_order.push_back(c->creative_id);

    std::vector<const AdCreative*> by_sales = population;
    std::sort(by_sales.begin(), by_sales.end(),
              [](const AdCreative* a, const AdCreative* b) {
                if (a->total_sales != b->total_sales)
                  return a->total_sales > b->total_sales;
                return a->creative_id < b->creative_id;
              });
    for (const AdCreative* c : by_sales) sales_order.push_back(c->creative_id);

    struct CpaKey {
      const AdCreative* creative;
      CpaRatio ratio;
    };
    std::vector<CpaKey> by_cpa;
    by_cpa.reserve(population.size());
    for (const AdCreative* c : population)
      by_cpa.push_back({c, cpa_ratio(*c, observe_day)});
    std::sort(by_cpa.begin(), by_cpa.end(),
              [](const CpaKey& a, const CpaKey& b) {
                if (a.ratio.infinite != b.ratio.infinite)
                  return a.ratio.infinite;  // unconverted spend stops first
                if (!a.ratio.infinite && a.ratio.value != b.ratio.value)
                  return a.ratio.value > b.ratio.value;
                return a.creative->creative_id < b.creative->creative_id;
              });
    for (const CpaKey& k : by_cpa)
      cpa_order.push_back(k.creative->creative_id);
  }

  const auto horizon =
      static_cast<std::size_t>(TimeGrid::long_term().horizon());
  for (std::size_t day = observe_day; day <= horizon; day += checkpoint_step) {
    OrderCheckpoint cp;
    cp.day = day;
    std::unordered_set<std::string> keep;
    for (const auto& [id, lifetime] : lifetime_of)
      if (lifetime >= day) keep.insert(id);
    cp.n = keep.size();
    if (keep.empty()) {
      cp.skipped = true;
      cp.note = "no creatives still serving";
    } else {
      const std::vector<std::string> actual = restrict_order(actual_order, keep);
      cp.model_ndcg = ndcg_order(restrict_order(model_order, keep), actual);
      cp.sales_rule_ndcg =
          ndcg_order(restrict_order(sales_order, keep), actual);
      cp.cpa_rule_ndcg = ndcg_order(restrict_order(cpa_order, keep), actual);
    }
    study.checkpoints.push_back(cp);
  }
  return study;
}

}  // namespace adsurv
