#include "adsurv/train.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "adsurv/rng.hpp"

namespace adsurv {

void adam_step(ModelState& state, const Gradients& grads,
               const AdamConfig& cfg) {
  if (cfg.lr <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  if (grads.g.size() != state.params.size()) {
    throw std::invalid_argument("gradient set does not match parameter set");
  }
  for (const auto& g : grads.g) {
    if (!g.all_finite()) {
      throw std::runtime_error("non-finite gradient passed to adam_step");
    }
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t pi = 0; pi < state.params.size(); ++pi) {
    auto& p = state.params[pi];
    const Tensor& g = grads.g[pi];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g[i];
      p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = p.m[i] / bc1;
      const double vhat = p.v[i] / bc2;
      p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    assert(p.value.all_finite());
  }
}

double mean_loss(const ModelSpec& spec, const ModelState& state,
                 const std::vector<LabeledExample>& samples,
                 const LossWeighting& weighting) {
  if (samples.empty()) {
    throw std::invalid_argument("mean_loss over an empty sample set");
  }
  double total = 0.0;
  for (const auto& ex : samples) {
    total += sample_loss(spec, forward(spec, state, ex.input), ex.targets,
                         weighting);
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const ModelSpec& spec,
                  const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>* val_set,
                  const TrainConfig& cfg) {
  if (train_set.empty()) {
    throw std::invalid_argument("training set is empty");
  }
  if (cfg.batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }

  TrainResult result;
  result.final_state = init_state(spec, cfg.seed);
  result.best_state = result.final_state;
  result.best_epoch = 0;
  const bool have_val = val_set != nullptr && !val_set->empty();
  double best_val = have_val ? mean_loss(spec, result.final_state, *val_set,
                                         cfg.weighting)
                             : std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients grads = zero_gradients(result.final_state);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, epoch));
    deterministic_shuffle(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      for (auto& t : grads.g) t.fill(0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = train_set[order[i]];
        batch_loss += backward(spec, result.final_state, ex.input, ex.targets,
                               cfg.weighting, grads);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      scale_gradients(grads, inv);
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch));
      }
      adam_step(result.final_state, grads, cfg.adam);
      epoch_loss += batch_loss;
    }
    epoch_loss /= static_cast<double>(order.size());

    EpochTrace trace;
    trace.epoch = epoch;
    trace.train_loss = epoch_loss;
    trace.val_loss = std::numeric_limits<double>::quiet_NaN();
    if (have_val) {
      trace.val_loss = mean_loss(spec, result.final_state, *val_set,
                                 cfg.weighting);
      if (!std::isfinite(trace.val_loss)) {
        throw std::runtime_error("validation loss diverged at epoch " +
                                 std::to_string(epoch));
      }
      if (trace.val_loss < best_val) {
        best_val = trace.val_loss;
        result.best_state = result.final_state;
        result.best_epoch = epoch;
      }
    }
    result.trace.push_back(trace);
  }

  if (!have_val) result.best_state = result.final_state;
  return result;
}

}  // namespace adsurv
