#pragma once

#include <cstdint>
#include <vector>

#include "adsurv/model.hpp"

namespace adsurv {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard bias-corrected Adam update over every parameter; bumps step_count.
// Non-finite gradients are a training error and throw.
void adam_step(ModelState& state, const Gradients& grads,
               const AdamConfig& cfg = {});

struct LabeledExample {
  ModelInput input;
  SampleTargets targets;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  AdamConfig adam;
  std::uint64_t seed = 42;
  LossWeighting weighting;
};

struct EpochTrace {
  std::size_t epoch = 0;      // 1-based
  double train_loss = 0.0;    // mean weighted loss over the epoch's samples
  double val_loss = 0.0;      // NaN when no validation split was supplied
};

struct TrainResult {
  ModelState final_state;
  ModelState best_state;      // lowest validation loss; final state without val
  std::size_t best_epoch = 0; // 0 means the initial state was never improved on
  std::vector<EpochTrace> trace;
};

// Deterministic mini-batch training: init from seed, per-epoch reshuffle from
// a seed derived off (seed, epoch), batch-mean gradients, incomplete final
// batch included. Divergence (non-finite loss) throws with the epoch in the
// message.
TrainResult train(const ModelSpec& spec,
                  const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>* val_set,
                  const TrainConfig& cfg);

// Mean weighted loss of `state` over a sample set (no gradient work).
double mean_loss(const ModelSpec& spec, const ModelState& state,
                 const std::vector<LabeledExample>& samples,
                 const LossWeighting& weighting);

}  // namespace adsurv
