#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adsurv/hazard.hpp"
#include "adsurv/tensor.hpp"
#include "adsurv/time_grid.hpp"

namespace adsurv {

// What the network is trained to predict. The first four are hazard heads on
// the corresponding grids; the last two are the scalar comparison baselines.
enum class TaskMode {
  kShort,       // 4 hazards on the short grid
  kLong,        // 5 hazards on the long grid
  kOverall,     // 8 hazards on the merged grid, single head
  kMultiTask,   // short + long heads, blended loss
  kClassifier,  // one sigmoid output (binary cross-entropy)
  kRegressor,   // one linear output (squared error on the day value)
};

TaskMode task_mode_from_name(std::string_view name);
std::string task_mode_name(TaskMode mode);

// Feature-block ablation switches. The categorical block (gender one-hot +
// genre embedding) is always on; these four cover the ablatable blocks.
struct FeatureMask {
  bool text = true;
  bool image = true;
  bool stats = true;
  bool series = true;
};

struct ModelSpec {
  TaskMode task = TaskMode::kMultiTask;
  FeatureMask mask;
  std::size_t text_dim = 16;
  std::size_t image_dim = 16;
  std::size_t stat_dim = 6;
  std::size_t gender_dim = 3;
  std::size_t genre_vocab = 1;  // row count incl. the reserved unknown slot 0
  std::size_t genre_dim = 8;
  std::size_t rnn_input = 2;
  std::size_t rnn_hidden = 10;
  std::vector<std::size_t> trunk = {64, 64};

  std::size_t input_width() const;
  // Head layout in declaration order; multi-task is {short, long}.
  std::vector<std::size_t> head_widths() const;
  std::vector<std::string> head_names() const;
};

// Raw per-creative model input. Blocks excluded by the mask may be left empty.
struct ModelInput {
  std::vector<double> text;
  std::array<double, 3> gender{};
  std::size_t genre_index = 0;
  std::vector<double> image;
  std::vector<double> stats;
  std::vector<std::vector<double>> series;  // one rnn_input-wide vector per day
};

// Supervision for one creative; which fields are read depends on the task.
struct SampleTargets {
  std::optional<EventLabels> short_labels;
  std::optional<EventLabels> long_labels;
  std::optional<EventLabels> overall_labels;
  double binary_label = 0.0;
  double day_target = 0.0;
  double ctr = 0.0;               // r for WeightMode::kCtr
  double impression_ratio = 0.0;  // r for WeightMode::kImpression
};

struct ModelState {
  struct Param {
    std::string name;
    Tensor value;
    Tensor m;  // Adam first moment
    Tensor v;  // Adam second moment
  };
  std::vector<Param> params;
  std::uint64_t step_count = 0;

  std::size_t index_of(std::string_view name) const;
  Param& find(std::string_view name);
  const Param& find(std::string_view name) const;
};

// Glorot-uniform weights, zero biases, zero moments; fully determined by seed.
ModelState init_state(const ModelSpec& spec, std::uint64_t seed);

// Per-parameter gradient buffers, index-aligned with state.params.
struct Gradients {
  std::vector<Tensor> g;
};
Gradients zero_gradients(const ModelState& state);
void scale_gradients(Gradients& grads, double factor);

struct Prediction {
  // One vector per head, matching spec.head_names() order. Hazard and
  // classifier heads are post-sigmoid; the regressor head is raw.
  std::vector<std::vector<double>> heads;
};

Prediction forward(const ModelSpec& spec, const ModelState& state,
                   const ModelInput& input);

// Final hidden state of the tanh Elman cell run left-to-right over the series.
std::vector<double> recurrent_encode(const ModelSpec& spec,
                                     const ModelState& state,
                                     const std::vector<std::vector<double>>& series);

// Hazard-head outputs wrapped with their grids (hazard task modes only).
std::vector<HazardVector> to_hazards(const ModelSpec& spec,
                                     const Prediction& pred);

double sample_loss(const ModelSpec& spec, const Prediction& pred,
                   const SampleTargets& targets, const LossWeighting& weighting);

// Runs forward, accumulates exact reverse-mode gradients of the weighted loss
// into `accum` (+=), and returns that loss.
double backward(const ModelSpec& spec, const ModelState& state,
                const ModelInput& input, const SampleTargets& targets,
                const LossWeighting& weighting, Gradients& accum);

// Comparison-baseline losses (epsilon-clamped BCE; plain squared error).
double binary_cross_entropy(double p, double y);
double squared_error(double pred, double target);

double sigmoid(double z);

}  // namespace adsurv
