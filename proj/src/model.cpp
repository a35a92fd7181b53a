#include "adsurv/model.hpp"

#include <cassert>
#include <cmath>
#include <random>
#include <stdexcept>

#include "adsurv/rng.hpp"

namespace adsurv {

namespace {

// Byte offsets of each block inside the assembled input vector, in the fixed
// concatenation order text | gender | genre | image | stats | series.
struct InputLayout {
  std::size_t text_off, gender_off, genre_off, image_off, stats_off, series_off;
  std::size_t width;
};

InputLayout layout_of(const ModelSpec& spec) {
  InputLayout lay{};
  std::size_t off = 0;
  lay.text_off = off;
  if (spec.mask.text) off += spec.text_dim;
  lay.gender_off = off;
  off += spec.gender_dim;
  lay.genre_off = off;
  off += spec.genre_dim;
  lay.image_off = off;
  if (spec.mask.image) off += spec.image_dim;
  lay.stats_off = off;
  if (spec.mask.stats) off += spec.stat_dim;
  lay.series_off = off;
  if (spec.mask.series) off += spec.rnn_hidden;
  lay.width = off;
  return lay;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

bool is_bias(const std::string& name) {
  return name.size() >= 2 && name.compare(name.size() - 2, 2, "_b") == 0;
}

// Everything backward needs from the forward pass.
struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> rnn_h;       // post-tanh hidden per step
  std::vector<std::vector<double>> trunk_pre;   // z per layer
  std::vector<std::vector<double>> trunk_act;   // relu(z) per layer
  std::vector<std::vector<double>> head_logits;
};

void check_block(const std::vector<double>& block, std::size_t want,
                 const char* what) {
  if (block.size() != want) {
    throw std::invalid_argument(std::string("model input block '") + what +
                                "' has wrong width");
  }
}

// y = W x  (W is [out, in])
void matvec(const Tensor& w, const double* x, double* y) {
  const std::size_t out = w.rows(), in = w.cols();
  const double* wd = w.data();
  for (std::size_t r = 0; r < out; ++r) {
    double acc = 0.0;
    const double* row = wd + r * in;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

Prediction forward_impl(const ModelSpec& spec, const ModelState& state,
                        const ModelInput& input, ForwardCache* cache) {
  const InputLayout lay = layout_of(spec);
  if (input.genre_index >= spec.genre_vocab) {
    throw std::invalid_argument("genre index outside the embedding table");
  }

  std::vector<double> x(lay.width, 0.0);
  if (spec.mask.text) {
    check_block(input.text, spec.text_dim, "text");
    std::copy(input.text.begin(), input.text.end(), x.begin() + lay.text_off);
  }
  for (std::size_t i = 0; i < spec.gender_dim; ++i) {
    x[lay.gender_off + i] = input.gender[i];
  }
  const Tensor& embed = state.find("genre_embed").value;
  for (std::size_t i = 0; i < spec.genre_dim; ++i) {
    x[lay.genre_off + i] = embed.at(input.genre_index, i);
  }
  if (spec.mask.image) {
    check_block(input.image, spec.image_dim, "image");
    std::copy(input.image.begin(), input.image.end(), x.begin() + lay.image_off);
  }
  if (spec.mask.stats) {
    check_block(input.stats, spec.stat_dim, "stats");
    std::copy(input.stats.begin(), input.stats.end(), x.begin() + lay.stats_off);
  }

  if (spec.mask.series) {
    // Empty series (prediction before any serving data) encodes as zeros.
    const Tensor& wx = state.find("rnn_wx").value;
    const Tensor& wh = state.find("rnn_wh").value;
    const Tensor& b = state.find("rnn_b").value;
    std::vector<double> h(spec.rnn_hidden, 0.0);
    std::vector<double> pre(spec.rnn_hidden);
    for (const auto& day : input.series) {
      check_block(day, spec.rnn_input, "series step");
      for (std::size_t j = 0; j < spec.rnn_hidden; ++j) {
        double acc = b[j];
        for (std::size_t i = 0; i < spec.rnn_input; ++i) {
          acc += wx.at(j, i) * day[i];
        }
        for (std::size_t i = 0; i < spec.rnn_hidden; ++i) {
          acc += wh.at(j, i) * h[i];
        }
        pre[j] = acc;
      }
      for (std::size_t j = 0; j < spec.rnn_hidden; ++j) h[j] = std::tanh(pre[j]);
      if (cache) cache->rnn_h.push_back(h);
    }
    std::copy(h.begin(), h.end(), x.begin() + lay.series_off);
  }

  // MLP trunk, ReLU throughout.
  std::vector<double> act = x;
  if (cache) cache->input = x;
  for (std::size_t li = 0; li < spec.trunk.size(); ++li) {
    const Tensor& w = state.find("trunk_w" + std::to_string(li)).value;
    const Tensor& b = state.find("trunk_b" + std::to_string(li)).value;
    if (w.cols() != act.size()) {
      throw std::invalid_argument("trunk width does not match feature width");
    }
    std::vector<double> z(w.rows());
    matvec(w, act.data(), z.data());
    for (std::size_t r = 0; r < z.size(); ++r) z[r] += b[r];
    std::vector<double> a(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) a[r] = z[r] > 0.0 ? z[r] : 0.0;
    if (cache) {
      cache->trunk_pre.push_back(z);
      cache->trunk_act.push_back(a);
    }
    act = std::move(a);
  }

  Prediction pred;
  const auto names = spec.head_names();
  for (const auto& name : names) {
    const Tensor& w = state.find(name + "_w").value;
    const Tensor& b = state.find(name + "_b").value;
    std::vector<double> u(w.rows());
    matvec(w, act.data(), u.data());
    for (std::size_t r = 0; r < u.size(); ++r) u[r] += b[r];
    if (cache) cache->head_logits.push_back(u);
    if (spec.task == TaskMode::kRegressor) {
      pred.heads.push_back(std::move(u));
    } else {
      std::vector<double> out(u.size());
      for (std::size_t r = 0; r < u.size(); ++r) out[r] = sigmoid(u[r]);
      pred.heads.push_back(std::move(out));
    }
  }
  return pred;
}

double rate_for(const SampleTargets& t, WeightMode mode) {
  switch (mode) {
    case WeightMode::kNone: return 0.0;
    case WeightMode::kCtr: return t.ctr;
    case WeightMode::kImpression: return t.impression_ratio;
  }
  throw std::logic_error("unknown weight mode");
}

const EventLabels& require_labels(const std::optional<EventLabels>& labels,
                                  const char* which) {
  if (!labels) {
    throw std::logic_error(std::string("sample is missing ") + which +
                           " labels for this task mode");
  }
  return *labels;
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::size_t ModelSpec::input_width() const { return layout_of(*this).width; }

std::vector<std::size_t> ModelSpec::head_widths() const {
  switch (task) {
    case TaskMode::kShort: return {TimeGrid::short_term().interval_count()};
    case TaskMode::kLong: return {TimeGrid::long_term().interval_count()};
    case TaskMode::kOverall: return {TimeGrid::overall().interval_count()};
    case TaskMode::kMultiTask:
      return {TimeGrid::short_term().interval_count(),
              TimeGrid::long_term().interval_count()};
    case TaskMode::kClassifier:
    case TaskMode::kRegressor: return {1};
  }
  throw std::logic_error("unknown task mode");
}

std::vector<std::string> ModelSpec::head_names() const {
  switch (task) {
    case TaskMode::kShort: return {"head_short"};
    case TaskMode::kLong: return {"head_long"};
    case TaskMode::kOverall: return {"head_overall"};
    case TaskMode::kMultiTask: return {"head_short", "head_long"};
    case TaskMode::kClassifier:
    case TaskMode::kRegressor: return {"head_scalar"};
  }
  throw std::logic_error("unknown task mode");
}

TaskMode task_mode_from_name(std::string_view name) {
  if (name == "short") return TaskMode::kShort;
  if (name == "long") return TaskMode::kLong;
  if (name == "overall") return TaskMode::kOverall;
  if (name == "multi-task") return TaskMode::kMultiTask;
  if (name == "classifier") return TaskMode::kClassifier;
  if (name == "regressor") return TaskMode::kRegressor;
  throw std::invalid_argument("unknown task mode: " + std::string(name));
}

std::string task_mode_name(TaskMode mode) {
  switch (mode) {
    case TaskMode::kShort: return "short";
    case TaskMode::kLong: return "long";
    case TaskMode::kOverall: return "overall";
    case TaskMode::kMultiTask: return "multi-task";
    case TaskMode::kClassifier: return "classifier";
    case TaskMode::kRegressor: return "regressor";
  }
  throw std::logic_error("unknown task mode");
}

std::size_t ModelState::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name == name) return i;
  }
  throw std::invalid_argument("no model parameter named " + std::string(name));
}

ModelState::Param& ModelState::find(std::string_view name) {
  return params[index_of(name)];
}

const ModelState::Param& ModelState::find(std::string_view name) const {
  return params[index_of(name)];
}

ModelState init_state(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.genre_vocab == 0 || spec.trunk.empty()) {
    throw std::invalid_argument("model spec needs a genre table and a trunk");
  }
  ModelState state;
  auto add = [&state](std::string name, std::vector<std::size_t> shape) {
    Tensor value{shape};
    state.params.push_back(
        {std::move(name), value, Tensor{shape}, Tensor{shape}});
  };

  add("genre_embed", {spec.genre_vocab, spec.genre_dim});
  if (spec.mask.series) {
    add("rnn_wx", {spec.rnn_hidden, spec.rnn_input});
    add("rnn_wh", {spec.rnn_hidden, spec.rnn_hidden});
    add("rnn_b", {spec.rnn_hidden});
  }
  std::size_t prev = spec.input_width();
  for (std::size_t li = 0; li < spec.trunk.size(); ++li) {
    add("trunk_w" + std::to_string(li), {spec.trunk[li], prev});
    add("trunk_b" + std::to_string(li), {spec.trunk[li]});
    prev = spec.trunk[li];
  }
  const auto names = spec.head_names();
  const auto widths = spec.head_widths();
  for (std::size_t k = 0; k < names.size(); ++k) {
    add(names[k] + "_w", {widths[k], prev});
    add(names[k] + "_b", {widths[k]});
  }

  // Weights drawn in registration order from one seeded stream; biases zero.
  std::mt19937_64 rng(seed);
  for (auto& p : state.params) {
    if (is_bias(p.name)) continue;
    const std::size_t fan_out = p.value.shape()[0];
    const std::size_t fan_in =
        p.value.ndim() == 2 ? p.value.shape()[1] : p.value.shape()[0];
    const double limit = glorot_limit(fan_in, fan_out);
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      p.value[i] = uniform_range(rng, -limit, limit);
    }
    assert(p.value.all_finite());
  }
  return state;
}

Gradients zero_gradients(const ModelState& state) {
  Gradients grads;
  grads.g.reserve(state.params.size());
  for (const auto& p : state.params) grads.g.emplace_back(p.value.shape());
  return grads;
}

void scale_gradients(Gradients& grads, double factor) {
  for (auto& t : grads.g) {
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] *= factor;
  }
}

Prediction forward(const ModelSpec& spec, const ModelState& state,
                   const ModelInput& input) {
  return forward_impl(spec, state, input, nullptr);
}

std::vector<double> recurrent_encode(
    const ModelSpec& spec, const ModelState& state,
    const std::vector<std::vector<double>>& series) {
  if (series.empty()) {
    throw std::invalid_argument("recurrent_encode needs a non-empty series");
  }
  const Tensor& wx = state.find("rnn_wx").value;
  const Tensor& wh = state.find("rnn_wh").value;
  const Tensor& b = state.find("rnn_b").value;
  std::vector<double> h(spec.rnn_hidden, 0.0);
  std::vector<double> next(spec.rnn_hidden);
  for (const auto& day : series) {
    check_block(day, spec.rnn_input, "series step");
    for (std::size_t j = 0; j < spec.rnn_hidden; ++j) {
      double acc = b[j];
      for (std::size_t i = 0; i < spec.rnn_input; ++i) {
        acc += wx.at(j, i) * day[i];
      }
      for (std::size_t i = 0; i < spec.rnn_hidden; ++i) {
        acc += wh.at(j, i) * h[i];
      }
      next[j] = std::tanh(acc);
    }
    h = next;
  }
  return h;
}

std::vector<HazardVector> to_hazards(const ModelSpec& spec,
                                     const Prediction& pred) {
  switch (spec.task) {
    case TaskMode::kShort:
      return {HazardVector(TimeGrid::short_term(), pred.heads.at(0))};
    case TaskMode::kLong:
      return {HazardVector(TimeGrid::long_term(), pred.heads.at(0))};
    case TaskMode::kOverall:
      return {HazardVector(TimeGrid::overall(), pred.heads.at(0))};
    case TaskMode::kMultiTask:
      return {HazardVector(TimeGrid::short_term(), pred.heads.at(0)),
              HazardVector(TimeGrid::long_term(), pred.heads.at(1))};
    case TaskMode::kClassifier:
    case TaskMode::kRegressor:
      throw std::logic_error("scalar task modes have no hazard output");
  }
  throw std::logic_error("unknown task mode");
}

double binary_cross_entropy(double p, double y) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("probability outside [0,1]");
  }
  const double q = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return -(y * std::log(q) + (1.0 - y) * std::log1p(-q));
}

double squared_error(double pred, double target) {
  const double d = pred - target;
  return d * d;
}

double sample_loss(const ModelSpec& spec, const Prediction& pred,
                   const SampleTargets& targets,
                   const LossWeighting& weighting) {
  const double r = rate_for(targets, weighting.mode);
  double base = 0.0;
  switch (spec.task) {
    case TaskMode::kShort:
      base = negative_log_likelihood(
          HazardVector(TimeGrid::short_term(), pred.heads.at(0)),
          require_labels(targets.short_labels, "short-grid"));
      break;
    case TaskMode::kLong:
      base = negative_log_likelihood(
          HazardVector(TimeGrid::long_term(), pred.heads.at(0)),
          require_labels(targets.long_labels, "long-grid"));
      break;
    case TaskMode::kOverall:
      base = negative_log_likelihood(
          HazardVector(TimeGrid::overall(), pred.heads.at(0)),
          require_labels(targets.overall_labels, "overall-grid"));
      break;
    case TaskMode::kMultiTask: {
      const double ls = negative_log_likelihood(
          HazardVector(TimeGrid::short_term(), pred.heads.at(0)),
          require_labels(targets.short_labels, "short-grid"));
      const double ll = negative_log_likelihood(
          HazardVector(TimeGrid::long_term(), pred.heads.at(1)),
          require_labels(targets.long_labels, "long-grid"));
      base = mtl_loss(ls, ll, weighting.lambda);
      break;
    }
    case TaskMode::kClassifier:
      base = binary_cross_entropy(pred.heads.at(0).at(0), targets.binary_label);
      break;
    case TaskMode::kRegressor:
      base = squared_error(pred.heads.at(0).at(0), targets.day_target);
      break;
  }
  return weighted_loss(base, r, weighting.mode);
}

double backward(const ModelSpec& spec, const ModelState& state,
                const ModelInput& input, const SampleTargets& targets,
                const LossWeighting& weighting, Gradients& accum) {
  ForwardCache cache;
  const Prediction pred = forward_impl(spec, state, input, &cache);
  const double loss = sample_loss(spec, pred, targets, weighting);

  const double r = rate_for(targets, weighting.mode);
  const double w = weighting.mode == WeightMode::kNone ? 1.0 : r + 1.0;

  const auto names = spec.head_names();
  // Per-head logit gradients. For hazard heads the per-interval derivative is
  // (h - delta) on observed intervals and zero past l' or where the epsilon
  // clamp is active (the clamped loss is locally flat there).
  std::vector<std::vector<double>> du(names.size());
  auto hazard_du = [&](std::size_t head, const EventLabels& y,
                       double head_weight) {
    const auto& out = pred.heads[head];
    std::vector<double> d(out.size(), 0.0);
    for (std::size_t l = 0; l < y.observed_count(); ++l) {
      const double h = out[l];
      if (h <= kProbEps || h >= 1.0 - kProbEps) continue;
      const double delta = y.delta()[l] != 0 ? 1.0 : 0.0;
      d[l] = (h - delta) * head_weight * w;
    }
    du[head] = std::move(d);
  };

  switch (spec.task) {
    case TaskMode::kShort:
      hazard_du(0, *targets.short_labels, 1.0);
      break;
    case TaskMode::kLong:
      hazard_du(0, *targets.long_labels, 1.0);
      break;
    case TaskMode::kOverall:
      hazard_du(0, *targets.overall_labels, 1.0);
      break;
    case TaskMode::kMultiTask:
      hazard_du(0, *targets.short_labels, weighting.lambda);
      hazard_du(1, *targets.long_labels, 1.0 - weighting.lambda);
      break;
    case TaskMode::kClassifier: {
      const double p = pred.heads[0][0];
      double d = 0.0;
      if (p > kProbEps && p < 1.0 - kProbEps) {
        d = (p - targets.binary_label) * w;
      }
      du[0] = {d};
      break;
    }
    case TaskMode::kRegressor:
      du[0] = {2.0 * (pred.heads[0][0] - targets.day_target) * w};
      break;
  }

  const std::vector<double>& a_last =
      spec.trunk.empty() ? cache.input : cache.trunk_act.back();

  // Head layers.
  std::vector<double> da(a_last.size(), 0.0);
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::size_t wi = state.index_of(names[k] + "_w");
    const std::size_t bi = state.index_of(names[k] + "_b");
    const Tensor& wt = state.params[wi].value;
    Tensor& gw = accum.g[wi];
    Tensor& gb = accum.g[bi];
    for (std::size_t row = 0; row < du[k].size(); ++row) {
      const double d = du[k][row];
      if (d == 0.0) continue;
      gb[row] += d;
      for (std::size_t c = 0; c < a_last.size(); ++c) {
        gw.at(row, c) += d * a_last[c];
        da[c] += wt.at(row, c) * d;
      }
    }
  }

  // Trunk, last layer to first.
  for (std::size_t li = spec.trunk.size(); li-- > 0;) {
    const std::vector<double>& z = cache.trunk_pre[li];
    const std::vector<double>& a_prev =
        li == 0 ? cache.input : cache.trunk_act[li - 1];
    const std::size_t wi = state.index_of("trunk_w" + std::to_string(li));
    const std::size_t bi = state.index_of("trunk_b" + std::to_string(li));
    const Tensor& wt = state.params[wi].value;
    Tensor& gw = accum.g[wi];
    Tensor& gb = accum.g[bi];
    std::vector<double> da_prev(a_prev.size(), 0.0);
    for (std::size_t row = 0; row < z.size(); ++row) {
      const double dz = z[row] > 0.0 ? da[row] : 0.0;
      if (dz == 0.0) continue;
      gb[row] += dz;
      for (std::size_t c = 0; c < a_prev.size(); ++c) {
        gw.at(row, c) += dz * a_prev[c];
        da_prev[c] += wt.at(row, c) * dz;
      }
    }
    da = std::move(da_prev);
  }

  // Input blocks: only the genre embedding row and the recurrent encoder have
  // parameters behind them; the rest of the gradient lands on raw data.
  const InputLayout lay = layout_of(spec);
  {
    Tensor& ge = accum.g[state.index_of("genre_embed")];
    for (std::size_t i = 0; i < spec.genre_dim; ++i) {
      ge.at(input.genre_index, i) += da[lay.genre_off + i];
    }
  }
  if (spec.mask.series && !input.series.empty()) {
    const std::size_t gi_wx = state.index_of("rnn_wx");
    const std::size_t gi_wh = state.index_of("rnn_wh");
    const std::size_t gi_b = state.index_of("rnn_b");
    const Tensor& wh = state.params[gi_wh].value;
    std::vector<double> dh(da.begin() + lay.series_off,
                           da.begin() + lay.series_off + spec.rnn_hidden);
    std::vector<double> dpre(spec.rnn_hidden);
    for (std::size_t t = input.series.size(); t-- > 0;) {
      const std::vector<double>& ht = cache.rnn_h[t];
      for (std::size_t j = 0; j < spec.rnn_hidden; ++j) {
        dpre[j] = dh[j] * (1.0 - ht[j] * ht[j]);
        accum.g[gi_b][j] += dpre[j];
        for (std::size_t i = 0; i < spec.rnn_input; ++i) {
          accum.g[gi_wx].at(j, i) += dpre[j] * input.series[t][i];
        }
      }
      if (t > 0) {
        const std::vector<double>& hprev = cache.rnn_h[t - 1];
        for (std::size_t j = 0; j < spec.rnn_hidden; ++j) {
          for (std::size_t i = 0; i < spec.rnn_hidden; ++i) {
            accum.g[gi_wh].at(j, i) += dpre[j] * hprev[i];
          }
        }
      }
      std::vector<double> dh_prev(spec.rnn_hidden, 0.0);
      for (std::size_t j = 0; j < spec.rnn_hidden; ++j) {
        for (std::size_t i = 0; i < spec.rnn_hidden; ++i) {
          dh_prev[i] += wh.at(j, i) * dpre[j];
        }
      }
      dh = std::move(dh_prev);
    }
  }

  return loss;
}

}  // namespace adsurv
