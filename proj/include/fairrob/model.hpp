#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairrob/error.hpp"
#include "fairrob/rng.hpp"

namespace fairrob {

enum class Activation { relu, tanh_ };

inline std::string to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh_;
  fail("unknown activation '", s, "' (expected relu or tanh)");
}

// Layer-width descriptor for the two supported families: linear (no hidden
// layers) and MLPs with up to three hidden layers.
struct Architecture {
  std::size_t input_dim;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::tanh_;
  std::size_t num_classes = 2;

  Architecture(std::size_t in, std::vector<std::size_t> h, Activation act,
               std::size_t classes)
      : input_dim(in), hidden(std::move(h)), activation(act), num_classes(classes) {
    require(input_dim >= 1, "Architecture: input_dim must be >= 1");
    require(num_classes >= 2, "Architecture: num_classes must be >= 2");
    require(hidden.size() <= 3, "Architecture: at most 3 hidden layers, got ",
            hidden.size());
    for (auto w : hidden) require(w >= 1, "Architecture: hidden width must be >= 1");
  }

  std::size_t num_layers() const { return hidden.size() + 1; }

  std::size_t layer_in(std::size_t l) const { return l == 0 ? input_dim : hidden[l - 1]; }
  std::size_t layer_out(std::size_t l) const {
    return l == hidden.size() ? num_classes : hidden[l];
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < num_layers(); ++l)
      n += layer_out(l) * (layer_in(l) + 1);
    return n;
  }
};

// Flat-parameter feedforward classifier. Layout per layer: weight matrix
// (out x in, row-major) followed by the bias vector.
struct SmallModel {
  Architecture arch;
  std::vector<double> params;

  SmallModel(Architecture a, std::vector<double> p) : arch(std::move(a)), params(std::move(p)) {
    require(params.size() == arch.param_count(), "SmallModel: parameter count ",
            params.size(), " != architecture-implied ", arch.param_count());
  }

  std::size_t weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l)
      off += arch.layer_out(l) * (arch.layer_in(l) + 1);
    return off;
  }
};

// Scaled uniform init, scale 1/sqrt(fan_in); bit-identical per seed.
inline SmallModel init_params(const Architecture& arch, std::uint64_t seed) {
  std::vector<double> params(arch.param_count());
  Rng rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(arch.layer_in(l)));
    const std::size_t count = arch.layer_out(l) * (arch.layer_in(l) + 1);
    for (std::size_t i = 0; i < count; ++i) params[off + i] = rng.uniform(-scale, scale);
    off += count;
  }
  return SmallModel(arch, std::move(params));
}

namespace detail {

inline double activate(Activation a, double x) {
  return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// derivative in terms of the pre-activation value
inline double activate_grad(Activation a, double pre) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

}  // namespace detail

// Per-layer pre-activations kept for the backward pass.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<double> scores;
};

inline ForwardCache forward_cached(const SmallModel& model, std::span<const double> x) {
  const auto& arch = model.arch;
  require(x.size() == arch.input_dim, "forward: input size ", x.size(),
          " != input_dim ", arch.input_dim);
  ForwardCache cache;
  std::vector<double> cur(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t in = arch.layer_in(l), out = arch.layer_out(l);
    cache.inputs.push_back(cur);
    std::vector<double> next(out);
    const double* w = model.params.data() + off;
    const double* b = w + out * in;
    for (std::size_t r = 0; r < out; ++r) {
      double s = b[r];
      const double* wr = w + r * in;
      for (std::size_t c = 0; c < in; ++c) s += wr[c] * cur[c];
      next[r] = s;
    }
    cache.pre.push_back(next);
    if (l + 1 < arch.num_layers())
      for (auto& v : next) v = detail::activate(arch.activation, v);
    cur = std::move(next);
    off += out * (in + 1);
  }
  cache.scores = cur;
  return cache;
}

inline std::vector<double> forward(const SmallModel& model, std::span<const double> x) {
  return forward_cached(model, x).scores;
}

// argmax with ties broken toward the lowest class index
inline int predict(std::span<const double> scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  return best;
}

// max-shifted softmax
inline std::vector<double> softmax(std::span<const double> scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - m);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

struct GradientRecord {
  double loss_value = 0.0;
  std::vector<double> grad_params;
  std::vector<double> grad_input;
};

// Reverse pass from dL/dscores; fills grad_params and grad_input.
inline GradientRecord backprop(const SmallModel& model, const ForwardCache& cache,
                               std::span<const double> dscores) {
  const auto& arch = model.arch;
  require(dscores.size() == arch.num_classes, "backprop: dscores size mismatch");
  GradientRecord rec;
  rec.grad_params.assign(model.params.size(), 0.0);
  std::vector<double> delta(dscores.begin(), dscores.end());
  for (std::size_t l = arch.num_layers(); l-- > 0;) {
    const std::size_t in = arch.layer_in(l), out = arch.layer_out(l);
    const std::size_t off = model.weight_offset(l);
    if (l + 1 < arch.num_layers()) {
      // delta currently holds dL/d(activation); fold in the activation grad
      for (std::size_t r = 0; r < out; ++r)
        delta[r] *= detail::activate_grad(arch.activation, cache.pre[l][r]);
    }
    const double* w = model.params.data() + off;
    double* gw = rec.grad_params.data() + off;
    double* gb = gw + out * in;
    const auto& input = cache.inputs[l];
    std::vector<double> dinput(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      gb[r] += delta[r];
      const double* wr = w + r * in;
      double* gwr = gw + r * in;
      for (std::size_t c = 0; c < in; ++c) {
        gwr[c] += delta[r] * input[c];
        dinput[c] += delta[r] * wr[c];
      }
    }
    delta = std::move(dinput);
  }
  rec.grad_input = std::move(delta);
  return rec;
}

}  // namespace fairrob
