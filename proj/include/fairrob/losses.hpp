#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fairrob/error.hpp"
#include "fairrob/model.hpp"

namespace fairrob {

// Training surrogates plus the evaluation-only zero-one loss. The margin
// losses use m = scores[label] - max over other scores, which reduces to the
// binary Y*f(X) form when C = 2 and f(X) is the score difference.
enum class LossKind { cross_entropy, log_loss, exp_loss, ramp, zero_one };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::log_loss: return "log_loss";
    case LossKind::exp_loss: return "exp_loss";
    case LossKind::ramp: return "ramp";
    case LossKind::zero_one: return "zero_one";
  }
  fail("bad LossKind");
}

inline LossKind loss_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::cross_entropy;
  if (s == "log_loss") return LossKind::log_loss;
  if (s == "exp_loss") return LossKind::exp_loss;
  if (s == "ramp") return LossKind::ramp;
  if (s == "zero_one") return LossKind::zero_one;
  fail("unknown loss '", s, "'");
}

inline bool has_gradient(LossKind k) { return k != LossKind::zero_one; }

namespace detail {

// index of the largest score among j != label, ties toward the lowest index
inline std::size_t best_other(std::span<const double> scores, int label) {
  std::size_t best = (label == 0) ? 1 : 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (static_cast<int>(j) == label) continue;
    if (scores[j] > scores[best]) best = j;
  }
  return best;
}

inline double softplus(double x) {
  // log(1 + e^x) without overflow
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

inline double sample_loss(LossKind kind, std::span<const double> scores, int label) {
  require(label >= 0 && static_cast<std::size_t>(label) < scores.size(),
          "sample_loss: label ", label, " out of range for ", scores.size(), " classes");
  switch (kind) {
    case LossKind::cross_entropy: {
      const auto p = softmax(scores);
      return -std::log(std::max(p[label], 1e-300));
    }
    case LossKind::zero_one:
      return predict(scores) == label ? 0.0 : 1.0;
    default:
      break;
  }
  const double m = scores[label] - scores[detail::best_other(scores, label)];
  switch (kind) {
    case LossKind::log_loss: return detail::softplus(-m);
    case LossKind::exp_loss: return std::exp(-m);
    case LossKind::ramp: return std::min(1.0, std::max(0.0, 1.0 - m));
    default: fail("unreachable");
  }
}

// dLoss/dscores. The ramp subgradient is -1 on the closed band m in [0,1]
// and 0 outside (interior one-sided choice at the kinks).
inline std::vector<double> sample_loss_grad_scores(LossKind kind,
                                                   std::span<const double> scores,
                                                   int label) {
  require(has_gradient(kind), "loss '", to_string(kind), "' is evaluation-only");
  require(label >= 0 && static_cast<std::size_t>(label) < scores.size(),
          "sample_loss_grad_scores: label out of range");
  std::vector<double> g(scores.size(), 0.0);
  if (kind == LossKind::cross_entropy) {
    auto p = softmax(scores);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = p[j];
    g[label] -= 1.0;
    return g;
  }
  const std::size_t other = detail::best_other(scores, label);
  const double m = scores[label] - scores[other];
  double dm = 0.0;
  switch (kind) {
    case LossKind::log_loss: dm = -1.0 / (1.0 + std::exp(m)); break;
    case LossKind::exp_loss: dm = -std::exp(-m); break;
    case LossKind::ramp: dm = (m >= 0.0 && m <= 1.0) ? -1.0 : 0.0; break;
    default: fail("unreachable");
  }
  g[label] = dm;
  g[other] = -dm;
  return g;
}

// Loss + gradients for one sample: the pairing of a model forward/backward
// with a differentiable loss. grad_params matches the flat parameter layout,
// grad_input the input shape.
inline GradientRecord sample_grad(const SmallModel& model, std::span<const double> x,
                                  LossKind kind, int label) {
  const auto cache = forward_cached(model, x);
  const auto dscores = sample_loss_grad_scores(kind, cache.scores, label);
  auto rec = backprop(model, cache, dscores);
  rec.loss_value = sample_loss(kind, cache.scores, label);
  return rec;
}

}  // namespace fairrob
