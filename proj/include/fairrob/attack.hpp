#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairrob/error.hpp"
#include "fairrob/losses.hpp"
#include "fairrob/model.hpp"
#include "fairrob/rng.hpp"

namespace fairrob {

enum class AttackMethod { rfgsm, pgd };
enum class NormOrder { linf, l2 };

inline std::string to_string(AttackMethod m) { return m == AttackMethod::rfgsm ? "rfgsm" : "pgd"; }
inline std::string to_string(NormOrder p) { return p == NormOrder::linf ? "inf" : "2"; }

inline AttackMethod attack_method_from_string(const std::string& s) {
  if (s == "rfgsm") return AttackMethod::rfgsm;
  if (s == "pgd") return AttackMethod::pgd;
  fail("unknown attack method '", s, "'");
}

inline NormOrder norm_from_string(const std::string& s) {
  if (s == "inf" || s == "linf") return NormOrder::linf;
  if (s == "2" || s == "l2") return NormOrder::l2;
  fail("unknown norm order '", s, "'");
}

struct AttackConfig {
  AttackMethod method = AttackMethod::pgd;
  NormOrder norm_order = NormOrder::linf;
  double epsilon = 0.0;
  double step_size = 0.0;  // 0 picks the default for the method
  int steps = 10;
  bool random_start = true;
  std::uint64_t seed = 0;
  double clip_lo = 0.0;
  double clip_hi = 1.0;

  void validate() const {
    require(clip_lo < clip_hi, "AttackConfig: clip_lo must be < clip_hi");
    require(epsilon >= 0.0, "AttackConfig: epsilon must be >= 0");
    require(steps >= 1, "AttackConfig: steps must be >= 1");
  }

  // rfgsm: random-step magnitude eps/2; pgd: 2.5 * eps / steps
  double effective_step() const {
    if (step_size > 0.0) return step_size;
    return method == AttackMethod::rfgsm ? 0.5 * epsilon
                                         : 2.5 * epsilon / static_cast<double>(steps);
  }
};

namespace detail {

inline void clip_box(std::vector<double>& x, double lo, double hi) {
  for (auto& v : x) v = std::clamp(v, lo, hi);
}

// project x onto the eps-ball around origin_x
inline void project_ball(std::vector<double>& x, std::span<const double> origin,
                         NormOrder norm, double eps) {
  if (norm == NormOrder::linf) {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::clamp(x[i], origin[i] - eps, origin[i] + eps);
  } else {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - origin[i];
      d2 += d * d;
    }
    const double dist = std::sqrt(d2);
    if (dist > eps) {
      const double scale = eps / dist;
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = origin[i] + (x[i] - origin[i]) * scale;
    }
  }
}

// loss-ascent direction at x: sign of the cross-entropy input gradient for
// linf, the normalized gradient for l2. Zero gradient gives a zero direction.
inline std::vector<double> ascent_direction(const SmallModel& model,
                                            std::span<const double> x, int label,
                                            NormOrder norm) {
  const auto rec = sample_grad(model, x, LossKind::cross_entropy, label);
  std::vector<double> dir(rec.grad_input.size(), 0.0);
  if (norm == NormOrder::linf) {
    for (std::size_t i = 0; i < dir.size(); ++i) {
      if (rec.grad_input[i] > 0.0) dir[i] = 1.0;
      else if (rec.grad_input[i] < 0.0) dir[i] = -1.0;
    }
  } else {
    double n2 = 0.0;
    for (double g : rec.grad_input) n2 += g * g;
    if (n2 > 0.0) {
      const double inv = 1.0 / std::sqrt(n2);
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = rec.grad_input[i] * inv;
    }
  }
  return dir;
}

// uniform direction of unit norm (sign vector for linf, sphere for l2)
inline std::vector<double> random_direction(Rng& rng, std::size_t d, NormOrder norm) {
  std::vector<double> dir(d);
  if (norm == NormOrder::linf) {
    for (auto& v : dir) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
  } else {
    double n2 = 0.0;
    for (auto& v : dir) {
      v = rng.normal();
      n2 += v * v;
    }
    if (n2 > 0.0) {
      const double inv = 1.0 / std::sqrt(n2);
      for (auto& v : dir) v *= inv;
    }
  }
  return dir;
}

}  // namespace detail

// Single-sample adversarial example. Deterministic given cfg.seed; the result
// always satisfies ||x_adv - x||_p <= epsilon and the clip box.
inline std::vector<double> attack(const SmallModel& model, std::span<const double> x,
                                  int label, const AttackConfig& cfg) {
  cfg.validate();
  std::vector<double> x_adv(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return x_adv;

  Rng rng(cfg.seed);
  if (cfg.method == AttackMethod::rfgsm) {
    // random step of magnitude alpha_r, then one gradient step with the
    // remaining budget, then projection
    const double alpha_r = std::min(cfg.effective_step(), cfg.epsilon);
    const auto noise = detail::random_direction(rng, x_adv.size(), cfg.norm_order);
    for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += alpha_r * noise[i];
    detail::clip_box(x_adv, cfg.clip_lo, cfg.clip_hi);
    const auto dir = detail::ascent_direction(model, x_adv, label, cfg.norm_order);
    const double grad_step = cfg.epsilon - alpha_r;
    for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += grad_step * dir[i];
    detail::project_ball(x_adv, x, cfg.norm_order, cfg.epsilon);
    detail::clip_box(x_adv, cfg.clip_lo, cfg.clip_hi);
    return x_adv;
  }

  // pgd
  if (cfg.random_start) {
    if (cfg.norm_order == NormOrder::linf) {
      for (auto& v : x_adv) v += rng.uniform(-cfg.epsilon, cfg.epsilon);
    } else {
      const auto noise = detail::random_direction(rng, x_adv.size(), cfg.norm_order);
      const double r =
          cfg.epsilon * std::pow(rng.uniform(), 1.0 / static_cast<double>(x_adv.size()));
      for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += r * noise[i];
    }
    detail::project_ball(x_adv, x, cfg.norm_order, cfg.epsilon);
    detail::clip_box(x_adv, cfg.clip_lo, cfg.clip_hi);
  }
  const double step = cfg.effective_step();
  for (int it = 0; it < cfg.steps; ++it) {
    const auto dir = detail::ascent_direction(model, x_adv, label, cfg.norm_order);
    for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += step * dir[i];
    detail::project_ball(x_adv, x, cfg.norm_order, cfg.epsilon);
    detail::clip_box(x_adv, cfg.clip_lo, cfg.clip_hi);
  }
  return x_adv;
}

// Batch form with per-sample seeds derived from (cfg.seed, index), so the
// result is independent of evaluation order.
inline std::vector<std::vector<double>> batch_attack(const SmallModel& model,
                                                     const std::vector<std::span<const double>>& xs,
                                                     const std::vector<int>& labels,
                                                     const AttackConfig& cfg) {
  require(xs.size() == labels.size(), "batch_attack: size mismatch");
  std::vector<std::vector<double>> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    AttackConfig per = cfg;
    per.seed = mix_seed(cfg.seed, i);
    out[i] = attack(model, xs[i], labels[i], per);
  }
  return out;
}

}  // namespace fairrob
