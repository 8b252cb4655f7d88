#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairrob/attack.hpp"
#include "fairrob/dataset.hpp"
#include "fairrob/error.hpp"
#include "fairrob/losses.hpp"
#include "fairrob/model.hpp"

namespace fairrob {

enum class FairnessMode { none, penalty, group_q };

inline std::string to_string(FairnessMode m) {
  switch (m) {
    case FairnessMode::none: return "none";
    case FairnessMode::penalty: return "penalty";
    case FairnessMode::group_q: return "group_q";
  }
  fail("bad FairnessMode");
}

inline FairnessMode fairness_mode_from_string(const std::string& s) {
  if (s == "none") return FairnessMode::none;
  if (s == "penalty") return FairnessMode::penalty;
  if (s == "group_q") return FairnessMode::group_q;
  fail("unknown fairness mode '", s, "'");
}

struct FairnessConfig {
  FairnessMode mode = FairnessMode::none;
  double lambda = 0.0;        // penalty weight
  double q = 0.0;             // group_q exponent
  double alpha_target = 0.0;  // reported accuracy-parity tolerance
  // penalty over a single group's term instead of the sum over all groups
  // (the joint objective's display names one group; -1 keeps the sum)
  int penalty_group = -1;

  void validate() const {
    require(lambda >= 0.0, "FairnessConfig: lambda must be >= 0");
    require(q >= 0.0, "FairnessConfig: q must be >= 0");
    require(alpha_target >= 0.0, "FairnessConfig: alpha_target must be >= 0");
  }
};

struct DefenseConfig {
  double epsilon_star = 0.0;  // 0 disables the adversarial inner loop
  NormOrder norm_order = NormOrder::linf;
  int pgd_steps = 7;
  double pgd_step_size = 0.0;  // 0 picks 2.5 * eps* / steps
  double clip_lo = -1e30;
  double clip_hi = 1e30;

  void validate() const {
    require(epsilon_star >= 0.0, "DefenseConfig: epsilon_star must be >= 0");
    require(pgd_steps >= 1, "DefenseConfig: pgd_steps must be >= 1");
    require(pgd_step_size >= 0.0, "DefenseConfig: pgd_step_size must be >= 0");
  }
};

// Slice of a dataset by row indices; the batch view the trainer feeds here.
struct BatchView {
  const LabeledDataset* data;
  std::span<const std::size_t> rows;
};

struct BatchObjective {
  double value = 0.0;
  std::vector<double> grad_params;
};

// The training objective over one batch.
//   none:    mean sample loss.
//   penalty: mean loss + lambda * sum_a |L(D_a) - L(D)|, subgradient 0 at the
//            kink.
//   group_q: sum_a L(D_a)^(q+1) / (q+1).
// With epsilon_star > 0 every sample is first replaced by its PGD adversarial
// counterpart (no random start, hence deterministic); the fairness penalty is
// evaluated on the clean samples. Gradients treat x_adv as a constant.
inline BatchObjective batch_objective(const SmallModel& model, const BatchView& batch,
                                      LossKind kind, const FairnessConfig& fairness,
                                      const DefenseConfig& defense) {
  fairness.validate();
  defense.validate();
  require(has_gradient(kind), "batch_objective: loss '", to_string(kind),
          "' is evaluation-only");
  require(!batch.rows.empty(), "batch_objective: empty batch");
  const auto& ds = *batch.data;
  const std::size_t np = model.params.size();

  const bool adversarial = defense.epsilon_star > 0.0;
  AttackConfig inner;
  if (adversarial) {
    inner.method = AttackMethod::pgd;
    inner.norm_order = defense.norm_order;
    inner.epsilon = defense.epsilon_star;
    inner.steps = defense.pgd_steps;
    inner.step_size = defense.pgd_step_size;
    inner.random_start = false;
    inner.clip_lo = defense.clip_lo;
    inner.clip_hi = defense.clip_hi;
  }

  // per-group accumulators over the main (possibly adversarial) term
  struct Acc {
    double loss = 0.0;
    std::vector<double> grad;
    std::size_t count = 0;
  };
  std::map<int, Acc> group_acc;
  // clean-sample group losses for the penalty term of the joint objective
  std::map<int, double> clean_group_loss;
  std::map<int, std::vector<double>> clean_group_grad;

  for (const std::size_t i : batch.rows) {
    const int g = ds.groups[i];
    auto& acc = group_acc[g];
    if (acc.grad.empty()) acc.grad.assign(np, 0.0);

    const auto x = ds.row(i);
    GradientRecord rec;
    if (adversarial) {
      const auto x_adv = attack(model, x, ds.labels[i], inner);
      rec = sample_grad(model, x_adv, kind, ds.labels[i]);
      if (fairness.mode == FairnessMode::penalty) {
        auto crec = sample_grad(model, x, kind, ds.labels[i]);
        clean_group_loss[g] += crec.loss_value;
        auto& cg = clean_group_grad[g];
        if (cg.empty()) cg.assign(np, 0.0);
        for (std::size_t p = 0; p < np; ++p) cg[p] += crec.grad_params[p];
      }
    } else {
      rec = sample_grad(model, x, kind, ds.labels[i]);
    }
    acc.loss += rec.loss_value;
    for (std::size_t p = 0; p < np; ++p) acc.grad[p] += rec.grad_params[p];
    acc.count += 1;
  }

  // every declared group must appear in the batch
  for (int g = 0; g < ds.num_groups; ++g)
    require(group_acc.count(g) > 0, "batch_objective: group ", g, " has no samples in batch");

  const double n = static_cast<double>(batch.rows.size());
  BatchObjective out;
  out.grad_params.assign(np, 0.0);

  if (fairness.mode == FairnessMode::group_q) {
    // sum_a L_a^(q+1) / (q+1); gradient sum_a L_a^q * dL_a
    for (const auto& [g, acc] : group_acc) {
      const double la = acc.loss / static_cast<double>(acc.count);
      const double w = std::pow(la, fairness.q);
      out.value += std::pow(la, fairness.q + 1.0) / (fairness.q + 1.0);
      for (std::size_t p = 0; p < np; ++p)
        out.grad_params[p] += w * acc.grad[p] / static_cast<double>(acc.count);
    }
    return out;
  }

  // mean term
  double mean_loss = 0.0;
  std::vector<double> mean_grad(np, 0.0);
  for (const auto& [g, acc] : group_acc) {
    mean_loss += acc.loss;
    for (std::size_t p = 0; p < np; ++p) mean_grad[p] += acc.grad[p];
  }
  mean_loss /= n;
  for (auto& v : mean_grad) v /= n;
  out.value = mean_loss;
  out.grad_params = mean_grad;
  if (fairness.mode == FairnessMode::none || fairness.lambda == 0.0) return out;

  // penalty term on clean samples when the main term is adversarial
  double pen_mean_loss = mean_loss;
  const std::vector<double>* pen_mean_grad = &mean_grad;
  std::vector<double> clean_mean_grad;
  std::map<int, Acc> clean_acc;
  const std::map<int, Acc>* pen_groups = &group_acc;
  if (adversarial) {
    double cl = 0.0;
    clean_mean_grad.assign(np, 0.0);
    for (auto& [g, acc] : group_acc) {
      Acc c;
      c.loss = clean_group_loss[g];
      c.grad = clean_group_grad[g];
      c.count = acc.count;
      cl += c.loss;
      for (std::size_t p = 0; p < np; ++p) clean_mean_grad[p] += c.grad[p];
      clean_acc.emplace(g, std::move(c));
    }
    pen_mean_loss = cl / n;
    for (auto& v : clean_mean_grad) v /= n;
    pen_mean_grad = &clean_mean_grad;
    pen_groups = &clean_acc;
  }

  for (const auto& [g, acc] : *pen_groups) {
    if (fairness.penalty_group >= 0 && g != fairness.penalty_group) continue;
    const double cnt = static_cast<double>(acc.count);
    const double la = acc.loss / cnt;
    const double diff = la - pen_mean_loss;
    out.value += fairness.lambda * std::abs(diff);
    const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    if (sgn == 0.0) continue;
    for (std::size_t p = 0; p < np; ++p) {
      out.grad_params[p] +=
          fairness.lambda * sgn * (acc.grad[p] / cnt - (*pen_mean_grad)[p]);
    }
  }
  return out;
}

}  // namespace fairrob
