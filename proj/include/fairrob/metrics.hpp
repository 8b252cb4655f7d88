#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrob/attack.hpp"
#include "fairrob/dataset.hpp"
#include "fairrob/error.hpp"
#include "fairrob/model.hpp"

namespace fairrob {

// Empirical estimators of everything the sweeps track. The robust error
// counts a clean miss as adversarial-vulnerable too (the zero perturbation is
// admissible), which makes robust = natural + boundary an exact identity of
// the estimators rather than an approximation.
struct EvalReport {
  double natural_error = 0.0;
  double robust_error = 0.0;
  double boundary_error = 0.0;
  double fairness_violation = 0.0;
  std::map<int, double> per_group_error;
  double avg_margin_proxy = 0.0;
  std::map<int, double> per_group_margin_proxy;

  static std::string csv_header() {
    return "natural_error,robust_error,boundary_error,fairness_violation,"
           "avg_margin_proxy,group0_error,group1_error,group0_margin,group1_margin";
  }

  // First two groups are materialized as csv columns; the JSON form carries
  // every group.
  std::string csv_row() const {
    auto fmt = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    auto at = [](const std::map<int, double>& m, int k) {
      const auto it = m.find(k);
      return it == m.end() ? 0.0 : it->second;
    };
    return fmt(natural_error) + "," + fmt(robust_error) + "," + fmt(boundary_error) +
           "," + fmt(fairness_violation) + "," + fmt(avg_margin_proxy) + "," +
           fmt(at(per_group_error, 0)) + "," + fmt(at(per_group_error, 1)) + "," +
           fmt(at(per_group_margin_proxy, 0)) + "," + fmt(at(per_group_margin_proxy, 1));
  }
};

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json pg = nlohmann::json::object();
  for (const auto& [g, v] : r.per_group_error) pg[std::to_string(g)] = v;
  nlohmann::json pm = nlohmann::json::object();
  for (const auto& [g, v] : r.per_group_margin_proxy) pm[std::to_string(g)] = v;
  return {{"natural_error", r.natural_error},
          {"robust_error", r.robust_error},
          {"boundary_error", r.boundary_error},
          {"fairness_violation", r.fairness_violation},
          {"per_group_error", pg},
          {"avg_margin_proxy", r.avg_margin_proxy},
          {"per_group_margin_proxy", pm}};
}

// max over groups of |group error - overall error|
inline double fairness_violation(const std::map<int, double>& per_group_error,
                                 double overall_error) {
  double worst = 0.0;
  for (const auto& [g, err] : per_group_error)
    worst = std::max(worst, std::abs(err - overall_error));
  return worst;
}

// Full evaluation pass: clean predictions, adversarial predictions under cfg,
// margin proxy (top softmax minus runner-up on clean inputs), per-group stats.
inline EvalReport evaluate(const SmallModel& model, const LabeledDataset& ds,
                           const AttackConfig& cfg) {
  ds.validate();
  std::map<int, std::size_t> group_count;
  std::map<int, std::size_t> group_wrong;
  std::map<int, double> group_margin;
  std::size_t n_wrong = 0, n_boundary = 0;
  double margin_sum = 0.0;

  for (std::size_t i = 0; i < ds.n; ++i) {
    const auto x = ds.row(i);
    const auto scores = forward(model, x);
    const int pred = predict(scores);
    const bool clean_ok = pred == ds.labels[i];

    const auto probs = softmax(scores);
    double top = -1.0, second = -1.0;
    for (double p : probs) {
      if (p > top) {
        second = top;
        top = p;
      } else if (p > second) {
        second = p;
      }
    }
    const double margin = top - second;

    AttackConfig per = cfg;
    per.seed = mix_seed(cfg.seed, i);
    const auto x_adv = attack(model, x, ds.labels[i], per);
    const bool adv_ok = predict(forward(model, x_adv)) == ds.labels[i];

    const int g = ds.groups[i];
    group_count[g] += 1;
    group_margin[g] += margin;
    margin_sum += margin;
    if (!clean_ok) {
      n_wrong += 1;
      group_wrong[g] += 1;
    } else if (!adv_ok) {
      n_boundary += 1;
    }
  }
  for (int g = 0; g < ds.num_groups; ++g)
    require(group_count.count(g) > 0, "evaluate: group ", g, " has no samples");

  EvalReport rep;
  const double n = static_cast<double>(ds.n);
  rep.natural_error = static_cast<double>(n_wrong) / n;
  rep.boundary_error = static_cast<double>(n_boundary) / n;
  rep.robust_error = rep.natural_error + rep.boundary_error;
  rep.avg_margin_proxy = margin_sum / n;
  for (const auto& [g, cnt] : group_count) {
    rep.per_group_error[g] =
        static_cast<double>(group_wrong.count(g) ? group_wrong[g] : 0) /
        static_cast<double>(cnt);
    rep.per_group_margin_proxy[g] = group_margin[g] / static_cast<double>(cnt);
  }
  rep.fairness_violation = fairness_violation(rep.per_group_error, rep.natural_error);
  return rep;
}

}  // namespace fairrob
