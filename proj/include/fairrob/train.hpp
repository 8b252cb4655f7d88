#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fairrob/dataset.hpp"
#include "fairrob/error.hpp"
#include "fairrob/model.hpp"
#include "fairrob/objective.hpp"
#include "fairrob/rng.hpp"

namespace fairrob {

// Plain SGD. lr at epoch e is lr / (1 + lr_decay * e). Incomplete trailing
// batches are dropped so every step sees a full batch.
struct TrainConfig {
  double lr = 1e-3;
  double lr_decay = 0.0;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;

  void validate() const {
    require(lr > 0.0, "TrainConfig: lr must be > 0");
    require(lr_decay >= 0.0, "TrainConfig: lr_decay must be >= 0");
    require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
    require(epochs >= 1, "TrainConfig: epochs must be >= 1");
  }
};

struct TrainResult {
  SmallModel model;
  double final_loss = 0.0;
  bool diverged = false;
};

namespace detail {

// Group-aware modes reject batches missing a declared group, so their epoch
// order interleaves groups proportionally (largest-remainder round robin over
// per-group shuffled queues). Deterministic given the rng state.
inline std::vector<std::size_t> epoch_order(const LabeledDataset& ds, bool stratified,
                                            Rng& rng) {
  std::vector<std::size_t> order(ds.n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  if (!stratified) return order;

  std::vector<std::vector<std::size_t>> queues(ds.num_groups);
  for (const std::size_t i : order) queues[ds.groups[i]].push_back(i);
  std::vector<double> share(ds.num_groups), acc(ds.num_groups, 0.0);
  for (int g = 0; g < ds.num_groups; ++g)
    share[g] = static_cast<double>(queues[g].size()) / static_cast<double>(ds.n);
  std::vector<std::size_t> next(ds.num_groups, 0);
  std::vector<std::size_t> out;
  out.reserve(ds.n);
  while (out.size() < ds.n) {
    int best = -1;
    for (int g = 0; g < ds.num_groups; ++g) {
      if (next[g] >= queues[g].size()) continue;
      acc[g] += share[g];
      if (best < 0 || acc[g] > acc[best]) best = g;
    }
    acc[best] -= 1.0;
    out.push_back(queues[best][next[best]++]);
  }
  return out;
}

}  // namespace detail

// Trains a copy of `start`; the input model is untouched.
inline TrainResult sgd_train_from(const SmallModel& start, const LabeledDataset& ds,
                                  LossKind kind, const FairnessConfig& fairness,
                                  const DefenseConfig& defense, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  TrainResult res{start};
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5u));
  const bool stratified = fairness.mode != FairnessMode::none;
  const std::size_t n_batches = ds.n / cfg.batch_size;
  require(n_batches >= 1, "sgd_train: dataset smaller than one batch");

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr / (1.0 + cfg.lr_decay * static_cast<double>(epoch));
    const auto order = detail::epoch_order(ds, stratified, shuffle_rng);
    for (std::size_t b = 0; b < n_batches; ++b) {
      const BatchView batch{&ds,
                            {order.data() + b * cfg.batch_size, cfg.batch_size}};
      const auto obj = batch_objective(res.model, batch, kind, fairness, defense);
      if (!std::isfinite(obj.value)) {
        res.diverged = true;
        res.final_loss = obj.value;
        return res;
      }
      for (std::size_t p = 0; p < res.model.params.size(); ++p)
        res.model.params[p] -= lr * obj.grad_params[p];
    }
  }
  // full-dataset objective at the final parameters
  std::vector<std::size_t> all(ds.n);
  std::iota(all.begin(), all.end(), 0);
  res.final_loss = batch_objective(res.model, {&ds, all}, kind, fairness, defense).value;
  res.diverged = !std::isfinite(res.final_loss);
  return res;
}

inline TrainResult sgd_train(const Architecture& arch, const LabeledDataset& ds,
                             LossKind kind, const FairnessConfig& fairness,
                             const DefenseConfig& defense, const TrainConfig& cfg) {
  return sgd_train_from(init_params(arch, cfg.seed), ds, kind, fairness, defense, cfg);
}

// Decision threshold induced by a binary 1-D linear model: scores cross where
// (w1 - w0) x + (b1 - b0) = 0.
inline double induced_threshold(const SmallModel& model) {
  require(model.arch.input_dim == 1 && model.arch.hidden.empty() &&
              model.arch.num_classes == 2,
          "induced_threshold: needs a 1-D binary linear model");
  const double dw = model.params[1] - model.params[0];
  const double db = model.params[3] - model.params[2];
  require(dw != 0.0, "induced_threshold: degenerate weights");
  return -db / dw;
}

}  // namespace fairrob
