#include <gtest/gtest.h>

#include <cmath>

#include "fairrob/metrics.hpp"
#include "fairrob/mixture.hpp"

namespace {

using namespace fairrob;

SmallModel threshold_model(double theta) {
  return SmallModel(Architecture(1, {}, Activation::tanh_, 2), {-1.0, 1.0, theta, -theta});
}

AttackConfig wide_pgd(double eps, std::uint64_t seed = 0) {
  AttackConfig cfg;
  cfg.method = AttackMethod::pgd;
  cfg.norm_order = NormOrder::linf;
  cfg.epsilon = eps;
  cfg.steps = 5;
  cfg.random_start = false;
  cfg.seed = seed;
  cfg.clip_lo = -1e30;
  cfg.clip_hi = 1e30;
  return cfg;
}

TEST(Evaluate, ZeroEpsilonIdentity) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 5), 2000, 1));
  const auto model = threshold_model(0.0);
  const auto rep = evaluate(model, ds, wide_pgd(0.0));
  EXPECT_DOUBLE_EQ(rep.boundary_error, 0.0);
  EXPECT_DOUBLE_EQ(rep.robust_error, rep.natural_error);
}

TEST(Evaluate, PerfectSeparableModelAllZero) {
  // two tight clusters far apart, threshold in the middle, eps below the gap
  LabeledDataset ds;
  ds.n = 40;
  ds.dim = 1;
  ds.num_classes = 2;
  ds.num_groups = 2;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    ds.features.push_back(label == 0 ? -2.0 - 0.01 * i : 2.0 + 0.01 * i);
    ds.labels.push_back(label);
    ds.groups.push_back(label);
  }
  const auto model = threshold_model(0.0);
  const auto rep = evaluate(model, ds, wide_pgd(0.5));
  EXPECT_DOUBLE_EQ(rep.natural_error, 0.0);
  EXPECT_DOUBLE_EQ(rep.boundary_error, 0.0);
  EXPECT_DOUBLE_EQ(rep.robust_error, 0.0);
  EXPECT_DOUBLE_EQ(rep.fairness_violation, 0.0);
}

TEST(Evaluate, DecompositionIdentityExact) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 3), 3000, 9));
  const auto model = threshold_model(0.2);
  for (double eps : {0.05, 0.1, 0.3}) {
    const auto rep = evaluate(model, ds, wide_pgd(eps, 3));
    EXPECT_DOUBLE_EQ(rep.robust_error, rep.natural_error + rep.boundary_error);
  }
}

TEST(Evaluate, GroupReconstructionAndViolation) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 5), 5000, 4));
  const auto model = threshold_model(0.4);
  const auto rep = evaluate(model, ds, wide_pgd(0.1, 1));
  // per-group errors weighted by frequency reconstruct the overall error
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < ds.n; ++i) counts[ds.groups[i]] += 1;
  double recon = 0.0;
  for (const auto& [g, err] : rep.per_group_error)
    recon += err * static_cast<double>(counts[g]) / static_cast<double>(ds.n);
  EXPECT_NEAR(recon, rep.natural_error, 1e-12);

  double expected = 0.0;
  for (const auto& [g, err] : rep.per_group_error)
    expected = std::max(expected, std::abs(err - rep.natural_error));
  EXPECT_DOUBLE_EQ(rep.fairness_violation, expected);
}

TEST(FairnessViolation, Arithmetic) {
  EXPECT_DOUBLE_EQ(fairness_violation({{0, 0.2}, {1, 0.6}}, 0.4), 0.2);
  EXPECT_DOUBLE_EQ(fairness_violation({{0, 0.3}, {1, 0.3}}, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(fairness_violation({{0, 0.25}}, 0.25), 0.0);
}

TEST(Evaluate, MarginProxyShiftInvariant) {
  // adding a constant to both biases shifts all logits, leaving the proxy
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 3), 500, 6));
  SmallModel a(Architecture(1, {}, Activation::tanh_, 2), {-1.0, 1.0, 0.1, -0.1});
  SmallModel b(Architecture(1, {}, Activation::tanh_, 2), {-1.0, 1.0, 7.1, 6.9});
  const auto ra = evaluate(a, ds, wide_pgd(0.0));
  const auto rb = evaluate(b, ds, wide_pgd(0.0));
  EXPECT_NEAR(ra.avg_margin_proxy, rb.avg_margin_proxy, 1e-12);
  EXPECT_DOUBLE_EQ(ra.natural_error, rb.natural_error);
}

TEST(Evaluate, MatchesMixtureTheoryOnLargeSample) {
  const GaussianMixtureSpec spec(-1, 1, 5);
  const auto ds = sample_mixture(MixtureSampleConfig(spec, 100000, 12));
  const double theta = 0.3, eps = 0.1;
  const auto model = threshold_model(theta);
  const auto rep = evaluate(model, ds, wide_pgd(eps, 8));

  const double nat = mixture::natural_error(spec, {theta});
  const double rob = mixture::robust_error(spec, {theta}, TheoryBudget(eps));
  const double bdy = mixture::boundary_error(spec, {theta}, TheoryBudget(eps));
  auto se = [&](double p) { return std::sqrt(p * (1 - p) / static_cast<double>(ds.n)); };
  EXPECT_NEAR(rep.natural_error, nat, 4 * se(nat));
  EXPECT_NEAR(rep.robust_error, rob, 4 * se(rob));
  EXPECT_NEAR(rep.boundary_error, bdy, 4 * se(bdy));
}

TEST(Evaluate, CsvAndJsonShape) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 3), 200, 2));
  const auto rep = evaluate(threshold_model(0.0), ds, wide_pgd(0.05));
  const auto row = rep.csv_row();
  // documented column order: 9 columns
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 8);
  const auto j = to_json(rep);
  EXPECT_TRUE(j.contains("natural_error"));
  EXPECT_TRUE(j.contains("per_group_error"));
  EXPECT_DOUBLE_EQ(j["robust_error"].get<double>(),
                   j["natural_error"].get<double>() + j["boundary_error"].get<double>());
}

TEST(Evaluate, EmptyGroupRejected) {
  LabeledDataset ds;
  ds.n = 2;
  ds.dim = 1;
  ds.num_classes = 2;
  ds.num_groups = 2;
  ds.features = {-1.0, -2.0};
  ds.labels = {0, 0};
  ds.groups = {0, 0};  // group 1 declared but absent
  EXPECT_THROW(evaluate(threshold_model(0.0), ds, wide_pgd(0.0)), Error);
}

}  // namespace
