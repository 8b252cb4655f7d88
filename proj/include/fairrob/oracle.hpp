#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

#include "fairrob/error.hpp"
#include "fairrob/mixture_types.hpp"
#include "fairrob/rng.hpp"

// Brute-force numerical machinery used to validate the closed forms of the
// theory module. Nothing here may call into mixture.hpp: agreement tests are
// only meaningful if the two sides share no code beyond the domain types.

namespace fairrob::oracle {

struct GridSpec {
  double lo;
  double hi;
  double step;

  GridSpec(double l, double h, double s) : lo(l), hi(h), step(s) {
    require(lo < hi, "GridSpec: lo must be < hi");
    require(step > 0.0, "GridSpec: step must be > 0");
    require((hi - lo) / step <= 1e8, "GridSpec: more than 1e8 grid points");
  }

  std::size_t count() const {
    return static_cast<std::size_t>(std::floor((hi - lo) / step)) + 1;
  }
  double point(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct QuadratureConfig {
  double abs_tol = 1e-12;
  int max_subdivisions = 60;

  QuadratureConfig(double tol = 1e-12, int max_sub = 60)
      : abs_tol(tol), max_subdivisions(max_sub) {
    require(abs_tol >= 1e-14, "QuadratureConfig: abs_tol must be >= 1e-14");
    require(max_subdivisions > 0, "QuadratureConfig: max_subdivisions must be positive");
  }
};

namespace detail {

inline double gauss_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Adaptive Simpson on [a,b] with error sharing across halves.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  require(depth < max_depth, "adaptive quadrature: subdivision limit exceeded on [",
          a, ", ", b, "]");
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

template <typename F>
double integrate(const F& f, double a, double b, const QuadratureConfig& quad) {
  if (a >= b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, quad.abs_tol, 0,
                          quad.max_subdivisions);
}

}  // namespace detail

// Pr(lo < X <= hi) for X ~ N(mu, sigma^2) by adaptive quadrature of the
// density. Infinite endpoints are truncated at mu +- 40*sigma, where the
// omitted mass is far below any representable tolerance.
inline double integrate_gaussian_event(double mu, double sigma, double lo, double hi,
                                       const QuadratureConfig& quad = {}) {
  require(sigma > 0.0, "integrate_gaussian_event: sigma must be > 0, got ", sigma);
  require(lo <= hi, "integrate_gaussian_event: lo must be <= hi");
  const double cut = 40.0 * sigma;
  double a = std::isinf(lo) ? mu - cut : lo;
  double b = std::isinf(hi) ? mu + cut : hi;
  a = std::max(a, mu - cut);
  b = std::min(b, mu + cut);
  if (a >= b) return (b <= mu - cut) ? 0.0 : (a >= mu + cut ? 0.0 : 0.0);
  return detail::integrate([&](double x) { return detail::gauss_density(x, mu, sigma); },
                           a, b, quad);
}

// Minimum of `objective` over the grid; first minimum wins on ties.
inline std::pair<double, double> grid_minimize(const std::function<double(double)>& objective,
                                               const GridSpec& grid) {
  double best_arg = grid.lo;
  double best_val = std::numeric_limits<double>::infinity();
  const std::size_t n = grid.count();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.point(i);
    const double v = objective(x);
    require(!std::isnan(v), "grid_minimize: objective is NaN at grid point ", x);
    if (v < best_val) {
      best_val = v;
      best_arg = x;
    }
  }
  return {best_arg, best_val};
}

// Root of f on [lo, hi] by bisection; requires a sign change.
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-13) {
  double flo = f(lo), fhi = f(hi);
  require(flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0),
          "bisect_root: no sign change on [", lo, ", ", hi, "]");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Monte Carlo estimate of the robust error of a threshold classifier.
// In 1-D the inner maximization is exact: the worst admissible perturbation
// shifts the sample toward the threshold, so a draw counts iff it lies within
// epsilon of the wrong side. Supports arbitrary priors (the closed forms do
// not), which is what makes the balanced-prior restriction testable.
inline std::pair<double, double> monte_carlo_error(const GaussianMixtureSpec& spec,
                                                   const ThresholdClassifier& clf,
                                                   const TheoryBudget& budget,
                                                   std::int64_t n_samples,
                                                   std::uint64_t seed) {
  require(n_samples >= 1000, "monte_carlo_error: n_samples must be >= 1000");
  Rng rng(seed);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const bool plus = rng.uniform() < spec.prior_plus;
    const double z = rng.normal();
    if (plus) {
      const double x = spec.mu_plus + spec.k_ratio * z;
      // label +1 is robust iff even x - eps stays strictly above theta
      if (x - budget.epsilon <= clf.theta) ++hits;
    } else {
      const double x = spec.mu_minus + z;
      if (x + budget.epsilon > clf.theta) ++hits;
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  return {p, se};
}

}  // namespace fairrob::oracle
