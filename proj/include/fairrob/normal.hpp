#pragma once

#include <cmath>
#include <numbers>

namespace fairrob {

// Standard normal density.
inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Standard normal CDF via the complementary error function.
// erfc keeps full relative precision in the tails, so the absolute error
// stays below 1e-15 everywhere; every functional in the theory module
// inherits this accuracy.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// E|Z - c| for Z ~ N(mu, sigma^2): sigma * (z(2*Phi(z)-1) + 2*phi(z)),
// z = (c - mu)/sigma.
inline double normal_mean_abs_dev(double mu, double sigma, double c) {
  const double z = (c - mu) / sigma;
  return sigma * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z));
}

}  // namespace fairrob
