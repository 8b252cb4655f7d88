#pragma once

#include "fairrob/error.hpp"

namespace fairrob {

// Two-component univariate population model: class -1 ~ N(mu_minus, 1),
// class +1 ~ N(mu_plus, k_ratio^2), Pr(Y=+1) = prior_plus.
struct GaussianMixtureSpec {
  double mu_minus;
  double mu_plus;
  double k_ratio;
  double prior_plus = 0.5;

  GaussianMixtureSpec(double mu_m, double mu_p, double k, double prior = 0.5)
      : mu_minus(mu_m), mu_plus(mu_p), k_ratio(k), prior_plus(prior) {
    require(mu_minus < mu_plus, "GaussianMixtureSpec: mu_minus (", mu_minus,
            ") must be < mu_plus (", mu_plus, ")");
    require(k_ratio > 1.0, "GaussianMixtureSpec: k_ratio must be > 1, got ", k_ratio);
    require(prior_plus >= 0.0 && prior_plus <= 1.0,
            "GaussianMixtureSpec: prior_plus must be in [0,1], got ", prior_plus);
  }

  double gap() const { return mu_plus - mu_minus; }
  bool balanced() const { return prior_plus == 0.5; }
};

// Decision threshold; predicts +1 iff X > theta (ties go to -1).
struct ThresholdClassifier {
  double theta;
};

// 1-D perturbation radius.
struct TheoryBudget {
  double epsilon;

  explicit TheoryBudget(double eps) : epsilon(eps) {
    require(eps >= 0.0, "TheoryBudget: epsilon must be >= 0, got ", eps);
  }
};

}  // namespace fairrob
