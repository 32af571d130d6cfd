#pragma once

// Small analytic problems shared by the unit and acceptance suites.

#include <cmath>

#include "gcgs/elasticnet.hpp"
#include "gcgs/solver.hpp"

namespace gcgs::testing {

/// f(x) = 1/2 (x - b)^T D (x - b), g(x) = ridge ||x||^2, feasible set the L1
/// ball of radius tau. With ridge = 0 the oracle is the L1 vertex LMO;
/// otherwise it is the projection of -grad f / (2 ridge).
class QuadraticOnL1Ball final : public SplitObjective {
public:
  QuadraticOnL1Ball(Vec diag, Vec center, double ridge, double tau)
      : diag_(std::move(diag)), center_(std::move(center)), ridge_(ridge), tau_(tau) {}

  double f(const Vec& x) const override {
    const Vec d = x - center_;
    return 0.5 * d.dot(diag_.cwiseProduct(d));
  }
  Vec grad_f(const Vec& x) const override { return diag_.cwiseProduct(x - center_); }
  double g(const Vec& x) const override { return ridge_ * x.squaredNorm(); }
  Vec grad_g(const Vec& x) const override { return 2.0 * ridge_ * x; }
  Vec partial_oracle(const Vec&, const Vec& gf) const override {
    if (ridge_ == 0.0) return enet::l1_lmo(gf, tau_);
    return enet::project_l1(-gf / (2.0 * ridge_), tau_);
  }

  Vec lmo(const Vec& grad) const { return enet::l1_lmo(grad, tau_); }
  double tau() const { return tau_; }

  /// Exact curvature constant: the excess is (a^2/2) d^T (D + 2 ridge I) d and
  /// the widest chord of the ball has ||d||_1 = 2 tau.
  double curvature() const {
    return 4.0 * tau_ * tau_ * (diag_.maxCoeff() + 2.0 * ridge_);
  }

private:
  Vec diag_;
  Vec center_;
  double ridge_;
  double tau_;
};

/// f(x) = x^2 on [-1, 1], g = 0.
inline QuadraticOnL1Ball scalar_quadratic() {
  return QuadraticOnL1Ball(Vec::Constant(1, 2.0), Vec::Zero(1), 0.0, 1.0);
}

}  // namespace gcgs::testing
