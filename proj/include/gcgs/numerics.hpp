#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace gcgs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Mat>& m, const char* what);

/// Counter-based generator: draw number i is a pure function of (seed, i),
/// so streams are identical on every platform and compiler.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// r x c matrix of standard normal draws. Requires r, c >= 1.
Mat gaussian_draws(Rng& rng, Eigen::Index rows, Eigen::Index cols);

struct LineMinOptions {
  double tol = 1e-10;
  int max_evals = 200;
};

/// Golden-section minimization of phi on [0, 1]. The endpoints are always
/// evaluated and returned when they beat the interior bracket, so boundary
/// minima are found exactly. Throws EvaluationError on a non-finite phi value.
double golden_section_min(const std::function<double(double)>& phi,
                          LineMinOptions opts = {});

/// Central finite-difference gradient (F(x+h e_i) - F(x-h e_i)) / 2h.
Vec finite_diff_grad(const std::function<double(const Vec&)>& F, const Vec& x,
                     double h = 1e-6);

/// Fixed left-to-right inner product; used wherever bitwise reproducibility
/// across builds matters more than speed.
double ordered_dot(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b);

inline double inf_norm(const Eigen::Ref<const Vec>& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace gcgs
