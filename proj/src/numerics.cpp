#include "gcgs/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gcgs/error.hpp"

namespace gcgs {

namespace {

// SplitMix64 finalizer; bijective mixing of a 64-bit word.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double checked(double v, double at) {
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite function value at " + std::to_string(at), at);
  }
  return v;
}

}  // namespace

void require_finite(const Eigen::Ref<const Mat>& m, const char* what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + ": non-finite entry");
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t key = mix64(seed_ ^ 0x6a09e667f3bcc909ULL);
  return mix64(key + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: empty range");
  // Rejection sampling for an unbiased draw.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; std::normal_distribution is not reproducible across
  // standard library implementations.
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Mat gaussian_draws(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw DomainError("gaussian_draws: dimensions must be >= 1");
  }
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  }
  return out;
}

double golden_section_min(const std::function<double(double)>& phi,
                          LineMinOptions opts) {
  if (!(opts.tol > 0.0)) throw DomainError("golden_section_min: tol must be > 0");
  constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

  const double f0 = checked(phi(0.0), 0.0);
  const double f1 = checked(phi(1.0), 1.0);
  int evals = 2;

  double a = 0.0;
  double b = 1.0;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = checked(phi(c), c);
  double fd = checked(phi(d), d);
  evals += 2;

  while (b - a > opts.tol && evals < opts.max_evals) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = checked(phi(c), c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = checked(phi(d), d);
    }
    ++evals;
  }

  double best = c;
  double fbest = fc;
  if (fd < fbest) {
    best = d;
    fbest = fd;
  }
  // Ties between an endpoint and the interior favour the endpoint.
  if (f1 <= fbest) {
    best = 1.0;
    fbest = f1;
  }
  if (f0 <= fbest) best = 0.0;
  return best;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& F, const Vec& x,
                     double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff_grad: h must be > 0");
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = checked(F(probe), x[i] + h);
    probe[i] = x[i] - h;
    const double fm = checked(F(probe), x[i] - h);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double ordered_dot(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace gcgs
