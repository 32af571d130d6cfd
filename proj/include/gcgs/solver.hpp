#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcgs/numerics.hpp"

namespace gcgs {

/// Objective F = f + g over a compact convex set, both parts convex and
/// differentiable. The set itself is only visible through partial_oracle,
/// which must return a feasible minimizer of <grad_f, s> + g(s).
class SplitObjective {
public:
  virtual ~SplitObjective() = default;

  virtual double f(const Vec& x) const = 0;
  virtual Vec grad_f(const Vec& x) const = 0;
  virtual double g(const Vec& x) const = 0;
  virtual Vec grad_g(const Vec& x) const = 0;
  virtual Vec partial_oracle(const Vec& x, const Vec& grad_f_x) const = 0;

  double value(const Vec& x) const { return f(x) + g(x); }
  Vec gradient(const Vec& x) const { return grad_f(x) + grad_g(x); }

  /// Closed-form minimizer of F(x + a dx) over a in [0, 1], when one exists.
  virtual std::optional<double> exact_step(const Vec& /*x*/, const Vec& /*dx*/) const {
    return std::nullopt;
  }

  /// Problem-specific optimality residual reported alongside the gap
  /// (marginal violation for transport, fixed-point residual for elastic-net).
  virtual std::optional<double> extra_residual(const Vec& /*x*/) const {
    return std::nullopt;
  }
};

enum class StepRule { exact, armijo, fixed };
enum class Termination { gap_tol, residual_tol, max_iter, stalled };

std::string_view to_string(StepRule rule);
std::string_view to_string(Termination t);
std::optional<StepRule> parse_step_rule(std::string_view s);

struct SolverConfig {
  StepRule step_rule = StepRule::exact;
  int max_iter = 1000;
  /// Stop when the surrogate gap drops to this value.
  double gap_tol = 1e-8;
  /// Interpret gap_tol as a fraction of the gap at x0.
  bool gap_tol_relative = false;
  /// Stop when the objective's extra_residual drops to this value.
  std::optional<double> residual_tol;
  double armijo_sigma = 1e-4;
  double armijo_beta = 0.5;
  bool record_trace = true;
  std::uint64_t seed = 0;
  LineMinOptions line_search{};
};

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  double surrogate_gap = 0.0;
  /// Step taken from this iterate; 0 on the final record.
  double alpha = 0.0;
  double elapsed_s = 0.0;
  std::optional<double> extra_residual;
};

struct SolveResult {
  Vec x;
  std::vector<IterationRecord> trace;
  Termination termination = Termination::max_iter;
  /// Number of steps taken.
  int iterations = 0;
};

/// State handed to an observer once per iterate, before the step is taken.
struct IterationView {
  int k;
  const Vec& x;
  const Vec& s;
  const Vec& grad_f;
  double surrogate_gap;
};
using IterationObserver = std::function<void(const IterationView&)>;

/// Generalized conditional gradient with splitting:
///   s_k = argmin_{s in P} <grad f(x_k), s> + g(s)
///   x_{k+1} = x_k + alpha_k (s_k - x_k)
/// Terminates on gap <= gap_tol, on residual <= residual_tol, after max_iter
/// steps, or when the step rule cannot make progress.
SolveResult solve(const SplitObjective& obj, const Vec& x0, const SolverConfig& cfg,
                  const IterationObserver& observer = {});

/// -[<grad_f, s - x> + g(s) - g(x)], clamped at zero. Upper-bounds F(x) - F*
/// when s is the partial oracle output at x.
double surrogate_gap(const Vec& x, const Vec& s, const Vec& grad_f,
                     const SplitObjective& obj);

/// argmin over [0, 1] of F(x + a dx): the objective's closed form if it has
/// one, else golden section. When golden section cannot see any decrease but
/// the slope at 0 is negative, bisects on the directional derivative.
double step_exact(const SplitObjective& obj, const Vec& x, const Vec& dx,
                  LineMinOptions opts = {});

/// Largest alpha in {1, beta, beta^2, ...} with
/// F(x + alpha dx) <= F(x) + sigma alpha <grad_F_x, dx>.
/// Throws StallError once alpha drops below 2^-50.
double step_armijo(const SplitObjective& obj, const Vec& x, const Vec& dx,
                   const Vec& grad_F_x, double sigma = 1e-4, double beta = 0.5);

/// 2 / (k + 2).
double step_fixed(int k);

using LinearMinimizer = std::function<Vec(const Vec& direction)>;

/// Presents F = f + g as a purely smooth objective with g = 0 and the
/// full-linearization oracle s = lmo(grad F). Running `solve` on the adapter
/// is the classic conditional gradient method, and its recorded gap is the
/// classic surrogate duality gap.
class ConditionalGradientAdapter final : public SplitObjective {
public:
  ConditionalGradientAdapter(const SplitObjective& base, LinearMinimizer lmo)
      : base_(base), lmo_(std::move(lmo)) {}

  double f(const Vec& x) const override { return base_.value(x); }
  Vec grad_f(const Vec& x) const override { return base_.gradient(x); }
  double g(const Vec&) const override { return 0.0; }
  Vec grad_g(const Vec& x) const override { return Vec::Zero(x.size()); }
  Vec partial_oracle(const Vec&, const Vec& grad) const override { return lmo_(grad); }

  std::optional<double> exact_step(const Vec& x, const Vec& dx) const override {
    return base_.exact_step(x, dx);
  }
  std::optional<double> extra_residual(const Vec& x) const override {
    return base_.extra_residual(x);
  }

private:
  const SplitObjective& base_;
  LinearMinimizer lmo_;
};

inline ConditionalGradientAdapter cg_adapter(const SplitObjective& base,
                                             LinearMinimizer lmo) {
  return ConditionalGradientAdapter(base, std::move(lmo));
}

/// Feasible chord (x, s) drawn by a problem-specific sampler.
using ChordSampler = std::function<std::pair<Vec, Vec>(Rng&)>;

/// Sampled lower estimate of the curvature constant
///   C = sup 2 [F(x + a(s - x)) - F(x) - a <grad F(x), s - x>] / a^2.
double estimate_curvature(const SplitObjective& obj, const ChordSampler& sampler,
                          int n_samples, const std::vector<double>& alphas, Rng& rng);

struct FixedPointCheck {
  double gap = 0.0;
  /// ||s - x||_inf with s the partial oracle output at x.
  double step_norm = 0.0;
};

/// x solves the problem iff it solves its own subproblem; both numbers
/// vanish at a minimizer when the subproblem solution is unique.
FixedPointCheck check_fixed_point(const SplitObjective& obj, const Vec& x);

}  // namespace gcgs
