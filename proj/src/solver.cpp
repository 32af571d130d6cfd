#include "gcgs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "gcgs/error.hpp"

namespace gcgs {

namespace {

// dx with ||dx||_inf below this is a numerical fixed point.
constexpr double kStepFloor = 1e-14;
constexpr double kArmijoMinAlpha = 0x1.0p-50;

}  // namespace

std::string_view to_string(StepRule rule) {
  switch (rule) {
    case StepRule::exact: return "exact";
    case StepRule::armijo: return "armijo";
    case StepRule::fixed: return "fixed";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::gap_tol: return "gap_tol";
    case Termination::residual_tol: return "fp_residual";
    case Termination::max_iter: return "max_iter";
    case Termination::stalled: return "stalled";
  }
  return "?";
}

std::optional<StepRule> parse_step_rule(std::string_view s) {
  if (s == "exact") return StepRule::exact;
  if (s == "armijo") return StepRule::armijo;
  if (s == "fixed") return StepRule::fixed;
  return std::nullopt;
}

double surrogate_gap(const Vec& x, const Vec& s, const Vec& grad_f,
                     const SplitObjective& obj) {
  const double bracket = grad_f.dot(s - x) + obj.g(s) - obj.g(x);
  return std::max(0.0, -bracket);
}

double step_exact(const SplitObjective& obj, const Vec& x, const Vec& dx,
                  LineMinOptions opts) {
  if (inf_norm(dx) == 0.0) return 0.0;
  if (auto closed = obj.exact_step(x, dx)) return std::clamp(*closed, 0.0, 1.0);
  Vec probe(x.size());
  const double a = golden_section_min(
      [&](double t) {
        probe = x + t * dx;
        return obj.value(probe);
      },
      opts);
  if (a > 0.0) return a;

  // Near the optimum the decrease along dx drops below the rounding of F and
  // value comparisons cannot see it. The directional derivative still can.
  const auto slope = [&](double t) {
    probe = x + t * dx;
    return obj.gradient(probe).dot(dx);
  };
  if (!(slope(0.0) < 0.0)) return 0.0;
  if (slope(1.0) <= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 100 && hi - lo > opts.tol * 1e-6; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo;
}

double step_armijo(const SplitObjective& obj, const Vec& x, const Vec& dx,
                   const Vec& grad_F_x, double sigma, double beta) {
  const double fx = obj.value(x);
  const double slope = grad_F_x.dot(dx);
  Vec probe(x.size());
  for (double alpha = 1.0; alpha >= kArmijoMinAlpha; alpha *= beta) {
    probe = x + alpha * dx;
    const double fa = obj.value(probe);
    if (std::isfinite(fa) && fa <= fx + sigma * alpha * slope) return alpha;
  }
  throw StallError("armijo: no acceptable step above 2^-50 (slope " +
                   std::to_string(slope) + ")");
}

double step_fixed(int k) {
  if (k < 0) throw DomainError("step_fixed: k must be >= 0");
  return 2.0 / (static_cast<double>(k) + 2.0);
}

SolveResult solve(const SplitObjective& obj, const Vec& x0, const SolverConfig& cfg,
                  const IterationObserver& observer) {
  if (cfg.max_iter < 1) throw DomainError("solve: max_iter must be >= 1");
  if (!(cfg.gap_tol >= 0.0)) throw DomainError("solve: gap_tol must be >= 0");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  SolveResult result;
  result.x = x0;
  Vec& x = result.x;
  double gap_threshold = cfg.gap_tol;

  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.objective = obj.value(x);
    if (!std::isfinite(rec.objective)) {
      throw EvaluationError("non-finite objective at iteration " + std::to_string(k),
                            rec.objective);
    }

    const Vec gf = obj.grad_f(x);
    Vec s;
    try {
      s = obj.partial_oracle(x, gf);
    } catch (const std::exception& e) {
      throw OracleError("oracle failed at iteration " + std::to_string(k) + ": " +
                            e.what(),
                        k);
    }
    rec.surrogate_gap = surrogate_gap(x, s, gf, obj);
    rec.extra_residual = obj.extra_residual(x);
    if (k == 0 && cfg.gap_tol_relative) gap_threshold = cfg.gap_tol * rec.surrogate_gap;

    if (observer) observer(IterationView{k, x, s, gf, rec.surrogate_gap});

    const Vec dx = s - x;
    std::optional<Termination> stop;
    if (rec.surrogate_gap <= gap_threshold || inf_norm(dx) <= kStepFloor) {
      stop = Termination::gap_tol;
    } else if (cfg.residual_tol && rec.extra_residual &&
               *rec.extra_residual <= *cfg.residual_tol) {
      stop = Termination::residual_tol;
    } else if (k >= cfg.max_iter) {
      stop = Termination::max_iter;
    }

    if (!stop) {
      try {
        switch (cfg.step_rule) {
          case StepRule::exact:
            rec.alpha = step_exact(obj, x, dx, cfg.line_search);
            break;
          case StepRule::armijo:
            rec.alpha = step_armijo(obj, x, dx, obj.gradient(x), cfg.armijo_sigma,
                                    cfg.armijo_beta);
            break;
          case StepRule::fixed:
            rec.alpha = step_fixed(k);
            break;
        }
      } catch (const StallError&) {
        stop = Termination::stalled;
      }
      if (!stop && rec.alpha == 0.0) stop = Termination::stalled;
    }

    rec.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    if (stop) {
      rec.alpha = 0.0;
      result.termination = *stop;
      result.iterations = k;
      if (cfg.record_trace || result.trace.empty()) {
        result.trace.push_back(rec);
      } else {
        result.trace.back() = rec;
      }
      return result;
    }

    x = x + rec.alpha * dx;
    if (cfg.record_trace || result.trace.empty()) {
      result.trace.push_back(rec);
    } else {
      result.trace.back() = rec;
    }
  }
}

double estimate_curvature(const SplitObjective& obj, const ChordSampler& sampler,
                          int n_samples, const std::vector<double>& alphas, Rng& rng) {
  if (n_samples < 1) throw DomainError("estimate_curvature: n_samples must be >= 1");
  double best = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const auto [x, s] = sampler(rng);
    const Vec d = s - x;
    const double fx = obj.value(x);
    const double slope = obj.gradient(x).dot(d);
    for (const double a : alphas) {
      if (!(a > 0.0) || a > 1.0) continue;
      const double excess = obj.value(x + a * d) - fx - a * slope;
      best = std::max(best, 2.0 * excess / (a * a));
    }
  }
  return best;
}

FixedPointCheck check_fixed_point(const SplitObjective& obj, const Vec& x) {
  const Vec gf = obj.grad_f(x);
  const Vec s = obj.partial_oracle(x, gf);
  return {surrogate_gap(x, s, gf, obj), inf_norm(s - x)};
}

}  // namespace gcgs
