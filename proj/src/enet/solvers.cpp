#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"

namespace gcgs::enet {

namespace {

constexpr double kMinAlpha = 0x1.0p-50;

using Clock = std::chrono::steady_clock;

struct TraceWriter {
  const ElasticNetObjective& obj;
  const ProjectedGradientConfig& cfg;
  Clock::time_point start = Clock::now();

  IterationRecord make(int k, const Vec& x, double fx, const Vec& grad_f, double residual) const {
    IterationRecord rec;
    rec.k = k;
    rec.objective = fx;
    rec.surrogate_gap = surrogate_gap(x, obj.partial_oracle(x, grad_f), grad_f, obj);
    rec.extra_residual = residual;
    rec.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return rec;
  }

  void push(SolveResult& r, const IterationRecord& rec) const {
    if (cfg.record_trace || r.trace.empty()) {
      r.trace.push_back(rec);
    } else {
      r.trace.back() = rec;
    }
  }
};

void check_config(const ProjectedGradientConfig& cfg) {
  if (cfg.max_iter < 1) throw DomainError("projected gradient: max_iter must be >= 1");
  if (cfg.memory < 1) throw DomainError("projected gradient: memory must be >= 1");
}

}  // namespace

SolveResult spg_solve(const ElasticNetProblem& p, const Vec& x0,
                      const ProjectedGradientConfig& cfg) {
  check_config(cfg);
  const ElasticNetObjective obj(p);
  const TraceWriter trace{obj, cfg};
  constexpr double kSigma1 = 0.1;
  constexpr double kSigma2 = 0.9;

  SolveResult result;
  Vec x = project_l1(x0, p.tau);
  double fx = objective(p, x);
  Vec gf = loss_grad(p, x);
  Vec grad = gf + 2.0 * p.lambda * x;

  double residual = inf_norm(project_l1(x - grad, p.tau) - x);
  double spectral = residual > 0.0 ? std::clamp(1.0 / residual, cfg.step_min, cfg.step_max)
                                   : cfg.step_max;
  std::deque<double> history{fx};

  for (int k = 0;; ++k) {
    IterationRecord rec = trace.make(k, x, fx, gf, residual);
    if (residual <= cfg.residual_tol) {
      result.termination = Termination::residual_tol;
    } else if (k >= cfg.max_iter) {
      result.termination = Termination::max_iter;
    } else {
      const Vec d = project_l1(x - spectral * grad, p.tau) - x;
      const double slope = grad.dot(d);
      const double f_ref = *std::max_element(history.begin(), history.end());

      double alpha = 1.0;
      Vec xn;
      double fn = 0.0;
      bool accepted = false;
      while (alpha >= kMinAlpha) {
        xn = x + alpha * d;
        fn = objective(p, xn);
        if (std::isfinite(fn) && fn <= f_ref + cfg.armijo_sigma * alpha * slope) {
          accepted = true;
          break;
        }
        // Safeguarded quadratic interpolation.
        const double trial = -0.5 * alpha * alpha * slope / (fn - fx - alpha * slope);
        alpha = (trial >= kSigma1 && trial <= kSigma2 * alpha) ? trial : 0.5 * alpha;
      }
      if (!accepted) {
        result.termination = Termination::stalled;
      } else {
        rec.alpha = alpha;
        trace.push(result, rec);

        const Vec gf_new = loss_grad(p, xn);
        const Vec grad_new = gf_new + 2.0 * p.lambda * xn;
        const Vec step = xn - x;
        const double sy = step.dot(grad_new - grad);
        spectral = sy <= 0.0 ? cfg.step_max
                             : std::clamp(step.squaredNorm() / sy, cfg.step_min, cfg.step_max);
        x = xn;
        fx = fn;
        gf = gf_new;
        grad = grad_new;
        residual = inf_norm(project_l1(x - grad, p.tau) - x);
        history.push_back(fx);
        if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
        continue;
      }
    }
    rec.alpha = 0.0;
    trace.push(result, rec);
    result.iterations = k;
    result.x = x;
    return result;
  }
}

SolveResult pg_solve(const ElasticNetProblem& p, const Vec& x0,
                     const ProjectedGradientConfig& cfg) {
  check_config(cfg);
  const ElasticNetObjective obj(p);
  const TraceWriter trace{obj, cfg};

  SolveResult result;
  Vec x = project_l1(x0, p.tau);
  for (int k = 0;; ++k) {
    const double fx = objective(p, x);
    const Vec gf = loss_grad(p, x);
    const Vec grad = gf + 2.0 * p.lambda * x;
    const Vec d = project_l1(x - grad, p.tau) - x;
    const double residual = inf_norm(d);
    IterationRecord rec = trace.make(k, x, fx, gf, residual);

    if (residual <= cfg.residual_tol) {
      result.termination = Termination::residual_tol;
    } else if (k >= cfg.max_iter) {
      result.termination = Termination::max_iter;
    } else {
      const double slope = grad.dot(d);
      bool accepted = false;
      for (double alpha = 1.0; alpha >= kMinAlpha; alpha *= cfg.armijo_beta) {
        Vec xn = x + alpha * d;
        const double fn = objective(p, xn);
        if (std::isfinite(fn) && fn <= fx + cfg.armijo_sigma * alpha * slope) {
          rec.alpha = alpha;
          x = std::move(xn);
          accepted = true;
          break;
        }
      }
      if (accepted) {
        trace.push(result, rec);
        continue;
      }
      result.termination = Termination::stalled;
    }
    rec.alpha = 0.0;
    trace.push(result, rec);
    result.iterations = k;
    result.x = x;
    return result;
  }
}

}  // namespace gcgs::enet
