#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gcgs/error.hpp"
#include "gcgs/ot.hpp"

namespace gcgs::ot {

namespace {

void check_inputs(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t,
                  double lambda, const SinkhornOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("sinkhorn: lambda must be > 0");
  if (!(opts.tol > 0.0)) throw DomainError("sinkhorn: tol must be > 0");
  if (cost.rows() != mu_s.size() || cost.cols() != mu_t.size()) {
    throw DomainError("sinkhorn: cost shape does not match marginals");
  }
  if ((mu_s.weights().array() <= 0.0).any() || (mu_t.weights().array() <= 0.0).any()) {
    throw DomainError("sinkhorn: marginals must be strictly positive");
  }
  require_finite(cost, "sinkhorn cost");
}

ConvergenceError not_converged(int iters, double violation) {
  return ConvergenceError("sinkhorn: marginal violation " + std::to_string(violation) +
                              " after " + std::to_string(iters) + " iterations",
                          violation);
}

// Row-wise log-sum-exp of (g_j - C_ij) / lambda - 1.
double row_lse(const Mat& cost, Eigen::Index i, const Vec& g, double lambda) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    mx = std::max(mx, (g[j] - cost(i, j)) / lambda);
  }
  double s = 0.0;
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    s += std::exp((g[j] - cost(i, j)) / lambda - mx);
  }
  return mx + std::log(s) - 1.0;
}

double col_lse(const Mat& cost, Eigen::Index j, const Vec& f, double lambda) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    mx = std::max(mx, (f[i] - cost(i, j)) / lambda);
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    s += std::exp((f[i] - cost(i, j)) / lambda - mx);
  }
  return mx + std::log(s) - 1.0;
}

// gamma_ij = exp((f_i + g_j - C_ij) / lambda - 1)
Mat plan_from_potentials(const Mat& cost, const Vec& f, const Vec& g, double lambda) {
  Mat plan(cost.rows(), cost.cols());
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
      plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / lambda - 1.0);
    }
  }
  return plan;
}

double marginal_error(const Mat& plan, const Vec& a, const Vec& b) {
  const double rows = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

// Newton ascent on the dual a.f + b.g - lambda sum gamma(f, g). The dual is
// invariant under f + t, g - t, so the last g is held fixed. Steps are
// accepted when they shrink the marginal violation.
int newton_polish(const Mat& cost, const Vec& a, const Vec& b, double lambda, Vec& f, Vec& g,
                  double tol, int max_steps) {
  const Eigen::Index r = cost.rows();
  const Eigen::Index c = cost.cols();
  const Eigen::Index n = r + c - 1;
  Mat plan = plan_from_potentials(cost, f, g, lambda);
  double err = marginal_error(plan, a, b);
  int steps = 0;
  while (steps < max_steps && err > tol) {
    const Vec row = plan.rowwise().sum();
    const Vec col = plan.colwise().sum().transpose();
    Vec grad(n);
    grad << a - row, (b - col).head(c - 1);
    Mat h = Mat::Zero(n, n);
    h.topLeftCorner(r, r).diagonal() = row;
    h.bottomRightCorner(c - 1, c - 1).diagonal() = col.head(c - 1);
    h.topRightCorner(r, c - 1) = plan.leftCols(c - 1);
    h.bottomLeftCorner(c - 1, r) = plan.leftCols(c - 1).transpose();
    const Vec d = lambda * h.ldlt().solve(grad);
    if (!d.allFinite()) break;
    ++steps;

    bool accepted = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      Vec nf = f + t * d.head(r);
      Vec ng = g;
      ng.head(c - 1) += t * d.tail(c - 1);
      Mat np = plan_from_potentials(cost, nf, ng, lambda);
      if (!np.allFinite()) continue;
      const double nerr = marginal_error(np, a, b);
      if (nerr < err) {
        f = std::move(nf);
        g = std::move(ng);
        plan = std::move(np);
        err = nerr;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return steps;
}

SinkhornResult finish(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t,
                      double lambda, const SinkhornOptions& opts, Vec f, Vec g,
                      SinkhornResult out) {
  const Vec& a = mu_s.weights();
  const Vec& b = mu_t.weights();
  if (marginal_error(plan_from_potentials(cost, f, g, lambda), a, b) > opts.tol) {
    out.newton_steps = newton_polish(cost, a, b, lambda, f, g, opts.tol, opts.newton_max_steps);
  }
  out.plan = plan_from_potentials(cost, f, g, lambda);
  out.violation = marginal_violation(out.plan, mu_s, mu_t);
  if (!(out.violation <= opts.tol)) throw not_converged(out.iterations, out.violation);
  if ((out.plan.array() <= 0.0).any()) {
    throw DomainError("sinkhorn: plan entry underflowed to zero");
  }
  return out;
}

}  // namespace

SinkhornResult sinkhorn_log_domain(const Mat& cost, const Histogram& mu_s,
                                   const Histogram& mu_t, double lambda,
                                   SinkhornOptions opts) {
  check_inputs(cost, mu_s, mu_t, lambda, opts);
  const Eigen::Index r = cost.rows();
  const Eigen::Index c = cost.cols();
  const Vec log_a = mu_s.weights().array().log();
  const Vec log_b = mu_t.weights().array().log();

  // Small lambda against a wide cost range converges slowly, so the
  // potentials are warm-started through a geometric schedule of larger
  // lambdas first.
  const double range = cost.maxCoeff() - cost.minCoeff();
  std::vector<double> schedule;
  for (double l = lambda; l < range / 4.0; l *= 4.0) schedule.push_back(4.0 * l);
  std::reverse(schedule.begin(), schedule.end());
  schedule.push_back(lambda);

  Vec f = Vec::Zero(r);
  Vec g = Vec::Zero(c);
  SinkhornResult out;
  out.log_domain = true;
  int budget = opts.max_iter;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double lam = schedule[stage];
    const bool last = stage + 1 == schedule.size();
    const double stage_tol = last ? opts.tol : std::max(opts.tol, 1e-4 / std::max(r, c));
    int sweeps = 0;
    for (Eigen::Index j = 0; j < c; ++j) g[j] = lam * (log_b[j] - col_lse(cost, j, f, lam));
    while (budget > 0 && !(last && sweeps >= opts.newton_after)) {
      // Columns are exact after the g-update; rows measure the violation.
      double viol = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) {
        const double lse = row_lse(cost, i, g, lam);
        viol = std::max(viol, std::abs(std::exp(f[i] / lam + lse) - mu_s[i]));
        f[i] = lam * (log_a[i] - lse);
      }
      --budget;
      ++sweeps;
      ++out.iterations;
      for (Eigen::Index j = 0; j < c; ++j) g[j] = lam * (log_b[j] - col_lse(cost, j, f, lam));
      if (viol <= stage_tol) break;
    }
  }
  return finish(cost, mu_s, mu_t, lambda, opts, std::move(f), std::move(g), std::move(out));
}

SinkhornResult sinkhorn_solve(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t,
                              double lambda, SinkhornOptions opts) {
  check_inputs(cost, mu_s, mu_t, lambda, opts);
  const auto usable = [](const auto& m) {
    return m.allFinite() && (m.array() > 0.0).all();
  };
  // Eigen's vectorized exp clamps its argument near -709 instead of
  // underflowing, so the kernel is only trusted well inside that range.
  const double exponent_lo = -cost.maxCoeff() / lambda - 1.0;
  const double exponent_hi = -cost.minCoeff() / lambda - 1.0;
  if (exponent_lo < -700.0 || exponent_hi > 700.0) {
    return sinkhorn_log_domain(cost, mu_s, mu_t, lambda, opts);
  }
  const Mat kernel = (-cost.array() / lambda - 1.0).exp().matrix();
  if (!usable(kernel)) return sinkhorn_log_domain(cost, mu_s, mu_t, lambda, opts);

  const Vec& a = mu_s.weights();
  const Vec& b = mu_t.weights();
  Vec u = Vec::Ones(cost.rows());
  Vec v = b.cwiseQuotient(kernel.transpose() * u);

  SinkhornResult out;
  const int sweeps = std::min(opts.max_iter, opts.newton_after);
  for (int it = 0; it < sweeps; ++it) {
    const Vec kv = kernel * v;
    const double viol = (u.cwiseProduct(kv) - a).cwiseAbs().maxCoeff();
    if (viol <= opts.tol) break;
    u = a.cwiseQuotient(kv);
    v = b.cwiseQuotient(kernel.transpose() * u);
    out.iterations = it + 1;
    if (!usable(u) || !usable(v)) {
      return sinkhorn_log_domain(cost, mu_s, mu_t, lambda, opts);
    }
  }
  Vec f = lambda * u.array().log().matrix();
  Vec g = lambda * v.array().log().matrix();
  return finish(cost, mu_s, mu_t, lambda, opts, std::move(f), std::move(g), std::move(out));
}

}  // namespace gcgs::ot
