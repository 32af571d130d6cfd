#include <cmath>
#include <string>

#include "gcgs/error.hpp"
#include "gcgs/ot.hpp"

namespace gcgs::ot {

Histogram::Histogram(Vec weights) : weights_(std::move(weights)) {
  require_finite(weights_, "Histogram");
  if (weights_.size() == 0) throw DomainError("Histogram: empty");
  if ((weights_.array() < 0.0).any()) throw DomainError("Histogram: negative weight");
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw DomainError("Histogram: weights do not sum to 1");
  }
}

Histogram Histogram::uniform(Eigen::Index n) {
  if (n < 1) throw DomainError("Histogram::uniform: n must be >= 1");
  return Histogram(Vec::Constant(n, 1.0 / static_cast<double>(n)));
}

double marginal_violation(const Mat& gamma, const Histogram& mu_s, const Histogram& mu_t) {
  const double rows = (gamma.rowwise().sum() - mu_s.weights()).cwiseAbs().maxCoeff();
  const double cols =
      (gamma.colwise().sum().transpose() - mu_t.weights()).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

Mat product_coupling(const Histogram& mu_s, const Histogram& mu_t) {
  return mu_s.weights() * mu_t.weights().transpose();
}

void TransportProblem::validate() const {
  const auto r = rows();
  const auto c = cols();
  if (mu_s.size() != r || mu_t.size() != c) {
    throw DomainError("TransportProblem: marginals do not match cost shape");
  }
  require_finite(cost, "TransportProblem cost");
  if (!(lambda_ent > 0.0)) throw DomainError("TransportProblem: lambda_ent must be > 0");
  if (!(lambda_lap >= 0.0)) throw DomainError("TransportProblem: lambda_lap must be >= 0");
  if (lambda_lap > 0.0) {
    if (lap_s.rows() != r || lap_s.cols() != r || lap_t.rows() != c || lap_t.cols() != c) {
      throw DomainError("TransportProblem: Laplacian shapes do not match cost");
    }
    if (xs.rows() != r || xt.rows() != c || xs.cols() != xt.cols()) {
      throw DomainError("TransportProblem: sample position shapes do not match");
    }
  }
}

double negentropy(const Mat& gamma) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
      const double v = gamma(i, j);
      if (v > 0.0) s += v * std::log(v);
    }
  }
  return s;
}

Mat negentropy_grad(const Mat& gamma) {
  Mat g(gamma.rows(), gamma.cols());
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
      const double v = gamma(i, j);
      if (!(v > 0.0)) {
        throw DomainError("negentropy_grad: nonpositive entry at (" + std::to_string(i) +
                          ", " + std::to_string(j) + ")");
      }
      g(i, j) = 1.0 + std::log(v);
    }
  }
  return g;
}

namespace {

bool laplacian_active(const TransportProblem& p) {
  return p.lambda_lap > 0.0 && (p.lambda_s != 0.0 || p.lambda_t != 0.0);
}

void check_lap_shapes(const Mat& gamma, const TransportProblem& p) {
  const auto r = gamma.rows();
  const auto c = gamma.cols();
  if ((p.lambda_s != 0.0 && (p.lap_s.rows() != r || p.lap_s.cols() != r || p.xt.rows() != c)) ||
      (p.lambda_t != 0.0 && (p.lap_t.rows() != c || p.lap_t.cols() != c || p.xs.rows() != r)) ||
      (p.lambda_s != 0.0 && p.lambda_t != 0.0 && p.xs.cols() != p.xt.cols())) {
    throw DomainError("laplacian_reg: dimension mismatch");
  }
}

}  // namespace

double laplacian_reg(const Mat& gamma, const TransportProblem& p) {
  check_lap_shapes(gamma, p);
  double v = 0.0;
  if (p.lambda_s != 0.0) {
    const Mat gx = gamma * p.xt;  // r x d
    v += p.lambda_s * (gx.transpose() * p.lap_s * gx).trace();
  }
  if (p.lambda_t != 0.0) {
    const Mat gx = gamma.transpose() * p.xs;  // c x d
    v += p.lambda_t * (gx.transpose() * p.lap_t * gx).trace();
  }
  return v;
}

Mat laplacian_reg_grad(const Mat& gamma, const TransportProblem& p) {
  check_lap_shapes(gamma, p);
  Mat grad = Mat::Zero(gamma.rows(), gamma.cols());
  if (p.lambda_s != 0.0) {
    const Mat sym = p.lap_s + p.lap_s.transpose();
    grad += p.lambda_s * (sym * (gamma * p.xt)) * p.xt.transpose();
  }
  if (p.lambda_t != 0.0) {
    const Mat sym = p.lap_t + p.lap_t.transpose();
    grad += p.lambda_t * p.xs * ((p.xs.transpose() * gamma) * sym);
  }
  return grad;
}

double ot_objective(const Mat& gamma, const TransportProblem& p) {
  double v = (gamma.array() * p.cost.array()).sum() + p.lambda_ent * negentropy(gamma);
  if (laplacian_active(p)) v += p.lambda_lap * laplacian_reg(gamma, p);
  return v;
}

TransportObjective::TransportObjective(TransportProblem problem, SinkhornOptions sinkhorn)
    : problem_(std::move(problem)), sinkhorn_(sinkhorn) {
  problem_.validate();
}

Mat TransportObjective::as_plan(const Vec& x) const {
  return Eigen::Map<const Mat>(x.data(), problem_.rows(), problem_.cols());
}

Vec TransportObjective::flatten(const Mat& gamma) {
  return Eigen::Map<const Vec>(gamma.data(), gamma.size());
}

double TransportObjective::f(const Vec& x) const {
  const Mat gamma = as_plan(x);
  double v = (gamma.array() * problem_.cost.array()).sum();
  if (laplacian_active(problem_)) v += problem_.lambda_lap * laplacian_reg(gamma, problem_);
  return v;
}

Vec TransportObjective::grad_f(const Vec& x) const {
  if (!laplacian_active(problem_)) return flatten(problem_.cost);
  const Mat gamma = as_plan(x);
  return flatten(problem_.cost + problem_.lambda_lap * laplacian_reg_grad(gamma, problem_));
}

double TransportObjective::g(const Vec& x) const {
  return problem_.lambda_ent * negentropy(as_plan(x));
}

Vec TransportObjective::grad_g(const Vec& x) const {
  return problem_.lambda_ent * flatten(negentropy_grad(as_plan(x)));
}

Vec TransportObjective::partial_oracle(const Vec&, const Vec& grad_f_x) const {
  return flatten(sinkhorn(as_plan(grad_f_x), problem_.mu_s, problem_.mu_t,
                          problem_.lambda_ent, sinkhorn_));
}

std::optional<double> TransportObjective::extra_residual(const Vec& x) const {
  return marginal_violation(as_plan(x), problem_.mu_s, problem_.mu_t);
}

Vec TransportObjective::linear_oracle(const Vec& direction) const {
  return flatten(transport_lmo(as_plan(direction), problem_.mu_s, problem_.mu_t));
}

Vec TransportObjective::initial_point() const {
  return flatten(
      sinkhorn(problem_.cost, problem_.mu_s, problem_.mu_t, problem_.lambda_ent, sinkhorn_));
}

}  // namespace gcgs::ot
