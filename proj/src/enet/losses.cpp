#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"

namespace gcgs::enet {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(Loss loss) {
  switch (loss) {
    case Loss::squared: return "squared";
    case Loss::logistic: return "logistic";
    case Loss::squared_hinge: return "squared_hinge";
  }
  return "?";
}

std::optional<Loss> parse_loss(std::string_view s) {
  if (s == "squared") return Loss::squared;
  if (s == "logistic") return Loss::logistic;
  if (s == "squared_hinge") return Loss::squared_hinge;
  return std::nullopt;
}

void ElasticNetProblem::validate() const {
  if (Z.rows() != y.size()) throw DomainError("ElasticNetProblem: Z rows != y length");
  if (!(lambda > 0.0)) throw DomainError("ElasticNetProblem: lambda must be > 0");
  if (!(tau > 0.0)) throw DomainError("ElasticNetProblem: tau must be > 0");
  require_finite(Z, "ElasticNetProblem Z");
  require_finite(y, "ElasticNetProblem y");
  if (loss != Loss::squared) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 1.0 && y[i] != -1.0) {
        throw DomainError("ElasticNetProblem: classification labels must be +-1");
      }
    }
  }
}

double loss_eval(const ElasticNetProblem& p, const Vec& x) {
  const Vec t = p.Z * x;
  switch (p.loss) {
    case Loss::squared:
      return 0.5 * (p.y - t).squaredNorm();
    case Loss::logistic: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < t.size(); ++i) s += softplus(-p.y[i] * t[i]);
      return s;
    }
    case Loss::squared_hinge: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double h = std::max(0.0, 1.0 - p.y[i] * t[i]);
        s += h * h;
      }
      return s;
    }
  }
  return 0.0;
}

Vec loss_grad(const ElasticNetProblem& p, const Vec& x) {
  const Vec t = p.Z * x;
  Vec w(t.size());
  switch (p.loss) {
    case Loss::squared:
      w = t - p.y;
      break;
    case Loss::logistic:
      for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = -p.y[i] * sigmoid(-p.y[i] * t[i]);
      break;
    case Loss::squared_hinge:
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        w[i] = -2.0 * p.y[i] * std::max(0.0, 1.0 - p.y[i] * t[i]);
      }
      break;
  }
  return p.Z.transpose() * w;
}

Vec project_l1(const Vec& v, double tau) {
  if (!(tau > 0.0)) throw DomainError("project_l1: tau must be > 0");
  if (v.lpNorm<1>() <= tau) return v;

  std::vector<double> mags(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  // Largest rho with mags[rho] > (sum_{i<=rho} mags[i] - tau) / (rho + 1).
  double cumsum = 0.0;
  double theta = 0.0;
  for (size_t r = 0; r < mags.size(); ++r) {
    cumsum += mags[r];
    const double candidate = (cumsum - tau) / static_cast<double>(r + 1);
    if (mags[r] > candidate) theta = candidate;
  }

  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = std::copysign(m, v[i]);
  }
  // For very long v the subtraction |v_i| - theta cancels badly; pull the
  // result back onto the ball.
  const double norm = out.lpNorm<1>();
  if (norm > tau) out *= tau / norm;
  return out;
}

Vec en_oracle(const ElasticNetProblem& p, const Vec& grad_f) {
  return project_l1(-grad_f / (2.0 * p.lambda), p.tau);
}

Vec l1_lmo(const Vec& grad, double tau) {
  if (!(tau > 0.0)) throw DomainError("l1_lmo: tau must be > 0");
  Vec s = Vec::Zero(grad.size());
  if (grad.size() == 0) return s;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < grad.size(); ++i) {
    if (std::abs(grad[i]) > std::abs(grad[best])) best = i;
  }
  s[best] = grad[best] > 0.0 ? -tau : tau;
  return s;
}

double fixed_point_residual(const ElasticNetProblem& p, const Vec& x) {
  return inf_norm(project_l1(x - objective_grad(p, x), p.tau) - x);
}

double accuracy(const Mat& Z, const Vec& y, const Vec& x) {
  if (y.size() == 0) return 0.0;
  const Vec t = Z * x;
  int correct = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if ((t[i] >= 0.0 ? 1.0 : -1.0) == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

ElasticNetObjective::ElasticNetObjective(ElasticNetProblem problem)
    : problem_(std::move(problem)) {
  problem_.validate();
}

std::optional<double> ElasticNetObjective::exact_step(const Vec& x, const Vec& dx) const {
  if (problem_.loss != Loss::squared) return std::nullopt;
  // phi(a) = 1/2 ||r - a Z dx||^2 + lambda ||x + a dx||^2 with r = y - Z x.
  const Vec zd = problem_.Z * dx;
  const Vec r = problem_.y - problem_.Z * x;
  const double curvature = zd.squaredNorm() + 2.0 * problem_.lambda * dx.squaredNorm();
  const double slope = -r.dot(zd) + 2.0 * problem_.lambda * x.dot(dx);
  if (!(curvature > 0.0)) return slope < 0.0 ? 1.0 : 0.0;
  return std::clamp(-slope / curvature, 0.0, 1.0);
}

}  // namespace gcgs::enet
