#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gcgs/numerics.hpp"
#include "gcgs/solver.hpp"

namespace gcgs::enet {

enum class Loss { squared, logistic, squared_hinge };

std::string_view to_string(Loss loss);
std::optional<Loss> parse_loss(std::string_view s);

/// min L(y, Z x) + lambda x^T x  subject to ||x||_1 <= tau.
struct ElasticNetProblem {
  Mat Z;
  Vec y;
  Loss loss = Loss::squared;
  double lambda = 0.1;
  double tau = 1.0;

  /// Throws DomainError on shape mismatch, nonpositive lambda/tau, or
  /// non +-1 labels for the classification losses.
  void validate() const;
};

double loss_eval(const ElasticNetProblem& p, const Vec& x);
Vec loss_grad(const ElasticNetProblem& p, const Vec& x);

inline double objective(const ElasticNetProblem& p, const Vec& x) {
  return loss_eval(p, x) + p.lambda * x.squaredNorm();
}
inline Vec objective_grad(const ElasticNetProblem& p, const Vec& x) {
  return loss_grad(p, x) + 2.0 * p.lambda * x;
}

/// Euclidean projection onto {||x||_1 <= tau} by sorting |v| and
/// soft-thresholding at the exact threshold.
Vec project_l1(const Vec& v, double tau);

/// Partial oracle: argmin_{||s||_1 <= tau} <grad_f, s> + lambda s^T s, which
/// is the projection of -grad_f / (2 lambda).
Vec en_oracle(const ElasticNetProblem& p, const Vec& grad_f);

/// Vertex -tau sign(g_i) e_i at the largest |g_i| (lowest index on ties).
/// A zero gradient returns +tau e_0.
Vec l1_lmo(const Vec& grad, double tau);

/// ||P(x - grad F(x)) - x||_inf.
double fixed_point_residual(const ElasticNetProblem& p, const Vec& x);

class ElasticNetObjective final : public SplitObjective {
public:
  explicit ElasticNetObjective(ElasticNetProblem problem);

  const ElasticNetProblem& problem() const noexcept { return problem_; }

  double f(const Vec& x) const override { return loss_eval(problem_, x); }
  Vec grad_f(const Vec& x) const override { return loss_grad(problem_, x); }
  double g(const Vec& x) const override { return problem_.lambda * x.squaredNorm(); }
  Vec grad_g(const Vec& x) const override { return 2.0 * problem_.lambda * x; }
  Vec partial_oracle(const Vec&, const Vec& grad_f_x) const override {
    return en_oracle(problem_, grad_f_x);
  }
  /// Closed form for the squared loss; nullopt otherwise.
  std::optional<double> exact_step(const Vec& x, const Vec& dx) const override;
  std::optional<double> extra_residual(const Vec& x) const override {
    return fixed_point_residual(problem_, x);
  }

  Vec linear_oracle(const Vec& grad) const { return l1_lmo(grad, problem_.tau); }

private:
  ElasticNetProblem problem_;
};

struct ProjectedGradientConfig {
  int max_iter = 10000;
  double residual_tol = 1e-5;
  double armijo_sigma = 1e-4;
  double armijo_beta = 0.5;
  /// Nonmonotone memory for SPG.
  int memory = 10;
  double step_min = 1e-10;
  double step_max = 1e10;
  bool record_trace = true;
};

/// Spectral projected gradient: Barzilai-Borwein step, nonmonotone line
/// search over the last `memory` objective values.
SolveResult spg_solve(const ElasticNetProblem& p, const Vec& x0,
                      const ProjectedGradientConfig& cfg = {});

/// Projected gradient along d = P(x - grad F) - x with monotone Armijo.
SolveResult pg_solve(const ElasticNetProblem& p, const Vec& x0,
                     const ProjectedGradientConfig& cfg = {});

struct Dataset {
  /// Raw features as generated or read from disk.
  Mat raw;
  /// Features standardized with the training-row statistics.
  Mat Z;
  Vec y;
  /// Rows [0, n_train) are the training split.
  Eigen::Index n_train = 0;
  Vec mean;
  Vec stddev;

  Mat train_Z() const { return Z.topRows(n_train); }
  Vec train_y() const { return y.head(n_train); }
  Mat test_Z() const { return Z.bottomRows(Z.rows() - n_train); }
  Vec test_y() const { return y.tail(y.size() - n_train); }
};

/// Builds a Dataset from raw rows: first floor(0.8 n) rows train, features
/// standardized by training mean and standard deviation.
Dataset make_dataset(Mat raw, Vec y);

/// Two-class Gaussian toy problem: T relevant features distributed
/// N(+-mu, A A^T / T) with mu in {-1,+1}^T and A a T x T standard normal
/// draw, followed by d - T irrelevant N(0, 1) features.
Dataset make_toy_classification(int n_samples, int dims, int relevant, std::uint64_t seed);

/// Header row, numeric columns, one label column (values in {-1, +1} or
/// {0, 1}). Throws ParseError with the line and column of bad fields.
Dataset load_csv_dataset(const std::filesystem::path& path, std::string_view label_column);
void save_csv_dataset(const std::filesystem::path& path, const Dataset& data,
                      std::string_view label_column = "label");

/// Fraction of rows with sign(Z x) == y.
double accuracy(const Mat& Z, const Vec& y, const Vec& x);

}  // namespace gcgs::enet
