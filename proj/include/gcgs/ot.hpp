#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "gcgs/numerics.hpp"
#include "gcgs/solver.hpp"

namespace gcgs::ot {

/// Nonnegative weights summing to one.
class Histogram {
public:
  /// Validates nonnegativity and |sum - 1| <= 1e-12.
  explicit Histogram(Vec weights);
  static Histogram uniform(Eigen::Index n);

  const Vec& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

private:
  Vec weights_;
};

/// Coupling gamma (rows: source, cols: target) with declared marginals.
/// Returns max(||gamma 1 - mu_s||_inf, ||gamma^T 1 - mu_t||_inf).
double marginal_violation(const Mat& gamma, const Histogram& mu_s, const Histogram& mu_t);

/// Product coupling mu_s mu_t^T.
Mat product_coupling(const Histogram& mu_s, const Histogram& mu_t);

/// min <gamma, C> + lambda_ent * Omega_IT(gamma) + lambda_lap * Omega_Lap(gamma)
/// over the transport polytope of (mu_s, mu_t).
struct TransportProblem {
  Mat cost;
  Histogram mu_s;
  Histogram mu_t;
  double lambda_ent = 1.7e-2;
  double lambda_lap = 1e3;
  Mat lap_s;  // r x r
  Mat lap_t;  // c x c
  Mat xs;     // r x d source positions
  Mat xt;     // c x d target positions
  double lambda_s = 1.0;
  double lambda_t = 1.0;

  Eigen::Index rows() const { return cost.rows(); }
  Eigen::Index cols() const { return cost.cols(); }
  /// Throws DomainError on inconsistent shapes or parameters.
  void validate() const;
};

// ---- regularizers ----------------------------------------------------------

/// sum gamma_ij log gamma_ij with 0 log 0 = 0.
double negentropy(const Mat& gamma);
/// 1 + log gamma_ij; throws DomainError naming the first nonpositive entry.
Mat negentropy_grad(const Mat& gamma);

/// lambda_s Tr(Xt^T g^T Ls g Xt) + lambda_t Tr(Xs^T g Lt g^T Xs).
double laplacian_reg(const Mat& gamma, const TransportProblem& p);
/// lambda_s (Ls + Ls^T) g Xt Xt^T + lambda_t Xs Xs^T g (Lt + Lt^T).
Mat laplacian_reg_grad(const Mat& gamma, const TransportProblem& p);

double ot_objective(const Mat& gamma, const TransportProblem& p);

// ---- subproblem solvers ----------------------------------------------------

struct SinkhornOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  /// Sweeps without reaching tol before switching to Newton steps on the
  /// dual potentials. Clustered costs make plain scaling crawl.
  int newton_after = 200;
  int newton_max_steps = 50;
};

struct SinkhornResult {
  Mat plan;
  int iterations = 0;
  int newton_steps = 0;
  double violation = 0.0;
  bool log_domain = false;
};

/// argmin <gamma, cost> + lambda sum gamma log gamma over the transport
/// polytope, by Sinkhorn-Knopp scaling of K = exp(-cost / lambda - 1).
/// Falls back to log-domain iterations when K underflows or the scalings
/// overflow, and finishes with Newton steps on the dual when scaling stalls.
/// Throws ConvergenceError if the marginal violation is still above tol.
SinkhornResult sinkhorn_solve(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t,
                              double lambda, SinkhornOptions opts = {});

inline Mat sinkhorn(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t,
                    double lambda, SinkhornOptions opts = {}) {
  return sinkhorn_solve(cost, mu_s, mu_t, lambda, opts).plan;
}

/// Only the log-domain iteration; exposed for testing.
SinkhornResult sinkhorn_log_domain(const Mat& cost, const Histogram& mu_s,
                                   const Histogram& mu_t, double lambda,
                                   SinkhornOptions opts = {});

struct TransportLmoResult {
  Mat plan;
  /// Dual potentials: u_i + v_j = cost_ij on the basis.
  Vec u;
  Vec v;
  double min_reduced_cost = 0.0;
  int pivots = 0;
};

/// Exact linear minimizer over the transport polytope: transportation simplex
/// with a north-west corner start and MODI (u-v) pricing.
TransportLmoResult transport_simplex(const Mat& cost, const Histogram& mu_s,
                                     const Histogram& mu_t);

inline Mat transport_lmo(const Mat& cost, const Histogram& mu_s, const Histogram& mu_t) {
  return transport_simplex(cost, mu_s, mu_t).plan;
}

// ---- split objective -------------------------------------------------------

/// f = <gamma, C> + lambda_lap Omega_Lap, g = lambda_ent Omega_IT. Points are
/// the column-major vectorization of gamma.
class TransportObjective final : public SplitObjective {
public:
  explicit TransportObjective(TransportProblem problem, SinkhornOptions sinkhorn = {});

  const TransportProblem& problem() const noexcept { return problem_; }

  double f(const Vec& x) const override;
  Vec grad_f(const Vec& x) const override;
  double g(const Vec& x) const override;
  Vec grad_g(const Vec& x) const override;
  /// Sinkhorn on the adjusted cost C + lambda_lap grad Omega_Lap(gamma_k).
  Vec partial_oracle(const Vec& x, const Vec& grad_f_x) const override;
  /// Marginal violation of the current plan.
  std::optional<double> extra_residual(const Vec& x) const override;

  /// Full-linearization oracle for the classic conditional gradient.
  Vec linear_oracle(const Vec& direction) const;

  /// Sinkhorn solution of the unadjusted cost; feasible and strictly positive.
  Vec initial_point() const;

  Mat as_plan(const Vec& x) const;
  static Vec flatten(const Mat& gamma);

private:
  TransportProblem problem_;
  SinkhornOptions sinkhorn_;
};

inline TransportObjective ot_split(TransportProblem problem) {
  return TransportObjective(std::move(problem));
}

// ---- data ------------------------------------------------------------------

/// Binary kNN graph Laplacian of the rows of X, symmetrized by max(W, W^T).
/// Ties in distance are broken by lower index.
Mat knn_laplacian(const Mat& points, int k);

struct ClusterData {
  Mat xs;
  Mat xt;
  Histogram mu_s;
  Histogram mu_t;
};

/// 2-D Gaussian blobs; target blobs are a rotated and shifted copy of the
/// source blobs. Point i belongs to cluster i mod n_clusters.
ClusterData make_cluster_data(int ns, int nt, int n_clusters, double noise,
                              std::uint64_t seed);

/// Squared Euclidean cost between rows of xs and xt, scaled to max 1.
Mat sq_euclidean_cost(const Mat& xs, const Mat& xt);

struct ProblemParams {
  double lambda_ent = 1.7e-2;
  double lambda_lap = 1e3;
  int k_neighbors = 10;
};

TransportProblem make_transport_problem(const ClusterData& data, const ProblemParams& params);

// ---- serialization ---------------------------------------------------------

/// Dense matrix CSV: first line "rows,cols", then one line per row.
void write_matrix_csv(const std::filesystem::path& path, const Mat& m);
Mat read_matrix_csv(const std::filesystem::path& path);

}  // namespace gcgs::ot
