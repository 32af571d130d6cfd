#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gcgs/error.hpp"
#include "gcgs/ot.hpp"

namespace gcgs::ot {

Mat knn_laplacian(const Mat& points, int k) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k >= n) throw DomainError("knn_laplacian: need 1 <= k < number of points");

  Mat w = Mat::Zero(n, n);
  std::vector<Eigen::Index> order(n);
  std::vector<double> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist[j] = (points.row(i) - points.row(j)).squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b]; });
    int taken = 0;
    for (const Eigen::Index j : order) {
      if (j == i) continue;
      w(i, j) = 1.0;
      if (++taken == k) break;
    }
  }
  w = w.cwiseMax(w.transpose());
  Mat lap = -w;
  lap.diagonal() = w.rowwise().sum();
  return lap;
}

ClusterData make_cluster_data(int ns, int nt, int n_clusters, double noise,
                              std::uint64_t seed) {
  if (n_clusters < 1 || ns < n_clusters || nt < n_clusters) {
    throw DomainError("make_cluster_data: need ns, nt >= n_clusters >= 1");
  }
  if (!(noise >= 0.0)) throw DomainError("make_cluster_data: noise must be >= 0");

  // Small coordinates keep lambda_lap * grad Omega_Lap comparable to the
  // normalized cost; the Laplacian term grows with the square of the scale.
  Rng rng(seed);
  Mat centers(n_clusters, 2);
  for (int c = 0; c < n_clusters; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / n_clusters;
    centers(c, 0) = 0.2 * std::cos(angle) + 0.05 * rng.normal();
    centers(c, 1) = 0.2 * std::sin(angle) + 0.05 * rng.normal();
  }

  // Target blobs: rotate by 30 degrees and shift.
  const double rot = std::numbers::pi / 6.0;
  Eigen::Matrix2d rotation;
  rotation << std::cos(rot), -std::sin(rot), std::sin(rot), std::cos(rot);
  const Eigen::RowVector2d shift(0.15, 0.05);
  const Mat target_centers = (centers * rotation.transpose()).rowwise() + shift;

  const auto sample = [&](const Mat& ctr, int count) {
    Mat x(count, 2);
    for (int i = 0; i < count; ++i) {
      const int c = i % n_clusters;
      const double dx = rng.normal();
      const double dy = rng.normal();
      x(i, 0) = ctr(c, 0) + noise * dx;
      x(i, 1) = ctr(c, 1) + noise * dy;
    }
    return x;
  };

  Mat xs = sample(centers, ns);
  Mat xt = sample(target_centers, nt);
  return ClusterData{std::move(xs), std::move(xt), Histogram::uniform(ns),
                     Histogram::uniform(nt)};
}

Mat sq_euclidean_cost(const Mat& xs, const Mat& xt) {
  if (xs.cols() != xt.cols()) throw DomainError("sq_euclidean_cost: dimension mismatch");
  Mat c(xs.rows(), xt.rows());
  for (Eigen::Index j = 0; j < xt.rows(); ++j) {
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      c(i, j) = (xs.row(i) - xt.row(j)).squaredNorm();
    }
  }
  const double mx = c.maxCoeff();
  if (mx > 0.0) c /= mx;
  return c;
}

TransportProblem make_transport_problem(const ClusterData& data, const ProblemParams& params) {
  TransportProblem p{
      .cost = sq_euclidean_cost(data.xs, data.xt),
      .mu_s = data.mu_s,
      .mu_t = data.mu_t,
      .lambda_ent = params.lambda_ent,
      .lambda_lap = params.lambda_lap,
      .lap_s = knn_laplacian(data.xs, params.k_neighbors),
      .lap_t = knn_laplacian(data.xt, params.k_neighbors),
      .xs = data.xs,
      .xt = data.xt,
  };
  p.validate();
  return p;
}

void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << m.rows() << ',' << m.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
      if (j > 0) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

Mat read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());

  const auto parse_fields = [](const std::string& line, int lineno) {
    std::vector<double> vals;
    size_t pos = 0;
    int col = 1;
    while (pos <= line.size()) {
      size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const auto res = std::from_chars(line.data() + pos, line.data() + end, v);
      if (res.ec != std::errc{} || res.ptr != line.data() + end) {
        throw ParseError("line " + std::to_string(lineno) + ", column " +
                             std::to_string(col) + ": not a number",
                         lineno, col);
      }
      vals.push_back(v);
      pos = end + 1;
      ++col;
    }
    return vals;
  };

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing dimension header", 1, 1);
  const auto dims = parse_fields(line, 1);
  if (dims.size() != 2 || dims[0] < 0 || dims[1] < 0) {
    throw ParseError("line 1: expected 'rows,cols'", 1, 1);
  }
  const auto rows = static_cast<Eigen::Index>(dims[0]);
  const auto cols = static_cast<Eigen::Index>(dims[1]);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int lineno = static_cast<int>(i) + 2;
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno, 1);
    const auto vals = parse_fields(line, lineno);
    if (static_cast<Eigen::Index>(vals.size()) != cols) {
      throw ParseError("line " + std::to_string(lineno) + ": wrong number of fields", lineno,
                       static_cast<int>(vals.size()));
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = vals[j];
  }
  return m;
}

}  // namespace gcgs::ot
