// Transportation simplex on the bipartite supply/demand graph. Nodes
// 0..m-1 are rows (sources), m..m+n-1 are columns (targets); a basis is a
// spanning tree of m+n-1 cells.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gcgs/error.hpp"
#include "gcgs/ot.hpp"

namespace gcgs::ot {

namespace {

// Perturbation that keeps every basis nondegenerate: no partial sum of
// supplies equals a partial sum of demands.
constexpr double kPerturbation = 1e-12;
constexpr double kOptimalityTol = 1e-12;

struct Cell {
  int row;
  int col;
};

class TransportBasis {
public:
  TransportBasis(int m, int n) : m_(m), n_(n), slot_(static_cast<size_t>(m) * n, -1) {}

  void add(int i, int j, double flow) {
    slot_[index(i, j)] = static_cast<int>(cells_.size());
    cells_.push_back({i, j});
    flows_.push_back(flow);
  }

  void replace(int leaving_slot, int i, int j) {
    const Cell old = cells_[leaving_slot];
    slot_[index(old.row, old.col)] = -1;
    cells_[leaving_slot] = {i, j};
    flows_[leaving_slot] = 0.0;
    slot_[index(i, j)] = leaving_slot;
  }

  bool is_basic(int i, int j) const { return slot_[index(i, j)] >= 0; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::vector<double>& flows() { return flows_; }

  // Adjacency lists of the tree; entries are basis slots.
  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(m_ + n_);
    for (size_t s = 0; s < cells_.size(); ++s) {
      adj[cells_[s].row].push_back(static_cast<int>(s));
      adj[m_ + cells_[s].col].push_back(static_cast<int>(s));
    }
    return adj;
  }

  // u_i + v_j = c_ij on every basic cell, with u_0 = 0.
  void potentials(const Mat& cost, Vec& u, Vec& v) const {
    const auto adj = adjacency();
    std::vector<char> seen(m_ + n_, 0);
    std::vector<int> stack{0};
    u.setZero(m_);
    v.setZero(n_);
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (const int s : adj[node]) {
        const Cell c = cells_[s];
        if (node < m_) {
          if (seen[m_ + c.col]) continue;
          v[c.col] = cost(c.row, c.col) - u[c.row];
          seen[m_ + c.col] = 1;
          stack.push_back(m_ + c.col);
        } else {
          if (seen[c.row]) continue;
          u[c.row] = cost(c.row, c.col) - v[c.col];
          seen[c.row] = 1;
          stack.push_back(c.row);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw DegeneracyError("transport_simplex: basis is not a spanning tree");
    }
  }

  // Basis slots on the tree path from row node i to column node j, in order
  // starting at row i.
  std::vector<int> path(int i, int j) const {
    const auto adj = adjacency();
    const int target = m_ + j;
    std::vector<int> parent_slot(m_ + n_, -2);
    std::vector<int> parent_node(m_ + n_, -1);
    std::vector<int> queue{i};
    parent_slot[i] = -1;
    for (size_t q = 0; q < queue.size() && parent_slot[target] == -2; ++q) {
      const int node = queue[q];
      for (const int s : adj[node]) {
        const Cell c = cells_[s];
        const int next = node < m_ ? m_ + c.col : c.row;
        if (parent_slot[next] != -2) continue;
        parent_slot[next] = s;
        parent_node[next] = node;
        queue.push_back(next);
      }
    }
    if (parent_slot[target] == -2) {
      throw DegeneracyError("transport_simplex: entering cell not connected to basis");
    }
    std::vector<int> slots;
    for (int node = target; node != i; node = parent_node[node]) {
      slots.push_back(parent_slot[node]);
    }
    std::reverse(slots.begin(), slots.end());
    return slots;
  }

  // Recompute flows on the fixed tree for the given supplies and demands by
  // repeatedly peeling leaves.
  void solve_flows(const Vec& supply, const Vec& demand) {
    std::vector<double> rem(m_ + n_);
    for (int i = 0; i < m_; ++i) rem[i] = supply[i];
    for (int j = 0; j < n_; ++j) rem[m_ + j] = demand[j];
    const auto adj = adjacency();
    std::vector<int> degree(m_ + n_);
    for (int k = 0; k < m_ + n_; ++k) degree[k] = static_cast<int>(adj[k].size());
    std::vector<char> done(cells_.size(), 0);
    std::vector<int> leaves;
    for (int k = 0; k < m_ + n_; ++k) {
      if (degree[k] == 1) leaves.push_back(k);
    }
    while (!leaves.empty()) {
      const int node = leaves.back();
      leaves.pop_back();
      if (degree[node] != 1) continue;
      int slot = -1;
      for (const int s : adj[node]) {
        if (!done[s]) slot = s;
      }
      if (slot < 0) continue;
      const Cell c = cells_[slot];
      const int other = node < m_ ? m_ + c.col : c.row;
      flows_[slot] = rem[node];
      rem[other] -= rem[node];
      rem[node] = 0.0;
      done[slot] = 1;
      degree[node] = 0;
      if (--degree[other] == 1) leaves.push_back(other);
    }
  }

private:
  size_t index(int i, int j) const { return static_cast<size_t>(i) * n_ + j; }

  int m_;
  int n_;
  std::vector<int> slot_;
  std::vector<Cell> cells_;
  std::vector<double> flows_;
};

}  // namespace

TransportLmoResult transport_simplex(const Mat& cost, const Histogram& mu_s,
                                     const Histogram& mu_t) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  if (m != mu_s.size() || n != mu_t.size()) {
    throw DomainError("transport_simplex: cost shape does not match marginals");
  }
  require_finite(cost, "transport_simplex cost");

  // Classic epsilon-perturbation: every supply gains eps, the last demand
  // absorbs m * eps.
  const double scale = 1.0 + m * kPerturbation;
  Vec supply = (mu_s.weights().array() + kPerturbation) / scale;
  Vec demand = mu_t.weights() / scale;
  demand[n - 1] += m * kPerturbation / scale;

  // North-west corner start.
  TransportBasis basis(m, n);
  {
    Vec a = supply;
    Vec b = demand;
    int i = 0;
    int j = 0;
    while (i < m && j < n) {
      const double q = std::min(a[i], b[j]);
      basis.add(i, j, q);
      a[i] -= q;
      b[j] -= q;
      if (i == m - 1 && j == n - 1) break;
      if (j == n - 1 || (i < m - 1 && a[i] <= b[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  TransportLmoResult out;
  Vec u;
  Vec v;
  const int max_pivots = 50 * m * n + 100;
  const double price_tol = kOptimalityTol * std::max(1.0, cost.cwiseAbs().maxCoeff());
  for (;;) {
    basis.potentials(cost, u, v);

    // Dantzig pricing: most negative reduced cost.
    double best = -price_tol;
    int bi = -1;
    int bj = -1;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        const double rc = cost(i, j) - u[i] - v[j];
        if (rc < best) {
          best = rc;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    if (out.pivots >= max_pivots) {
      throw DegeneracyError("transport_simplex: pivot limit reached (cycling)");
    }

    // Cycle: entering cell gains theta, path edges alternate -, +, -, ...
    // starting from the edge at row bi.
    const std::vector<int> path = basis.path(bi, bj);
    auto& flows = basis.flows();
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (size_t t = 0; t < path.size(); t += 2) {
      if (flows[path[t]] < theta) {
        theta = flows[path[t]];
        leaving = path[t];
      }
    }
    for (size_t t = 0; t < path.size(); ++t) {
      flows[path[t]] += (t % 2 == 0) ? -theta : theta;
    }
    basis.replace(leaving, bi, bj);
    basis.flows()[leaving] = theta;
    ++out.pivots;
  }

  // Flows on the optimal tree for the unperturbed marginals. Reduced costs do
  // not depend on flows, so the tree stays optimal once these are feasible.
  basis.solve_flows(mu_s.weights(), mu_t.weights());
  out.plan = Mat::Zero(m, n);
  const auto& cells = basis.cells();
  const auto& flows = basis.flows();
  for (size_t s = 0; s < cells.size(); ++s) {
    double q = flows[s];
    if (q < 0.0) {
      if (q < -1e-9) throw DegeneracyError("transport_simplex: infeasible cleaned flow");
      q = 0.0;
    }
    out.plan(cells[s].row, cells[s].col) = q;
  }

  out.u = u;
  out.v = v;
  out.min_reduced_cost = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      out.min_reduced_cost = std::min(out.min_reduced_cost, cost(i, j) - u[i] - v[j]);
    }
  }
  return out;
}

}  // namespace gcgs::ot
