#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bmrsw/detail/transport.hpp"
#include "bmrsw/measures.hpp"

namespace bmrsw {

namespace {

// Dense transportation simplex (MODI). Exact up to floating-point arithmetic,
// which is what the test oracles need; entropic solvers are out of scope.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::vector<double> cost)
      : s_(std::move(supply)), d_(std::move(demand)), c_(std::move(cost)),
        rows_(s_.size()), cols_(d_.size()) {}

  double solve() {
    balance();
    northwest_corner();
    const std::size_t nodes = rows_ + cols_;
    u_.assign(rows_, 0.0);
    v_.assign(cols_, 0.0);
    double cmax = 1.0;
    for (double c : c_) cmax = std::max(cmax, std::abs(c));
    const double eps = 1e-12 * cmax;
    const std::size_t pivot_cap = 200 * nodes + 20000;
    for (std::size_t pivot = 0;; ++pivot) {
      if (pivot > pivot_cap)
        throw std::runtime_error("transportation simplex exceeded pivot cap");
      compute_duals();
      auto [ei, ej, rc] = entering_arc();
      if (rc >= -eps) break;
      pivot_on(ei, ej);
    }
    double total = 0.0;
    for (const auto& e : basis_) total += e.flow * cost(e.i, e.j);
    return std::max(total, 0.0);
  }

 private:
  struct Edge {
    std::size_t i, j;
    double flow;
  };

  double cost(std::size_t i, std::size_t j) const { return c_[i * cols_ + j]; }

  void balance() {
    double ss = 0.0, sd = 0.0;
    for (double x : s_) ss += x;
    for (double x : d_) sd += x;
    if (std::abs(ss - sd) > 1e-9)
      throw std::invalid_argument("transport marginals must have equal total mass");
    d_.back() = std::max(d_.back() + ss - sd, 0.0);  // absorb rounding residue
  }

  void northwest_corner() {
    basis_.clear();
    basis_.reserve(rows_ + cols_ - 1);
    std::size_t i = 0, j = 0;
    double a = s_[0], b = d_[0];
    while (true) {
      double f = std::max(std::min(a, b), 0.0);
      basis_.push_back({i, j, f});
      a -= f;
      b -= f;
      if (i == rows_ - 1 && j == cols_ - 1) break;
      if (a <= 0.0 && i < rows_ - 1) {
        ++i;
        a = s_[i];
      } else if (j < cols_ - 1) {
        ++j;
        b = d_[j];
      } else {
        ++i;
        a = s_[i];
      }
    }
    rebuild_adjacency();
  }

  void rebuild_adjacency() {
    adj_.assign(rows_ + cols_, {});
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adj_[basis_[e].i].push_back(e);
      adj_[rows_ + basis_[e].j].push_back(e);
    }
  }

  // Basis edges form a spanning tree; BFS from row 0 fixes the dual gauge.
  void compute_duals() {
    std::vector<char> seen(rows_ + cols_, 0);
    std::queue<std::size_t> q;
    u_[0] = 0.0;
    seen[0] = 1;
    q.push(0);
    while (!q.empty()) {
      std::size_t node = q.front();
      q.pop();
      for (std::size_t e : adj_[node]) {
        const Edge& ed = basis_[e];
        std::size_t row = ed.i, col = rows_ + ed.j;
        std::size_t other = (node == row) ? col : row;
        if (seen[other]) continue;
        if (other == col)
          v_[ed.j] = cost(ed.i, ed.j) - u_[ed.i];
        else
          u_[ed.i] = cost(ed.i, ed.j) - v_[ed.j];
        seen[other] = 1;
        q.push(other);
      }
    }
  }

  std::tuple<std::size_t, std::size_t, double> entering_arc() const {
    double best = 0.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* row = c_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        double rc = row[j] - u_[i] - v_[j];
        if (rc < best) {
          best = rc;
          bi = i;
          bj = j;
        }
      }
    }
    return {bi, bj, best};
  }

  void pivot_on(std::size_t ei, std::size_t ej) {
    // Unique tree path from the entering row node to the entering col node.
    const std::size_t nodes = rows_ + cols_;
    std::vector<std::size_t> parent_edge(nodes, SIZE_MAX), parent_node(nodes, SIZE_MAX);
    std::vector<char> seen(nodes, 0);
    std::queue<std::size_t> q;
    std::size_t src = ei, dst = rows_ + ej;
    seen[src] = 1;
    q.push(src);
    while (!q.empty() && !seen[dst]) {
      std::size_t node = q.front();
      q.pop();
      for (std::size_t e : adj_[node]) {
        const Edge& ed = basis_[e];
        std::size_t other = (node == ed.i) ? rows_ + ed.j : ed.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = e;
        parent_node[other] = node;
        q.push(other);
      }
    }
    if (!seen[dst]) throw std::runtime_error("transport basis is not a spanning tree");

    std::vector<std::size_t> path;  // edges from dst back to src
    for (std::size_t node = dst; node != src; node = parent_node[node])
      path.push_back(parent_edge[node]);

    // Cycle = entering arc (+delta) plus the path; signs alternate so that the
    // edge incident to the entering column is the first minus edge.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t leave_pos = SIZE_MAX;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      double f = basis_[path[k]].flow;
      if (f < delta) {
        delta = f;
        leave_pos = k;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k % 2 == 0)
        basis_[path[k]].flow -= delta;
      else
        basis_[path[k]].flow += delta;
    }
    basis_[path[leave_pos]] = {ei, ej, delta};
    rebuild_adjacency();
  }

  std::vector<double> s_, d_, c_;
  std::size_t rows_, cols_;
  std::vector<Edge> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
};

}  // namespace

namespace detail {

double transport_cost(std::vector<double> supply, std::vector<double> demand,
                      std::vector<double> cost) {
  if (supply.size() == 1) {
    double total = 0.0;
    for (std::size_t j = 0; j < demand.size(); ++j) total += demand[j] * cost[j];
    return total;
  }
  if (demand.size() == 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < supply.size(); ++i) total += supply[i] * cost[i];
    return total;
  }
  return TransportSimplex(std::move(supply), std::move(demand), std::move(cost)).solve();
}

}  // namespace detail

double w2sq_discrete(const WeightedDiscreteMeasure& a, const WeightedDiscreteMeasure& b,
                     std::size_t max_combined_atoms) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("w2sq_discrete requires measures of equal dimension");
  if (a.size() + b.size() > max_combined_atoms)
    throw std::length_error(
        "w2sq_discrete: combined atom count " + std::to_string(a.size() + b.size()) +
        " exceeds cap " + std::to_string(max_combined_atoms) +
        "; subsample the measures before the exact solve");

  // Zero-weight atoms cannot carry flow; drop them up front.
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.weights()[i] > 0.0) ia.push_back(i);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b.weights()[j] > 0.0) ib.push_back(j);

  std::vector<double> supply(ia.size()), demand(ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) supply[i] = a.weights()[ia[i]];
  for (std::size_t j = 0; j < ib.size(); ++j) demand[j] = b.weights()[ib[j]];
  std::vector<double> cost(ia.size() * ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) {
    auto pa = a.atom(ia[i]);
    for (std::size_t j = 0; j < ib.size(); ++j)
      cost[i * ib.size() + j] = squared_distance(pa, b.atom(ib[j]));
  }
  return detail::transport_cost(std::move(supply), std::move(demand), std::move(cost));
}

}  // namespace bmrsw
