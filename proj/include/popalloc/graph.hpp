#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "popalloc/errors.hpp"

namespace popalloc {

/// Undirected communication topology over agents 0..n-1. Immutable after
/// construction; neighbor sets are symmetric by construction.
class Graph {
 public:
  Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n < 1) throw std::invalid_argument("graph: agent count must be >= 1");
    std::set<std::pair<int, int>> seen;
    adjacency_.resize(static_cast<size_t>(n));
    for (auto [i, j] : edges) {
      if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::invalid_argument("graph: edge endpoint out of range: {" +
                                    std::to_string(i) + "," + std::to_string(j) + "}");
      if (i == j)
        throw std::invalid_argument("graph: self-loop at agent " + std::to_string(i));
      auto e = std::minmax(i, j);
      if (!seen.insert(e).second)
        throw std::invalid_argument("graph: duplicate edge {" + std::to_string(e.first) +
                                    "," + std::to_string(e.second) + "}");
      edges_.push_back(e);
      adjacency_[static_cast<size_t>(i)].push_back(j);
      adjacency_[static_cast<size_t>(j)].push_back(i);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
  }

  static Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, std::move(e));
  }

  static Graph ring(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return Graph(n, std::move(e));
  }

  static Graph path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph(n, std::move(e));
  }

  int size() const { return n_; }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  const std::vector<int>& neighbors(int i) const {
    check_agent(i);
    return adjacency_[static_cast<size_t>(i)];
  }

  int degree(int i) const {
    check_agent(i);
    return static_cast<int>(adjacency_[static_cast<size_t>(i)].size());
  }

  int max_degree() const {
    int d = 0;
    for (const auto& nb : adjacency_) d = std::max(d, static_cast<int>(nb.size()));
    return d;
  }

 private:
  void check_agent(int i) const {
    if (i < 0 || i >= n_)
      throw std::invalid_argument("graph: agent id " + std::to_string(i) +
                                  " out of range [0," + std::to_string(n_) + ")");
  }

  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

/// Population-weighted Laplacian L(p): l_ij = -p_i p_j on edges, zero on
/// non-edges, diagonal fixed by zero row sums. Symmetric PSD for p >= 0.
inline Eigen::MatrixXd laplacian(const Graph& g, const Eigen::VectorXd& p) {
  if (p.size() != g.size())
    throw std::invalid_argument("laplacian: population vector length " +
                                std::to_string(p.size()) + " != agent count " +
                                std::to_string(g.size()));
  if ((p.array() < 0.0).any())
    throw std::domain_error("laplacian: negative population component");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.size(), g.size());
  for (auto [i, j] : g.edges()) {
    const double w = p[i] * p[j];
    L(i, j) -= w;
    L(j, i) -= w;
    L(i, i) += w;
    L(j, j) += w;
  }
  return L;
}

/// Second-smallest eigenvalue of a symmetric Laplacian; positive iff the
/// (weighted) graph is connected.
inline double fiedler_value(const Eigen::MatrixXd& laplacian_matrix) {
  if (laplacian_matrix.rows() < 2)
    throw std::domain_error("fiedler_value: undefined for n < 2");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian_matrix,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw numerical_error("fiedler_value: eigen-solver failed to converge");
  return solver.eigenvalues()[1];
}

/// Connected components as disjoint sorted id sets covering all agents,
/// ordered by smallest member. Topology only: weights play no role.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<int> parent(static_cast<size_t>(g.size()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (auto [i, j] : g.edges()) {
    int ri = find(i), rj = find(j);
    if (ri != rj) parent[static_cast<size_t>(std::max(ri, rj))] = std::min(ri, rj);
  }
  std::vector<std::vector<int>> components;
  std::vector<int> root_slot(static_cast<size_t>(g.size()), -1);
  for (int i = 0; i < g.size(); ++i) {
    const int r = find(i);
    if (root_slot[static_cast<size_t>(r)] < 0) {
      root_slot[static_cast<size_t>(r)] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[static_cast<size_t>(root_slot[static_cast<size_t>(r)])].push_back(i);
  }
  return components;
}

struct SpectralNormBound {
  double eta = 0.0;
  bool edgeless = false;  // L == 0 identically; eta 0 is exact, flagged anyway
};

/// Certified Gershgorin bound on sup over the simplex of ||L(p)||_2:
/// every off-diagonal weight obeys p_i p_j <= (P_tot/2)^2, so
/// eta = 2 * max_i |N_i| * P_tot^2 / 4.
inline SpectralNormBound spectral_norm_bound(const Graph& g, double total_population) {
  if (total_population <= 0.0)
    throw std::domain_error("spectral_norm_bound: P_tot must be positive");
  if (g.edges().empty()) return {0.0, true};
  const double max_weight = total_population * total_population / 4.0;
  return {2.0 * g.max_degree() * max_weight, false};
}

}  // namespace popalloc
