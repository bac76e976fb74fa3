#pragma once

// Small game and graph builders shared by the test binaries.

#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/scenario.hpp"

namespace gne::testing {

/// J_i = 1/2 q_i x_i^2 + lin_i x_i with one shared block (A, b).
inline GameSpec separable_quadratic(const std::vector<double>& q, const std::vector<double>& lin,
                                    const Matrix& a, const Vector& b, ActionInterval box) {
  const std::size_t n = q.size();
  const auto en = static_cast<Eigen::Index>(n);
  GameSpec g;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    QuadraticCost c{Matrix::Zero(en, en), Vector::Zero(en), 0.0};
    c.q(ii, ii) = q[i];
    c.lin[ii] = lin[i];
    g.actions.push_back(box);
    g.costs.emplace_back(c);
    g.constraints.push_back({a, b, i});
  }
  return g;
}

/// J_i = 1/2 x_i^2, x_1 + x_2 = 2 on [-10, 10]^2. Solution x = (1, 1), lambda = -1.
inline GameSpec constrained_pair() {
  Matrix a(1, 2);
  a << 1.0, 1.0;
  return separable_quadratic({1.0, 1.0}, {0.0, 0.0}, a, Vector::Constant(1, 2.0), {-10.0, 10.0});
}

/// J_i = (x_i - a_i)^2 (q = 2, lin = -2a) with an inert zero constraint row.
inline GameSpec decoupled(const std::vector<double>& targets, ActionInterval box) {
  std::vector<double> q(targets.size(), 2.0);
  std::vector<double> lin;
  for (double t : targets) lin.push_back(-2.0 * t);
  const auto n = static_cast<Eigen::Index>(targets.size());
  return separable_quadratic(q, lin, Matrix::Zero(1, n), Vector::Zero(1), box);
}

inline std::vector<Edge> path_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline Graph path_graph(std::size_t n) { return Graph(n, path_edges(n)); }

/// Random spanning tree plus independent extra edges with probability p.
inline std::vector<Edge> random_connected_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::vector<Edge> e;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    e.emplace_back(parent(rng), v);
  }
  std::bernoulli_distribution extra(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (extra(rng)) e.emplace_back(i, j);
    }
  }
  return e;
}

/// Disjoint-set connectivity, independent of the BFS in the library.
inline bool union_find_connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = n;
  for (auto [a, b] : edges) {
    const auto ra = root(a);
    const auto rb = root(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

/// Five users on three links; user 1 crosses links 0 and 1. Coupling x_0 + x_2 = 8.
inline WanetScenario wanet_five_user() {
  WanetScenario s;
  s.n_links = 3;
  s.capacities = {15.0, 15.0, 15.0};
  s.kappa = 10.0;
  s.chi = std::vector<double>(5, 15.0);
  s.routes = {{0}, {0, 1}, {1}, {2}, {2}};
  s.bounds = std::vector<ActionInterval>(5, ActionInterval{0.0, 10.0});
  s.coupling = {{{0, 2}, 8.0}};
  return s;
}

/// Random quadratic game with game map F(x) = M x + q, M = D + 0.3 R (D
/// diagonal in [1, 3], R off-diagonal uniform in [-1, 1]), and m shared
/// random rows with b = A x_t. Box [-10, 10]. The solution may still hit
/// the box; callers reject such draws.
struct RandomQuadratic {
  GameSpec game;
  Matrix m;  // game map Jacobian
};

inline RandomQuadratic random_quadratic(std::size_t n, std::size_t rows, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> diag(1.0, 3.0);
  const auto en = static_cast<Eigen::Index>(n);
  const auto er = static_cast<Eigen::Index>(rows);
  Matrix m(en, en);
  for (Eigen::Index i = 0; i < en; ++i)
    for (Eigen::Index j = 0; j < en; ++j) m(i, j) = i == j ? diag(rng) : 0.3 * unit(rng);
  Matrix a(er, en);
  for (Eigen::Index r = 0; r < er; ++r)
    for (Eigen::Index j = 0; j < en; ++j) a(r, j) = unit(rng);
  Vector target(en);
  for (Eigen::Index j = 0; j < en; ++j) target[j] = 3.0 * unit(rng);
  const Vector b = a * target;

  RandomQuadratic out{GameSpec{}, m};
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    // Row i and column i of Q^(i) carry M(i, .) so that sym(Q^(i)) row i = M row i.
    QuadraticCost c{Matrix::Zero(en, en), Vector::Zero(en), 0.0};
    for (Eigen::Index j = 0; j < en; ++j) {
      if (j == ii) continue;
      c.q(ii, j) = m(ii, j);
      c.q(j, ii) = m(ii, j);
    }
    c.q(ii, ii) = m(ii, ii);
    c.lin[ii] = 2.0 * unit(rng);
    out.game.actions.push_back({-10.0, 10.0});
    out.game.costs.emplace_back(c);
    out.game.constraints.push_back({a, b, i});
  }
  return out;
}

/// Strong monotonicity over squared Lipschitz constant of x -> M x.
inline double cocoercivity_bound(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const double mu = eig.eigenvalues().minCoeff();
  const double lip = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  return mu / (lip * lip);
}

}  // namespace gne::testing
