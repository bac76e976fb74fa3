#include "gne/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include <Eigen/Dense>

#include "gne/error.hpp"

namespace gne {

bool is_connected(std::size_t n, std::span<const Edge> edges) {
  if (n == 0) return true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n;
}

Graph::Graph(std::size_t n, std::span<const Edge> edges) : adjacency_(n) {
  if (n < 2) throw Error(ErrorCode::ValidationError, "graph needs at least 2 vertices");
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") outside 0.." +
                      std::to_string(n - 1));
    }
    if (a == b) throw Error(ErrorCode::ValidationError, "self-loop at vertex " + std::to_string(a));
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(adjacency_[v].begin(), adjacency_[v].end());
    if (adjacency_[v].empty()) {
      throw Error(ErrorCode::ValidationError, "vertex " + std::to_string(v) + " has degree 0");
    }
  }
}

const std::vector<std::size_t>& Graph::neighbors(std::size_t i) const {
  if (i >= adjacency_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(i));
  }
  return adjacency_[i];
}

bool Graph::is_connected() const { return gne::is_connected(size(), edges_); }

double Graph::normalized_laplacian_max_eig() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (auto [a, b] : edges_) {
    const double w = 1.0 / std::sqrt(static_cast<double>(degree(a) * degree(b)));
    lap(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = -w;
    lap(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = -w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace gne
