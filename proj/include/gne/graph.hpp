#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gne {

using Edge = std::pair<std::size_t, std::size_t>;

/// BFS from vertex 0 over a raw edge list. Out-of-range endpoints are ignored.
[[nodiscard]] bool is_connected(std::size_t n, std::span<const Edge> edges);

/// Undirected communication graph over players 0..n-1.
///
/// Construction rejects self-loops, out-of-range endpoints and vertices of
/// degree zero (the update rules divide by |N_i|). Duplicate edges collapse.
/// Connectivity is not enforced here; callers check it with is_connected().
class Graph {
 public:
  Graph(std::size_t n, std::span<const Edge> edges);

  [[nodiscard]] std::size_t size() const noexcept { return adjacency_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const;
  [[nodiscard]] std::size_t degree(std::size_t i) const { return neighbors(i).size(); }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] bool is_connected() const;

  /// Largest eigenvalue of D^{-1/2} (D - H) D^{-1/2}; always in [0, 2].
  [[nodiscard]] double normalized_laplacian_max_eig() const;

 private:
  std::vector<std::vector<std::size_t>> adjacency_;  // sorted
  std::vector<Edge> edges_;                          // i < j, sorted
};

}  // namespace gne
