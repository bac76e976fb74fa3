#pragma once

// Distance-to-equilibrium measures and the recorded iterate history.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/state.hpp"

namespace gne {

struct ResidualReport {
  std::size_t round = 0;
  double consensus_x = 0.0;           // max over edges of |x^i - x^j|_inf
  double consensus_lambda = 0.0;      // max over edges of |lambda^i - lambda^j|_inf
  double constraint_violation = 0.0;  // max_i |A^i x^i - b^i|_inf
  double kkt_stationarity = 0.0;      // max_i projected-gradient residual
  double step = 0.0;                  // max_i |x^i(k) - x^i(k-1)|_inf
  double u_sum = 0.0;                 // |sum_i U^i|_inf, zero by antisymmetry
  double w_sum = 0.0;                 // |sum_i W^i|_inf

  /// Stopping measure: the largest of the five equilibrium residuals.
  [[nodiscard]] double combined() const noexcept;
};

/// Names and accessors of the residual fields, in CSV order.
struct ResidualField {
  std::string_view name;
  double ResidualReport::* member;
};
[[nodiscard]] std::span<const ResidualField> residual_fields() noexcept;

/// |x_i - T(x_i - (grad_i J_i(x_est) + A_i^i^T lambda))| for player i.
/// Zero exactly when the box-constrained stationarity inclusion holds.
[[nodiscard]] double kkt_stationarity(const GameSpec& game, std::size_t i, const Vector& x_est,
                                      const Vector& lambda);

/// (max edge disagreement in x, max edge disagreement in lambda).
[[nodiscard]] std::pair<double, double> consensus_residual(const std::vector<PlayerState>& states,
                                                           const Graph& graph);

/// |x - x_star|_2 / |x_star|_2.
[[nodiscard]] double normalized_error(const Vector& x, const Vector& x_star);

/// Actions (x_i^i)_i read off the players' own entries.
[[nodiscard]] Vector actions_of(const std::vector<PlayerState>& states);

/// Fills every field except `round` and `step` from current states.
[[nodiscard]] ResidualReport evaluate_residuals(const GameSpec& game, const Graph& graph,
                                                const std::vector<PlayerState>& states);

enum class Termination { Converged, IterationBudget };

[[nodiscard]] std::string_view to_string(Termination t) noexcept;

struct TrajectoryEntry {
  std::size_t round = 0;
  std::vector<PlayerState> players;
  ResidualReport report;
};

/// Recorded run history. With stride s only rounds divisible by s are
/// kept by record(); record_final() always keeps the last round.
class Trajectory {
 public:
  explicit Trajectory(std::size_t stride = 1);

  void record(TrajectoryEntry entry);
  void record_final(TrajectoryEntry entry);

  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] const std::vector<TrajectoryEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] const TrajectoryEntry& back() const { return entries_.back(); }

  Termination termination = Termination::IterationBudget;
  std::size_t rounds = 0;          // rounds executed
  double max_u_sum = 0.0;          // over every round, recorded or not
  double max_w_sum = 0.0;

 private:
  std::size_t stride_;
  std::vector<TrajectoryEntry> entries_;
};

}  // namespace gne
