#pragma once

// Synchronous distributed inexact-ADMM for generalized Nash equilibria.
//
// Every round each player receives the previous-round (x^j, lambda^j) of
// its neighbors and applies, in order:
//   1. multiplier_update  U^i, W^i accumulate the neighbor disagreement
//   2. action_update      projected proximal step on its own action
//   3. lambda_update      closed-form maximizer of the local multiplier
//   4. estimate_update    averaging of the other players' actions
// Per-edge multipliers and slacks are eliminated analytically; only their
// aggregates U^i and W^i are stored.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/residuals.hpp"
#include "gne/state.hpp"

namespace gne {

enum class EstimateVariant {
  Derived,       // 1/2 (own + neighbor average) - U(k) / (2c|N_i|)
  AlgorithmBox,  // neighbor average - U(k-1) / (2c|N_i|)
};

struct Params {
  double c = 1.0;
  std::vector<double> beta;  // one per player
  std::optional<double> sigma_f;
  std::size_t max_iters = 10000;
  double tol = 1e-8;
  EstimateVariant variant = EstimateVariant::Derived;
  std::size_t threads = 1;

  /// Throws NonPositiveParameter / ValidationError.
  void validate(std::size_t n_players) const;
};

struct Coefficients {
  double alpha = 0.0;  // beta + 2c|N_i|
  double gamma = 0.0;  // beta + c|N_i| - |A_i^i|^2 / (2c|N_i|)
  double delta = 0.0;  // beta - |A_i^i|^2 / (2c|N_i|)
};

[[nodiscard]] Coefficients compute_coefficients(const Params& params, const GameSpec& game,
                                                const Graph& graph, std::size_t i);

/// Per-player convergence condition; requires params.sigma_f.
[[nodiscard]] std::vector<bool> validate_condition(const Params& params, const GameSpec& game,
                                                   const Graph& graph);

/// Message (x^j(k-1), lambda^j(k-1)) from one neighbor.
struct Broadcast {
  std::size_t sender = 0;
  Vector x_est;
  Vector lambda;
};

using Inbox = std::span<const Broadcast>;

/// Throws InboxMismatch unless the inbox holds exactly one message per neighbor.
void check_inbox(const Graph& graph, std::size_t i, Inbox inbox);

struct MultiplierUpdate {
  Vector u_agg;
  Vector w_agg;
};

/// U^i(k) = U^i(k-1) + c sum_j (x^i - x^j),  W^i(k) = W^i(k-1) + c sum_j (lambda^i - lambda^j).
/// `state` holds round k-1 values.
[[nodiscard]] MultiplierUpdate multiplier_update(const PlayerState& state, Inbox inbox, double c);

/// New own action x_i^i(k). `state` holds x(k-1), lambda(k-1) and the
/// already updated U(k), W(k).
[[nodiscard]] double action_update(const PlayerState& state, Inbox inbox, const GameSpec& game,
                                   const Graph& graph, const Params& params, std::size_t i);

/// New multiplier copy lambda^i(k) given the new own action.
[[nodiscard]] Vector lambda_update(const PlayerState& state, Inbox inbox, const GameSpec& game,
                                   const Graph& graph, const Params& params, std::size_t i,
                                   double new_own_action);

/// New estimate vector. The own entry is returned unchanged (it is
/// replaced by the action update). `u_prev` is U^i(k-1), read only by the
/// AlgorithmBox variant.
[[nodiscard]] Vector estimate_update(const PlayerState& state, const Vector& u_prev, Inbox inbox,
                                     const Params& params, std::size_t i);

/// Initial state: midpoints for every estimate, zero multipliers.
[[nodiscard]] std::vector<PlayerState> default_initial_state(const GameSpec& game);

class Engine {
 public:
  /// Validates game, graph (connected, sizes) and params. The initial
  /// state defaults to default_initial_state().
  Engine(GameSpec game, Graph graph, Params params,
         std::optional<std::vector<PlayerState>> init = std::nullopt);

  /// One synchronous round. Transactional: on error the state is unchanged.
  ResidualReport run_round();

  /// Rounds until the combined residual drops below params.tol or the
  /// budget params.max_iters is spent.
  Trajectory run(std::size_t stride = 1);

  [[nodiscard]] std::size_t round() const noexcept { return round_; }
  [[nodiscard]] const std::vector<PlayerState>& players() const noexcept { return players_; }
  [[nodiscard]] const GameSpec& game() const noexcept { return game_; }
  [[nodiscard]] const Graph& graph() const noexcept { return graph_; }
  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] ResidualReport current_report() const;

 private:
  PlayerState update_player(std::size_t i, const std::vector<Broadcast>& snapshot) const;

  GameSpec game_;
  Graph graph_;
  Params params_;
  std::vector<PlayerState> players_;
  std::size_t round_ = 0;
};

}  // namespace gne
