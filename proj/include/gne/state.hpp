#pragma once

#include "gne/game.hpp"

namespace gne {

/// Local state of one player: its estimate of every action (own entry is
/// the real action), its copy of the multiplier and the aggregated edge
/// multipliers U^i (length N) and W^i (length m).
struct PlayerState {
  Vector x_est;
  Vector lambda;
  Vector u_agg;
  Vector w_agg;

  friend bool operator==(const PlayerState&, const PlayerState&) = default;
};

}  // namespace gne
