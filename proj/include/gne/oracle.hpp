#pragma once

// Centralized reference solvers for the variational GNE (common
// multiplier) of shared-constraint games. They never touch the ADMM code.

#include <cstddef>
#include <string>

#include "gne/game.hpp"
#include "gne/residuals.hpp"

namespace gne {

struct Certificate {
  double kkt_stationarity = 0.0;      // max_i natural-map residual at (x*, lambda*)
  double constraint_violation = 0.0;  // |A x* - b|_inf
};

struct OracleSolution {
  Vector x_star;
  Vector lambda_star;
  Certificate certificate;
  std::string method;
  std::size_t iterations = 0;
};

/// Natural-map residual of (x, lambda) with every player reading x.
[[nodiscard]] Certificate certify(const GameSpec& game, const Vector& x, const Vector& lambda);

/// Least-squares common multiplier from the players whose bounds are inactive.
[[nodiscard]] Vector estimate_multiplier(const GameSpec& game, const Vector& x);

/// Throws ValidationError unless all blocks share the same (A, b).
void require_shared_constraint(const GameSpec& game);

/// Direct solve of [M A^T; A 0][x; lambda] = [-q; b] for quadratic costs.
/// Throws SingularKkt, or ActiveBound when the solution leaves the box.
[[nodiscard]] OracleSolution solve_quadratic_gne(const GameSpec& game);

/// Euclidean projection onto {lo <= x <= hi} intersected with {A x = b}
/// by Dykstra's alternating projections (tolerance 1e-10, cap 1e4 sweeps).
[[nodiscard]] Vector project_box_affine(const GameSpec& game, const Vector& v);

/// Projected extragradient on the game map over the feasible set. The step
/// halves whenever an evaluation leaves the cost domain. Returns the best
/// iterate by certificate; throws NoConvergence above 1e-6.
[[nodiscard]] OracleSolution solve_vi_extragradient(const GameSpec& game, double step,
                                                    std::size_t iters);

struct GridResult {
  Vector x;
  double max_improvement = 0.0;  // best unilateral gain over all players
  double variational_residual = 0.0;
  std::size_t candidates = 0;    // grid points passing the GNE test
};

/// Exhaustive search on a uniform grid (N <= 3). Among grid points where no
/// player gains by a feasible unilateral grid deviation, returns the one
/// closest to the common-multiplier stationarity conditions.
/// Throws NoGnePoint when no grid point passes.
[[nodiscard]] GridResult grid_search_gne(const GameSpec& game, double resolution);

}  // namespace gne
