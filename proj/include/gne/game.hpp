#pragma once

// Game model: players with scalar action intervals, private linear
// equality constraints A^i x = b^i and per-player cost models.

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace gne {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed action interval [lo, hi] of one player.
struct ActionInterval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double midpoint() const noexcept { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

/// Euclidean projection onto the interval. Idempotent and 1-Lipschitz.
[[nodiscard]] double project(const ActionInterval& interval, double v) noexcept;

/// Private coupling constraint A^i x = b^i of one player. Column
/// `own_column` of `a` is A_i^i; the other columns form A_{-i}^i.
struct ConstraintBlock {
  Matrix a;
  Vector b;
  std::size_t own_column = 0;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(a.rows()); }
  [[nodiscard]] Vector own() const { return a.col(static_cast<Eigen::Index>(own_column)); }
};

/// J(x) = 1/2 x^T Q x + lin^T x + constant.
struct QuadraticCost {
  Matrix q;
  Vector lin;
  double constant = 0.0;
};

/// Link-congestion cost with logarithmic utility:
///   J_i(x) = sum_{j in routes} kappa / (C_j - load_j(x)) - chi * log(x_i + 1)
/// where load_j sums the flows of every user routed over link j.
struct WanetCost {
  double kappa = 10.0;
  double chi = 15.0;
  std::vector<std::size_t> routes;                  // links used by this user
  std::vector<double> capacities;                   // C_j for every link
  std::vector<std::vector<std::size_t>> link_users; // users on every link
  double cap_guard = 1e-6;
};

/// Caller-supplied cost and own-coordinate partial gradient.
struct CustomCost {
  std::function<double(const Vector&)> cost;
  std::function<double(const Vector&)> partial_gradient;
};

using CostModel = std::variant<QuadraticCost, WanetCost, CustomCost>;

/// The game G(V, Omega_i, J_i) with private constraints. Immutable once
/// validated; all evaluation functions are const and reentrant.
struct GameSpec {
  std::vector<ActionInterval> actions;
  std::vector<CostModel> costs;
  std::vector<ConstraintBlock> constraints;

  [[nodiscard]] std::size_t n_players() const noexcept { return actions.size(); }
  [[nodiscard]] std::size_t n_rows() const noexcept {
    return constraints.empty() ? 0 : constraints.front().rows();
  }

  /// Throws ValidationError naming the first broken invariant.
  void validate() const;
};

[[nodiscard]] double eval_cost(const GameSpec& game, std::size_t i, const Vector& x);
[[nodiscard]] double eval_partial_gradient(const GameSpec& game, std::size_t i, const Vector& x);

/// Central difference in coordinate i with step h. Gradient-check oracle.
[[nodiscard]] double finite_diff_partial(const GameSpec& game, std::size_t i, const Vector& x,
                                         double h);

/// Component i is the partial gradient of J_i at the estimate of player i.
[[nodiscard]] Vector pseudo_gradient(const GameSpec& game, const std::vector<Vector>& estimates);

struct Assumption1Report {
  bool holds = false;
  std::optional<Matrix> b_matrix;
};

/// Checks whether a PSD B^i exists with B^i A_i^i = A_i^i and B^i A_j^i = 0.
/// This is a report; a failure never blocks a run.
[[nodiscard]] Assumption1Report check_assumption1(const ConstraintBlock& block);

/// Smallest proximal penalty for which the convergence condition
///   sigma_f > 1 / (2 beta - |A_i^i|^2 / (c |N_i|))
/// holds with a positive denominator (strict for beta above the result).
[[nodiscard]] double min_beta(double sigma_f, double c, std::size_t degree, const Vector& own_col);

}  // namespace gne
