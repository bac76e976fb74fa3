#include "gne/residuals.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gne/error.hpp"

namespace gne {

double ResidualReport::combined() const noexcept {
  return std::max({consensus_x, consensus_lambda, constraint_violation, kkt_stationarity, step});
}

std::span<const ResidualField> residual_fields() noexcept {
  static constexpr std::array<ResidualField, 7> fields{{
      {"consensus_x", &ResidualReport::consensus_x},
      {"consensus_lambda", &ResidualReport::consensus_lambda},
      {"constraint_violation", &ResidualReport::constraint_violation},
      {"kkt_stationarity", &ResidualReport::kkt_stationarity},
      {"step", &ResidualReport::step},
      {"u_sum", &ResidualReport::u_sum},
      {"w_sum", &ResidualReport::w_sum},
  }};
  return fields;
}

double kkt_stationarity(const GameSpec& game, std::size_t i, const Vector& x_est,
                        const Vector& lambda) {
  if (i >= game.n_players()) {
    throw Error(ErrorCode::IndexOutOfRange, "player " + std::to_string(i));
  }
  const auto ii = static_cast<Eigen::Index>(i);
  const double xi = x_est[ii];
  const double g = eval_partial_gradient(game, i, x_est) + game.constraints[i].own().dot(lambda);
  return std::abs(xi - project(game.actions[i], xi - g));
}

std::pair<double, double> consensus_residual(const std::vector<PlayerState>& states,
                                             const Graph& graph) {
  double dx = 0.0;
  double dl = 0.0;
  for (auto [a, b] : graph.edges()) {
    dx = std::max(dx, (states[a].x_est - states[b].x_est).lpNorm<Eigen::Infinity>());
    if (states[a].lambda.size() > 0) {
      dl = std::max(dl, (states[a].lambda - states[b].lambda).lpNorm<Eigen::Infinity>());
    }
  }
  return {dx, dl};
}

double normalized_error(const Vector& x, const Vector& x_star) {
  const double ref = x_star.norm();
  if (!(ref > 0)) throw Error(ErrorCode::ZeroReference, "reference point has zero norm");
  return (x - x_star).norm() / ref;
}

Vector actions_of(const std::vector<PlayerState>& states) {
  Vector x(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    x[ii] = states[i].x_est[ii];
  }
  return x;
}

ResidualReport evaluate_residuals(const GameSpec& game, const Graph& graph,
                                  const std::vector<PlayerState>& states) {
  ResidualReport r;
  std::tie(r.consensus_x, r.consensus_lambda) = consensus_residual(states, graph);
  Vector u_sum = Vector::Zero(static_cast<Eigen::Index>(game.n_players()));
  Vector w_sum = Vector::Zero(static_cast<Eigen::Index>(game.n_rows()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const auto& blk = game.constraints[i];
    r.constraint_violation =
        std::max(r.constraint_violation, (blk.a * s.x_est - blk.b).lpNorm<Eigen::Infinity>());
    r.kkt_stationarity = std::max(r.kkt_stationarity, kkt_stationarity(game, i, s.x_est, s.lambda));
    u_sum += s.u_agg;
    w_sum += s.w_agg;
  }
  r.u_sum = u_sum.lpNorm<Eigen::Infinity>();
  r.w_sum = w_sum.size() > 0 ? w_sum.lpNorm<Eigen::Infinity>() : 0.0;
  return r;
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::IterationBudget: return "iteration budget";
  }
  return "unknown";
}

Trajectory::Trajectory(std::size_t stride) : stride_(std::max<std::size_t>(stride, 1)) {}

void Trajectory::record(TrajectoryEntry entry) {
  if (entry.round % stride_ != 0) return;
  entries_.push_back(std::move(entry));
}

void Trajectory::record_final(TrajectoryEntry entry) {
  if (!entries_.empty() && entries_.back().round == entry.round) return;
  entries_.push_back(std::move(entry));
}

}  // namespace gne
