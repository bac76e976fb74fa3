#include "gne/admm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "gne/error.hpp"

namespace gne {

namespace {

double own_norm_sq(const GameSpec& game, std::size_t i) { return game.constraints[i].own().squaredNorm(); }

bool all_finite(const PlayerState& s) {
  return s.x_est.allFinite() && s.lambda.allFinite() && s.u_agg.allFinite() && s.w_agg.allFinite();
}

}  // namespace

void Params::validate(std::size_t n_players) const {
  if (!(c > 0)) throw Error(ErrorCode::NonPositiveParameter, "c must be positive");
  if (beta.size() != n_players) {
    throw Error(ErrorCode::ValidationError, "beta needs one entry per player");
  }
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] > 0)) {
      throw Error(ErrorCode::NonPositiveParameter, "beta[" + std::to_string(i) + "] must be positive");
    }
  }
  if (sigma_f && !(*sigma_f > 0)) throw Error(ErrorCode::NonPositiveParameter, "sigma_f must be positive");
  if (!(tol > 0)) throw Error(ErrorCode::NonPositiveParameter, "tol must be positive");
  if (threads < 1) throw Error(ErrorCode::ValidationError, "threads must be at least 1");
}

Coefficients compute_coefficients(const Params& params, const GameSpec& game, const Graph& graph,
                                  std::size_t i) {
  const double cd = params.c * static_cast<double>(graph.degree(i));
  const double penalty = own_norm_sq(game, i) / (2.0 * cd);
  const double beta = params.beta.at(i);
  return {beta + 2.0 * cd, beta + cd - penalty, beta - penalty};
}

std::vector<bool> validate_condition(const Params& params, const GameSpec& game, const Graph& graph) {
  if (!params.sigma_f) throw Error(ErrorCode::MissingSigmaF, "convergence check needs sigma_f");
  std::vector<bool> pass(game.n_players());
  for (std::size_t i = 0; i < pass.size(); ++i) {
    const double denom =
        2.0 * params.beta.at(i) - own_norm_sq(game, i) / (params.c * static_cast<double>(graph.degree(i)));
    pass[i] = denom > 0 && *params.sigma_f > 1.0 / denom;
  }
  return pass;
}

void check_inbox(const Graph& graph, std::size_t i, Inbox inbox) {
  const auto& nbrs = graph.neighbors(i);
  bool ok = inbox.size() == nbrs.size();
  if (ok) {
    std::vector<std::size_t> senders;
    senders.reserve(inbox.size());
    for (const auto& msg : inbox) senders.push_back(msg.sender);
    std::sort(senders.begin(), senders.end());
    ok = senders == nbrs;
  }
  if (!ok) {
    throw Error(ErrorCode::InboxMismatch,
                "player " + std::to_string(i) + " inbox does not match its neighbor set");
  }
}

MultiplierUpdate multiplier_update(const PlayerState& state, Inbox inbox, double c) {
  MultiplierUpdate out{state.u_agg, state.w_agg};
  for (const auto& msg : inbox) {
    out.u_agg += c * (state.x_est - msg.x_est);
    out.w_agg += c * (state.lambda - msg.lambda);
  }
  return out;
}

namespace {

// Terms shared by the action and multiplier updates.
struct LocalSums {
  double neighbor_own = 0.0;  // sum_j x_i^j(k-1)
  Vector lambda_pairs;        // sum_j lambda^i(k-1) + lambda^j(k-1)
  Vector others_term;         // A_{-i}^i x_{-i}^i(k-1)
};

LocalSums local_sums(const PlayerState& state, Inbox inbox, const GameSpec& game, std::size_t i) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto& blk = game.constraints[i];
  LocalSums s;
  s.lambda_pairs = Vector::Zero(state.lambda.size());
  for (const auto& msg : inbox) {
    s.neighbor_own += msg.x_est[ii];
    s.lambda_pairs += state.lambda + msg.lambda;
  }
  s.others_term = blk.a * state.x_est - blk.own() * state.x_est[ii];
  return s;
}

}  // namespace

double action_update(const PlayerState& state, Inbox inbox, const GameSpec& game, const Graph& graph,
                     const Params& params, std::size_t i) {
  check_inbox(graph, i, inbox);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto coef = compute_coefficients(params, game, graph, i);
  const double c = params.c;
  const double two_cd = 2.0 * c * static_cast<double>(graph.degree(i));
  const auto& blk = game.constraints[i];

  const double grad = eval_partial_gradient(game, i, state.x_est);
  const LocalSums s = local_sums(state, inbox, game, i);
  const Vector bracket = s.others_term - blk.b - state.w_agg + c * s.lambda_pairs;
  const double candidate = (coef.gamma * state.x_est[ii] - grad - state.u_agg[ii] +
                            c * s.neighbor_own - blk.own().dot(bracket) / two_cd) /
                           coef.alpha;
  return project(game.actions[i], candidate);
}

Vector lambda_update(const PlayerState& state, Inbox inbox, const GameSpec& game, const Graph& graph,
                     const Params& params, std::size_t i, double new_own_action) {
  check_inbox(graph, i, inbox);
  const double c = params.c;
  const double two_cd = 2.0 * c * static_cast<double>(graph.degree(i));
  const auto& blk = game.constraints[i];
  const LocalSums s = local_sums(state, inbox, game, i);
  return (blk.own() * new_own_action + s.others_term - blk.b - state.w_agg + c * s.lambda_pairs) /
         two_cd;
}

Vector estimate_update(const PlayerState& state, const Vector& u_prev, Inbox inbox, const Params& params,
                       std::size_t i) {
  const auto ii = static_cast<Eigen::Index>(i);
  const double d = static_cast<double>(inbox.size());
  if (inbox.empty()) throw Error(ErrorCode::InboxMismatch, "estimate update needs at least one neighbor");
  Vector average = Vector::Zero(state.x_est.size());
  for (const auto& msg : inbox) average += msg.x_est;
  average /= d;

  const double two_cd = 2.0 * params.c * d;
  Vector next;
  if (params.variant == EstimateVariant::Derived) {
    next = 0.5 * (state.x_est + average) - state.u_agg / two_cd;
  } else {
    next = average - u_prev / two_cd;
  }
  next[ii] = state.x_est[ii];
  return next;
}

std::vector<PlayerState> default_initial_state(const GameSpec& game) {
  const auto n = static_cast<Eigen::Index>(game.n_players());
  const auto m = static_cast<Eigen::Index>(game.n_rows());
  Vector mid(n);
  for (Eigen::Index i = 0; i < n; ++i) mid[i] = game.actions[static_cast<std::size_t>(i)].midpoint();
  return std::vector<PlayerState>(game.n_players(),
                                  PlayerState{mid, Vector::Zero(m), Vector::Zero(n), Vector::Zero(m)});
}

Engine::Engine(GameSpec game, Graph graph, Params params, std::optional<std::vector<PlayerState>> init)
    : game_(std::move(game)), graph_(std::move(graph)), params_(std::move(params)) {
  game_.validate();
  const std::size_t n = game_.n_players();
  if (graph_.size() != n) throw Error(ErrorCode::ValidationError, "graph size differs from player count");
  if (!graph_.is_connected()) throw Error(ErrorCode::ValidationError, "graph not connected");
  params_.validate(n);

  players_ = init ? std::move(*init) : default_initial_state(game_);
  if (players_.size() != n) throw Error(ErrorCode::ValidationError, "initial state needs one entry per player");
  const auto en = static_cast<Eigen::Index>(n);
  const auto em = static_cast<Eigen::Index>(game_.n_rows());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = players_[i];
    if (p.x_est.size() != en || p.u_agg.size() != en || p.lambda.size() != em || p.w_agg.size() != em) {
      throw Error(ErrorCode::ValidationError, "initial state of player " + std::to_string(i) + " has wrong shape");
    }
    if (!all_finite(p)) throw Error(ErrorCode::NonFinite, "initial state of player " + std::to_string(i));
    if (!game_.actions[i].contains(p.x_est[static_cast<Eigen::Index>(i)])) {
      throw Error(ErrorCode::ValidationError, "initial action of player " + std::to_string(i) + " outside its interval");
    }
  }
}

PlayerState Engine::update_player(std::size_t i, const std::vector<Broadcast>& snapshot) const {
  const auto& nbrs = graph_.neighbors(i);
  std::vector<Broadcast> inbox;
  inbox.reserve(nbrs.size());
  for (std::size_t j : nbrs) inbox.push_back(snapshot[j]);

  const PlayerState& prev = players_[i];
  auto [u, w] = multiplier_update(prev, inbox, params_.c);
  PlayerState work{prev.x_est, prev.lambda, std::move(u), std::move(w)};

  const double action = action_update(work, inbox, game_, graph_, params_, i);
  Vector lambda = lambda_update(work, inbox, game_, graph_, params_, i, action);
  Vector est = estimate_update(work, prev.u_agg, inbox, params_, i);
  est[static_cast<Eigen::Index>(i)] = action;

  work.x_est = std::move(est);
  work.lambda = std::move(lambda);
  return work;
}

ResidualReport Engine::run_round() {
  const std::size_t n = game_.n_players();
  std::vector<Broadcast> snapshot(n);
  for (std::size_t i = 0; i < n; ++i) snapshot[i] = {i, players_[i].x_est, players_[i].lambda};

  std::vector<PlayerState> next(n);
  const std::size_t workers = std::min(params_.threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) next[i] = update_player(i, snapshot);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = t; i < n; i += workers) next[i] = update_player(i, snapshot);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  const std::size_t k = round_ + 1;
  double step = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!all_finite(next[i])) {
      throw Error(ErrorCode::NonFinite,
                  "player " + std::to_string(i) + " produced a non-finite iterate at round " + std::to_string(k));
    }
    step = std::max(step, (next[i].x_est - players_[i].x_est).lpNorm<Eigen::Infinity>());
  }

  ResidualReport report = evaluate_residuals(game_, graph_, next);
  report.round = k;
  report.step = step;
  players_ = std::move(next);
  round_ = k;
  return report;
}

ResidualReport Engine::current_report() const {
  ResidualReport r = evaluate_residuals(game_, graph_, players_);
  r.round = round_;
  return r;
}

Trajectory Engine::run(std::size_t stride) {
  Trajectory traj(stride);
  ResidualReport report = current_report();
  traj.max_u_sum = report.u_sum;
  traj.max_w_sum = report.w_sum;
  traj.record({round_, players_, report});

  traj.termination = Termination::IterationBudget;
  for (std::size_t done = 0; done < params_.max_iters; ++done) {
    report = run_round();
    ++traj.rounds;
    traj.max_u_sum = std::max(traj.max_u_sum, report.u_sum);
    traj.max_w_sum = std::max(traj.max_w_sum, report.w_sum);
    traj.record({round_, players_, report});
    if (report.combined() < params_.tol) {
      traj.termination = Termination::Converged;
      break;
    }
  }
  traj.record_final({round_, players_, report});
  return traj;
}

}  // namespace gne
