#include "gne/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gne/error.hpp"

namespace gne {

namespace {

constexpr double kDykstraTol = 1e-10;
constexpr std::size_t kDykstraSweeps = 10000;
constexpr double kCertifiedTol = 1e-6;

Vector game_map(const GameSpec& game, const Vector& x) {
  return pseudo_gradient(game, std::vector<Vector>(game.n_players(), x));
}

Vector project_box(const GameSpec& game, const Vector& v) {
  Vector out = v;
  for (std::size_t i = 0; i < game.n_players(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out[ii] = project(game.actions[i], v[ii]);
  }
  return out;
}

bool is_free(const ActionInterval& iv, double v) {
  const double tol = 1e-8 * (1.0 + std::max(std::abs(iv.lo), std::abs(iv.hi)));
  return v > iv.lo + tol && v < iv.hi - tol;
}

}  // namespace

Certificate certify(const GameSpec& game, const Vector& x, const Vector& lambda) {
  Certificate cert;
  for (std::size_t i = 0; i < game.n_players(); ++i) {
    cert.kkt_stationarity = std::max(cert.kkt_stationarity, kkt_stationarity(game, i, x, lambda));
    const auto& blk = game.constraints[i];
    cert.constraint_violation =
        std::max(cert.constraint_violation, (blk.a * x - blk.b).lpNorm<Eigen::Infinity>());
  }
  return cert;
}

Vector estimate_multiplier(const GameSpec& game, const Vector& x) {
  const std::size_t n = game.n_players();
  const auto m = static_cast<Eigen::Index>(game.n_rows());
  const Vector f = game_map(game, x);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_free(game.actions[i], x[static_cast<Eigen::Index>(i)])) rows.push_back(i);
  }
  if (rows.empty()) {
    for (std::size_t i = 0; i < n; ++i) rows.push_back(i);
  }
  Matrix lhs(static_cast<Eigen::Index>(rows.size()), m);
  Vector rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    lhs.row(rr) = game.constraints[rows[r]].own().transpose();
    rhs[rr] = -f[static_cast<Eigen::Index>(rows[r])];
  }
  return lhs.completeOrthogonalDecomposition().solve(rhs);
}

void require_shared_constraint(const GameSpec& game) {
  const auto& first = game.constraints.front();
  for (const auto& blk : game.constraints) {
    if (blk.a != first.a || blk.b != first.b) {
      throw Error(ErrorCode::ValidationError, "oracle requires one constraint shared by all players");
    }
  }
}

OracleSolution solve_quadratic_gne(const GameSpec& game) {
  game.validate();
  require_shared_constraint(game);
  const auto n = static_cast<Eigen::Index>(game.n_players());
  const auto m = static_cast<Eigen::Index>(game.n_rows());
  const auto& a = game.constraints.front().a;
  const auto& b = game.constraints.front().b;

  Matrix kkt = Matrix::Zero(n + m, n + m);
  Vector rhs(n + m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto* q = std::get_if<QuadraticCost>(&game.costs[static_cast<std::size_t>(i)]);
    if (q == nullptr) throw Error(ErrorCode::ValidationError, "quadratic oracle needs quadratic costs");
    kkt.row(i).head(n) = 0.5 * (q->q.row(i) + q->q.col(i).transpose());
    rhs[i] = -q->lin[i];
  }
  kkt.topRightCorner(n, m) = a.transpose();
  kkt.bottomLeftCorner(m, n) = a;
  rhs.tail(m) = b;

  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularKkt, "KKT matrix is singular");
  const Vector sol = lu.solve(rhs);

  OracleSolution out;
  out.x_star = sol.head(n);
  out.lambda_star = sol.tail(m);
  out.method = "quadratic";
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& iv = game.actions[static_cast<std::size_t>(i)];
    const double v = out.x_star[i];
    const double tol = 1e-12 * (1.0 + std::abs(v));
    if (v < iv.lo - tol || v > iv.hi + tol) {
      throw Error(ErrorCode::ActiveBound, "player " + std::to_string(i) +
                                              " leaves its interval at the unconstrained KKT "
                                              "point; use the extragradient or grid oracle");
    }
  }
  out.certificate = certify(game, out.x_star, out.lambda_star);
  return out;
}

Vector project_box_affine(const GameSpec& game, const Vector& v) {
  require_shared_constraint(game);
  const auto& a = game.constraints.front().a;
  const auto& b = game.constraints.front().b;
  const auto pinv = a.completeOrthogonalDecomposition();
  auto project_affine = [&](const Vector& z) -> Vector { return z - pinv.solve(a * z - b); };

  Vector x = v;
  Vector p = Vector::Zero(v.size());
  Vector q = Vector::Zero(v.size());
  for (std::size_t sweep = 0; sweep < kDykstraSweeps; ++sweep) {
    const Vector y = project_affine(x + p);
    p = x + p - y;
    const Vector next = project_box(game, y + q);
    q = y + q - next;
    const double moved = (next - x).lpNorm<Eigen::Infinity>();
    const double gap = (next - y).lpNorm<Eigen::Infinity>();
    x = next;
    if (moved < kDykstraTol && gap < kDykstraTol) break;
  }
  return x;
}

OracleSolution solve_vi_extragradient(const GameSpec& game, double step, std::size_t iters) {
  game.validate();
  require_shared_constraint(game);
  if (!(step >= 0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidStepSize, "extragradient step must be finite and non-negative");
  }

  Vector start(static_cast<Eigen::Index>(game.n_players()));
  for (std::size_t i = 0; i < game.n_players(); ++i) {
    start[static_cast<Eigen::Index>(i)] = game.actions[i].midpoint();
  }
  Vector x = project_box_affine(game, start);
  const auto& blk = game.constraints.front();
  if ((blk.a * x - blk.b).lpNorm<Eigen::Infinity>() > 1e-6) {
    throw Error(ErrorCode::NoGnePoint, "box and shared constraint do not intersect");
  }

  auto score = [&](const Vector& z) -> std::optional<std::pair<double, Vector>> {
    try {
      Vector lambda = estimate_multiplier(game, z);
      const auto cert = certify(game, z, lambda);
      return std::pair{std::max(cert.kkt_stationarity, cert.constraint_violation), std::move(lambda)};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExhausted && e.code() != ErrorCode::NonFinite) throw;
      return std::nullopt;
    }
  };

  OracleSolution best;
  best.method = "extragradient";
  double best_score = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& z, std::size_t k) {
    if (auto s = score(z); s && s->first < best_score) {
      best_score = s->first;
      best.x_star = z;
      best.lambda_star = std::move(s->second);
      best.iterations = k;
    }
  };
  consider(x, 0);

  double tau = step;
  std::size_t k = 0;
  while (tau > 0 && k < iters && best_score > 1e-12) {
    try {
      const Vector mid = project_box_affine(game, x - tau * game_map(game, x));
      const Vector next = project_box_affine(game, x - tau * game_map(game, mid));
      if (!next.allFinite()) throw Error(ErrorCode::NonFinite, "extragradient iterate");
      x = next;
      ++k;
      consider(x, k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExhausted && e.code() != ErrorCode::NonFinite) throw;
      tau *= 0.5;
      if (tau < 1e-14) break;
    }
  }

  if (!(best_score <= kCertifiedTol)) {
    throw Error(ErrorCode::NoConvergence,
                "extragradient residual " + std::to_string(best_score) + " after " + std::to_string(k) +
                    " iterations");
  }
  best.certificate = certify(game, best.x_star, best.lambda_star);
  return best;
}

GridResult grid_search_gne(const GameSpec& game, double resolution) {
  game.validate();
  const std::size_t n = game.n_players();
  if (n > 3) throw Error(ErrorCode::ValidationError, "grid search supports at most 3 players");
  if (!(resolution > 0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::InvalidStepSize, "grid resolution must be positive");
  }

  std::vector<std::size_t> counts(n);
  std::vector<std::size_t> strides(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& iv = game.actions[i];
    counts[i] = static_cast<std::size_t>(std::floor((iv.hi - iv.lo) / resolution + 1e-9)) + 1;
    total *= static_cast<double>(counts[i]);
  }
  if (total > 5e7) throw Error(ErrorCode::ValidationError, "grid too large; raise the resolution");
  std::size_t points = 1;
  for (std::size_t i = n; i-- > 0;) {
    strides[i] = points;
    points *= counts[i];
  }

  // Equality slack: half a grid step along the smallest nonzero coefficient.
  double min_coef = std::numeric_limits<double>::infinity();
  for (const auto& blk : game.constraints) {
    for (Eigen::Index r = 0; r < blk.a.rows(); ++r) {
      for (Eigen::Index c = 0; c < blk.a.cols(); ++c) {
        if (blk.a(r, c) != 0.0) min_coef = std::min(min_coef, std::abs(blk.a(r, c)));
      }
    }
  }
  const double slack = std::isfinite(min_coef) ? 0.5 * resolution * min_coef : 1e-12;

  auto point_at = [&](std::size_t flat) {
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = (flat / strides[i]) % counts[i];
      x[static_cast<Eigen::Index>(i)] = game.actions[i].lo + static_cast<double>(k) * resolution;
    }
    return x;
  };
  auto feasible_for = [&](std::size_t i, const Vector& x) {
    const auto& blk = game.constraints[i];
    return (blk.a * x - blk.b).lpNorm<Eigen::Infinity>() <= slack;
  };
  auto cost_or_nan = [&](std::size_t i, const Vector& x) {
    try {
      return eval_cost(game, i, x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExhausted && e.code() != ErrorCode::NonFinite) throw;
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  // Position of a point among the configurations of the other players.
  auto others_index = [&](std::size_t i, std::size_t flat) {
    const std::size_t own = (flat / strides[i]) % counts[i];
    const std::size_t without = flat - own * strides[i];
    const std::size_t high = without / (strides[i] * counts[i]);
    return high * strides[i] + without % strides[i];
  };

  // Best feasible unilateral response value of each player given the others.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i].assign(points / counts[i], inf);
  for (std::size_t flat = 0; flat < points; ++flat) {
    const Vector x = point_at(flat);
    for (std::size_t i = 0; i < n; ++i) {
      if (!feasible_for(i, x)) continue;
      const double j = cost_or_nan(i, x);
      if (std::isnan(j)) continue;
      double& slot = best[i][others_index(i, flat)];
      slot = std::min(slot, j);
    }
  }

  GridResult result;
  result.variational_residual = inf;
  double least_gain = inf;
  for (std::size_t flat = 0; flat < points; ++flat) {
    const Vector x = point_at(flat);
    double gain = 0.0;
    bool ok = true;
    bool passes = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!feasible_for(i, x)) {
        ok = false;
        break;
      }
      const double j = cost_or_nan(i, x);
      if (std::isnan(j)) {
        ok = false;
        break;
      }
      const double g = j - best[i][others_index(i, flat)];
      gain = std::max(gain, g);
      if (g > 1e-9 * (1.0 + std::abs(j))) passes = false;
    }
    if (!ok) continue;
    least_gain = std::min(least_gain, gain);
    if (!passes) continue;
    ++result.candidates;
    double residual = inf;
    try {
      const auto cert = certify(game, x, estimate_multiplier(game, x));
      residual = cert.kkt_stationarity;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExhausted && e.code() != ErrorCode::NonFinite) throw;
    }
    if (result.candidates == 1 || residual < result.variational_residual) {
      result.x = x;
      result.max_improvement = gain;
      result.variational_residual = residual;
    }
  }
  if (result.candidates == 0) {
    throw Error(ErrorCode::NoGnePoint, "no grid point passes; least unilateral gain " +
                                           (std::isfinite(least_gain) ? std::to_string(least_gain)
                                                                      : std::string("n/a (no feasible point)")));
  }
  return result;
}

}  // namespace gne
