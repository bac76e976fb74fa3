#include "gne/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gne/error.hpp"

namespace gne {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CapacityExhausted: return "CapacityExhausted";
    case ErrorCode::InvalidStepSize: return "InvalidStepSize";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::MissingSigmaF: return "MissingSigmaF";
    case ErrorCode::InboxMismatch: return "InboxMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::SingularKkt: return "SingularKkt";
    case ErrorCode::ActiveBound: return "ActiveBound";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoGnePoint: return "NoGnePoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

double project(const ActionInterval& interval, double v) noexcept {
  if (std::isnan(v)) return v;
  return std::min(interval.hi, std::max(interval.lo, v));
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_index(const GameSpec& game, std::size_t i) {
  if (i >= game.n_players()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "player " + std::to_string(i) + " of " + std::to_string(game.n_players()));
  }
}

void check_dimension(const GameSpec& game, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != game.n_players()) {
    throw Error(ErrorCode::ValidationError, "action vector has length " +
                                                std::to_string(x.size()) + ", expected " +
                                                std::to_string(game.n_players()));
  }
}

// Residual capacity C_j - load_j; errors below the guard.
double residual_capacity(const WanetCost& w, std::size_t link, const Vector& x) {
  double load = 0.0;
  for (std::size_t user : w.link_users[link]) load += x[static_cast<Eigen::Index>(user)];
  const double residual = w.capacities[link] - load;
  if (!(residual >= w.cap_guard)) {
    throw Error(ErrorCode::CapacityExhausted,
                "link " + std::to_string(link) + " residual capacity " + std::to_string(residual));
  }
  return residual;
}

void check_log_domain(double xi) {
  if (!(xi > -1.0)) {
    throw Error(ErrorCode::NonFinite, "log(x_i + 1) undefined at x_i = " + std::to_string(xi));
  }
}

}  // namespace

void GameSpec::validate() const {
  const std::size_t n = n_players();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); };
  if (n < 2) fail("a game needs at least 2 players");
  if (costs.size() != n) fail("costs list length differs from number of players");
  if (constraints.size() != n) fail("constraints list length differs from number of players");

  const std::size_t m = constraints.front().rows();
  for (std::size_t i = 0; i < n; ++i) {
    const auto tag = "player " + std::to_string(i) + ": ";
    const auto& iv = actions[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) fail(tag + "action bounds must be finite");
    if (iv.lo > iv.hi) fail(tag + "action interval has lo > hi");

    const auto& blk = constraints[i];
    if (blk.rows() < 1) fail(tag + "constraint block needs at least one row");
    if (blk.rows() != m) fail(tag + "constraint blocks disagree on row count");
    if (static_cast<std::size_t>(blk.a.cols()) != n) fail(tag + "constraint matrix column count != N");
    if (blk.b.size() != blk.a.rows()) fail(tag + "constraint rhs length != row count");
    if (blk.own_column != i) fail(tag + "constraint own column index must equal player index");
    if (!blk.a.allFinite() || !blk.b.allFinite()) fail(tag + "constraint data must be finite");

    std::visit(Overloaded{
                   [&](const QuadraticCost& q) {
                     const auto en = static_cast<Eigen::Index>(n);
                     if (q.q.rows() != en || q.q.cols() != en) fail(tag + "quadratic Q must be N x N");
                     if (q.lin.size() != en) fail(tag + "quadratic linear term must have length N");
                     const auto ii = static_cast<Eigen::Index>(i);
                     if (q.q(ii, ii) < -1e-12) fail(tag + "quadratic cost not convex in own action");
                   },
                   [&](const WanetCost& w) {
                     if (!(w.kappa > 0)) fail(tag + "kappa must be positive");
                     if (!(w.chi > 0)) fail(tag + "chi must be positive");
                     if (!(w.cap_guard > 0)) fail(tag + "capacity guard must be positive");
                     if (w.routes.empty()) fail(tag + "route must be nonempty");
                     if (w.link_users.size() != w.capacities.size()) fail(tag + "link tables disagree");
                     for (double cap : w.capacities) {
                       if (!(cap > 0)) fail(tag + "link capacities must be positive");
                     }
                     for (std::size_t link : w.routes) {
                       if (link >= w.capacities.size()) fail(tag + "route link index out of range");
                       const auto& users = w.link_users[link];
                       if (std::find(users.begin(), users.end(), i) == users.end()) {
                         fail(tag + "route link does not list this user");
                       }
                     }
                     for (const auto& users : w.link_users) {
                       for (std::size_t u : users) {
                         if (u >= n) fail(tag + "link user index out of range");
                       }
                     }
                     if (!(iv.lo > -1.0)) fail(tag + "congestion cost needs lo > -1");
                   },
                   [&](const CustomCost& c) {
                     if (!c.cost || !c.partial_gradient) fail(tag + "custom cost needs both callbacks");
                   },
               },
               costs[i]);
  }
}

double eval_cost(const GameSpec& game, std::size_t i, const Vector& x) {
  check_index(game, i);
  check_dimension(game, x);
  return std::visit(Overloaded{
                        [&](const QuadraticCost& q) {
                          return 0.5 * x.dot(q.q * x) + q.lin.dot(x) + q.constant;
                        },
                        [&](const WanetCost& w) {
                          const double xi = x[static_cast<Eigen::Index>(i)];
                          double total = 0.0;
                          for (std::size_t link : w.routes) {
                            total += w.kappa / residual_capacity(w, link, x);
                          }
                          check_log_domain(xi);
                          return total - w.chi * std::log1p(xi);
                        },
                        [&](const CustomCost& c) { return c.cost(x); },
                    },
                    game.costs[i]);
}

double eval_partial_gradient(const GameSpec& game, std::size_t i, const Vector& x) {
  check_index(game, i);
  check_dimension(game, x);
  const auto ii = static_cast<Eigen::Index>(i);
  return std::visit(Overloaded{
                        [&](const QuadraticCost& q) {
                          // d/dx_i of 1/2 x^T Q x uses the symmetric part of Q.
                          return 0.5 * (q.q.row(ii).dot(x) + q.q.col(ii).dot(x)) + q.lin[ii];
                        },
                        [&](const WanetCost& w) {
                          double total = 0.0;
                          for (std::size_t link : w.routes) {
                            const double r = residual_capacity(w, link, x);
                            total += w.kappa / (r * r);
                          }
                          check_log_domain(x[ii]);
                          return total - w.chi / (x[ii] + 1.0);
                        },
                        [&](const CustomCost& c) { return c.partial_gradient(x); },
                    },
                    game.costs[i]);
}

double finite_diff_partial(const GameSpec& game, std::size_t i, const Vector& x, double h) {
  if (!(h > 0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidStepSize, "finite difference step must be positive");
  }
  check_index(game, i);
  Vector plus = x;
  Vector minus = x;
  plus[static_cast<Eigen::Index>(i)] += h;
  minus[static_cast<Eigen::Index>(i)] -= h;
  return (eval_cost(game, i, plus) - eval_cost(game, i, minus)) / (2.0 * h);
}

Vector pseudo_gradient(const GameSpec& game, const std::vector<Vector>& estimates) {
  const std::size_t n = game.n_players();
  if (estimates.size() != n) {
    throw Error(ErrorCode::ValidationError, "pseudo_gradient needs one estimate per player");
  }
  Vector f(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    f[static_cast<Eigen::Index>(i)] = eval_partial_gradient(game, i, estimates[i]);
  }
  return f;
}

Assumption1Report check_assumption1(const ConstraintBlock& block) {
  const Vector own = block.own();
  const double own_sq = own.squaredNorm();
  const double scale = block.a.norm();
  const double tol = 1e-12 * std::max(scale, 1e-300);

  Assumption1Report report;
  for (Eigen::Index j = 0; j < block.a.cols(); ++j) {
    if (static_cast<std::size_t>(j) == block.own_column) continue;
    if (std::abs(own.dot(block.a.col(j))) > tol) return report;
  }
  report.holds = true;
  const auto m = block.a.rows();
  if (own_sq == 0.0) {
    report.b_matrix = Matrix::Zero(m, m);
  } else {
    report.b_matrix = own * own.transpose() / own_sq;
  }
  return report;
}

double min_beta(double sigma_f, double c, std::size_t degree, const Vector& own_col) {
  if (!(sigma_f > 0) || !(c > 0) || degree < 1) {
    throw Error(ErrorCode::NonPositiveParameter, "min_beta needs sigma_f > 0, c > 0, degree >= 1");
  }
  return 0.5 * (1.0 / sigma_f + own_col.squaredNorm() / (c * static_cast<double>(degree)));
}

}  // namespace gne
