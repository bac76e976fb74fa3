// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gne/commands.hpp"
#include "gne/error.hpp"
#include "helpers.hpp"

using namespace gne;
using gne::testing::path_graph;

namespace {

int failures = 0;
std::map<int, std::string> lines;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  lines[id] = std::string(ok ? "[PASS]" : "[FAIL]") + " AC" + std::to_string(id) + " " + what + " (" + detail + ")";
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Worst multiplier sums over every run in this binary.
double worst_u_sum = 0.0;
double worst_w_sum = 0.0;
std::size_t conservation_runs = 0;

Trajectory tracked_run(Engine& engine, std::size_t stride = 1) {
  Trajectory t = engine.run(stride);
  worst_u_sum = std::max(worst_u_sum, t.max_u_sum);
  worst_w_sum = std::max(worst_w_sum, t.max_w_sum);
  ++conservation_runs;
  return t;
}

Params params_with(std::size_t n, double beta, std::size_t max_iters, double tol) {
  Params p;
  p.c = 1.0;
  p.beta.assign(n, beta);
  p.max_iters = max_iters;
  p.tol = tol;
  return p;
}

std::vector<PlayerState> at_point(const Vector& x, const Vector& lambda) {
  std::vector<PlayerState> s(static_cast<std::size_t>(x.size()));
  for (auto& p : s) p = {x, lambda, Vector::Zero(x.size()), Vector::Zero(lambda.size())};
  return s;
}

double max_change(const std::vector<PlayerState>& a, const std::vector<PlayerState>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, (a[i].x_est - b[i].x_est).lpNorm<Eigen::Infinity>());
    m = std::max(m, (a[i].lambda - b[i].lambda).lpNorm<Eigen::Infinity>());
    m = std::max(m, (a[i].u_agg - b[i].u_agg).lpNorm<Eigen::Infinity>());
    m = std::max(m, (a[i].w_agg - b[i].w_agg).lpNorm<Eigen::Infinity>());
  }
  return m;
}

struct InteriorGame {
  gne::testing::RandomQuadratic rq;
  OracleSolution oracle;
  std::vector<Edge> edges;
};

/// 20 draws with N in {3, 4, 5} whose direct solution lies strictly inside the box.
std::vector<InteriorGame> interior_games() {
  std::mt19937_64 rng(2024);
  std::vector<InteriorGame> out;
  while (out.size() < 20) {
    const std::size_t n = 3 + out.size() % 3;
    const std::size_t rows = 1 + static_cast<std::size_t>(rng() % 2);
    auto rq = gne::testing::random_quadratic(n, rows, rng);
    auto edges = gne::testing::random_connected_edges(n, 0.3, rng);
    try {
      auto sol = solve_quadratic_gne(rq.game);
      out.push_back({std::move(rq), std::move(sol), std::move(edges)});
    } catch (const Error&) {
    }
  }
  return out;
}

void ac1() {
  const GameSpec g = gne::testing::constrained_pair();
  const OracleSolution oracle = solve_quadratic_gne(g);
  Engine engine(g, path_graph(2), params_with(2, 5.0, 10000, 1e-10));
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory t = tracked_run(engine);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& last = t.back().players;
  double x_err = 0.0;
  double l_err = 0.0;
  for (const auto& p : last) {
    x_err = std::max(x_err, (p.x_est - oracle.x_star).lpNorm<Eigen::Infinity>());
    l_err = std::max(l_err, std::abs(p.lambda[0] - oracle.lambda_star[0]));
  }
  const bool oracle_ok = std::abs(oracle.x_star[0] - 1.0) < 1e-12 && std::abs(oracle.lambda_star[0] + 1.0) < 1e-12;
  report(1, oracle_ok && t.rounds <= 10000 && x_err < 1e-5 && l_err < 1e-4 && wall < 5.0,
         "two-player constrained quadratic matches the direct solve",
         "rounds=" + std::to_string(t.rounds) + " |x-x*|=" + fmt(x_err) + " |lambda-lambda*|=" + fmt(l_err) +
             " wall=" + fmt(wall) + "s");
}

void ac2(const std::vector<InteriorGame>& games) {
  std::size_t ok = 0;
  double worst_res = 0.0;
  double worst_x = 0.0;
  std::size_t worst_rounds = 0;
  for (const auto& ig : games) {
    const std::size_t n = ig.rq.game.n_players();
    const Graph graph(n, ig.edges);
    const double sigma = gne::testing::cocoercivity_bound(ig.rq.m);
    Params p = params_with(n, 0.0, 100000, 1e-6);
    p.sigma_f = sigma;
    for (std::size_t i = 0; i < n; ++i) {
      p.beta[i] = 2.0 * min_beta(sigma, p.c, graph.degree(i), ig.rq.game.constraints[i].own());
    }
    Engine engine(ig.rq.game, graph, p);
    const Trajectory t = tracked_run(engine, 1000);
    const double res = t.back().report.combined();
    double x_err = 0.0;
    for (const auto& s : t.back().players) x_err = std::max(x_err, (s.x_est - ig.oracle.x_star).lpNorm<Eigen::Infinity>());
    worst_res = std::max(worst_res, res);
    worst_x = std::max(worst_x, x_err);
    worst_rounds = std::max(worst_rounds, t.rounds);
    if (t.termination == Termination::Converged && res < 1e-6 && x_err < 1e-4) ++ok;
  }
  report(2, ok == games.size(), "random interior quadratic games converge to the direct solve",
         std::to_string(ok) + "/" + std::to_string(games.size()) + " worst residual=" + fmt(worst_res) +
             " worst |x-x*|=" + fmt(worst_x) + " max rounds=" + std::to_string(worst_rounds));
}

void ac3(const std::vector<InteriorGame>& games) {
  double worst = 0.0;
  auto check = [&](const GameSpec& g, const Graph& graph, const OracleSolution& sol, double beta) {
    const std::size_t n = g.n_players();
    Params p = params_with(n, beta, 100, 1e-8);
    Engine engine(g, graph, p, at_point(sol.x_star, sol.lambda_star));
    const auto start = engine.players();
    for (int k = 0; k < 100; ++k) {
      (void)engine.run_round();
      worst = std::max(worst, max_change(start, engine.players()));
    }
  };
  const GameSpec pair = gne::testing::constrained_pair();
  check(pair, path_graph(2), solve_quadratic_gne(pair), 5.0);
  for (const auto& ig : games) {
    check(ig.rq.game, Graph(ig.rq.game.n_players(), ig.edges), ig.oracle, 5.0);
  }
  report(3, worst <= 1e-10, "iterates started at the KKT point stay put for 100 rounds",
         std::to_string(games.size() + 1) + " games, max change=" + fmt(worst));
}

void ac4() {
  report(4, worst_u_sum < 1e-9 && worst_w_sum < 1e-9, "aggregated multipliers sum to zero in every round",
         std::to_string(conservation_runs) + " runs, max |sum U|=" + fmt(worst_u_sum) +
             " max |sum W|=" + fmt(worst_w_sum));
}

void ac5() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_q = 0.0;
  double worst_w = 0.0;
  std::size_t points = 0;

  auto rel = [](double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(std::abs(analytic), 1.0);
  };
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t % 3);
    const auto rq = gne::testing::random_quadratic(n, 1, rng);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = -9.0 + 18.0 * unit(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[static_cast<Eigen::Index>(i)]));
      worst_q = std::max(worst_q, rel(eval_partial_gradient(rq.game, i, x), finite_diff_partial(rq.game, i, x, h)));
    }
    ++points;
  }

  const GameSpec wanet = build_wanet(gne::testing::wanet_five_user());
  for (int t = 0; t < 100; ++t) {
    // Loads stay below 80% of capacity: at most two users per link, each below 6.
    Vector x(5);
    for (Eigen::Index k = 0; k < 5; ++k) x[k] = 0.1 + 5.9 * unit(rng);
    for (std::size_t i = 0; i < 5; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[static_cast<Eigen::Index>(i)]));
      worst_w = std::max(worst_w, rel(eval_partial_gradient(wanet, i, x), finite_diff_partial(wanet, i, x, h)));
    }
    ++points;
  }
  report(5, worst_q < 1e-6 && worst_w < 1e-6, "analytic partial gradients match central differences",
         std::to_string(points) + " points, worst relative error quadratic=" + fmt(worst_q) +
             " congestion=" + fmt(worst_w));
}

void ac6() {
  std::mt19937_64 rng(66);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  double top = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = size(rng);
    top = std::max(top, Graph(n, gne::testing::random_connected_edges(n, 0.15, rng)).normalized_laplacian_max_eig());
  }
  const double p2 = path_graph(2).normalized_laplacian_max_eig();
  const std::vector<Edge> c4{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const double cyc = Graph(4, c4).normalized_laplacian_max_eig();
  report(6, top <= 2.0 + 1e-9 && std::abs(p2 - 2.0) <= 1e-9 && std::abs(cyc - 2.0) <= 1e-9,
         "normalized Laplacian spectrum bounded by 2, attained on P2 and C4",
         "max over 100 graphs=" + fmt(top) + " P2=" + format_double(p2) + " C4=" + format_double(cyc));
}

void ac7() {
  // Middle player of a three-player path: degree 2, own column of norm 1.
  const GameSpec g = gne::testing::separable_quadratic({1, 1, 1}, {0, 0, 0}, Matrix::Ones(1, 3),
                                                       Vector::Constant(1, 3.0), {-10, 10});
  const Graph graph = path_graph(3);
  auto passes = [&](double beta) -> bool {
    Params p = params_with(3, beta, 1, 1e-8);
    p.sigma_f = 1.0;
    return validate_condition(p, g, graph)[1];
  };
  const double floor = min_beta(1.0, 1.0, 2, g.constraints[1].own());
  report(7, passes(0.76) && !passes(0.74) && std::abs(floor - 0.75) < 1e-15,
         "penalty condition accepts beta=0.76 and rejects beta=0.74",
         "threshold=" + format_double(floor));
}

void ac8() {
  const RunConfig cfg = load_config(std::string(GNE_SCENARIO_DIR) + "/wanet_5user.json");
  const OracleSolution oracle = solve_vi_extragradient(cfg.game, cfg.oracle.step, cfg.oracle.iters);
  Engine engine = cfg.make_engine();
  const Trajectory t = tracked_run(engine, 1);
  const auto& last = t.back();
  const Vector x = actions_of(last.players);
  const double coupling = std::abs(x[0] + x[2] - 8.0);
  const double err = normalized_error(x, oracle.x_star);

  // Flattening: total movement of the flows in each quarter of the run.
  const auto& entries = t.entries();
  const std::size_t q = entries.size() / 4;
  std::vector<double> movement(4, 0.0);
  for (std::size_t k = 1; k < 4 * q; ++k) {
    movement[k / q] +=
        (actions_of(entries[k].players) - actions_of(entries[k - 1].players)).lpNorm<Eigen::Infinity>();
  }
  const bool flattens = movement[1] <= movement[0] && movement[2] <= movement[1] && movement[3] <= movement[2] &&
                        movement[3] < 1e-3 * movement[0];

  report(8,
         last.report.combined() < 1e-4 && coupling < 1e-3 && last.report.consensus_x < 1e-5 && err < 1e-3 && flattens,
         "five-user congestion game converges to the extragradient solution",
         "rounds=" + std::to_string(t.rounds) + " residual=" + fmt(last.report.combined()) +
             " |x0+x2-8|=" + fmt(coupling) + " consensus=" + fmt(last.report.consensus_x) +
             " normalized error=" + fmt(err) + " quarter movement=" + fmt(movement[0]) + "," + fmt(movement[1]) +
             "," + fmt(movement[2]) + "," + fmt(movement[3]));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void ac9() {
  const auto root = std::filesystem::temp_directory_path() / "gne_acceptance";
  std::filesystem::remove_all(root);
  std::size_t same = 0;
  std::size_t total = 0;
  std::ostringstream log;
  for (const char* name : {"two_player_quadratic.json", "wanet_5user.json", "wanet_15user_illustrative.json"}) {
    const RunConfig cfg = load_config(std::string(GNE_SCENARIO_DIR) + "/" + name);
    const auto a = root / (std::string(name) + ".a");
    const auto b = root / (std::string(name) + ".b");
    (void)cmd_run(cfg, a, log);
    (void)cmd_run(cfg, b, log);
    for (const auto& dir : {a, b}) {
      const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
      worst_u_sum = std::max(worst_u_sum, summary["max_u_sum"].get<double>());
      worst_w_sum = std::max(worst_w_sum, summary["max_w_sum"].get<double>());
      ++conservation_runs;
    }
    const std::string first = slurp(a / "trajectory.csv");
    ++total;
    if (!first.empty() && first == slurp(b / "trajectory.csv")) ++same;
  }
  std::filesystem::remove_all(root);
  report(9, same == total, "repeated runs write byte-identical trajectory.csv",
         std::to_string(same) + "/" + std::to_string(total) + " scenarios identical");
}

}  // namespace

int main() {
  try {
    const auto games = interior_games();
    ac1();
    ac2(games);
    ac3(games);
    ac5();
    ac6();
    ac7();
    ac8();
    ac9();
    ac4();
  } catch (const std::exception& e) {
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d failing criteria\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
