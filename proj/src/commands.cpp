#include "gne/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <ostream>

#include "gne/error.hpp"

namespace gne {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Vector vec_from(const json& j) {
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) out[static_cast<Eigen::Index>(k)] = j.at(k).get<double>();
  return out;
}

json report_json(const ResidualReport& r) {
  json out{{"round", r.round}, {"combined", r.combined()}};
  for (const auto& f : residual_fields()) out[std::string(f.name)] = r.*f.member;
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path.string());
  return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "round,player,field,index,value\n";
  auto row = [&](std::size_t round, long player, std::string_view field, Eigen::Index idx, double value) {
    out << round << ',' << player << ',' << field << ',' << idx << ',' << format_double(value) << '\n';
  };
  for (const auto& e : traj.entries()) {
    for (const auto& f : residual_fields()) row(e.round, -1, f.name, 0, e.report.*f.member);
    for (std::size_t p = 0; p < e.players.size(); ++p) {
      const auto& s = e.players[p];
      const auto player = static_cast<long>(p);
      for (Eigen::Index k = 0; k < s.x_est.size(); ++k) row(e.round, player, "x_est", k, s.x_est[k]);
      for (Eigen::Index k = 0; k < s.lambda.size(); ++k) row(e.round, player, "lambda", k, s.lambda[k]);
      for (Eigen::Index k = 0; k < s.u_agg.size(); ++k) row(e.round, player, "U", k, s.u_agg[k]);
      for (Eigen::Index k = 0; k < s.w_agg.size(); ++k) row(e.round, player, "W", k, s.w_agg[k]);
    }
  }
}

json summary_json(const Trajectory& traj, double wall_seconds) {
  const auto& last = traj.back();
  json lambdas = json::array();
  for (const auto& p : last.players) lambdas.push_back(vec_json(p.lambda));
  return {{"termination", std::string(to_string(traj.termination))},
          {"rounds", traj.rounds},
          {"final_round", last.round},
          {"final_residuals", report_json(last.report)},
          {"actions", vec_json(actions_of(last.players))},
          {"lambda", lambdas},
          {"max_u_sum", traj.max_u_sum},
          {"max_w_sum", traj.max_w_sum},
          {"recorded_rounds", traj.size()},
          {"wall_seconds", wall_seconds}};
}

json oracle_json(const OracleSolution& sol) {
  return {{"method", sol.method},
          {"x_star", vec_json(sol.x_star)},
          {"lambda_star", vec_json(sol.lambda_star)},
          {"iterations", sol.iterations},
          {"certificate",
           {{"kkt_stationarity", sol.certificate.kkt_stationarity},
            {"constraint_violation", sol.certificate.constraint_violation}}}};
}

OracleSolution oracle_from_json(const json& doc) {
  try {
    OracleSolution sol;
    sol.method = doc.value("method", std::string("file"));
    sol.x_star = vec_from(doc.at("x_star"));
    sol.lambda_star = doc.contains("lambda_star") ? vec_from(doc.at("lambda_star")) : Vector();
    sol.iterations = doc.value("iterations", std::size_t{0});
    if (doc.contains("certificate")) {
      sol.certificate.kkt_stationarity = doc["certificate"].value("kkt_stationarity", 0.0);
      sol.certificate.constraint_violation = doc["certificate"].value("constraint_violation", 0.0);
    }
    return sol;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("oracle file: ") + e.what());
  }
}

OracleSolution solve_oracle(const RunConfig& cfg) {
  const auto& s = cfg.oracle;
  switch (s.method) {
    case OracleMethod::Quadratic: return solve_quadratic_gne(cfg.game);
    case OracleMethod::Extragradient: return solve_vi_extragradient(cfg.game, s.step, s.iters);
    case OracleMethod::Grid: {
      const auto grid = grid_search_gne(cfg.game, s.resolution);
      OracleSolution sol;
      sol.method = "grid";
      sol.x_star = grid.x;
      sol.lambda_star = estimate_multiplier(cfg.game, grid.x);
      sol.certificate = certify(cfg.game, sol.x_star, sol.lambda_star);
      return sol;
    }
    case OracleMethod::Auto: break;
  }
  const bool quadratic = std::all_of(cfg.game.costs.begin(), cfg.game.costs.end(),
                                     [](const CostModel& c) { return std::holds_alternative<QuadraticCost>(c); });
  if (quadratic) {
    try {
      return solve_quadratic_gne(cfg.game);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ActiveBound && e.code() != ErrorCode::SingularKkt) throw;
    }
  }
  return solve_vi_extragradient(cfg.game, s.step, s.iters);
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const Graph graph = cfg.graph();
  const std::size_t n = cfg.game.n_players();
  log << "players: " << n << ", constraint rows: " << cfg.game.n_rows() << '\n';
  log << "graph: " << graph.edges().size() << " edges, connected: " << (graph.is_connected() ? "yes" : "no")
      << ", normalized Laplacian max eigenvalue: " << format_double(graph.normalized_laplacian_max_eig()) << '\n';

  for (std::size_t i = 0; i < n; ++i) {
    const auto rep = check_assumption1(cfg.game.constraints[i]);
    log << "player " << i << ": orthogonal constraint split (B^i exists): " << (rep.holds ? "holds" : "holds=false");
    if (!rep.holds) log << " [warning: the iteration still runs; the convergence guarantee does not apply]";
    log << '\n';
  }

  int code = kExitOk;
  if (cfg.params.sigma_f) {
    const auto pass = validate_condition(cfg.params, cfg.game, graph);
    for (std::size_t i = 0; i < n; ++i) {
      const double floor = min_beta(*cfg.params.sigma_f, cfg.params.c, graph.degree(i), cfg.game.constraints[i].own());
      log << "player " << i << ": penalty condition beta=" << format_double(cfg.params.beta[i])
          << " (needs > " << format_double(floor) << "): " << (pass[i] ? "pass" : "FAIL") << '\n';
      if (!pass[i]) code = kExitError;
    }
  } else {
    log << "sigma_f not given: penalty condition not checked\n";
  }
  log << "effective config:\n" << write_config(cfg).dump(2) << '\n';
  return code;
}

int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  Engine engine = cfg.make_engine();
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = engine.run(cfg.stride);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    auto csv = open_out(out_dir / "trajectory.csv");
    write_trajectory_csv(traj, csv);
  }
  const json summary = summary_json(traj, wall);
  write_json(out_dir / "summary.json", summary);

  const auto& last = traj.back();
  log << "termination: " << to_string(traj.termination) << " after " << traj.rounds << " rounds\n";
  log << "combined residual: " << format_double(last.report.combined()) << '\n';
  log << "actions:";
  const Vector x = actions_of(last.players);
  for (Eigen::Index k = 0; k < x.size(); ++k) log << ' ' << format_double(x[k]);
  log << '\n';
  return traj.termination == Termination::Converged ? kExitOk : kExitBudget;
}

int cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  const OracleSolution sol = solve_oracle(cfg);
  write_json(out_dir / "oracle.json", oracle_json(sol));
  log << "oracle (" << sol.method << "): x* =";
  for (Eigen::Index k = 0; k < sol.x_star.size(); ++k) log << ' ' << format_double(sol.x_star[k]);
  log << "\ncertificate: kkt " << format_double(sol.certificate.kkt_stationarity) << ", constraint "
      << format_double(sol.certificate.constraint_violation) << '\n';
  return kExitOk;
}

int cmd_compare(const RunConfig& cfg, const std::filesystem::path& out_dir,
                const std::optional<std::filesystem::path>& oracle_file, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  OracleSolution sol;
  if (oracle_file) {
    std::ifstream in(*oracle_file);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + oracle_file->string());
    try {
      sol = oracle_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  } else {
    sol = solve_oracle(cfg);
  }
  if (static_cast<std::size_t>(sol.x_star.size()) != cfg.game.n_players()) {
    throw Error(ErrorCode::ValidationError, "oracle solution has the wrong number of players");
  }

  Engine engine = cfg.make_engine();
  const Trajectory traj = engine.run(cfg.stride);
  auto csv = open_out(out_dir / "compare.csv");
  csv << "round,normalized_error\n";
  double final_error = 0.0;
  for (const auto& e : traj.entries()) {
    final_error = normalized_error(actions_of(e.players), sol.x_star);
    csv << e.round << ',' << format_double(final_error) << '\n';
  }
  log << "termination: " << to_string(traj.termination) << " after " << traj.rounds << " rounds\n";
  log << "final normalized error: " << format_double(final_error) << '\n';
  return traj.termination == Termination::Converged ? kExitOk : kExitBudget;
}

}  // namespace gne
