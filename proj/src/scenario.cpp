#include "gne/scenario.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "gne/error.hpp"

namespace gne {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ParseError, path + ": " + msg);
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
std::string join(const std::string& path, std::size_t idx) { return path + "[" + std::to_string(idx) + "]"; }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  const json* v = find(obj, key);
  if (v == nullptr) parse_fail(join(path, key), "required field missing");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) parse_fail(path, "expected a number");
  return v.get<double>();
}

std::size_t as_index(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) parse_fail(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }
  parse_fail(path, "expected an integer");
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array");
  return v;
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  const auto& arr = as_array(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(as_number(arr[k], join(path, k)));
  return out;
}

Vector as_vector(const json& v, const std::string& path) {
  const auto nums = as_numbers(v, path);
  Vector out(static_cast<Eigen::Index>(nums.size()));
  for (std::size_t k = 0; k < nums.size(); ++k) out[static_cast<Eigen::Index>(k)] = nums[k];
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  const auto& rows = as_array(v, path);
  if (rows.empty()) parse_fail(path, "matrix needs at least one row");
  std::vector<Vector> parsed;
  for (std::size_t r = 0; r < rows.size(); ++r) parsed.push_back(as_vector(rows[r], join(path, r)));
  const auto cols = parsed.front().size();
  Matrix out(static_cast<Eigen::Index>(parsed.size()), cols);
  for (std::size_t r = 0; r < parsed.size(); ++r) {
    if (parsed[r].size() != cols) parse_fail(join(path, r), "ragged matrix row");
    out.row(static_cast<Eigen::Index>(r)) = parsed[r].transpose();
  }
  return out;
}

std::vector<std::size_t> as_indices(const json& v, const std::string& path) {
  std::vector<std::size_t> out;
  const auto& arr = as_array(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(as_index(arr[k], join(path, k)));
  return out;
}

/// A scalar broadcast to n entries, or an explicit array of length n.
std::vector<double> scalar_or_list(const json& v, std::size_t n, const std::string& path) {
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  auto out = as_numbers(v, path);
  if (out.size() != n) parse_fail(path, "expected " + std::to_string(n) + " entries");
  return out;
}

ActionInterval as_interval(const json& v, const std::string& path) {
  const auto nums = as_numbers(v, path);
  if (nums.size() != 2) parse_fail(path, "interval must be [lo, hi]");
  return {nums[0], nums[1]};
}

/// One interval for everyone, or one per player.
std::vector<ActionInterval> intervals(const json& v, std::size_t n, const std::string& path) {
  const auto& arr = as_array(v, path);
  if (!arr.empty() && arr[0].is_number()) return std::vector<ActionInterval>(n, as_interval(v, path));
  if (arr.size() != n) parse_fail(path, "expected " + std::to_string(n) + " intervals");
  std::vector<ActionInterval> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(as_interval(arr[k], join(path, k)));
  return out;
}

/// A common vector for every player, or one vector per player.
std::vector<Vector> per_player_vectors(const json& v, std::size_t n, const std::string& path) {
  const auto& arr = as_array(v, path);
  if (arr.empty() || arr[0].is_number()) return std::vector<Vector>(n, as_vector(v, path));
  if (arr.size() != n) parse_fail(path, "expected one vector per player");
  std::vector<Vector> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(as_vector(arr[k], join(path, k)));
  return out;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

ConstraintBlock parse_constraint(const json& v, std::size_t own, std::size_t n, const std::string& path) {
  ConstraintBlock blk{as_matrix(require(v, "a", path), join(path, "a")), as_vector(require(v, "b", path), join(path, "b")),
                      own};
  if (static_cast<std::size_t>(blk.a.cols()) != n) parse_fail(join(path, "a"), "needs one column per player");
  if (blk.b.size() != blk.a.rows()) parse_fail(join(path, "b"), "needs one entry per row of a");
  return blk;
}

CostModel parse_cost(const json& v, std::size_t n, const std::string& path) {
  const auto& type = require(v, "type", path);
  if (!type.is_string()) parse_fail(join(path, "type"), "expected a string");
  if (type.get<std::string>() != "quadratic") {
    parse_fail(join(path, "type"), "only \"quadratic\" costs can be given inline; use \"wanet\" for congestion games");
  }
  QuadraticCost q;
  q.q = as_matrix(require(v, "q", path), join(path, "q"));
  const auto en = static_cast<Eigen::Index>(n);
  if (q.q.rows() != en || q.q.cols() != en) parse_fail(join(path, "q"), "must be N x N");
  q.lin = Vector::Zero(en);
  if (const json* lin = find(v, "lin")) {
    q.lin = as_vector(*lin, join(path, "lin"));
    if (q.lin.size() != en) parse_fail(join(path, "lin"), "must have length N");
  }
  if (const json* c = find(v, "const")) q.constant = as_number(*c, join(path, "const"));
  return q;
}

GameSpec parse_game(const json& g) {
  const std::string path = "game";
  const auto& players = as_array(require(g, "players", path), "game.players");
  const std::size_t n = players.size();
  if (n < 2) invalid("game needs at least 2 players");

  std::optional<json> shared;
  if (const json* s = find(g, "shared_constraint")) shared = *s;

  GameSpec game;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string pp = join("game.players", i);
    const json& p = players[i];
    game.actions.push_back(as_interval(require(p, "bounds", pp), join(pp, "bounds")));
    game.costs.push_back(parse_cost(require(p, "cost", pp), n, join(pp, "cost")));
    if (const json* c = find(p, "constraint")) {
      game.constraints.push_back(parse_constraint(*c, i, n, join(pp, "constraint")));
    } else if (shared) {
      game.constraints.push_back(parse_constraint(*shared, i, n, "game.shared_constraint"));
    } else {
      game.constraints.push_back({Matrix::Zero(1, static_cast<Eigen::Index>(n)), Vector::Zero(1), i});
    }
  }
  return game;
}

WanetScenario parse_wanet(const json& w) {
  const std::string path = "wanet";
  WanetScenario s;
  s.n_links = as_index(require(w, "n_links", path), "wanet.n_links");
  if (s.n_links == 0) invalid("wanet needs at least one link");
  const auto& routes = as_array(require(w, "routes", path), "wanet.routes");
  for (std::size_t u = 0; u < routes.size(); ++u) s.routes.push_back(as_indices(routes[u], join("wanet.routes", u)));
  const std::size_t n = s.routes.size();

  s.capacities = find(w, "capacities") ? scalar_or_list(w["capacities"], s.n_links, "wanet.capacities")
                                        : std::vector<double>(s.n_links, 15.0);
  if (const json* k = find(w, "kappa")) s.kappa = as_number(*k, "wanet.kappa");
  s.chi = find(w, "chi") ? scalar_or_list(w["chi"], n, "wanet.chi") : std::vector<double>(n, 15.0);
  s.bounds = find(w, "bounds") ? intervals(w["bounds"], n, "wanet.bounds")
                               : std::vector<ActionInterval>(n, ActionInterval{0.0, 10.0});
  if (const json* g = find(w, "cap_guard")) s.cap_guard = as_number(*g, "wanet.cap_guard");
  if (const json* rows = find(w, "coupling")) {
    const auto& arr = as_array(*rows, "wanet.coupling");
    for (std::size_t r = 0; r < arr.size(); ++r) {
      const std::string rp = join("wanet.coupling", r);
      s.coupling.push_back({as_indices(require(arr[r], "players", rp), join(rp, "players")),
                            as_number(require(arr[r], "target", rp), join(rp, "target"))});
    }
  }
  return s;
}

Params parse_params(const json* p, const GameSpec& game, const std::vector<Edge>& edges) {
  Params params;
  const std::size_t n = game.n_players();
  if (p != nullptr) {
    if (const json* c = find(*p, "c")) params.c = as_number(*c, "params.c");
    if (const json* s = find(*p, "sigma_f")) params.sigma_f = as_number(*s, "params.sigma_f");
    if (const json* m = find(*p, "max_iters")) params.max_iters = as_index(*m, "params.max_iters");
    if (const json* t = find(*p, "tol")) params.tol = as_number(*t, "params.tol");
    if (const json* t = find(*p, "threads")) params.threads = as_index(*t, "params.threads");
    if (const json* v = find(*p, "variant")) {
      if (!v->is_string()) parse_fail("params.variant", "expected a string");
      try {
        params.variant = parse_variant(v->get<std::string>());
      } catch (const Error& e) {
        parse_fail("params.variant", e.what());
      }
    }
    if (const json* b = find(*p, "beta")) params.beta = scalar_or_list(*b, n, "params.beta");
  }
  if (params.beta.empty()) {
    if (params.sigma_f && *params.sigma_f > 0 && params.c > 0) {
      // Twice the smallest penalty satisfying the convergence condition.
      const Graph graph(n, edges);
      for (std::size_t i = 0; i < n; ++i) {
        params.beta.push_back(2.0 * min_beta(*params.sigma_f, params.c, graph.degree(i), game.constraints[i].own()));
      }
    } else {
      params.beta.assign(n, 1.0);
    }
  }
  return params;
}

OracleSettings parse_oracle(const json* o) {
  OracleSettings s;
  if (o == nullptr) return s;
  if (const json* m = find(*o, "method")) {
    if (!m->is_string()) parse_fail("oracle.method", "expected a string");
    const auto name = m->get<std::string>();
    if (name == "auto") s.method = OracleMethod::Auto;
    else if (name == "quadratic") s.method = OracleMethod::Quadratic;
    else if (name == "extragradient") s.method = OracleMethod::Extragradient;
    else if (name == "grid") s.method = OracleMethod::Grid;
    else parse_fail("oracle.method", "unknown method \"" + name + "\"");
  }
  if (const json* v = find(*o, "step")) s.step = as_number(*v, "oracle.step");
  if (const json* v = find(*o, "iters")) s.iters = as_index(*v, "oracle.iters");
  if (const json* v = find(*o, "resolution")) s.resolution = as_number(*v, "oracle.resolution");
  return s;
}

std::string_view to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::Auto: return "auto";
    case OracleMethod::Quadratic: return "quadratic";
    case OracleMethod::Extragradient: return "extragradient";
    case OracleMethod::Grid: return "grid";
  }
  return "auto";
}

}  // namespace

GameSpec build_wanet(const WanetScenario& s) {
  const std::size_t n = s.n_users();
  if (n < 2) invalid("wanet needs at least 2 users");
  if (s.capacities.size() != s.n_links) invalid("wanet needs one capacity per link");
  if (s.chi.size() != n) invalid("wanet needs one chi per user");
  if (s.bounds.size() != n) invalid("wanet needs one bound per user");

  std::vector<std::vector<std::size_t>> link_users(s.n_links);
  for (std::size_t u = 0; u < n; ++u) {
    if (s.routes[u].empty()) invalid("route of user " + std::to_string(u) + " is empty");
    for (std::size_t link : s.routes[u]) {
      if (link >= s.n_links) invalid("route of user " + std::to_string(u) + " uses unknown link " + std::to_string(link));
      auto& users = link_users[link];
      if (users.empty() || users.back() != u) users.push_back(u);
    }
  }

  const auto en = static_cast<Eigen::Index>(n);
  const auto rows = static_cast<Eigen::Index>(std::max<std::size_t>(s.coupling.size(), 1));
  Matrix a = Matrix::Zero(rows, en);
  Vector b = Vector::Zero(rows);
  for (std::size_t r = 0; r < s.coupling.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    for (std::size_t p : s.coupling[r].players) {
      if (p >= n) invalid("coupling row " + std::to_string(r) + " names unknown player " + std::to_string(p));
      a(rr, static_cast<Eigen::Index>(p)) = 1.0;
    }
    b[rr] = s.coupling[r].target;
  }

  GameSpec game;
  game.actions = s.bounds;
  for (std::size_t u = 0; u < n; ++u) {
    game.costs.emplace_back(WanetCost{s.kappa, s.chi[u], s.routes[u], s.capacities, link_users, s.cap_guard});
    game.constraints.push_back({a, b, u});
  }
  game.validate();
  return game;
}

std::string_view to_string(EstimateVariant v) noexcept {
  return v == EstimateVariant::Derived ? "derived" : "algorithm-box";
}

EstimateVariant parse_variant(const std::string& name) {
  if (name == "derived") return EstimateVariant::Derived;
  if (name == "algorithm-box") return EstimateVariant::AlgorithmBox;
  throw Error(ErrorCode::ValidationError, "unknown estimate variant \"" + name + "\" (derived|algorithm-box)");
}

std::vector<PlayerState> RunConfig::initial_state() const {
  auto states = default_initial_state(game);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (init.x) states[i].x_est = (*init.x)[i];
    if (init.lambda) states[i].lambda = (*init.lambda)[i];
  }
  return states;
}

Engine RunConfig::make_engine() const { return Engine(game, graph(), params, initial_state()); }

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) parse_fail("<root>", "expected an object");
  RunConfig cfg;
  const json* game = find(doc, "game");
  const json* wanet = find(doc, "wanet");
  if ((game == nullptr) == (wanet == nullptr)) invalid("config needs exactly one of \"game\" or \"wanet\"");
  if (game != nullptr) {
    cfg.game = parse_game(*game);
  } else {
    cfg.wanet = parse_wanet(*wanet);
    cfg.game = build_wanet(*cfg.wanet);
  }
  cfg.game.validate();
  const std::size_t n = cfg.game.n_players();

  const auto& edges = as_array(require(require(doc, "graph", ""), "edges", "graph"), "graph.edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto pair = as_indices(edges[k], join("graph.edges", k));
    if (pair.size() != 2) parse_fail(join("graph.edges", k), "edge must be [i, j]");
    cfg.edges.emplace_back(pair[0], pair[1]);
  }
  const Graph graph(n, cfg.edges);
  if (!graph.is_connected()) invalid("graph not connected (players cannot reach consensus)");

  cfg.params = parse_params(find(doc, "params"), cfg.game, cfg.edges);
  cfg.params.validate(n);

  if (const json* init = find(doc, "init")) {
    const auto m = static_cast<Eigen::Index>(cfg.game.n_rows());
    if (const json* x = find(*init, "x")) {
      cfg.init.x = per_player_vectors(*x, n, "init.x");
      for (const auto& v : *cfg.init.x) {
        if (v.size() != static_cast<Eigen::Index>(n)) parse_fail("init.x", "estimates need length N");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!cfg.game.actions[i].contains((*cfg.init.x)[i][static_cast<Eigen::Index>(i)])) {
          invalid("init.x: action of player " + std::to_string(i) + " outside its interval");
        }
      }
    }
    if (const json* l = find(*init, "lambda")) {
      cfg.init.lambda = per_player_vectors(*l, n, "init.lambda");
      for (const auto& v : *cfg.init.lambda) {
        if (v.size() != m) parse_fail("init.lambda", "multipliers need one entry per constraint row");
      }
    }
  }

  if (const json* out = find(doc, "output")) {
    if (const json* dir = find(*out, "dir")) {
      if (!dir->is_string()) parse_fail("output.dir", "expected a string");
      cfg.output_dir = dir->get<std::string>();
    }
    if (const json* s = find(*out, "stride")) cfg.stride = as_index(*s, "output.stride");
    if (cfg.stride == 0) invalid("output.stride must be at least 1");
  }
  cfg.oracle = parse_oracle(find(doc, "oracle"));
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json write_config(const RunConfig& cfg) {
  json doc;
  const std::size_t n = cfg.game.n_players();
  if (cfg.wanet) {
    const auto& s = *cfg.wanet;
    json w;
    w["n_links"] = s.n_links;
    w["capacities"] = s.capacities;
    w["kappa"] = s.kappa;
    w["chi"] = s.chi;
    w["routes"] = s.routes;
    json bounds = json::array();
    for (const auto& b : s.bounds) bounds.push_back({b.lo, b.hi});
    w["bounds"] = bounds;
    json rows = json::array();
    for (const auto& r : s.coupling) rows.push_back({{"players", r.players}, {"target", r.target}});
    w["coupling"] = rows;
    w["cap_guard"] = s.cap_guard;
    doc["wanet"] = w;
  } else {
    json players = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json p;
      p["bounds"] = {cfg.game.actions[i].lo, cfg.game.actions[i].hi};
      const auto* q = std::get_if<QuadraticCost>(&cfg.game.costs[i]);
      if (q == nullptr) invalid("only quadratic games can be written inline");
      p["cost"] = {{"type", "quadratic"}, {"q", to_json(q->q)}, {"lin", to_json(q->lin)}, {"const", q->constant}};
      p["constraint"] = {{"a", to_json(cfg.game.constraints[i].a)}, {"b", to_json(cfg.game.constraints[i].b)}};
      players.push_back(p);
    }
    doc["game"] = {{"players", players}};
  }

  json edges = json::array();
  for (auto [a, b] : cfg.edges) edges.push_back({a, b});
  doc["graph"] = {{"edges", edges}};

  json params{{"c", cfg.params.c},
              {"beta", cfg.params.beta},
              {"max_iters", cfg.params.max_iters},
              {"tol", cfg.params.tol},
              {"variant", to_string(cfg.params.variant)},
              {"threads", cfg.params.threads}};
  if (cfg.params.sigma_f) params["sigma_f"] = *cfg.params.sigma_f;
  doc["params"] = params;

  json init = json::object();
  auto vectors = [](const std::vector<Vector>& vs) {
    json out = json::array();
    for (const auto& v : vs) out.push_back(to_json(v));
    return out;
  };
  if (cfg.init.x) init["x"] = vectors(*cfg.init.x);
  if (cfg.init.lambda) init["lambda"] = vectors(*cfg.init.lambda);
  doc["init"] = init;

  doc["output"] = {{"dir", cfg.output_dir.string()}, {"stride", cfg.stride}};
  doc["oracle"] = {{"method", to_string(cfg.oracle.method)},
                   {"step", cfg.oracle.step},
                   {"iters", cfg.oracle.iters},
                   {"resolution", cfg.oracle.resolution}};
  return doc;
}

}  // namespace gne
