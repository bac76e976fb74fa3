#pragma once

// Run configuration (JSON) and the wireless ad-hoc network scenario builder.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gne/admm.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"

namespace gne {

/// Linear coupling sum_{p in players} x_p = target.
struct CouplingRow {
  std::vector<std::size_t> players;
  double target = 0.0;
};

/// Congestion game over shared links. Users, links and players are 0-based.
struct WanetScenario {
  std::size_t n_links = 0;
  std::vector<double> capacities;                // per link
  double kappa = 10.0;
  std::vector<double> chi;                       // per user
  std::vector<std::vector<std::size_t>> routes;  // links of each user
  std::vector<ActionInterval> bounds;            // per user
  std::vector<CouplingRow> coupling;
  double cap_guard = 1e-6;

  [[nodiscard]] std::size_t n_users() const noexcept { return routes.size(); }
};

/// Every coupling row becomes the same (A, b) block for every player; with
/// no coupling the game gets a single inert zero row.
[[nodiscard]] GameSpec build_wanet(const WanetScenario& s);

enum class OracleMethod { Auto, Quadratic, Extragradient, Grid };

struct OracleSettings {
  OracleMethod method = OracleMethod::Auto;
  double step = 0.05;
  std::size_t iters = 200000;
  double resolution = 0.01;
};

struct InitOverride {
  std::optional<std::vector<Vector>> x;       // per player
  std::optional<std::vector<Vector>> lambda;  // per player
};

struct RunConfig {
  std::optional<WanetScenario> wanet;  // set when the game came from the shorthand
  GameSpec game;
  std::vector<Edge> edges;
  Params params;
  InitOverride init;
  std::filesystem::path output_dir = "out";
  std::size_t stride = 1;
  OracleSettings oracle;

  [[nodiscard]] Graph graph() const { return Graph(game.n_players(), edges); }
  [[nodiscard]] std::vector<PlayerState> initial_state() const;
  [[nodiscard]] Engine make_engine() const;
};

/// Parses and validates; throws ParseError (syntax or field type, with
/// location) or ValidationError (broken invariant).
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Full configuration with every default spelled out. Loading the result
/// reproduces the same configuration.
[[nodiscard]] nlohmann::json write_config(const RunConfig& cfg);

[[nodiscard]] std::string_view to_string(EstimateVariant v) noexcept;
[[nodiscard]] EstimateVariant parse_variant(const std::string& name);

}  // namespace gne
