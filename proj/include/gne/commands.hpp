#pragma once

// CLI commands and file emitters. Exit codes: 0 success/converged,
// 2 iteration budget exhausted, 1 error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "gne/oracle.hpp"
#include "gne/residuals.hpp"
#include "gne/scenario.hpp"

namespace gne {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBudget = 2;

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Long format `round,player,field,index,value`, ordered by round then
/// player. Residual rows carry player -1 and so open every round.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

[[nodiscard]] nlohmann::json summary_json(const Trajectory& traj, double wall_seconds);
[[nodiscard]] nlohmann::json oracle_json(const OracleSolution& sol);
[[nodiscard]] OracleSolution oracle_from_json(const nlohmann::json& doc);

/// Runs the configured oracle; Auto tries the direct quadratic solve and
/// falls back to extragradient.
[[nodiscard]] OracleSolution solve_oracle(const RunConfig& cfg);

int cmd_validate(const RunConfig& cfg, std::ostream& log);
int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
/// Runs the engine and reports normalized_error of the actions against an
/// oracle solution per recorded round (`compare.csv`). Uses `oracle_file`
/// when given, otherwise solves the oracle.
int cmd_compare(const RunConfig& cfg, const std::filesystem::path& out_dir,
                const std::optional<std::filesystem::path>& oracle_file, std::ostream& log);

}  // namespace gne
