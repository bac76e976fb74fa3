// gne-admm: validate, run, solve or compare a networked game configuration.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gne/commands.hpp"
#include "gne/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed inexact-ADMM solver for generalized Nash equilibria"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string variant;
  std::size_t stride = 0;
  std::string oracle_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory (default: output.dir from the config)");
    cmd->add_option("--variant", variant, "estimate update")->check(CLI::IsMember({"derived", "algorithm-box"}));
    cmd->add_option("--stride", stride, "record every K-th round")->check(CLI::PositiveNumber);
  };
  auto* validate = app.add_subcommand("validate", "check assumptions and the penalty condition");
  auto* run = app.add_subcommand("run", "run the distributed iteration");
  auto* oracle = app.add_subcommand("oracle", "solve with a centralized reference solver");
  auto* compare = app.add_subcommand("compare", "run and report the error against an oracle solution");
  for (auto* cmd : {validate, run, oracle, compare}) add_common(cmd);
  compare->add_option("--oracle", oracle_path, "oracle.json to compare against (solved when omitted)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? gne::kExitOk : gne::kExitError;
  }

  try {
    gne::RunConfig cfg = gne::load_config(config_path);
    if (!variant.empty()) cfg.params.variant = gne::parse_variant(variant);
    if (stride > 0) cfg.stride = stride;
    const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);

    if (validate->parsed()) return gne::cmd_validate(cfg, std::cout);
    if (run->parsed()) return gne::cmd_run(cfg, out, std::cout);
    if (oracle->parsed()) return gne::cmd_oracle(cfg, out, std::cout);
    std::optional<std::filesystem::path> oracle_file;
    if (!oracle_path.empty()) oracle_file = oracle_path;
    return gne::cmd_compare(cfg, out, oracle_file, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "gne-admm: " << e.what() << '\n';
    return gne::kExitError;
  }
}
