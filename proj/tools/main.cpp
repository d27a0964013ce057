#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "colliderbias/commands.hpp"
#include "colliderbias/error.hpp"

namespace cb = colliderbias;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("collider-bias");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("COLLIDER_BIAS_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Exact collider bias for binary causal structures"};
  app.require_subcommand(1);

  cb::RunConfig config;
  std::string format;
  std::string out_path;
  std::uint64_t draws = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--kind", config.kind, "structure kind (V, Nabla, Y, M, ...)");
    sub->add_option("--file", config.file, "JSON parameter file");
    sub->add_option("--param", config.overrides, "field override key=value")
        ->allow_extra_args(false);
    sub->add_option("--out", out_path, "write output here instead of stdout");
    sub->add_option("--format", format, "text, json or csv");
  };

  auto* compute = app.add_subcommand("compute", "closed-form bias checked against the oracle");
  auto* sign = app.add_subcommand("sign", "qualitative sign analysis");
  auto* verify = app.add_subcommand("verify", "random closed-form/oracle cross-check");
  auto* sample = app.add_subcommand("sample", "Monte Carlo draws from a structure");
  auto* grid = app.add_subcommand("grid", "sign grid over (p_c|10, p_c|01)");
  for (auto* sub : {compute, sign, verify, sample, grid}) add_common(sub);

  for (auto* sub : {compute}) {
    sub->add_option("--scale", config.scale, "cov, rd, rr or or");
    sub->add_option("--stratum", config.stratum, "stratum such as C=1 or D=0");
    sub->add_flag("--lm", config.lm, "regression adjustment instead of a stratum");
  }
  for (auto* sub : {compute, verify}) {
    sub->add_option("--tolerance", config.tolerance, "absolute tolerance");
    sub->add_option("--rel-tolerance", config.rel_tolerance, "relative tolerance for ratios");
  }
  for (auto* sub : {verify, sample}) {
    sub->add_option("--seed", config.seed, "random seed");
    sub->add_option("--draws", draws, "number of draws");
  }
  verify->add_flag("--all", config.all_kinds, "verify all nine kinds");
  grid->add_option("--family", config.family, "Fig3, Fig4 or Fig5");
  grid->add_option("--resolution", config.resolution, "cells per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cb::kExitInput;
  }

  if (compute->parsed()) config.command = cb::Command::Compute;
  if (sign->parsed()) config.command = cb::Command::Sign;
  if (verify->parsed()) config.command = cb::Command::Verify;
  if (sample->parsed()) config.command = cb::Command::Sample;
  if (grid->parsed()) config.command = cb::Command::Grid;
  if (draws > 0) config.draws = draws;

  try {
    if (!format.empty()) {
      config.format = cb::parse_format(format);
    } else if (config.command == cb::Command::Grid) {
      config.format = cb::OutputFormat::Csv;
    }
  } catch (const cb::BiasError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cb::kExitInput;
  }
  spdlog::debug("command {} format {}", cb::to_string(config.command), format);

  if (out_path.empty()) return cb::run(config, std::cout, std::cerr);
  std::ofstream file(out_path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open " << out_path << '\n';
    return cb::kExitInput;
  }
  const int code = cb::run(config, file, std::cerr);
  spdlog::info("wrote {}", out_path);
  return code;
}
