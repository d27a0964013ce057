#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colliderbias/query.hpp"
#include "colliderbias/signmap.hpp"
#include "colliderbias/structures.hpp"
#include "colliderbias/verify.hpp"

namespace colliderbias {

enum class Command { Compute, Sign, Verify, Sample, Grid };
enum class OutputFormat { Text, Json, Csv };

std::string_view to_string(Command command);
OutputFormat parse_format(std::string_view name);

enum ExitCode : int { kExitOk = 0, kExitTolerance = 1, kExitInput = 2 };

struct RunConfig {
  Command command = Command::Compute;
  std::optional<std::string> kind;
  std::optional<std::string> file;
  std::vector<std::string> overrides;  // "key=value", applied after the file
  std::optional<std::string> scale;
  std::optional<std::string> stratum;  // "C=1" or "D=0"
  bool lm = false;
  bool all_kinds = false;
  OutputFormat format = OutputFormat::Text;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> draws;
  std::size_t resolution = 200;
  std::optional<double> tolerance;
  std::optional<double> rel_tolerance;
  std::string family = "Fig3";
};

// Parameters from --file, --kind and --param overrides. Without a file,
// --kind and every non-optional field must be given as overrides.
StructureParams resolve_params(const RunConfig& config);

// Query from --stratum/--lm/--scale. Defaults to the conditioning variable at
// level 1 on the covariance scale.
BiasQuery resolve_query(const RunConfig& config, StructureKind kind);

nlohmann::json evaluation_to_json(const StructureParams& params, const Evaluation& ev);
nlohmann::json verify_to_json(const VerifySummary& summary);

// Each command writes its document to `out` and returns the exit code.
// BiasError propagates to the caller, which maps it to kExitInput.
int run_compute(const RunConfig& config, std::ostream& out);
int run_sign(const RunConfig& config, std::ostream& out);
int run_verify(const RunConfig& config, std::ostream& out);
int run_sample(const RunConfig& config, std::ostream& out);
int run_grid(const RunConfig& config, std::ostream& out);

// Dispatches on config.command and maps BiasError to kExitInput with the
// message on `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace colliderbias
