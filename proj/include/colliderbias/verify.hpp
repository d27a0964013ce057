#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colliderbias/rng.hpp"
#include "colliderbias/sign.hpp"
#include "colliderbias/structures.hpp"

namespace colliderbias {

// Strict random parameters: every probability uniform on [0.05, 0.95], drawn
// in the order p_left, p_right, p_c_given {00, 01, 10, 11}, p_x_given_a
// {0, 1}, p_y_given_b {0, 1}, p_d_given_c {0, 1}, skipping absent fields.
StructureParams random_params(StructureKind kind, CounterStream& stream);

// Stream used for the draws of one kind under a given seed.
CounterStream kind_stream(std::uint64_t seed, StructureKind kind);

struct IdentityResult {
  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
  bool relative = false;

  bool passed() const { return failures == 0; }
};

struct KindSummary {
  StructureKind kind = StructureKind::V;
  std::uint64_t draws = 0;
  std::vector<IdentityResult> identities;

  bool passed() const;
};

struct VerifySummary {
  std::uint64_t seed = 0;
  std::vector<KindSummary> kinds;

  bool passed() const;
};

struct VerifyOptions {
  std::uint64_t draws = 1000;
  std::uint64_t seed = 0;
  double abs_tolerance = kAbsTolerance;
  double rel_tolerance = kRelTolerance;
};

// Checks every closed form against the oracle, the sign rules against the
// numeric signs, and the normalizer and variance-ratio identities on
// `draws` random strict parameter sets.
KindSummary verify_kind(StructureKind kind, const VerifyOptions& options);
VerifySummary verify(const std::vector<StructureKind>& kinds,
                     const VerifyOptions& options);

}  // namespace colliderbias
