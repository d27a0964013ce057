#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "colliderbias/joint.hpp"
#include "colliderbias/sign.hpp"
#include "colliderbias/structures.hpp"

namespace colliderbias {

// How X and Y act on P(C = 1). "Qualitative" means the effect of that parent
// flips sign across the levels of the other parent.
//
// Semantic labels stand in for the numbered regions of the usual square
// diagram: BothPositive is the block where both effects are positive,
// OppositeSigns covers the two opposite-direction blocks, and the three
// Qualitative labels cover the remaining six blocks.
enum class PatternKind {
  BothPositive,
  BothNegative,
  OppositeSigns,
  QualitativeInX,
  QualitativeInY,
  QualitativeInBoth,
  DegenerateTie,
};

std::string_view to_string(PatternKind kind);

// Interaction signs of X and Y on P(C = c) at the canonical level c, the
// level with p_{c|11} >= p_{c|00}.
struct InteractionSigns {
  Sign rr_c = Sign::Zero;      // risk ratio on C = c
  Sign rr_other = Sign::Zero;  // risk ratio on C = 1 - c
  Sign odds_ratio = Sign::Zero;
  Sign risk_difference = Sign::Zero;
};

struct EffectPattern {
  PatternKind pattern = PatternKind::DegenerateTie;
  int canonical_level = 1;
  InteractionSigns interaction;
};

EffectPattern classify_effects(const ColliderTable& collider);

// Sign of V-bias at C = c on every scale, i.e. sign(g(c)).
Sign sign_v_stratum(const ColliderTable& collider, int c);

// Which branch of the Y-bias case analysis decided the sign.
enum class YSignCase {
  NoChildEffect,      // p_{d|1} == p_{d|0}
  SameAsChildEffect,  // g(1) >= 0 >= g(0)
  ReverseChildEffect, // g(1) <= 0 <= g(0)
  BothGNonPositive,   // positive iff p_{d|1}/p_{d|0} lies between g(0)/g(1) and 1
  BothGNonNegative,   // negative iff it lies between them
};

std::string_view to_string(YSignCase c);

struct YSign {
  Sign sign = Sign::Zero;
  YSignCase rule = YSignCase::NoChildEffect;
};

// Sign of Y-bias at D = d from the case analysis. Throws DegenerateStratum
// when g(1) and g(0) are both zero.
YSign sign_y_stratum_rule(const ColliderTable& collider,
                          const BinaryConditional& d_given_c, int d);
Sign sign_y_stratum(const ColliderTable& collider,
                    const BinaryConditional& d_given_c, int d);

// Sign of regression-adjusted V-bias: sign(h).
Sign sign_lm_v(const ValidatedParams& params);

// Sign for any kind except Nabla as the embedded sign times the signs of the
// extension paths. Stratum conditioning uses the embedded V/Y sign; LM
// conditioning uses sign(h), and is Zero only when a path is broken.
Sign sign_extended(const ValidatedParams& params, const Conditioning& conditioning);

enum class GridFamily { Fig3, Fig4, Fig5 };

std::string_view to_string(GridFamily family);
GridFamily parse_family(std::string_view name);

struct ZeroLocus {
  std::string name;
  std::string expression;
};

struct GridCell {
  double p10 = 0.0;
  double p01 = 0.0;
  std::vector<Sign> signs;
};

// Sign verdicts over the (p_{C=1|10}, p_{C=1|01}) square at cell centers
// (i + 0.5) / resolution. Cells are ordered with p10 as the outer index.
struct SignGrid {
  GridFamily family = GridFamily::Fig3;
  StructureParams fixed;
  std::size_t resolution = 0;
  std::vector<std::string> columns;
  std::vector<ZeroLocus> loci;
  std::vector<GridCell> cells;

  const GridCell& at(std::size_t i10, std::size_t i01) const {
    return cells[i10 * resolution + i01];
  }
};

// Fig3 sweeps V-bias at C = 1 and C = 0 (fixed kind V or Nabla), Fig4 sweeps
// Y-bias at D = 1 and D = 0 (kind Y), Fig5 sweeps regression V-bias (kind
// V). The fixed p_c_given.01 and .10 entries are ignored.
SignGrid emit_grid(GridFamily family, const StructureParams& fixed,
                   std::size_t resolution);

void write_grid_csv(std::ostream& out, const SignGrid& grid);
SignGrid read_grid_csv(std::istream& in);
nlohmann::json grid_to_json(const SignGrid& grid);
SignGrid grid_from_json(const nlohmann::json& doc);

}  // namespace colliderbias
