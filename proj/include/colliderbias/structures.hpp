#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace colliderbias {

// The nine binary-variable topologies. X is the exposure, Y the outcome, C the
// collider, D a child of C, and A/B extra causes that sit between the
// collider and X/Y.
enum class StructureKind {
  V,           // X -> C <- Y
  Nabla,       // V plus X -> Y
  Y,           // V plus C -> D
  M,           // X <- A -> C <- B -> Y
  LeftM,       // X <- A -> C <- Y
  RightM,      // X -> C <- B -> Y
  LongM,       // M plus C -> D
  LeftLongM,   // LeftM plus C -> D
  RightLongM,  // RightM plus C -> D
};

inline constexpr std::array<StructureKind, 9> kAllKinds = {
    StructureKind::V,     StructureKind::Nabla,  StructureKind::Y,
    StructureKind::M,     StructureKind::LeftM,  StructureKind::RightM,
    StructureKind::LongM, StructureKind::LeftLongM, StructureKind::RightLongM,
};

std::string_view to_string(StructureKind kind);
StructureKind parse_kind(std::string_view name);

bool has_child_d(StructureKind kind);
bool has_left_a(StructureKind kind);
bool has_right_b(StructureKind kind);
// True for the six kinds that extend an embedded V or Y core with A and/or B.
bool is_extended(StructureKind kind);

enum class Variable { A, B, X, Y, C, D };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view name);

// Parents of the collider: X or A on the left, Y or B on the right.
Variable left_parent(StructureKind kind);
Variable right_parent(StructureKind kind);
// The variable a stratum or regression adjustment conditions on: D when the
// structure has one, C otherwise.
Variable conditioning_variable(StructureKind kind);

// P(C = 1 | left = l, right = r). The first index is always the left-hand
// parent; access goes through prob() so the two indices cannot be swapped
// silently.
struct ColliderTable {
  double p00 = 0.0;
  double p01 = 0.0;  // left = 0, right = 1
  double p10 = 0.0;  // left = 1, right = 0
  double p11 = 0.0;

  double one_given(int left, int right) const;
  // P(C = level | left, right).
  double prob(int level, int left, int right) const;

  bool operator==(const ColliderTable&) const = default;
};

// P(child = 1 | parent = 0) and P(child = 1 | parent = 1).
struct BinaryConditional {
  double given0 = 0.0;
  double given1 = 0.0;

  double one_given(int parent) const { return parent ? given1 : given0; }
  double prob(int level, int parent) const {
    const double p = one_given(parent);
    return level ? p : 1.0 - p;
  }
  // Risk difference of the parent's effect on the child.
  double effect() const { return given1 - given0; }

  bool operator==(const BinaryConditional&) const = default;
};

// Raw parameterization of one structure instance. Optional fields must be
// present exactly when the kind uses them; validate() enforces that.
//
// For Nabla, p_y_given_b holds P(Y = 1 | X = x) and p_right is absent because
// the marginal of Y is implied by the X -> Y edge.
struct StructureParams {
  StructureKind kind = StructureKind::V;
  double p_left = 0.0;                // P(X = 1) or P(A = 1)
  std::optional<double> p_right;      // P(Y = 1) or P(B = 1)
  ColliderTable p_c_given;
  std::optional<BinaryConditional> p_x_given_a;
  std::optional<BinaryConditional> p_y_given_b;
  std::optional<BinaryConditional> p_d_given_c;

  bool operator==(const StructureParams&) const = default;
};

enum class Strictness {
  Lenient,  // every probability in [0, 1]
  Strict,   // every probability in (0, 1) and both levels of C (and D) reachable
};

// Parameters that passed validate(). Immutable; the accessors below resolve
// the kind-dependent slots so callers never branch on raw optionals.
class ValidatedParams {
 public:
  const StructureParams& raw() const { return params_; }
  StructureKind kind() const { return params_.kind; }
  Strictness strictness() const { return strictness_; }

  // Marginal P(parent = 1) for the collider's left/right parents.
  double left_cause() const { return params_.p_left; }
  double right_cause() const;
  const ColliderTable& collider() const { return params_.p_c_given; }

  // RD of A on X (1 when the kind has no A) and of B on Y (1 without B).
  double rd_left() const;
  double rd_right() const;
  // RD of C on D (1 when the kind has no D).
  double rd_child() const;

  const BinaryConditional& x_given_a() const;
  const BinaryConditional& y_given_b() const;
  const BinaryConditional& y_given_x() const;  // Nabla only
  const BinaryConditional& d_given_c() const;

  // P(C = 1) implied by the factorization.
  double collider_marginal() const;

 private:
  friend ValidatedParams validate(const StructureParams&, Strictness);
  ValidatedParams(StructureParams p, Strictness s)
      : params_(std::move(p)), strictness_(s) {}

  StructureParams params_;
  Strictness strictness_;
};

// Throws BiasError with OutOfRange, MissingField, ExtraField or
// DegenerateStratum.
ValidatedParams validate(const StructureParams& params,
                         Strictness strictness = Strictness::Lenient);

enum class Role {
  Exposure,
  Outcome,
  Collider,
  ColliderChild,
  LeftCause,
  RightCause,
};

std::string_view to_string(Role role);

struct VariableRole {
  Variable variable;
  Role role;
  std::vector<Variable> parents;
};

// Variables of the structure in topological order, each with its parents.
using RoleMap = std::vector<VariableRole>;

RoleMap variable_roles(StructureKind kind);
std::vector<Variable> variables(StructureKind kind);

}  // namespace colliderbias
