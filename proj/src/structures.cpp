#include "colliderbias/structures.hpp"

#include <cmath>
#include <string>

#include "colliderbias/error.hpp"

namespace colliderbias {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::ExtraField: return "ExtraField";
    case ErrorCode::DegenerateStratum: return "DegenerateStratum";
    case ErrorCode::UndefinedRatio: return "UndefinedRatio";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::UnsupportedQuery: return "UnsupportedQuery";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

struct KindName {
  StructureKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {StructureKind::V, "V"},
    {StructureKind::Nabla, "Nabla"},
    {StructureKind::Y, "Y"},
    {StructureKind::M, "M"},
    {StructureKind::LeftM, "LeftM"},
    {StructureKind::RightM, "RightM"},
    {StructureKind::LongM, "LongM"},
    {StructureKind::LeftLongM, "LeftLongM"},
    {StructureKind::RightLongM, "RightLongM"},
};

}  // namespace

std::string_view to_string(StructureKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "?";
}

StructureKind parse_kind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw BiasError(ErrorCode::ParseError,
                  "unknown structure kind '" + std::string(name) + "'");
}

bool has_child_d(StructureKind kind) {
  return kind == StructureKind::Y || kind == StructureKind::LongM ||
         kind == StructureKind::LeftLongM || kind == StructureKind::RightLongM;
}

bool has_left_a(StructureKind kind) {
  return kind == StructureKind::M || kind == StructureKind::LeftM ||
         kind == StructureKind::LongM || kind == StructureKind::LeftLongM;
}

bool has_right_b(StructureKind kind) {
  return kind == StructureKind::M || kind == StructureKind::RightM ||
         kind == StructureKind::LongM || kind == StructureKind::RightLongM;
}

bool is_extended(StructureKind kind) {
  return has_left_a(kind) || has_right_b(kind);
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::A: return "A";
    case Variable::B: return "B";
    case Variable::X: return "X";
    case Variable::Y: return "Y";
    case Variable::C: return "C";
    case Variable::D: return "D";
  }
  return "?";
}

Variable parse_variable(std::string_view name) {
  for (Variable v : {Variable::A, Variable::B, Variable::X, Variable::Y,
                     Variable::C, Variable::D}) {
    if (to_string(v) == name) return v;
  }
  throw BiasError(ErrorCode::UnknownVariable,
                  "no variable named '" + std::string(name) + "'");
}

Variable left_parent(StructureKind kind) {
  return has_left_a(kind) ? Variable::A : Variable::X;
}

Variable right_parent(StructureKind kind) {
  return has_right_b(kind) ? Variable::B : Variable::Y;
}

Variable conditioning_variable(StructureKind kind) {
  return has_child_d(kind) ? Variable::D : Variable::C;
}

double ColliderTable::one_given(int left, int right) const {
  if (left) return right ? p11 : p10;
  return right ? p01 : p00;
}

double ColliderTable::prob(int level, int left, int right) const {
  const double p = one_given(left, right);
  return level ? p : 1.0 - p;
}

double ValidatedParams::right_cause() const {
  if (params_.kind == StructureKind::Nabla) {
    const auto& yx = *params_.p_y_given_b;
    return params_.p_left * yx.given1 + (1.0 - params_.p_left) * yx.given0;
  }
  return *params_.p_right;
}

double ValidatedParams::rd_left() const {
  return has_left_a(kind()) ? params_.p_x_given_a->effect() : 1.0;
}

double ValidatedParams::rd_right() const {
  return has_right_b(kind()) ? params_.p_y_given_b->effect() : 1.0;
}

double ValidatedParams::rd_child() const {
  return has_child_d(kind()) ? params_.p_d_given_c->effect() : 1.0;
}

const BinaryConditional& ValidatedParams::x_given_a() const {
  if (!has_left_a(kind())) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(kind())) + " has no A -> X edge");
  }
  return *params_.p_x_given_a;
}

const BinaryConditional& ValidatedParams::y_given_b() const {
  if (!has_right_b(kind())) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(kind())) + " has no B -> Y edge");
  }
  return *params_.p_y_given_b;
}

const BinaryConditional& ValidatedParams::y_given_x() const {
  if (kind() != StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(kind())) + " has no X -> Y edge");
  }
  return *params_.p_y_given_b;
}

const BinaryConditional& ValidatedParams::d_given_c() const {
  if (!has_child_d(kind())) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(kind())) + " has no C -> D edge");
  }
  return *params_.p_d_given_c;
}

double ValidatedParams::collider_marginal() const {
  const ColliderTable& c = params_.p_c_given;
  const double pl = params_.p_left;
  if (params_.kind == StructureKind::Nabla) {
    const auto& yx = *params_.p_y_given_b;
    double total = 0.0;
    for (int x = 0; x < 2; ++x) {
      const double px = x ? pl : 1.0 - pl;
      for (int y = 0; y < 2; ++y) {
        total += px * yx.prob(y, x) * c.one_given(x, y);
      }
    }
    return total;
  }
  const double pr = *params_.p_right;
  return pl * pr * c.p11 + pl * (1.0 - pr) * c.p10 +
         (1.0 - pl) * pr * c.p01 + (1.0 - pl) * (1.0 - pr) * c.p00;
}

namespace {

void check_probability(double value, const std::string& field,
                       Strictness strictness) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw BiasError(ErrorCode::OutOfRange,
                    field + " = " + std::to_string(value) + " not in [0, 1]");
  }
  if (strictness == Strictness::Strict && (value == 0.0 || value == 1.0)) {
    throw BiasError(ErrorCode::OutOfRange,
                    field + " = " + std::to_string(value) +
                        " not in (0, 1) under strict validation");
  }
}

void check_presence(bool present, bool expected, StructureKind kind,
                    const std::string& field) {
  if (expected && !present) {
    throw BiasError(ErrorCode::MissingField,
                    std::string(to_string(kind)) + " requires " + field);
  }
  if (!expected && present) {
    throw BiasError(ErrorCode::ExtraField,
                    std::string(to_string(kind)) + " does not use " + field);
  }
}

void check_stratum(double p_one, Variable v) {
  if (!(p_one > 0.0)) {
    throw BiasError(ErrorCode::DegenerateStratum,
                    "P(" + std::string(to_string(v)) + "=1) = 0");
  }
  if (!(p_one < 1.0)) {
    throw BiasError(ErrorCode::DegenerateStratum,
                    "P(" + std::string(to_string(v)) + "=0) = 0");
  }
}

}  // namespace

ValidatedParams validate(const StructureParams& params, Strictness strictness) {
  const StructureKind kind = params.kind;
  const bool nabla = kind == StructureKind::Nabla;

  check_presence(params.p_right.has_value(), !nabla, kind, "p_right");
  check_presence(params.p_x_given_a.has_value(), has_left_a(kind), kind,
                 "p_x_given_a");
  check_presence(params.p_y_given_b.has_value(), has_right_b(kind) || nabla,
                 kind, "p_y_given_b");
  check_presence(params.p_d_given_c.has_value(), has_child_d(kind), kind,
                 "p_d_given_c");

  // Range checks run leniently first; strict open-interval checks come after
  // the stratum checks so an unreachable collider level is reported as such.
  auto each_probability = [&](Strictness s) {
    check_probability(params.p_left, "p_left", s);
    if (params.p_right) check_probability(*params.p_right, "p_right", s);
    const ColliderTable& c = params.p_c_given;
    check_probability(c.p00, "p_c_given.00", s);
    check_probability(c.p01, "p_c_given.01", s);
    check_probability(c.p10, "p_c_given.10", s);
    check_probability(c.p11, "p_c_given.11", s);
    auto conditional = [&](const std::optional<BinaryConditional>& bc,
                           const std::string& name) {
      if (!bc) return;
      check_probability(bc->given0, name + ".0", s);
      check_probability(bc->given1, name + ".1", s);
    };
    conditional(params.p_x_given_a, "p_x_given_a");
    conditional(params.p_y_given_b, "p_y_given_b");
    conditional(params.p_d_given_c, "p_d_given_c");
  };
  each_probability(Strictness::Lenient);

  ValidatedParams out(params, strictness);
  if (strictness == Strictness::Strict) {
    const double pc = out.collider_marginal();
    check_stratum(pc, Variable::C);
    if (has_child_d(kind)) {
      const auto& dc = *params.p_d_given_c;
      check_stratum(pc * dc.given1 + (1.0 - pc) * dc.given0, Variable::D);
    }
    each_probability(Strictness::Strict);
  }
  return out;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Exposure: return "exposure";
    case Role::Outcome: return "outcome";
    case Role::Collider: return "collider";
    case Role::ColliderChild: return "collider-child";
    case Role::LeftCause: return "left-cause";
    case Role::RightCause: return "right-cause";
  }
  return "?";
}

RoleMap variable_roles(StructureKind kind) {
  RoleMap roles;
  if (has_left_a(kind)) roles.push_back({Variable::A, Role::LeftCause, {}});
  if (has_right_b(kind) && has_left_a(kind)) {
    roles.push_back({Variable::B, Role::RightCause, {}});
  }
  if (has_left_a(kind)) {
    roles.push_back({Variable::X, Role::Exposure, {Variable::A}});
  } else {
    roles.push_back({Variable::X, Role::Exposure, {}});
  }
  if (has_right_b(kind) && !has_left_a(kind)) {
    roles.push_back({Variable::B, Role::RightCause, {}});
  }
  if (has_right_b(kind)) {
    roles.push_back({Variable::Y, Role::Outcome, {Variable::B}});
  } else if (kind == StructureKind::Nabla) {
    roles.push_back({Variable::Y, Role::Outcome, {Variable::X}});
  } else {
    roles.push_back({Variable::Y, Role::Outcome, {}});
  }
  roles.push_back(
      {Variable::C, Role::Collider, {left_parent(kind), right_parent(kind)}});
  if (has_child_d(kind)) {
    roles.push_back({Variable::D, Role::ColliderChild, {Variable::C}});
  }
  return roles;
}

std::vector<Variable> variables(StructureKind kind) {
  std::vector<Variable> out;
  for (const auto& r : variable_roles(kind)) out.push_back(r.variable);
  return out;
}

}  // namespace colliderbias
