#include "colliderbias/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "colliderbias/error.hpp"

namespace colliderbias {

bool Evaluation::within(double abs_tol, double rel_tol) const {
  if (!closed_form) return true;
  if (oracle.scale == Scale::OR || oracle.scale == Scale::RR) {
    return rel_discrepancy <= rel_tol;
  }
  return abs_discrepancy <= abs_tol;
}

Strictness required_strictness(const BiasQuery& query) {
  if (std::holds_alternative<Stratum>(query.conditioning) &&
      query.scale == Scale::Cov) {
    return Strictness::Lenient;
  }
  return Strictness::Strict;
}

namespace {

std::optional<BiasReport> closed_form_for(const ValidatedParams& params,
                                          const BiasQuery& query,
                                          std::string& route) {
  const StructureKind kind = params.kind();
  if (std::holds_alternative<LinearModel>(query.conditioning)) {
    if (kind == StructureKind::Nabla) return std::nullopt;
    if (kind == StructureKind::V) {
      route = "v_bias_lm";
      return v_bias_lm(params);
    }
    route = "general_lm_bias";
    return general_lm_bias(params);
  }
  const Stratum s = std::get<Stratum>(query.conditioning);
  const Scale scale = query.scale;
  if (scale == Scale::RR) return std::nullopt;
  switch (kind) {
    case StructureKind::V:
      route = "v_bias_stratum";
      return v_bias_stratum(params, s.level, scale);
    case StructureKind::Nabla:
      if (scale != Scale::OR) return std::nullopt;
      route = "nabla_bias_or";
      return nabla_bias_or(params, s.level);
    case StructureKind::Y:
      route = "y_bias_stratum";
      return y_bias_stratum(params, s.level, scale);
    default:
      if (scale == Scale::OR) return std::nullopt;
      route = "extended_bias_stratum";
      return extended_bias_stratum(params, s.level, scale);
  }
}

}  // namespace

Evaluation evaluate(const StructureParams& raw, const BiasQuery& query) {
  if (const auto* s = std::get_if<Stratum>(&query.conditioning)) {
    const Variable expected = conditioning_variable(raw.kind);
    if (s->variable != expected) {
      throw BiasError(ErrorCode::UnsupportedQuery,
                      std::string(to_string(raw.kind)) + " is stratified on " +
                          std::string(to_string(expected)));
    }
    if (s->level != 0 && s->level != 1) {
      throw BiasError(ErrorCode::UnsupportedQuery, "stratum level must be 0 or 1");
    }
  }
  // Under regression adjustment the scale is ignored; the coefficient is an RD.
  const ValidatedParams params = validate(raw, required_strictness(query));

  Evaluation out;
  out.route = "oracle-only";
  out.closed_form = closed_form_for(params, query, out.route);
  out.oracle = bias(build_joint(params), query);
  if (out.closed_form) {
    out.abs_discrepancy = std::abs(out.closed_form->value - out.oracle.value);
    const double denom = std::max(std::abs(out.oracle.value),
                                  std::numeric_limits<double>::min());
    out.rel_discrepancy = out.abs_discrepancy / denom;
  }
  return out;
}

}  // namespace colliderbias
