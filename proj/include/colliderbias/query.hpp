#pragma once

#include <optional>
#include <string>

#include "colliderbias/closedform.hpp"
#include "colliderbias/joint.hpp"
#include "colliderbias/structures.hpp"

namespace colliderbias {

// Result of answering one BiasQuery: the closed form when one exists for the
// (kind, scale, conditioning) triple, and always the oracle value.
struct Evaluation {
  std::optional<BiasReport> closed_form;
  OracleMeasure oracle;
  std::string route;  // name of the closed form used, or "oracle-only"
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;

  // Closed form and oracle agree (trivially true without a closed form).
  // Ratio scales compare relatively, the rest absolutely.
  bool within(double abs_tol = kAbsTolerance, double rel_tol = kRelTolerance) const;
};

// Strictness the query layer demands: covariance queries on a stratum accept
// boundary probabilities, everything else needs strict parameters.
Strictness required_strictness(const BiasQuery& query);

// Validates `params` at the required strictness and evaluates the query.
// Throws BiasError for invalid parameters or undefined quantities.
Evaluation evaluate(const StructureParams& params, const BiasQuery& query);

}  // namespace colliderbias
