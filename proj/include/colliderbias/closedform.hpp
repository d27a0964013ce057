#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "colliderbias/joint.hpp"
#include "colliderbias/sign.hpp"
#include "colliderbias/structures.hpp"

namespace colliderbias {

// A closed-form bias value together with the decomposition terms that
// produced it. OR values are multiplicative factors; everything else is a
// difference from the marginal association.
struct BiasReport {
  double value = 0.0;
  Scale scale = Scale::Cov;
  Conditioning conditioning = LinearModel{};
  Sign sign = Sign::Zero;
  std::vector<std::pair<std::string, double>> factors;

  // Throws std::out_of_range when the factor was not recorded.
  double factor(std::string_view name) const;
  bool has_factor(std::string_view name) const;
};

// Cross-product difference p_{c|00} p_{c|11} - p_{c|10} p_{c|01} of the
// collider's conditionals at level c. Defined for every kind.
double g(const ValidatedParams& params, int c);

// Stratum-specific V-bias on the Cov, RD or OR scale. Kind must be V.
BiasReport v_bias_stratum(const ValidatedParams& params, int c, Scale scale);

// OR-scale bias factor for the Nabla structure: the conditional OR over the
// marginal OR, which does not depend on the X -> Y edge.
BiasReport nabla_bias_or(const ValidatedParams& params, int c);

// Stratum-specific Y-bias when conditioning on D = d. Kind must be Y.
BiasReport y_bias_stratum(const ValidatedParams& params, int d, Scale scale);

// Y-bias on the covariance scale rebuilt from the two embedded V-biases.
double y_embedded_relation(const ValidatedParams& params, int d);

// The V (or Y) core of a structure: A and B renamed to the collider's
// parents and the extension edges dropped. V and Y map to themselves.
ValidatedParams embedded_core(const ValidatedParams& params);

// var(A | G = level) / var(X | G = level) in closed form, G being C or D.
// Kind must have an A.
double variance_ratio(const ValidatedParams& params, int level);

// Cov or RD bias of the six extended kinds as the embedded bias times the
// extension-path RDs (and the variance ratio on the RD scale).
BiasReport extended_bias_stratum(const ValidatedParams& params, int level,
                                 Scale scale);

// Negated product of the two marginal-effect brackets of the collider's
// parents. Its sign is the sign of the embedded V-bias under regression
// adjustment.
double h(const ValidatedParams& params);

// Regression weights of the two strata of the conditioning variable, in closed
// form for the V structure.
struct StratumWeights {
  double w0 = 0.0;
  double w1 = 0.0;
};

StratumWeights v_lm_weights(const ValidatedParams& params);

// Linear-regression V-bias. Kind must be V.
BiasReport v_bias_lm(const ValidatedParams& params);

// The stratum-size normalizer of the general regression formula, from the
// per-family closed expressions.
double phi(const ValidatedParams& params);

// The same normalizer from its definition,
//   P(G=0) P(G=1,X=1) P(G=1,X=0) + P(G=1) P(G=0,X=1) P(G=0,X=0),
// with G the conditioning variable of the table's kind.
double phi_from_joint(const JointTable& table);

// Regression bias for every kind except Nabla:
//   h * RD_left * RD_right * RD_child^2 * VAR_left * VAR_right / phi.
BiasReport general_lm_bias(const ValidatedParams& params);

}  // namespace colliderbias
