#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <variant>
#include <vector>

#include "colliderbias/structures.hpp"

namespace colliderbias {

enum class Scale { Cov, RD, RR, OR, LMCoef };

std::string_view to_string(Scale scale);
Scale parse_scale(std::string_view name);

struct Assignment {
  Variable variable;
  int level;
};

using Event = std::vector<Assignment>;

// Condition on one level of C or D.
struct Stratum {
  Variable variable;
  int level;
};

// Adjust for C (or D) in a linear regression of Y on X.
struct LinearModel {};

using Conditioning = std::variant<Stratum, LinearModel>;

std::string describe(const Conditioning& conditioning);

// Exact joint distribution over the structure's binary variables. Cell index
// bit i holds the level of order[i].
class JointTable {
 public:
  StructureKind kind() const { return kind_; }
  const std::vector<Variable>& order() const { return order_; }
  const std::vector<double>& mass() const { return mass_; }

  bool contains(Variable v) const;
  // Bit position of v in a cell index; throws UnknownVariable.
  std::size_t bit_of(Variable v) const;
  int level_in(std::size_t cell, Variable v) const {
    return static_cast<int>((cell >> bit_of(v)) & 1U);
  }

 private:
  friend JointTable build_joint(const ValidatedParams&);
  StructureKind kind_ = StructureKind::V;
  std::vector<Variable> order_;
  std::vector<double> mass_;
};

JointTable build_joint(const ValidatedParams& params);

// Probability of the conjunction of assignments; prob(table, {}) == 1.
double prob(const JointTable& table, const Event& event);

// Conditional moments, optionally restricted to an event of positive mass.
double mean(const JointTable& table, Variable v, const Event& given = {});
double covariance(const JointTable& table, Variable e, Variable f,
                  const Event& given = {});
double variance(const JointTable& table, Variable v, const Event& given = {});

// Population coefficient of `x` in the least-squares projection of `y` on
// {1, x, g}, from the 2x2 normal equations on centered moments.
double regression_coefficient(const JointTable& table, Variable y, Variable x,
                              Variable g);

struct OracleMeasure {
  double value = 0.0;
  Scale scale = Scale::Cov;
  Conditioning conditioning = LinearModel{};
};

// Association of X and Y on the given scale within a stratum, or the X
// coefficient adjusted for the conditioning variable (scale ignored).
OracleMeasure cond_measure(const JointTable& table, Scale scale,
                           const Conditioning& conditioning);
// Association of X and Y without conditioning. For LMCoef this is the
// marginal RD.
double marginal_measure(const JointTable& table, Scale scale);

struct BiasQuery {
  Conditioning conditioning;
  Scale scale = Scale::Cov;
};

// Conditional minus marginal (Cov, RD, LM) or conditional over marginal
// (RR, OR).
OracleMeasure bias(const JointTable& table, const BiasQuery& query);

// Cell counts from n ancestral draws.
struct SampleTable {
  StructureKind kind = StructureKind::V;
  std::vector<Variable> order;
  std::vector<std::uint64_t> counts;
  std::uint64_t draws = 0;

  std::vector<double> frequencies() const;
};

// Draw n units by ancestral sampling. Variable j of unit i consumes the
// uniform produced by SplitMix64 at counter (seed, i * 8 + j), so each draw is
// addressable on its own and the output depends only on (params, n, seed).
SampleTable sample(const ValidatedParams& params, std::uint64_t n,
                   std::uint64_t seed);

}  // namespace colliderbias
