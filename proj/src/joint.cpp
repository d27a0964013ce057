#include "colliderbias/joint.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "colliderbias/error.hpp"
#include "colliderbias/rng.hpp"

namespace colliderbias {

std::string_view to_string(Scale scale) {
  switch (scale) {
    case Scale::Cov: return "cov";
    case Scale::RD: return "rd";
    case Scale::RR: return "rr";
    case Scale::OR: return "or";
    case Scale::LMCoef: return "lm";
  }
  return "?";
}

Scale parse_scale(std::string_view name) {
  for (Scale s : {Scale::Cov, Scale::RD, Scale::RR, Scale::OR, Scale::LMCoef}) {
    if (to_string(s) == name) return s;
  }
  throw BiasError(ErrorCode::ParseError,
                  "unknown scale '" + std::string(name) + "'");
}

std::string describe(const Conditioning& conditioning) {
  if (const auto* s = std::get_if<Stratum>(&conditioning)) {
    return std::string(to_string(s->variable)) + "=" + std::to_string(s->level);
  }
  return "lm";
}

bool JointTable::contains(Variable v) const {
  for (Variable o : order_) {
    if (o == v) return true;
  }
  return false;
}

std::size_t JointTable::bit_of(Variable v) const {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (order_[i] == v) return i;
  }
  throw BiasError(ErrorCode::UnknownVariable,
                  std::string(to_string(v)) + " is not in the " +
                      std::string(to_string(kind_)) + " structure");
}

namespace {

// P(v = 1 | its parents), reading parent levels from `cell`. Parents always
// precede their children in `order`, so a partially filled cell suffices.
double one_given_parents(const ValidatedParams& params, Variable v,
                         const std::vector<Variable>& order, std::size_t cell) {
  auto level = [&](Variable u) -> int {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == u) return static_cast<int>((cell >> i) & 1U);
    }
    throw std::logic_error("parent missing from variable order");
  };
  const StructureKind kind = params.kind();
  switch (v) {
    case Variable::A:
      return params.left_cause();
    case Variable::B:
      return params.right_cause();
    case Variable::X:
      if (has_left_a(kind)) return params.x_given_a().one_given(level(Variable::A));
      return params.left_cause();
    case Variable::Y:
      if (has_right_b(kind)) return params.y_given_b().one_given(level(Variable::B));
      if (kind == StructureKind::Nabla) {
        return params.y_given_x().one_given(level(Variable::X));
      }
      return params.right_cause();
    case Variable::C:
      return params.collider().one_given(level(left_parent(kind)),
                                         level(right_parent(kind)));
    case Variable::D:
      return params.d_given_c().one_given(level(Variable::C));
  }
  throw std::logic_error("unhandled variable");
}

void require_positive(double p, const std::string& what) {
  if (!(p > 0.0)) {
    throw BiasError(ErrorCode::DegenerateStratum, what + " has zero mass");
  }
}

struct StratumView {
  Event given;
  std::string label;
};

StratumView stratum_view(const JointTable& table, const Stratum& s) {
  if (!table.contains(s.variable)) {
    throw BiasError(ErrorCode::UnknownVariable,
                    std::string(to_string(s.variable)) + " is not in the " +
                        std::string(to_string(table.kind())) + " structure");
  }
  if (s.variable == Variable::X || s.variable == Variable::Y) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "cannot stratify on the exposure or outcome");
  }
  if (s.level != 0 && s.level != 1) {
    throw BiasError(ErrorCode::UnsupportedQuery, "stratum level must be 0 or 1");
  }
  StratumView view{{{s.variable, s.level}},
                   std::string(to_string(s.variable)) + "=" +
                       std::to_string(s.level)};
  require_positive(prob(table, view.given), view.label);
  return view;
}

Event with(const Event& base, Assignment extra) {
  Event out = base;
  out.push_back(extra);
  return out;
}

// Association of X and Y on a stratum-type scale, restricted to `given`.
double association(const JointTable& table, Scale scale, const Event& given,
                   const std::string& label) {
  if (scale == Scale::Cov) {
    return covariance(table, Variable::X, Variable::Y, given);
  }
  const double px1 = prob(table, with(given, {Variable::X, 1}));
  const double px0 = prob(table, with(given, {Variable::X, 0}));
  require_positive(px1, label.empty() ? "X=1" : "X=1," + label);
  require_positive(px0, label.empty() ? "X=0" : "X=0," + label);
  Event y1x1 = with(given, {Variable::X, 1});
  y1x1.push_back({Variable::Y, 1});
  Event y1x0 = with(given, {Variable::X, 0});
  y1x0.push_back({Variable::Y, 1});
  const double risk1 = prob(table, y1x1) / px1;
  const double risk0 = prob(table, y1x0) / px0;
  switch (scale) {
    case Scale::RD:
      return risk1 - risk0;
    case Scale::RR:
      if (!(risk0 > 0.0) || !(risk1 > 0.0)) {
        throw BiasError(ErrorCode::UndefinedRatio,
                        "risk ratio needs P(Y=1|X=x) > 0 for both x");
      }
      return risk1 / risk0;
    case Scale::OR:
      if (!(risk0 > 0.0) || !(risk1 > 0.0) || !(risk0 < 1.0) || !(risk1 < 1.0)) {
        throw BiasError(ErrorCode::UndefinedRatio,
                        "odds ratio needs P(Y=1|X=x) in (0,1) for both x");
      }
      return (risk1 / (1.0 - risk1)) / (risk0 / (1.0 - risk0));
    default:
      break;
  }
  throw std::logic_error("association: unsupported scale");
}

}  // namespace

JointTable build_joint(const ValidatedParams& params) {
  JointTable table;
  table.kind_ = params.kind();
  table.order_ = variables(params.kind());
  const std::size_t n = table.order_.size();
  table.mass_.assign(std::size_t{1} << n, 0.0);
  for (std::size_t cell = 0; cell < table.mass_.size(); ++cell) {
    double m = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p1 = one_given_parents(params, table.order_[i], table.order_, cell);
      m *= ((cell >> i) & 1U) ? p1 : 1.0 - p1;
    }
    table.mass_[cell] = m;
  }
  return table;
}

double prob(const JointTable& table, const Event& event) {
  std::size_t mask = 0;
  std::size_t want = 0;
  for (const Assignment& a : event) {
    const std::size_t bit = std::size_t{1} << table.bit_of(a.variable);
    if (a.level != 0 && a.level != 1) {
      throw BiasError(ErrorCode::UnsupportedQuery,
                      "binary variables take levels 0 or 1");
    }
    if ((mask & bit) && (((want & bit) != 0) != (a.level == 1))) return 0.0;
    mask |= bit;
    if (a.level) want |= bit;
  }
  double total = 0.0;
  const auto& mass = table.mass();
  for (std::size_t cell = 0; cell < mass.size(); ++cell) {
    if ((cell & mask) == want) total += mass[cell];
  }
  return total;
}

double mean(const JointTable& table, Variable v, const Event& given) {
  const double pg = prob(table, given);
  require_positive(pg, "conditioning event");
  return prob(table, with(given, {v, 1})) / pg;
}

double covariance(const JointTable& table, Variable e, Variable f,
                  const Event& given) {
  const double pg = prob(table, given);
  require_positive(pg, "conditioning event");
  Event both = with(given, {e, 1});
  both.push_back({f, 1});
  const double exy = prob(table, both) / pg;
  return exy - mean(table, e, given) * mean(table, f, given);
}

double variance(const JointTable& table, Variable v, const Event& given) {
  const double m = mean(table, v, given);
  return m * (1.0 - m);
}

double regression_coefficient(const JointTable& table, Variable y, Variable x,
                              Variable g) {
  const double vxx = variance(table, x);
  const double vgg = variance(table, g);
  const double vxg = covariance(table, x, g);
  const double vxy = covariance(table, x, y);
  const double vgy = covariance(table, g, y);
  const double det = vxx * vgg - vxg * vxg;
  if (!(det > 1e-15 * vxx * vgg) || !(vxx > 0.0) || !(vgg > 0.0)) {
    throw BiasError(ErrorCode::SingularDesign,
                    std::string(to_string(x)) + " and " +
                        std::string(to_string(g)) + " are collinear");
  }
  return (vgg * vxy - vxg * vgy) / det;
}

OracleMeasure cond_measure(const JointTable& table, Scale scale,
                           const Conditioning& conditioning) {
  OracleMeasure out;
  out.conditioning = conditioning;
  if (std::holds_alternative<LinearModel>(conditioning)) {
    out.scale = Scale::LMCoef;
    out.value = regression_coefficient(table, Variable::Y, Variable::X,
                                       conditioning_variable(table.kind()));
    return out;
  }
  if (scale == Scale::LMCoef) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "the lm scale requires linear-model conditioning");
  }
  const StratumView view = stratum_view(table, std::get<Stratum>(conditioning));
  out.scale = scale;
  out.value = association(table, scale, view.given, view.label);
  return out;
}

double marginal_measure(const JointTable& table, Scale scale) {
  return association(table, scale == Scale::LMCoef ? Scale::RD : scale, {}, "");
}

OracleMeasure bias(const JointTable& table, const BiasQuery& query) {
  if (const auto* s = std::get_if<Stratum>(&query.conditioning)) {
    const Variable expected = conditioning_variable(table.kind());
    if (s->variable != expected) {
      throw BiasError(ErrorCode::UnsupportedQuery,
                      std::string(to_string(table.kind())) + " conditions on " +
                          std::string(to_string(expected)) + ", not " +
                          std::string(to_string(s->variable)));
    }
  }
  OracleMeasure out = cond_measure(table, query.scale, query.conditioning);
  const double marginal = marginal_measure(table, out.scale);
  if (table.kind() != StructureKind::Nabla) {
    const double marginal_cov = covariance(table, Variable::X, Variable::Y);
    if (std::abs(marginal_cov) > 1e-12) {
      throw std::logic_error("X and Y are marginally dependent in " +
                             std::string(to_string(table.kind())));
    }
  }
  if (out.scale == Scale::RR || out.scale == Scale::OR) {
    out.value /= marginal;
  } else {
    out.value -= marginal;
  }
  return out;
}

std::vector<double> SampleTable::frequencies() const {
  std::vector<double> out(counts.size(), 0.0);
  if (draws == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(draws);
  }
  return out;
}

SampleTable sample(const ValidatedParams& params, std::uint64_t n,
                   std::uint64_t seed) {
  if (n == 0) {
    throw BiasError(ErrorCode::OutOfRange, "sample size must be at least 1");
  }
  SampleTable out;
  out.kind = params.kind();
  out.order = variables(params.kind());
  out.counts.assign(std::size_t{1} << out.order.size(), 0);
  out.draws = n;
  const std::size_t nv = out.order.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::size_t cell = 0;
    for (std::size_t j = 0; j < nv; ++j) {
      const double p1 = one_given_parents(params, out.order[j], out.order, cell);
      if (counter_uniform(seed, i * 8 + j) < p1) cell |= std::size_t{1} << j;
    }
    ++out.counts[cell];
  }
  return out;
}

}  // namespace colliderbias
