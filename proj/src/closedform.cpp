#include "colliderbias/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "colliderbias/error.hpp"

namespace colliderbias {

double BiasReport::factor(std::string_view name) const {
  for (const auto& [key, value] : factors) {
    if (key == name) return value;
  }
  throw std::out_of_range("no factor named " + std::string(name));
}

bool BiasReport::has_factor(std::string_view name) const {
  return std::any_of(factors.begin(), factors.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

namespace {

// Post-condition check between two algebraic routes to the same quantity.
void ensure_close(double a, double b, const std::string& what) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (!(std::abs(a - b) <= 1e-9 * scale)) {
    throw std::logic_error(what + ": " + std::to_string(a) +
                           " != " + std::to_string(b));
  }
}

void require_kind(const ValidatedParams& params, StructureKind kind,
                  std::string_view op) {
  if (params.kind() != kind) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(op) + " needs a " + std::string(to_string(kind)) +
                        " structure, got " +
                        std::string(to_string(params.kind())));
  }
}

void require_level(int level) {
  if (level != 0 && level != 1) {
    throw BiasError(ErrorCode::UnsupportedQuery, "level must be 0 or 1");
  }
}

void require_positive(double value, const std::string& what) {
  if (!(value > 0.0)) {
    throw BiasError(ErrorCode::DegenerateStratum, what + " is zero");
  }
}

void require_ratio(double numerator, double denominator, const std::string& what) {
  if (!(denominator > 0.0) || !(numerator > 0.0)) {
    throw BiasError(ErrorCode::UndefinedRatio, what + " has a zero term");
  }
}

Sign report_sign(double value, Scale scale) {
  return scale == Scale::OR ? sign_of_factor(value) : sign_of(value);
}

// Marginals of the collider's two parents and its conditional table. For the
// extended kinds these are A and/or B rather than X and Y.
struct ColliderCore {
  double pl;
  double pr;
  const ColliderTable& q;

  explicit ColliderCore(const ValidatedParams& p)
      : pl(p.left_cause()), pr(p.right_cause()), q(p.collider()) {}

  // P(C = c)
  double collider(int c) const {
    return pl * pr * q.prob(c, 1, 1) + pl * (1 - pr) * q.prob(c, 1, 0) +
           (1 - pl) * pr * q.prob(c, 0, 1) +
           (1 - pl) * (1 - pr) * q.prob(c, 0, 0);
  }
  // P(C = c | left = l)
  double collider_given_left(int c, int l) const {
    return pr * q.prob(c, l, 1) + (1 - pr) * q.prob(c, l, 0);
  }
  // Marginal effects P(C=1 | parent=1) - P(C=1 | parent=0) of the left and
  // right parent. Each averages over the other parent's marginal.
  double left_effect() const {
    return pr * (q.p11 - q.p01) + (1 - pr) * (q.p10 - q.p00);
  }
  double right_effect() const {
    return pl * (q.p11 - q.p10) + (1 - pl) * (q.p01 - q.p00);
  }
};

StratumWeights weights_from_joint(const JointTable& table) {
  const Variable gv = conditioning_variable(table.kind());
  const double phi_def = phi_from_joint(table);
  auto weight = [&](int level) {
    return prob(table, {{gv, 1 - level}}) *
           prob(table, {{gv, level}, {Variable::X, 1}}) *
           prob(table, {{gv, level}, {Variable::X, 0}}) / phi_def;
  };
  return {weight(0), weight(1)};
}

}  // namespace

double g(const ValidatedParams& params, int c) {
  require_level(c);
  const ColliderTable& q = params.collider();
  return q.prob(c, 0, 0) * q.prob(c, 1, 1) - q.prob(c, 1, 0) * q.prob(c, 0, 1);
}

BiasReport v_bias_stratum(const ValidatedParams& params, int c, Scale scale) {
  require_kind(params, StructureKind::V, "v_bias_stratum");
  require_level(c);
  const ColliderCore core(params);
  const ColliderTable& q = params.collider();
  const double px = core.pl;
  const double py = core.pr;
  const double gc = g(params, c);
  const double pc = core.collider(c);
  require_positive(pc, "P(C=" + std::to_string(c) + ")");

  BiasReport out;
  out.scale = scale;
  out.conditioning = Stratum{Variable::C, c};
  out.factors = {{"g(" + std::to_string(c) + ")", gc}, {"P(C=c)", pc}};
  switch (scale) {
    case Scale::Cov:
      out.value = px * (1 - px) * py * (1 - py) * gc / (pc * pc);
      break;
    case Scale::RD: {
      const double given_x1 = py * q.prob(c, 1, 1) + (1 - py) * q.prob(c, 1, 0);
      const double given_x0 = py * q.prob(c, 0, 1) + (1 - py) * q.prob(c, 0, 0);
      require_positive(given_x1 * given_x0, "P(C=c|X=1) P(C=c|X=0)");
      out.value = py * (1 - py) * gc / (given_x1 * given_x0);
      break;
    }
    case Scale::OR: {
      const double num = q.prob(c, 0, 0) * q.prob(c, 1, 1);
      const double den = q.prob(c, 1, 0) * q.prob(c, 0, 1);
      require_ratio(num, den, "p_{c|00} p_{c|11} / (p_{c|10} p_{c|01})");
      out.value = num / den;
      break;
    }
    default:
      throw BiasError(ErrorCode::UnsupportedQuery,
                      "no closed form for V-bias on the " +
                          std::string(to_string(scale)) + " scale");
  }
  out.sign = report_sign(out.value, scale);
  return out;
}

BiasReport nabla_bias_or(const ValidatedParams& params, int c) {
  require_kind(params, StructureKind::Nabla, "nabla_bias_or");
  require_level(c);
  const ColliderTable& q = params.collider();
  const double num = q.prob(c, 0, 0) * q.prob(c, 1, 1);
  const double den = q.prob(c, 1, 0) * q.prob(c, 0, 1);
  require_ratio(num, den, "p_{c|00} p_{c|11} / (p_{c|10} p_{c|01})");

  BiasReport out;
  out.scale = Scale::OR;
  out.conditioning = Stratum{Variable::C, c};
  out.value = num / den;
  out.sign = sign_of_factor(out.value);

  const JointTable table = build_joint(params);
  const double conditional =
      cond_measure(table, Scale::OR, Stratum{Variable::C, c}).value;
  const double marginal = marginal_measure(table, Scale::OR);
  ensure_close(conditional, marginal * out.value,
               "conditional OR vs marginal OR times bias factor");
  out.factors = {{"marginal OR", marginal}, {"conditional OR", conditional}};
  return out;
}

BiasReport y_bias_stratum(const ValidatedParams& params, int d, Scale scale) {
  require_kind(params, StructureKind::Y, "y_bias_stratum");
  require_level(d);
  const ColliderCore core(params);
  const ColliderTable& q = params.collider();
  const double px = core.pl;
  const double py = core.pr;
  const double pd1 = params.d_given_c().prob(d, 1);  // P(D=d | C=1)
  const double pd0 = params.d_given_c().prob(d, 0);  // P(D=d | C=0)
  const double g1 = g(params, 1);
  const double g0 = g(params, 0);
  const double pdd = pd1 * core.collider(1) + pd0 * core.collider(0);
  require_positive(pdd, "P(D=" + std::to_string(d) + ")");
  const double sign_term = (pd1 - pd0) * (pd1 * g1 - pd0 * g0);

  BiasReport out;
  out.scale = scale;
  out.conditioning = Stratum{Variable::D, d};
  out.factors = {{"g(0)", g0},
                 {"g(1)", g1},
                 {"p_{d|1}-p_{d|0}", pd1 - pd0},
                 {"P(D=d)", pdd}};
  switch (scale) {
    case Scale::Cov:
      out.value = px * (1 - px) * py * (1 - py) / (pdd * pdd) * sign_term;
      break;
    case Scale::RD: {
      const double x1 = py * (q.prob(1, 1, 1) * pd1 + q.prob(0, 1, 1) * pd0) +
                        (1 - py) * (q.prob(1, 1, 0) * pd1 + q.prob(0, 1, 0) * pd0);
      const double x0 = py * (q.prob(1, 0, 1) * pd1 + q.prob(0, 0, 1) * pd0) +
                        (1 - py) * (q.prob(1, 0, 0) * pd1 + q.prob(0, 0, 0) * pd0);
      require_positive(x1 * x0, "P(D=d|X=1) P(D=d|X=0)");
      out.value = py * (1 - py) / (x1 * x0) * sign_term;
      break;
    }
    case Scale::OR: {
      const double num = (pd1 - pd0) * (pd1 * q.prob(1, 0, 0) * q.prob(1, 1, 1) -
                                        pd0 * q.prob(0, 0, 0) * q.prob(0, 1, 1)) +
                         pd1 * pd0;
      const double den = (pd1 - pd0) * (pd1 * q.prob(1, 1, 0) * q.prob(1, 0, 1) -
                                        pd0 * q.prob(0, 1, 0) * q.prob(0, 0, 1)) +
                         pd1 * pd0;
      require_ratio(num, den, "Y-bias odds ratio");
      out.value = num / den;
      break;
    }
    default:
      throw BiasError(ErrorCode::UnsupportedQuery,
                      "no closed form for Y-bias on the " +
                          std::string(to_string(scale)) + " scale");
  }
  out.sign = report_sign(out.value, scale);
  return out;
}

ValidatedParams embedded_core(const ValidatedParams& params) {
  const StructureKind kind = params.kind();
  if (kind == StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "Nabla has no marginally independent V core");
  }
  StructureParams core;
  core.kind = has_child_d(kind) ? StructureKind::Y : StructureKind::V;
  core.p_left = params.left_cause();
  core.p_right = params.right_cause();
  core.p_c_given = params.collider();
  if (has_child_d(kind)) core.p_d_given_c = params.d_given_c();
  return validate(core, params.strictness());
}

double y_embedded_relation(const ValidatedParams& params, int d) {
  require_kind(params, StructureKind::Y, "y_embedded_relation");
  require_level(d);
  StructureParams vraw;
  vraw.kind = StructureKind::V;
  vraw.p_left = params.left_cause();
  vraw.p_right = params.right_cause();
  vraw.p_c_given = params.collider();
  const ValidatedParams v = validate(vraw, params.strictness());
  const ColliderCore core(params);
  const double pd1 = params.d_given_c().prob(d, 1);
  const double pd0 = params.d_given_c().prob(d, 0);
  const double pc1 = core.collider(1);
  const double pc0 = core.collider(0);
  const double pdd = pd1 * pc1 + pd0 * pc0;
  require_positive(pdd, "P(D=" + std::to_string(d) + ")");
  const double vcov1 = v_bias_stratum(v, 1, Scale::Cov).value;
  const double vcov0 = v_bias_stratum(v, 0, Scale::Cov).value;
  const double value = (pd1 - pd0) / (pdd * pdd) *
                       (pd1 * pc1 * pc1 * vcov1 - pd0 * pc0 * pc0 * vcov0);
  ensure_close(value, y_bias_stratum(params, d, Scale::Cov).value,
               "embedded V relation vs direct Y-bias");
  return value;
}

double variance_ratio(const ValidatedParams& params, int level) {
  require_level(level);
  if (!has_left_a(params.kind())) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "variance ratio needs a structure with A");
  }
  const ColliderCore core(params);
  const double pa = core.pl;
  // P(A = a, G = level) / P(A = a), with G = C or D.
  auto stratum_given_a = [&](int a) {
    if (!has_child_d(params.kind())) return core.collider_given_left(level, a);
    const double pd1 = params.d_given_c().prob(level, 1);
    const double pd0 = params.d_given_c().prob(level, 0);
    return pd1 * core.collider_given_left(1, a) + pd0 * core.collider_given_left(0, a);
  };
  const double n1 = pa * stratum_given_a(1);
  const double n0 = (1 - pa) * stratum_given_a(0);
  const BinaryConditional& x = params.x_given_a();
  const double x1 = x.given1 * n1 + x.given0 * n0;
  const double x0 = (1 - x.given1) * n1 + (1 - x.given0) * n0;
  require_positive(x1 * x0, "var(X | stratum)");
  return n1 * n0 / (x1 * x0);
}

BiasReport extended_bias_stratum(const ValidatedParams& params, int level,
                                 Scale scale) {
  if (!is_extended(params.kind())) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(params.kind())) +
                        " is not an extended structure");
  }
  if (scale != Scale::Cov && scale != Scale::RD) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "extended structures have closed forms on cov and rd only");
  }
  require_level(level);
  const ValidatedParams core = embedded_core(params);
  const BiasReport embedded = core.kind() == StructureKind::V
                                  ? v_bias_stratum(core, level, scale)
                                  : y_bias_stratum(core, level, scale);
  const double rd_left = params.rd_left();
  const double rd_right = params.rd_right();

  BiasReport out;
  out.scale = scale;
  out.conditioning = Stratum{conditioning_variable(params.kind()), level};
  out.factors = {{"embedded", embedded.value},
                 {"RD_left", rd_left},
                 {"RD_right", rd_right}};
  out.value = rd_left * embedded.value * rd_right;
  if (scale == Scale::RD) {
    const double vr = has_left_a(params.kind()) ? variance_ratio(params, level) : 1.0;
    out.factors.emplace_back("VR", vr);
    out.value *= vr;
  }
  for (const auto& f : embedded.factors) out.factors.push_back(f);
  out.sign = sign_of(out.value);
  return out;
}

double h(const ValidatedParams& params) {
  if (params.kind() == StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery, "h is not defined for Nabla");
  }
  const ColliderCore core(params);
  const double value = -core.left_effect() * core.right_effect();
  ensure_close(value, core.collider(0) * g(params, 1) + core.collider(1) * g(params, 0),
               "h vs P(C=0) g(1) + P(C=1) g(0)");
  return value;
}

StratumWeights v_lm_weights(const ValidatedParams& params) {
  require_kind(params, StructureKind::V, "v_lm_weights");
  const ColliderCore core(params);
  const double px = core.pl;
  // P(C = c, X = x)
  auto joint_cx = [&](int c, int x) {
    return (x ? px : 1 - px) * core.collider_given_left(c, x);
  };
  const double pc0 = core.collider(0);
  const double pc1 = core.collider(1);
  const double denom =
      pc0 * joint_cx(1, 1) * joint_cx(1, 0) + pc1 * joint_cx(0, 1) * joint_cx(0, 0);
  require_positive(denom, "regression weight normalizer");
  return {pc1 * joint_cx(0, 1) * joint_cx(0, 0) / denom,
          pc0 * joint_cx(1, 1) * joint_cx(1, 0) / denom};
}

BiasReport v_bias_lm(const ValidatedParams& params) {
  require_kind(params, StructureKind::V, "v_bias_lm");
  const ColliderCore core(params);
  const ColliderTable& q = params.collider();
  const double px = core.pl;
  const double py = core.pr;
  const double denom =
      px * (q.prob(1, 1, 1) * py + q.prob(1, 1, 0) * (1 - py)) *
          (q.prob(0, 1, 1) * py + q.prob(0, 1, 0) * (1 - py)) +
      (1 - px) * (q.prob(1, 0, 1) * py + q.prob(1, 0, 0) * (1 - py)) *
          (q.prob(0, 0, 1) * py + q.prob(0, 0, 0) * (1 - py));
  require_positive(denom, "regression denominator");
  const double hv = h(params);

  BiasReport out;
  out.scale = Scale::LMCoef;
  out.conditioning = LinearModel{};
  out.value = -core.left_effect() * core.right_effect() * py * (1 - py) / denom;
  out.sign = sign_of(out.value);

  const StratumWeights w = v_lm_weights(params);
  const double rd1 = v_bias_stratum(params, 1, Scale::RD).value;
  const double rd0 = v_bias_stratum(params, 0, Scale::RD).value;
  ensure_close(out.value, w.w1 * rd1 + w.w0 * rd0,
               "regression V-bias vs weighted stratum RDs");
  out.factors = {{"h", hv}, {"w_{C=1}", w.w1}, {"w_{C=0}", w.w0}};
  return out;
}

double phi(const ValidatedParams& params) {
  const StructureKind kind = params.kind();
  if (kind == StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery, "phi is not defined for Nabla");
  }
  const ColliderCore core(params);
  const ColliderTable& q = params.collider();
  const double pl = core.pl;
  const double pr = core.pr;

  if (!has_left_a(kind)) {
    // X is the collider's left parent (V, RightM, Y, RightLongM).
    if (!has_child_d(kind)) {
      auto bracket = [&](int x) {
        return (pr * q.prob(1, x, 1) + (1 - pr) * q.prob(1, x, 0)) *
               (pr * q.prob(0, x, 1) + (1 - pr) * q.prob(0, x, 0));
      };
      return pl * (1 - pl) * (pl * bracket(1) + (1 - pl) * bracket(0));
    }
    const BinaryConditional& dc = params.d_given_c();
    // P(D = d | X = x)
    auto d_given_x = [&](int x, int d) {
      return pr * q.prob(1, x, 1) * dc.prob(d, 1) + pr * q.prob(0, x, 1) * dc.prob(d, 0) +
             (1 - pr) * q.prob(1, x, 0) * dc.prob(d, 1) +
             (1 - pr) * q.prob(0, x, 0) * dc.prob(d, 0);
    };
    return pl * (1 - pl) *
           (pl * d_given_x(1, 1) * d_given_x(1, 0) +
            (1 - pl) * d_given_x(0, 1) * d_given_x(0, 0));
  }

  // A is the collider's left parent (LeftM, M, LeftLongM, LongM).
  const BinaryConditional& xa = params.x_given_a();
  const double px1 = pl * xa.given1 + (1 - pl) * xa.given0;
  const double px0 = pl * (1 - xa.given1) + (1 - pl) * (1 - xa.given0);
  auto collider_level = [&](int c) {
    return pl * pr * q.prob(c, 1, 1) + pl * (1 - pr) * q.prob(c, 1, 0) +
           (1 - pl) * pr * q.prob(c, 0, 1) + (1 - pl) * (1 - pr) * q.prob(c, 0, 0);
  };
  const double u1 = collider_level(1);
  const double u0 = collider_level(0);
  const double rd_left = xa.effect();
  const double cross = pl * pl * (1 - pl) * (1 - pl) * rd_left * rd_left *
                       core.left_effect() * core.left_effect();
  if (!has_child_d(kind)) {
    return px1 * px0 * u1 * u0 - cross;
  }
  const BinaryConditional& dc = params.d_given_c();
  const double d1 = dc.given1 * u1 + dc.given0 * u0;
  const double d0 = (1 - dc.given1) * u1 + (1 - dc.given0) * u0;
  return px1 * px0 * d1 * d0 - cross * dc.effect() * dc.effect();
}

double phi_from_joint(const JointTable& table) {
  const Variable gv = conditioning_variable(table.kind());
  return prob(table, {{gv, 0}}) * prob(table, {{gv, 1}, {Variable::X, 1}}) *
             prob(table, {{gv, 1}, {Variable::X, 0}}) +
         prob(table, {{gv, 1}}) * prob(table, {{gv, 0}, {Variable::X, 1}}) *
             prob(table, {{gv, 0}, {Variable::X, 0}});
}

BiasReport general_lm_bias(const ValidatedParams& params) {
  if (params.kind() == StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "the general regression formula excludes Nabla");
  }
  const ColliderCore core(params);
  const double hv = h(params);
  const double rd_left = params.rd_left();
  const double rd_right = params.rd_right();
  const double rd_child = params.rd_child();
  const double var_left = core.pl * (1 - core.pl);
  const double var_right = core.pr * (1 - core.pr);
  const double phi_closed = phi(params);
  require_positive(phi_closed, "phi");

  const JointTable table = build_joint(params);
  ensure_close(phi_closed, phi_from_joint(table), "closed-form phi vs definition");
  const StratumWeights w = weights_from_joint(table);

  BiasReport out;
  out.scale = Scale::LMCoef;
  out.conditioning = LinearModel{};
  out.value = hv * rd_left * rd_right * rd_child * rd_child * var_left * var_right /
              phi_closed;
  out.sign = sign_of(out.value);
  out.factors = {{"h", hv},
                 {"RD_left", rd_left},
                 {"RD_right", rd_right},
                 {"RD_child", rd_child},
                 {"VAR_left", var_left},
                 {"VAR_right", var_right},
                 {"phi", phi_closed},
                 {"w_{G=1}", w.w1},
                 {"w_{G=0}", w.w0}};
  return out;
}

}  // namespace colliderbias
