#include "colliderbias/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "colliderbias/closedform.hpp"
#include "colliderbias/error.hpp"
#include "colliderbias/joint.hpp"
#include "colliderbias/query.hpp"
#include "colliderbias/signmap.hpp"

namespace colliderbias {

namespace {

constexpr double kLo = 0.05;
constexpr double kHi = 0.95;

BinaryConditional random_conditional(CounterStream& s) {
  BinaryConditional out;
  out.given0 = s.uniform(kLo, kHi);
  out.given1 = s.uniform(kLo, kHi);
  return out;
}

std::size_t kind_index(StructureKind kind) {
  const auto it = std::find(kAllKinds.begin(), kAllKinds.end(), kind);
  return static_cast<std::size_t>(it - kAllKinds.begin());
}

// Magnitude below which a numeric sign is not trusted to decide a mismatch.
constexpr double kSignFloor = 1e-9;

class Recorder {
 public:
  explicit Recorder(const VerifyOptions& options) : options_(options) {}

  void absolute(const std::string& name, double a, double b) {
    record(name, std::abs(a - b), options_.abs_tolerance, false);
  }
  void relative(const std::string& name, double a, double b) {
    const double denom = std::max(std::abs(b), 1e-300);
    record(name, std::abs(a - b) / denom, options_.rel_tolerance, true);
  }
  void sign(const std::string& name, Sign rule, double numeric, bool factor) {
    const Sign direct = factor ? sign_of_factor(numeric) : sign_of(numeric);
    const double magnitude = factor ? std::abs(numeric - 1.0) : std::abs(numeric);
    const bool bad = rule != direct && magnitude > kSignFloor;
    record(name, bad ? 1.0 : 0.0, 0.0, false);
  }
  void failure(const std::string& name) { record(name, 1.0, 0.0, false); }

  std::vector<IdentityResult> take() { return std::move(results_); }

 private:
  void record(const std::string& name, double discrepancy, double tol, bool rel) {
    auto it = std::find_if(results_.begin(), results_.end(),
                           [&](const IdentityResult& r) { return r.name == name; });
    if (it == results_.end()) {
      results_.push_back({name, 0, 0, 0.0, tol, rel});
      it = results_.end() - 1;
    }
    ++it->checks;
    it->max_discrepancy = std::max(it->max_discrepancy, discrepancy);
    if (!(discrepancy <= tol)) ++it->failures;
  }

  const VerifyOptions& options_;
  std::vector<IdentityResult> results_;
};

std::string label(std::string_view route, Scale scale, const Conditioning& cond) {
  return std::string(route) + " " + std::string(to_string(scale)) + " " + describe(cond);
}

void check_draw(const StructureParams& raw, Recorder& rec) {
  const StructureKind kind = raw.kind;
  const Variable gv = conditioning_variable(kind);
  const ValidatedParams params = validate(raw, Strictness::Strict);
  const JointTable joint = build_joint(params);

  for (int level : {1, 0}) {
    const Conditioning cond = Stratum{gv, level};
    for (Scale scale : {Scale::Cov, Scale::RD, Scale::OR}) {
      const Evaluation ev = evaluate(raw, {cond, scale});
      if (!ev.closed_form) continue;
      const std::string name = label(ev.route, scale, cond);
      if (scale == Scale::OR) {
        rec.relative(name, ev.closed_form->value, ev.oracle.value);
      } else {
        rec.absolute(name, ev.closed_form->value, ev.oracle.value);
      }
    }
    if (kind == StructureKind::Nabla) {
      const double factor = nabla_bias_or(params, level).value;
      rec.sign("sign rule " + describe(cond), sign_v_stratum(params.collider(), level),
               factor, true);
    } else {
      const double value = evaluate(raw, {cond, Scale::Cov}).oracle.value;
      rec.sign("sign rule " + describe(cond), sign_extended(params, cond), value, false);
    }
    if (kind == StructureKind::Y) {
      rec.absolute("embedded V relation D=" + std::to_string(level),
                   y_embedded_relation(params, level),
                   y_bias_stratum(params, level, Scale::Cov).value);
    }
    if (has_left_a(kind)) {
      const Event given = {{gv, level}};
      rec.absolute("variance ratio " + describe(cond), variance_ratio(params, level),
                   variance(joint, Variable::A, given) / variance(joint, Variable::X, given));
    }
  }

  if (kind != StructureKind::Nabla) {
    const Conditioning lm = LinearModel{};
    const Evaluation ev = evaluate(raw, {lm, Scale::LMCoef});
    rec.absolute(label(ev.route, Scale::LMCoef, lm), ev.closed_form->value,
                 ev.oracle.value);
    rec.sign("sign rule lm", sign_extended(params, lm), ev.oracle.value, false);
    if (kind == StructureKind::V) {
      rec.sign("sign rule lm (V)", sign_lm_v(params), ev.oracle.value, false);
      rec.absolute("general_lm_bias lm vs v_bias_lm", general_lm_bias(params).value,
                   ev.closed_form->value);
    }
    rec.absolute("phi closed vs definitional", phi(params), phi_from_joint(joint));
  }
}

}  // namespace

StructureParams random_params(StructureKind kind, CounterStream& s) {
  StructureParams p;
  p.kind = kind;
  p.p_left = s.uniform(kLo, kHi);
  if (kind != StructureKind::Nabla) p.p_right = s.uniform(kLo, kHi);
  p.p_c_given.p00 = s.uniform(kLo, kHi);
  p.p_c_given.p01 = s.uniform(kLo, kHi);
  p.p_c_given.p10 = s.uniform(kLo, kHi);
  p.p_c_given.p11 = s.uniform(kLo, kHi);
  if (has_left_a(kind)) p.p_x_given_a = random_conditional(s);
  if (has_right_b(kind) || kind == StructureKind::Nabla) {
    p.p_y_given_b = random_conditional(s);
  }
  if (has_child_d(kind)) p.p_d_given_c = random_conditional(s);
  return p;
}

CounterStream kind_stream(std::uint64_t seed, StructureKind kind) {
  return CounterStream(counter_bits(seed, kind_index(kind)));
}

bool KindSummary::passed() const {
  return std::all_of(identities.begin(), identities.end(),
                     [](const IdentityResult& r) { return r.passed(); });
}

bool VerifySummary::passed() const {
  return std::all_of(kinds.begin(), kinds.end(),
                     [](const KindSummary& k) { return k.passed(); });
}

KindSummary verify_kind(StructureKind kind, const VerifyOptions& options) {
  if (options.draws == 0) {
    throw BiasError(ErrorCode::OutOfRange, "draws must be at least 1");
  }
  Recorder rec(options);
  CounterStream stream = kind_stream(options.seed, kind);
  for (std::uint64_t i = 0; i < options.draws; ++i) {
    const StructureParams raw = random_params(kind, stream);
    try {
      check_draw(raw, rec);
    } catch (const std::logic_error&) {
      rec.failure("internal consistency assertions");
    }
  }
  KindSummary out;
  out.kind = kind;
  out.draws = options.draws;
  out.identities = rec.take();
  return out;
}

VerifySummary verify(const std::vector<StructureKind>& kinds,
                     const VerifyOptions& options) {
  VerifySummary out;
  out.seed = options.seed;
  for (StructureKind kind : kinds) out.kinds.push_back(verify_kind(kind, options));
  return out;
}

}  // namespace colliderbias
