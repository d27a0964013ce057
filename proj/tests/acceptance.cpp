#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "colliderbias/closedform.hpp"
#include "colliderbias/commands.hpp"
#include "colliderbias/params_io.hpp"
#include "colliderbias/query.hpp"
#include "colliderbias/signmap.hpp"
#include "colliderbias/verify.hpp"
#include "identities.hpp"
#include "support.hpp"

using namespace cbtest;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Tracker {
  double worst = 0.0;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;

  void gap(double value, double tol) {
    ++checks;
    worst = std::max(worst, value);
    if (!(value <= tol)) ++failures;
  }
  void require(bool ok) {
    ++checks;
    if (!ok) ++failures;
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

constexpr int kDraws = 1000;
constexpr std::uint64_t kSeed = 20240611;

// Criterion-1 draws, shared by criteria 2 and 4.
std::vector<StructureParams> criterion_draws(StructureKind kind) {
  CounterStream s = kind_stream(kSeed, kind);
  std::vector<StructureParams> out;
  for (int i = 0; i < kDraws; ++i) out.push_back(random_params(kind, s));
  return out;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  Tracker abs_t, rel_t;
  std::uint64_t routes = 0;
  for (StructureKind k : kAllKinds) {
    const Variable gv = conditioning_variable(k);
    for (const StructureParams& raw : criterion_draws(k)) {
      for (int level : {0, 1}) {
        for (Scale scale : {Scale::Cov, Scale::RD, Scale::OR}) {
          const Evaluation ev = evaluate(raw, {Stratum{gv, level}, scale});
          if (!ev.closed_form) continue;
          ++routes;
          if (scale == Scale::OR) {
            rel_t.gap(ev.rel_discrepancy, kRelTolerance);
          } else {
            abs_t.gap(ev.abs_discrepancy, kAbsTolerance);
          }
        }
      }
      if (k == StructureKind::Nabla) continue;
      const Evaluation lm = evaluate(raw, {LinearModel{}, Scale::LMCoef});
      abs_t.require(lm.closed_form.has_value());
      if (!lm.closed_form) continue;
      ++routes;
      abs_t.gap(lm.abs_discrepancy, kAbsTolerance);
      if (k == StructureKind::V) {
        abs_t.gap(std::abs(general_lm_bias(validate(raw, Strictness::Strict)).value -
                           lm.closed_form->value),
                  kAbsTolerance);
      }
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = abs_t.failures == 0 && rel_t.failures == 0 && secs < 30.0;
  o.detail = std::to_string(routes) + " closed-form evaluations, max abs " + sci(abs_t.worst) +
             ", max rel " + sci(rel_t.worst) + ", " + sci(secs) + " s";
  return o;
}

Outcome identity_suite() {
  Tracker t;
  for (StructureKind k : kAllKinds) {
    const Variable gv = conditioning_variable(k);
    for (const StructureParams& raw : criterion_draws(k)) {
      const JointTable table = build_joint(validate(raw, Strictness::Strict));
      for (int level : {0, 1}) {
        t.gap(stratum_cov_gap(table, Variable::X, Variable::Y, gv, level), kAbsTolerance);
        t.gap(rd_cov_ratio_gap(table, Variable::Y, Variable::X, gv, level), kAbsTolerance);
      }
      t.gap(lm_weighted_average_gap(table, gv), kAbsTolerance);
      for (const auto& [f, g2] : variable_pairs(table)) {
        t.gap(triple_product_gap(table, f, g2), kAbsTolerance);
      }
    }
  }
  CounterStream s(kSeed);
  std::uint64_t pairs = 0;
  for (int i = 0; i < 10000; ++i) {
    const ProductPairDraw d = product_pair_draw(s);
    const bool admissible =
        0 < d.a_prime && d.a_prime < d.a && d.a < d.b && d.b < d.b_prime;
    t.require(admissible && d.holds());
    ++pairs;
  }
  Outcome o;
  o.pass = t.failures == 0;
  o.detail = std::to_string(t.checks - pairs) + " identity checks (max " + sci(t.worst) +
             "), " + std::to_string(pairs) + " product-pair quadruples, " +
             std::to_string(t.failures) + " failures";
  return o;
}

// Collider tables from sorted uniforms, assigned so the effect pattern holds
// by construction.
ColliderTable ordered_table(CounterStream& s, PatternKind pattern) {
  std::array<double, 4> v{};
  for (double& x : v) x = s.uniform(0.05, 0.95);
  std::sort(v.begin(), v.end());
  const bool swap_mid = s.uniform() < 0.5;
  const double m1 = swap_mid ? v[2] : v[1];
  const double m2 = swap_mid ? v[1] : v[2];
  switch (pattern) {
    case PatternKind::BothPositive: return {v[0], m1, m2, v[3]};
    case PatternKind::BothNegative: return {v[3], m1, m2, v[0]};
    default: return {m1, v[0], v[3], m2};  // X raises, Y lowers P(C = 1)
  }
}

ColliderTable qualitative_table(CounterStream& s) {
  while (true) {
    const ColliderTable q{s.uniform(0.05, 0.95), s.uniform(0.05, 0.95),
                          s.uniform(0.05, 0.95), s.uniform(0.05, 0.95)};
    const PatternKind p = classify_effects(q).pattern;
    if (p == PatternKind::QualitativeInX || p == PatternKind::QualitativeInY ||
        p == PatternKind::QualitativeInBoth) {
      return q;
    }
  }
}

Outcome sign_rule_suite() {
  CounterStream s(kSeed + 1);
  Tracker c1, c2, cy, c3;
  for (int i = 0; i < kDraws; ++i) {
    for (PatternKind p : {PatternKind::BothPositive, PatternKind::BothNegative}) {
      const ColliderTable q = ordered_table(s, p);
      c1.require(classify_effects(q).pattern == p);
      const StructureParams raw = make_v(s.uniform(0.05, 0.95), s.uniform(0.05, 0.95), q);
      const JointTable t = build_joint(validate(raw, Strictness::Strict));
      const double b1 = bias(t, {Stratum{Variable::C, 1}, Scale::Cov}).value;
      const double b0 = bias(t, {Stratum{Variable::C, 0}, Scale::Cov}).value;
      c1.require(b1 < 0.0 || b0 < 0.0);
      c1.require(sign_v_stratum(q, 1) == Sign::Negative || sign_v_stratum(q, 0) == Sign::Negative);
      const double lm = bias(t, {LinearModel{}, Scale::LMCoef}).value;
      c3.require(lm < 0.0 && sign_lm_v(validate(raw)) == Sign::Negative);
    }
    {
      const ColliderTable q = ordered_table(s, PatternKind::OppositeSigns);
      c1.require(classify_effects(q).pattern == PatternKind::OppositeSigns);
      const StructureParams raw = make_v(s.uniform(0.05, 0.95), s.uniform(0.05, 0.95), q);
      const JointTable t = build_joint(validate(raw, Strictness::Strict));
      const double b1 = bias(t, {Stratum{Variable::C, 1}, Scale::Cov}).value;
      const double b0 = bias(t, {Stratum{Variable::C, 0}, Scale::Cov}).value;
      c1.require(b1 > 0.0 || b0 > 0.0);
      const double lm = bias(t, {LinearModel{}, Scale::LMCoef}).value;
      c3.require(lm > 0.0 && sign_lm_v(validate(raw)) == Sign::Positive);
    }
    {
      const ColliderTable q = qualitative_table(s);
      const StructureParams raw = make_v(s.uniform(0.05, 0.95), s.uniform(0.05, 0.95), q);
      const JointTable t = build_joint(validate(raw, Strictness::Strict));
      const double b1 = bias(t, {Stratum{Variable::C, 1}, Scale::Cov}).value;
      const double b0 = bias(t, {Stratum{Variable::C, 0}, Scale::Cov}).value;
      c2.require(b1 * b0 < 0.0);
      const Sign s1 = sign_v_stratum(q, 1);
      c2.require(s1 != Sign::Zero && sign_v_stratum(q, 0) == -s1);
    }
  }
  CounterStream ys = kind_stream(kSeed + 2, StructureKind::Y);
  for (int i = 0; i < kDraws; ++i) {
    const StructureParams raw = random_params(StructureKind::Y, ys);
    const ValidatedParams p = validate(raw, Strictness::Strict);
    const JointTable t = build_joint(p);
    for (int d : {0, 1}) {
      const double oracle = bias(t, {Stratum{Variable::D, d}, Scale::Cov}).value;
      cy.gap(std::abs(y_embedded_relation(p, d) - oracle), kAbsTolerance);
    }
  }
  Outcome o;
  o.pass = c1.failures + c2.failures + cy.failures + c3.failures == 0;
  o.detail = "monotone/opposite " + std::to_string(c1.failures) + "/" +
             std::to_string(c1.checks) + " fail, qualitative " +
             std::to_string(c2.failures) + "/" + std::to_string(c2.checks) +
             " fail, embedded-V max " + sci(cy.worst) + ", regression " +
             std::to_string(c3.failures) + "/" + std::to_string(c3.checks) + " fail";
  return o;
}

Outcome normalizer_and_variance_ratio() {
  Tracker phi_t, vr_t;
  for (StructureKind k : kAllKinds) {
    if (k == StructureKind::Nabla) continue;
    const Variable gv = conditioning_variable(k);
    for (const StructureParams& raw : criterion_draws(k)) {
      const ValidatedParams p = validate(raw, Strictness::Strict);
      const JointTable t = build_joint(p);
      phi_t.gap(std::abs(phi(p) - phi_from_joint(t)), kAbsTolerance);
      if (!has_left_a(k)) continue;
      for (int level : {0, 1}) {
        const Event G = {{gv, level}};
        const double joint_vr = variance(t, Variable::A, G) / variance(t, Variable::X, G);
        vr_t.gap(std::abs(variance_ratio(p, level) - joint_vr), kAbsTolerance);
      }
    }
  }
  Outcome o;
  o.pass = phi_t.failures == 0 && vr_t.failures == 0;
  o.detail = std::to_string(phi_t.checks) + " phi checks (max " + sci(phi_t.worst) + "), " +
             std::to_string(vr_t.checks) + " VR checks (max " + sci(vr_t.worst) + ")";
  return o;
}

Outcome anchor_point_regression() {
  const StructureParams raw = anchor_point();
  const ValidatedParams p = validate(raw, Strictness::Strict);
  const JointTable t = build_joint(p);
  const Stratum c1{Variable::C, 1};
  bool ok = close(g(p, 1), 0.05);
  const double or_closed = v_bias_stratum(p, 1, Scale::OR).value;
  const double or_oracle = bias(t, {c1, Scale::OR}).value;
  ok &= close(or_closed, 1.8) && close(or_oracle, 1.8);
  for (Scale scale : {Scale::Cov, Scale::RD, Scale::OR, Scale::RR}) {
    const double v = bias(t, {c1, scale}).value;
    const bool ratio = scale == Scale::OR || scale == Scale::RR;
    ok &= (ratio ? sign_of_factor(v) : sign_of(v)) == Sign::Positive;
  }
  ok &= sign_v_stratum(p.collider(), 1) == Sign::Positive;
  const double lm = bias(t, {LinearModel{}, Scale::LMCoef}).value;
  ok &= lm < 0.0 && close(v_bias_lm(p).value, lm);
  ok &= close(h(p), -0.09) && sign_of(h(p)) == Sign::Negative;
  ok &= sign_lm_v(p) == Sign::Negative;
  Outcome o;
  o.pass = ok;
  o.detail = "g(1)=" + std::to_string(g(p, 1)) + " OR factor=" + std::to_string(or_oracle) +
             " LM=" + std::to_string(lm) + " h=" + std::to_string(h(p));
  return o;
}

Outcome containment() {
  constexpr int kRes = 200;
  std::uint64_t cells = 0, premise = 0, zero_cells = 0, violations = 0;
  const std::array<std::pair<double, double>, 3> anchors = {
      std::pair{0.15, 0.75}, std::pair{0.05, 0.9}, std::pair{0.3, 0.6}};
  for (const auto& [p00, p11] : anchors) {
    const double width = (p11 - p00) / kRes;
    for (int i = 0; i < kRes; ++i) {
      for (int j = 0; j < kRes; ++j) {
        const ColliderTable q{p00, p00 + (j + 0.5) * width, p00 + (i + 0.5) * width, p11};
        const EffectPattern e = classify_effects(q);
        ++cells;
        if (e.pattern != PatternKind::BothPositive || e.canonical_level != 1) {
          ++violations;
          continue;
        }
        const Sign rr = e.interaction.rr_c;
        if (e.interaction.odds_ratio == Sign::Positive &&
            e.interaction.risk_difference == Sign::Positive) {
          continue;
        }
        ++premise;
        if (rr == Sign::Positive) ++violations;
        if (rr == Sign::Zero) {
          ++zero_cells;
          const double d1 = std::hypot(q.p10 - p00, q.p01 - p11);
          const double d2 = std::hypot(q.p10 - p11, q.p01 - p00);
          if (std::min(d1, d2) > width) ++violations;
        }
      }
    }
  }
  Outcome o;
  o.pass = violations == 0 && premise > 0;
  o.detail = std::to_string(cells) + " cells, " + std::to_string(premise) +
             " with non-positive OR or RD interaction, " + std::to_string(zero_cells) +
             " zero RR cells, " + std::to_string(violations) + " violations";
  return o;
}

Outcome monte_carlo() {
  const ValidatedParams p = validate(anchor_point(), Strictness::Strict);
  const auto start = Clock::now();
  const SampleTable s = sample(p, 1000000, kSeed);
  const double secs = seconds_since(start);
  const JointTable t = build_joint(p);
  const std::vector<double> f = s.frequencies();
  double worst = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) worst = std::max(worst, std::abs(f[c] - t.mass()[c]));
  Outcome o;
  o.pass = worst <= 0.005 && secs < 10.0 && s.order == t.order();
  o.detail = "max cell deviation " + sci(worst) + ", " + sci(secs) + " s";
  return o;
}

Outcome determinism() {
  auto capture = [](const RunConfig& c) {
    std::ostringstream out, err;
    const int code = run(c, out, err);
    return std::to_string(code) + "\n" + out.str();
  };
  RunConfig verify_cfg;
  verify_cfg.command = Command::Verify;
  verify_cfg.all_kinds = true;
  verify_cfg.draws = 200;
  verify_cfg.seed = 7;
  RunConfig json_cfg = verify_cfg;
  json_cfg.format = OutputFormat::Json;

  const std::string path = "acceptance_anchor.json";
  {
    std::ofstream(path) << serialize_params(anchor_point()) << '\n';
  }
  RunConfig grid_cfg;
  grid_cfg.command = Command::Grid;
  grid_cfg.file = path;
  grid_cfg.format = OutputFormat::Csv;
  grid_cfg.resolution = 200;

  bool ok = true;
  std::size_t bytes = 0;
  for (const RunConfig& c : {verify_cfg, json_cfg, grid_cfg}) {
    const std::string a = capture(c);
    const std::string b = capture(c);
    ok &= a == b && a.rfind("0\n", 0) == 0;
    bytes += a.size();
  }
  Outcome o;
  o.pass = ok;
  o.detail = "verify (text, json) and grid reruns identical, " + std::to_string(bytes) + " bytes";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"probability identities", identity_suite},
      {"sign rules by effect pattern", sign_rule_suite},
      {"normalizer and variance ratio", normalizer_and_variance_ratio},
      {"anchor point regression", anchor_point_regression},
      {"containment of interaction regions", containment},
      {"Monte Carlo smoke", monte_carlo},
      {"determinism", determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(),
                o.detail.c_str());
    if (!o.pass) ++failed;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
