#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "colliderbias/error.hpp"
#include "colliderbias/joint.hpp"
#include "colliderbias/verify.hpp"
#include "support.hpp"

using namespace cbtest;

namespace {

JointTable joint_of(const StructureParams& p, Strictness s = Strictness::Strict) {
  return build_joint(validate(p, s));
}

double total(const JointTable& t) {
  return std::accumulate(t.mass().begin(), t.mass().end(), 0.0);
}

}  // namespace

TEST_CASE("uniform V has equal cells") {
  const JointTable t = joint_of(uniform_params(StructureKind::V));
  REQUIRE(t.mass().size() == 8);
  for (double m : t.mass()) CHECK(close(m, 0.125, 1e-15));
  CHECK(prob(t, {}) == doctest::Approx(1.0));
  CHECK(close(prob(t, {{Variable::X, 1}, {Variable::C, 1}}), 0.25));
}

TEST_CASE("anchor point collider marginal") {
  const JointTable t = joint_of(anchor_point());
  CHECK(close(prob(t, {{Variable::C, 1}}), 0.35));
}

TEST_CASE("normalization and parent independence on random draws") {
  for (StructureKind k : kAllKinds) {
    CounterStream s = kind_stream(3, k);
    for (int i = 0; i < 200; ++i) {
      const JointTable t = joint_of(random_params(k, s));
      CHECK(close(total(t), 1.0, 1e-14));
      for (double m : t.mass()) CHECK(m >= 0.0);
      if (k != StructureKind::Nabla) {
        CHECK(std::abs(covariance(t, Variable::X, Variable::Y)) <= 1e-14);
      }
    }
  }
  const JointTable longm = joint_of(uniform_params(StructureKind::LongM));
  CHECK(longm.mass().size() == 64);
}

TEST_CASE("unknown variables are rejected") {
  const JointTable t = joint_of(uniform_params(StructureKind::V));
  CHECK_THROWS_AS(prob(t, {{Variable::D, 1}}), BiasError);
  CHECK_THROWS_AS(t.bit_of(Variable::A), BiasError);
}

TEST_CASE("conditional measures at the anchor point") {
  const JointTable t = joint_of(anchor_point());
  const Conditioning c1 = Stratum{Variable::C, 1};
  CHECK(close(cond_measure(t, Scale::Cov, c1).value, 0.25 * 0.25 * 0.05 / (0.35 * 0.35)));
  CHECK(close(cond_measure(t, Scale::OR, c1).value / marginal_measure(t, Scale::OR), 1.8,
              1e-12));
  CHECK(close(bias(t, {c1, Scale::OR}).value, 1.8, 1e-12));
  CHECK(close(bias(t, {c1, Scale::Cov}).value, 0.003125 / 0.1225));

  const JointTable u = joint_of(uniform_params(StructureKind::V));
  CHECK(close(cond_measure(u, Scale::Cov, c1).value, 0.0));
}

TEST_CASE("degenerate strata and ratios raise") {
  StructureParams p = uniform_params(StructureKind::V);
  p.p_c_given = {0, 0, 0, 0};
  const JointTable t = joint_of(p, Strictness::Lenient);
  try {
    cond_measure(t, Scale::Cov, Stratum{Variable::C, 1});
    FAIL("expected DegenerateStratum");
  } catch (const BiasError& e) {
    CHECK(e.code() == ErrorCode::DegenerateStratum);
  }

  StructureParams q = uniform_params(StructureKind::V);
  q.p_c_given = {1, 0.5, 0.5, 0.5};
  const JointTable r = joint_of(q, Strictness::Lenient);
  try {
    cond_measure(r, Scale::OR, Stratum{Variable::C, 0});
    FAIL("expected UndefinedRatio");
  } catch (const BiasError& e) {
    CHECK(e.code() == ErrorCode::UndefinedRatio);
  }

  StructureParams s = uniform_params(StructureKind::V);
  s.p_c_given = {0, 0, 1, 1};
  const JointTable coll = joint_of(s, Strictness::Lenient);
  try {
    regression_coefficient(coll, Variable::Y, Variable::X, Variable::C);
    FAIL("expected SingularDesign");
  } catch (const BiasError& e) {
    CHECK(e.code() == ErrorCode::SingularDesign);
  }
}

TEST_CASE("bias examples") {
  StructureParams nabla;
  nabla.kind = StructureKind::Nabla;
  nabla.p_left = 0.5;
  nabla.p_c_given = anchor_table();
  nabla.p_y_given_b = BinaryConditional{0.5, 0.5};
  const Conditioning c1 = Stratum{Variable::C, 1};
  CHECK(close(bias(joint_of(nabla), {c1, Scale::OR}).value,
              bias(joint_of(anchor_point()), {c1, Scale::OR}).value, 1e-12));

  StructureParams y = uniform_params(StructureKind::Y);
  y.p_c_given = anchor_table();
  y.p_d_given_c = BinaryConditional{0.4, 0.4};
  const JointTable t = joint_of(y);
  for (int d : {0, 1}) {
    const Conditioning cd = Stratum{Variable::D, d};
    CHECK(close(bias(t, {cd, Scale::Cov}).value, 0.0));
    CHECK(close(bias(t, {cd, Scale::RD}).value, 0.0));
    CHECK(close(bias(t, {cd, Scale::OR}).value, 1.0));
    CHECK(close(bias(t, {cd, Scale::RR}).value, 1.0));
  }
  CHECK_THROWS_AS(bias(t, {Stratum{Variable::C, 1}, Scale::Cov}), BiasError);
}

TEST_CASE("oracle moment identities on random draws") {
  for (StructureKind k : kAllKinds) {
    CounterStream s = kind_stream(5, k);
    const Variable g = conditioning_variable(k);
    for (int i = 0; i < 200; ++i) {
      const JointTable t = joint_of(random_params(k, s));
      for (int level : {0, 1}) {
        const Event G = {{g, level}};
        auto P = [&](int x, int y) {
          return prob(t, {{Variable::X, x}, {Variable::Y, y}, {g, level}});
        };
        const double pg = prob(t, G);
        const double cov = covariance(t, Variable::X, Variable::Y, G);
        CHECK(close(cov, (P(1, 1) * P(0, 0) - P(1, 0) * P(0, 1)) / (pg * pg)));
        const double rd = cond_measure(t, Scale::RD, Stratum{g, level}).value;
        CHECK(close(rd, cov / variance(t, Variable::X, G)));
      }
    }
  }
}

TEST_CASE("sampler is deterministic and rejects n = 0") {
  const ValidatedParams p = validate(anchor_point(), Strictness::Strict);
  CHECK_THROWS_AS(sample(p, 0, 1), BiasError);
  const SampleTable a = sample(p, 5000, 42);
  const SampleTable b = sample(p, 5000, 42);
  CHECK(a.counts == b.counts);
  CHECK(a.frequencies() == b.frequencies());
  const SampleTable c = sample(p, 5000, 43);
  CHECK(a.counts != c.counts);
  CHECK(std::accumulate(a.counts.begin(), a.counts.end(), std::uint64_t{0}) == 5000);
}

TEST_CASE("uniform V sample converges") {
  const ValidatedParams p = validate(uniform_params(StructureKind::V), Strictness::Strict);
  const SampleTable t = sample(p, 1000000, 9);
  for (double f : t.frequencies()) CHECK(std::abs(f - 0.125) <= 0.005);
}
