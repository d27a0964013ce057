#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "colliderbias/error.hpp"
#include "colliderbias/params_io.hpp"
#include "colliderbias/rng.hpp"
#include "colliderbias/verify.hpp"
#include "support.hpp"

using namespace cbtest;

namespace {

ErrorCode code_of(const StructureParams& p, Strictness s) {
  try {
    validate(p, s);
  } catch (const BiasError& e) {
    return e.code();
  }
  FAIL("expected a BiasError");
  return ErrorCode::ParseError;
}

bool has_parent(const RoleMap& roles, Variable child, Variable parent) {
  for (const VariableRole& r : roles) {
    if (r.variable == child) {
      return std::find(r.parents.begin(), r.parents.end(), parent) != r.parents.end();
    }
  }
  return false;
}

}  // namespace

TEST_CASE("kind predicates") {
  for (StructureKind k : kAllKinds) {
    CHECK(parse_kind(to_string(k)) == k);
    const bool d = k == StructureKind::Y || k == StructureKind::LongM ||
                   k == StructureKind::LeftLongM || k == StructureKind::RightLongM;
    CHECK(has_child_d(k) == d);
    const bool a = k == StructureKind::M || k == StructureKind::LeftM ||
                   k == StructureKind::LongM || k == StructureKind::LeftLongM;
    CHECK(has_left_a(k) == a);
    const bool b = k == StructureKind::M || k == StructureKind::RightM ||
                   k == StructureKind::LongM || k == StructureKind::RightLongM;
    CHECK(has_right_b(k) == b);
  }
  CHECK(variables(StructureKind::LongM).size() == 6);
  CHECK(variables(StructureKind::V).size() == 3);
  CHECK(variables(StructureKind::RightM).size() == 4);
}

TEST_CASE("validation examples") {
  CHECK_NOTHROW(validate(uniform_params(StructureKind::V), Strictness::Strict));

  StructureParams bad = uniform_params(StructureKind::V);
  bad.p_c_given.p11 = 1.2;
  CHECK(code_of(bad, Strictness::Lenient) == ErrorCode::OutOfRange);

  StructureParams y = uniform_params(StructureKind::Y);
  y.p_c_given = {0, 0, 0, 0};
  CHECK_NOTHROW(validate(y, Strictness::Lenient));
  try {
    validate(y, Strictness::Strict);
    FAIL("expected DegenerateStratum");
  } catch (const BiasError& e) {
    CHECK(e.code() == ErrorCode::DegenerateStratum);
    CHECK(std::string(e.what()).find("C=1") != std::string::npos);
  }
}

TEST_CASE("missing and extra fields") {
  StructureParams p = uniform_params(StructureKind::M);
  p.p_x_given_a.reset();
  CHECK(code_of(p, Strictness::Lenient) == ErrorCode::MissingField);

  StructureParams v = uniform_params(StructureKind::V);
  v.p_d_given_c = BinaryConditional{0.2, 0.4};
  CHECK(code_of(v, Strictness::Lenient) == ErrorCode::ExtraField);

  StructureParams nabla = uniform_params(StructureKind::Nabla);
  nabla.p_right = 0.5;
  CHECK(code_of(nabla, Strictness::Lenient) == ErrorCode::ExtraField);

  StructureParams strict = uniform_params(StructureKind::V);
  strict.p_left = 0.0;
  CHECK_NOTHROW(validate(strict, Strictness::Lenient));
  CHECK(code_of(strict, Strictness::Strict) == ErrorCode::OutOfRange);
}

TEST_CASE("role maps follow the topologies") {
  const RoleMap v = variable_roles(StructureKind::V);
  CHECK(has_parent(v, Variable::C, Variable::X));
  CHECK(has_parent(v, Variable::C, Variable::Y));
  CHECK(v.size() == 3);

  const RoleMap llm = variable_roles(StructureKind::LeftLongM);
  CHECK(has_parent(llm, Variable::X, Variable::A));
  CHECK(has_parent(llm, Variable::C, Variable::A));
  CHECK(has_parent(llm, Variable::C, Variable::Y));
  CHECK(has_parent(llm, Variable::D, Variable::C));
  CHECK_FALSE(has_parent(llm, Variable::C, Variable::X));

  const RoleMap nabla = variable_roles(StructureKind::Nabla);
  CHECK(has_parent(nabla, Variable::Y, Variable::X));
  CHECK(has_parent(nabla, Variable::C, Variable::X));
  CHECK(has_parent(nabla, Variable::C, Variable::Y));
}

TEST_CASE("role maps are topologically ordered") {
  for (StructureKind k : kAllKinds) {
    const RoleMap roles = variable_roles(k);
    for (std::size_t i = 0; i < roles.size(); ++i) {
      for (Variable parent : roles[i].parents) {
        bool earlier = false;
        for (std::size_t j = 0; j < i; ++j) earlier |= roles[j].variable == parent;
        CHECK(earlier);
      }
    }
  }
}

TEST_CASE("serialization round trip") {
  for (StructureKind k : kAllKinds) {
    CounterStream s = kind_stream(11, k);
    for (int i = 0; i < 50; ++i) {
      const StructureParams p = random_params(k, s);
      const std::string text = serialize_params(p);
      CHECK(parse_params(text) == p);
      CHECK(serialize_params(parse_params(text)) == text);
    }
  }
}

TEST_CASE("parsing rejects unknown keys and bad kinds") {
  CHECK_THROWS_AS(parse_params(R"({"kind":"V","p_left":0.5,"p_right":0.5,"bogus":1,
      "p_c_given":{"00":0.5,"01":0.5,"10":0.5,"11":0.5}})"),
                  BiasError);
  CHECK_THROWS_AS(parse_params(R"({"kind":"W","p_left":0.5})"), BiasError);
  CHECK_THROWS_AS(parse_params("{not json"), BiasError);
}

TEST_CASE("dotted overrides") {
  StructureParams p = anchor_point();
  set_param_field(p, "p_c_given.01", "0.3");
  CHECK(p.p_c_given.p01 == 0.3);
  CHECK(p.p_c_given.p10 == 0.25);
  set_param_field(p, "kind", "Y");
  set_param_field(p, "p_d_given_c.1", "0.9");
  REQUIRE(p.p_d_given_c);
  CHECK(p.p_d_given_c->given1 == 0.9);
  CHECK_THROWS_AS(set_param_field(p, "p_c_given.22", "0.1"), BiasError);
  CHECK_THROWS_AS(set_param_field(p, "p_left", "abc"), BiasError);
}
