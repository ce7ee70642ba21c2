// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace loo;
using fixtures::A;
using fixtures::corpus;
using fixtures::load_module;
using fixtures::slurp;

static Spec load_spec(const std::string& name) {
  return parse_spec(slurp(corpus(name)));
}

TEST_CASE("the shipped specification corpus is well-formed") {
  ModuleDef good = load_module("M_good.loo");
  for (auto* f : {"S1.spec", "S2.spec", "S3.spec", "S4.spec", "S5.spec",
                  "S6.spec", "S7.spec", "S8.spec", "S9.spec",
                  "S2_strong.spec", "S3_strong.spec"}) {
    Spec s = load_spec(f);
    Diagnostics d = wf_spec(good, s);
    INFO(f << ": " << (d.empty() ? "" : d.front().message));
    CHECK(d.empty());
  }
  // the App D case studies parse; no proofs are shipped for them
  for (auto* f : {"dao.spec", "dom.spec", "sealer.spec"}) {
    Spec s = load_spec(f);
    CHECK_FALSE(s.conjuncts.empty());
  }
}

TEST_CASE("well-formedness rejects stray free variables") {
  ModuleDef good = load_module("M_good.loo");
  // postcondition mentions a binder that was never declared
  Spec s1 = parse_spec(R"(
method bad1 (a: Account)
  { pre: protected a }
  public Account::set (key': Key)
  { post: protected a /\ protected a'.key }
)");
  Diagnostics d1 = wf_spec(good, s1);
  REQUIRE_FALSE(d1.empty());
  CHECK(d1.front().message.find("a'") != std::string::npos);

  // mid-conditions may only mention the spec's binders
  Spec s2 = parse_spec(R"(
method bad2 (b: int)
  { pre: this.blnce == b }
  public Account::set (key': Key)
  { post: this.blnce == b
    mid: this.blnce == b }
)");
  Diagnostics d2 = wf_spec(good, s2);
  REQUIRE_FALSE(d2.empty());

  // invariants must be encapsulated: relative protection is not
  Spec s3 = parse_spec("invariant bad3 (a: Account, e: external) "
                       "{ a.key protectedFrom e }");
  CHECK_FALSE(wf_spec(good, s3).empty());
}

TEST_CASE("safe renaming substitutes binders and formals") {
  Spec s9 = load_spec("S9.spec");
  const SpecConjunct* c = s9.find("setKeepsKeys");
  REQUIRE(c != nullptr);
  auto r = rename_spec(*c, {{"a", "a2"}, {"key'", "nKey"}});
  REQUIRE(r.ok());
  CHECK(r->ms.binders[0].name == "a2");
  CHECK(r->ms.formals[0].name == "nKey");
  CHECK(show_assert(r->ms.pre).find("a2.key") != std::string::npos);

  // actuals may not be this or res
  CHECK_FALSE(rename_spec(*c, {{"key'", "this"}}).ok());
  CHECK_FALSE(rename_spec(*c, {{"a", "res"}}).ok());
  // the identity renaming is a no-op
  auto id = rename_spec(*c, {});
  REQUIRE(id.ok());
  CHECK(assert_equal(id->ms.pre, c->ms.pre));
}

TEST_CASE("vacuous and trivial quadruples verify") {
  ModuleDef good = load_module("M_good.loo");
  LinkedProgram p = link(good, {});
  State s = initial_state(fixtures::parse_stmts("x := 1"));
  // precondition fails: vacuous
  Verdict v1 = check_quadruple_dyn(p, s, A("false"), A("false"), A("true"));
  CHECK(v1.kind == Verdict::Kind::Verified);
  // mid true always passes
  Verdict v2 = check_quadruple_dyn(p, s, A("true"), A("true"), A("true"));
  CHECK(v2.kind == Verdict::Kind::Verified);
  // empty continuation: final state is the base state
  State done = initial_state(Stmt::skip());
  Verdict v3 = check_quadruple_dyn(p, done, A("true"), A("true"), A("true"));
  CHECK(v3.kind == Verdict::Kind::Verified);
}

TEST_CASE("monitoring refutes M_bad and bounded-confirms M_good") {
  Scenario sc = parse_scenario(slurp(corpus("attack.scn")));
  Spec s2 = load_spec("S2.spec");
  Spec s3 = load_spec("S3.spec");

  ModuleDef bad = load_module("M_bad.loo");
  LinkedProgram pb = link(bad, {});
  auto stb = build_scenario_state(pb, sc);
  REQUIRE(stb.ok());
  auto vb = monitor_spec(pb, s2, *stb);
  REQUIRE(vb.size() == 1);
  CHECK(vb[0].second.violated());
  REQUIRE(vb[0].second.witness.has_value());
  // the witness is the state after set: the third step of the run
  CHECK(vb[0].second.witness->violating_step >= 1);

  auto vb3 = monitor_spec(pb, s3, *stb);
  REQUIRE(vb3.size() == 1);
  CHECK(vb3[0].second.violated());

  ModuleDef good = load_module("M_good.loo");
  LinkedProgram pg = link(good, {});
  auto stg = build_scenario_state(pg, sc);
  REQUIRE(stg.ok());
  for (auto& [n, v] : monitor_spec(pg, s2, *stg))
    CHECK(v.kind == Verdict::Kind::Verified);
  for (auto& [n, v] : monitor_spec(pg, s3, *stg))
    CHECK(v.kind == Verdict::Kind::Verified);
}

TEST_CASE("method specifications are checked at call sites") {
  ModuleDef good = load_module("M_good.loo");
  LinkedProgram p = link(good, {});
  // a two-account heap with a correct transfer call
  Scenario sc = parse_scenario(R"(
scenario {
  let k = new Key {};
  let acc = new Account { blnce = 70, key = k };
  let dst = new Account { blnce = 10, key = new Key {} };
  run { u := acc.transfer(dst, k, 30) }
}
)");
  auto st = build_scenario_state(p, sc);
  REQUIRE(st.ok());
  Spec s8 = load_spec("S8.spec");
  for (auto& [n, v] : monitor_spec(p, s8, *st)) {
    INFO(v.why);
    CHECK(v.kind == Verdict::Kind::Verified);
  }
  // S7: with a wrong key no account budges
  Scenario sc2 = parse_scenario(R"(
scenario {
  let acc = new Account { blnce = 70, key = new Key {} };
  let dst = new Account { blnce = 10, key = new Key {} };
  run { k2 := new Key; u := acc.transfer(dst, k2, 30) }
}
)");
  auto st2 = build_scenario_state(p, sc2);
  REQUIRE(st2.ok());
  Spec s7 = load_spec("S7.spec");
  for (auto& [n, v] : monitor_spec(p, s7, *st2)) {
    INFO(v.why);
    CHECK(v.kind == Verdict::Kind::Verified);
  }
  // a spec against a method the class does not define verifies vacuously
  Spec sweird = parse_spec(R"(
method ghostSpec ()
  { pre: true }
  public Account::frobnicate (x: int)
  { post: false }
)");
  for (auto& [n, v] : monitor_spec(p, sweird, *st2))
    CHECK(v.kind == Verdict::Kind::Verified);
}

TEST_CASE("deep verification implies shallow verification") {
  ModuleDef bad = load_module("M_bad.loo");
  LinkedProgram p = link(bad, {});
  Scenario sc = parse_scenario(slurp(corpus("attack.scn")));
  auto st = build_scenario_state(p, sc);
  REQUIRE(st.ok());
  Spec s2 = load_spec("S2.spec");
  MonitorOptions deep;
  deep.deep = true;
  MonitorOptions shallow;
  auto vd = monitor_spec(p, s2, *st, deep);
  auto vs = monitor_spec(p, s2, *st, shallow);
  REQUIRE(vd.size() == vs.size());
  for (size_t i = 0; i < vd.size(); ++i)
    if (vd[i].second.kind == Verdict::Kind::Verified)
      CHECK(vs[i].second.kind == Verdict::Kind::Verified);
}

TEST_CASE("monitor verdicts are deterministic") {
  ModuleDef bad = load_module("M_bad.loo");
  LinkedProgram p = link(bad, {});
  Scenario sc = parse_scenario(slurp(corpus("attack.scn")));
  auto st = build_scenario_state(p, sc);
  Spec s3 = load_spec("S3.spec");
  auto v1 = monitor_spec(p, s3, *st);
  auto v2 = monitor_spec(p, s3, *st);
  REQUIRE(v1.size() == v2.size());
  for (size_t i = 0; i < v1.size(); ++i) {
    CHECK(v1[i].second.kind == v2[i].second.kind);
    CHECK(v1[i].second.why == v2[i].second.why);
  }
}
