// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"

using namespace loo;
using fixtures::A;
using fixtures::corpus;
using fixtures::load_module;
using fixtures::slurp;

TEST_CASE("the underlying engine decides the framing examples") {
  ModuleDef m = load_module("M_good.loo");
  // a different field cannot disturb the key
  StmtPtr debit = fixtures::parse_stmts(
      "t1 := this.blnce - amt; this.blnce := t1");
  CHECK(check_ul_triple(m, A("a : Account /\\ z == a.key"), debit,
                        A("z == a.key")) == Tri::Yes);
  // a key write elsewhere cannot disturb a distinct account's key
  StmtPtr rekey = fixtures::parse_stmts("this.key := k");
  CHECK(check_ul_triple(m, A("!(this == a) /\\ z == a.key"), rekey,
                        A("z == a.key")) == Tri::Yes);
  CHECK(check_ul_triple(m, A("z == a.key"), rekey, A("z == a.key")) ==
        Tri::Unknown);
  // plain refutation
  StmtPtr five = fixtures::parse_stmts("x := 5");
  CHECK(check_ul_triple(m, A("true"), five, A("x == 6")) == Tri::No);
  CHECK(check_ul_triple(m, A("true"), five, A("x == 5")) == Tri::Yes);
  // calls are outside the underlying fragment
  StmtPtr call = fixtures::parse_stmts("u := acc.set(k)");
  CHECK(check_ul_triple(m, A("true"), call, A("true")) == Tri::No);
  // unstable assertions are rejected
  CHECK(check_ul_triple(m, A("protected a.key"), five,
                        A("protected a.key")) == Tri::No);
}

TEST_CASE("entailment handles the protection axioms") {
  ModuleDef m = load_module("M_good.loo");
  CHECK(entails(m, A("a : Account /\\ a.key protectedFrom key'"),
                A("a.key != key'")) == Tri::Yes);  // Prot-Neq
  CHECK(entails(m, A("a : Account /\\ m2 : Account"),
                A("a.key protectedFrom m2")) == Tri::Yes);  // Prot-Intl
  CHECK(entails(m, A("true"), A("x protectedFrom 5")) == Tri::Yes);
  CHECK(entails(m, A("true"), A("x protectedFrom \"s\"")) == Tri::Yes);
  CHECK(entails(m, A("true"), A("x protectedFrom false")) == Tri::Yes);
  AssertPtr self = A("protected a.key /\\ a.blnce >= b");
  CHECK(entails(m, self, self) == Tri::Yes);
  CHECK(entails(m, A("true"), A("5 == 6")) == Tri::No);
  CHECK(entails(m, A("a : Account"), A("protected a.key")) == Tri::Unknown);
  // Shop is not confined (it references external clients)
  CHECK(entails(m, A("k : Key /\\ s : Shop"), A("k protectedFrom s")) ==
        Tri::Unknown);
}

TEST_CASE("named assumptions discharge otherwise-unknown entailments") {
  ModuleDef m = load_module("M_good.loo");
  std::vector<Assumption> as{{"keyShielded", A("a : Account"),
                              A("protected a.key")}};
  std::vector<std::string> used;
  EntailOptions opt;
  opt.assumptions = &as;
  opt.used_assumptions = &used;
  CHECK(entails(m, A("a : Account"), A("protected a.key"), opt) == Tri::Yes);
  REQUIRE(used.size() == 1);
  CHECK(used[0] == "keyShielded");
}

static ProofBundle bundle_of(const std::string& text, const ModuleDef& m) {
  return parse_proof(text, m);
}

TEST_CASE("rule shapes are validated structurally") {
  ModuleDef m = load_module("M_good.loo");
  Spec spec = parse_spec(slurp(corpus("S2_strong.spec")));

  // a healthy prot_new instance
  std::string ok = R"(
bundle b { module "x"; spec "y";
  derive n1: prot_new() |- { true } { k := new Key } { protected k /\ k protectedFrom x };
})";
  CheckReport r1 = check_module(m, spec, bundle_of(ok, m));
  bool n1_ok = true;
  for (auto& d : r1.diagnostics) n1_ok &= d.message.rfind("n1", 0) != 0;
  CHECK(n1_ok);

  // prot_new must be about the allocated target
  std::string bad1 = R"(
bundle b { module "x"; spec "y";
  derive n1: prot_new() |- { true } { k := new Key } { protected j };
})";
  CheckReport r2 = check_module(m, spec, bundle_of(bad1, m));
  bool found = false;
  for (auto& d : r2.diagnostics) found |= d.message.find("new object") != std::string::npos;
  CHECK(found);

  // prot_3's target must be distinct from the shield
  std::string bad2 = R"(
bundle b { module "x"; spec "y";
  derive n1: prot_3() |- { y.f protectedFrom x } { x := y.f } { x protectedFrom x };
})";
  CheckReport r3 = check_module(m, spec, bundle_of(bad2, m));
  found = false;
  for (auto& d : r3.diagnostics)
    found |= d.message.find("must not occur") != std::string::npos;
  CHECK(found);

  // absurd demands the literal false
  std::string bad3 = R"(
bundle b { module "x"; spec "y";
  derive n1: absurd() |- { 1 == 2 } { x := 5 } { true } || { true };
})";
  CheckReport r4 = check_module(m, spec, bundle_of(bad3, m));
  found = false;
  for (auto& d : r4.diagnostics)
    found |= d.message.find("false") != std::string::npos;
  CHECK(found);

  // embed_ul rejects statements with calls
  std::string bad4 = R"(
bundle b { module "x"; spec "y";
  derive n1: embed_ul() |- { true } { u := acc.set(k) } { true };
})";
  CheckReport r5 = check_module(m, spec, bundle_of(bad4, m));
  found = false;
  for (auto& d : r5.diagnostics)
    found |= d.message.find("method call") != std::string::npos;
  CHECK(found);
}

TEST_CASE("the shipped bundles check as the worked proofs say") {
  struct Expect {
    const char* file;
    bool accepted;
    size_t open;
  };
  for (auto& e : {Expect{"mgood_s2.proof", true, 0},
                  Expect{"mfine_s2.proof", true, 0},
                  Expect{"mgood_s3.proof", true, 0}}) {
    std::string text = slurp(corpus(e.file));
    auto [mp, sp] = scan_proof_paths(text);
    ModuleDef mod = parse_module(fixtures::slurp(mp));
    Spec spec = parse_spec(fixtures::slurp(sp));
    ProofBundle b = parse_proof(text, mod);
    CheckReport r = check_module(mod, spec, b);
    INFO(e.file << ": "
                << (r.diagnostics.empty() ? "" : r.diagnostics[0].message));
    CHECK(r.accepted == e.accepted);
    CHECK(r.open.size() == e.open);
  }
  // M_bad/S2: exactly one open obligation, named ERR_2
  {
    std::string text = slurp(corpus("mbad_s2.proof"));
    auto [mp, sp] = scan_proof_paths(text);
    ModuleDef mod = parse_module(fixtures::slurp(mp));
    Spec spec = parse_spec(fixtures::slurp(sp));
    CheckReport r = check_module(mod, spec, parse_proof(text, mod));
    CHECK(r.accepted);
    REQUIRE(r.open.size() == 1);
    CHECK(r.open[0].name == "ERR_2");
  }
  // M_bad/S3: at least one open obligation, including ERR_4
  {
    std::string text = slurp(corpus("mbad_s3.proof"));
    auto [mp, sp] = scan_proof_paths(text);
    ModuleDef mod = parse_module(fixtures::slurp(mp));
    Spec spec = parse_spec(fixtures::slurp(sp));
    CheckReport r = check_module(mod, spec, parse_proof(text, mod));
    CHECK(r.accepted);
    REQUIRE_FALSE(r.open.empty());
    bool err4 = false;
    for (auto& o : r.open) err4 |= o.name == "ERR_4";
    CHECK(err4);
  }
}

TEST_CASE("re-checking a bundle is deterministic") {
  std::string text = slurp(corpus("mgood_s2.proof"));
  auto [mp, sp] = scan_proof_paths(text);
  ModuleDef mod = parse_module(fixtures::slurp(mp));
  Spec spec = parse_spec(fixtures::slurp(sp));
  ProofBundle b = parse_proof(text, mod);
  CheckReport r1 = check_module(mod, spec, b);
  CheckReport r2 = check_module(mod, spec, b);
  CHECK(r1.accepted == r2.accepted);
  CHECK(r1.discharged == r2.discharged);
  CHECK(r1.trusted == r2.trusted);
}

TEST_CASE("entailment soundness on randomized ground instances") {
  // every Yes from entails holds under sat: 1000 random ground pairs
  ModuleDef m = load_module("M_good.loo");
  LinkedProgram prog = link(m, {});
  std::mt19937_64 rng(20240811);
  auto w = fixtures::shop_world();

  std::vector<State> states{w.s1, w.s2, w.s3};
  std::vector<std::string> atoms;
  for (Addr a = 1; a <= 7; ++a) {
    std::string ad = "@" + std::to_string(a);
    atoms.push_back("protected " + ad);
    atoms.push_back(ad + " protectedFrom @" + std::to_string(1 + (a % 7)));
    atoms.push_back("external " + ad);
    atoms.push_back("internal " + ad);
  }
  atoms.push_back("@4.blnce >= 0");
  atoms.push_back("@4.blnce == 100");
  atoms.push_back("@3.price == 5");
  atoms.push_back("@4.key == @6");
  atoms.push_back("@1.accnt == @4");
  atoms.push_back("true");
  atoms.push_back("false");

  auto rand_assert = [&](auto&& self, int depth) -> AssertPtr {
    std::uniform_int_distribution<int> pick(0, (int)atoms.size() - 1);
    std::uniform_int_distribution<int> shape(0, 5);
    if (depth <= 0) return A(atoms[pick(rng)]);
    switch (shape(rng)) {
      case 0: return Assertion::conj(self(self, depth - 1), self(self, depth - 1));
      case 1: return Assertion::negate(self(self, depth - 1));
      default: return A(atoms[pick(rng)]);
    }
  };

  int yeses = 0;
  for (int i = 0; i < 1000; ++i) {
    AssertPtr hyp = rand_assert(rand_assert, 2);
    AssertPtr goal = rand_assert(rand_assert, 2);
    if (entails(m, hyp, goal) != Tri::Yes) continue;
    ++yeses;
    for (auto& st : states) {
      if (sat(prog, st, hyp) != Sat::Holds) continue;
      INFO("hyp " << show_assert(hyp) << "  goal " << show_assert(goal));
      CHECK(sat(prog, st, goal) == Sat::Holds);
    }
  }
  CHECK(yeses > 50);  // the sample actually exercised the solver
}
