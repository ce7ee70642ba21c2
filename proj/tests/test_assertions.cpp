// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace loo;
using fixtures::A;
using fixtures::shop_world;

static AssertPtr prot_of(Addr a, std::vector<std::string> fields = {}) {
  ExprPtr e = Expr::lit(Value::address(a));
  for (auto& f : fields) e = Expr::field(e, f);
  return Assertion::protected_(e);
}

TEST_CASE("the six protection judgments of the shop heap") {
  auto w = shop_world();
  // value level
  CHECK(protected_from(w.prog, w.s1, w.a(w.o6), w.a(w.o4)));
  CHECK_FALSE(protected_from(w.prog, w.s1, w.a(w.o6), w.a(w.o5)));
  // state level: o6 becomes protected only once pay's frame hides o5
  CHECK(sat(w.prog, w.s1, prot_of(w.o6)) == Sat::Fails);
  CHECK(sat(w.prog, w.s2, prot_of(w.o6)) == Sat::Fails);
  CHECK(sat(w.prog, w.s3, prot_of(w.o6)) == Sat::Holds);
  // o4 is protected until it is handed to the external receiver
  CHECK(sat(w.prog, w.s1, prot_of(w.o4)) == Sat::Holds);
  CHECK(sat(w.prog, w.s2, prot_of(w.o4)) == Sat::Holds);
  CHECK(sat(w.prog, w.s3, prot_of(w.o4)) == Sat::Fails);
}

TEST_CASE("satisfaction is classical on ghost-terminating assertions") {
  auto w = shop_world();
  for (auto* src : {"this.accnt.blnce >= 0", "protected this.accnt.key",
                    "external b", "this : Shop"}) {
    AssertPtr a = A(src);
    Sat s = sat(w.prog, w.s1, Assertion::conj(a, Assertion::negate(a)));
    CHECK(s == Sat::Fails);
  }
}

TEST_CASE("forall ranges over current-heap addresses of the class") {
  auto w = shop_world();
  // three accounts, one below the bound
  State s = w.s1;
  s.alloc(Object{"Account", {{"blnce", Value::integer(7)}, {"key", Value::null()}}});
  s.alloc(Object{"Account", {{"blnce", Value::integer(-2)}, {"key", Value::null()}}});
  AssertPtr all_pos = A("forall x: Account. x.blnce >= 0");
  // brute-force oracle: conjunction over exactly the Account addresses
  int n_accounts = 0;
  bool expect = true;
  for (Addr ad = 1; ad <= s.heap.size(); ++ad)
    if (s.object(ad)->cls == "Account") {
      ++n_accounts;
      expect &= s.object(ad)->field("blnce")->as_int() >= 0;
    }
  CHECK(n_accounts == 3);
  CHECK(sat(w.prog, s, all_pos) == (expect ? Sat::Holds : Sat::Fails));
  CHECK(sat(w.prog, s, all_pos) == Sat::Fails);
  // scalar classes have no addresses: vacuous
  CHECK(sat(w.prog, s, A("forall n: int. n == 99")) == Sat::Holds);
}

TEST_CASE("protection on scalars and null follows the extension") {
  auto w = shop_world();
  CHECK(protected_from(w.prog, w.s1, w.a(w.o6), Value::integer(5)));
  CHECK_FALSE(protected_from(w.prog, w.s1, Value::integer(5), w.a(w.o4)));
  SatNotes notes;
  CHECK(protected_value(w.prog, w.s1, Value::integer(5), &notes));
  REQUIRE_FALSE(notes.empty());
  // null-valued expressions are flagged and fail
  notes.clear();
  CHECK_FALSE(protected_value(w.prog, w.s1, Value::null(), &notes));
  CHECK_FALSE(notes.empty());
  // a freshly created object is protected (allocation in an internal frame)
  State s = w.s1;
  s.stack.back().cont = Cont::of(fixtures::parse_stmts("k := new Key"));
  StepResult r = small_step(w.prog, s);
  REQUIRE(r.is_next());
  const Value* k = r.next.top().lookup("k");
  REQUIRE(k != nullptr);
  CHECK(protected_value(w.prog, r.next, *k));
}

TEST_CASE("grounding replaces free variables and preserves satisfaction") {
  auto w = shop_world();
  State s = w.s1;
  s.stack.back().vars["acc"] = w.a(w.o4);
  s.stack.back().vars["k"] = w.a(w.o6);
  AssertPtr a = A("acc.key == k");
  auto g = ground(s, a);
  REQUIRE(g.ok());
  CHECK(free_vars(*g).empty());
  CHECK(show_assert(*g).find("@4") != std::string::npos);
  CHECK(sat(w.prog, s, a) == sat(w.prog, s, *g));
  // idempotent
  auto g2 = ground(s, *g);
  REQUIRE(g2.ok());
  CHECK(assert_equal(*g, *g2));
  // unbound variables are an error
  CHECK_FALSE(ground(s, A("zz.key == k")).ok());
}

TEST_CASE("classification matches the comparison table") {
  ModuleDef m = fixtures::load_module("M_good.loo");
  std::map<std::string, std::string> gamma{{"z", "Account"},
                                           {"x", "Key"},
                                           {"y", "Key"}};
  Classification c1 = classify(m, A("z.blnce >= 3"), gamma);
  CHECK(c1.stable);
  CHECK(c1.pos);
  CHECK(c1.enc == Tri::Yes);

  Classification c2 = classify(m, A("protected x"), gamma);
  CHECK_FALSE(c2.stable);
  CHECK(c2.pos);
  CHECK(c2.enc == Tri::Yes);

  Classification c3 = classify(m, A("!(protected x)"), gamma);
  CHECK_FALSE(c3.stable);
  CHECK_FALSE(c3.pos);
  CHECK(c3.enc == Tri::No);

  Classification c4 = classify(m, A("y protectedFrom x"), gamma);
  CHECK(c4.stable);
  CHECK(c4.pos);
  CHECK(c4.enc == Tri::No);

  Classification c5 = classify(m, A("!(y protectedFrom x)"), gamma);
  CHECK(c5.stable);
  CHECK(c5.pos);
  CHECK(c5.enc == Tri::No);

  // the judgment is deliberately incomplete on double negation
  CHECK(is_enc(m, A("!(!(protected x))"), gamma) == Tri::Unknown);
}

TEST_CASE("adaptation rewrites protection into protection-from") {
  ModuleDef m = fixtures::load_module("M_good.loo");
  std::vector<ExprPtr> ys{Expr::var("buyer"),
                          Expr::field(Expr::var("this"), "accnt"),
                          Expr::var("price")};
  AssertPtr adapted = adapt(ys, A("protected a.key"));
  CHECK(show_assert(adapted) ==
        "((a.key protectedFrom buyer /\\ a.key protectedFrom this.accnt) /\\ "
        "a.key protectedFrom price)");
  // class facts, expressions, and protectedFrom are untouched
  for (auto* src : {"a : Account", "a.blnce >= b", "a.key protectedFrom e"}) {
    AssertPtr a = A(src);
    CHECK(assert_equal(adapt(ys, a), a));
  }
  // the result of adaptation is always stable
  for (auto* src :
       {"protected a.key", "protected a.key /\\ a.blnce >= b",
        "forall x: Account. protected x.key", "!(external a)"}) {
    CHECK(is_stable(adapt(ys, A(src))));
  }
  // quantifier capture is avoided
  AssertPtr q = adapt({Expr::var("x")}, A("forall x: Key. protected x"));
  std::string shown = show_assert(q);
  CHECK(shown.find("x' protectedFrom x") != std::string::npos);
}

TEST_CASE("deep satisfaction restricts frame by frame") {
  auto w = shop_world();
  // at the top frame, deep equals shallow on grounded assertions
  AssertPtr a = prot_of(w.o6);
  CHECK(sat_deep(w.prog, w.s3, w.s3.depth(), a) == sat(w.prog, w.s3, a));
  // monotone in k
  AssertPtr stable_a = A("@4.blnce >= 0");
  for (size_t k = 1; k <= w.s3.depth(); ++k) {
    Sat at_k = sat_deep(w.prog, w.s3, k, stable_a);
    for (size_t k2 = k; k2 <= w.s3.depth(); ++k2)
      if (at_k == Sat::Holds)
        CHECK(sat_deep(w.prog, w.s3, k2, stable_a) == Sat::Holds);
  }
  // inside(o6) holds only at the top frame, so deep-from-1 fails
  CHECK(sat_deep(w.prog, w.s3, 1, a) == Sat::Fails);
  CHECK(sat_deep(w.prog, w.s3, 3, a) == Sat::Holds);
}

TEST_CASE("substitution avoids capture and computes free variables") {
  AssertPtr a = A("forall x: C. x == y");
  AssertPtr sub = subst_one(a, "y", Expr::var("x"));
  std::string shown = show_assert(sub);
  CHECK(shown.find("forall x':C") != std::string::npos);
  CHECK(shown.find("x' == x") != std::string::npos);

  AssertPtr fv_ex = A("a : Account /\\ forall b: int. a.blnce == b");
  auto fv = free_vars(fv_ex);
  CHECK(fv == std::set<std::string>{"a"});

  // substitutions with disjoint domains and ranges commute
  AssertPtr base = A("x.f == y /\\ protected z");
  auto s1 = substitute(subst_one(base, "x", Expr::var("u")), {{"y", Expr::var("v")}});
  auto s2 = substitute(subst_one(base, "y", Expr::var("v")), {{"x", Expr::var("u")}});
  CHECK(assert_equal(s1, s2));
}

TEST_CASE("divergent ghosts poison satisfaction") {
  ModuleDef ghost = fixtures::load_module("M_ghost.loo");
  LinkedProgram gp = link(ghost, {});
  State s;
  s.alloc(Object{"Account", {{"bank", Value::address(2)}, {"key", Value::null()}}});
  s.alloc(Object{"Bank", {{"ledger", Value::address(3)}}});
  s.alloc(Object{"Ledger",
                 {{"acc", Value::null()},
                  {"bal", Value::integer(1)},
                  {"next", Value::address(3)}}});
  Frame f;
  f.vars["this"] = Value::address(1);
  f.vars["a"] = Value::address(1);
  s.stack.push_back(f);
  AssertPtr diverging = A("a.balance() == 0");
  CHECK(sat(gp, s, diverging, 100) == Sat::Diverged);
  // inside a quantifier the whole result poisons
  AssertPtr quant = A("forall x: Account. x.balance() == 0");
  CHECK(sat(gp, s, quant, 100) == Sat::Diverged);
}
