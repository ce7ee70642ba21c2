// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace loo;
using fixtures::shop_world;

TEST_CASE("interpret reads variables and field paths") {
  State s0 = initial_state(Stmt::skip());
  auto root = interpret(s0, Path::var("this"));
  REQUIRE(root.ok());
  CHECK(root->is_address());

  auto w = shop_world();
  auto key = interpret(w.s1, Path::var("this", {"accnt", "key"}));
  REQUIRE(key.ok());
  CHECK(*key == w.a(w.o6));
  auto via_addr = interpret(w.s1, Path::addr(w.o1, {"accnt", "key"}));
  REQUIRE(via_addr.ok());
  CHECK(*via_addr == w.a(w.o6));

  CHECK_FALSE(interpret(w.s1, Path::var("nobody")).ok());
  CHECK_FALSE(interpret(w.s1, Path::var("this", {"accnt", "wrong"})).ok());
}

TEST_CASE("initial_state is a single frame over a single object") {
  StmtPtr body = fixtures::parse_stmts("x := 1; y := 2");
  State s = initial_state(body);
  CHECK(s.depth() == 1);
  CHECK(s.heap.size() == 1);
  CHECK(s.heap[0].cls == "Object");
  CHECK(stmt_equal(s.top().cont.as_stmt(), body));
  LinkedProgram p = link(fixtures::load_module("M_good.loo"), {});
  CHECK(wf_state(p, s));
}

TEST_CASE("small_step New initialises fields by declared type") {
  auto w = shop_world();
  State s = initial_state(fixtures::parse_stmts("x := new Account"));
  StepResult r = small_step(w.prog, s);
  REQUIRE(r.is_next());
  CHECK(r.kind == StepKind::Same);
  const Value* x = r.next.top().lookup("x");
  REQUIRE(x != nullptr);
  REQUIRE(x->is_address());
  const Object* o = r.next.object(x->addr());
  REQUIRE(o != nullptr);
  CHECK(*o->field("blnce") == Value::integer(0));  // scalar fields to 0
  CHECK(*o->field("key") == Value::null());        // class fields to null
  // freshness: the new address was not in the old heap
  CHECK(x->addr() == s.heap.size() + 1);
}

TEST_CASE("field access from the wrong module is stuck") {
  auto w = shop_world();
  // sigma3's receiver is external (o7); writing the account is a privacy
  // violation, as is reading it
  State s = w.s3;
  s.stack.back().cont = Cont::of(fixtures::parse_stmts("p1.blnce := 7"));
  StepResult r = small_step(w.prog, s);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::PrivacyFieldAccess);

  s.stack.back().cont = Cont::of(fixtures::parse_stmts("z := p1.blnce"));
  r = small_step(w.prog, s);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::PrivacyFieldAccess);
}

TEST_CASE("private calls across modules are stuck") {
  auto w = shop_world();
  State s = w.s3;
  s.stack.back().cont =
      Cont::of(fixtures::parse_stmts("z := this.x(); skip"));
  // unknown method first
  StepResult r = small_step(w.prog, s);
  CHECK(r.is_stuck());
  CHECK(r.reason == StuckReason::UnknownMethod);
  // private send from an external receiver
  State s2 = w.s3;
  Frame& f = s2.stack.back();
  f.vars["shop"] = w.a(w.o1);
  f.vars["it"] = w.a(w.o3);
  f.cont = Cont::of(
      Stmt::call("z", "shop", "send",
                 {Atom::make_var("this"), Atom::make_var("it")}));
  r = small_step(w.prog, s2);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::PrivateCallAcrossModules);
}

TEST_CASE("return pops and writes res into the caller") {
  auto w = shop_world();
  State s = w.s3;  // f3's continuation assigns res, then returns into f2
  StepResult r1 = small_step(w.prog, s);
  REQUIRE(r1.is_next());
  REQUIRE(r1.kind == StepKind::Same);
  StepResult r2 = small_step(w.prog, r1.next);
  REQUIRE(r2.is_next());
  CHECK(r2.kind == StepKind::Return);
  CHECK(r2.next.depth() == 2);
  const Value* tmp = r2.next.top().lookup("tmp");
  REQUIRE(tmp != nullptr);
  CHECK(*tmp == Value::integer(0));
  // depth law held on both steps
  CHECK(r1.next.depth() == s.depth());
  CHECK(r2.next.depth() == r1.next.depth() - 1);
}

TEST_CASE("return without res is stuck") {
  auto w = shop_world();
  State s = w.s3;
  s.stack.back().cont.items.clear();  // epsilon, res never assigned
  StepResult r = small_step(w.prog, s);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::NoRes);
}

TEST_CASE("argument types are checked at call entry") {
  auto w = shop_world();
  State s = w.s1;
  // buy(buyer: external, anItem: Item) called with an internal buyer
  Frame& f = s.stack.back();
  f.vars["acc"] = w.a(w.o4);
  f.cont = Cont::of(Stmt::call("u", "this", "buy",
                               {Atom::make_var("acc"), Atom::make_var("it")}));
  StepResult r = small_step(w.prog, s);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::TypeMismatch);
  // nat arguments must be non-negative
  State s2 = w.s1;
  Frame& f2 = s2.stack.back();
  f2.vars["acc"] = w.a(w.o4);
  f2.vars["k"] = w.a(w.o6);
  f2.cont = Cont::of(Stmt::call("u", "acc", "transfer",
                                {Atom::make_var("acc"), Atom::make_var("k"),
                                 Atom::make_lit(Value::integer(-3))}));
  r = small_step(w.prog, s2);
  REQUIRE(r.is_stuck());
  CHECK(r.reason == StuckReason::TypeMismatch);
}

TEST_CASE("small_step is deterministic") {
  auto w = shop_world();
  State s = w.s2;
  StepResult a = small_step(w.prog, s);
  StepResult b = small_step(w.prog, s);
  REQUIRE(a.status == b.status);
  if (a.is_next()) {
    CHECK(a.kind == b.kind);
    CHECK(a.next.depth() == b.next.depth());
    CHECK(a.next.heap.size() == b.next.heap.size());
  }
}

TEST_CASE("eval_expr evaluates literals, fields, and ghosts") {
  auto w = shop_world();
  EvalResult r = eval_expr(w.prog, w.s1, Expr::lit(Value::integer(7)));
  REQUIRE(r.is_ok());
  CHECK(r.value == Value::integer(7));

  // a two-entry ledger: the ghost walks to the entry for its account
  ModuleDef ghost = fixtures::load_module("M_ghost.loo");
  LinkedProgram gp = link(ghost, {});
  State s;
  s.alloc(Object{"Account", {{"bank", Value::address(3)}, {"key", Value::null()}}});
  s.alloc(Object{"Account", {{"bank", Value::address(3)}, {"key", Value::null()}}});
  s.alloc(Object{"Bank", {{"ledger", Value::address(4)}}});
  s.alloc(Object{"Ledger",
                 {{"acc", Value::address(1)},
                  {"bal", Value::integer(40)},
                  {"next", Value::address(5)}}});
  s.alloc(Object{"Ledger",
                 {{"acc", Value::address(2)},
                  {"bal", Value::integer(60)},
                  {"next", Value::null()}}});
  Frame f;
  f.vars["this"] = Value::address(1);
  f.vars["a"] = Value::address(2);
  s.stack.push_back(f);

  ExprPtr bal_a = Expr::ghost(Expr::var("a"), "balance", {});
  EvalResult ra = eval_expr(gp, s, bal_a);
  REQUIRE(ra.is_ok());
  CHECK(ra.value == Value::integer(60));  // hand-unfolded: second entry

  // a cyclic ledger for a missing account diverges at the fuel bound
  s.object(5)->set_field("next", Value::address(5));
  s.object(5)->set_field("acc", Value::address(1));
  s.object(4)->set_field("acc", Value::address(1));
  EvalResult rc = eval_expr(gp, s, bal_a, 1000);
  CHECK(rc.status == EvalResult::Status::Diverged);
}

TEST_CASE("reach is the field-closure of an address") {
  auto w = shop_world();
  // an object with no address-valued fields reaches only itself
  CHECK(reach(w.s1, w.o6) == std::set<Addr>{w.o6});
  auto r1 = reach(w.s1, w.o1);
  CHECK(r1 == std::set<Addr>{w.o1, w.o2, w.o3, w.o4, w.o5, w.o6});
  // monotone: anything reachable from a member is a subset
  for (Addr a : r1) {
    auto ra = reach(w.s1, a);
    for (Addr b : ra) CHECK(r1.count(b) == 1);
  }
}

TEST_CASE("locally_reachable shrinks when pushing the pay frame") {
  auto w = shop_world();
  State s0 = initial_state(Stmt::skip());
  CHECK(locally_reachable(s0) == std::set<Addr>{1});

  auto l2 = locally_reachable(w.s2);
  auto l3 = locally_reachable(w.s3);
  CHECK(l2.count(w.o5) == 1);
  CHECK(l3.count(w.o5) == 0);  // o5 drops out
  for (Addr a : l3) CHECK(l2.count(a) == 1);

  // a fresh unreferenced object changes nothing
  State s = w.s2;
  s.alloc(Object{"Key", {}});
  CHECK(locally_reachable(s) == l2);
}

TEST_CASE("wf_state rejects a formal invisible to the caller") {
  auto w = shop_world();
  CHECK(wf_state(w.prog, w.s2));
  CHECK(wf_state(w.prog, w.s3));
  State bad = w.s3;
  Addr rogue = bad.alloc(Object{"Key", {}});
  bad.stack.back().vars["p1"] = Value::address(rogue);
  CHECK_FALSE(wf_state(w.prog, bad));
}

TEST_CASE("restriction recovers the shop world's stages") {
  auto w = shop_world();
  auto r2 = restrict_to(w.s3, 2);
  REQUIRE(r2.ok());
  CHECK(r2->depth() == 2);
  CHECK(r2->top().vars == w.s2.top().vars);
  auto id = restrict_to(w.s3, 3);
  REQUIRE(id.ok());
  CHECK(id->depth() == w.s3.depth());
  CHECK_FALSE(restrict_to(w.s3, 0).ok());
  CHECK_FALSE(restrict_to(w.s3, 4).ok());
}
