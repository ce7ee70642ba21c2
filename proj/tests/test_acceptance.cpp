// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

// The acceptance suite: one test case per criterion, each printing a
// PASS/FAIL line. Budgets, bounds, and tolerances are pinned here.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "gen.hpp"

using namespace loo;
using fixtures::A;
using fixtures::corpus;
using fixtures::load_module;
using fixtures::slurp;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int n, bool ok, const std::string& what, double secs) {
  std::printf("criterion %d: %s  (%s, %.2fs)\n", n, ok ? "PASS" : "FAIL",
              what.c_str(), secs);
  std::fflush(stdout);
}

struct LoadedBundle {
  std::string name;
  ModuleDef mod;
  Spec spec;
  ProofBundle bundle;
};

LoadedBundle load_bundle(const std::string& file) {
  LoadedBundle b;
  b.name = file;
  std::string text = slurp(corpus(file));
  auto [mp, sp] = scan_proof_paths(text);
  b.mod = parse_module(slurp(mp));
  b.spec = parse_spec(slurp(sp));
  b.bundle = parse_proof(text, b.mod);
  return b;
}

}  // namespace

TEST_CASE("criterion 1: the six protection judgments of the shop heap") {
  Timer t;
  auto w = fixtures::shop_world();
  auto prot = [&](Addr x) {
    return Assertion::protected_(Expr::lit(Value::address(x)));
  };
  bool ok = true;
  ok &= sat(w.prog, w.s1, prot(w.o6)) == Sat::Fails;
  ok &= sat(w.prog, w.s2, prot(w.o6)) == Sat::Fails;
  ok &= sat(w.prog, w.s3, prot(w.o6)) == Sat::Holds;
  ok &= sat(w.prog, w.s1, prot(w.o4)) == Sat::Holds;
  ok &= sat(w.prog, w.s2, prot(w.o4)) == Sat::Holds;
  ok &= sat(w.prog, w.s3, prot(w.o4)) == Sat::Fails;
  ok &= protected_from(w.prog, w.s1, w.a(w.o6), w.a(w.o4));
  ok &= !protected_from(w.prog, w.s1, w.a(w.o6), w.a(w.o5));
  bool in_time = t.seconds() < 1.0;
  report(1, ok && in_time, "protection judgments", t.seconds());
  CHECK(ok);
  CHECK(in_time);
}

TEST_CASE("criterion 2: the drain of M_bad is refuted and rediscovered") {
  Timer t;
  ModuleDef bad = load_module("M_bad.loo");
  LinkedProgram p = link(bad, {});
  Scenario sc = parse_scenario(slurp(corpus("attack.scn")));
  auto st = build_scenario_state(p, sc);
  REQUIRE(st.ok());

  bool ok = true;
  for (auto* specfile : {"S2.spec", "S3.spec"}) {
    Spec s = parse_spec(slurp(corpus(specfile)));
    auto verdicts = monitor_spec(p, s, *st);
    REQUIRE(verdicts.size() == 1);
    ok &= verdicts[0].second.violated();
    REQUIRE(verdicts[0].second.witness.has_value());
    // the witness trace ends with the account drained by 1000
    const std::string& trace = verdicts[0].second.witness->trace_jsonl;
    ok &= trace.find("@1.blnce=0") != std::string::npos;
    ok &= trace.find("@3.blnce=1000") != std::string::npos;
  }

  // the fuzzer independently rediscovers an attack within the small bounds
  AttackSchema schema;
  schema.internal = bad;
  schema.seed = parse_scenario(slurp(corpus("seed_shop.scn")));
  schema.bounds.max_stmts = 3;
  schema.bounds.max_objects = 1;
  schema.bounds.max_depth = 1;
  schema.bounds.cb_stmts = 0;
  Spec s2 = parse_spec(slurp(corpus("S2.spec")));
  SearchResult r = attack_search(schema, s2);
  ok &= r.found;
  ok &= r.cex.conjunct == "keyInside";
  bool in_time = t.seconds() < 60.0;
  report(2, ok && in_time, "refutation and rediscovery", t.seconds());
  CHECK(ok);
  CHECK(in_time);
}

TEST_CASE("criterion 3: bounded open-world confirmation of M_good and M_fine") {
  Timer t;
  Spec s23 = parse_spec(slurp(corpus("S2.spec")) + slurp(corpus("S3.spec")));
  bool ok = true;
  std::uint64_t total = 0;
  for (auto* m : {"M_good.loo", "M_fine.loo"}) {
    AttackSchema schema;
    schema.internal = load_module(m);
    schema.seed = parse_scenario(slurp(corpus("seed_shop.scn")));
    schema.bounds.max_stmts = 4;
    schema.bounds.max_objects = 2;
    schema.bounds.max_depth = 2;
    schema.bounds.cb_stmts = 2;
    SearchResult r = attack_search(schema, s23);
    if (r.found) {
      std::printf("unexpected counterexample in %s:\n%s\n", m,
                  r.cex.program_text.c_str());
      ok = false;
    }
    total += r.candidates;
  }
  bool in_time = t.seconds() < 600.0;
  report(3, ok && in_time,
         "exhausted " + std::to_string(total) + " candidates", t.seconds());
  CHECK(ok);
  CHECK(in_time);
}

TEST_CASE("criterion 4: the worked proof bundles") {
  Timer t;
  bool ok = true;
  for (auto* f : {"mgood_s2.proof", "mfine_s2.proof", "mgood_s3.proof"}) {
    LoadedBundle b = load_bundle(f);
    CheckReport r = check_module(b.mod, b.spec, b.bundle);
    if (!r.accepted || !r.zero_open) {
      for (auto& d : r.diagnostics)
        std::printf("  %s: %s\n", f, d.message.c_str());
      ok = false;
    }
  }
  {
    LoadedBundle b = load_bundle("mbad_s2.proof");
    CheckReport r = check_module(b.mod, b.spec, b.bundle);
    ok &= r.accepted && r.open.size() == 1 && r.open[0].name == "ERR_2";
  }
  {
    LoadedBundle b = load_bundle("mbad_s3.proof");
    CheckReport r = check_module(b.mod, b.spec, b.bundle);
    bool err4 = false;
    for (auto& o : r.open) err4 |= o.name == "ERR_4";
    ok &= r.accepted && !r.open.empty() && err4;
  }
  bool in_time = t.seconds() < 30.0;
  report(4, ok && in_time, "App-style proof bundles", t.seconds());
  CHECK(ok);
  CHECK(in_time);
}

TEST_CASE("criterion 5: metatheory properties, one pass, >=1000 cases each") {
  Timer t;
  using gen::Rng;
  int wf_steps = 0, push_shrink = 0, formals_eq = 0, grounding = 0;
  int stable_pp = 0, pos_push = 0, enc_steps = 0, adapt_cases = 0;
  int deep_cases = 0, summarized = 0;
  bool ok = true;
  auto fail = [&](const std::string& what) {
    std::printf("  metatheory failure: %s\n", what.c_str());
    ok = false;
  };

  for (int wi = 0; ok && (wf_steps < 1000 || push_shrink < 1000 ||
                          formals_eq < 1000 || grounding < 1000 ||
                          stable_pp < 1000 || pos_push < 1000 ||
                          enc_steps < 1000 || adapt_cases < 1000 ||
                          deep_cases < 1000 || summarized < 1000);
       ++wi) {
    REQUIRE(wi < 4000);  // generation must be productive
    gen::World w = gen::random_world(777 + wi);
    Rng r(31 * wi + 7);
    for (int si = 0; si < 3; ++si) {
      State base = gen::random_state(r, w);
      gen::Run run = gen::run_trace(w, base, 120);

      // Lemma 2.2(1) + depth law
      if (!wf_state(w.prog, run.states[0])) fail("base not wf");
      for (size_t i = 0; i + 1 < run.states.size(); ++i) {
        if (!wf_state(w.prog, run.states[i + 1])) fail("wf lost");
        ++wf_steps;
      }
      // Lemma 2.2(2)
      for (size_t i = 0; i + 1 < run.states.size(); ++i) {
        if (run.kinds[i] != StepKind::CallEnter) continue;
        auto before = locally_reachable(run.states[i]);
        for (Addr a : locally_reachable(run.states[i + 1]))
          if (!before.count(a)) fail("push grew reachability");
        ++push_shrink;
      }
      // Lemma 2.1
      for (size_t i = 0; i < run.states.size(); ++i) {
        const State& s0 = run.states[i];
        if (s0.depth() < 2) continue;
        const MethodDef* m = active_method(w.prog, s0, s0.depth());
        if (!m) continue;
        std::map<std::string, Value> snap{{"this", *s0.top().lookup("this")}};
        for (auto& pm : m->params)
          if (const Value* v = s0.top().lookup(pm.name)) snap[pm.name] = *v;
        for (size_t j = i + 1;
             j < run.states.size() && run.states[j].depth() >= s0.depth();
             ++j) {
          if (run.states[j].depth() != s0.depth()) continue;
          for (auto& [x, v] : snap) {
            const Value* now = run.states[j].top().lookup(x);
            if (!now || !(*now == v)) fail("formal changed");
          }
          ++formals_eq;
        }
      }
      // Lemma 3.5
      for (int k = 0; k < 6; ++k) {
        const State& s = run.states[r.upto((int)run.states.size())];
        std::vector<std::string> vars;
        for (auto& [x, v] : s.top().vars) vars.push_back(x);
        AssertPtr a = Assertion::conj(
            Assertion::protected_(Expr::var(vars[r.upto((int)vars.size())])),
            gen::rand_assert(r, s, false, true, 1));
        auto g = ground(s, a);
        if (!g.ok()) continue;
        if (sat(w.prog, s, a) != sat(w.prog, s, *g)) fail("grounding changed sat");
        ++grounding;
      }
      // Lemmas 3.6 / 5.3 / 3.7 over call steps
      for (size_t i = 0; i + 1 < run.states.size(); ++i) {
        const State& before = run.states[i];
        const State& after = run.states[i + 1];
        if (run.kinds[i] == StepKind::CallEnter) {
          AssertPtr st_a = gen::rand_assert(r, before, true, true, 2);
          if (sat(w.prog, before, st_a) != sat(w.prog, after, st_a))
            fail("stable not invariant under push");
          ++stable_pp;
          if (after.top().lookup("res")) {
            auto popped = pop(after);
            if (popped.ok() &&
                sat(w.prog, after, st_a) != sat(w.prog, *popped, st_a))
              fail("stable not invariant under pop");
          }
          auto internal = is_internal(w.prog, after);
          if (internal && *internal) {
            AssertPtr pa = gen::rand_assert(r, before, false, true, 2);
            if (sat(w.prog, before, pa) == Sat::Holds &&
                sat(w.prog, after, pa) != Sat::Holds)
              fail("pos lost on internal push");
            ++pos_push;
          }
          // Lemma 5.3
          std::vector<ExprPtr> ys;
          for (auto& [x, v] : after.top().vars) ys.push_back(Expr::lit(v));
          AssertPtr a = gen::rand_assert(r, before, false, true, 1);
          AssertPtr ad = adapt(ys, a);
          if (!is_stable(ad)) fail("adapted not stable");
          if (sat(w.prog, before, ad) == Sat::Holds &&
              sat(w.prog, after, a) != Sat::Holds)
            fail("caller adapted but callee unsatisfied");
          auto after_ext = is_external(w.prog, after);
          if (after_ext && *after_ext &&
              sat(w.prog, after, a) == Sat::Holds &&
              sat(w.prog, before, ad) != Sat::Holds)
            fail("external return does not imply adapted");
          auto before_ext = is_external(w.prog, before);
          if (before_ext && *before_ext &&
              sat(w.prog, before, a) == Sat::Holds &&
              sat(w.prog, after, ad) != Sat::Holds)
            fail("external call does not imply adapted");
          ++adapt_cases;
        }
        // Lemma 3.7
        auto ext = is_external(w.prog, before);
        if (ext && *ext) {
          std::map<std::string, std::string> gamma;
          std::vector<std::string> ivars;
          for (auto& [x, v] : before.top().vars) {
            auto c = class_of(before, v);
            if (!c) continue;
            gamma[x] = *c;
            if (w.prog.is_internal_class(*c)) ivars.push_back(x);
          }
          if (!ivars.empty()) {
            std::string x = ivars[r.upto((int)ivars.size())];
            std::string f = gamma[x] == "P" ? "n" : "m";
            AssertPtr a =
                A(x + " : " + gamma[x] + " /\\ " + x + "." + f + " >= 0");
            if (is_enc(w.prog.internal(), a, gamma) == Tri::Yes) {
              auto g = ground(before, a);
              if (g.ok() && sat(w.prog, before, *g) == Sat::Holds) {
                if (sat(w.prog, after, *g) != Sat::Holds)
                  fail("enc assertion lost on external step");
                ++enc_steps;
              }
            }
          }
        }
      }
      // Lemma F.1
      for (int k = 0; k < 4; ++k) {
        const State& s = run.states[r.upto((int)run.states.size())];
        AssertPtr a = gen::rand_assert(r, s, false, true, 1);
        auto g = ground(s, a);
        if (!g.ok()) continue;
        if (sat_deep(w.prog, s, s.depth(), a) != sat(w.prog, s, *g))
          fail("deep at top differs from shallow");
        for (size_t kk = 1; kk < s.depth(); ++kk)
          if (sat_deep(w.prog, s, kk, a) == Sat::Holds &&
              sat_deep(w.prog, s, kk + 1, a) != Sat::Holds)
            fail("deep not monotone");
        ++deep_cases;
      }
      // Lemma G.2
      auto base_ext = is_external(w.prog, base);
      if (base_ext && *base_ext) {
        ScopedTrace tr = bounded_star(w.prog, base, 120);
        Summary sum = summarize(w.prog, tr);
        if (!sum.ok) fail("summarize failed: " + sum.error);
        ++summarized;
      }
    }
  }
  report(5, ok, "all ten property families at >=1000 cases", t.seconds());
  CHECK(ok);
}

TEST_CASE("criterion 6: checker-accepted quadruples survive the deep monitor") {
  Timer t;
  bool ok = true;

  std::vector<LoadedBundle> bundles;
  for (auto* f : {"mgood_s2.proof", "mfine_s2.proof", "mgood_s3.proof"})
    bundles.push_back(load_bundle(f));

  // part 1: sample accepted quadruples, generate precondition-satisfying
  // states, and let the deep monitor hunt for violations
  int sampled = 0;
  gen::Rng rng(424242);
  for (auto& lb : bundles) {
    CheckReport cr = check_module(lb.mod, lb.spec, lb.bundle);
    REQUIRE(cr.accepted);
    LinkedProgram prog = link(lb.mod, {});
    for (auto& node : lb.bundle.nodes) {
      if (node.rule == "open" || !node.is_quad()) continue;
      // generate candidate states over the shop scenario heap
      int found_states = 0;
      for (int attempt = 0; attempt < 40 && found_states < 2; ++attempt) {
        Scenario sc = parse_scenario(slurp(corpus("seed_shop.scn")));
        auto stc = build_scenario_state(prog, sc);
        if (!stc.ok()) break;
        State st = *stc;
        // bind free variables class-aware: class facts pick matching
        // addresses, externality picks the root, equalities propagate
        std::set<std::string> fv = free_vars(node.pre);
        for (auto& v : free_vars(node.post)) fv.insert(v);
        for (auto& x : hoare_detail::stmt_vars(node.stmt)) fv.insert(x);
        std::map<std::string, std::string> want_class;
        std::set<std::string> want_ext;
        for (auto& c : conjuncts_of(node.pre)) {
          if (c->kind == Assertion::Kind::HasClass &&
              c->e->kind == Expr::Kind::Var)
            want_class[c->e->name] = c->cls;
          if (c->kind == Assertion::Kind::External &&
              c->e->kind == Expr::Kind::Var)
            want_ext.insert(c->e->name);
        }
        Addr root = 0;
        for (Addr a2 = 1; a2 <= st.heap.size(); ++a2)
          if (!prog.is_internal_class(st.object(a2)->cls)) root = a2;
        for (auto& x : fv) {
          if (x == "res") continue;
          auto it = want_class.find(x);
          if (want_ext.count(x) && root) {
            st.top().vars[x] = Value::address(root);
          } else if (it != want_class.end()) {
            if (it->second == "int" || it->second == "nat") {
              st.top().vars[x] = Value::integer(rng.upto(1200));
              continue;
            }
            std::vector<Addr> cands;
            for (Addr a2 = 1; a2 <= st.heap.size(); ++a2)
              if (st.object(a2)->cls == it->second) cands.push_back(a2);
            st.top().vars[x] =
                cands.empty()
                    ? Value::null()
                    : Value::address(cands[rng.upto((int)cands.size())]);
          } else {
            switch (rng.upto(3)) {
              case 0:
                st.top().vars[x] = Value::address(
                    static_cast<Addr>(1 + rng.upto((int)st.heap.size())));
                break;
              case 1: st.top().vars[x] = Value::integer(rng.upto(1200)); break;
              default: st.top().vars[x] = Value::null(); break;
            }
          }
        }
        // equality conjuncts bind trackers: x == e or e == x
        for (int pass = 0; pass < 2; ++pass)
          for (auto& c : conjuncts_of(node.pre)) {
            if (c->kind != Assertion::Kind::Expr ||
                c->e->kind != Expr::Kind::Binary || c->e->op != BinOp::Eq)
              continue;
            auto try_bind = [&](const ExprPtr& var_side,
                               const ExprPtr& val_side) {
              if (var_side->kind != Expr::Kind::Var) return;
              EvalResult r2 = eval_expr(prog, st, val_side);
              if (r2.is_ok()) st.top().vars[var_side->name] = r2.value;
            };
            try_bind(c->e->b, c->e->a);
            try_bind(c->e->a, c->e->b);
          }
        st.top().cont = Cont::of(node.stmt);
        if (sat(prog, st, node.pre) != Sat::Holds) continue;
        ++found_states;
        ++sampled;
        MonitorOptions mo;
        mo.deep = true;
        mo.budget = 4000;
        Verdict v =
            check_quadruple_dyn(prog, st, node.pre, node.post, node.mid, mo);
        if (v.violated()) {
          std::printf("  accepted quadruple %s refuted: %s\n",
                      node.name.c_str(), v.why.c_str());
          ok = false;
        }
      }
    }
  }
  if (sampled < 200) {
    std::printf("  only %d precondition-satisfying samples\n", sampled);
    ok = false;
  }

  // part 2: broken scripts must be rejected (or refuted)
  int mutants = 0, caught = 0;
  for (auto& lb : bundles) {
    LinkedProgram prog = link(lb.mod, {});
    for (size_t i = 0; i < lb.bundle.nodes.size(); ++i) {
      const ProofNode& n = lb.bundle.nodes[i];
      for (int op = 0; op < 3; ++op) {
        ProofBundle mutated = lb.bundle;
        ProofNode& m = mutated.nodes[i];
        if (op == 0) {
          // swap pre and post
          if (assert_equal(m.pre, m.post)) continue;
          std::swap(m.pre, m.post);
        } else if (op == 1) {
          // weaken a side condition: strip the frame off the pre
          if (m.pre->kind != Assertion::Kind::And) continue;
          m.pre = m.pre->b;
        } else {
          // smuggle an extra claim into the post (pointless under a false
          // precondition, where any post is sound)
          if (entail_detail::is_false_lit(m.pre)) continue;
          m.post = Assertion::conj(
              m.post, Assertion::protected_(Expr::var("intruder")));
        }
        ++mutants;
        CheckReport r = check_module(lb.mod, lb.spec, mutated);
        if (!r.accepted) {
          ++caught;
          continue;
        }
        // the checker let it through: the deep monitor must refute the node
        Scenario sc = parse_scenario(slurp(corpus("seed_shop.scn")));
        auto stc = build_scenario_state(prog, sc);
        bool refuted = false;
        if (stc.ok()) {
          State st = *stc;
          st.top().cont = Cont::of(m.stmt);
          MonitorOptions mo;
          mo.deep = true;
          Verdict v = check_quadruple_dyn(prog, st, m.pre, m.post,
                                          m.mid ? m.mid : A("true"), mo);
          refuted = v.violated();
        }
        if (refuted) ++caught;
        else
          std::printf("  undetected mutant of %s (op %d)\n", n.name.c_str(),
                      op);
      }
    }
  }
  if (mutants < 50 || caught != mutants) {
    std::printf("  mutants %d, caught %d\n", mutants, caught);
    ok = false;
  }

  report(6, ok,
         std::to_string(sampled) + " samples, " + std::to_string(mutants) +
             " mutants",
         t.seconds());
  CHECK(ok);
}

TEST_CASE("criterion 7: the ghost ledger agrees with a direct oracle") {
  Timer t;
  ModuleDef ghost = load_module("M_ghost.loo");
  LinkedProgram p = link(ghost, {});
  gen::Rng rng(515151);
  bool ok = true;
  int checked = 0;
  for (int i = 0; i < 520; ++i) {
    // a random acyclic ledger of length <= 8 over <= 4 accounts
    State s;
    int n_accounts = 1 + rng.upto(4);
    Addr bank = 0;
    std::vector<Addr> accounts;
    for (int a2 = 0; a2 < n_accounts; ++a2)
      accounts.push_back(s.alloc(Object{
          "Account", {{"bank", Value::null()}, {"key", Value::null()}}}));
    bank = s.alloc(Object{"Bank", {{"ledger", Value::null()}}});
    int len = 1 + rng.upto(8);
    Addr next = 0;
    std::vector<std::pair<Addr, std::int64_t>> entries;  // front last
    for (int e = 0; e < len; ++e) {
      Addr acc = accounts[rng.upto(n_accounts)];
      std::int64_t bal = rng.upto(500);
      Addr node = s.alloc(Object{"Ledger",
                                 {{"acc", Value::address(acc)},
                                  {"bal", Value::integer(bal)},
                                  {"next", next ? Value::address(next)
                                                : Value::null()}}});
      entries.emplace_back(acc, bal);
      next = node;
    }
    s.object(bank)->set_field("ledger", Value::address(next));
    for (Addr acc : accounts)
      s.object(acc)->set_field("bank", Value::address(bank));
    Frame f;
    f.vars["this"] = Value::address(accounts[0]);
    s.stack.push_back(f);

    // oracle: first matching entry from the ledger head
    Addr probe = accounts[rng.upto(n_accounts)];
    std::optional<std::int64_t> expect;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      if (it->first == probe) {
        expect = it->second;
        break;
      }
    ExprPtr e = Expr::ghost(Expr::lit(Value::address(probe)), "balance", {});
    EvalResult r = eval_expr(p, s, e, kDefaultGhostFuel);
    if (expect) {
      if (!r.is_ok() || !(r.value == Value::integer(*expect))) {
        std::printf("  ledger %d: ghost %s oracle %lld\n", i,
                    r.is_ok() ? r.value.show().c_str() : r.message.c_str(),
                    static_cast<long long>(*expect));
        ok = false;
      }
    } else {
      // the walk runs off the end: a null dereference, not divergence
      if (r.is_ok()) ok = false;
    }
    ++checked;
  }
  // a cyclic ledger diverges at the configured fuel instead of looping
  {
    State s;
    Addr acc = s.alloc(
        Object{"Account", {{"bank", Value::null()}, {"key", Value::null()}}});
    Addr other = s.alloc(
        Object{"Account", {{"bank", Value::null()}, {"key", Value::null()}}});
    Addr bank = s.alloc(Object{"Bank", {{"ledger", Value::null()}}});
    Addr node = s.alloc(Object{"Ledger",
                               {{"acc", Value::address(other)},
                                {"bal", Value::integer(3)},
                                {"next", Value::null()}}});
    s.object(node)->set_field("next", Value::address(node));
    s.object(bank)->set_field("ledger", Value::address(node));
    s.object(acc)->set_field("bank", Value::address(bank));
    s.object(other)->set_field("bank", Value::address(bank));
    Frame f;
    f.vars["this"] = Value::address(acc);
    s.stack.push_back(f);
    ExprPtr e = Expr::ghost(Expr::lit(Value::address(acc)), "balance", {});
    EvalResult r = eval_expr(p, s, e, 2000);
    ok &= r.status == EvalResult::Status::Diverged;
  }
  report(7, ok && checked >= 500,
         std::to_string(checked) + " random ledgers plus a cycle",
         t.seconds());
  CHECK(ok);
  CHECK(checked >= 500);
}
