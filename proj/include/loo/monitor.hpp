// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "loo/scenario.hpp"
#include "loo/scoped.hpp"
#include "loo/spec.hpp"

namespace loo {

struct Witness {
  std::string description;
  std::string trace_jsonl;
  std::int64_t violating_step = -1;  // -1: the base state itself
  std::string final_note;            // e.g. balances at trace end
};

struct Verdict {
  enum class Kind { Verified, Violated, Inconclusive };
  Kind kind = Kind::Verified;
  std::int64_t bound = 0;  // Verified is always "within this many steps"
  std::string why;
  std::optional<Witness> witness;
  SatNotes notes;

  bool violated() const { return kind == Kind::Violated; }
  static Verdict verified(std::int64_t bound) {
    Verdict v;
    v.kind = Kind::Verified;
    v.bound = bound;
    return v;
  }
  static Verdict violated(Witness w, std::string why) {
    Verdict v;
    v.kind = Kind::Violated;
    v.why = std::move(why);
    v.witness = std::move(w);
    return v;
  }
  static Verdict inconclusive(std::string why) {
    Verdict v;
    v.kind = Kind::Inconclusive;
    v.why = std::move(why);
    return v;
  }
};

inline const char* show(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Verified: return "verified";
    case Verdict::Kind::Violated: return "violated";
    case Verdict::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct MonitorOptions {
  std::int64_t budget = kDefaultMonitorBudget;
  std::int64_t fuel = kDefaultGhostFuel;
  bool deep = false;          // Def F.2 semantics: check from frame k upward
  size_t max_tuples = 256;    // instantiation cap for invariant binders
  bool record_witness = true;
};

// Def 4.2 (shallow) / Def F.2 (deep): if sigma satisfies pre, every
// terminating scoped final state satisfies post, and every intermediate
// external scoped state satisfies the mid-condition grounded at sigma.
// All assertions are expected to be instantiated (no free variables beyond
// what the base frame binds).
inline Verdict check_quadruple_dyn(const LinkedProgram& prog, const State& base,
                                   const AssertPtr& pre, const AssertPtr& post,
                                   const AssertPtr& mid,
                                   const MonitorOptions& opt = {}) {
  SatNotes notes;
  size_t k = base.depth();
  Sat pre_sat = opt.deep ? sat_deep(prog, base, k, pre, opt.fuel, &notes)
                         : sat(prog, base, pre, opt.fuel, &notes);
  if (pre_sat == Sat::Fails) {
    Verdict v = Verdict::verified(0);
    v.why = "precondition does not hold; obligation is vacuous";
    v.notes = notes;
    return v;
  }
  if (pre_sat == Sat::Diverged)
    return Verdict::inconclusive("ghost divergence evaluating precondition");
  if (pre_sat == Sat::IllFormed)
    return Verdict::inconclusive("precondition is ill-formed here");

  auto grounded_mid = ground(base, mid);
  if (!grounded_mid)
    return Verdict::inconclusive("mid-condition: " + grounded_mid.error());
  AssertPtr midg = *grounded_mid;

  auto check_at = [&](const State& st, const AssertPtr& a) -> Sat {
    return opt.deep ? sat_deep(prog, st, k, a, opt.fuel, &notes)
                    : sat(prog, st, a, opt.fuel, &notes);
  };

  bool saw_divergence = false;
  std::int64_t violation_at = -2;
  std::string violation_why;

  // The reflexive case: sigma itself is in its scoped future.
  {
    auto ext = is_external(prog, base);
    if (ext && *ext) {
      Sat s = check_at(base, midg);
      if (s == Sat::Fails) {
        violation_at = -1;
        violation_why = "mid-condition fails at the base state";
      } else if (s == Sat::Diverged) {
        saw_divergence = true;
      }
    }
  }

  std::int64_t step_no = 0;
  std::optional<State> final_state;
  auto visit = [&](const State& st, StepKind) -> bool {
    ++step_no;
    if (violation_at != -2) return true;  // keep walking for the witness trace
    auto ext = is_external(prog, st);
    if (ext && *ext) {
      Sat s = check_at(st, midg);
      if (s == Sat::Fails) {
        violation_at = step_no;
        violation_why = "mid-condition fails at an external scoped state";
      } else if (s == Sat::Diverged) {
        saw_divergence = true;
      }
    }
    if (st.depth() == base.depth() && st.top().cont.empty())
      final_state = st;
    return true;
  };

  ScopedTrace tr =
      scoped_walk(prog, base, opt.budget, visit, opt.record_witness);

  if (violation_at == -2 && final_state) {
    Sat s = check_at(*final_state, post);
    if (s == Sat::Fails) {
      violation_at = step_no;
      violation_why = "postcondition fails at the terminating state";
    } else if (s == Sat::Diverged) {
      saw_divergence = true;
    }
  }

  if (violation_at != -2) {
    Witness w;
    w.description = violation_why;
    w.violating_step = violation_at;
    if (opt.record_witness) w.trace_jsonl = trace_jsonl(tr);
    Verdict v = Verdict::violated(std::move(w), violation_why);
    v.notes = notes;
    return v;
  }
  if (saw_divergence)
    return Verdict::inconclusive("ghost divergence while checking");
  if (tr.budget_exhausted())
    return Verdict::inconclusive("budget exhausted after " +
                                 std::to_string(opt.budget) + " steps");
  Verdict v = Verdict::verified(step_no);
  v.notes = notes;
  return v;
}

// ---- binder instantiation ----------------------------------------------------

// Address binders range over the heap addresses of their class in the base
// state; scalar binders over the scalars visible in the heap and frame plus
// simple defaults. The product is capped.
inline std::vector<Value> instantiation_candidates(const LinkedProgram& prog,
                                                   const State& s,
                                                   const Type& t) {
  std::vector<Value> out;
  auto add = [&](const Value& v) {
    for (auto& w : out)
      if (w == v) return;
    out.push_back(v);
  };
  (void)prog;
  switch (t.kind) {
    case Type::Kind::Class:
      for (Addr a = 1; a <= s.heap.size(); ++a)
        if (s.object(a)->cls == t.cls) add(Value::address(a));
      break;
    case Type::Kind::External:
      for (Addr a = 1; a <= s.heap.size(); ++a)
        if (!prog.is_internal_class(s.object(a)->cls)) add(Value::address(a));
      break;
    case Type::Kind::Int:
    case Type::Kind::Nat: {
      add(Value::integer(0));
      for (auto& o : s.heap)
        for (auto& [f, v] : o.fields)
          if (v.is_int()) add(v);
      for (auto& [x, v] : s.top().vars)
        if (v.is_int()) add(v);
      if (t.kind == Type::Kind::Nat) {
        std::vector<Value> nat;
        for (auto& v : out)
          if (v.as_int() >= 0) nat.push_back(v);
        out = std::move(nat);
      }
      break;
    }
    case Type::Kind::Bool:
      add(Value::boolean(false));
      add(Value::boolean(true));
      break;
    case Type::Kind::Str: {
      add(Value::str(""));
      for (auto& o : s.heap)
        for (auto& [f, v] : o.fields)
          if (v.is_str()) add(v);
      break;
    }
  }
  return out;
}

inline std::vector<std::vector<Value>> instantiation_tuples(
    const LinkedProgram& prog, const State& s, const std::vector<Param>& binders,
    size_t cap) {
  std::vector<std::vector<Value>> tuples{{}};
  for (auto& b : binders) {
    std::vector<Value> cands = instantiation_candidates(prog, s, b.type);
    std::vector<std::vector<Value>> next;
    for (auto& t : tuples) {
      for (auto& c : cands) {
        next.push_back(t);
        next.back().push_back(c);
        if (next.size() >= cap) break;
      }
      if (next.size() >= cap) break;
    }
    tuples = std::move(next);
    if (tuples.empty()) return tuples;
  }
  return tuples;
}

inline AssertPtr instantiate(const AssertPtr& a,
                             const std::vector<Param>& binders,
                             const std::vector<Value>& tuple) {
  std::map<std::string, ExprPtr> m;
  for (size_t i = 0; i < binders.size(); ++i)
    m.emplace(binders[i].name, Expr::lit(tuple[i]));
  return substitute(a, m);
}

// Def 4.3(1): one instantiated run of a scoped invariant from an external
// base state. The instantiation must match the binder classes.
inline Verdict check_invariant_dyn(const LinkedProgram& prog,
                                   const ScopedInvariant& inv,
                                   const State& base,
                                   const std::vector<Value>& tuple,
                                   const MonitorOptions& opt = {}) {
  auto ext = is_external(prog, base);
  if (!ext) return Verdict::inconclusive(ext.error());
  if (!*ext)
    return Verdict::inconclusive("invariant obligations start at external states");
  if (tuple.size() != inv.binders.size())
    return Verdict::inconclusive("instantiation arity mismatch");
  for (size_t i = 0; i < tuple.size(); ++i) {
    bool ok;
    if (inv.binders[i].type.kind == Type::Kind::External) {
      auto c = class_of(base, tuple[i]);
      ok = c && !prog.is_internal_class(*c);
    } else {
      ok = value_has_class(prog, base, tuple[i], inv.binders[i].type.show());
    }
    if (!ok)
      return Verdict::inconclusive("instantiation class mismatch for binder " +
                                   inv.binders[i].name);
  }
  AssertPtr a = instantiate(inv.body, inv.binders, tuple);
  return check_quadruple_dyn(prog, base, a, a, a, opt);
}

// All instantiations of an invariant at one base state.
inline Verdict check_invariant_all(const LinkedProgram& prog,
                                   const ScopedInvariant& inv,
                                   const State& base,
                                   const MonitorOptions& opt = {}) {
  auto tuples = instantiation_tuples(prog, base, inv.binders, opt.max_tuples);
  Verdict worst = Verdict::verified(0);
  bool inconclusive = false;
  std::string why;
  for (auto& t : tuples) {
    Verdict v = check_invariant_dyn(prog, inv, base, t, opt);
    if (v.violated()) {
      std::ostringstream os;
      os << inv.name << " with ";
      for (size_t i = 0; i < t.size(); ++i)
        os << inv.binders[i].name << "=" << t[i].show() << " ";
      v.why = os.str() + ": " + v.why;
      return v;
    }
    if (v.kind == Verdict::Kind::Inconclusive) {
      inconclusive = true;
      why = v.why;
    } else {
      worst.bound = std::max(worst.bound, v.bound);
    }
  }
  if (inconclusive) return Verdict::inconclusive(why);
  return worst;
}

// Def 4.3(2): a method specification checked at a call-site state whose
// continuation begins with a matching call.
inline Verdict check_methodspec_dyn(const LinkedProgram& prog,
                                    const MethodSpec& ms, const State& base,
                                    const std::vector<Value>& tuple,
                                    const MonitorOptions& opt = {}) {
  if (base.top().cont.empty() ||
      base.top().cont.head()->kind != Stmt::Kind::Call)
    return Verdict::inconclusive("continuation is not a call");
  const StmtPtr& call = base.top().cont.head();
  if (call->member != ms.method || call->args.size() != ms.formals.size())
    return Verdict::inconclusive("call does not match the specification");
  std::map<std::string, ExprPtr> sub;
  sub.emplace("this", Expr::var(call->recv));
  for (size_t i = 0; i < ms.formals.size(); ++i)
    sub.emplace(ms.formals[i].name, call->args[i].as_expr());
  AssertPtr pre = substitute(ms.pre, sub);
  std::map<std::string, ExprPtr> sub_post = sub;
  sub_post.emplace("res", Expr::var(call->target));
  AssertPtr post = substitute(ms.post, sub_post);
  AssertPtr mid = ms.mid;  // fv(mid) within binders only
  if (tuple.size() != ms.binders.size())
    return Verdict::inconclusive("instantiation arity mismatch");
  pre = instantiate(pre, ms.binders, tuple);
  post = instantiate(post, ms.binders, tuple);
  mid = instantiate(mid, ms.binders, tuple);
  // receiver class and privacy gate: the obligation binds only matching calls
  const Value* recv = base.top().lookup(call->recv);
  if (!recv || !recv->is_address())
    return Verdict::verified(0);  // the call sticks immediately
  auto c = class_of(base, *recv);
  if (!c || *c != ms.cls) return Verdict::verified(0);
  AssertPtr full_pre = Assertion::conj(
      Assertion::has_class(Expr::var(call->recv), ms.cls), pre);
  return check_quadruple_dyn(prog, base, full_pre, post, mid, opt);
}

inline Verdict check_methodspec_all(const LinkedProgram& prog,
                                    const MethodSpec& ms, const State& base,
                                    const MonitorOptions& opt = {}) {
  auto tuples = instantiation_tuples(prog, base, ms.binders, opt.max_tuples);
  bool inconclusive = false;
  std::string why;
  std::int64_t bound = 0;
  for (auto& t : tuples) {
    Verdict v = check_methodspec_dyn(prog, ms, base, t, opt);
    if (v.violated()) {
      v.why = ms.name + ": " + v.why;
      return v;
    }
    if (v.kind == Verdict::Kind::Inconclusive) {
      inconclusive = true;
      why = v.why;
    } else {
      bound = std::max(bound, v.bound);
    }
  }
  if (inconclusive) return Verdict::inconclusive(why);
  return Verdict::verified(bound);
}

// ---- whole-spec monitoring over a scenario ------------------------------------

// Invariants are checked from the scenario base state; method specifications
// at every call site reached along the scenario's scoped run.
inline std::vector<std::pair<std::string, Verdict>> monitor_spec(
    const LinkedProgram& prog, const Spec& spec, const State& base,
    const MonitorOptions& opt = {}) {
  std::vector<std::pair<std::string, Verdict>> out;
  for (auto& c : spec.conjuncts) {
    if (c.kind == SpecConjunct::Kind::Invariant) {
      out.emplace_back(c.inv.name, check_invariant_all(prog, c.inv, base, opt));
      continue;
    }
    // collect call sites for this method along the scenario run
    std::vector<State> sites;
    if (!base.top().cont.empty() &&
        base.top().cont.head()->kind == Stmt::Kind::Call &&
        base.top().cont.head()->member == c.ms.method)
      sites.push_back(base);
    auto visit = [&](const State& st, StepKind) {
      if (!st.top().cont.empty() &&
          st.top().cont.head()->kind == Stmt::Kind::Call &&
          st.top().cont.head()->member == c.ms.method)
        sites.push_back(st);
      return true;
    };
    scoped_walk(prog, base, opt.budget, visit, false);
    Verdict agg = Verdict::verified(0);
    bool inconclusive = false;
    std::string why;
    for (auto& site : sites) {
      Verdict v = check_methodspec_all(prog, c.ms, site, opt);
      if (v.violated()) {
        agg = v;
        break;
      }
      if (v.kind == Verdict::Kind::Inconclusive) {
        inconclusive = true;
        why = v.why;
      } else {
        agg.bound = std::max(agg.bound, v.bound);
      }
    }
    if (!agg.violated() && inconclusive) agg = Verdict::inconclusive(why);
    out.emplace_back(c.ms.name, agg);
  }
  return out;
}

}  // namespace loo
