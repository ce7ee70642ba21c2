// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "loo/assert_ast.hpp"
#include "loo/eval.hpp"
#include "loo/scoped.hpp"

namespace loo {

enum class Sat { Holds, Fails, Diverged, IllFormed };

inline const char* show(Sat s) {
  switch (s) {
    case Sat::Holds: return "holds";
    case Sat::Fails: return "fails";
    case Sat::Diverged: return "diverged";
    case Sat::IllFormed: return "ill-formed";
  }
  return "?";
}

inline Sat sat_not(Sat s) {
  if (s == Sat::Holds) return Sat::Fails;
  if (s == Sat::Fails) return Sat::Holds;
  return s;
}

// Notes accumulate satisfaction caveats (protection of null, the scalar
// protection extension); reports surface them, tests mostly ignore them.
using SatNotes = std::vector<std::string>;

namespace detail {

inline void note(SatNotes* notes, const std::string& s) {
  if (!notes) return;
  for (auto& n : *notes)
    if (n == s) return;
  notes->push_back(s);
}

}  // namespace detail

// Def 3.4(1) with the Def C.2 scalar extension: v protectedFrom v_o.
inline bool protected_from(const LinkedProgram& prog, const State& s,
                           const Value& v, const Value& v_o,
                           SatNotes* notes = nullptr) {
  if (v_o.is_scalar()) return true;
  if (v.is_scalar()) return false;
  if (v.is_null()) {
    detail::note(notes, "protection of a null value treated as false");
    return false;
  }
  if (v_o.is_null()) return true;
  if (v == v_o) return false;
  for (Addr a : reach(s, v_o.addr())) {
    const Object* o = s.object(a);
    if (!o || prog.is_internal_class(o->cls)) continue;
    for (auto& [f, fv] : o->fields)
      if (fv == v) return false;
  }
  return true;
}

// Def 3.4(2): protected v. Scalars are vacuously protected (our extension,
// flagged); null is not protected (flagged).
inline bool protected_value(const LinkedProgram& prog, const State& s,
                            const Value& v, SatNotes* notes = nullptr) {
  if (v.is_scalar()) {
    detail::note(notes, "protection of a scalar holds by extension");
    return true;
  }
  if (v.is_null()) {
    detail::note(notes, "protection of a null value treated as false");
    return false;
  }
  auto ext = is_external(prog, s);
  if (ext && *ext) {
    for (auto& [x, w] : s.top().vars)
      if (w == v) return false;
  }
  for (Addr a : locally_reachable(s)) {
    const Object* o = s.object(a);
    if (!o || prog.is_internal_class(o->cls)) continue;
    for (auto& [f, fv] : o->fields)
      if (fv == v) return false;
  }
  return true;
}

// Class membership for scalar type names as well as heap classes.
inline bool value_has_class(const LinkedProgram& prog, const State& s,
                            const Value& v, const std::string& cls) {
  if (cls == "int") return v.is_int();
  if (cls == "nat") return v.is_int() && v.as_int() >= 0;
  if (cls == "bool") return v.is_bool();
  if (cls == "str") return v.is_str();
  if (!v.is_address()) return false;
  auto c = class_of(s, v);
  return c && *c == cls;
}

struct SatCtx {
  const LinkedProgram& prog;
  const State& state;
  std::int64_t fuel = kDefaultGhostFuel;
  SatNotes* notes = nullptr;
};

namespace detail {

inline Sat sat_rec(SatCtx& cx, const AssertPtr& a);

inline Sat eval_to(SatCtx& cx, const ExprPtr& e, Value& out) {
  EvalResult r = eval_expr(cx.prog, cx.state, e, cx.fuel);
  switch (r.status) {
    case EvalResult::Status::Ok:
      out = r.value;
      return Sat::Holds;
    case EvalResult::Status::Diverged:
      return Sat::Diverged;
    case EvalResult::Status::Unbound:
      return Sat::IllFormed;
    case EvalResult::Status::Error:
      // Existential grounding semantics: an erroring expression denotes no
      // value, so the enclosing atom fails.
      note(cx.notes, "expression error: " + r.message);
      return Sat::Fails;
  }
  return Sat::Fails;
}

inline Sat combine_and(Sat x, Sat y) {
  if (x == Sat::IllFormed || y == Sat::IllFormed) return Sat::IllFormed;
  if (x == Sat::Diverged || y == Sat::Diverged) return Sat::Diverged;
  if (x == Sat::Fails || y == Sat::Fails) return Sat::Fails;
  return Sat::Holds;
}

inline Sat sat_rec(SatCtx& cx, const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Expr: {
      Value v;
      Sat s = eval_to(cx, a->e, v);
      if (s != Sat::Holds) return s;
      return v.is_bool() && v.as_bool() ? Sat::Holds : Sat::Fails;
    }
    case Assertion::Kind::HasClass: {
      Value v;
      Sat s = eval_to(cx, a->e, v);
      if (s != Sat::Holds) return s;
      return value_has_class(cx.prog, cx.state, v, a->cls) ? Sat::Holds
                                                           : Sat::Fails;
    }
    case Assertion::Kind::Not:
      return sat_not(sat_rec(cx, a->a));
    case Assertion::Kind::And:
      return combine_and(sat_rec(cx, a->a), sat_rec(cx, a->b));
    case Assertion::Kind::All: {
      // Def 3.3(5): the quantifier ranges over the addresses of class C in
      // the current heap; scalar classes give a vacuous conjunction.
      Sat acc = Sat::Holds;
      for (Addr ad = 1; ad <= cx.state.heap.size(); ++ad) {
        const Object* o = cx.state.object(ad);
        if (!o || o->cls != a->cls) continue;
        AssertPtr inst =
            subst_one(a->a, a->var, Expr::lit(Value::address(ad)));
        acc = combine_and(acc, sat_rec(cx, inst));
        if (acc == Sat::IllFormed) return acc;
      }
      return acc;
    }
    case Assertion::Kind::External: {
      Value v;
      Sat s = eval_to(cx, a->e, v);
      if (s != Sat::Holds) return s;
      if (v.is_scalar()) return Sat::Holds;  // scalar classes are not in M
      if (!v.is_address()) return Sat::Fails;
      auto c = class_of(cx.state, v);
      if (!c) return Sat::Fails;
      return cx.prog.is_internal_class(*c) ? Sat::Fails : Sat::Holds;
    }
    case Assertion::Kind::Internal: {
      Value v;
      Sat s = eval_to(cx, a->e, v);
      if (s != Sat::Holds) return s;
      if (!v.is_address()) return Sat::Fails;
      auto c = class_of(cx.state, v);
      if (!c) return Sat::Fails;
      return cx.prog.is_internal_class(*c) ? Sat::Holds : Sat::Fails;
    }
    case Assertion::Kind::ProtectedFrom: {
      Value v, vo;
      Sat s1 = eval_to(cx, a->e, v);
      if (s1 != Sat::Holds) return s1;
      Sat s2 = eval_to(cx, a->e2, vo);
      if (s2 != Sat::Holds) return s2;
      return protected_from(cx.prog, cx.state, v, vo, cx.notes) ? Sat::Holds
                                                                : Sat::Fails;
    }
    case Assertion::Kind::Protected: {
      Value v;
      Sat s = eval_to(cx, a->e, v);
      if (s != Sat::Holds) return s;
      return protected_value(cx.prog, cx.state, v, cx.notes) ? Sat::Holds
                                                             : Sat::Fails;
    }
  }
  return Sat::IllFormed;
}

}  // namespace detail

// Defs 3.3/3.4 satisfaction. Free variables must be bound in the top frame
// (IllFormed otherwise); diverging ghost evaluation poisons the result.
inline Sat sat(const LinkedProgram& prog, const State& s, const AssertPtr& a,
               std::int64_t fuel = kDefaultGhostFuel,
               SatNotes* notes = nullptr) {
  SatCtx cx{prog, s, fuel, notes};
  return detail::sat_rec(cx, a);
}

// Def 3.5: replace every free variable by its value in the top frame.
inline Outcome<AssertPtr> ground(const State& s, const AssertPtr& a) {
  std::map<std::string, ExprPtr> m;
  for (auto& x : free_vars(a)) {
    const Value* v = s.top().lookup(x);
    if (!v) return Outcome<AssertPtr>::err("unbound free variable '" + x + "'");
    m.emplace(x, Expr::lit(*v));
  }
  return substitute(a, m);
}

// Def F.1 deep satisfaction: ground at sigma, then require satisfaction at
// every restriction from frame k to the top.
inline Sat sat_deep(const LinkedProgram& prog, const State& s, size_t k,
                    const AssertPtr& a, std::int64_t fuel = kDefaultGhostFuel,
                    SatNotes* notes = nullptr) {
  if (k < 1 || k > s.depth()) return Sat::IllFormed;
  auto g = ground(s, a);
  if (!g) return Sat::IllFormed;
  Sat acc = Sat::Holds;
  for (size_t j = k; j <= s.depth(); ++j) {
    auto r = restrict_to(s, j);
    acc = detail::combine_and(acc, sat(prog, *r, *g, fuel, notes));
    if (acc == Sat::IllFormed) return acc;
  }
  return acc;
}

}  // namespace loo
