// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "loo/classify.hpp"
#include "loo/sat.hpp"

namespace loo {

// Def 4.1: a scoped invariant <x:C | A>.
struct ScopedInvariant {
  std::string name;
  std::vector<Param> binders;
  AssertPtr body;
};

// Def 4.1: { x:C' and A } p C::m(y:D) { A' || A'' }.
struct MethodSpec {
  std::string name;
  std::vector<Param> binders;  // x
  AssertPtr pre;               // A (binder class facts kept separate)
  Privacy privacy = Privacy::Public;
  std::string cls;
  std::string method;
  std::vector<Param> formals;  // y:D as written in the spec
  AssertPtr post;              // A'
  AssertPtr mid;               // A''
};

struct SpecConjunct {
  enum class Kind { Invariant, Method };
  Kind kind;
  ScopedInvariant inv;
  MethodSpec ms;

  const std::string& name() const {
    return kind == Kind::Invariant ? inv.name : ms.name;
  }
};

struct Spec {
  std::vector<SpecConjunct> conjuncts;

  const SpecConjunct* find(const std::string& n) const {
    for (auto& c : conjuncts)
      if (c.name() == n) return &c;
    return nullptr;
  }
};

// A binder of class type contributes x : C; an external binder contributes
// `external x` (externality is not a class).
inline AssertPtr typing_fact(const ExprPtr& e, const Type& t) {
  if (t.kind == Type::Kind::External) return Assertion::external(e);
  return Assertion::has_class(e, t.show());
}

inline AssertPtr binder_facts(const std::vector<Param>& binders) {
  std::vector<AssertPtr> parts;
  for (auto& b : binders)
    parts.push_back(typing_fact(Expr::var(b.name), b.type));
  return conj_all(parts);
}

inline std::map<std::string, std::string> binder_gamma(
    const std::vector<Param>& binders) {
  std::map<std::string, std::string> g;
  for (auto& b : binders) g[b.name] = b.type.show();
  return g;
}

// ---- well-formedness (Def 4.5) ------------------------------------------------

inline Diagnostics wf_spec_conjunct(const ModuleDef& mod,
                                    const SpecConjunct& c) {
  Diagnostics out;
  auto bad = [&](const std::string& msg) {
    out.push_back({{}, c.name() + ": " + msg});
  };
  if (c.kind == SpecConjunct::Kind::Invariant) {
    const ScopedInvariant& inv = c.inv;
    std::set<std::string> binders;
    for (auto& b : inv.binders) binders.insert(b.name);
    for (auto& x : free_vars(inv.body))
      if (!binders.count(x)) bad("free variable '" + x + "' is not a binder");
    AssertPtr full = Assertion::conj(binder_facts(inv.binders), inv.body);
    if (is_enc(mod, full) != Tri::Yes)
      bad("invariant body is not encapsulated");
    return out;
  }
  const MethodSpec& ms = c.ms;
  std::set<std::string> xs, ys;
  for (auto& b : ms.binders) xs.insert(b.name);
  for (auto& f : ms.formals) ys.insert(f.name);
  if (xs.count("this") || xs.count("res") || ys.count("this") ||
      ys.count("res"))
    bad("this/res may not appear among binders or formals");
  for (auto& x : free_vars(ms.pre))
    if (!xs.count(x) && !ys.count(x) && x != "this")
      bad("precondition mentions '" + x + "'");
  for (auto& x : free_vars(ms.post))
    if (!xs.count(x) && !ys.count(x) && x != "this" && x != "res")
      bad("postcondition mentions '" + x + "'");
  for (auto& x : free_vars(ms.mid))
    if (!xs.count(x)) bad("mid-condition mentions '" + x + "'");
  if (!is_pos(ms.pre)) bad("precondition is not Pos");
  if (!is_pos(ms.post)) bad("postcondition is not Pos");
  AssertPtr mid_full = Assertion::conj(binder_facts(ms.binders), ms.mid);
  if (is_enc(mod, mid_full) != Tri::Yes)
    bad("mid-condition is not encapsulated");
  const ClassDef* cd = mod.klass(ms.cls);
  if (cd) {
    const MethodDef* md = cd->method(ms.method);
    if (md && md->params.size() != ms.formals.size())
      bad("formal count does not match " + ms.cls + "::" + ms.method);
  }
  return out;
}

inline Diagnostics wf_spec(const ModuleDef& mod, const Spec& spec) {
  Diagnostics out;
  for (auto& c : spec.conjuncts) {
    Diagnostics d = wf_spec_conjunct(mod, c);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

// ---- safe renaming (Def 5.1) ---------------------------------------------------

// Renames invariant binders, or a method spec's formals to actuals plus its
// extra binders to fresh names. Actuals may not include this or res.
inline Outcome<SpecConjunct> rename_spec(
    const SpecConjunct& c, const std::map<std::string, std::string>& renaming) {
  // Formal parameters stand for a call's actuals, which may not be this or
  // res; binders are plain universals and may be instantiated at the
  // receiver (this is never assigned).
  std::set<std::string> formal_names;
  if (c.kind == SpecConjunct::Kind::Method)
    for (auto& f : c.ms.formals) formal_names.insert(f.name);
  std::map<std::string, ExprPtr> sub;
  for (auto& [from, to] : renaming) {
    if (to == "res" || (to == "this" && formal_names.count(from)))
      return Outcome<SpecConjunct>::err(
          "renaming may not pass this or res as an actual");
    sub.emplace(from, Expr::var(to));
  }
  SpecConjunct out = c;
  if (c.kind == SpecConjunct::Kind::Invariant) {
    std::set<std::string> seen;
    for (auto& b : out.inv.binders) {
      auto it = renaming.find(b.name);
      if (it != renaming.end()) b.name = it->second;
      if (!seen.insert(b.name).second)
        return Outcome<SpecConjunct>::err("renaming collides binders");
    }
    out.inv.body = substitute(c.inv.body, sub);
    return out;
  }
  // method spec: binders are fv(pre) minus formals/this; both binder and
  // formal positions may be renamed.
  std::set<std::string> seen;
  for (auto& b : out.ms.binders) {
    auto it = renaming.find(b.name);
    if (it != renaming.end()) b.name = it->second;
    if (!seen.insert(b.name).second)
      return Outcome<SpecConjunct>::err("renaming collides binders");
  }
  for (auto& f : out.ms.formals) {
    auto it = renaming.find(f.name);
    if (it != renaming.end()) f.name = it->second;
  }
  out.ms.pre = substitute(c.ms.pre, sub);
  out.ms.post = substitute(c.ms.post, sub);
  out.ms.mid = substitute(c.ms.mid, sub);
  return out;
}

}  // namespace loo
