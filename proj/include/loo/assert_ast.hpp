// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "loo/ast.hpp"
#include "loo/pretty.hpp"

namespace loo {

struct Assertion;
using AssertPtr = std::shared_ptr<const Assertion>;

// Def 3.1 assertion syntax. Or/Implies/Exists are desugared at parse time.
struct Assertion {
  enum class Kind {
    Expr,           // e
    HasClass,       // e : C
    Not,            // !A
    And,            // A /\ A
    All,            // forall x:C. A
    External,       // external e
    Internal,       // internal e
    ProtectedFrom,  // e protectedFrom e'
    Protected,      // protected e
  };
  Kind kind;
  ExprPtr e, e2;
  std::string cls;   // HasClass / All binder class
  std::string var;   // All binder
  AssertPtr a, b;

  static AssertPtr expr(ExprPtr e) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::Expr;
    p->e = std::move(e);
    return p;
  }
  static AssertPtr has_class(ExprPtr e, std::string c) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::HasClass;
    p->e = std::move(e);
    p->cls = std::move(c);
    return p;
  }
  static AssertPtr negate(AssertPtr a) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::Not;
    p->a = std::move(a);
    return p;
  }
  static AssertPtr conj(AssertPtr a, AssertPtr b) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::And;
    p->a = std::move(a);
    p->b = std::move(b);
    return p;
  }
  static AssertPtr all(std::string x, std::string c, AssertPtr body) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::All;
    p->var = std::move(x);
    p->cls = std::move(c);
    p->a = std::move(body);
    return p;
  }
  static AssertPtr external(ExprPtr e) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::External;
    p->e = std::move(e);
    return p;
  }
  static AssertPtr internal(ExprPtr e) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::Internal;
    p->e = std::move(e);
    return p;
  }
  static AssertPtr protected_from(ExprPtr e, ExprPtr other) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::ProtectedFrom;
    p->e = std::move(e);
    p->e2 = std::move(other);
    return p;
  }
  static AssertPtr protected_(ExprPtr e) {
    auto p = std::make_shared<Assertion>();
    p->kind = Kind::Protected;
    p->e = std::move(e);
    return p;
  }
  static AssertPtr truth() { return expr(Expr::lit(Value::boolean(true))); }
  static AssertPtr falsity() { return expr(Expr::lit(Value::boolean(false))); }
  // A -> B  desugars to  !(A /\ !B)
  static AssertPtr implies(AssertPtr a, AssertPtr b) {
    return negate(conj(std::move(a), negate(std::move(b))));
  }
  // A \/ B  desugars to  !(!A /\ !B)
  static AssertPtr disj(AssertPtr a, AssertPtr b) {
    return negate(conj(negate(std::move(a)), negate(std::move(b))));
  }
  static AssertPtr exists(std::string x, std::string c, AssertPtr body) {
    return negate(all(std::move(x), std::move(c), negate(std::move(body))));
  }
};

inline bool assert_equal(const AssertPtr& x, const AssertPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->cls != y->cls || x->var != y->var) return false;
  return expr_equal(x->e, y->e) && expr_equal(x->e2, y->e2) &&
         assert_equal(x->a, y->a) && assert_equal(x->b, y->b);
}

inline AssertPtr conj_all(const std::vector<AssertPtr>& as) {
  if (as.empty()) return Assertion::truth();
  AssertPtr acc = as.front();
  for (size_t i = 1; i < as.size(); ++i) acc = Assertion::conj(acc, as[i]);
  return acc;
}

inline std::vector<AssertPtr> conjuncts_of(const AssertPtr& a) {
  std::vector<AssertPtr> out;
  std::function<void(const AssertPtr&)> go = [&](const AssertPtr& x) {
    if (x->kind == Assertion::Kind::And) {
      go(x->a);
      go(x->b);
    } else {
      out.push_back(x);
    }
  };
  go(a);
  return out;
}

// ---- free variables ---------------------------------------------------------

inline void expr_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::Var: out.insert(e->name); return;
    case Expr::Kind::Lit: return;
    case Expr::Kind::Field: expr_vars(e->a, out); return;
    case Expr::Kind::Ghost:
      expr_vars(e->a, out);
      for (auto& a : e->args) expr_vars(a, out);
      return;
    case Expr::Kind::Binary:
      expr_vars(e->a, out);
      expr_vars(e->b, out);
      return;
    case Expr::Kind::Cond:
      expr_vars(e->a, out);
      expr_vars(e->b, out);
      expr_vars(e->c, out);
      return;
  }
}

inline void free_vars_into(const AssertPtr& a, std::set<std::string>& out) {
  if (!a) return;
  switch (a->kind) {
    case Assertion::Kind::Expr:
    case Assertion::Kind::HasClass:
    case Assertion::Kind::External:
    case Assertion::Kind::Internal:
    case Assertion::Kind::Protected:
      expr_vars(a->e, out);
      return;
    case Assertion::Kind::ProtectedFrom:
      expr_vars(a->e, out);
      expr_vars(a->e2, out);
      return;
    case Assertion::Kind::Not:
      free_vars_into(a->a, out);
      return;
    case Assertion::Kind::And:
      free_vars_into(a->a, out);
      free_vars_into(a->b, out);
      return;
    case Assertion::Kind::All: {
      std::set<std::string> inner;
      free_vars_into(a->a, inner);
      inner.erase(a->var);
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

// Def 3.1: fv(A).
inline std::set<std::string> free_vars(const AssertPtr& a) {
  std::set<std::string> out;
  free_vars_into(a, out);
  return out;
}

// ---- substitution (capture avoiding) ----------------------------------------

inline ExprPtr subst_expr(const ExprPtr& e,
                          const std::map<std::string, ExprPtr>& m) {
  if (!e) return e;
  switch (e->kind) {
    case Expr::Kind::Var: {
      auto it = m.find(e->name);
      return it == m.end() ? e : it->second;
    }
    case Expr::Kind::Lit:
      return e;
    case Expr::Kind::Field:
      return Expr::field(subst_expr(e->a, m), e->name);
    case Expr::Kind::Ghost: {
      std::vector<ExprPtr> args;
      for (auto& a : e->args) args.push_back(subst_expr(a, m));
      return Expr::ghost(subst_expr(e->a, m), e->name, std::move(args));
    }
    case Expr::Kind::Binary:
      return Expr::binary(e->op, subst_expr(e->a, m), subst_expr(e->b, m));
    case Expr::Kind::Cond:
      return Expr::cond(subst_expr(e->a, m), subst_expr(e->b, m),
                        subst_expr(e->c, m));
  }
  return e;
}

// A[e/x] textual substitution, renaming quantifier binders away from both the
// substituted variables and the free variables of the replacements.
inline AssertPtr substitute(const AssertPtr& a,
                            const std::map<std::string, ExprPtr>& m) {
  if (!a || m.empty()) return a;
  switch (a->kind) {
    case Assertion::Kind::Expr:
      return Assertion::expr(subst_expr(a->e, m));
    case Assertion::Kind::HasClass:
      return Assertion::has_class(subst_expr(a->e, m), a->cls);
    case Assertion::Kind::External:
      return Assertion::external(subst_expr(a->e, m));
    case Assertion::Kind::Internal:
      return Assertion::internal(subst_expr(a->e, m));
    case Assertion::Kind::Protected:
      return Assertion::protected_(subst_expr(a->e, m));
    case Assertion::Kind::ProtectedFrom:
      return Assertion::protected_from(subst_expr(a->e, m),
                                       subst_expr(a->e2, m));
    case Assertion::Kind::Not:
      return Assertion::negate(substitute(a->a, m));
    case Assertion::Kind::And:
      return Assertion::conj(substitute(a->a, m), substitute(a->b, m));
    case Assertion::Kind::All: {
      std::map<std::string, ExprPtr> inner = m;
      inner.erase(a->var);
      // collect free variables of the replacements to detect capture
      std::set<std::string> repl_fv;
      for (auto& [k, v] : inner) expr_vars(v, repl_fv);
      std::string binder = a->var;
      AssertPtr body = a->a;
      if (repl_fv.count(binder)) {
        std::string fresh = binder;
        std::set<std::string> body_fv;
        free_vars_into(body, body_fv);
        do {
          fresh += "'";
        } while (repl_fv.count(fresh) || body_fv.count(fresh) ||
                 inner.count(fresh));
        std::map<std::string, ExprPtr> rn{{binder, Expr::var(fresh)}};
        body = substitute(body, rn);
        binder = fresh;
      }
      if (inner.empty()) return Assertion::all(binder, a->cls, body);
      return Assertion::all(binder, a->cls, substitute(body, inner));
    }
  }
  return a;
}

inline AssertPtr subst_one(const AssertPtr& a, const std::string& x,
                           const ExprPtr& e) {
  return substitute(a, {{x, e}});
}

// ---- printing ----------------------------------------------------------------

inline std::string show_assert(const AssertPtr& a) {
  if (!a) return "<null>";
  switch (a->kind) {
    case Assertion::Kind::Expr: {
      std::string s = show_expr(a->e);
      if (a->e->kind == Expr::Kind::Binary || a->e->kind == Expr::Kind::Cond)
        return "(" + s + ")";
      return s;
    }
    case Assertion::Kind::HasClass:
      return show_expr(a->e) + " : " + a->cls;
    case Assertion::Kind::Not:
      return "!(" + show_assert(a->a) + ")";
    case Assertion::Kind::And:
      return "(" + show_assert(a->a) + " /\\ " + show_assert(a->b) + ")";
    case Assertion::Kind::All:
      return "(forall " + a->var + ":" + a->cls + ". " + show_assert(a->a) + ")";
    case Assertion::Kind::External:
      return "external " + show_expr(a->e);
    case Assertion::Kind::Internal:
      return "internal " + show_expr(a->e);
    case Assertion::Kind::ProtectedFrom:
      return show_expr(a->e) + " protectedFrom " + show_expr(a->e2);
    case Assertion::Kind::Protected:
      return "protected " + show_expr(a->e);
  }
  return "?";
}

}  // namespace loo
