// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "loo/assert_ast.hpp"
#include "loo/classify.hpp"

namespace loo {

// The built-in underlying Hoare engine: a syntactic weakest-precondition
// transformer over call-free statements. Field writes case-split on aliasing
// through conditional expressions; the entailment layer discharges the rest.

namespace detail {

inline bool stmt_has_call(const StmtPtr& s) {
  if (!s) return false;
  switch (s->kind) {
    case Stmt::Kind::Call: return true;
    case Stmt::Kind::Seq:
    case Stmt::Kind::If: return stmt_has_call(s->s1) || stmt_has_call(s->s2);
    default: return false;
  }
}

inline bool stmt_assigns(const StmtPtr& s, const std::string& x) {
  if (!s) return false;
  switch (s->kind) {
    case Stmt::Kind::Assign:
    case Stmt::Kind::Call:
    case Stmt::Kind::New: return s->target == x;
    case Stmt::Kind::Seq:
    case Stmt::Kind::If:
      return stmt_assigns(s->s1, x) || stmt_assigns(s->s2, x);
    default: return false;
  }
}

inline bool expr_has_ghost(const ExprPtr& e) {
  if (!e) return false;
  switch (e->kind) {
    case Expr::Kind::Ghost: return true;
    case Expr::Kind::Field: return expr_has_ghost(e->a);
    case Expr::Kind::Binary: return expr_has_ghost(e->a) || expr_has_ghost(e->b);
    case Expr::Kind::Cond:
      return expr_has_ghost(e->a) || expr_has_ghost(e->b) ||
             expr_has_ghost(e->c);
    default: return false;
  }
}

inline bool assert_has_ghost(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Not:
    case Assertion::Kind::All: return assert_has_ghost(a->a);
    case Assertion::Kind::And:
      return assert_has_ghost(a->a) || assert_has_ghost(a->b);
    case Assertion::Kind::ProtectedFrom:
      return expr_has_ghost(a->e) || expr_has_ghost(a->e2);
    default: return expr_has_ghost(a->e);
  }
}

inline bool assert_has_quantifier(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::All: return true;
    case Assertion::Kind::Not: return assert_has_quantifier(a->a);
    case Assertion::Kind::And:
      return assert_has_quantifier(a->a) || assert_has_quantifier(a->b);
    default: return false;
  }
}

// Rewrites every access to field f in e for the write `x.f := src`:
//   t.f  becomes  if t == x then src else t.f
inline ExprPtr rewrite_field(const ExprPtr& e, const std::string& f,
                             const ExprPtr& recv, const ExprPtr& src) {
  if (!e) return e;
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Lit:
      return e;
    case Expr::Kind::Field: {
      ExprPtr base = rewrite_field(e->a, f, recv, src);
      ExprPtr read = Expr::field(base, e->name);
      if (e->name != f) return read;
      return Expr::cond(Expr::binary(BinOp::Eq, base, recv), src, read);
    }
    case Expr::Kind::Binary:
      return Expr::binary(e->op, rewrite_field(e->a, f, recv, src),
                          rewrite_field(e->b, f, recv, src));
    case Expr::Kind::Cond:
      return Expr::cond(rewrite_field(e->a, f, recv, src),
                        rewrite_field(e->b, f, recv, src),
                        rewrite_field(e->c, f, recv, src));
    case Expr::Kind::Ghost:
      return e;  // callers reject ghost-bearing assertions beforehand
  }
  return e;
}

inline AssertPtr rewrite_field_assert(const AssertPtr& a, const std::string& f,
                                      const ExprPtr& recv, const ExprPtr& src) {
  switch (a->kind) {
    case Assertion::Kind::Expr:
      return Assertion::expr(rewrite_field(a->e, f, recv, src));
    case Assertion::Kind::HasClass:
      return Assertion::has_class(rewrite_field(a->e, f, recv, src), a->cls);
    case Assertion::Kind::External:
      return Assertion::external(rewrite_field(a->e, f, recv, src));
    case Assertion::Kind::Internal:
      return Assertion::internal(rewrite_field(a->e, f, recv, src));
    case Assertion::Kind::Protected:
      return Assertion::protected_(rewrite_field(a->e, f, recv, src));
    case Assertion::Kind::ProtectedFrom:
      return Assertion::protected_from(rewrite_field(a->e, f, recv, src),
                                       rewrite_field(a->e2, f, recv, src));
    case Assertion::Kind::Not:
      return Assertion::negate(rewrite_field_assert(a->a, f, recv, src));
    case Assertion::Kind::And:
      return Assertion::conj(rewrite_field_assert(a->a, f, recv, src),
                             rewrite_field_assert(a->b, f, recv, src));
    case Assertion::Kind::All:
      return Assertion::all(a->var, a->cls,
                            rewrite_field_assert(a->a, f, recv, src));
  }
  return a;
}

}  // namespace detail

// Weakest precondition of a call-free statement. nullopt when the fragment
// cannot express it (calls, ghost-bearing assertions, quantified posts
// threatened by allocation).
inline std::optional<AssertPtr> weakest_pre(const StmtPtr& s,
                                            const AssertPtr& q) {
  if (!s) return q;
  switch (s->kind) {
    case Stmt::Kind::Skip:
      return q;
    case Stmt::Kind::Seq: {
      auto q2 = weakest_pre(s->s2, q);
      if (!q2) return std::nullopt;
      return weakest_pre(s->s1, *q2);
    }
    case Stmt::Kind::Assign: {
      if (detail::expr_has_ghost(s->expr)) return std::nullopt;
      return substitute(q, {{s->target, s->expr}});
    }
    case Stmt::Kind::FieldWrite: {
      if (detail::assert_has_ghost(q)) return std::nullopt;
      return detail::rewrite_field_assert(q, s->member, Expr::var(s->target),
                                          s->src.as_expr());
    }
    case Stmt::Kind::New: {
      // A fresh object changes no existing field and is unreachable, so any
      // postcondition not naming the target nor quantifying over the heap
      // carries across.
      if (free_vars(q).count(s->target)) return std::nullopt;
      if (detail::assert_has_quantifier(q)) return std::nullopt;
      return q;
    }
    case Stmt::Kind::If: {
      auto q1 = weakest_pre(s->s1, q);
      auto q2 = weakest_pre(s->s2, q);
      if (!q1 || !q2) return std::nullopt;
      AssertPtr c = Assertion::expr(s->expr);
      return Assertion::conj(Assertion::implies(c, *q1),
                             Assertion::implies(Assertion::negate(c), *q2));
    }
    case Stmt::Kind::Call:
      return std::nullopt;
  }
  return std::nullopt;
}

inline bool stmt_call_free(const StmtPtr& s) { return !detail::stmt_has_call(s); }

}  // namespace loo
