// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "loo/assert_ast.hpp"
#include "loo/program.hpp"

namespace loo {

enum class Tri { Yes, No, Unknown };

inline const char* show(Tri t) {
  switch (t) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    case Tri::Unknown: return "unknown";
  }
  return "?";
}

struct Classification {
  bool stable = false;
  bool pos = false;
  Tri enc = Tri::Unknown;
};

// ---- Stb / Stb+ (Defs B.1, B.2) ---------------------------------------------

inline bool is_stable(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Protected: return false;
    case Assertion::Kind::Not:
    case Assertion::Kind::All: return is_stable(a->a);
    case Assertion::Kind::And: return is_stable(a->a) && is_stable(a->b);
    default: return true;
  }
}

inline bool is_pos(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Not: return is_stable(a->a);
    case Assertion::Kind::All: return is_pos(a->a);
    case Assertion::Kind::And: return is_pos(a->a) && is_pos(a->b);
    default: return true;
  }
}

// ---- encapsulation (Def C.1, Fig 13) ----------------------------------------

// Typing context for the encapsulation judgment: variables and expression
// shapes given classes by `e : C` conjuncts and quantifier binders.
struct EncEnv {
  const ModuleDef* mod = nullptr;
  std::map<std::string, std::string> expr_class;  // show_expr(e) -> class name

  void bind(const ExprPtr& e, const std::string& cls) {
    expr_class[show_expr(e)] = cls;
  }
  void bind_var(const std::string& x, const std::string& cls) {
    expr_class[x] = cls;
  }
};

namespace detail {

enum class ETy { Internal, Scalar, Other, Unknown };

inline ETy type_class(const EncEnv& env, const std::string& cls) {
  if (cls == "int" || cls == "nat" || cls == "bool" || cls == "str")
    return ETy::Scalar;
  if (env.mod && env.mod->defines(cls)) return ETy::Internal;
  return ETy::Other;
}

inline ETy etype(const EncEnv& env, const ExprPtr& e,
                 std::string* cls_out = nullptr) {
  auto it = env.expr_class.find(show_expr(e));
  if (it != env.expr_class.end()) {
    if (cls_out) *cls_out = it->second;
    return type_class(env, it->second);
  }
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e->litval.is_scalar() ? ETy::Scalar : ETy::Unknown;
    case Expr::Kind::Binary:
      return ETy::Scalar;
    case Expr::Kind::Field: {
      std::string rc;
      if (etype(env, e->a, &rc) == ETy::Internal) {
        const ClassDef* cd = env.mod->klass(rc);
        const FieldDef* fd = cd ? cd->field(e->name) : nullptr;
        if (fd) {
          if (fd->type.is_scalar()) return ETy::Scalar;
          if (fd->type.is_class()) {
            if (cls_out) *cls_out = fd->type.cls;
            return type_class(env, fd->type.cls);
          }
          return ETy::Other;  // external-typed field
        }
        const GhostDef* gd = cd ? cd->ghost(e->name) : nullptr;
        if (gd && gd->params.empty()) {
          if (gd->ret.is_scalar()) return ETy::Scalar;
          if (gd->ret.is_class()) {
            if (cls_out) *cls_out = gd->ret.cls;
            return type_class(env, gd->ret.cls);
          }
        }
      }
      return ETy::Unknown;
    }
    case Expr::Kind::Ghost: {
      std::string rc;
      if (etype(env, e->a, &rc) == ETy::Internal) {
        const ClassDef* cd = env.mod->klass(rc);
        const GhostDef* gd = cd ? cd->ghost(e->name) : nullptr;
        if (gd) {
          if (gd->ret.is_scalar()) return ETy::Scalar;
          if (gd->ret.is_class()) {
            if (cls_out) *cls_out = gd->ret.cls;
            return type_class(env, gd->ret.cls);
          }
        }
      }
      return ETy::Unknown;
    }
    default:
      return ETy::Unknown;
  }
}

// enc for a bare expression: every field read happens on an internal-typed
// receiver, and ghost calls resolve on internal receivers.
inline bool enc_expr(const EncEnv& env, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Lit:
      return true;
    case Expr::Kind::Field:
      return enc_expr(env, e->a) && etype(env, e->a) == ETy::Internal;
    case Expr::Kind::Ghost: {
      if (!enc_expr(env, e->a) || etype(env, e->a) != ETy::Internal)
        return false;
      for (auto& a : e->args)
        if (!enc_expr(env, a)) return false;
      return true;
    }
    case Expr::Kind::Binary:
      return enc_expr(env, e->a) && enc_expr(env, e->b);
    case Expr::Kind::Cond:
      return enc_expr(env, e->a) && enc_expr(env, e->b) && enc_expr(env, e->c);
  }
  return false;
}

inline bool contains_protected(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Protected: return true;
    case Assertion::Kind::Not:
    case Assertion::Kind::All: return contains_protected(a->a);
    case Assertion::Kind::And:
      return contains_protected(a->a) || contains_protected(a->b);
    default: return false;
  }
}

inline bool contains_protected_from(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::ProtectedFrom: return true;
    case Assertion::Kind::Not:
    case Assertion::Kind::All: return contains_protected_from(a->a);
    case Assertion::Kind::And:
      return contains_protected_from(a->a) || contains_protected_from(a->b);
    default: return false;
  }
}

inline bool protected_in_negative(const AssertPtr& a, bool neg) {
  switch (a->kind) {
    case Assertion::Kind::Protected: return neg;
    case Assertion::Kind::Not: return protected_in_negative(a->a, !neg);
    case Assertion::Kind::All: return protected_in_negative(a->a, neg);
    case Assertion::Kind::And:
      return protected_in_negative(a->a, neg) ||
             protected_in_negative(a->b, neg);
    default: return false;
  }
}

// Fig 13 judgment; Gamma threads left to right through conjunctions.
inline bool enc_judgment(EncEnv& env, const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Expr:
      return enc_expr(env, a->e);
    case Assertion::Kind::HasClass: {
      if (!enc_expr(env, a->e)) return false;
      env.bind(a->e, a->cls);  // Enc_2 extends Gamma
      return true;
    }
    case Assertion::Kind::Not:
      return !contains_protected(a->a) && enc_judgment(env, a->a);
    case Assertion::Kind::And:
      return enc_judgment(env, a->a) && enc_judgment(env, a->b);
    case Assertion::Kind::All: {
      env.bind_var(a->var, a->cls);  // Enc_5
      return enc_judgment(env, a->a);
    }
    case Assertion::Kind::External:
    case Assertion::Kind::Internal:
      return enc_expr(env, a->e);
    case Assertion::Kind::Protected:
      return enc_expr(env, a->e);  // Enc_7
    case Assertion::Kind::ProtectedFrom:
      return false;  // no rule: relative protection is not encapsulated
  }
  return false;
}

}  // namespace detail

// Three-valued encapsulation: definite No for relative protection and for
// protection in negative position; Yes when the syntactic judgment goes
// through; Unknown otherwise (the judgment is deliberately incomplete).
inline Tri is_enc(const ModuleDef& mod, const AssertPtr& a,
                  const std::map<std::string, std::string>& gamma = {}) {
  if (detail::contains_protected_from(a)) return Tri::No;
  if (detail::protected_in_negative(a, false)) return Tri::No;
  EncEnv env;
  env.mod = &mod;
  for (auto& [x, c] : gamma) env.bind_var(x, c);
  return detail::enc_judgment(env, a) ? Tri::Yes : Tri::Unknown;
}

inline Classification classify(
    const ModuleDef& mod, const AssertPtr& a,
    const std::map<std::string, std::string>& gamma = {}) {
  Classification c;
  c.stable = is_stable(a);
  c.pos = is_pos(a);
  c.enc = is_enc(mod, a, gamma);
  return c;
}

// ---- adaptation (Def 5.2) ----------------------------------------------------

// The view adaptation operator: protection becomes protection from the call's
// receiver and arguments; everything else is homomorphic.
inline AssertPtr adapt(const std::vector<ExprPtr>& ys, const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Protected: {
      std::vector<AssertPtr> parts;
      for (auto& y : ys) parts.push_back(Assertion::protected_from(a->e, y));
      return conj_all(parts);
    }
    case Assertion::Kind::Not:
      return Assertion::negate(adapt(ys, a->a));
    case Assertion::Kind::And:
      return Assertion::conj(adapt(ys, a->a), adapt(ys, a->b));
    case Assertion::Kind::All: {
      std::set<std::string> ys_fv;
      for (auto& y : ys) expr_vars(y, ys_fv);
      std::string binder = a->var;
      AssertPtr body = a->a;
      if (ys_fv.count(binder)) {
        std::string fresh = binder;
        std::set<std::string> body_fv;
        free_vars_into(body, body_fv);
        do {
          fresh += "'";
        } while (ys_fv.count(fresh) || body_fv.count(fresh));
        body = subst_one(body, binder, Expr::var(fresh));
        binder = fresh;
      }
      return Assertion::all(binder, a->cls, adapt(ys, body));
    }
    default:
      return a;
  }
}

inline std::vector<ExprPtr> atoms_to_exprs(const std::vector<Atom>& atoms) {
  std::vector<ExprPtr> out;
  for (auto& a : atoms) out.push_back(a.as_expr());
  return out;
}

}  // namespace loo
