// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "loo/state.hpp"

namespace loo {

struct EvalResult {
  enum class Status { Ok, Diverged, Unbound, Error };
  Status status = Status::Error;
  Value value;
  std::string message;

  static EvalResult ok(Value v) {
    return EvalResult{Status::Ok, std::move(v), {}};
  }
  static EvalResult diverged() {
    return EvalResult{Status::Diverged, {}, "ghost fuel exhausted"};
  }
  static EvalResult unbound(const std::string& x) {
    return EvalResult{Status::Unbound, {}, "unbound variable '" + x + "'"};
  }
  static EvalResult error(std::string m) {
    return EvalResult{Status::Error, {}, std::move(m)};
  }
  bool is_ok() const { return status == Status::Ok; }
};

constexpr std::int64_t kDefaultGhostFuel = 10000;

namespace detail {

struct EvalCtx {
  const LinkedProgram& prog;
  const State& state;
  // Ghost bodies see only their receiver and parameters.
  const std::map<std::string, Value>* env = nullptr;
  // Machine mode: field reads must stay in this's module; no ghost calls.
  bool machine = false;
  const std::string* machine_this_class = nullptr;
  std::int64_t* fuel = nullptr;
};

inline EvalResult eval_rec(const EvalCtx& cx, const ExprPtr& e);

inline EvalResult eval_field_read(const EvalCtx& cx, const Value& recv,
                                  const std::string& f) {
  if (recv.is_null()) return EvalResult::error("null dereference at ." + f);
  if (!recv.is_address())
    return EvalResult::error("field access on scalar at ." + f);
  const Object* o = cx.state.object(recv.addr());
  if (!o) return EvalResult::error("dangling address");
  if (cx.machine) {
    if (!cx.machine_this_class ||
        !cx.prog.same_module_classes(*cx.machine_this_class, o->cls))
      return EvalResult::error("privacy: field of " + o->cls +
                               " read outside its module");
  }
  const Value* fv = o->field(f);
  if (fv) return EvalResult::ok(*fv);
  // In ghost position, e.f may name a nullary ghost field of an internal
  // class (the paper treats e.gf as shorthand for e.gf()).
  if (!cx.machine) {
    const ClassDef* cd = cx.prog.internal().klass(o->cls);
    if (cd) {
      const GhostDef* gd = cd->ghost(f);
      if (gd && gd->params.empty()) {
        EvalCtx sub = cx;
        std::map<std::string, Value> env{{"this", recv}};
        sub.env = &env;
        if (cx.fuel) {
          if (*cx.fuel <= 0) return EvalResult::diverged();
          --*cx.fuel;
        }
        return eval_rec(sub, gd->body);
      }
    }
  }
  return EvalResult::error("class " + o->cls + " has no field '" + f + "'");
}

inline EvalResult eval_rec(const EvalCtx& cx, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Var: {
      if (cx.env) {
        auto it = cx.env->find(e->name);
        if (it == cx.env->end()) return EvalResult::unbound(e->name);
        return EvalResult::ok(it->second);
      }
      const Value* v = cx.state.top().lookup(e->name);
      if (!v) return EvalResult::unbound(e->name);
      return EvalResult::ok(*v);
    }
    case Expr::Kind::Lit:
      return EvalResult::ok(e->litval);
    case Expr::Kind::Field: {
      EvalResult r = eval_rec(cx, e->a);
      if (!r.is_ok()) return r;
      return eval_field_read(cx, r.value, e->name);
    }
    case Expr::Kind::Ghost: {
      if (cx.machine) return EvalResult::error("ghost call in statement");
      EvalResult r = eval_rec(cx, e->a);
      if (!r.is_ok()) return r;
      if (!r.value.is_address())
        return EvalResult::error("ghost call on non-address");
      const Object* o = cx.state.object(r.value.addr());
      if (!o) return EvalResult::error("dangling address");
      const ClassDef* cd = cx.prog.internal().klass(o->cls);
      const GhostDef* gd = cd ? cd->ghost(e->name) : nullptr;
      if (!gd)
        return EvalResult::error("no ghost '" + e->name + "' on " + o->cls +
                                 " in the internal module");
      if (gd->params.size() != e->args.size())
        return EvalResult::error("ghost arity mismatch for " + e->name);
      std::map<std::string, Value> env{{"this", r.value}};
      for (size_t i = 0; i < e->args.size(); ++i) {
        EvalResult a = eval_rec(cx, e->args[i]);
        if (!a.is_ok()) return a;
        env[gd->params[i].name] = a.value;
      }
      if (cx.fuel) {
        if (*cx.fuel <= 0) return EvalResult::diverged();
        --*cx.fuel;
      }
      EvalCtx sub = cx;
      sub.env = &env;
      return eval_rec(sub, gd->body);
    }
    case Expr::Kind::Binary: {
      EvalResult ra = eval_rec(cx, e->a);
      if (!ra.is_ok()) return ra;
      EvalResult rb = eval_rec(cx, e->b);
      if (!rb.is_ok()) return rb;
      const Value& a = ra.value;
      const Value& b = rb.value;
      switch (e->op) {
        case BinOp::Eq: return EvalResult::ok(Value::boolean(a == b));
        case BinOp::Ne: return EvalResult::ok(Value::boolean(a != b));
        case BinOp::Add:
        case BinOp::Sub:
          if (!a.is_int() || !b.is_int())
            return EvalResult::error("arithmetic on non-integers");
          return EvalResult::ok(Value::integer(
              e->op == BinOp::Add ? a.as_int() + b.as_int()
                                  : a.as_int() - b.as_int()));
        default:
          if (!a.is_int() || !b.is_int())
            return EvalResult::error("comparison on non-integers");
          switch (e->op) {
            case BinOp::Lt: return EvalResult::ok(Value::boolean(a.as_int() < b.as_int()));
            case BinOp::Le: return EvalResult::ok(Value::boolean(a.as_int() <= b.as_int()));
            case BinOp::Gt: return EvalResult::ok(Value::boolean(a.as_int() > b.as_int()));
            case BinOp::Ge: return EvalResult::ok(Value::boolean(a.as_int() >= b.as_int()));
            default: return EvalResult::error("bad operator");
          }
      }
    }
    case Expr::Kind::Cond: {
      EvalResult t = eval_rec(cx, e->a);
      if (!t.is_ok()) return t;
      if (!t.value.is_bool())
        return EvalResult::error("conditional test is not boolean");
      return eval_rec(cx, t.value.as_bool() ? e->b : e->c);
    }
  }
  return EvalResult::error("bad expression");
}

}  // namespace detail

// Fig 12 evaluation: ghost lookups go through the internal module only;
// field reads are unrestricted. Fuel bounds ghost unfoldings.
inline EvalResult eval_expr(const LinkedProgram& prog, const State& s,
                            const ExprPtr& e,
                            std::int64_t fuel = kDefaultGhostFuel) {
  detail::EvalCtx cx{prog, s, nullptr, false, nullptr, &fuel};
  return detail::eval_rec(cx, e);
}

// Statement-position evaluation: privacy-checked field reads, no ghosts.
inline EvalResult eval_stmt_expr(const LinkedProgram& prog, const State& s,
                                 const std::string& this_class,
                                 const ExprPtr& e) {
  detail::EvalCtx cx{prog, s, nullptr, true, &this_class, nullptr};
  return detail::eval_rec(cx, e);
}

}  // namespace loo
