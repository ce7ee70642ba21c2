// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "loo/eval.hpp"

namespace loo {

enum class StepKind { Same, CallEnter, Return };

inline const char* show(StepKind k) {
  switch (k) {
    case StepKind::Same: return "same";
    case StepKind::CallEnter: return "call";
    case StepKind::Return: return "return";
  }
  return "?";
}

enum class StuckReason {
  PrivacyFieldAccess,
  PrivateCallAcrossModules,
  AssignToFormal,
  NullDeref,
  UnknownMethod,
  NoRes,
  UnknownField,
  UnknownClass,
  UnboundVar,
  TypeMismatch,
  Malformed,
};

inline const char* show(StuckReason r) {
  switch (r) {
    case StuckReason::PrivacyFieldAccess: return "PrivacyFieldAccess";
    case StuckReason::PrivateCallAcrossModules: return "PrivateCallAcrossModules";
    case StuckReason::AssignToFormal: return "AssignToFormal";
    case StuckReason::NullDeref: return "NullDeref";
    case StuckReason::UnknownMethod: return "UnknownMethod";
    case StuckReason::NoRes: return "NoRes";
    case StuckReason::UnknownField: return "UnknownField";
    case StuckReason::UnknownClass: return "UnknownClass";
    case StuckReason::UnboundVar: return "UnboundVar";
    case StuckReason::TypeMismatch: return "TypeMismatch";
    case StuckReason::Malformed: return "Malformed";
  }
  return "?";
}

struct StepResult {
  enum class Status { Next, Finished, Stuck };
  Status status = Status::Finished;
  State next;
  StepKind kind = StepKind::Same;
  StuckReason reason = StuckReason::Malformed;
  std::string message;

  static StepResult stepped(State s, StepKind k) {
    StepResult r;
    r.status = Status::Next;
    r.next = std::move(s);
    r.kind = k;
    return r;
  }
  static StepResult finished() { return StepResult{}; }
  static StepResult stuck(StuckReason why, std::string msg) {
    StepResult r;
    r.status = Status::Stuck;
    r.reason = why;
    r.message = std::move(msg);
    return r;
  }
  bool is_next() const { return status == Status::Next; }
  bool is_finished() const { return status == Status::Finished; }
  bool is_stuck() const { return status == Status::Stuck; }
};

namespace detail {

inline bool is_formal_of_active(const LinkedProgram& prog, const State& s,
                                const std::string& x) {
  if (x == "this") return true;
  const MethodDef* m = active_method(prog, s, s.depth());
  if (!m) return false;
  for (auto& p : m->params)
    if (p.name == x) return true;
  return false;
}

inline StepResult map_eval_error(const EvalResult& r) {
  switch (r.status) {
    case EvalResult::Status::Unbound:
      return StepResult::stuck(StuckReason::UnboundVar, r.message);
    case EvalResult::Status::Diverged:
      return StepResult::stuck(StuckReason::Malformed, r.message);
    default:
      break;
  }
  const std::string& m = r.message;
  if (m.find("privacy") != std::string::npos)
    return StepResult::stuck(StuckReason::PrivacyFieldAccess, m);
  if (m.find("null dereference") != std::string::npos)
    return StepResult::stuck(StuckReason::NullDeref, m);
  if (m.find("no field") != std::string::npos)
    return StepResult::stuck(StuckReason::UnknownField, m);
  return StepResult::stuck(StuckReason::TypeMismatch, m);
}

inline bool value_matches_type(const LinkedProgram& prog, const State& s,
                               const Value& v, const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int: return v.is_int();
    case Type::Kind::Nat: return v.is_int() && v.as_int() >= 0;
    case Type::Kind::Bool: return v.is_bool();
    case Type::Kind::Str: return v.is_str();
    case Type::Kind::External: {
      if (v.is_null()) return true;
      if (!v.is_address()) return false;
      auto c = class_of(s, v);
      return c && !prog.is_internal_class(*c);
    }
    case Type::Kind::Class: {
      if (v.is_null()) return true;
      if (!v.is_address()) return false;
      auto c = class_of(s, v);
      return c && *c == t.cls;
    }
  }
  return false;
}

inline Value default_field_value(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int:
    case Type::Kind::Nat: return Value::integer(0);
    case Type::Kind::Bool: return Value::boolean(false);
    case Type::Kind::Str: return Value::str("");
    default: return Value::null();
  }
}

}  // namespace detail

// Fig 2 small-step semantics over the linked program. Deterministic: at most
// one successor. Stuck is an outcome, not an exception.
inline StepResult small_step(const LinkedProgram& prog, const State& s) {
  using detail::map_eval_error;
  const Frame& top = s.top();

  if (top.cont.empty()) {
    if (s.depth() == 1) return StepResult::finished();
    // Return: pop, write res into the caller's call target.
    const Frame& caller = s.stack[s.depth() - 2];
    if (caller.cont.empty() || caller.cont.head()->kind != Stmt::Kind::Call)
      return StepResult::stuck(StuckReason::Malformed,
                               "caller continuation is not a call");
    const Value* res = top.lookup("res");
    if (!res)
      return StepResult::stuck(StuckReason::NoRes,
                               "method returned without assigning res");
    State nxt = s;
    nxt.stack.pop_back();
    Frame& cf = nxt.top();
    cf.vars[caller.cont.head()->target] = *res;
    cf.cont = cf.cont.tail();
    return StepResult::stepped(std::move(nxt), StepKind::Return);
  }

  const StmtPtr& st = top.cont.head();
  const Value* self = top.lookup("this");
  if (!self || !self->is_address())
    return StepResult::stuck(StuckReason::UnboundVar, "this is not bound");
  auto this_class = class_of(s, *self);
  if (!this_class)
    return StepResult::stuck(StuckReason::Malformed, "this is dangling");

  auto assign_check = [&](const std::string& x) -> std::optional<StepResult> {
    if (x == "this" || detail::is_formal_of_active(prog, s, x))
      return StepResult::stuck(StuckReason::AssignToFormal,
                               "assignment to formal '" + x + "'");
    return std::nullopt;
  };

  switch (st->kind) {
    case Stmt::Kind::Skip: {
      State nxt = s;
      nxt.top().cont = nxt.top().cont.tail();
      return StepResult::stepped(std::move(nxt), StepKind::Same);
    }
    case Stmt::Kind::Assign: {
      if (auto bad = assign_check(st->target)) return *bad;
      EvalResult r = eval_stmt_expr(prog, s, *this_class, st->expr);
      if (!r.is_ok()) return map_eval_error(r);
      State nxt = s;
      nxt.top().vars[st->target] = r.value;
      nxt.top().cont = nxt.top().cont.tail();
      return StepResult::stepped(std::move(nxt), StepKind::Same);
    }
    case Stmt::Kind::FieldWrite: {
      const Value* recv = top.lookup(st->target);
      if (!recv)
        return StepResult::stuck(StuckReason::UnboundVar,
                                 "unbound '" + st->target + "'");
      if (recv->is_null())
        return StepResult::stuck(StuckReason::NullDeref,
                                 "field write on null");
      if (!recv->is_address())
        return StepResult::stuck(StuckReason::TypeMismatch,
                                 "field write on scalar");
      const Object* o = s.object(recv->addr());
      if (!o) return StepResult::stuck(StuckReason::Malformed, "dangling");
      if (!prog.same_module_classes(*this_class, o->cls))
        return StepResult::stuck(
            StuckReason::PrivacyFieldAccess,
            "write to field of " + o->cls + " from module of " + *this_class);
      if (!o->field(st->member))
        return StepResult::stuck(StuckReason::UnknownField,
                                 o->cls + " has no field " + st->member);
      Outcome<Value> v = atom_value(s, st->src);
      if (!v)
        return StepResult::stuck(StuckReason::UnboundVar, v.error());
      State nxt = s;
      nxt.object(recv->addr())->set_field(st->member, *v);
      nxt.top().cont = nxt.top().cont.tail();
      return StepResult::stepped(std::move(nxt), StepKind::Same);
    }
    case Stmt::Kind::New: {
      if (auto bad = assign_check(st->target)) return *bad;
      const ClassDef* cd = prog.klass(st->cls);
      if (!cd)
        return StepResult::stuck(StuckReason::UnknownClass,
                                 "unknown class " + st->cls);
      Object o;
      o.cls = st->cls;
      for (auto& f : cd->fields)
        o.fields.emplace_back(f.name, detail::default_field_value(f.type));
      State nxt = s;
      Addr a = nxt.alloc(std::move(o));
      nxt.top().vars[st->target] = Value::address(a);
      nxt.top().cont = nxt.top().cont.tail();
      return StepResult::stepped(std::move(nxt), StepKind::Same);
    }
    case Stmt::Kind::Call: {
      if (auto bad = assign_check(st->target)) return *bad;
      const Value* recv = top.lookup(st->recv);
      if (!recv)
        return StepResult::stuck(StuckReason::UnboundVar,
                                 "unbound receiver '" + st->recv + "'");
      if (recv->is_null())
        return StepResult::stuck(StuckReason::NullDeref, "call on null");
      if (!recv->is_address())
        return StepResult::stuck(StuckReason::TypeMismatch, "call on scalar");
      auto rc = class_of(s, *recv);
      if (!rc) return StepResult::stuck(StuckReason::Malformed, "dangling");
      const MethodDef* m = prog.lookup_method(*rc, st->member);
      if (!m || m->params.size() != st->args.size())
        return StepResult::stuck(
            StuckReason::UnknownMethod,
            *rc + " has no method " + st->member + "/" +
                std::to_string(st->args.size()));
      if (m->privacy == Privacy::Private &&
          !prog.same_module_classes(*this_class, *rc))
        return StepResult::stuck(StuckReason::PrivateCallAcrossModules,
                                 "private " + *rc + "::" + st->member);
      Frame callee;
      callee.vars["this"] = *recv;
      for (size_t i = 0; i < st->args.size(); ++i) {
        Outcome<Value> v = atom_value(s, st->args[i]);
        if (!v) return StepResult::stuck(StuckReason::UnboundVar, v.error());
        if (!detail::value_matches_type(prog, s, *v, m->params[i].type))
          return StepResult::stuck(
              StuckReason::TypeMismatch,
              "argument " + m->params[i].name + " of " + *rc +
                  "::" + st->member + " expects " + m->params[i].type.show());
        callee.vars[m->params[i].name] = *v;
      }
      for (auto& l : m->locals) callee.vars[l] = Value::null();
      callee.cont = Cont::of(m->body);
      State nxt = s;
      nxt.stack.push_back(std::move(callee));
      return StepResult::stepped(std::move(nxt), StepKind::CallEnter);
    }
    case Stmt::Kind::If: {
      EvalResult c = eval_stmt_expr(prog, s, *this_class, st->expr);
      if (!c.is_ok()) return map_eval_error(c);
      if (!c.value.is_bool())
        return StepResult::stuck(StuckReason::TypeMismatch,
                                 "if condition is not boolean");
      State nxt = s;
      Cont& cont = nxt.top().cont;
      std::vector<StmtPtr> rest(cont.items.begin() + 1, cont.items.end());
      std::vector<StmtPtr> branch = flatten(c.value.as_bool() ? st->s1 : st->s2);
      branch.insert(branch.end(), rest.begin(), rest.end());
      cont.items = std::move(branch);
      return StepResult::stepped(std::move(nxt), StepKind::Same);
    }
    case Stmt::Kind::Seq:
      return StepResult::stuck(StuckReason::Malformed,
                               "unflattened seq in continuation");
  }
  return StepResult::stuck(StuckReason::Malformed, "bad statement");
}

}  // namespace loo
