// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loo/ast.hpp"
#include "loo/pretty.hpp"

namespace loo {

struct LinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linked program: the internal module under verification plus any number
// of external modules. Class names are globally unique across the link.
class LinkedProgram {
 public:
  LinkedProgram() = default;

  static LinkedProgram link(ModuleDef internal,
                            std::vector<ModuleDef> externals) {
    LinkedProgram p;
    p.modules_.push_back(std::move(internal));
    for (auto& m : externals) p.modules_.push_back(std::move(m));
    for (size_t i = 0; i < p.modules_.size(); ++i) {
      for (auto& [cname, cdef] : p.modules_[i].classes) {
        auto [it, fresh] = p.table_.emplace(cname, i);
        (void)it;
        if (!fresh)
          throw LinkError("link error: class '" + cname +
                          "' defined in more than one module");
      }
    }
    return p;
  }

  const ModuleDef& internal() const { return modules_.front(); }
  const std::vector<ModuleDef>& modules() const { return modules_; }
  // The adversary search swaps candidate method bodies in place.
  ModuleDef& module_mut(size_t i) { return modules_[i]; }

  const ClassDef* klass(const std::string& c) const {
    auto it = table_.find(c);
    if (it == table_.end()) return nullptr;
    return modules_[it->second].klass(c);
  }
  std::optional<size_t> module_of(const std::string& c) const {
    auto it = table_.find(c);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  bool is_internal_class(const std::string& c) const {
    auto m = module_of(c);
    return m.has_value() && *m == 0;
  }
  // Def A.6: both classes defined, and in the same module of the link.
  bool same_module_classes(const std::string& c1, const std::string& c2) const {
    auto m1 = module_of(c1), m2 = module_of(c2);
    return m1 && m2 && *m1 == *m2;
  }

  const MethodDef* lookup_method(const std::string& c,
                                 const std::string& m) const {
    const ClassDef* cd = klass(c);
    return cd ? cd->method(m) : nullptr;
  }

  Outcome<std::vector<std::string>> lookup_fields(const std::string& c) const {
    const ClassDef* cd = klass(c);
    if (!cd)
      return Outcome<std::vector<std::string>>::err("unknown class '" + c + "'");
    std::vector<std::string> fs;
    for (auto& f : cd->fields) fs.push_back(f.name);
    return fs;
  }

 private:
  std::vector<ModuleDef> modules_;  // [0] is internal
  std::map<std::string, size_t> table_;
};

inline LinkedProgram link(ModuleDef internal,
                          std::vector<ModuleDef> externals = {}) {
  return LinkedProgram::link(std::move(internal), std::move(externals));
}

// ---- intra-module well-formedness -----------------------------------------

namespace detail {

// Best-effort static typing of an expression inside one module: `this` has
// the enclosing class, params have their declared types, field chains follow
// declarations. Unknown types (external receivers etc.) come back empty.
struct LocalTyper {
  const ModuleDef& mod;
  const ClassDef& cls;
  std::map<std::string, Type> env;
  std::set<std::string> declared;

  void declare(const std::string& n) { declared.insert(n); }
  void bind(const std::string& n, Type t) {
    declared.insert(n);
    env.emplace(n, std::move(t));
  }
  bool knows(const std::string& n) const { return declared.count(n) > 0; }

  std::optional<Type> type_of(const ExprPtr& e) const {
    switch (e->kind) {
      case Expr::Kind::Var: {
        auto it = env.find(e->name);
        if (it != env.end()) return it->second;
        return std::nullopt;
      }
      case Expr::Kind::Lit:
        switch (e->litval.kind()) {
          case Value::Kind::Int: return Type::t_int();
          case Value::Kind::Bool: return Type::t_bool();
          case Value::Kind::Str: return Type::t_str();
          default: return std::nullopt;
        }
      case Expr::Kind::Field: {
        auto rt = type_of(e->a);
        if (!rt || !rt->is_class()) return std::nullopt;
        const ClassDef* rc = mod.klass(rt->cls);
        if (!rc) return std::nullopt;
        const FieldDef* fd = rc->field(e->name);
        if (!fd) return std::nullopt;
        return fd->type;
      }
      case Expr::Kind::Ghost: {
        auto rt = type_of(e->a);
        if (!rt || !rt->is_class()) return std::nullopt;
        const ClassDef* rc = mod.klass(rt->cls);
        if (!rc) return std::nullopt;
        const GhostDef* gd = rc->ghost(e->name);
        if (!gd) return std::nullopt;
        return gd->ret;
      }
      case Expr::Kind::Binary:
        switch (e->op) {
          case BinOp::Add:
          case BinOp::Sub: return Type::t_int();
          default: return Type::t_bool();
        }
      case Expr::Kind::Cond: {
        auto t1 = type_of(e->b);
        return t1 ? t1 : type_of(e->c);
      }
    }
    return std::nullopt;
  }
};

inline void wf_check_expr(const ModuleDef& mod, const LocalTyper& ty,
                          const ExprPtr& e, bool ghost_body, Diagnostics& out) {
  switch (e->kind) {
    case Expr::Kind::Var:
      if (!ty.knows(e->name))
        out.push_back({e->span, "reference to undeclared name '" + e->name +
                                    (ghost_body ? "' in ghost body" : "'")});
      return;
    case Expr::Kind::Lit:
      return;
    case Expr::Kind::Field: {
      wf_check_expr(mod, ty, e->a, ghost_body, out);
      auto rt = ty.type_of(e->a);
      if (rt && rt->is_class()) {
        const ClassDef* rc = mod.klass(rt->cls);
        if (rc && !rc->field(e->name) && !rc->ghost(e->name))
          out.push_back({e->span, "class " + rt->cls + " has no field '" +
                                      e->name + "'"});
      }
      return;
    }
    case Expr::Kind::Ghost: {
      wf_check_expr(mod, ty, e->a, ghost_body, out);
      for (auto& a : e->args) wf_check_expr(mod, ty, a, ghost_body, out);
      auto rt = ty.type_of(e->a);
      if (rt && rt->is_class()) {
        const ClassDef* rc = mod.klass(rt->cls);
        if (rc && !rc->ghost(e->name)) {
          if (rc->method(e->name))
            out.push_back({e->span, "method call '" + e->name +
                                        "' is a statement, not ghost code"});
          else if (!(e->args.empty() && rc->field(e->name)))
            out.push_back({e->span, "class " + rt->cls + " has no ghost '" +
                                        e->name + "'"});
        }
      }
      return;
    }
    case Expr::Kind::Binary:
      wf_check_expr(mod, ty, e->a, ghost_body, out);
      wf_check_expr(mod, ty, e->b, ghost_body, out);
      return;
    case Expr::Kind::Cond:
      wf_check_expr(mod, ty, e->a, ghost_body, out);
      wf_check_expr(mod, ty, e->b, ghost_body, out);
      wf_check_expr(mod, ty, e->c, ghost_body, out);
      return;
  }
}

inline void wf_check_stmt(const ModuleDef& mod, const MethodDef& md,
                          LocalTyper& ty, const std::set<std::string>& formals,
                          const StmtPtr& s, bool& assigns_res,
                          Diagnostics& out) {
  if (!s) return;
  auto check_target = [&](const std::string& x) {
    if (x == "this")
      out.push_back({s->span, "assignment to 'this'"});
    else if (formals.count(x))
      out.push_back({s->span, "assignment to formal parameter '" + x + "'"});
    if (x == "res") assigns_res = true;
  };
  switch (s->kind) {
    case Stmt::Kind::Assign:
      check_target(s->target);
      wf_check_expr(mod, ty, s->expr, false, out);
      break;
    case Stmt::Kind::FieldWrite: {
      if (!ty.knows(s->target))
        out.push_back({s->span, "undeclared receiver '" + s->target + "'"});
      auto rt = ty.type_of(Expr::var(s->target));
      if (rt && rt->is_class()) {
        const ClassDef* rc = mod.klass(rt->cls);
        if (rc && !rc->field(s->member))
          out.push_back({s->span, "class " + rt->cls + " has no field '" +
                                      s->member + "'"});
      }
      if (s->src.is_var && !ty.knows(s->src.var))
        out.push_back({s->span, "undeclared name '" + s->src.var + "'"});
      break;
    }
    case Stmt::Kind::Call: {
      check_target(s->target);
      if (!ty.knows(s->recv))
        out.push_back({s->span, "undeclared receiver '" + s->recv + "'"});
      for (auto& a : s->args)
        if (a.is_var && !ty.knows(a.var))
          out.push_back({s->span, "undeclared name '" + a.var + "'"});
      auto rt = ty.type_of(Expr::var(s->recv));
      if (rt && rt->is_class()) {
        const ClassDef* rc = mod.klass(rt->cls);
        if (rc) {
          const MethodDef* callee = rc->method(s->member);
          if (!callee)
            out.push_back({s->span, "class " + rt->cls + " has no method '" +
                                        s->member + "'"});
          else if (callee->params.size() != s->args.size())
            out.push_back({s->span, "arity mismatch calling " + rt->cls +
                                        "::" + s->member});
        }
      }
      break;
    }
    case Stmt::Kind::New:
      check_target(s->target);
      break;
    case Stmt::Kind::Seq:
      wf_check_stmt(mod, md, ty, formals, s->s1, assigns_res, out);
      wf_check_stmt(mod, md, ty, formals, s->s2, assigns_res, out);
      break;
    case Stmt::Kind::If: {
      wf_check_expr(mod, ty, s->expr, false, out);
      bool r1 = false, r2 = false;
      wf_check_stmt(mod, md, ty, formals, s->s1, r1, out);
      wf_check_stmt(mod, md, ty, formals, s->s2, r2, out);
      if (r1 && r2) assigns_res = true;
      break;
    }
    case Stmt::Kind::Skip:
      break;
  }
}

// Targets of New give locals a class; targets of Assign inherit the rhs type
// when it is known. One forward pass is enough for three-address bodies.
inline void infer_local_types(const ModuleDef& mod, LocalTyper& ty,
                              const StmtPtr& s) {
  if (!s) return;
  switch (s->kind) {
    case Stmt::Kind::New:
      ty.bind(s->target, Type::klass(s->cls));
      break;
    case Stmt::Kind::Assign: {
      auto t = ty.type_of(s->expr);
      if (t && !ty.env.count(s->target)) ty.bind(s->target, *t);
      break;
    }
    case Stmt::Kind::Call: {
      auto rt = ty.type_of(Expr::var(s->recv));
      if (rt && rt->is_class()) {
        const ClassDef* rc = mod.klass(rt->cls);
        const MethodDef* callee = rc ? rc->method(s->member) : nullptr;
        if (callee && !ty.env.count(s->target))
          ty.bind(s->target, callee->ret);
      }
      break;
    }
    case Stmt::Kind::Seq:
    case Stmt::Kind::If:
      infer_local_types(mod, ty, s->s1);
      infer_local_types(mod, ty, s->s2);
      break;
    default:
      break;
  }
}

}  // namespace detail

// Static diagnostics for a single module: no assignment to formals or this,
// declared names resolve, ghost bodies are expressions over declared names,
// every path assigns res.
inline Diagnostics wf_module_syntax(const ModuleDef& mod) {
  Diagnostics out;
  for (auto& [cname, c] : mod.classes) {
    for (auto& g : c.ghosts) {
      detail::LocalTyper ty{mod, c, {}, {}};
      ty.bind("this", Type::klass(cname));
      for (auto& p : g.params) ty.bind(p.name, p.type);
      detail::wf_check_expr(mod, ty, g.body, true, out);
    }
    for (auto& md : c.methods) {
      detail::LocalTyper ty{mod, c, {}, {}};
      ty.bind("this", Type::klass(cname));
      std::set<std::string> formals;
      for (auto& p : md.params) {
        ty.bind(p.name, p.type);
        formals.insert(p.name);
      }
      for (auto& l : md.locals) ty.declare(l);
      ty.declare("res");
      detail::infer_local_types(mod, ty, md.body);
      bool assigns_res = false;
      detail::wf_check_stmt(mod, md, ty, formals, md.body, assigns_res, out);
      if (!assigns_res)
        out.push_back({md.span, "method " + cname + "::" + md.name +
                                    " does not assign res on every path"});
    }
  }
  return out;
}

}  // namespace loo
