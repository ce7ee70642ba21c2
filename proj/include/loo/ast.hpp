// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "loo/base.hpp"

namespace loo {

// Declared types. Classes carry no subtyping; `external` is a dynamic marker
// on parameters; `nat` is int with a non-negativity check at call entry.
struct Type {
  enum class Kind { Class, Int, Nat, Bool, Str, External };
  Kind kind = Kind::Class;
  std::string cls;  // for Kind::Class

  static Type klass(std::string c) { return Type{Kind::Class, std::move(c)}; }
  static Type t_int() { return Type{Kind::Int, {}}; }
  static Type t_nat() { return Type{Kind::Nat, {}}; }
  static Type t_bool() { return Type{Kind::Bool, {}}; }
  static Type t_str() { return Type{Kind::Str, {}}; }
  static Type t_external() { return Type{Kind::External, {}}; }

  bool is_class() const { return kind == Kind::Class; }
  bool is_scalar() const {
    return kind == Kind::Int || kind == Kind::Nat || kind == Kind::Bool ||
           kind == Kind::Str;
  }
  std::string show() const {
    switch (kind) {
      case Kind::Class: return cls;
      case Kind::Int: return "int";
      case Kind::Nat: return "nat";
      case Kind::Bool: return "bool";
      case Kind::Str: return "str";
      case Kind::External: return "external";
    }
    return "?";
  }
  friend bool operator==(const Type& a, const Type& b) {
    return a.kind == b.kind && a.cls == b.cls;
  }
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }
};

enum class BinOp { Add, Sub, Eq, Ne, Lt, Le, Gt, Ge };

inline const char* show(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expressions are ghost code: side-effect free, may read any field, may call
// ghost fields. Statement right-hand sides reuse this AST but the parser
// never puts ghost calls there.
struct Expr {
  enum class Kind { Var, Lit, Field, Ghost, Binary, Cond };
  Kind kind;
  std::string name;           // Var: variable; Field/Ghost: member name
  Value litval;               // Lit
  ExprPtr a, b, c;            // Field(a); Ghost recv a; Binary(a,b); Cond(a,b,c)
  std::vector<ExprPtr> args;  // Ghost arguments
  BinOp op = BinOp::Eq;
  SrcSpan span;

  static ExprPtr var(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(n);
    return e;
  }
  static ExprPtr lit(Value v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Lit;
    e->litval = std::move(v);
    return e;
  }
  static ExprPtr field(ExprPtr recv, std::string f) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Field;
    e->a = std::move(recv);
    e->name = std::move(f);
    return e;
  }
  static ExprPtr ghost(ExprPtr recv, std::string gf, std::vector<ExprPtr> as) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Ghost;
    e->a = std::move(recv);
    e->name = std::move(gf);
    e->args = std::move(as);
    return e;
  }
  static ExprPtr binary(BinOp op, ExprPtr x, ExprPtr y) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->a = std::move(x);
    e->b = std::move(y);
    return e;
  }
  static ExprPtr cond(ExprPtr t, ExprPtr then_e, ExprPtr else_e) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Cond;
    e->a = std::move(t);
    e->b = std::move(then_e);
    e->c = std::move(else_e);
    return e;
  }
};

bool expr_equal(const ExprPtr& x, const ExprPtr& y);
inline bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->name != y->name) return false;
  switch (x->kind) {
    case Expr::Kind::Var: return true;
    case Expr::Kind::Lit: return x->litval == y->litval;
    case Expr::Kind::Field: return expr_equal(x->a, y->a);
    case Expr::Kind::Ghost: {
      if (!expr_equal(x->a, y->a) || x->args.size() != y->args.size())
        return false;
      for (size_t i = 0; i < x->args.size(); ++i)
        if (!expr_equal(x->args[i], y->args[i])) return false;
      return true;
    }
    case Expr::Kind::Binary:
      return x->op == y->op && expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
    case Expr::Kind::Cond:
      return expr_equal(x->a, y->a) && expr_equal(x->b, y->b) &&
             expr_equal(x->c, y->c);
  }
  return false;
}

// Call arguments and field-write sources are atoms: a variable or a literal.
struct Atom {
  bool is_var = false;
  std::string var;
  Value val;

  static Atom make_var(std::string v) {
    Atom a;
    a.is_var = true;
    a.var = std::move(v);
    return a;
  }
  static Atom make_lit(Value v) {
    Atom a;
    a.val = std::move(v);
    return a;
  }
  ExprPtr as_expr() const {
    return is_var ? Expr::var(var) : Expr::lit(val);
  }
  friend bool operator==(const Atom& a, const Atom& b) {
    return a.is_var == b.is_var && a.var == b.var && a.val == b.val;
  }
  std::string show() const { return is_var ? var : val.show(); }
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class Kind { Assign, FieldWrite, Call, New, Seq, If, Skip };
  Kind kind;
  std::string target;       // Assign/Call/New target; FieldWrite receiver var
  std::string member;       // FieldWrite field; Call method
  ExprPtr expr;             // Assign rhs (ghost-free); If condition
  Atom src;                 // FieldWrite source
  std::string recv;         // Call receiver variable
  std::vector<Atom> args;   // Call arguments
  std::string cls;          // New class
  StmtPtr s1, s2;           // Seq; If branches
  SrcSpan span;

  static StmtPtr assign(std::string x, ExprPtr e) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::Assign;
    s->target = std::move(x);
    s->expr = std::move(e);
    return s;
  }
  static StmtPtr field_write(std::string x, std::string f, Atom y) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::FieldWrite;
    s->target = std::move(x);
    s->member = std::move(f);
    s->src = std::move(y);
    return s;
  }
  static StmtPtr call(std::string u, std::string y0, std::string m,
                      std::vector<Atom> as) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::Call;
    s->target = std::move(u);
    s->recv = std::move(y0);
    s->member = std::move(m);
    s->args = std::move(as);
    return s;
  }
  static StmtPtr make_new(std::string x, std::string c) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::New;
    s->target = std::move(x);
    s->cls = std::move(c);
    return s;
  }
  static StmtPtr seq(StmtPtr a, StmtPtr b) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::Seq;
    s->s1 = std::move(a);
    s->s2 = std::move(b);
    return s;
  }
  static StmtPtr iff(ExprPtr cond, StmtPtr t, StmtPtr e) {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::If;
    s->expr = std::move(cond);
    s->s1 = std::move(t);
    s->s2 = std::move(e);
    return s;
  }
  static StmtPtr skip() {
    auto s = std::make_shared<Stmt>();
    s->kind = Kind::Skip;
    return s;
  }
};

inline bool stmt_equal(const StmtPtr& x, const StmtPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Stmt::Kind::Assign:
      return x->target == y->target && expr_equal(x->expr, y->expr);
    case Stmt::Kind::FieldWrite:
      return x->target == y->target && x->member == y->member && x->src == y->src;
    case Stmt::Kind::Call:
      return x->target == y->target && x->recv == y->recv &&
             x->member == y->member && x->args == y->args;
    case Stmt::Kind::New:
      return x->target == y->target && x->cls == y->cls;
    case Stmt::Kind::Seq:
      return stmt_equal(x->s1, y->s1) && stmt_equal(x->s2, y->s2);
    case Stmt::Kind::If:
      return expr_equal(x->expr, y->expr) && stmt_equal(x->s1, y->s1) &&
             stmt_equal(x->s2, y->s2);
    case Stmt::Kind::Skip:
      return true;
  }
  return false;
}

// Flattens a statement tree into the list of top-level steps. Seq nodes are
// right-associated by construction; Skip disappears.
inline void flatten_into(const StmtPtr& s, std::vector<StmtPtr>& out) {
  if (!s) return;
  if (s->kind == Stmt::Kind::Seq) {
    flatten_into(s->s1, out);
    flatten_into(s->s2, out);
  } else if (s->kind != Stmt::Kind::Skip) {
    out.push_back(s);
  }
}

inline std::vector<StmtPtr> flatten(const StmtPtr& s) {
  std::vector<StmtPtr> out;
  flatten_into(s, out);
  return out;
}

inline StmtPtr seq_of(const std::vector<StmtPtr>& stmts) {
  if (stmts.empty()) return Stmt::skip();
  StmtPtr acc = stmts.back();
  for (size_t i = stmts.size() - 1; i-- > 0;) acc = Stmt::seq(stmts[i], acc);
  return acc;
}

enum class Privacy { Public, Private };

struct Param {
  std::string name;
  Type type;
};

struct MethodDef {
  Privacy privacy = Privacy::Public;
  std::string name;
  std::vector<Param> params;
  Type ret = Type::t_int();
  StmtPtr body;
  // Variables assigned in the body that are neither formals nor `this` nor
  // `res`; bound to null when the frame is pushed.
  std::vector<std::string> locals;
  SrcSpan span;
};

struct GhostDef {
  std::string name;
  std::vector<Param> params;
  Type ret = Type::t_int();
  ExprPtr body;
  SrcSpan span;
};

struct FieldDef {
  std::string name;
  Type type;
  SrcSpan span;
};

struct ClassDef {
  std::string name;
  std::vector<FieldDef> fields;  // declaration order, used by New
  std::vector<GhostDef> ghosts;
  std::vector<MethodDef> methods;
  SrcSpan span;

  const FieldDef* field(const std::string& f) const {
    for (auto& fd : fields)
      if (fd.name == f) return &fd;
    return nullptr;
  }
  const MethodDef* method(const std::string& m) const {
    for (auto& md : methods)
      if (md.name == m) return &md;
    return nullptr;
  }
  const GhostDef* ghost(const std::string& g) const {
    for (auto& gd : ghosts)
      if (gd.name == g) return &gd;
    return nullptr;
  }
};

struct ModuleDef {
  std::string name;
  std::map<std::string, ClassDef> classes;

  const ClassDef* klass(const std::string& c) const {
    auto it = classes.find(c);
    return it == classes.end() ? nullptr : &it->second;
  }
  bool defines(const std::string& c) const { return classes.count(c) > 0; }
};

}  // namespace loo
