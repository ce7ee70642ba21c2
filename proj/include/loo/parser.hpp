// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loo/ast.hpp"
#include "loo/lexer.hpp"

namespace loo {

inline bool is_reserved_type_name(const std::string& s) {
  return s == "int" || s == "nat" || s == "bool" || s == "str" ||
         s == "external";
}

inline bool is_keyword(const std::string& s) {
  return s == "module" || s == "class" || s == "field" || s == "ghost" ||
         s == "method" || s == "public" || s == "private" || s == "if" ||
         s == "else" || s == "skip" || s == "new" || s == "null" ||
         s == "true" || s == "false" || is_reserved_type_name(s);
}

namespace detail {

// Statement and statement-expression parsing, shared by method bodies and
// scenario run blocks. Owns the desugaring: +=/-=, calls without a target,
// non-atomic call arguments and field-write sources get fresh temporaries.
class StmtParser {
 public:
  explicit StmtParser(Lexer& lx) : lx_(lx) {}

  std::vector<StmtPtr> parse_stmts(const std::string& close) {
    std::vector<StmtPtr> out;
    if (lx_.eat(close)) return out;
    for (;;) {
      parse_stmt_into(out);
      if (lx_.eat(close)) break;
      lx_.expect(";");
      if (lx_.eat(close)) break;  // trailing separator
    }
    return out;
  }

  // Ghost bodies: the same expression grammar with ghost calls allowed.
  ExprPtr parse_ghost_expr() { return parse_expr(/*ghost_ok=*/true); }

 private:
  struct PendingCall {
    ExprPtr recv;
    std::string method;
    std::vector<Atom> args;
  };

  void parse_stmt_into(std::vector<StmtPtr>& out) {
    SrcPos at = lx_.pos();
    if (lx_.eat("skip")) {
      out.push_back(Stmt::skip());
      return;
    }
    if (lx_.eat("if")) {
      lx_.expect("(");
      ExprPtr cond = parse_expr(/*ghost_ok=*/false);
      lx_.expect(")");
      lx_.expect("{");
      std::vector<StmtPtr> then_s = parse_stmts("}");
      std::vector<StmtPtr> else_s;
      if (lx_.eat("else")) {
        lx_.expect("{");
        else_s = parse_stmts("}");
      }
      out.push_back(
          with_span(Stmt::iff(cond, seq_of(then_s), seq_of(else_s)), at));
      return;
    }
    std::string x = lx_.expect_ident("statement");
    if (is_keyword(x)) throw ParseError(at, "unexpected keyword '" + x + "'");

    if (lx_.eat(".")) {
      std::string f = lx_.expect_ident("member");
      if (lx_.at("(")) {
        // receiver.method(args) without a target: bind to a fresh temp
        lx_.expect("(");
        auto args = parse_args(out);
        out.push_back(with_span(Stmt::call(fresh_tmp(), x, f, args), at));
        return;
      }
      if (lx_.eat(":=")) return parse_field_write(out, x, f, at, 0);
      if (lx_.eat("+=")) return parse_field_write(out, x, f, at, +1);
      if (lx_.eat("-=")) return parse_field_write(out, x, f, at, -1);
      lx_.fail("expected ':=', '+=', '-=', or call after field access");
    }
    if (x == "this") throw ParseError(at, "cannot assign to 'this'");
    if (lx_.at("+=") || lx_.at("-=")) {
      bool minus = lx_.eat("-=");
      if (!minus) lx_.expect("+=");
      ExprPtr e = parse_expr(false);
      out.push_back(with_span(
          Stmt::assign(x, Expr::binary(minus ? BinOp::Sub : BinOp::Add,
                                       Expr::var(x), e)),
          at));
      return;
    }
    lx_.expect(":=");
    if (lx_.eat("new")) {
      std::string cls = lx_.expect_ident("class name");
      out.push_back(with_span(Stmt::make_new(x, cls), at));
      return;
    }
    // Either `x := recv.m(args)` or `x := <expr>`.
    ExprPtr e = parse_expr(/*ghost_ok=*/false, /*call_probe=*/true);
    if (pending_call_) {
      PendingCall pc = *pending_call_;
      pending_call_.reset();
      std::string recv = atomize_recv(out, pc.recv, at);
      for (auto& p : pending_prefix_) out.push_back(p);
      pending_prefix_.clear();
      out.push_back(with_span(Stmt::call(x, recv, pc.method, pc.args), at));
      return;
    }
    out.push_back(with_span(Stmt::assign(x, e), at));
  }

  void parse_field_write(std::vector<StmtPtr>& out, const std::string& x,
                         const std::string& f, SrcPos at, int compound) {
    ExprPtr e = parse_expr(false);
    if (compound != 0)
      e = Expr::binary(compound > 0 ? BinOp::Add : BinOp::Sub,
                       Expr::field(Expr::var(x), f), e);
    Atom src;
    if (e->kind == Expr::Kind::Var) {
      src = Atom::make_var(e->name);
    } else if (e->kind == Expr::Kind::Lit) {
      src = Atom::make_lit(e->litval);
    } else {
      std::string t = fresh_tmp();
      out.push_back(with_span(Stmt::assign(t, e), at));
      src = Atom::make_var(t);
    }
    out.push_back(with_span(Stmt::field_write(x, f, src), at));
  }

  std::vector<Atom> parse_args(std::vector<StmtPtr>& out) {
    std::vector<Atom> args;
    if (lx_.eat(")")) return args;
    for (;;) {
      SrcPos at = lx_.pos();
      ExprPtr e = parse_expr(false);
      if (e->kind == Expr::Kind::Var) {
        args.push_back(Atom::make_var(e->name));
      } else if (e->kind == Expr::Kind::Lit) {
        args.push_back(Atom::make_lit(e->litval));
      } else {
        std::string t = fresh_tmp();
        out.push_back(with_span(Stmt::assign(t, e), at));
        args.push_back(Atom::make_var(t));
      }
      if (lx_.eat(")")) break;
      lx_.expect(",");
    }
    return args;
  }

  std::string atomize_recv(std::vector<StmtPtr>& out, ExprPtr recv, SrcPos at) {
    if (recv->kind == Expr::Kind::Var) return recv->name;
    std::string t = fresh_tmp();
    out.push_back(with_span(Stmt::assign(t, recv), at));
    return t;
  }

  // Comparison > additive > primary. In statement position (ghost_ok=false)
  // member calls are not expressions; with call_probe set, a top-level
  // `recv.m(args)` is captured into pending_call_ instead of failing.
  ExprPtr parse_expr(bool ghost_ok, bool call_probe = false) {
    ExprPtr lhs = parse_add(ghost_ok, call_probe);
    if (pending_call_) return lhs;
    static const std::pair<const char*, BinOp> cmps[] = {
        {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (auto& [sym, op] : cmps) {
      if (lx_.at(sym)) {
        lx_.expect(sym);
        return Expr::binary(op, lhs, parse_add(ghost_ok, false));
      }
    }
    return lhs;
  }

  ExprPtr parse_add(bool ghost_ok, bool call_probe) {
    ExprPtr e = parse_primary(ghost_ok, call_probe);
    if (pending_call_) return e;
    for (;;) {
      if (lx_.eat("+")) {
        e = Expr::binary(BinOp::Add, e, parse_primary(ghost_ok, false));
      } else if (lx_.eat("-")) {
        e = Expr::binary(BinOp::Sub, e, parse_primary(ghost_ok, false));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary(bool ghost_ok, bool call_probe) {
    SrcPos at = lx_.pos();
    if (lx_.eat("(")) {
      ExprPtr e = parse_expr(ghost_ok, false);
      lx_.expect(")");
      return parse_path(e, ghost_ok, call_probe);
    }
    if (lx_.eat("null")) return Expr::lit(Value::null());
    if (lx_.eat("true")) return Expr::lit(Value::boolean(true));
    if (lx_.eat("false")) return Expr::lit(Value::boolean(false));
    if (lx_.peek().kind == Token::Kind::Int)
      return Expr::lit(Value::integer(lx_.take().ival));
    if (lx_.peek().kind == Token::Kind::Str)
      return Expr::lit(Value::str(lx_.take().sval));
    if (lx_.eat("@")) {
      if (lx_.peek().kind != Token::Kind::Int) lx_.fail("address literal");
      return parse_path(
          Expr::lit(Value::address(static_cast<Addr>(lx_.take().ival))),
          ghost_ok, false);
    }
    if (lx_.eat("if")) {  // conditional expression, used in ghost bodies
      ExprPtr t = parse_expr(ghost_ok, false);
      lx_.expect("then");
      ExprPtr a = parse_expr(ghost_ok, false);
      lx_.expect("else");
      ExprPtr b = parse_expr(ghost_ok, false);
      return Expr::cond(t, a, b);
    }
    std::string name = lx_.expect_ident("expression");
    if (is_keyword(name))
      throw ParseError(at, "unexpected keyword '" + name + "'");
    return parse_path(Expr::var(name), ghost_ok, call_probe);
  }

  ExprPtr parse_path(ExprPtr e, bool ghost_ok, bool call_probe) {
    while (lx_.eat(".")) {
      std::string member = lx_.expect_ident("member");
      if (lx_.at("(")) {
        lx_.expect("(");
        if (ghost_ok) {
          std::vector<ExprPtr> args;
          if (!lx_.eat(")")) {
            for (;;) {
              args.push_back(parse_expr(true, false));
              if (lx_.eat(")")) break;
              lx_.expect(",");
            }
          }
          e = Expr::ghost(e, member, std::move(args));
          continue;
        }
        if (!call_probe) lx_.fail("method call not allowed in this expression");
        PendingCall pc;
        pc.recv = e;
        pc.method = member;
        std::vector<StmtPtr> pre;
        pc.args = parse_args(pre);
        if (!pre.empty()) pending_prefix_ = std::move(pre);
        pending_call_ = std::move(pc);
        return e;
      }
      e = Expr::field(e, member);
    }
    return e;
  }

  StmtPtr with_span(StmtPtr s, SrcPos at) {
    auto copy = std::make_shared<Stmt>(*s);
    copy->span.begin = at;
    return copy;
  }

  std::string fresh_tmp() { return "tmp$" + std::to_string(++tmp_counter_); }

  Lexer& lx_;
  int tmp_counter_ = 0;
  std::optional<PendingCall> pending_call_;
  std::vector<StmtPtr> pending_prefix_;
};

inline void collect_assign_targets(const StmtPtr& s,
                                   std::set<std::string>& out) {
  if (!s) return;
  switch (s->kind) {
    case Stmt::Kind::Assign:
    case Stmt::Kind::Call:
    case Stmt::Kind::New:
      out.insert(s->target);
      break;
    case Stmt::Kind::Seq:
    case Stmt::Kind::If:
      collect_assign_targets(s->s1, out);
      collect_assign_targets(s->s2, out);
      break;
    default:
      break;
  }
}

class ModuleParser {
 public:
  explicit ModuleParser(const std::string& src) : lx_(src) {}

  ModuleDef parse() {
    lx_.expect("module");
    ModuleDef m;
    m.name = lx_.expect_ident("module name");
    lx_.expect("{");
    while (!lx_.eat("}")) {
      ClassDef c = parse_class();
      if (m.classes.count(c.name))
        throw ParseError(c.span.begin, "duplicate class '" + c.name + "'");
      m.classes.emplace(c.name, std::move(c));
    }
    if (!lx_.at_end()) lx_.fail("trailing input after module");
    return m;
  }

 private:
  ClassDef parse_class() {
    SrcPos at = lx_.pos();
    lx_.expect("class");
    ClassDef c;
    c.span.begin = at;
    c.name = lx_.expect_ident("class name");
    if (is_keyword(c.name))
      throw ParseError(at, "reserved word used as class name");
    lx_.expect("{");
    while (!lx_.eat("}")) {
      if (lx_.at("field")) {
        parse_field(c);
      } else if (lx_.at("ghost")) {
        parse_ghost(c);
      } else if (lx_.at("public") || lx_.at("private")) {
        parse_method(c);
      } else {
        lx_.fail("expected field, ghost, or method");
      }
    }
    return c;
  }

  void check_member_unique(const ClassDef& c, const std::string& n, SrcPos at) {
    if (c.field(n) || c.ghost(n) || c.method(n))
      throw ParseError(at, "duplicate member '" + n + "' in class " + c.name);
  }

  void parse_field(ClassDef& c) {
    SrcPos at = lx_.pos();
    lx_.expect("field");
    FieldDef f;
    f.span.begin = at;
    f.name = lx_.expect_ident("field name");
    check_member_unique(c, f.name, at);
    lx_.expect(":");
    f.type = parse_type();
    lx_.expect(";");
    c.fields.push_back(std::move(f));
  }

  void parse_ghost(ClassDef& c) {
    SrcPos at = lx_.pos();
    lx_.expect("ghost");
    GhostDef g;
    g.span.begin = at;
    g.name = lx_.expect_ident("ghost name");
    check_member_unique(c, g.name, at);
    lx_.expect("(");
    g.params = parse_params();
    lx_.expect(":");
    g.ret = parse_type();
    lx_.expect("=");
    StmtParser sp(lx_);
    g.body = sp.parse_ghost_expr();
    lx_.expect(";");
    c.ghosts.push_back(std::move(g));
  }

  void parse_method(ClassDef& c) {
    SrcPos at = lx_.pos();
    MethodDef m;
    m.span.begin = at;
    m.privacy = lx_.eat("public") ? Privacy::Public
                                  : (lx_.expect("private"), Privacy::Private);
    lx_.expect("method");
    m.name = lx_.expect_ident("method name");
    check_member_unique(c, m.name, at);
    lx_.expect("(");
    m.params = parse_params();
    lx_.expect(":");
    m.ret = parse_type();
    lx_.expect("{");
    StmtParser sp(lx_);
    m.body = seq_of(sp.parse_stmts("}"));
    std::set<std::string> bound{"this", "res"};
    for (auto& p : m.params) bound.insert(p.name);
    std::set<std::string> targets;
    collect_assign_targets(m.body, targets);
    for (auto& t : targets)
      if (!bound.count(t)) m.locals.push_back(t);
    c.methods.push_back(std::move(m));
  }

  std::vector<Param> parse_params() {
    std::vector<Param> ps;
    if (lx_.eat(")")) return ps;
    for (;;) {
      SrcPos at = lx_.pos();
      Param p;
      p.name = lx_.expect_ident("parameter name");
      if (p.name == "this" || p.name == "res" || is_keyword(p.name))
        throw ParseError(at, "reserved word used as parameter");
      for (auto& q : ps)
        if (q.name == p.name)
          throw ParseError(at, "duplicate parameter '" + p.name + "'");
      lx_.expect(":");
      p.type = parse_type();
      ps.push_back(std::move(p));
      if (lx_.eat(")")) break;
      lx_.expect(",");
    }
    return ps;
  }

  Type parse_type() {
    std::string t = lx_.expect_ident("type");
    if (t == "int") return Type::t_int();
    if (t == "nat") return Type::t_nat();
    if (t == "bool") return Type::t_bool();
    if (t == "str") return Type::t_str();
    if (t == "external") return Type::t_external();
    return Type::klass(t);
  }

  Lexer lx_;
};

}  // namespace detail

inline ModuleDef parse_module(const std::string& text) {
  return detail::ModuleParser(text).parse();
}

}  // namespace loo
