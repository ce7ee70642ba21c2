// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "loo/parser.hpp"
#include "loo/spec.hpp"

namespace loo {

namespace detail {

// Assertions and their embedded (ghost-capable) expressions, shared by the
// .spec and .proof readers. `define name := A;` introduces reusable pieces
// referenced as $name.
class AssertionParser {
 public:
  AssertionParser(Lexer& lx, const std::map<std::string, AssertPtr>* defs)
      : lx_(lx), defs_(defs) {}

  AssertPtr parse() { return parse_implies(); }

  ExprPtr parse_expr_full() { return parse_cmp(); }

 private:
  AssertPtr parse_implies() {
    AssertPtr a = parse_or();
    if (lx_.eat("->")) return Assertion::implies(a, parse_implies());
    return a;
  }
  AssertPtr parse_or() {
    AssertPtr a = parse_and();
    while (lx_.eat("\\/")) a = Assertion::disj(a, parse_and());
    return a;
  }
  AssertPtr parse_and() {
    AssertPtr a = parse_unary();
    while (lx_.eat("/\\")) a = Assertion::conj(a, parse_unary());
    return a;
  }

  AssertPtr parse_unary() {
    if (lx_.eat("!")) return Assertion::negate(parse_unary());
    if (lx_.eat("forall")) {
      std::string x = lx_.expect_ident("binder");
      lx_.expect(":");
      std::string c = lx_.expect_ident("class");
      lx_.expect(".");
      return Assertion::all(x, c, parse_unary());
    }
    if (lx_.eat("exists")) {
      std::string x = lx_.expect_ident("binder");
      lx_.expect(":");
      std::string c = lx_.expect_ident("class");
      lx_.expect(".");
      return Assertion::exists(x, c, parse_unary());
    }
    if (lx_.eat("external")) return Assertion::external(parse_cmp());
    if (lx_.eat("internal")) return Assertion::internal(parse_cmp());
    if (lx_.eat("protected")) return Assertion::protected_(parse_cmp());
    if (lx_.eat("$")) {
      std::string n = lx_.expect_ident("definition name");
      if (!defs_ || !defs_->count(n)) lx_.fail("unknown definition $" + n);
      return defs_->at(n);
    }
    if (lx_.at("(")) {
      lx_.expect("(");
      AssertPtr a = parse();
      lx_.expect(")");
      // A parenthesised expression may continue as a larger expression atom:
      // (b + 1) >= c parses as an expression comparison.
      if (a->kind == Assertion::Kind::Expr && at_expr_continuation())
        return finish_atom(continue_expr(a->e));
      if (a->kind == Assertion::Kind::Expr && lx_.at("protectedFrom"))
        return finish_atom(a->e);
      if (a->kind == Assertion::Kind::Expr && lx_.at(":"))
        return finish_atom(a->e);
      return a;
    }
    return finish_atom(parse_cmp());
  }

  bool at_expr_continuation() const {
    for (const char* op : {"+", "-", "==", "!=", "<", "<=", ">", ">="})
      if (lx_.at(op)) return true;
    return false;
  }

  ExprPtr continue_expr(ExprPtr lhs) {
    while (lx_.at("+") || lx_.at("-")) {
      bool plus = lx_.eat("+");
      if (!plus) lx_.expect("-");
      lhs = Expr::binary(plus ? BinOp::Add : BinOp::Sub, lhs, parse_primary());
    }
    static const std::pair<const char*, BinOp> cmps[] = {
        {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (auto& [sym, op] : cmps)
      if (lx_.eat(sym)) return Expr::binary(op, lhs, parse_add());
    return lhs;
  }

  AssertPtr finish_atom(ExprPtr e) {
    if (lx_.eat(":")) {
      std::string c = lx_.expect_ident("class");
      return Assertion::has_class(e, c);
    }
    if (lx_.eat("protectedFrom"))
      return Assertion::protected_from(e, parse_cmp());
    return Assertion::expr(e);
  }

  // expression grammar: comparison > additive > primary-with-path
  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    static const std::pair<const char*, BinOp> cmps[] = {
        {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (auto& [sym, op] : cmps)
      if (lx_.eat(sym)) return Expr::binary(op, lhs, parse_add());
    return lhs;
  }
  ExprPtr parse_add() {
    ExprPtr e = parse_primary();
    for (;;) {
      if (lx_.eat("+"))
        e = Expr::binary(BinOp::Add, e, parse_primary());
      else if (lx_.eat("-"))
        e = Expr::binary(BinOp::Sub, e, parse_primary());
      else
        return e;
    }
  }
  ExprPtr parse_primary() {
    if (lx_.eat("(")) {
      ExprPtr e = parse_cmp();
      lx_.expect(")");
      return parse_path(e);
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
          Expr::lit(Value::address(static_cast<Addr>(lx_.take().ival))));
    }
    if (lx_.eat("if")) {
      ExprPtr t = parse_cmp();
      lx_.expect("then");
      ExprPtr a = parse_cmp();
      lx_.expect("else");
      ExprPtr b = parse_cmp();
      return Expr::cond(t, a, b);
    }
    std::string n = lx_.expect_ident("expression");
    return parse_path(Expr::var(n));
  }
  ExprPtr parse_path(ExprPtr e) {
    while (lx_.eat(".")) {
      std::string member = lx_.expect_ident("member");
      if (lx_.eat("(")) {
        std::vector<ExprPtr> args;
        if (!lx_.eat(")")) {
          for (;;) {
            args.push_back(parse_cmp());
            if (lx_.eat(")")) break;
            lx_.expect(",");
          }
        }
        e = Expr::ghost(e, member, std::move(args));
      } else {
        e = Expr::field(e, member);
      }
    }
    return e;
  }

  Lexer& lx_;
  const std::map<std::string, AssertPtr>* defs_;
};

inline std::vector<Param> parse_binders(Lexer& lx) {
  std::vector<Param> ps;
  lx.expect("(");
  if (lx.eat(")")) return ps;
  for (;;) {
    Param p;
    p.name = lx.expect_ident("binder");
    lx.expect(":");
    std::string t = lx.expect_ident("type");
    if (t == "int") p.type = Type::t_int();
    else if (t == "nat") p.type = Type::t_nat();
    else if (t == "bool") p.type = Type::t_bool();
    else if (t == "str") p.type = Type::t_str();
    else if (t == "external") p.type = Type::t_external();
    else p.type = Type::klass(t);
    ps.push_back(std::move(p));
    if (lx.eat(")")) break;
    lx.expect(",");
  }
  return ps;
}

}  // namespace detail

inline AssertPtr parse_assertion(const std::string& text) {
  Lexer lx(text);
  detail::AssertionParser ap(lx, nullptr);
  AssertPtr a = ap.parse();
  if (!lx.at_end()) lx.fail("trailing input after assertion");
  return a;
}

// .spec files: named invariants and method specifications plus `define`s.
inline Spec parse_spec(const std::string& text) {
  Lexer lx(text);
  std::map<std::string, AssertPtr> defs;
  Spec spec;
  while (!lx.at_end()) {
    if (lx.eat("define")) {
      std::string n = lx.expect_ident("definition name");
      lx.expect(":=");
      detail::AssertionParser ap(lx, &defs);
      defs[n] = ap.parse();
      lx.expect(";");
      continue;
    }
    if (lx.eat("invariant")) {
      SpecConjunct c;
      c.kind = SpecConjunct::Kind::Invariant;
      c.inv.name = lx.expect_ident("invariant name");
      c.inv.binders = detail::parse_binders(lx);
      lx.expect("{");
      detail::AssertionParser ap(lx, &defs);
      c.inv.body = ap.parse();
      lx.expect("}");
      spec.conjuncts.push_back(std::move(c));
      continue;
    }
    if (lx.eat("method")) {
      SpecConjunct c;
      c.kind = SpecConjunct::Kind::Method;
      c.ms.name = lx.expect_ident("method spec name");
      c.ms.binders = detail::parse_binders(lx);
      lx.expect("{");
      lx.expect("pre");
      lx.expect(":");
      {
        detail::AssertionParser ap(lx, &defs);
        c.ms.pre = ap.parse();
      }
      lx.expect("}");
      c.ms.privacy = lx.eat("public")
                         ? Privacy::Public
                         : (lx.expect("private"), Privacy::Private);
      c.ms.cls = lx.expect_ident("class");
      lx.expect("::");
      c.ms.method = lx.expect_ident("method");
      c.ms.formals = detail::parse_binders(lx);
      lx.expect("{");
      lx.expect("post");
      lx.expect(":");
      {
        detail::AssertionParser ap(lx, &defs);
        c.ms.post = ap.parse();
      }
      if (lx.eat("mid")) {
        lx.expect(":");
        detail::AssertionParser ap(lx, &defs);
        c.ms.mid = ap.parse();
      } else {
        c.ms.mid = Assertion::truth();
      }
      lx.expect("}");
      spec.conjuncts.push_back(std::move(c));
      continue;
    }
    lx.fail("expected define, invariant, or method");
  }
  return spec;
}

}  // namespace loo
