// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <string>

#include "loo/ast.hpp"

namespace loo {

std::string show_expr(const ExprPtr& e);

inline std::string show_expr(const ExprPtr& e) {
  if (!e) return "<null-expr>";
  switch (e->kind) {
    case Expr::Kind::Var: return e->name;
    case Expr::Kind::Lit: return e->litval.show();
    case Expr::Kind::Field: return show_expr(e->a) + "." + e->name;
    case Expr::Kind::Ghost: {
      std::string s = show_expr(e->a) + "." + e->name + "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) s += ", ";
        s += show_expr(e->args[i]);
      }
      return s + ")";
    }
    case Expr::Kind::Binary: {
      auto paren = [](const ExprPtr& x) {
        std::string s = show_expr(x);
        if (x->kind == Expr::Kind::Binary || x->kind == Expr::Kind::Cond)
          return "(" + s + ")";
        return s;
      };
      return paren(e->a) + " " + show(e->op) + " " + paren(e->b);
    }
    case Expr::Kind::Cond:
      return "if " + show_expr(e->a) + " then " + show_expr(e->b) + " else " +
             show_expr(e->c);
  }
  return "?";
}

namespace detail {

inline void print_stmt(std::ostringstream& os, const StmtPtr& s,
                       const std::string& ind);

inline void print_stmts(std::ostringstream& os, const StmtPtr& s,
                        const std::string& ind) {
  auto items = flatten(s);
  if (items.empty()) {
    os << ind << "skip\n";
    return;
  }
  for (size_t i = 0; i < items.size(); ++i) {
    print_stmt(os, items[i], ind);
    os.seekp(-1, std::ios_base::end);
    os << (i + 1 < items.size() ? ";\n" : "\n");
  }
}

inline void print_stmt(std::ostringstream& os, const StmtPtr& s,
                       const std::string& ind) {
  switch (s->kind) {
    case Stmt::Kind::Assign:
      os << ind << s->target << " := " << show_expr(s->expr) << "\n";
      break;
    case Stmt::Kind::FieldWrite:
      os << ind << s->target << "." << s->member << " := " << s->src.show()
         << "\n";
      break;
    case Stmt::Kind::Call: {
      os << ind << s->target << " := " << s->recv << "." << s->member << "(";
      for (size_t i = 0; i < s->args.size(); ++i) {
        if (i) os << ", ";
        os << s->args[i].show();
      }
      os << ")\n";
      break;
    }
    case Stmt::Kind::New:
      os << ind << s->target << " := new " << s->cls << "\n";
      break;
    case Stmt::Kind::If: {
      os << ind << "if (" << show_expr(s->expr) << ") {\n";
      print_stmts(os, s->s1, ind + "  ");
      os << ind << "} else {\n";
      print_stmts(os, s->s2, ind + "  ");
      os << ind << "}\n";
      break;
    }
    case Stmt::Kind::Skip:
      os << ind << "skip\n";
      break;
    case Stmt::Kind::Seq: {
      print_stmts(os, s, ind);
      break;
    }
  }
}

}  // namespace detail

inline std::string show_stmt_inline(const StmtPtr& s) {
  std::ostringstream os;
  detail::print_stmts(os, s, "");
  std::string out = os.str();
  for (auto& c : out)
    if (c == '\n') c = ' ';
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::string show_params(const std::vector<Param>& ps) {
  std::string s;
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ", ";
    s += ps[i].name + ": " + ps[i].type.show();
  }
  return s;
}

inline std::string show_module(const ModuleDef& m) {
  std::ostringstream os;
  os << "module " << m.name << " {\n";
  for (auto& [cname, c] : m.classes) {
    os << "  class " << cname << " {\n";
    for (auto& f : c.fields)
      os << "    field " << f.name << ": " << f.type.show() << ";\n";
    for (auto& g : c.ghosts)
      os << "    ghost " << g.name << "(" << show_params(g.params)
         << "): " << g.ret.show() << " = " << show_expr(g.body) << ";\n";
    for (auto& md : c.methods) {
      os << "    " << (md.privacy == Privacy::Public ? "public" : "private")
         << " method " << md.name << "(" << show_params(md.params)
         << "): " << md.ret.show() << " {\n";
      detail::print_stmts(os, md.body, "      ");
      os << "    }\n";
    }
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace loo
