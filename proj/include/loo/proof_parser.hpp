// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "loo/hoare.hpp"
#include "loo/spec_parser.hpp"

namespace loo {

// .proof scripts:
//
//   bundle name {
//     module "path.loo";
//     spec "path.spec";
//     define A1 := <assertion>;
//     assume keyFacts: <A> -> <B>;
//     derive n1: embed_ul() |- { A } { stmts } { A' };
//     derive n2: prot_1(n1; z) |- { A } body(C::m)[1..3] { A' };
//     derive n3: call_ext_adapt(S2; a -> acc) |- { A } { call } { A' } || { A'' };
//     open ERR_2 |- { A } { stmt } { A' } || { A'' };
//     invariant S2 { Shop::buy: n9; Account::set: n15; }
//     methodspec S2a: n20;
//   }

// The module and spec paths referenced by a bundle, read before full parsing.
inline std::pair<std::string, std::string> scan_proof_paths(
    const std::string& text) {
  Lexer lx(text);
  std::string mod_path, spec_path;
  while (!lx.at_end()) {
    Token t = lx.take();
    if (t.kind == Token::Kind::Ident && t.text == "module" &&
        lx.peek().kind == Token::Kind::Str)
      mod_path = lx.take().sval;
    else if (t.kind == Token::Kind::Ident && t.text == "spec" &&
             lx.peek().kind == Token::Kind::Str)
      spec_path = lx.take().sval;
  }
  return {mod_path, spec_path};
}

namespace detail {

class ProofParser {
 public:
  ProofParser(const std::string& text, const ModuleDef& mod)
      : lx_(text), mod_(mod) {}

  ProofBundle parse() {
    ProofBundle b;
    lx_.expect("bundle");
    b.name = lx_.expect_ident("bundle name");
    lx_.expect("{");
    while (!lx_.eat("}")) {
      if (lx_.eat("module")) {
        if (lx_.peek().kind != Token::Kind::Str) lx_.fail("module path string");
        b.module_path = lx_.take().sval;
        lx_.expect(";");
      } else if (lx_.eat("spec")) {
        if (lx_.peek().kind != Token::Kind::Str) lx_.fail("spec path string");
        b.spec_path = lx_.take().sval;
        lx_.expect(";");
      } else if (lx_.eat("define")) {
        std::string n = lx_.expect_ident("definition name");
        lx_.expect(":=");
        AssertionParser ap(lx_, &defs_);
        defs_[n] = ap.parse();
        lx_.expect(";");
      } else if (lx_.eat("assume")) {
        Assumption as;
        as.name = lx_.expect_ident("assumption name");
        lx_.expect(":");
        AssertionParser ap(lx_, &defs_);
        AssertPtr whole = ap.parse();
        // written A -> B, i.e. !(A /\ !B): recover the two sides
        if (whole->kind == Assertion::Kind::Not &&
            whole->a->kind == Assertion::Kind::And &&
            whole->a->b->kind == Assertion::Kind::Not) {
          as.lhs = whole->a->a;
          as.rhs = whole->a->b->a;
        } else {
          as.lhs = Assertion::truth();
          as.rhs = whole;
        }
        lx_.expect(";");
        b.assumptions.push_back(std::move(as));
      } else if (lx_.eat("derive")) {
        b.nodes.push_back(parse_derive());
      } else if (lx_.eat("open")) {
        ProofNode n;
        n.rule = "open";
        n.name = lx_.expect_ident("obligation name");
        lx_.expect("|-");
        parse_conclusion(n);
        lx_.expect(";");
        b.nodes.push_back(std::move(n));
      } else if (lx_.eat("invariant")) {
        ProofBundle::InvariantSection sec;
        sec.spec_name = lx_.expect_ident("invariant name");
        lx_.expect("{");
        while (!lx_.eat("}")) {
          std::string cls = lx_.expect_ident("class");
          lx_.expect("::");
          std::string m = lx_.expect_ident("method");
          lx_.expect(":");
          std::string proof = lx_.expect_ident("proof node");
          lx_.expect(";");
          sec.method_proofs.emplace_back(cls + "::" + m, proof);
        }
        b.invariants.push_back(std::move(sec));
      } else if (lx_.eat("methodspec")) {
        ProofBundle::MethodSection sec;
        sec.spec_name = lx_.expect_ident("method spec name");
        lx_.expect(":");
        sec.proof = lx_.expect_ident("proof node");
        lx_.expect(";");
        b.methods.push_back(std::move(sec));
      } else {
        lx_.fail("expected bundle item");
      }
    }
    return b;
  }

 private:
  ProofNode parse_derive() {
    ProofNode n;
    n.name = lx_.expect_ident("derivation name");
    lx_.expect(":");
    n.rule = lx_.expect_ident("rule name");
    lx_.expect("(");
    bool call_rule = n.rule.rfind("call_", 0) == 0;
    if (!lx_.eat(")")) {
      // first list: premises, or the cited spec for call rules
      if (!lx_.at(";")) {
        for (;;) {
          std::string id = lx_.expect_ident("name");
          if (call_rule && n.spec_name.empty())
            n.spec_name = id;
          else
            n.premises.push_back(id);
          if (!lx_.eat(",")) break;
        }
      }
      if (lx_.eat(";")) {
        for (;;) {
          std::string id = lx_.expect_ident("argument");
          if (lx_.eat("->")) {
            n.renames[id] = lx_.expect_ident("renamed to");
          } else {
            n.vars.push_back(id);
          }
          if (!lx_.eat(",")) break;
        }
      }
      lx_.expect(")");
    }
    if (lx_.eat("using")) {
      for (;;) {
        n.uses.push_back(lx_.expect_ident("assumption name"));
        if (!lx_.eat(",")) break;
      }
    }
    lx_.expect("|-");
    parse_conclusion(n);
    lx_.expect(";");
    return n;
  }

  void parse_conclusion(ProofNode& n) {
    n.pre = parse_assert_block();
    n.stmt = parse_stmt_spec();
    n.post = parse_assert_block();
    if (lx_.eat("||")) n.mid = parse_assert_block();
  }

  AssertPtr parse_assert_block() {
    lx_.expect("{");
    AssertionParser ap(lx_, &defs_);
    AssertPtr a = ap.parse();
    lx_.expect("}");
    return a;
  }

  StmtPtr parse_stmt_spec() {
    if (lx_.eat("body")) {
      lx_.expect("(");
      std::string cls = lx_.expect_ident("class");
      lx_.expect("::");
      std::string m = lx_.expect_ident("method");
      lx_.expect(")");
      const ClassDef* cd = mod_.klass(cls);
      const MethodDef* md = cd ? cd->method(m) : nullptr;
      if (!md) lx_.fail("no such method " + cls + "::" + m);
      std::vector<StmtPtr> items = flatten(md->body);
      if (lx_.eat("[")) {
        if (lx_.peek().kind != Token::Kind::Int) lx_.fail("range start");
        size_t a = static_cast<size_t>(lx_.take().ival);
        lx_.expect("..");
        if (lx_.peek().kind != Token::Kind::Int) lx_.fail("range end");
        size_t bty = static_cast<size_t>(lx_.take().ival);
        lx_.expect("]");
        if (a < 1 || bty < a || bty > items.size())
          lx_.fail("statement range out of bounds");
        items = std::vector<StmtPtr>(items.begin() + (a - 1),
                                     items.begin() + bty);
      }
      return seq_of(items);
    }
    lx_.expect("{");
    StmtParser sp(lx_);
    return seq_of(sp.parse_stmts("}"));
  }

  Lexer lx_;
  const ModuleDef& mod_;
  std::map<std::string, AssertPtr> defs_;
};

}  // namespace detail

inline ProofBundle parse_proof(const std::string& text, const ModuleDef& mod) {
  return detail::ProofParser(text, mod).parse();
}

}  // namespace loo
