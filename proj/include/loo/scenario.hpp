// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "loo/parser.hpp"
#include "loo/state.hpp"

namespace loo {

// A scenario seeds a heap declaratively (bypassing the machine, so internal
// fields can be initialised from outside) and names the continuation to run
// from an external base frame whose receiver is a fresh Object.
//
//   scenario {
//     let acc = new Account { blnce = 1000, key = new Key {} };
//     run { k := new Key; tmp := acc.set(k) }
//   }
struct Scenario {
  struct SeedObject {
    std::string name;  // empty for anonymous (inline) objects
    std::string cls;
    // field -> literal | name reference | index of another seed (inline)
    std::vector<std::pair<std::string, std::string>> ref_fields;
    std::vector<std::pair<std::string, Value>> lit_fields;
    std::vector<std::pair<std::string, size_t>> inline_fields;
  };
  std::vector<SeedObject> seeds;
  StmtPtr run;
};

namespace detail {

inline size_t parse_seed_object(Lexer& lx, Scenario& sc, std::string name);

inline void parse_seed_fields(Lexer& lx, Scenario& sc, size_t idx) {
  lx.expect("{");
  if (lx.eat("}")) return;
  for (;;) {
    std::string f = lx.expect_ident("field");
    lx.expect("=");
    if (lx.eat("new")) {
      std::string cls = lx.expect_ident("class");
      size_t sub = parse_seed_object(lx, sc, "");
      sc.seeds[sub].cls = cls;
      sc.seeds[idx].inline_fields.emplace_back(f, sub);
    } else if (lx.eat("null")) {
      sc.seeds[idx].lit_fields.emplace_back(f, Value::null());
    } else if (lx.eat("true")) {
      sc.seeds[idx].lit_fields.emplace_back(f, Value::boolean(true));
    } else if (lx.eat("false")) {
      sc.seeds[idx].lit_fields.emplace_back(f, Value::boolean(false));
    } else if (lx.peek().kind == Token::Kind::Int) {
      sc.seeds[idx].lit_fields.emplace_back(f, Value::integer(lx.take().ival));
    } else if (lx.peek().kind == Token::Kind::Str) {
      sc.seeds[idx].lit_fields.emplace_back(f, Value::str(lx.take().sval));
    } else {
      sc.seeds[idx].ref_fields.emplace_back(f, lx.expect_ident("reference"));
    }
    if (lx.eat("}")) break;
    lx.expect(",");
  }
}

inline size_t parse_seed_object(Lexer& lx, Scenario& sc, std::string name) {
  Scenario::SeedObject o;
  o.name = std::move(name);
  sc.seeds.push_back(std::move(o));
  size_t idx = sc.seeds.size() - 1;
  parse_seed_fields(lx, sc, idx);
  return idx;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  Lexer lx(text);
  Scenario sc;
  lx.expect("scenario");
  lx.expect("{");
  for (;;) {
    if (lx.eat("let")) {
      std::string name = lx.expect_ident("seed name");
      lx.expect("=");
      lx.expect("new");
      std::string cls = lx.expect_ident("class");
      size_t idx = detail::parse_seed_object(lx, sc, name);
      sc.seeds[idx].cls = cls;
      lx.eat(";");
      continue;
    }
    if (lx.eat("run")) {
      lx.expect("{");
      detail::StmtParser sp(lx);
      sc.run = seq_of(sp.parse_stmts("}"));
      break;
    }
    lx.fail("expected let or run");
  }
  lx.expect("}");
  if (!lx.at_end()) lx.fail("trailing input after scenario");
  return sc;
}

// Builds the base state: seed objects in declaration order, a root Object,
// and one frame binding this plus every named seed.
inline Outcome<State> build_scenario_state(const LinkedProgram& prog,
                                           const Scenario& sc) {
  State s;
  std::map<std::string, Addr> names;
  std::vector<Addr> addr_of(sc.seeds.size());
  for (size_t i = 0; i < sc.seeds.size(); ++i) {
    const auto& seed = sc.seeds[i];
    const ClassDef* cd = prog.klass(seed.cls);
    if (!cd)
      return Outcome<State>::err("scenario: unknown class " + seed.cls);
    Object o;
    o.cls = seed.cls;
    for (auto& f : cd->fields) o.fields.emplace_back(f.name, Value::null());
    addr_of[i] = s.alloc(std::move(o));
    if (!seed.name.empty()) names[seed.name] = addr_of[i];
  }
  for (size_t i = 0; i < sc.seeds.size(); ++i) {
    const auto& seed = sc.seeds[i];
    Object* o = s.object(addr_of[i]);
    auto check_field = [&](const std::string& f) -> bool {
      return o->field(f) != nullptr;
    };
    for (auto& [f, v] : seed.lit_fields) {
      if (!check_field(f))
        return Outcome<State>::err("scenario: " + seed.cls + " has no field " + f);
      o->set_field(f, v);
    }
    for (auto& [f, ref] : seed.ref_fields) {
      if (!check_field(f))
        return Outcome<State>::err("scenario: " + seed.cls + " has no field " + f);
      auto it = names.find(ref);
      if (it == names.end())
        return Outcome<State>::err("scenario: unknown seed '" + ref + "'");
      o->set_field(f, Value::address(it->second));
    }
    for (auto& [f, sub] : seed.inline_fields) {
      if (!check_field(f))
        return Outcome<State>::err("scenario: " + seed.cls + " has no field " + f);
      o->set_field(f, Value::address(addr_of[sub]));
    }
  }
  Addr root = s.alloc(Object{"Object", {}});
  Frame fr;
  fr.vars["this"] = Value::address(root);
  for (auto& [n, a] : names) fr.vars[n] = Value::address(a);
  fr.cont = Cont::of(sc.run ? sc.run : Stmt::skip());
  s.stack.push_back(std::move(fr));
  return s;
}

}  // namespace loo
