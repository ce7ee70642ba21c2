// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "loo/cli.hpp"

namespace fixtures {

inline std::string corpus(const std::string& name) {
  return std::string(LOO_CORPUS_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  auto r = loo::read_file(path);
  REQUIRE(r.ok());
  return *r;
}

inline loo::ModuleDef load_module(const std::string& name) {
  return loo::parse_module(slurp(corpus(name)));
}

// The heap and stack family behind the protection examples: a shop o1 with
// account o4 (key o6), inventory o2 holding item o3, an external client o5
// that holds the key, and an external buyer o7 with no fields.
//
//   sigma1: [ this->o1, b->o7, it->o3 ]            before the call to buy
//   sigma2: push [ this->o1, buyer->o7, anItem->o3,
//                  myAccnt->o4, price->5 ]         during buy
//   sigma3: push [ this->o7, p1->o4, p2->5 ]       during pay
struct ShopWorld {
  loo::LinkedProgram prog;
  loo::State s1, s2, s3;
  loo::Addr o1 = 1, o2 = 2, o3 = 3, o4 = 4, o5 = 5, o6 = 6, o7 = 7;

  loo::Value a(loo::Addr x) const { return loo::Value::address(x); }
};

inline ShopWorld shop_world() {
  using namespace loo;
  ShopWorld w;
  ModuleDef ext = parse_module(R"(
module M_ext {
  class ExtClient {
    field pal: Key;
  }
  class ExtBuyer {
    public method pay(p1: Account, p2: int): int { res := 0 }
    public method tell(p1: str): int { res := 0 }
  }
}
)");
  w.prog = link(load_module("M_good.loo"), {ext});

  State s;
  s.alloc(Object{"Shop",
                 {{"accnt", Value::address(4)},
                  {"invntry", Value::address(2)},
                  {"clients", Value::address(5)}}});
  s.alloc(Object{"Inventory", {{"first", Value::address(3)}}});
  s.alloc(Object{"Item", {{"price", Value::integer(5)}}});
  s.alloc(Object{"Account",
                 {{"blnce", Value::integer(100)}, {"key", Value::address(6)}}});
  s.alloc(Object{"ExtClient", {{"pal", Value::address(6)}}});
  s.alloc(Object{"Key", {}});
  s.alloc(Object{"ExtBuyer", {}});

  Frame f1;
  f1.vars["this"] = Value::address(1);
  f1.vars["b"] = Value::address(7);
  f1.vars["it"] = Value::address(3);
  f1.cont = Cont::of(Stmt::call("u", "this", "buy",
                                {Atom::make_var("b"), Atom::make_var("it")}));
  s.stack.push_back(f1);
  w.s1 = s;

  Frame f2;
  f2.vars["this"] = Value::address(1);
  f2.vars["buyer"] = Value::address(7);
  f2.vars["anItem"] = Value::address(3);
  f2.vars["myAccnt"] = Value::address(4);
  f2.vars["price"] = Value::integer(5);
  f2.cont = Cont::of(Stmt::call(
      "tmp", "buyer", "pay",
      {Atom::make_var("myAccnt"), Atom::make_var("price")}));
  w.s2 = push(w.s1, f2);

  Frame f3;
  f3.vars["this"] = Value::address(7);
  f3.vars["p1"] = Value::address(4);
  f3.vars["p2"] = Value::integer(5);
  f3.cont = Cont::of(Stmt::assign("res", Expr::lit(Value::integer(0))));
  w.s3 = push(w.s2, f3);
  return w;
}

inline loo::StmtPtr parse_stmts(const std::string& src) {
  loo::Lexer lx(src + " END");
  loo::detail::StmtParser sp(lx);
  return loo::seq_of(sp.parse_stmts("END"));
}

inline loo::AssertPtr A(const std::string& s) { return loo::parse_assertion(s); }

}  // namespace fixtures
