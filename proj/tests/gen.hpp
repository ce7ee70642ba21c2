// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

// Random programs, states, runs, and assertions for the metatheory suites.

#pragma once

#include <random>

#include "fixtures.hpp"

namespace gen {

using namespace loo;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  int upto(int n) {  // [0, n)
    return std::uniform_int_distribution<int>(0, n - 1)(eng);
  }
  bool coin() { return upto(2) == 0; }
  std::int64_t small_int() { return upto(7) - 1; }
};

// A small program family: two internal classes (P holds scalars, a Q, and an
// external slot; Q links to Q and back to P), one external class X that can
// point anywhere and call back in. Method count, privacy, parameter types,
// and bodies vary per sample.
struct World {
  LinkedProgram prog;
  std::vector<std::string> internal_classes{"P", "Q"};
  std::vector<std::string> external_classes{"X"};
};

inline Type rand_param_type(Rng& r) {
  switch (r.upto(4)) {
    case 0: return Type::t_int();
    case 1: return Type::klass("P");
    case 2: return Type::klass("Q");
    default: return Type::t_external();
  }
}

inline std::vector<std::string> locals_matching(
    const std::vector<Param>& params, const Type& t) {
  std::vector<std::string> out;
  for (auto& p : params)
    if (p.type == t) out.push_back(p.name);
  return out;
}

// a body statement referencing only this, the parameters, and locals
inline StmtPtr rand_stmt(Rng& r, const std::string& cls,
                         const std::vector<Param>& params,
                         const std::map<std::string, std::vector<MethodDef>>&
                             sigs,
                         int depth);

inline StmtPtr rand_call(Rng& r, const std::string& cls,
                         const std::vector<Param>& params,
                         const std::map<std::string, std::vector<MethodDef>>&
                             sigs) {
  // receiver: this or a class-typed parameter
  std::vector<std::pair<std::string, std::string>> recvs{{"this", cls}};
  for (auto& p : params)
    if (p.type.is_class()) recvs.emplace_back(p.name, p.type.cls);
  auto [rv, rc] = recvs[r.upto((int)recvs.size())];
  auto it = sigs.find(rc);
  if (it == sigs.end() || it->second.empty())
    return Stmt::assign("l1", Expr::lit(Value::integer(r.small_int())));
  const MethodDef& m = it->second[r.upto((int)it->second.size())];
  std::vector<Atom> args;
  for (auto& p : m.params) {
    std::vector<std::string> cands = locals_matching(params, p.type);
    if (p.type.is_class()) {
      if (p.type.cls == cls) cands.push_back("this");
      if (cands.empty() || r.upto(4) == 0) {
        args.push_back(Atom::make_lit(Value::null()));
        continue;
      }
    } else if (p.type.kind == Type::Kind::External) {
      if (cands.empty()) {
        args.push_back(Atom::make_lit(Value::null()));
        continue;
      }
    } else {
      args.push_back(Atom::make_lit(Value::integer(r.upto(5))));
      continue;
    }
    args.push_back(Atom::make_var(cands[r.upto((int)cands.size())]));
  }
  return Stmt::call("l" + std::to_string(1 + r.upto(3)), rv, m.name, args);
}

inline StmtPtr rand_stmt(Rng& r, const std::string& cls,
                         const std::vector<Param>& params,
                         const std::map<std::string, std::vector<MethodDef>>&
                             sigs,
                         int depth) {
  const bool internal = cls == "P" || cls == "Q";
  switch (r.upto(depth > 0 ? 7 : 6)) {
    case 0: {  // scalar field write on this
      std::string f = internal ? "n" : "o2";
      if (cls == "Q") f = "m";
      return Stmt::field_write(cls == "X" ? "this" : "this", f,
                               Atom::make_lit(Value::integer(r.small_int())));
    }
    case 1: {  // reference field write on this from a matching param
      std::string f = cls == "P" ? "q" : (cls == "Q" ? "link" : "t");
      Type want = cls == "P" ? Type::klass("Q")
                             : (cls == "Q" ? Type::klass("Q")
                                           : Type::klass("P"));
      auto cands = locals_matching(params, want);
      if (cands.empty()) return Stmt::assign("l1", Expr::lit(Value::integer(0)));
      return Stmt::field_write("this", f,
                               Atom::make_var(cands[r.upto((int)cands.size())]));
    }
    case 2: {  // field read into a local
      std::string f = cls == "P" ? (r.coin() ? "n" : "q")
                                 : (cls == "Q" ? (r.coin() ? "m" : "link")
                                               : (r.coin() ? "o2" : "t"));
      return Stmt::assign("l" + std::to_string(1 + r.upto(3)),
                          Expr::field(Expr::var("this"), f));
    }
    case 3:  // allocation
      return Stmt::make_new(
          "l" + std::to_string(1 + r.upto(3)),
          std::vector<std::string>{"P", "Q", "X"}[r.upto(3)]);
    case 4:
      return rand_call(r, cls, params, sigs);
    case 5:  // scalar assignment
      return Stmt::assign("l" + std::to_string(1 + r.upto(3)),
                          Expr::lit(Value::integer(r.small_int())));
    default: {  // conditional on a scalar field
      std::string f = cls == "P" ? "n" : (cls == "Q" ? "m" : "o2");
      ExprPtr c = Expr::binary(BinOp::Eq, Expr::field(Expr::var("this"), f),
                               Expr::lit(Value::integer(r.upto(3))));
      return Stmt::iff(c, rand_stmt(r, cls, params, sigs, depth - 1),
                       rand_stmt(r, cls, params, sigs, depth - 1));
    }
  }
}

inline World random_world(std::uint64_t seed) {
  Rng r(seed);
  // signatures first, so bodies can call across classes
  std::map<std::string, std::vector<MethodDef>> sigs;
  for (auto* cls : {"P", "Q", "X"}) {
    int n = 1 + r.upto(2);
    for (int i = 0; i < n; ++i) {
      MethodDef m;
      m.name = std::string("m") + std::to_string(i + 1);
      m.privacy = (cls[0] != 'X' && r.upto(3) == 0) ? Privacy::Private
                                                     : Privacy::Public;
      int np = r.upto(3);
      for (int k = 0; k < np; ++k)
        m.params.push_back(
            Param{"p" + std::to_string(k + 1), rand_param_type(r)});
      m.ret = Type::t_int();
      sigs[cls].push_back(std::move(m));
    }
  }
  auto build_class = [&](const std::string& name) {
    ClassDef c;
    c.name = name;
    if (name == "P") {
      c.fields = {FieldDef{"n", Type::t_int(), {}},
                  FieldDef{"q", Type::klass("Q"), {}},
                  FieldDef{"h", Type::t_external(), {}}};
    } else if (name == "Q") {
      c.fields = {FieldDef{"m", Type::t_int(), {}},
                  FieldDef{"link", Type::klass("Q"), {}}};
    } else {
      c.fields = {FieldDef{"o2", Type::t_int(), {}},
                  FieldDef{"t", Type::klass("P"), {}}};
    }
    for (auto m : sigs[name]) {
      std::vector<StmtPtr> body;
      int n = 1 + r.upto(3);
      for (int i = 0; i < n; ++i)
        body.push_back(rand_stmt(r, name, m.params, sigs, 1));
      body.push_back(Stmt::assign("res", Expr::lit(Value::integer(0))));
      m.body = seq_of(body);
      std::set<std::string> bound{"this", "res"};
      for (auto& p : m.params) bound.insert(p.name);
      std::set<std::string> targets;
      detail::collect_assign_targets(m.body, targets);
      for (auto& t : targets)
        if (!bound.count(t)) m.locals.push_back(t);
      c.methods.push_back(std::move(m));
    }
    return c;
  };
  ModuleDef mi, me;
  mi.name = "MI";
  me.name = "ME";
  mi.classes.emplace("P", build_class("P"));
  mi.classes.emplace("Q", build_class("Q"));
  me.classes.emplace("X", build_class("X"));
  World w;
  w.prog = link(mi, {me});
  return w;
}

// a closed random heap plus a depth-1 frame: well-formed by construction
inline State random_state(Rng& r, const World& w) {
  State s;
  int n = 3 + r.upto(5);
  std::vector<std::string> classes{"P", "Q", "X", "P", "Q", "X", "Key?"};
  for (int i = 0; i < n; ++i) {
    std::string cls = std::vector<std::string>{"P", "Q", "X"}[r.upto(3)];
    const ClassDef* cd = w.prog.klass(cls);
    Object o;
    o.cls = cls;
    for (auto& f : cd->fields)
      o.fields.emplace_back(f.name, Value::null());
    s.alloc(std::move(o));
  }
  // wire reference fields to random same-class targets (or leave null)
  for (Addr a = 1; a <= s.heap.size(); ++a) {
    Object* o = s.object(a);
    const ClassDef* cd = w.prog.klass(o->cls);
    for (auto& f : cd->fields) {
      if (f.type.is_scalar()) {
        o->set_field(f.name, Value::integer(r.small_int()));
        continue;
      }
      std::vector<Addr> cands;
      for (Addr b = 1; b <= s.heap.size(); ++b) {
        const std::string& bc = s.object(b)->cls;
        if (f.type.kind == Type::Kind::External &&
            !w.prog.is_internal_class(bc))
          cands.push_back(b);
        else if (f.type.is_class() && bc == f.type.cls)
          cands.push_back(b);
      }
      if (!cands.empty() && r.upto(4) != 0)
        o->set_field(f.name, Value::address(cands[r.upto((int)cands.size())]));
    }
  }
  Frame f;
  f.vars["this"] = Value::address(static_cast<Addr>(1 + r.upto(n)));
  int extra = r.upto(3);
  for (int i = 0; i < extra; ++i)
    f.vars["v" + std::to_string(i + 1)] =
        r.coin() ? Value::address(static_cast<Addr>(1 + r.upto(n)))
                 : Value::integer(r.small_int());
  // a driver: a few calls on whatever the frame can see
  std::vector<StmtPtr> driver;
  int k = 1 + r.upto(3);
  std::vector<Param> pseudo;
  for (auto& [x, v] : f.vars) {
    if (!v.is_address()) continue;
    auto c = class_of(s, v);
    if (c && x != "this") pseudo.push_back(Param{x, Type::klass(*c)});
  }
  auto self_class = class_of(s, f.vars["this"]);
  std::map<std::string, std::vector<MethodDef>> sigs;
  for (auto* cls : {"P", "Q", "X"}) {
    const ClassDef* cd = w.prog.klass(cls);
    sigs[cls] = cd->methods;
  }
  for (int i = 0; i < k; ++i)
    driver.push_back(rand_call(r, *self_class, pseudo, sigs));
  f.cont = Cont::of(seq_of(driver));
  s.stack.push_back(std::move(f));
  return s;
}

struct Run {
  std::vector<State> states;  // states[0] is the base
  std::vector<StepKind> kinds;
};

inline Run run_trace(const World& w, const State& base, int budget) {
  Run run;
  run.states.push_back(base);
  State cur = base;
  for (int i = 0; i < budget; ++i) {
    StepResult r = small_step(w.prog, cur);
    if (!r.is_next()) break;
    if (r.next.depth() < base.depth()) break;
    run.states.push_back(r.next);
    run.kinds.push_back(r.kind);
    cur = r.next;
  }
  return run;
}

// grounded assertions over a state's heap; `pos` allows protection only in
// positive positions, `stable` forbids it entirely
inline AssertPtr rand_assert(Rng& r, const State& s, bool stable, bool pos,
                             int depth) {
  auto addr = [&]() {
    return Expr::lit(Value::address(static_cast<Addr>(1 + r.upto((int)s.heap.size()))));
  };
  auto atom = [&]() -> AssertPtr {
    switch (r.upto(stable ? 5 : 6)) {
      case 0: {
        ExprPtr a = addr();
        auto c = class_of(s, a->litval);
        std::string f = *c == "P" ? "n" : (*c == "Q" ? "m" : "o2");
        return Assertion::expr(Expr::binary(
            r.coin() ? BinOp::Ge : BinOp::Eq, Expr::field(a, f),
            Expr::lit(Value::integer(r.small_int()))));
      }
      case 1: {
        ExprPtr a = addr();
        auto c = class_of(s, a->litval);
        return Assertion::has_class(a, r.coin() ? *c : "P");
      }
      case 2: return Assertion::external(addr());
      case 3: return Assertion::internal(addr());
      case 4: return Assertion::protected_from(addr(), addr());
      default: return Assertion::protected_(addr());
    }
  };
  if (depth <= 0) return atom();
  switch (r.upto(4)) {
    case 0:
      return Assertion::conj(rand_assert(r, s, stable, pos, depth - 1),
                             rand_assert(r, s, stable, pos, depth - 1));
    case 1: {
      // negation flips positivity: the body must be stable when pos holds
      AssertPtr body = rand_assert(r, s, true, true, depth - 1);
      return Assertion::negate(body);
    }
    case 2: {
      std::string cls = std::vector<std::string>{"P", "Q", "X"}[r.upto(3)];
      return Assertion::all("xq", cls,
                            rand_assert(r, s, stable, pos, depth - 1));
    }
    default:
      return atom();
  }
}

}  // namespace gen
