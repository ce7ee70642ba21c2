// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "loo/program.hpp"

namespace loo {

struct Object {
  std::string cls;
  std::vector<std::pair<std::string, Value>> fields;  // declaration order

  const Value* field(const std::string& f) const {
    for (auto& [n, v] : fields)
      if (n == f) return &v;
    return nullptr;
  }
  void set_field(const std::string& f, Value v) {
    for (auto& [n, old] : fields)
      if (n == f) {
        old = std::move(v);
        return;
      }
    fields.emplace_back(f, std::move(v));
  }
};

// Continuation: the statements left to run in a frame, front first. Empty
// means epsilon.
struct Cont {
  std::vector<StmtPtr> items;

  bool empty() const { return items.empty(); }
  const StmtPtr& head() const { return items.front(); }
  Cont tail() const {
    Cont c = *this;
    c.items.erase(c.items.begin());
    return c;
  }
  static Cont of(const StmtPtr& s) {
    Cont c;
    flatten_into(s, c.items);
    return c;
  }
  StmtPtr as_stmt() const { return seq_of(items); }
};

struct Frame {
  std::map<std::string, Value> vars;
  Cont cont;

  const Value* lookup(const std::string& x) const {
    auto it = vars.find(x);
    return it == vars.end() ? nullptr : &it->second;
  }
};

// A state is a non-empty stack of frames over a heap. Addresses are dense and
// minted as 1 + max existing id, so heap_[a-1] is the object at address a.
struct State {
  std::vector<Frame> stack;
  std::vector<Object> heap;

  size_t depth() const { return stack.size(); }
  Frame& top() { return stack.back(); }
  const Frame& top() const { return stack.back(); }

  const Object* object(Addr a) const {
    if (a == 0 || a > heap.size()) return nullptr;
    return &heap[a - 1];
  }
  Object* object(Addr a) {
    if (a == 0 || a > heap.size()) return nullptr;
    return &heap[a - 1];
  }
  Addr fresh_addr() const { return static_cast<Addr>(heap.size() + 1); }

  Addr alloc(Object o) {
    heap.push_back(std::move(o));
    return static_cast<Addr>(heap.size());
  }
};

// Def A.7: one frame mapping this to a single Object-class object.
inline State initial_state(const StmtPtr& stmt) {
  State s;
  Addr root = s.alloc(Object{"Object", {}});
  Frame f;
  f.vars["this"] = Value::address(root);
  f.cont = Cont::of(stmt);
  s.stack.push_back(std::move(f));
  return s;
}

// ---- interpretation (Def A.1): reads through frame and heap, no privacy ---

struct Path {
  std::string root_var;          // empty when rooted at an address
  std::optional<Addr> root_addr;
  std::vector<std::string> fields;

  static Path var(std::string x, std::vector<std::string> fs = {}) {
    Path p;
    p.root_var = std::move(x);
    p.fields = std::move(fs);
    return p;
  }
  static Path addr(Addr a, std::vector<std::string> fs = {}) {
    Path p;
    p.root_addr = a;
    p.fields = std::move(fs);
    return p;
  }
};

inline Outcome<Value> interpret(const State& s, const Path& p) {
  Value v;
  if (p.root_addr) {
    v = Value::address(*p.root_addr);
  } else {
    const Value* bound = s.top().lookup(p.root_var);
    if (!bound)
      return Outcome<Value>::err("unbound variable '" + p.root_var + "'");
    v = *bound;
  }
  for (auto& f : p.fields) {
    if (v.is_null()) return Outcome<Value>::err("null dereference at ." + f);
    if (!v.is_address())
      return Outcome<Value>::err("field access on scalar at ." + f);
    const Object* o = s.object(v.addr());
    if (!o) return Outcome<Value>::err("dangling address");
    const Value* fv = o->field(f);
    if (!fv)
      return Outcome<Value>::err("class " + o->cls + " has no field '" + f + "'");
    v = *fv;
  }
  return v;
}

inline Outcome<Value> interpret_var(const State& s, const std::string& x) {
  return interpret(s, Path::var(x));
}

inline Outcome<Value> atom_value(const State& s, const Atom& a) {
  if (a.is_var) return interpret_var(s, a.var);
  return Outcome<Value>(a.val);
}

inline std::optional<std::string> class_of(const State& s, const Value& v) {
  if (!v.is_address()) return std::nullopt;
  const Object* o = s.object(v.addr());
  if (!o) return std::nullopt;
  return o->cls;
}

// ---- reachability (Def 2.3) -----------------------------------------------

inline std::set<Addr> reach(const State& s, Addr a) {
  std::set<Addr> seen;
  std::vector<Addr> work{a};
  while (!work.empty()) {
    Addr cur = work.back();
    work.pop_back();
    if (!seen.insert(cur).second) continue;
    const Object* o = s.object(cur);
    if (!o) continue;
    for (auto& [f, v] : o->fields)
      if (v.is_address() && !seen.count(v.addr())) work.push_back(v.addr());
  }
  return seen;
}

inline std::set<Addr> reach_value(const State& s, const Value& v) {
  if (!v.is_address()) return {};
  return reach(s, v.addr());
}

inline std::set<Addr> locally_reachable_frame(const State& s, const Frame& f) {
  std::set<Addr> out;
  for (auto& [x, v] : f.vars) {
    if (!v.is_address()) continue;
    auto r = reach(s, v.addr());
    out.insert(r.begin(), r.end());
  }
  return out;
}

inline std::set<Addr> locally_reachable(const State& s) {
  return locally_reachable_frame(s, s.top());
}

// ---- formals of the active method (Def A.8) --------------------------------

// The formals of frame k (1-based) are read off the pending call in frame
// k-1; a depth-1 frame has none. Returns nullptr when the shape is off.
inline const MethodDef* active_method(const LinkedProgram& prog, const State& s,
                                      size_t k) {
  if (k < 2 || k > s.depth()) return nullptr;
  const Frame& caller = s.stack[k - 2];
  if (caller.cont.empty()) return nullptr;
  const StmtPtr& call = caller.cont.head();
  if (call->kind != Stmt::Kind::Call) return nullptr;
  const Value* recv = caller.lookup(call->recv);
  if (!recv || !recv->is_address()) return nullptr;
  const Object* o = s.object(recv->addr());
  if (!o) return nullptr;
  return prog.lookup_method(o->cls, call->member);
}

// ---- well-formed states (Def 2.4) ------------------------------------------

// A state is well-formed when the heap is closed, every frame binds `this`
// to an address, every frame's domain is this/formals/locals/res of its
// active method, and the values of this and the formals of each frame k>1
// appear in frame k-1's range. The lemma-level content — locally reachable
// objects of a pushed frame were reachable from the caller — follows from
// the last clause, since locals start null and formals never change.
inline bool wf_state(const LinkedProgram& prog, const State& s) {
  if (s.stack.empty()) return false;
  for (auto& o : s.heap)
    for (auto& [f, v] : o.fields)
      if (v.is_address() && !s.object(v.addr())) return false;
  for (auto& fr : s.stack) {
    const Value* t = fr.lookup("this");
    if (!t || !t->is_address() || !s.object(t->addr())) return false;
  }
  for (size_t k = 2; k <= s.depth(); ++k) {
    const MethodDef* m = active_method(prog, s, k);
    if (!m) return false;
    const Frame& callee = s.stack[k - 1];
    const Frame& caller = s.stack[k - 2];
    std::set<std::string> allowed{"this", "res"};
    for (auto& p : m->params) allowed.insert(p.name);
    for (auto& l : m->locals) allowed.insert(l);
    for (auto& [x, v] : callee.vars)
      if (!allowed.count(x)) return false;
    auto in_caller_range = [&](const Value& v) {
      for (auto& [y, w] : caller.vars)
        if (w == v) return true;
      return false;
    };
    if (!in_caller_range(*callee.lookup("this"))) return false;
    for (auto& p : m->params) {
      const Value* v = callee.lookup(p.name);
      if (!v) return false;
      if (v->is_address() && !in_caller_range(*v)) return false;
    }
  }
  return true;
}

}  // namespace loo
