// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "loo/monitor.hpp"

namespace loo {

// Bounded enumeration of external attacker programs: a driver statement list
// running in a frame whose receiver is an attacker object, plus enumerated
// bodies for the callback methods that internal code invokes on external
// values.
//
// The candidate grammar, in canonical order per position:
//   vK := new C                  (C over all linked classes plus Atk)
//   vK := recv.m(args)           (recv a variable of an internal class, m
//                                 public, args matching-typed variables, null
//                                 for reference types, or pool literals)
//   vK := this.stash_C           (driver only: replay a hoarded capability)
//   this.stash_C := v            (callback only: hoard a received capability)
// Fresh targets are named v1, v2, ... in definition order, so the stream has
// no renaming duplicates. Candidates where a `new` or stash read defines a
// variable that no later statement mentions are excluded: such definitions
// are inert, every behaviour they exhibit is covered by the shorter program.
// The integer literal pool is the largest integer in the seed heap (and 1
// when the seed has none): amounts beyond the seeded funds behave like the
// maximum. Callback bodies end with an implicit `res := 0` and are only
// enumerated for drivers that can reach an external call site; when the
// nesting bound is 1 the bodies make no calls.

struct AttackBounds {
  int max_stmts = 4;
  int max_objects = 2;
  int max_depth = 2;  // 1: leaf callbacks; 2: callbacks may call back in
  int cb_stmts = 2;
  std::int64_t budget = kDefaultFuzzBudget;
};

struct AttackSchema {
  ModuleDef internal;
  std::vector<ModuleDef> externals;
  Scenario seed;
  AttackBounds bounds;
};

struct CallbackSig {
  std::string name;
  std::vector<Type> params;
};

struct AttackProgram {
  std::vector<StmtPtr> driver;
  std::vector<std::vector<StmtPtr>> callback_bodies;
};

struct Counterexample {
  std::string program_text;
  std::string conjunct;
  std::string instantiation;
  std::string witness_trace;
  std::uint64_t candidate_index = 0;
};

struct SearchResult {
  bool found = false;
  Counterexample cex;
  std::uint64_t candidates = 0;
};

namespace adv_detail {

struct TypedName {
  std::string name;
  Type type;
};

inline std::optional<Type> atom_type(const detail::LocalTyper& ty,
                                     const Atom& a) {
  if (a.is_var) return ty.type_of(Expr::var(a.var));
  switch (a.val.kind()) {
    case Value::Kind::Int: return Type::t_int();
    case Value::Kind::Bool: return Type::t_bool();
    case Value::Kind::Str: return Type::t_str();
    default: return std::nullopt;
  }
}

inline void discover_callbacks_in(const ModuleDef& mod, const ClassDef& c,
                                  const MethodDef& m,
                                  std::vector<CallbackSig>& out) {
  detail::LocalTyper ty{mod, c, {}, {}};
  ty.bind("this", Type::klass(c.name));
  for (auto& p : m.params) ty.bind(p.name, p.type);
  detail::infer_local_types(mod, ty, m.body);
  std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& s) {
    if (!s) return;
    if (s->kind == Stmt::Kind::Seq || s->kind == Stmt::Kind::If) {
      walk(s->s1);
      walk(s->s2);
      return;
    }
    if (s->kind != Stmt::Kind::Call) return;
    auto rt = ty.type_of(Expr::var(s->recv));
    if (!rt || rt->kind != Type::Kind::External) return;
    CallbackSig sig;
    sig.name = s->member;
    for (auto& a : s->args) {
      auto at = atom_type(ty, a);
      sig.params.push_back(at ? *at : Type::klass("Object"));
    }
    for (auto& existing : out)
      if (existing.name == sig.name) return;
    out.push_back(std::move(sig));
  };
  walk(m.body);
}

inline std::vector<CallbackSig> discover_callbacks(const ModuleDef& mod) {
  std::vector<CallbackSig> out;
  for (auto& [cn, c] : mod.classes)
    for (auto& m : c.methods) discover_callbacks_in(mod, c, m, out);
  std::sort(out.begin(), out.end(),
            [](const CallbackSig& a, const CallbackSig& b) {
              return a.name < b.name;
            });
  return out;
}

inline std::set<std::string> methods_reaching_external(const ModuleDef& mod) {
  std::map<std::string, std::set<std::string>> calls;
  std::set<std::string> direct;
  for (auto& [cn, c] : mod.classes) {
    for (auto& m : c.methods) {
      std::string key = cn + "::" + m.name;
      detail::LocalTyper ty{mod, c, {}, {}};
      ty.bind("this", Type::klass(cn));
      for (auto& p : m.params) ty.bind(p.name, p.type);
      detail::infer_local_types(mod, ty, m.body);
      std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& s) {
        if (!s) return;
        if (s->kind == Stmt::Kind::Seq || s->kind == Stmt::Kind::If) {
          walk(s->s1);
          walk(s->s2);
          return;
        }
        if (s->kind != Stmt::Kind::Call) return;
        auto rt = ty.type_of(Expr::var(s->recv));
        if (!rt) {
          direct.insert(key);
        } else if (rt->kind == Type::Kind::External) {
          direct.insert(key);
        } else if (rt->is_class() && mod.defines(rt->cls)) {
          calls[key].insert(rt->cls + "::" + s->member);
        }
      };
      walk(m.body);
    }
  }
  std::set<std::string> reach = direct;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [k, cs] : calls) {
      if (reach.count(k)) continue;
      for (auto& c : cs)
        if (reach.count(c)) {
          reach.insert(k);
          changed = true;
          break;
        }
    }
  }
  return reach;
}

struct Grammar {
  const AttackSchema* schema = nullptr;
  std::vector<std::string> newable;
  std::vector<std::string> stash_classes;
  std::vector<CallbackSig> callbacks;
  std::set<std::string> reaches_external;
  std::vector<Value> int_pool;
  std::map<std::string, std::vector<const MethodDef*>> publics;

  static std::string stash_field(const std::string& cls) {
    return "stash" + cls;
  }
};

inline Grammar build_grammar(const AttackSchema& schema) {
  Grammar g;
  g.schema = &schema;
  for (auto& [cn, c] : schema.internal.classes) {
    g.newable.push_back(cn);
    std::vector<const MethodDef*> pub;
    for (auto& m : c.methods)
      if (m.privacy == Privacy::Public) pub.push_back(&m);
    std::sort(pub.begin(), pub.end(),
              [](const MethodDef* a, const MethodDef* b) {
                return a->name < b->name;
              });
    if (!pub.empty()) g.publics[cn] = std::move(pub);
  }
  g.newable.push_back("Atk");
  std::sort(g.newable.begin(), g.newable.end());
  g.callbacks = discover_callbacks(schema.internal);
  g.reaches_external = methods_reaching_external(schema.internal);
  std::set<std::string> stash;
  for (auto& cb : g.callbacks)
    for (auto& t : cb.params)
      if (t.is_class() && schema.internal.defines(t.cls)) stash.insert(t.cls);
  g.stash_classes.assign(stash.begin(), stash.end());
  std::int64_t biggest = 0;
  for (auto& seed : schema.seed.seeds)
    for (auto& [f, v] : seed.lit_fields)
      if (v.is_int()) biggest = std::max(biggest, v.as_int());
  if (biggest == 0) biggest = 1;
  g.int_pool.push_back(Value::integer(biggest));
  return g;
}

inline ClassDef make_attacker_class(const Grammar& g) {
  ClassDef atk;
  atk.name = "Atk";
  for (auto& c : g.stash_classes)
    atk.fields.push_back(FieldDef{Grammar::stash_field(c), Type::klass(c), {}});
  for (auto& cb : g.callbacks) {
    MethodDef m;
    m.privacy = Privacy::Public;
    m.name = cb.name;
    for (size_t i = 0; i < cb.params.size(); ++i)
      m.params.push_back(Param{"p" + std::to_string(i + 1), cb.params[i]});
    m.ret = Type::t_int();
    m.body = Stmt::assign("res", Expr::lit(Value::integer(0)));
    atk.methods.push_back(std::move(m));
  }
  return atk;
}

inline std::vector<Atom> arg_candidates(const Grammar& g,
                                        const std::vector<TypedName>& env,
                                        const Type& t) {
  std::vector<Atom> out;
  switch (t.kind) {
    case Type::Kind::Class:
      for (auto& v : env)
        if (v.type.is_class() && v.type.cls == t.cls)
          out.push_back(Atom::make_var(v.name));
      out.push_back(Atom::make_lit(Value::null()));
      break;
    case Type::Kind::External:
      for (auto& v : env)
        if (v.type.is_class() && !g.schema->internal.defines(v.type.cls))
          out.push_back(Atom::make_var(v.name));
      break;
    case Type::Kind::Int:
    case Type::Kind::Nat:
      for (auto& i : g.int_pool) out.push_back(Atom::make_lit(i));
      break;
    case Type::Kind::Bool:
      out.push_back(Atom::make_lit(Value::boolean(false)));
      out.push_back(Atom::make_lit(Value::boolean(true)));
      break;
    case Type::Kind::Str:
      out.push_back(Atom::make_lit(Value::str("x")));
      break;
  }
  return out;
}

// One position's alternatives. The consumer receives the statement and the
// type bound to the fresh target (nullopt for stash stores).
inline void enumerate_position(
    const Grammar& g, const std::vector<TypedName>& env, int objs_left,
    bool allow_calls, bool in_callback, int fresh_index,
    const std::function<void(const StmtPtr&, const std::optional<Type>&)>&
        consumer) {
  std::string target = "v" + std::to_string(fresh_index);
  if (objs_left > 0)
    for (auto& c : g.newable)
      consumer(Stmt::make_new(target, c), Type::klass(c));
  if (allow_calls) {
    for (auto& v : env) {
      if (!v.type.is_class()) continue;
      auto it = g.publics.find(v.type.cls);
      if (it == g.publics.end()) continue;
      for (const MethodDef* m : it->second) {
        std::vector<std::vector<Atom>> cands;
        bool ok = true;
        for (auto& p : m->params) {
          cands.push_back(arg_candidates(g, env, p.type));
          if (cands.back().empty()) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        std::vector<size_t> idx(cands.size(), 0);
        for (;;) {
          std::vector<Atom> args;
          for (size_t i = 0; i < cands.size(); ++i)
            args.push_back(cands[i][idx[i]]);
          consumer(Stmt::call(target, v.name, m->name, args), m->ret);
          size_t i = cands.size();
          for (; i-- > 0;) {
            if (++idx[i] < cands[i].size()) break;
            idx[i] = 0;
          }
          if (i == static_cast<size_t>(-1)) break;
        }
      }
    }
  }
  for (auto& c : g.stash_classes) {
    if (in_callback) {
      for (auto& v : env)
        if (v.type.is_class() && v.type.cls == c)
          consumer(Stmt::field_write("this", Grammar::stash_field(c),
                                     Atom::make_var(v.name)),
                   std::nullopt);
    } else {
      consumer(Stmt::assign(
                   target, Expr::field(Expr::var("this"),
                                       Grammar::stash_field(c))),
               Type::klass(c));
    }
  }
}

// A New or stash read whose target is never mentioned afterwards is inert.
inline bool has_dead_definition(const std::vector<StmtPtr>& stmts) {
  for (size_t i = 0; i < stmts.size(); ++i) {
    const StmtPtr& s = stmts[i];
    bool definition = s->kind == Stmt::Kind::New ||
                      (s->kind == Stmt::Kind::Assign &&
                       s->expr->kind == Expr::Kind::Field);
    if (!definition) continue;
    bool used = false;
    for (size_t j = i + 1; j < stmts.size() && !used; ++j) {
      const StmtPtr& t = stmts[j];
      switch (t->kind) {
        case Stmt::Kind::Call:
          used = t->recv == s->target;
          for (auto& a : t->args) used |= a.is_var && a.var == s->target;
          break;
        case Stmt::Kind::FieldWrite:
          used = t->target == s->target ||
                 (t->src.is_var && t->src.var == s->target);
          break;
        case Stmt::Kind::Assign: {
          std::set<std::string> vs;
          expr_vars(t->expr, vs);
          used = vs.count(s->target) > 0;
          break;
        }
        default:
          break;
      }
    }
    if (!used) return true;
  }
  return false;
}

}  // namespace adv_detail

class AttackEnumerator;

namespace adv_detail {

// Enumerates all bodies for one callback, shortest first within the DFS
// prefix order, dead definitions excluded.
inline std::vector<std::vector<StmtPtr>> enumerate_bodies(
    const Grammar& g, const CallbackSig& cb, const AttackBounds& bounds) {
  std::vector<std::vector<StmtPtr>> out;
  std::vector<TypedName> env;
  env.push_back({"this", Type::klass("Atk")});
  for (size_t i = 0; i < cb.params.size(); ++i)
    env.push_back({"p" + std::to_string(i + 1), cb.params[i]});
  bool allow_calls = bounds.max_depth >= 2;
  std::vector<StmtPtr> body;
  std::function<void(std::vector<TypedName>&, int, int)> go =
      [&](std::vector<TypedName>& e, int objs_left, int fresh) {
        if (!has_dead_definition(body)) out.push_back(body);
        if (body.size() >= (size_t)bounds.cb_stmts) return;
        enumerate_position(
            g, e, objs_left, allow_calls, /*in_callback=*/true, fresh,
            [&](const StmtPtr& s, const std::optional<Type>& t) {
              body.push_back(s);
              bool fresh_used = t.has_value();
              if (fresh_used)
                e.push_back(TypedName{"v" + std::to_string(fresh), *t});
              go(e, objs_left - (s->kind == Stmt::Kind::New ? 1 : 0),
                 fresh + (fresh_used ? 1 : 0));
              if (fresh_used) e.pop_back();
              body.pop_back();
            });
      };
  go(env, bounds.max_objects, 1);
  return out;
}

}  // namespace adv_detail

// Visits every candidate in canonical order (driver DFS; per driver, the
// product of callback bodies when the driver can trigger them).
class AttackEnumerator {
 public:
  explicit AttackEnumerator(const AttackSchema& schema)
      : schema_(schema), grammar_(adv_detail::build_grammar(schema)) {
    for (auto& cb : grammar_.callbacks)
      bodies_.push_back(
          adv_detail::enumerate_bodies(grammar_, cb, schema_.bounds));
  }

  const std::vector<CallbackSig>& callbacks() const {
    return grammar_.callbacks;
  }
  adv_detail::Grammar& grammar() { return grammar_; }
  const std::vector<std::vector<std::vector<StmtPtr>>>& bodies() const {
    return bodies_;
  }

  std::uint64_t body_combos() const {
    std::uint64_t n = 1;
    for (auto& b : bodies_) n *= b.empty() ? 1 : b.size();
    return n;
  }

  std::vector<adv_detail::TypedName> base_env() const {
    std::vector<adv_detail::TypedName> env;
    env.push_back({"this", Type::klass("Atk")});
    std::vector<std::pair<std::string, std::string>> named;
    for (auto& seed : schema_.seed.seeds)
      if (!seed.name.empty()) named.emplace_back(seed.name, seed.cls);
    std::sort(named.begin(), named.end());
    for (auto& [n, c] : named) env.push_back({n, Type::klass(c)});
    return env;
  }

  bool driver_triggers_callbacks(const std::vector<StmtPtr>& driver) const {
    if (grammar_.callbacks.empty()) return false;
    for (auto& s : driver) {
      if (s->kind != Stmt::Kind::Call) continue;
      for (auto& [cls, ms] : grammar_.publics)
        for (const MethodDef* m : ms)
          if (m->name == s->member &&
              grammar_.reaches_external.count(cls + "::" + m->name))
            return true;
    }
    return false;
  }

  // Plain enumeration (used by the counting oracle and tests); the search
  // itself drives the DFS with state sharing instead.
  std::uint64_t enumerate(
      const std::function<bool(const AttackProgram&, std::uint64_t)>& visit) {
    std::uint64_t index = 0;
    bool stop = false;
    std::vector<adv_detail::TypedName> env = base_env();
    std::vector<StmtPtr> driver;
    std::function<void(std::vector<adv_detail::TypedName>&, int, int)> go =
        [&](std::vector<adv_detail::TypedName>& e, int objs_left, int fresh) {
          if (stop) return;
          if (!adv_detail::has_dead_definition(driver))
            emit(driver, index, visit, stop);
          if (stop || driver.size() >= (size_t)schema_.bounds.max_stmts)
            return;
          adv_detail::enumerate_position(
              grammar_, e, objs_left, true, false, fresh,
              [&](const StmtPtr& s, const std::optional<Type>& t) {
                if (stop) return;
                driver.push_back(s);
                bool fresh_used = t.has_value();
                if (fresh_used)
                  e.push_back(
                      adv_detail::TypedName{"v" + std::to_string(fresh), *t});
                go(e, objs_left - (s->kind == Stmt::Kind::New ? 1 : 0),
                   fresh + (fresh_used ? 1 : 0));
                if (fresh_used) e.pop_back();
                driver.pop_back();
              });
        };
    go(env, schema_.bounds.max_objects, 1);
    return index;
  }

  const AttackSchema& schema() const { return schema_; }

 private:
  void emit(const std::vector<StmtPtr>& driver, std::uint64_t& index,
            const std::function<bool(const AttackProgram&, std::uint64_t)>&
                visit,
            bool& stop) {
    AttackProgram prog;
    prog.driver = driver;
    prog.callback_bodies.assign(grammar_.callbacks.size(), {});
    if (!driver_triggers_callbacks(driver)) {
      if (!visit(prog, index++)) stop = true;
      return;
    }
    std::function<void(size_t)> per_cb = [&](size_t ci) {
      if (stop) return;
      if (ci == grammar_.callbacks.size()) {
        if (!visit(prog, index++)) stop = true;
        return;
      }
      for (auto& b : bodies_[ci]) {
        prog.callback_bodies[ci] = b;
        per_cb(ci + 1);
        if (stop) return;
      }
    };
    per_cb(0);
  }

  const AttackSchema& schema_;
  adv_detail::Grammar grammar_;
  std::vector<std::vector<std::vector<StmtPtr>>> bodies_;
};

inline std::string show_attack(const AttackProgram& p,
                               const std::vector<CallbackSig>& cbs) {
  std::ostringstream os;
  os << "// driver\n";
  for (auto& s : p.driver) os << show_stmt_inline(s) << ";\n";
  for (size_t i = 0; i < cbs.size() && i < p.callback_bodies.size(); ++i) {
    os << "// Atk::" << cbs[i].name << "\n";
    for (auto& s : p.callback_bodies[i])
      os << "  " << show_stmt_inline(s) << ";\n";
    os << "  res := 0;\n";
  }
  return os.str();
}

// ---- the search ------------------------------------------------------------------

struct PreparedSearch {
  LinkedProgram prog;
  State base;
  size_t attacker_module = 0;
};

inline Outcome<PreparedSearch> prepare_search(const AttackSchema& schema,
                                              AttackEnumerator& en) {
  ModuleDef atk_mod;
  atk_mod.name = "M_atk";
  ClassDef atk = adv_detail::make_attacker_class(en.grammar());
  atk_mod.classes.emplace("Atk", std::move(atk));
  std::vector<ModuleDef> ext = schema.externals;
  ext.push_back(std::move(atk_mod));
  PreparedSearch ps;
  try {
    ps.prog = link(schema.internal, ext);
  } catch (const LinkError& e) {
    return Outcome<PreparedSearch>::err(e.what());
  }
  ps.attacker_module = ext.size();
  auto st = build_scenario_state(ps.prog, schema.seed);
  if (!st) return Outcome<PreparedSearch>::err(st.error());
  State s = *st;
  const ClassDef* atk_cd = ps.prog.klass("Atk");
  Object o;
  o.cls = "Atk";
  for (auto& f : atk_cd->fields) o.fields.emplace_back(f.name, Value::null());
  Addr atk_addr = s.alloc(std::move(o));
  s.top().vars["this"] = Value::address(atk_addr);
  ps.base = std::move(s);
  return ps;
}

namespace adv_detail {

struct LiveInv {
  std::string conjunct;
  std::string instantiation;
  AssertPtr body;
};

// One worker: owns a full copy of the linked program (callback bodies are
// swapped in place per candidate) and walks its share of the driver DFS.
class SearchWorker {
 public:
  SearchWorker(const AttackSchema& schema, AttackEnumerator& en,
               const PreparedSearch& ps, const std::vector<LiveInv>& live,
               std::int64_t budget, int lanes, int lane)
      : schema_(schema),
        en_(en),
        prog_(ps.prog),
        base_(ps.base),
        live_(live),
        budget_(budget),
        lanes_(lanes),
        lane_(lane) {
    atk_cls_ = &prog_.module_mut(ps.attacker_module).classes.at("Atk");
    install_bodies(std::vector<std::vector<StmtPtr>>(
        en.callbacks().size(), std::vector<StmtPtr>{}));
  }

  bool found = false;
  std::vector<int> found_path;  // DFS position path, for the canonical winner
  AttackProgram found_prog;
  const LiveInv* found_hit = nullptr;
  std::uint64_t emitted = 0;

  void run() {
    std::vector<TypedName> env = en_.base_env();
    std::vector<StmtPtr> driver;
    std::vector<int> path;
    // the empty driver is lane 0's candidate; it runs no statements
    if (lane_ == 0) ++emitted;
    dfs(env, schema_.bounds.max_objects, 1, driver, &base_, path, 0);
  }

 private:
  // sigma is the state after the driver prefix, or null once execution has
  // ended (stuck, diverged, or a deeper violation already found): appended
  // statements never run, so the subtree is enumerated without execution.
  void dfs(std::vector<TypedName>& env, int objs_left, int fresh,
           std::vector<StmtPtr>& driver, const State* sigma,
           std::vector<int>& path, int depth) {
    if (found || driver.size() >= (size_t)schema_.bounds.max_stmts) return;
    int position = 0;
    enumerate_position(
        en_.grammar(), env, objs_left, true, false, fresh,
        [&](const StmtPtr& s, const std::optional<Type>& t) {
          int my_pos = position++;
          if (found) return;
          if (depth == 0 && lanes_ > 1 && (my_pos % lanes_) != lane_) return;
          driver.push_back(s);
          path.push_back(my_pos);
          bool fresh_used = t.has_value();
          if (fresh_used)
            env.push_back(TypedName{"v" + std::to_string(fresh), *t});

          std::optional<State> next;
          if (sigma) next = extend(*sigma, s, driver, path);
          if (!found)
            dfs(env, objs_left - (s->kind == Stmt::Kind::New ? 1 : 0),
                fresh + (fresh_used ? 1 : 0), driver,
                next ? &*next : nullptr, path, depth + 1);

          if (fresh_used) env.pop_back();
          path.pop_back();
          driver.pop_back();
        });
  }

  // Runs the appended statement from the prefix state, checking the live
  // invariant instances at every new external state, then emits the
  // candidate (including its callback-body variants).
  std::optional<State> extend(const State& from, const StmtPtr& s,
                              const std::vector<StmtPtr>& driver,
                              const std::vector<int>& path) {
    bool triggers = en_.driver_triggers_callbacks(driver);
    std::optional<State> after;
    if (!triggers) {
      const LiveInv* hit = nullptr;
      after = run_stmts(from, {s}, &hit);
      if (hit) {
        record(driver, default_bodies(), hit, path);
        return std::nullopt;
      }
      if (!has_dead_definition(driver)) ++emitted;
      return after;
    }
    // callback bodies matter: run the whole driver per combo
    std::vector<size_t> combo(en_.callbacks().size(), 0);
    bool dead = has_dead_definition(driver);
    std::optional<State> trivial_after;
    for (;;) {
      bool trivial = true;
      for (auto& c : combo) trivial &= c == 0;
      std::vector<std::vector<StmtPtr>> bodies;
      for (size_t i = 0; i < combo.size(); ++i)
        bodies.push_back(en_.bodies()[i].empty()
                             ? std::vector<StmtPtr>{}
                             : en_.bodies()[i][combo[i]]);
      if (!dead || trivial) {
        install_bodies(bodies);
        const LiveInv* hit = nullptr;
        std::optional<State> end;
        if (trivial) {
          end = run_stmts(from, {s}, &hit);
          trivial_after = end;
        } else {
          State st = base_;
          st.top().cont.items = driver;
          // re-check from the base: the bodies change every step
          const LiveInv* hit0 = check_state(st);
          if (hit0) {
            hit = hit0;
          } else {
            end = run_whole(st, &hit);
          }
        }
        if (!dead) ++emitted;
        if (hit) {
          record(driver, bodies, hit, path);
          install_bodies(default_bodies());
          return std::nullopt;
        }
      }
      // next combo
      size_t i = combo.size();
      for (; i-- > 0;) {
        if (!en_.bodies()[i].empty() && ++combo[i] < en_.bodies()[i].size())
          break;
        combo[i] = 0;
      }
      if (i == static_cast<size_t>(-1)) break;
    }
    install_bodies(default_bodies());
    return trivial_after;
  }

  std::vector<std::vector<StmtPtr>> default_bodies() const {
    return std::vector<std::vector<StmtPtr>>(en_.callbacks().size(),
                                             std::vector<StmtPtr>{});
  }

  void install_bodies(const std::vector<std::vector<StmtPtr>>& bodies) {
    for (size_t i = 0; i < en_.callbacks().size(); ++i) {
      std::vector<StmtPtr> body =
          i < bodies.size() ? bodies[i] : std::vector<StmtPtr>{};
      body.push_back(Stmt::assign("res", Expr::lit(Value::integer(0))));
      MethodDef& m = atk_cls_->methods[i];
      m.body = seq_of(body);
      m.locals.clear();
      std::set<std::string> bound{"this", "res"};
      for (auto& p : m.params) bound.insert(p.name);
      std::set<std::string> targets;
      detail::collect_assign_targets(m.body, targets);
      for (auto& t : targets)
        if (!bound.count(t)) m.locals.push_back(t);
    }
  }

  const LiveInv* check_state(const State& s) {
    auto ext = is_external(prog_, s);
    if (!ext || !*ext) return nullptr;
    for (auto& li : live_)
      if (sat(prog_, s, li.body, kDefaultGhostFuel) == Sat::Fails) return &li;
    return nullptr;
  }

  std::optional<State> run_stmts(const State& from,
                                 const std::vector<StmtPtr>& stmts,
                                 const LiveInv** hit) {
    State st = from;
    auto& items = st.top().cont.items;
    items.clear();
    for (auto& s : stmts) flatten_into(s, items);
    return run_whole(st, hit);
  }

  std::optional<State> run_whole(const State& start, const LiveInv** hit) {
    std::optional<State> final_state;
    auto visit = [&](const State& s, StepKind) -> bool {
      const LiveInv* h = check_state(s);
      if (h) {
        *hit = h;
        return false;
      }
      if (s.depth() == start.depth() && s.top().cont.empty()) final_state = s;
      return true;
    };
    ScopedTrace tr = scoped_walk(prog_, start, budget_, visit, false);
    if (*hit) return std::nullopt;
    if (tr.end == ScopedTrace::End::Final && final_state) return final_state;
    return std::nullopt;  // stuck or budget: appended statements never run
  }

  void record(const std::vector<StmtPtr>& driver,
              const std::vector<std::vector<StmtPtr>>& bodies,
              const LiveInv* hit, const std::vector<int>& path) {
    found = true;
    found_path = path;
    found_prog.driver = driver;
    found_prog.callback_bodies = bodies;
    found_hit = hit;
  }

  const AttackSchema& schema_;
  AttackEnumerator& en_;
  LinkedProgram prog_;
  State base_;
  ClassDef* atk_cls_ = nullptr;
  const std::vector<LiveInv>& live_;
  std::int64_t budget_;
  int lanes_;
  int lane_;
};

}  // namespace adv_detail

// Exhaustive first-counterexample search in canonical (DFS) order. Invariant
// conjuncts take the fast path: pre-instantiated at the fixed base state and
// re-checked at every external state of each candidate run. Method-spec
// conjuncts fall back to per-call-site monitoring.
inline SearchResult attack_search(const AttackSchema& schema, const Spec& spec,
                                  const MonitorOptions& mopt_in = {},
                                  int threads = 2) {
  AttackEnumerator en(schema);
  SearchResult out;
  auto prep = prepare_search(schema, en);
  if (!prep) return out;
  PreparedSearch& ps = *prep;

  MonitorOptions mopt = mopt_in;
  mopt.budget = schema.bounds.budget;
  mopt.record_witness = false;

  std::vector<adv_detail::LiveInv> live;
  std::vector<const MethodSpec*> method_conjuncts;
  for (auto& c : spec.conjuncts) {
    if (c.kind == SpecConjunct::Kind::Method) {
      method_conjuncts.push_back(&c.ms);
      continue;
    }
    auto tuples =
        instantiation_tuples(ps.prog, ps.base, c.inv.binders, mopt.max_tuples);
    for (auto& t : tuples) {
      AssertPtr inst = instantiate(c.inv.body, c.inv.binders, t);
      if (sat(ps.prog, ps.base, inst, mopt.fuel) != Sat::Holds) continue;
      std::ostringstream os;
      for (size_t i = 0; i < t.size(); ++i)
        os << c.inv.binders[i].name << "=" << t[i].show() << " ";
      live.push_back({c.inv.name, os.str(), inst});
    }
  }

  if (!method_conjuncts.empty()) threads = 1;  // keep the slow path simple

  std::vector<std::unique_ptr<adv_detail::SearchWorker>> workers;
  int lanes = std::max(1, threads);
  for (int i = 0; i < lanes; ++i)
    workers.push_back(std::make_unique<adv_detail::SearchWorker>(
        schema, en, ps, live, schema.bounds.budget, lanes, i));
  if (lanes == 1) {
    workers[0]->run();
  } else {
    std::vector<std::thread> ts;
    for (auto& w : workers)
      ts.emplace_back([&w] { w->run(); });
    for (auto& t : ts) t.join();
  }

  std::uint64_t total = 0;
  adv_detail::SearchWorker* winner = nullptr;
  for (auto& w : workers) {
    total += w->emitted;
    if (w->found &&
        (!winner || std::lexicographical_compare(
                        w->found_path.begin(), w->found_path.end(),
                        winner->found_path.begin(), winner->found_path.end())))
      winner = w.get();
  }
  out.candidates = total;

  // method-spec conjuncts: monitor call sites per candidate (slow path)
  if (!winner && !method_conjuncts.empty()) {
    AttackEnumerator en2(schema);
    auto prep2 = prepare_search(schema, en2);
    PreparedSearch& p2 = *prep2;
    ModuleDef& atk_mod = p2.prog.module_mut(p2.attacker_module);
    ClassDef& atk_cls = atk_mod.classes.at("Atk");
    bool stop_found = false;
    Counterexample cex;
    auto visit = [&](const AttackProgram& cand, std::uint64_t index) -> bool {
      for (size_t i = 0; i < en2.callbacks().size(); ++i) {
        std::vector<StmtPtr> body = cand.callback_bodies[i];
        body.push_back(Stmt::assign("res", Expr::lit(Value::integer(0))));
        atk_cls.methods[i].body = seq_of(body);
      }
      State st = p2.base;
      st.top().cont.items = cand.driver;
      for (const MethodSpec* ms : method_conjuncts) {
        std::vector<State> sites;
        if (!st.top().cont.empty() &&
            st.top().cont.head()->kind == Stmt::Kind::Call &&
            st.top().cont.head()->member == ms->method)
          sites.push_back(st);
        auto vs = [&](const State& s, StepKind) {
          if (!s.top().cont.empty() &&
              s.top().cont.head()->kind == Stmt::Kind::Call &&
              s.top().cont.head()->member == ms->method)
            sites.push_back(s);
          return true;
        };
        scoped_walk(p2.prog, st, mopt.budget, vs, false);
        for (auto& site : sites) {
          Verdict v = check_methodspec_all(p2.prog, *ms, site, mopt);
          if (v.violated()) {
            stop_found = true;
            cex.conjunct = ms->name;
            cex.instantiation = v.why;
            cex.program_text = show_attack(cand, en2.callbacks());
            cex.candidate_index = index;
            return false;
          }
        }
      }
      return true;
    };
    en2.enumerate(visit);
    if (stop_found) {
      out.found = true;
      out.cex = cex;
      return out;
    }
  }

  if (winner) {
    out.found = true;
    out.cex.conjunct = winner->found_hit->conjunct;
    out.cex.instantiation = winner->found_hit->instantiation;
    out.cex.program_text = show_attack(winner->found_prog, en.callbacks());
    // replay for the witness trace
    AttackEnumerator en3(schema);
    auto prep3 = prepare_search(schema, en3);
    PreparedSearch& p3 = *prep3;
    ModuleDef& atk_mod = p3.prog.module_mut(p3.attacker_module);
    ClassDef& atk_cls = atk_mod.classes.at("Atk");
    for (size_t i = 0; i < en3.callbacks().size(); ++i) {
      std::vector<StmtPtr> body;
      if (i < winner->found_prog.callback_bodies.size())
        body = winner->found_prog.callback_bodies[i];
      body.push_back(Stmt::assign("res", Expr::lit(Value::integer(0))));
      atk_cls.methods[i].body = seq_of(body);
    }
    State st = p3.base;
    st.top().cont.items = winner->found_prog.driver;
    ScopedTrace tr = scoped_walk(p3.prog, st, schema.bounds.budget, nullptr, true);
    out.cex.witness_trace = trace_jsonl(tr);
  }
  return out;
}

}  // namespace loo
