// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loo/classify.hpp"
#include "loo/sp.hpp"

namespace loo {

struct Assumption {
  std::string name;
  AssertPtr lhs;
  AssertPtr rhs;
};

// The assertion entailment M |- A -> A': propositional structure, congruence
// over ground terms with alias case splits on the conditionals produced by
// the weakest-precondition transformer, difference-style linear facts over
// ints, and the protection axioms of the scalar/internal extension
// (Prot-Int/Bool/Str, Prot-Neq, Prot-Intl) plus null-protection facts.
// Unknown is a first-class answer; named assumptions can discharge it.

namespace entail_detail {

struct Lit {
  AssertPtr atom;
  bool pos = true;
};

struct Node {
  enum class Kind { And, Or, Lit };
  Kind kind;
  std::vector<Node> children;
  Lit lit;
};

inline bool is_true_lit(const AssertPtr& a) {
  return a->kind == Assertion::Kind::Expr && a->e->kind == Expr::Kind::Lit &&
         a->e->litval == Value::boolean(true);
}
inline bool is_false_lit(const AssertPtr& a) {
  return a->kind == Assertion::Kind::Expr && a->e->kind == Expr::Kind::Lit &&
         a->e->litval == Value::boolean(false);
}

inline Node nnf(const AssertPtr& a, bool pos) {
  switch (a->kind) {
    case Assertion::Kind::Not:
      return nnf(a->a, !pos);
    case Assertion::Kind::And: {
      Node n;
      n.kind = pos ? Node::Kind::And : Node::Kind::Or;
      n.children.push_back(nnf(a->a, pos));
      n.children.push_back(nnf(a->b, pos));
      return n;
    }
    default: {
      Node n;
      n.kind = Node::Kind::Lit;
      n.lit = Lit{a, pos};
      return n;
    }
  }
}

// ---- congruence closure over printed term keys --------------------------------

struct Terms {
  std::map<std::string, ExprPtr> exprs;      // key -> representative expr
  std::map<std::string, std::string> parent;

  std::string key(const ExprPtr& e) { return show_expr(e); }

  std::string intern(const ExprPtr& e) {
    std::string k = key(e);
    if (!exprs.count(k)) {
      exprs[k] = e;
      parent[k] = k;
      if (e->kind == Expr::Kind::Field || e->kind == Expr::Kind::Ghost)
        intern(e->a);
      if (e->kind == Expr::Kind::Binary) {
        intern(e->a);
        intern(e->b);
      }
      if (e->kind == Expr::Kind::Ghost)
        for (auto& x : e->args) intern(x);
    }
    return k;
  }

  std::string find(const std::string& k) {
    auto it = parent.find(k);
    if (it == parent.end()) {
      parent[k] = k;
      return k;
    }
    if (it->second == k) return k;
    std::string r = find(it->second);
    parent[k] = r;
    return r;
  }

  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent[ra] = rb;
  }
};

struct Solver {
  const ModuleDef* mod = nullptr;
  std::vector<Lit> hyps;
  Terms terms;
  std::vector<std::pair<std::string, std::string>> diseqs;  // by key (unrooted)
  std::map<std::string, std::string> rep_class;  // rep -> class/scalar name
  std::set<std::string> confined_cache_valid;
  std::map<std::string, bool> confined;
  bool contradictory = false;

  // ---- setup -----------------------------------------------------------------

  void add_expr(const ExprPtr& e) { terms.intern(e); }

  void add_lit(const Lit& l) {
    hyps.push_back(l);
    collect_atom_exprs(l.atom);
  }

  void collect_atom_exprs(const AssertPtr& a) {
    switch (a->kind) {
      case Assertion::Kind::ProtectedFrom:
        add_expr(a->e);
        add_expr(a->e2);
        break;
      case Assertion::Kind::All:
        break;  // opaque
      default:
        if (a->e) add_expr(a->e);
        break;
    }
  }

  static bool int_op(BinOp op) {
    return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Lt ||
           op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge;
  }

  void close() {
    // seed equalities from hypothesis literals
    for (auto& l : hyps) {
      const AssertPtr& a = l.atom;
      if (a->kind != Assertion::Kind::Expr) continue;
      const ExprPtr& e = a->e;
      if (e->kind != Expr::Kind::Binary) continue;
      if ((e->op == BinOp::Eq && l.pos) || (e->op == BinOp::Ne && !l.pos))
        terms.unite(terms.intern(e->a), terms.intern(e->b));
      if ((e->op == BinOp::Ne && l.pos) || (e->op == BinOp::Eq && !l.pos))
        diseqs.emplace_back(terms.intern(e->a), terms.intern(e->b));
    }
    // congruence + constant folding to fixpoint
    for (bool changed = true; changed;) {
      changed = false;
      std::map<std::string, std::string> sig_to;
      std::vector<std::pair<std::string, std::string>> unions;
      for (auto& [k, e] : terms.exprs) {
        std::string sig;
        if (e->kind == Expr::Kind::Field) {
          sig = "F:" + e->name + ":" + terms.find(terms.key(e->a));
        } else if (e->kind == Expr::Kind::Binary) {
          sig = std::string("B:") + show(e->op) + ":" +
                terms.find(terms.key(e->a)) + ":" + terms.find(terms.key(e->b));
        } else {
          continue;
        }
        auto [it, fresh] = sig_to.emplace(sig, k);
        if (!fresh && terms.find(it->second) != terms.find(k))
          unions.emplace_back(it->second, k);
      }
      for (auto& [a, b] : unions) {
        terms.unite(a, b);
        changed = true;
      }
      // fold integer arithmetic over literal representatives
      std::vector<std::pair<std::string, ExprPtr>> folds;
      for (auto& [k, e] : terms.exprs) {
        if (e->kind != Expr::Kind::Binary) continue;
        if (e->op != BinOp::Add && e->op != BinOp::Sub) continue;
        auto la = lit_of(terms.find(terms.key(e->a)));
        auto lb = lit_of(terms.find(terms.key(e->b)));
        if (la && lb && la->is_int() && lb->is_int()) {
          std::int64_t v = e->op == BinOp::Add
                               ? la->as_int() + lb->as_int()
                               : la->as_int() - lb->as_int();
          folds.emplace_back(k, Expr::lit(Value::integer(v)));
        }
      }
      for (auto& [k, litv] : folds) {
        std::string lk = terms.intern(litv);
        if (terms.find(lk) != terms.find(k)) {
          terms.unite(k, lk);
          changed = true;
        }
      }
    }
    derive_classes();
    check_contradiction();
  }

  std::optional<Value> lit_of(const std::string& rep) {
    for (auto& [k, e] : terms.exprs)
      if (terms.find(k) == rep && e->kind == Expr::Kind::Lit) return e->litval;
    return std::nullopt;
  }

  void derive_classes() {
    // class facts from hypotheses
    for (auto& l : hyps) {
      if (!l.pos) continue;
      if (l.atom->kind == Assertion::Kind::HasClass)
        rep_class[terms.find(terms.key(l.atom->e))] = l.atom->cls;
    }
    // literal scalars and arithmetic results
    for (auto& [k, e] : terms.exprs) {
      std::string r = terms.find(k);
      if (rep_class.count(r)) continue;
      if (e->kind == Expr::Kind::Lit) {
        switch (e->litval.kind()) {
          case Value::Kind::Int: rep_class[r] = "int"; break;
          case Value::Kind::Bool: rep_class[r] = "bool"; break;
          case Value::Kind::Str: rep_class[r] = "str"; break;
          default: break;
        }
      } else if (e->kind == Expr::Kind::Binary &&
                 (e->op == BinOp::Add || e->op == BinOp::Sub)) {
        rep_class[r] = "int";
      }
    }
    // field-type chains through declared classes, to fixpoint
    for (bool changed = true; changed;) {
      changed = false;
      for (auto& [k, e] : terms.exprs) {
        std::string r = terms.find(k);
        if (rep_class.count(r)) continue;
        std::optional<Type> t;
        if (e->kind == Expr::Kind::Field) {
          auto rc = rep_class.find(terms.find(terms.key(e->a)));
          if (rc != rep_class.end() && mod && mod->defines(rc->second)) {
            const ClassDef* cd = mod->klass(rc->second);
            const FieldDef* fd = cd->field(e->name);
            if (fd) t = fd->type;
            const GhostDef* gd = cd->ghost(e->name);
            if (!fd && gd && gd->params.empty()) t = gd->ret;
          }
        } else if (e->kind == Expr::Kind::Ghost) {
          auto rc = rep_class.find(terms.find(terms.key(e->a)));
          if (rc != rep_class.end() && mod && mod->defines(rc->second)) {
            const GhostDef* gd = mod->klass(rc->second)->ghost(e->name);
            if (gd) t = gd->ret;
          }
        }
        if (t) {
          rep_class[r] = t->show();
          changed = true;
        }
      }
    }
  }

  bool scalar_class(const std::string& c) const {
    return c == "int" || c == "nat" || c == "bool" || c == "str";
  }

  std::optional<std::string> class_of(const ExprPtr& e) {
    std::string r = terms.find(terms.intern(e));
    auto it = rep_class.find(r);
    if (it != rep_class.end()) return it->second;
    // goal expressions are interned after closure: type them on demand
    std::optional<std::string> res;
    switch (e->kind) {
      case Expr::Kind::Lit:
        switch (e->litval.kind()) {
          case Value::Kind::Int: res = "int"; break;
          case Value::Kind::Bool: res = "bool"; break;
          case Value::Kind::Str: res = "str"; break;
          default: break;
        }
        break;
      case Expr::Kind::Binary:
        res = (e->op == BinOp::Add || e->op == BinOp::Sub) ? "int" : "bool";
        break;
      case Expr::Kind::Field: {
        auto rc = class_of(e->a);
        if (rc && mod && mod->defines(*rc)) {
          const ClassDef* cd = mod->klass(*rc);
          if (const FieldDef* fd = cd->field(e->name)) res = fd->type.show();
          else if (const GhostDef* gd = cd->ghost(e->name))
            if (gd->params.empty()) res = gd->ret.show();
        }
        break;
      }
      case Expr::Kind::Ghost: {
        auto rc = class_of(e->a);
        if (rc && mod && mod->defines(*rc)) {
          const GhostDef* gd = mod->klass(*rc)->ghost(e->name);
          if (gd) res = gd->ret.show();
        }
        break;
      }
      default:
        break;
    }
    if (res) rep_class[r] = *res;
    return res;
  }

  bool is_int_typed(const ExprPtr& e) {
    auto c = class_of(e);
    return c && (*c == "int" || *c == "nat");
  }

  bool is_internal_typed(const ExprPtr& e) {
    for (auto& l : hyps)
      if (l.pos && l.atom->kind == Assertion::Kind::Internal &&
          same_rep(l.atom->e, e))
        return true;
    auto c = class_of(e);
    return c && mod && mod->defines(*c);
  }

  bool same_rep(const ExprPtr& a, const ExprPtr& b) {
    return terms.find(terms.intern(a)) == terms.find(terms.intern(b));
  }

  // Prot-Intl: every path out of class C stays internal or scalar.
  bool is_confined(const std::string& cls) {
    if (!mod || !mod->defines(cls)) return false;
    auto it = confined.find(cls);
    if (it != confined.end()) return it->second;
    // assume confined, then refute; handles cyclic class graphs
    confined[cls] = true;
    bool ok = true;
    const ClassDef* cd = mod->klass(cls);
    for (auto& f : cd->fields) {
      if (f.type.is_scalar()) continue;
      if (!f.type.is_class() || !mod->defines(f.type.cls) ||
          !is_confined(f.type.cls)) {
        ok = false;
        break;
      }
    }
    confined[cls] = ok;
    return ok;
  }

  // ---- disequality -------------------------------------------------------------

  bool provably_distinct(const ExprPtr& a, const ExprPtr& b) {
    std::string ra = terms.find(terms.intern(a));
    std::string rb = terms.find(terms.intern(b));
    if (ra == rb) return false;
    for (auto& [x, y] : diseqs) {
      std::string rx = terms.find(x), ry = terms.find(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
    }
    auto la = lit_of(ra);
    auto lb = lit_of(rb);
    if (la && lb && !(*la == *lb)) return true;
    // one side a class instance, the other null
    auto ca = rep_class.find(ra);
    auto cb = rep_class.find(rb);
    if (la && la->is_null() && cb != rep_class.end()) return true;
    if (lb && lb->is_null() && ca != rep_class.end()) return true;
    // addresses of different classes are never aliases
    if (ca != rep_class.end() && cb != rep_class.end() &&
        ca->second != cb->second) {
      bool scalar_mismatch =
          scalar_class(ca->second) != scalar_class(cb->second);
      bool class_pair =
          !scalar_class(ca->second) && !scalar_class(cb->second);
      bool int_nat = (ca->second == "int" && cb->second == "nat") ||
                     (ca->second == "nat" && cb->second == "int");
      if ((class_pair || scalar_mismatch) && !int_nat) return true;
    }
    // Prot-Neq: protectedFrom(e, e') and internal(e) give e != e'
    for (auto& l : hyps) {
      if (!l.pos || l.atom->kind != Assertion::Kind::ProtectedFrom) continue;
      if (((same_rep(l.atom->e, a) && same_rep(l.atom->e2, b)) ||
           (same_rep(l.atom->e, b) && same_rep(l.atom->e2, a))) &&
          is_internal_typed(l.atom->e))
        return true;
    }
    // linear arithmetic: a - b strictly positive or negative
    if (is_int_typed(a) && is_int_typed(b)) {
      ExprPtr diff = Expr::binary(BinOp::Sub, a, b);
      if (prove_linear(diff, +1) || prove_linear_neg(diff)) return true;
    }
    return false;
  }

  // ---- linear facts --------------------------------------------------------------

  using Lin = std::map<std::string, std::int64_t>;  // rep -> coefficient; "" const

  std::optional<Lin> linearize(const ExprPtr& e) {
    std::string r = terms.find(terms.intern(e));
    auto lv = lit_of(r);
    if (lv && lv->is_int()) return Lin{{"", lv->as_int()}};
    if (e->kind == Expr::Kind::Binary &&
        (e->op == BinOp::Add || e->op == BinOp::Sub)) {
      auto la = linearize(e->a);
      auto lb = linearize(e->b);
      if (!la || !lb) return std::nullopt;
      Lin out = *la;
      for (auto& [k, c] : *lb) out[k] += (e->op == BinOp::Add ? c : -c);
      return out;
    }
    if (!is_int_typed(e)) return std::nullopt;
    return Lin{{r, 1}};
  }

  static void lin_sub(Lin& a, const Lin& b, std::int64_t scale) {
    for (auto& [k, c] : b) a[k] -= scale * c;
  }
  static bool lin_zero_vars(const Lin& l) {
    for (auto& [k, c] : l)
      if (!k.empty() && c != 0) return false;
    return true;
  }
  static std::int64_t lin_const(const Lin& l) {
    auto it = l.find("");
    return it == l.end() ? 0 : it->second;
  }

  struct LinFacts {
    std::vector<Lin> eqs;   // == 0
    std::vector<Lin> geqs;  // >= 0
  };

  LinFacts gather_linear() {
    LinFacts lf;
    for (auto& l : hyps) {
      if (l.atom->kind != Assertion::Kind::Expr) continue;
      const ExprPtr& e = l.atom->e;
      if (e->kind != Expr::Kind::Binary) continue;
      bool ints = (is_int_typed(e->a) || linearize(e->a)) &&
                  (is_int_typed(e->b) || linearize(e->b));
      if (!ints) continue;
      auto la = linearize(e->a);
      auto lb = linearize(e->b);
      if (!la || !lb) continue;
      Lin d = *la;
      lin_sub(d, *lb, 1);  // d = a - b
      BinOp op = e->op;
      bool pos = l.pos;
      if (!pos) {  // integer negation flips
        switch (op) {
          case BinOp::Eq: continue;  // handled as disequality
          case BinOp::Ne: op = BinOp::Eq; break;
          case BinOp::Lt: op = BinOp::Ge; break;
          case BinOp::Le: op = BinOp::Gt; break;
          case BinOp::Gt: op = BinOp::Le; break;
          case BinOp::Ge: op = BinOp::Lt; break;
          default: continue;
        }
      }
      switch (op) {
        case BinOp::Eq: lf.eqs.push_back(d); break;
        case BinOp::Ge: lf.geqs.push_back(d); break;
        case BinOp::Gt: {
          Lin g = d;
          g[""] -= 1;
          lf.geqs.push_back(g);
          break;
        }
        case BinOp::Le: {
          Lin g;
          lin_sub(g, d, 1);
          lf.geqs.push_back(g);
          break;
        }
        case BinOp::Lt: {
          Lin g;
          lin_sub(g, d, 1);
          g[""] -= 1;
          lf.geqs.push_back(g);
          break;
        }
        default: break;
      }
    }
    // nat-typed terms are non-negative
    for (auto& [k, e] : terms.exprs) {
      std::string r = terms.find(k);
      auto it = rep_class.find(r);
      if (it != rep_class.end() && it->second == "nat" && terms.find(k) == k)
        lf.geqs.push_back(Lin{{r, 1}});
    }
    return lf;
  }

  static void eliminate_eqs(LinFacts& lf, Lin& goal) {
    for (auto& eq : lf.eqs) {
      std::string pivot;
      for (auto& [k, c] : eq)
        if (!k.empty() && c != 0 && (c == 1 || c == -1)) {
          pivot = k;
          break;
        }
      if (pivot.empty()) continue;
      std::int64_t pc = eq.at(pivot);
      auto apply = [&](Lin& l) {
        auto it = l.find(pivot);
        if (it == l.end() || it->second == 0) return;
        std::int64_t c = it->second;
        // l -= (c/pc) * eq  (pc is +-1)
        lin_sub(l, eq, c * pc);
      };
      apply(goal);
      for (auto& g : lf.geqs) apply(g);
    }
  }

  // prove  e >= lower  (lower: 0 or 1 for strict positivity)
  bool prove_linear(const ExprPtr& e, std::int64_t lower) {
    auto le = linearize(e);
    if (!le) return false;
    Lin goal = *le;
    goal[""] -= lower;
    return prove_lin_geq(goal);
  }
  bool prove_linear_neg(const ExprPtr& e) {
    auto le = linearize(e);
    if (!le) return false;
    Lin goal;
    lin_sub(goal, *le, 1);
    goal[""] -= 1;  // -e - 1 >= 0  i.e.  e <= -1
    return prove_lin_geq(goal);
  }

  bool prove_lin_geq(Lin goal) {
    LinFacts lf = gather_linear();
    eliminate_eqs(lf, goal);
    if (lin_zero_vars(goal)) return lin_const(goal) >= 0;
    // try subtracting up to three inequality facts with unit coefficient
    size_t n = std::min<size_t>(lf.geqs.size(), 16);
    std::vector<int> idx;
    std::function<bool(size_t, Lin)> go = [&](size_t start, Lin g) -> bool {
      if (lin_zero_vars(g)) return lin_const(g) >= 0;
      if (idx.size() >= 3) return false;
      for (size_t i = start; i < n; ++i) {
        Lin g2 = g;
        lin_sub(g2, lf.geqs[i], 1);
        idx.push_back(static_cast<int>(i));
        if (go(i + 1, g2)) return true;
        idx.pop_back();
      }
      return false;
    };
    return go(0, goal);
  }

  bool prove_lin_eq(const ExprPtr& a, const ExprPtr& b) {
    auto la = linearize(a);
    auto lb = linearize(b);
    if (!la || !lb) return false;
    Lin g = *la;
    lin_sub(g, *lb, 1);
    LinFacts lf = gather_linear();
    eliminate_eqs(lf, g);
    return lin_zero_vars(g) && lin_const(g) == 0;
  }

  // ---- contradiction -------------------------------------------------------------

  void check_contradiction() {
    for (auto& [x, y] : diseqs)
      if (terms.find(x) == terms.find(y)) {
        contradictory = true;
        return;
      }
    // distinct literals merged
    std::map<std::string, Value> rep_lit;
    for (auto& [k, e] : terms.exprs) {
      if (e->kind != Expr::Kind::Lit) continue;
      std::string r = terms.find(k);
      auto [it, fresh] = rep_lit.emplace(r, e->litval);
      if (!fresh && !(it->second == e->litval)) {
        contradictory = true;
        return;
      }
    }
    for (auto& l : hyps) {
      if (l.atom->kind == Assertion::Kind::Expr &&
          l.atom->e->kind == Expr::Kind::Lit) {
        bool v = l.atom->e->litval == Value::boolean(true);
        if (v != l.pos && l.atom->e->litval.is_bool()) {
          contradictory = true;
          return;
        }
      }
      // protection of null / of itself
      if (l.pos && l.atom->kind == Assertion::Kind::Protected) {
        auto lv = lit_of(terms.find(terms.intern(l.atom->e)));
        if (lv && lv->is_null()) {
          contradictory = true;
          return;
        }
      }
      if (l.pos && l.atom->kind == Assertion::Kind::ProtectedFrom) {
        auto lv = lit_of(terms.find(terms.intern(l.atom->e)));
        if (lv && lv->is_null()) {
          contradictory = true;
          return;
        }
        if (same_rep(l.atom->e, l.atom->e2) && is_internal_typed(l.atom->e)) {
          contradictory = true;
          return;
        }
      }
    }
    // conflicting equality/inequality chains
    Lin zero;
    LinFacts lf = gather_linear();
    for (auto& eq : lf.eqs) {
      Lin g = eq;
      LinFacts rest = lf;
      eliminate_eqs(rest, g);
      if (lin_zero_vars(g) && lin_const(g) != 0) {
        contradictory = true;
        return;
      }
    }
    Lin impossible;  // prove -1 >= 0 from the facts
    impossible[""] = -1;
    // cheap: any pair of geq facts summing to a negative constant
    for (size_t i = 0; i < lf.geqs.size() && i < 16; ++i) {
      for (size_t j = i; j < lf.geqs.size() && j < 16; ++j) {
        Lin s = lf.geqs[i];
        for (auto& [k, c] : lf.geqs[j]) s[k] += c;
        if (lin_zero_vars(s) && lin_const(s) < 0) {
          contradictory = true;
          return;
        }
      }
    }
  }

  // ---- literal proving -------------------------------------------------------------

  bool hyp_matches(const AssertPtr& atom, bool pos) {
    for (auto& l : hyps) {
      if (l.pos != pos) continue;
      if (atoms_congruent(l.atom, atom)) return true;
    }
    return false;
  }

  bool exprs_congruent(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    return same_rep(a, b);
  }

  bool atoms_congruent(const AssertPtr& a, const AssertPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Assertion::Kind::Expr:
        return exprs_congruent(a->e, b->e);
      case Assertion::Kind::HasClass:
        return a->cls == b->cls && exprs_congruent(a->e, b->e);
      case Assertion::Kind::External:
      case Assertion::Kind::Internal:
      case Assertion::Kind::Protected:
        return exprs_congruent(a->e, b->e);
      case Assertion::Kind::ProtectedFrom:
        return exprs_congruent(a->e, b->e) && exprs_congruent(a->e2, b->e2);
      case Assertion::Kind::All:
        return assert_equal(a, b);
      default:
        return assert_equal(a, b);
    }
  }

  bool prove_bool_expr(const ExprPtr& e, bool want) {
    std::string r = terms.find(terms.intern(e));
    auto lv = lit_of(r);
    if (lv && lv->is_bool()) return lv->as_bool() == want;
    if (e->kind == Expr::Kind::Binary) {
      switch (e->op) {
        case BinOp::Eq:
          if (want) return same_rep(e->a, e->b) || prove_lin_eq(e->a, e->b);
          return provably_distinct(e->a, e->b);
        case BinOp::Ne:
          if (want) return provably_distinct(e->a, e->b);
          return same_rep(e->a, e->b) || prove_lin_eq(e->a, e->b);
        case BinOp::Ge:
        case BinOp::Gt:
        case BinOp::Le:
        case BinOp::Lt: {
          ExprPtr x = e->a, y = e->b;
          BinOp op = e->op;
          if (!want) {
            // integer flips need int-typed operands
            if (!is_int_typed(e->a) || !is_int_typed(e->b)) break;
            switch (e->op) {
              case BinOp::Ge: op = BinOp::Lt; break;
              case BinOp::Gt: op = BinOp::Le; break;
              case BinOp::Le: op = BinOp::Gt; break;
              case BinOp::Lt: op = BinOp::Ge; break;
              default: break;
            }
          }
          ExprPtr diff;
          std::int64_t lower = 0;
          switch (op) {
            case BinOp::Ge: diff = Expr::binary(BinOp::Sub, x, y); break;
            case BinOp::Gt:
              diff = Expr::binary(BinOp::Sub, x, y);
              lower = 1;
              break;
            case BinOp::Le: diff = Expr::binary(BinOp::Sub, y, x); break;
            case BinOp::Lt:
              diff = Expr::binary(BinOp::Sub, y, x);
              lower = 1;
              break;
            default: return false;
          }
          terms.intern(diff);
          if (prove_linear(diff, lower)) return true;
          break;
        }
        default:
          break;
      }
    }
    return hyp_matches(Assertion::expr(e), want);
  }

  bool prove_has_class(const ExprPtr& e, const std::string& cls) {
    auto c = class_of(e);
    if (c) {
      if (*c == cls) return true;
      // a nat-typed term is an int; an int literal >= 0 is a nat
      if (*c == "nat" && cls == "int") return true;
      if (*c == "int" && cls == "nat") {
        terms.intern(e);
        if (prove_linear(e, 0)) return true;
      }
    }
    return hyp_matches(Assertion::has_class(e, cls), true);
  }

  bool prove_external(const ExprPtr& e) {
    if (hyp_matches(Assertion::external(e), true)) return true;
    auto c = class_of(e);
    if (!c) return false;
    if (scalar_class(*c)) return true;  // scalar classes are not in M
    return mod && !mod->defines(*c);
  }

  bool prove_internal(const ExprPtr& e) {
    if (hyp_matches(Assertion::internal(e), true)) return true;
    auto c = class_of(e);
    return c && mod && mod->defines(*c);
  }

  bool prove_protected_from(const ExprPtr& e, const ExprPtr& eo) {
    if (hyp_matches(Assertion::protected_from(e, eo), true)) return true;
    auto co = class_of(eo);
    if (co && scalar_class(*co)) return true;  // Prot-Int / Prot-Bool / Prot-Str
    auto lv = lit_of(terms.find(terms.intern(eo)));
    if (lv && lv->is_null()) return true;  // empty reach
    // Prot-Intl: all paths from eo are internal or scalar
    if (co && is_confined(*co)) {
      auto ce = class_of(e);
      if (ce && *ce != *co) return true;  // different classes cannot alias
      if (provably_distinct(e, eo)) return true;
    }
    return false;
  }

  bool prove_protected(const ExprPtr& e) {
    if (hyp_matches(Assertion::protected_(e), true)) return true;
    auto c = class_of(e);
    return c && scalar_class(*c);  // the scalar extension
  }

  bool prove_atom(const AssertPtr& a, bool pos) {
    switch (a->kind) {
      case Assertion::Kind::Expr:
        return prove_bool_expr(a->e, pos);
      case Assertion::Kind::HasClass:
        if (pos) return prove_has_class(a->e, a->cls);
        return hyp_matches(a, false);
      case Assertion::Kind::External:
        if (pos) return prove_external(a->e);
        return hyp_matches(a, false) || prove_internal(a->e);
      case Assertion::Kind::Internal:
        if (pos) return prove_internal(a->e);
        return hyp_matches(a, false) || prove_external(a->e);
      case Assertion::Kind::ProtectedFrom:
        if (pos) return prove_protected_from(a->e, a->e2);
        return hyp_matches(a, false);
      case Assertion::Kind::Protected:
        if (pos) return prove_protected(a->e);
        return hyp_matches(a, false);
      case Assertion::Kind::All:
        return hyp_matches(a, pos);
      default:
        return false;
    }
  }
};

// ---- conditional splitting -------------------------------------------------------

inline const Expr* find_cond_expr(const ExprPtr& e) {
  if (!e) return nullptr;
  if (e->kind == Expr::Kind::Cond) return e.get();
  const Expr* r = nullptr;
  if (e->a && (r = find_cond_expr(e->a))) return r;
  if (e->b && (r = find_cond_expr(e->b))) return r;
  if (e->c && (r = find_cond_expr(e->c))) return r;
  for (auto& x : e->args)
    if ((r = find_cond_expr(x))) return r;
  return nullptr;
}

inline const Expr* find_cond_assert(const AssertPtr& a) {
  switch (a->kind) {
    case Assertion::Kind::Not:
    case Assertion::Kind::All:
      return find_cond_assert(a->a);
    case Assertion::Kind::And: {
      const Expr* r = find_cond_assert(a->a);
      return r ? r : find_cond_assert(a->b);
    }
    case Assertion::Kind::ProtectedFrom: {
      const Expr* r = find_cond_expr(a->e);
      return r ? r : find_cond_expr(a->e2);
    }
    default:
      return find_cond_expr(a->e);
  }
}

inline ExprPtr resolve_cond(const ExprPtr& e, const ExprPtr& test, bool value) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Cond && expr_equal(e->a, test))
    return resolve_cond(value ? e->b : e->c, test, value);
  switch (e->kind) {
    case Expr::Kind::Field:
      return Expr::field(resolve_cond(e->a, test, value), e->name);
    case Expr::Kind::Ghost: {
      std::vector<ExprPtr> args;
      for (auto& x : e->args) args.push_back(resolve_cond(x, test, value));
      return Expr::ghost(resolve_cond(e->a, test, value), e->name,
                         std::move(args));
    }
    case Expr::Kind::Binary:
      return Expr::binary(e->op, resolve_cond(e->a, test, value),
                          resolve_cond(e->b, test, value));
    case Expr::Kind::Cond:
      return Expr::cond(resolve_cond(e->a, test, value),
                        resolve_cond(e->b, test, value),
                        resolve_cond(e->c, test, value));
    default:
      return e;
  }
}

inline AssertPtr resolve_cond_assert(const AssertPtr& a, const ExprPtr& test,
                                     bool value) {
  switch (a->kind) {
    case Assertion::Kind::Expr:
      return Assertion::expr(resolve_cond(a->e, test, value));
    case Assertion::Kind::HasClass:
      return Assertion::has_class(resolve_cond(a->e, test, value), a->cls);
    case Assertion::Kind::External:
      return Assertion::external(resolve_cond(a->e, test, value));
    case Assertion::Kind::Internal:
      return Assertion::internal(resolve_cond(a->e, test, value));
    case Assertion::Kind::Protected:
      return Assertion::protected_(resolve_cond(a->e, test, value));
    case Assertion::Kind::ProtectedFrom:
      return Assertion::protected_from(resolve_cond(a->e, test, value),
                                       resolve_cond(a->e2, test, value));
    case Assertion::Kind::Not:
      return Assertion::negate(resolve_cond_assert(a->a, test, value));
    case Assertion::Kind::And:
      return Assertion::conj(resolve_cond_assert(a->a, test, value),
                             resolve_cond_assert(a->b, test, value));
    case Assertion::Kind::All:
      return Assertion::all(a->var, a->cls,
                            resolve_cond_assert(a->a, test, value));
  }
  return a;
}

}  // namespace entail_detail

struct EntailOptions {
  const std::vector<Assumption>* assumptions = nullptr;
  std::vector<std::string>* used_assumptions = nullptr;
  int max_or_branches = 64;
  int max_cond_splits = 14;
};

namespace entail_detail {

struct Query {
  const ModuleDef* mod;
  const EntailOptions* opt;
  int cond_splits = 0;
  bool assumptions_enabled = true;

  bool prove_goal_node(std::vector<Lit>& branch, const Node& goal) {
    if (goal.kind == Node::Kind::And) {
      for (auto& c : goal.children) {
        if (!prove(branch, c)) return false;
      }
      return true;
    }
    if (goal.kind == Node::Kind::Or) {
      // excluded middle over congruent complements
      for (size_t i = 0; i < goal.children.size(); ++i) {
        for (size_t j = 0; j < goal.children.size(); ++j) {
          if (i == j) continue;
          const Node& x = goal.children[i];
          const Node& y = goal.children[j];
          if (x.kind == Node::Kind::Lit && y.kind == Node::Kind::Lit &&
              x.lit.pos != y.lit.pos && assert_equal(x.lit.atom, y.lit.atom))
            return true;
        }
      }
      for (auto& c : goal.children)
        if (prove(branch, c)) return true;
      // refutation: assume the negation of every literal disjunct and derive
      // a contradiction (handles case splits such as a==this \/ key mismatch)
      bool all_lits = true;
      std::vector<Lit> b2 = branch;
      for (auto& c : goal.children) {
        if (c.kind != Node::Kind::Lit) {
          all_lits = false;
          break;
        }
        b2.push_back(Lit{c.lit.atom, !c.lit.pos});
      }
      Node f;
      f.kind = Node::Kind::Lit;
      f.lit = Lit{Assertion::falsity(), true};
      if (all_lits && prove(b2, f)) return true;
      return prove(branch, f);
    }
    return prove(branch, goal);
  }

  // expands Or-hypotheses into branches; returns false if any branch fails
  bool prove(std::vector<Lit> branch, const Node& goal_in) {
    // cond splitting first: find a conditional anywhere
    const Expr* cond = nullptr;
    for (auto& l : branch)
      if ((cond = find_cond_assert(l.atom))) break;
    Node goal = goal_in;
    if (!cond && goal.kind == Node::Kind::Lit)
      cond = find_cond_assert(goal.lit.atom);
    if (cond && cond_splits < opt->max_cond_splits) {
      ++cond_splits;
      ExprPtr test = cond->a;
      for (bool val : {true, false}) {
        std::vector<Lit> b2;
        for (auto& l : branch)
          b2.push_back(Lit{resolve_cond_assert(l.atom, test, val), l.pos});
        b2.push_back(Lit{Assertion::expr(test), val});
        Node g2 = resolve_goal(goal, test, val);
        if (!prove(b2, g2)) {
          --cond_splits;
          return false;
        }
      }
      --cond_splits;
      return true;
    }

    if (goal.kind != Node::Kind::Lit) return prove_goal_node(branch, goal);

    Solver s;
    s.mod = mod;
    for (auto& l : branch) {
      if (is_true_lit(l.atom) && l.pos) continue;
      s.add_lit(l);
    }
    // goal terms participate in the congruence closure
    s.collect_atom_exprs(goal.lit.atom);
    s.close();
    if (s.contradictory) return true;
    const Lit& g = goal.lit;
    if (is_true_lit(g.atom) && g.pos) return true;
    if (is_false_lit(g.atom) && !g.pos) return true;
    if (is_false_lit(g.atom) && g.pos) return false;  // needs contradiction
    if (s.prove_atom(g.atom, g.pos)) return true;

    // try assumptions: if the branch implies an assumption's left side, add
    // its right side and retry once
    if (assumptions_enabled && opt->assumptions) {
      for (auto& as : *opt->assumptions) {
        Query sub{mod, opt, cond_splits, false};
        if (!sub.prove(branch, nnf(as.lhs, true))) continue;
        std::vector<Lit> b2 = branch;
        bool usable = flatten_and(nnf(as.rhs, true), b2);
        if (!usable) continue;
        Query retry{mod, opt, cond_splits, false};
        if (retry.prove(b2, goal)) {
          if (opt->used_assumptions) {
            bool seen = false;
            for (auto& u : *opt->used_assumptions) seen |= (u == as.name);
            if (!seen) opt->used_assumptions->push_back(as.name);
          }
          return true;
        }
      }
    }
    return false;
  }

  static bool flatten_and(const Node& n, std::vector<Lit>& out) {
    if (n.kind == Node::Kind::Lit) {
      out.push_back(n.lit);
      return true;
    }
    if (n.kind == Node::Kind::And) {
      for (auto& c : n.children)
        if (!flatten_and(c, out)) return false;
      return true;
    }
    return false;  // Or under an assumption's conclusion: unsupported
  }

  static Node resolve_goal(const Node& g, const ExprPtr& test, bool val) {
    Node out = g;
    if (g.kind == Node::Kind::Lit) {
      out.lit.atom = resolve_cond_assert(g.lit.atom, test, val);
    } else {
      out.children.clear();
      for (auto& c : g.children) out.children.push_back(resolve_goal(c, test, val));
    }
    return out;
  }
};

// hypothesis NNF -> branches of literals (Or expansion, bounded)
inline bool branches_of(const Node& n, std::vector<std::vector<Lit>>& acc,
                        int cap) {
  switch (n.kind) {
    case Node::Kind::Lit:
      for (auto& b : acc) b.push_back(n.lit);
      return true;
    case Node::Kind::And:
      for (auto& c : n.children)
        if (!branches_of(c, acc, cap)) return false;
      return true;
    case Node::Kind::Or: {
      std::vector<std::vector<Lit>> out;
      for (auto& c : n.children) {
        std::vector<std::vector<Lit>> copy = acc;
        if (!branches_of(c, copy, cap)) return false;
        for (auto& b : copy) out.push_back(std::move(b));
        if (static_cast<int>(out.size()) > cap) return false;
      }
      acc = std::move(out);
      return true;
    }
  }
  return false;
}

}  // namespace entail_detail

// M |- hyp -> goal. Yes / No / Unknown; Unknown may be upgraded by citing
// named assumptions (recorded in opt.used_assumptions).
inline Tri entails(const ModuleDef& mod, const AssertPtr& hyp,
                   const AssertPtr& goal, const EntailOptions& opt = {}) {
  using namespace entail_detail;
  Node h = nnf(hyp, true);
  Node g = nnf(goal, true);
  std::vector<std::vector<Lit>> branches{{}};
  bool expanded = branches_of(h, branches, opt.max_or_branches);
  if (!expanded) branches = {{}};  // drop hypotheses we cannot expand
  Query q{&mod, &opt, 0, true};
  bool all = true;
  for (auto& b : branches) {
    if (!q.prove(b, g)) {
      all = false;
      break;
    }
  }
  if (all) return Tri::Yes;
  // decide No only for ground-decidable goals under empty hypotheses
  bool trivial_hyp = true;
  for (auto& b : branches)
    for (auto& l : b)
      if (!is_true_lit(l.atom) || !l.pos) trivial_hyp = false;
  if (trivial_hyp && g.kind == Node::Kind::Lit &&
      g.lit.atom->kind == Assertion::Kind::Expr) {
    const ExprPtr& e = g.lit.atom->e;
    if (e->kind == Expr::Kind::Binary && e->a->kind == Expr::Kind::Lit &&
        e->b->kind == Expr::Kind::Lit)
      return Tri::No;
    if (e->kind == Expr::Kind::Lit) return Tri::No;
  }
  return Tri::Unknown;
}

// Ax 5.2 instantiation: the underlying Hoare judgment via weakest
// preconditions over the stable fragment.
inline Tri check_ul_triple(const ModuleDef& mod, const AssertPtr& pre,
                           const StmtPtr& stmt, const AssertPtr& post,
                           const EntailOptions& opt = {}) {
  if (!stmt_call_free(stmt)) return Tri::No;
  if (!is_stable(pre) || !is_stable(post)) return Tri::No;
  auto wp = weakest_pre(stmt, post);
  if (!wp) return Tri::Unknown;
  return entails(mod, pre, *wp, opt);
}

}  // namespace loo
