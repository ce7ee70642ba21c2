// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "loo/entail.hpp"
#include "loo/spec.hpp"

namespace loo {

// Proofs are explicit scripts: named rule instances with premises, rule
// arguments, and a stated conclusion triple or quadruple that the checker
// validates structurally. Only the entailment side conditions involve
// automatic reasoning.

struct ProofNode {
  std::string name;
  std::string rule;  // embed_ul | prot_new | prot_1..prot_4 | types_1 |
                     // types_2 | mid | combine | sequ | consequ | if_rule |
                     // absurd | cases | call_int | call_ext_adapt |
                     // call_ext_adapt_strong | open
  std::vector<std::string> premises;
  std::string spec_name;                              // call rules
  std::map<std::string, std::string> renames;         // call rules
  std::vector<std::string> vars;                      // prot_1: z; prot_2: z,z'
  std::vector<std::string> uses;                      // assumption citations
  AssertPtr pre, post, mid;                           // mid null: triple
  StmtPtr stmt;
  bool is_quad() const { return mid != nullptr; }
};

struct ProofBundle {
  std::string name;
  std::string module_path;
  std::string spec_path;
  std::vector<Assumption> assumptions;
  std::vector<ProofNode> nodes;  // in script order; premises refer backwards
  struct InvariantSection {
    std::string spec_name;
    std::vector<std::pair<std::string, std::string>> method_proofs;  // C::m -> node
  };
  struct MethodSection {
    std::string spec_name;
    std::string proof;
  };
  std::vector<InvariantSection> invariants;
  std::vector<MethodSection> methods;

  const ProofNode* node(const std::string& n) const {
    for (auto& nd : nodes)
      if (nd.name == n) return &nd;
    return nullptr;
  }
};

struct OpenObligation {
  std::string name;
  std::string description;
};

struct CheckReport {
  Diagnostics diagnostics;              // rule violations (reject the bundle)
  std::vector<OpenObligation> open;     // declared holes / missing proofs
  std::vector<std::string> discharged;  // entailments proven automatically
  std::vector<std::string> trusted;     // assumptions actually used
  bool accepted = false;                // no diagnostics
  bool zero_open = false;

  void fail(const std::string& where, const std::string& msg) {
    diagnostics.push_back({{}, where + ": " + msg});
  }
};

namespace hoare_detail {

struct Ctx {
  const ModuleDef& mod;
  const Spec& spec;
  const ProofBundle& bundle;
  CheckReport& report;

  Tri entail(const std::string& where, const AssertPtr& a, const AssertPtr& b,
             const std::vector<std::string>& uses) {
    EntailOptions opt;
    std::vector<Assumption> cited;
    for (auto& u : uses)
      for (auto& as : bundle.assumptions)
        if (as.name == u) cited.push_back(as);
    std::vector<std::string> used;
    opt.assumptions = &cited;
    opt.used_assumptions = &used;
    Tri r = entails(mod, a, b, opt);
    if (r == Tri::Yes) {
      report.discharged.push_back(where + ": " + show_assert(a) + "  ==>  " +
                                  show_assert(b));
      for (auto& u : used) {
        bool seen = false;
        for (auto& t : report.trusted) seen |= (t == u);
        if (!seen) report.trusted.push_back(u);
      }
    }
    return r;
  }
};

inline bool stmt_assigns_any(const StmtPtr& s, const std::set<std::string>& xs) {
  std::set<std::string> t;
  detail::collect_assign_targets(s, t);
  for (auto& x : t)
    if (xs.count(x)) return true;
  return false;
}

inline std::set<std::string> stmt_vars(const StmtPtr& s) {
  std::set<std::string> out;
  std::function<void(const StmtPtr&)> go = [&](const StmtPtr& st) {
    if (!st) return;
    switch (st->kind) {
      case Stmt::Kind::Assign:
        out.insert(st->target);
        expr_vars(st->expr, out);
        break;
      case Stmt::Kind::FieldWrite:
        out.insert(st->target);
        if (st->src.is_var) out.insert(st->src.var);
        break;
      case Stmt::Kind::Call:
        out.insert(st->target);
        out.insert(st->recv);
        for (auto& a : st->args)
          if (a.is_var) out.insert(a.var);
        break;
      case Stmt::Kind::New:
        out.insert(st->target);
        break;
      case Stmt::Kind::Seq:
        go(st->s1);
        go(st->s2);
        break;
      case Stmt::Kind::If:
        expr_vars(st->expr, out);
        go(st->s1);
        go(st->s2);
        break;
      case Stmt::Kind::Skip:
        break;
    }
  };
  go(s);
  return out;
}

// strip the last conjunct: A /\ B  ->  (A, B); atom -> (true, atom)
inline std::pair<AssertPtr, AssertPtr> split_last(const AssertPtr& a) {
  if (a->kind == Assertion::Kind::And) return {a->a, a->b};
  return {Assertion::truth(), a};
}

inline const ProofNode* premise(Ctx& cx, const ProofNode& n, size_t i) {
  if (i >= n.premises.size()) {
    cx.report.fail(n.name, "missing premise " + std::to_string(i + 1));
    return nullptr;
  }
  const ProofNode* p = cx.bundle.node(n.premises[i]);
  if (!p) cx.report.fail(n.name, "unknown premise '" + n.premises[i] + "'");
  return p;
}

inline bool require(Ctx& cx, const ProofNode& n, bool cond,
                    const std::string& msg) {
  if (!cond) cx.report.fail(n.name, msg);
  return cond;
}

// ---- per-rule validation -----------------------------------------------------

inline void check_embed_ul(Ctx& cx, const ProofNode& n) {
  require(cx, n, !n.is_quad(), "embed_ul concludes a triple");
  require(cx, n, stmt_call_free(n.stmt), "statement contains a method call");
  require(cx, n, is_stable(n.pre) && is_stable(n.post),
          "embed_ul requires Stable assertions");
  EntailOptions opt;
  std::vector<Assumption> cited;
  for (auto& u : n.uses)
    for (auto& as : cx.bundle.assumptions)
      if (as.name == u) cited.push_back(as);
  std::vector<std::string> used;
  opt.assumptions = &cited;
  opt.used_assumptions = &used;
  Tri r = check_ul_triple(cx.mod, n.pre, n.stmt, n.post, opt);
  if (r == Tri::Yes) {
    cx.report.discharged.push_back(n.name + ": ul triple via wp");
    for (auto& u : used) cx.report.trusted.push_back(u);
    return;
  }
  cx.report.fail(n.name, std::string("underlying Hoare check ") +
                             (r == Tri::No ? "refuted" : "undecided"));
}

inline void check_prot_new(Ctx& cx, const ProofNode& n) {
  require(cx, n, !n.is_quad(), "prot_new concludes a triple");
  if (!require(cx, n, n.stmt && n.stmt->kind == Stmt::Kind::New,
               "statement must be u := new C"))
    return;
  const std::string& u = n.stmt->target;
  require(cx, n, entail_detail::is_true_lit(n.pre), "precondition must be true");
  for (auto& c : conjuncts_of(n.post)) {
    if (c->kind == Assertion::Kind::Protected) {
      require(cx, n, c->e->kind == Expr::Kind::Var && c->e->name == u,
              "protected conclusion must be about the new object");
    } else if (c->kind == Assertion::Kind::ProtectedFrom) {
      require(cx, n, c->e->kind == Expr::Kind::Var && c->e->name == u,
              "protectedFrom conclusion must be about the new object");
      std::set<std::string> xs;
      expr_vars(c->e2, xs);
      require(cx, n, !xs.count(u), "the new object cannot shield itself");
    } else {
      cx.report.fail(n.name, "post must be protection facts about the target");
    }
  }
}

inline void check_prot_1(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  if (!p) return;
  require(cx, n, !n.is_quad() && !p->is_quad(), "prot_1 is a triple rule");
  require(cx, n, n.vars.size() == 1, "prot_1 names the equality variable");
  if (n.vars.empty()) return;
  const std::string& z = n.vars[0];
  require(cx, n, stmt_call_free(n.stmt), "statement must be call free");
  require(cx, n, !stmt_assigns_any(n.stmt, {z}),
          "statement must not assign the tracking variable");
  require(cx, n, stmt_equal(n.stmt, p->stmt), "premise statement differs");
  auto [frame, prot] = split_last(n.pre);
  if (!require(cx, n, prot->kind == Assertion::Kind::Protected,
               "pre must end with a protected fact"))
    return;
  require(cx, n,
          assert_equal(n.post, prot),
          "post must be exactly the protected fact");
  AssertPtr eq = Assertion::expr(
      Expr::binary(BinOp::Eq, prot->e, Expr::var(z)));
  require(cx, n, assert_equal(p->pre, Assertion::conj(frame, eq)),
          "premise pre must be frame /\\ e == " + z);
  require(cx, n, assert_equal(p->post, eq),
          "premise post must be e == " + z);
}

inline void check_prot_2(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  if (!p) return;
  require(cx, n, !n.is_quad() && !p->is_quad(), "prot_2 is a triple rule");
  require(cx, n, n.vars.size() == 2, "prot_2 names two equality variables");
  if (n.vars.size() != 2) return;
  const std::string& z = n.vars[0];
  const std::string& z2 = n.vars[1];
  bool shape = n.stmt && n.stmt->kind == Stmt::Kind::Assign &&
               (n.stmt->expr->kind == Expr::Kind::Var ||
                n.stmt->expr->kind == Expr::Kind::Field);
  if (n.stmt && n.stmt->kind == Stmt::Kind::Assign &&
      n.stmt->expr->kind == Expr::Kind::Field)
    shape = n.stmt->expr->a->kind == Expr::Kind::Var;
  require(cx, n, shape, "statement must be x := y or x := y.f");
  if (!shape) return;
  require(cx, n, n.stmt->target != z && n.stmt->target != z2,
          "tracking variables must differ from the target");
  require(cx, n, stmt_equal(n.stmt, p->stmt), "premise statement differs");
  auto [frame, prot] = split_last(n.pre);
  if (!require(cx, n, prot->kind == Assertion::Kind::ProtectedFrom,
               "pre must end with a protectedFrom fact"))
    return;
  require(cx, n, assert_equal(n.post, prot),
          "post must be exactly the protection fact");
  AssertPtr eqs = Assertion::conj(
      Assertion::expr(Expr::binary(BinOp::Eq, Expr::var(z), prot->e)),
      Assertion::expr(Expr::binary(BinOp::Eq, Expr::var(z2), prot->e2)));
  require(cx, n, assert_equal(p->pre, Assertion::conj(frame, eqs)),
          "premise pre must track both expressions");
  require(cx, n, assert_equal(p->post, eqs),
          "premise post must preserve both equalities");
}

inline void check_prot_3(Ctx& cx, const ProofNode& n) {
  require(cx, n, !n.is_quad(), "prot_3 is a triple rule");
  bool shape = n.stmt && n.stmt->kind == Stmt::Kind::Assign &&
               n.stmt->expr->kind == Expr::Kind::Field;
  if (!require(cx, n, shape, "statement must be x := y.f")) return;
  if (!require(cx, n, n.pre->kind == Assertion::Kind::ProtectedFrom,
               "pre must be y.f protectedFrom z"))
    return;
  require(cx, n, expr_equal(n.pre->e, n.stmt->expr),
          "pre protects exactly the read path");
  if (!require(cx, n, n.post->kind == Assertion::Kind::ProtectedFrom,
               "post must be x protectedFrom z"))
    return;
  require(cx, n,
          n.post->e->kind == Expr::Kind::Var &&
              n.post->e->name == n.stmt->target,
          "post subject must be the target variable");
  require(cx, n, expr_equal(n.post->e2, n.pre->e2),
          "post must keep the same source");
  std::set<std::string> zs;
  expr_vars(n.pre->e2, zs);
  require(cx, n, !zs.count(n.stmt->target),
          "target must not occur in the source");
}

inline void check_prot_4(Ctx& cx, const ProofNode& n) {
  require(cx, n, !n.is_quad(), "prot_4 is a triple rule");
  bool shape = n.stmt && n.stmt->kind == Stmt::Kind::FieldWrite;
  if (!require(cx, n, shape, "statement must be y.f := y'")) return;
  auto cs = conjuncts_of(n.pre);
  if (!require(cx, n,
               cs.size() == 2 &&
                   cs[0]->kind == Assertion::Kind::ProtectedFrom &&
                   cs[1]->kind == Assertion::Kind::ProtectedFrom,
               "pre must be two protectedFrom facts"))
    return;
  require(cx, n, expr_equal(cs[0]->e, cs[1]->e),
          "both facts must protect the same subject");
  require(cx, n,
          cs[1]->e2->kind == Expr::Kind::Var &&
              n.stmt->src.is_var && cs[1]->e2->name == n.stmt->src.var,
          "second fact must protect from the written value");
  require(cx, n, assert_equal(n.post, cs[0]),
          "post must be the first protection fact");
}

inline void check_types_1(Ctx& cx, const ProofNode& n) {
  require(cx, n, !n.is_quad(), "types_1 is a triple rule");
  require(cx, n, stmt_call_free(n.stmt), "statement must be call free");
  if (!require(cx, n,
               n.pre->kind == Assertion::Kind::HasClass &&
                   n.pre->e->kind == Expr::Kind::Var,
               "pre must be x : C"))
    return;
  require(cx, n, assert_equal(n.pre, n.post), "post must equal pre");
  require(cx, n, !stmt_assigns_any(n.stmt, {n.pre->e->name}),
          "statement must not assign the typed variable");
}

inline void check_types_2(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  if (!p) return;
  require(cx, n, n.is_quad() && p->is_quad(), "types_2 is a quadruple rule");
  require(cx, n, stmt_equal(n.stmt, p->stmt), "premise statement differs");
  auto [tpre, rpre] = split_last(n.pre);
  auto [tpost, rpost] = split_last(n.post);
  (void)rpre;
  (void)rpost;
  bool shape = n.pre->kind == Assertion::Kind::And &&
               n.post->kind == Assertion::Kind::And &&
               (n.pre->a->kind == Assertion::Kind::HasClass ||
                n.pre->a->kind == Assertion::Kind::External ||
                n.pre->a->kind == Assertion::Kind::Internal) &&
               n.pre->a->e->kind == Expr::Kind::Var;
  if (!require(cx, n, shape,
               "conclusion must prepend a typing fact to the premise"))
    return;
  require(cx, n, assert_equal(n.pre->a, n.post->a),
          "pre and post must carry the same type fact");
  require(cx, n, assert_equal(n.pre->b, p->pre) &&
                     assert_equal(n.post->b, p->post),
          "conclusion must extend the premise");
  require(cx, n, assert_equal(n.mid, p->mid), "mid must match the premise");
  // dynamic types can change only by reassignment
  require(cx, n, !stmt_assigns_any(n.stmt, {n.pre->a->e->name}),
          "statement must not assign the typed variable");
  (void)tpre;
  (void)tpost;
}

inline void check_mid(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  if (!p) return;
  require(cx, n, n.is_quad() && !p->is_quad(),
          "mid lifts a triple to a quadruple");
  require(cx, n, stmt_equal(n.stmt, p->stmt), "premise statement differs");
  require(cx, n, assert_equal(n.pre, p->pre) && assert_equal(n.post, p->post),
          "pre/post must match the premise triple");
}

inline void check_combine(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  const ProofNode* q = premise(cx, n, 1);
  if (!p || !q) return;
  require(cx, n, n.is_quad() && p->is_quad() && q->is_quad(),
          "combine is a quadruple rule");
  require(cx, n, stmt_equal(n.stmt, p->stmt) && stmt_equal(n.stmt, q->stmt),
          "premises must cover the same statement");
  require(cx, n, assert_equal(p->mid, q->mid) && assert_equal(n.mid, p->mid),
          "mid-conditions must agree");
  require(cx, n, assert_equal(n.pre, Assertion::conj(p->pre, q->pre)),
          "pre must be the conjunction of the premises'");
  require(cx, n, assert_equal(n.post, Assertion::conj(p->post, q->post)),
          "post must be the conjunction of the premises'");
}

inline void check_sequ(Ctx& cx, const ProofNode& n) {
  require(cx, n, n.is_quad(), "sequ is a quadruple rule");
  if (n.premises.size() < 2) {
    cx.report.fail(n.name, "sequ needs at least two premises");
    return;
  }
  std::vector<const ProofNode*> ps;
  for (size_t i = 0; i < n.premises.size(); ++i) {
    const ProofNode* p = premise(cx, n, i);
    if (!p) return;
    require(cx, n, p->is_quad(), "sequ premises are quadruples");
    ps.push_back(p);
  }
  for (auto* p : ps)
    require(cx, n, assert_equal(p->mid, n.mid), "mid-conditions must agree");
  for (size_t i = 0; i + 1 < ps.size(); ++i)
    require(cx, n, assert_equal(ps[i]->post, ps[i + 1]->pre),
            "adjacent premises must chain (post_i == pre_{i+1})");
  require(cx, n, assert_equal(n.pre, ps.front()->pre),
          "pre must be the first premise's");
  require(cx, n, assert_equal(n.post, ps.back()->post),
          "post must be the last premise's");
  std::vector<StmtPtr> all;
  for (auto* p : ps) flatten_into(p->stmt, all);
  require(cx, n, stmt_equal(seq_of(all), seq_of(flatten(n.stmt))),
          "statement must be the premises in sequence");
}

inline void check_consequ(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  if (!p) return;
  require(cx, n, n.is_quad() && p->is_quad(), "consequ is a quadruple rule");
  require(cx, n, stmt_equal(n.stmt, p->stmt), "premise statement differs");
  if (cx.entail(n.name + "/pre", n.pre, p->pre, n.uses) != Tri::Yes)
    cx.report.fail(n.name, "cannot show conclusion pre entails premise pre");
  if (cx.entail(n.name + "/post", p->post, n.post, n.uses) != Tri::Yes)
    cx.report.fail(n.name, "cannot show premise post entails conclusion post");
  if (cx.entail(n.name + "/mid", p->mid, n.mid, n.uses) != Tri::Yes)
    cx.report.fail(n.name, "cannot show premise mid entails conclusion mid");
}

inline void check_if_rule(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  const ProofNode* q = premise(cx, n, 1);
  if (!p || !q) return;
  require(cx, n, n.is_quad() && p->is_quad() && q->is_quad(),
          "if_rule is a quadruple rule");
  if (!require(cx, n, n.stmt && n.stmt->kind == Stmt::Kind::If,
               "statement must be a conditional"))
    return;
  AssertPtr c = Assertion::expr(n.stmt->expr);
  require(cx, n, assert_equal(p->pre, Assertion::conj(n.pre, c)),
          "then-premise pre must be pre /\\ cond");
  require(cx, n,
          assert_equal(q->pre, Assertion::conj(n.pre, Assertion::negate(c))),
          "else-premise pre must be pre /\\ !cond");
  require(cx, n, stmt_equal(p->stmt, seq_of(flatten(n.stmt->s1))) &&
                     stmt_equal(q->stmt, seq_of(flatten(n.stmt->s2))),
          "premises must cover the branches");
  require(cx, n, assert_equal(p->post, n.post) && assert_equal(q->post, n.post),
          "branch posts must match");
  require(cx, n, assert_equal(p->mid, n.mid) && assert_equal(q->mid, n.mid),
          "branch mids must match");
}

inline void check_absurd(Ctx& cx, const ProofNode& n) {
  require(cx, n, n.is_quad(), "absurd is a quadruple rule");
  require(cx, n, entail_detail::is_false_lit(n.pre),
          "absurd requires the literal false precondition");
}

inline void check_cases(Ctx& cx, const ProofNode& n) {
  const ProofNode* p = premise(cx, n, 0);
  const ProofNode* q = premise(cx, n, 1);
  if (!p || !q) return;
  require(cx, n, n.is_quad() && p->is_quad() && q->is_quad(),
          "cases is a quadruple rule");
  require(cx, n, stmt_equal(n.stmt, p->stmt) && stmt_equal(n.stmt, q->stmt),
          "premises must cover the same statement");
  auto [frame, disj] = split_last(n.pre);
  auto [fp, ap] = split_last(p->pre);
  auto [fq, aq] = split_last(q->pre);
  require(cx, n, assert_equal(fp, frame) && assert_equal(fq, frame),
          "premises must share the conclusion frame");
  require(cx, n, assert_equal(disj, Assertion::disj(ap, aq)),
          "conclusion pre must end with the case disjunction");
  require(cx, n, assert_equal(p->post, n.post) && assert_equal(q->post, n.post),
          "case posts must match");
  require(cx, n, assert_equal(p->mid, n.mid) && assert_equal(q->mid, n.mid),
          "case mids must match");
}

// shared helper: resolve and safely rename a spec conjunct
inline const SpecConjunct* cited_spec(Ctx& cx, const ProofNode& n,
                                      SpecConjunct& renamed) {
  const SpecConjunct* c = cx.spec.find(n.spec_name);
  if (!c) {
    cx.report.fail(n.name, "unknown specification '" + n.spec_name + "'");
    return nullptr;
  }
  auto r = rename_spec(*c, n.renames);
  if (!r) {
    cx.report.fail(n.name, r.error());
    return nullptr;
  }
  renamed = *r;
  return c;
}

inline void check_call_int(Ctx& cx, const ProofNode& n) {
  require(cx, n, n.is_quad(), "call_int is a quadruple rule");
  if (!require(cx, n, n.stmt && n.stmt->kind == Stmt::Kind::Call,
               "statement must be a call"))
    return;
  SpecConjunct rc;
  const SpecConjunct* c = cited_spec(cx, n, rc);
  if (!c) return;
  if (!require(cx, n, c->kind == SpecConjunct::Kind::Method,
               "call_int cites a method specification"))
    return;
  const MethodSpec& ms = rc.ms;
  require(cx, n, cx.mod.defines(ms.cls),
          "call_int applies to internal methods");
  require(cx, n, ms.method == n.stmt->member,
          "specification is for a different method");
  if (!require(cx, n, ms.formals.size() == n.stmt->args.size(),
               "arity mismatch against the specification"))
    return;
  for (auto& a : n.stmt->args)
    require(cx, n, !a.is_var || (a.var != "this" && a.var != "res"),
            "actual arguments may not be this or res (rename first)");
  std::map<std::string, ExprPtr> sub;
  sub.emplace("this", Expr::var(n.stmt->recv));
  for (size_t i = 0; i < ms.formals.size(); ++i)
    sub.emplace(ms.formals[i].name, n.stmt->args[i].as_expr());
  std::vector<AssertPtr> pre_parts;
  pre_parts.push_back(
      Assertion::has_class(Expr::var(n.stmt->recv), ms.cls));
  const ClassDef* cd = cx.mod.klass(ms.cls);
  const MethodDef* md = cd ? cd->method(ms.method) : nullptr;
  if (!require(cx, n, md != nullptr, "method not defined in the module"))
    return;
  for (size_t i = 0; i < md->params.size() && i < n.stmt->args.size(); ++i)
    pre_parts.push_back(
        typing_fact(n.stmt->args[i].as_expr(), md->params[i].type));
  if (!ms.binders.empty()) pre_parts.push_back(binder_facts(ms.binders));
  pre_parts.push_back(substitute(ms.pre, sub));
  AssertPtr expect_pre = conj_all(pre_parts);
  std::map<std::string, ExprPtr> sub_post = sub;
  sub_post.emplace("res", Expr::var(n.stmt->target));
  AssertPtr expect_post = substitute(ms.post, sub_post);
  require(cx, n, assert_equal(n.pre, expect_pre),
          "pre must be " + show_assert(expect_pre));
  require(cx, n, assert_equal(n.post, expect_post),
          "post must be " + show_assert(expect_post));
  require(cx, n, assert_equal(n.mid, ms.mid),
          "mid must be the specification's mid-condition");
}

inline void check_call_ext(Ctx& cx, const ProofNode& n, bool strong) {
  require(cx, n, n.is_quad(), "external call rules conclude quadruples");
  if (!require(cx, n, n.stmt && n.stmt->kind == Stmt::Kind::Call,
               "statement must be a call"))
    return;
  SpecConjunct rc;
  const SpecConjunct* c = cited_spec(cx, n, rc);
  if (!c) return;
  if (!require(cx, n, c->kind == SpecConjunct::Kind::Invariant,
               "external call rules cite scoped invariants"))
    return;
  const ScopedInvariant& inv = rc.inv;
  std::vector<ExprPtr> ys;
  ys.push_back(Expr::var(n.stmt->recv));
  for (auto& a : n.stmt->args) ys.push_back(a.as_expr());
  AssertPtr adapted = adapt(ys, inv.body);
  std::vector<AssertPtr> pre_parts;
  pre_parts.push_back(Assertion::external(Expr::var(n.stmt->recv)));
  pre_parts.push_back(binder_facts(inv.binders));
  if (strong) pre_parts.push_back(inv.body);
  pre_parts.push_back(adapted);
  AssertPtr expect_pre = conj_all(pre_parts);
  AssertPtr expect_post =
      strong ? Assertion::conj(inv.body, adapted) : adapted;
  require(cx, n, assert_equal(n.pre, expect_pre),
          "pre must be " + show_assert(expect_pre));
  require(cx, n, assert_equal(n.post, expect_post),
          "post must be " + show_assert(expect_post));
  require(cx, n, assert_equal(n.mid, inv.body),
          "mid must be the invariant body");
}

inline void check_node(Ctx& cx, const ProofNode& n) {
  if (n.rule == "open") {
    cx.report.open.push_back(
        {n.name, "open derivation for {" + show_assert(n.pre) + "} " +
                     show_stmt_inline(n.stmt) + " ..."});
    return;
  }
  if (n.rule == "embed_ul") return check_embed_ul(cx, n);
  if (n.rule == "prot_new") return check_prot_new(cx, n);
  if (n.rule == "prot_1") return check_prot_1(cx, n);
  if (n.rule == "prot_2") return check_prot_2(cx, n);
  if (n.rule == "prot_3") return check_prot_3(cx, n);
  if (n.rule == "prot_4") return check_prot_4(cx, n);
  if (n.rule == "types_1") return check_types_1(cx, n);
  if (n.rule == "types_2") return check_types_2(cx, n);
  if (n.rule == "mid") return check_mid(cx, n);
  if (n.rule == "combine") return check_combine(cx, n);
  if (n.rule == "sequ") return check_sequ(cx, n);
  if (n.rule == "consequ") return check_consequ(cx, n);
  if (n.rule == "if_rule") return check_if_rule(cx, n);
  if (n.rule == "absurd") return check_absurd(cx, n);
  if (n.rule == "cases") return check_cases(cx, n);
  if (n.rule == "call_int") return check_call_int(cx, n);
  if (n.rule == "call_ext_adapt") return check_call_ext(cx, n, false);
  if (n.rule == "call_ext_adapt_strong") return check_call_ext(cx, n, true);
  cx.report.fail(n.name, "unknown rule '" + n.rule + "'");
}

// ---- module-level obligations ---------------------------------------------------

inline StmtPtr method_body(const ModuleDef& mod, const std::string& cls,
                           const std::string& m) {
  const ClassDef* cd = mod.klass(cls);
  const MethodDef* md = cd ? cd->method(m) : nullptr;
  return md ? md->body : nullptr;
}

// Fig 7 [Method]: the proof concludes
//   { this:C /\ y:D /\ A1 } body { A2 /\ |>res A2 } || { A3 }
inline void check_method_obligation(Ctx& cx, const MethodSpec& ms,
                                    const std::string& proof_name) {
  std::string where = "method obligation " + ms.name;
  const ProofNode* p = cx.bundle.node(proof_name);
  if (!p) {
    cx.report.fail(where, "unknown proof node '" + proof_name + "'");
    return;
  }
  const ClassDef* cd = cx.mod.klass(ms.cls);
  const MethodDef* md = cd ? cd->method(ms.method) : nullptr;
  if (!md) {
    cx.report.fail(where, "no such method " + ms.cls + "::" + ms.method);
    return;
  }
  if (md->params.size() != ms.formals.size()) {
    cx.report.fail(where, "formal arity differs from the method");
    return;
  }
  for (size_t i = 0; i < md->params.size(); ++i)
    if (md->params[i].name != ms.formals[i].name) {
      cx.report.fail(where, "specification formals must name the method's "
                            "parameters (use a safe renaming)");
      return;
    }
  // Barendregt: body variables may not collide with the spec's free names
  AssertPtr a1 = Assertion::conj(binder_facts(ms.binders), ms.pre);
  std::set<std::string> body_vars = stmt_vars(md->body);
  std::set<std::string> allowed{"this"};
  for (auto& pm : md->params) allowed.insert(pm.name);
  for (auto& v : free_vars(a1))
    if (body_vars.count(v) && !allowed.count(v)) {
      cx.report.fail(where, "spec variable '" + v +
                                "' collides with the body (rename the spec)");
      return;
    }
  std::vector<AssertPtr> pre_parts;
  pre_parts.push_back(Assertion::has_class(Expr::var("this"), ms.cls));
  for (auto& pm : md->params)
    pre_parts.push_back(typing_fact(Expr::var(pm.name), pm.type));
  if (!ms.binders.empty()) pre_parts.push_back(binder_facts(ms.binders));
  pre_parts.push_back(ms.pre);
  AssertPtr expect_pre = conj_all(pre_parts);
  AssertPtr expect_post =
      Assertion::conj(ms.post, adapt({Expr::var("res")}, ms.post));
  bool ok = p->is_quad() && stmt_equal(p->stmt, seq_of(flatten(md->body))) &&
            assert_equal(p->pre, expect_pre) &&
            assert_equal(p->post, expect_post) && assert_equal(p->mid, ms.mid);
  if (!ok)
    cx.report.fail(where,
                   "proof conclusion does not match the required obligation {" +
                       show_assert(expect_pre) + "} body {" +
                       show_assert(expect_post) + "} || {" +
                       show_assert(ms.mid) + "}");
}

// Fig 7 [Invariant]: per public method,
//   { this:D /\ y:D /\ x:C /\ A /\ |>(this,y) A } body { A /\ |>res A } || { A }
inline void check_invariant_obligation(
    Ctx& cx, const ScopedInvariant& inv,
    const std::vector<std::pair<std::string, std::string>>& method_proofs) {
  std::set<std::string> covered;
  for (auto& [qual, proof_name] : method_proofs) {
    std::string where = "invariant " + inv.name + " for " + qual;
    auto pos = qual.find("::");
    if (pos == std::string::npos) {
      cx.report.fail(where, "expected Class::method");
      continue;
    }
    std::string cls = qual.substr(0, pos);
    std::string m = qual.substr(pos + 2);
    covered.insert(qual);
    const ClassDef* cd = cx.mod.klass(cls);
    const MethodDef* md = cd ? cd->method(m) : nullptr;
    if (!md || md->privacy != Privacy::Public) {
      cx.report.fail(where, "not a public method of the module");
      continue;
    }
    const ProofNode* p = cx.bundle.node(proof_name);
    if (!p) {
      if (proof_name == "?" || proof_name.empty()) continue;
      cx.report.fail(where, "unknown proof node '" + proof_name + "'");
      continue;
    }
    std::set<std::string> body_vars = stmt_vars(md->body);
    bool fresh = true;
    for (auto& b : inv.binders)
      if (body_vars.count(b.name)) fresh = false;
    if (!fresh) {
      cx.report.fail(where, "invariant binders collide with the body "
                            "(use a safe renaming)");
      continue;
    }
    std::vector<ExprPtr> entry;
    entry.push_back(Expr::var("this"));
    for (auto& pm : md->params) entry.push_back(Expr::var(pm.name));
    std::vector<AssertPtr> pre_parts;
    pre_parts.push_back(Assertion::has_class(Expr::var("this"), cls));
    for (auto& pm : md->params)
      pre_parts.push_back(typing_fact(Expr::var(pm.name), pm.type));
    if (!inv.binders.empty()) pre_parts.push_back(binder_facts(inv.binders));
    pre_parts.push_back(inv.body);
    pre_parts.push_back(adapt(entry, inv.body));
    AssertPtr expect_pre = conj_all(pre_parts);
    AssertPtr expect_post =
        Assertion::conj(inv.body, adapt({Expr::var("res")}, inv.body));
    bool ok = p->is_quad() && stmt_equal(p->stmt, seq_of(flatten(md->body))) &&
              assert_equal(p->pre, expect_pre) &&
              assert_equal(p->post, expect_post) &&
              assert_equal(p->mid, inv.body);
    if (!ok)
      cx.report.fail(
          where, "proof conclusion does not match the required obligation {" +
                     show_assert(expect_pre) + "} body {" +
                     show_assert(expect_post) + "} || {" +
                     show_assert(inv.body) + "}");
  }
  for (auto& [cn, cd] : cx.mod.classes)
    for (auto& md : cd.methods)
      if (md.privacy == Privacy::Public &&
          !covered.count(cn + "::" + md.name))
        cx.report.open.push_back(
            {inv.name + "/" + cn + "::" + md.name,
             "no proof that " + cn + "::" + md.name + " preserves " +
                 inv.name});
}

}  // namespace hoare_detail

// Fig 7 WellFrm_Mod + Comb_Spec: well-formed spec, every conjunct's
// obligations discharged. Open obligations (declared holes, missing method
// proofs) are reported, not diagnosed as errors.
inline CheckReport check_module(const ModuleDef& mod, const Spec& spec,
                                const ProofBundle& bundle) {
  CheckReport report;
  hoare_detail::Ctx cx{mod, spec, bundle, report};
  Diagnostics wf = wf_spec(mod, spec);
  for (auto& d : wf) report.diagnostics.push_back(d);
  // node names unique, premises resolve backwards only
  std::set<std::string> seen;
  for (auto& n : bundle.nodes) {
    if (!seen.insert(n.name).second)
      report.fail(n.name, "duplicate derivation name");
    for (auto& p : n.premises)
      if (!seen.count(p))
        report.fail(n.name, "premise '" + p + "' not derived before use");
  }
  for (auto& n : bundle.nodes) hoare_detail::check_node(cx, n);
  // every conjunct needs its obligation section
  std::set<std::string> with_obligation;
  for (auto& sec : bundle.invariants) {
    const SpecConjunct* c = spec.find(sec.spec_name);
    if (!c || c->kind != SpecConjunct::Kind::Invariant) {
      report.fail(sec.spec_name, "invariant section cites no such invariant");
      continue;
    }
    with_obligation.insert(sec.spec_name);
    hoare_detail::check_invariant_obligation(cx, c->inv, sec.method_proofs);
  }
  for (auto& sec : bundle.methods) {
    const SpecConjunct* c = spec.find(sec.spec_name);
    if (!c || c->kind != SpecConjunct::Kind::Method) {
      report.fail(sec.spec_name, "methodspec section cites no such spec");
      continue;
    }
    with_obligation.insert(sec.spec_name);
    hoare_detail::check_method_obligation(cx, c->ms, sec.proof);
  }
  for (auto& c : spec.conjuncts)
    if (!with_obligation.count(c.name()))
      report.open.push_back(
          {c.name(), "no obligation section for this conjunct"});
  report.accepted = report.diagnostics.empty();
  report.zero_open = report.open.empty();
  return report;
}

}  // namespace loo
