// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "loo/step.hpp"

namespace loo {

// ---- push / pop / restriction (Def 2.1, §3.1 notation) ---------------------

inline State push(const State& s, Frame f) {
  State nxt = s;
  nxt.stack.push_back(std::move(f));
  return nxt;
}

inline Outcome<State> pop(const State& s) {
  if (s.depth() < 2) return Outcome<State>::err("pop on depth-1 state");
  const Frame& caller = s.stack[s.depth() - 2];
  if (caller.cont.empty() || caller.cont.head()->kind != Stmt::Kind::Call)
    return Outcome<State>::err("caller continuation is not a call");
  const Value* res = s.top().lookup("res");
  if (!res) return Outcome<State>::err("popped frame has no res");
  State nxt = s;
  nxt.stack.pop_back();
  Frame& cf = nxt.top();
  cf.vars[caller.cont.head()->target] = *res;
  cf.cont = cf.cont.tail();
  return nxt;
}

inline Outcome<State> restrict_to(const State& s, size_t k) {
  if (k < 1 || k > s.depth())
    return Outcome<State>::err("restriction index out of range");
  State nxt = s;
  nxt.stack.resize(k);
  return nxt;
}

inline size_t depth(const State& s) { return s.depth(); }

// ---- externality and public entries ----------------------------------------

// §2.1: a state is external when the class of its receiver is not in the
// internal module.
inline Outcome<bool> is_external(const LinkedProgram& prog, const State& s) {
  const Value* self = s.top().lookup("this");
  if (!self || !self->is_address())
    return Outcome<bool>::err("this is not bound to an address");
  auto c = class_of(s, *self);
  if (!c) return Outcome<bool>::err("this is dangling");
  return !prog.is_internal_class(*c);
}

inline Outcome<bool> is_internal(const LinkedProgram& prog, const State& s) {
  auto e = is_external(prog, s);
  if (!e) return e;
  return !*e;
}

// App G pubMeth: the currently executing method resolves, via the caller's
// pending call, to a public method of an internal class. False at depth 1.
inline bool is_public_entry(const LinkedProgram& prog, const State& s) {
  if (s.depth() < 2) return false;
  const Frame& caller = s.stack[s.depth() - 2];
  if (caller.cont.empty() || caller.cont.head()->kind != Stmt::Kind::Call)
    return false;
  const StmtPtr& call = caller.cont.head();
  const Value* recv = caller.lookup(call->recv);
  if (!recv || !recv->is_address()) return false;
  auto c = class_of(s, *recv);
  if (!c || !prog.is_internal_class(*c)) return false;
  const MethodDef* m = prog.lookup_method(*c, call->member);
  return m && m->privacy == Privacy::Public;
}

// ---- scoped runs (Def 2.2) --------------------------------------------------

struct StepRec {
  StepKind kind = StepKind::Same;
  size_t depth_after = 0;
  bool external_after = false;
  bool public_entry_after = false;
  std::string stmt;        // statement that fired (empty for returns)
  std::string heap_delta;  // compact change description
};

struct ScopedTrace {
  enum class End { Final, Stuck, BudgetExhausted, BelowScope };
  State base;
  std::vector<StepRec> steps;
  End end = End::Final;
  StuckReason stuck_reason = StuckReason::Malformed;
  std::string stuck_message;

  bool budget_exhausted() const { return end == End::BudgetExhausted; }
};

constexpr std::int64_t kDefaultRunBudget = 1000000;
constexpr std::int64_t kDefaultMonitorBudget = 100000;
constexpr std::int64_t kDefaultFuzzBudget = 10000;

namespace detail {

inline std::string heap_delta(const State& before, const State& after) {
  std::ostringstream os;
  for (size_t i = before.heap.size(); i < after.heap.size(); ++i)
    os << "+@" << (i + 1) << ":" << after.heap[i].cls << " ";
  size_t n = std::min(before.heap.size(), after.heap.size());
  for (size_t i = 0; i < n; ++i) {
    const Object& a = before.heap[i];
    const Object& b = after.heap[i];
    for (size_t j = 0; j < a.fields.size() && j < b.fields.size(); ++j)
      if (!(a.fields[j].second == b.fields[j].second))
        os << "@" << (i + 1) << "." << a.fields[j].first << "="
           << b.fields[j].second.show() << " ";
  }
  std::string out = os.str();
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace detail

// Walks the scoped future of `base`: every visited state keeps depth >= the
// base depth; the walk stops before any step that would pop the base frame.
// The callback sees each successor state; returning false aborts the walk.
using ScopedVisitor = std::function<bool(const State&, StepKind)>;

inline ScopedTrace scoped_walk(const LinkedProgram& prog, const State& base,
                               std::int64_t budget,
                               const ScopedVisitor& visit = nullptr,
                               bool record_steps = true) {
  ScopedTrace tr;
  tr.base = base;
  State cur = base;
  size_t base_depth = base.depth();
  for (std::int64_t n = 0; n < budget; ++n) {
    if (cur.top().cont.empty() && cur.depth() == base_depth) {
      tr.end = ScopedTrace::End::Final;
      return tr;
    }
    std::string stmt_str;
    if (record_steps && !cur.top().cont.empty())
      stmt_str = show_stmt_inline(cur.top().cont.head());
    StepResult r = small_step(prog, cur);
    if (r.is_finished()) {  // depth-1 epsilon below base: cannot happen here
      tr.end = ScopedTrace::End::Final;
      return tr;
    }
    if (r.is_stuck()) {
      tr.end = ScopedTrace::End::Stuck;
      tr.stuck_reason = r.reason;
      tr.stuck_message = r.message;
      return tr;
    }
    if (r.next.depth() < base_depth) {
      // The step would return past the base frame: outside the scoped future.
      tr.end = ScopedTrace::End::BelowScope;
      return tr;
    }
    if (record_steps) {
      StepRec rec;
      rec.kind = r.kind;
      rec.depth_after = r.next.depth();
      auto ext = is_external(prog, r.next);
      rec.external_after = ext ? *ext : false;
      rec.public_entry_after =
          r.kind == StepKind::CallEnter && is_public_entry(prog, r.next);
      rec.stmt = stmt_str;
      rec.heap_delta = detail::heap_delta(cur, r.next);
      tr.steps.push_back(std::move(rec));
    }
    cur = std::move(r.next);
    if (visit && !visit(cur, r.kind)) {
      tr.end = ScopedTrace::End::BudgetExhausted;
      return tr;
    }
  }
  tr.end = ScopedTrace::End::BudgetExhausted;
  return tr;
}

// Def 2.2 with step budget: the recorded scoped trace.
inline ScopedTrace bounded_star(const LinkedProgram& prog, const State& base,
                                std::int64_t budget) {
  return scoped_walk(prog, base, budget, nullptr, true);
}

struct FinResult {
  enum class Status { Final, NotTerminated, Stuck };
  Status status = Status::NotTerminated;
  State final;
  StuckReason reason = StuckReason::Malformed;
  std::string message;
  std::int64_t steps_taken = 0;
};

// Def 2.2, third clause: the terminating scoped run, if it completes within
// the budget.
inline FinResult bounded_star_fin(const LinkedProgram& prog, const State& base,
                                  std::int64_t budget) {
  FinResult out;
  State cur = base;
  size_t base_depth = base.depth();
  for (std::int64_t n = 0; n <= budget; ++n) {
    if (cur.top().cont.empty() && cur.depth() == base_depth) {
      out.status = FinResult::Status::Final;
      out.final = std::move(cur);
      out.steps_taken = n;
      return out;
    }
    if (n == budget) break;
    StepResult r = small_step(prog, cur);
    if (r.is_stuck()) {
      out.status = FinResult::Status::Stuck;
      out.reason = r.reason;
      out.message = r.message;
      out.steps_taken = n;
      return out;
    }
    if (r.is_finished() || r.next.depth() < base_depth) break;
    cur = std::move(r.next);
  }
  out.status = FinResult::Status::NotTerminated;
  return out;
}

// ---- summarized execution (App G, Def G.1) ----------------------------------

struct Segment {
  enum class Kind { External, PublicCall };
  Kind kind;
  size_t first_step = 0;  // indices into ScopedTrace::steps
  size_t last_step = 0;
  bool entry_is_public = false;  // PublicCall segments
  bool complete = true;          // false when the trace ends inside the call
};

struct Summary {
  bool ok = false;
  std::string error;
  std::vector<Segment> segments;
};

// Collapses each call from an external state into an internal public method
// into one segment (Lemma G.2 decomposition). The base state must be
// external; the shape breaks only if an external state enters internal code
// other than through a public method.
inline Summary summarize(const LinkedProgram& prog, const ScopedTrace& tr) {
  Summary out;
  auto base_ext = is_external(prog, tr.base);
  if (!base_ext || !*base_ext) {
    out.error = "summarize requires an external base state";
    return out;
  }
  size_t base_depth = tr.base.depth();
  bool in_call = false;
  size_t call_entry_depth = 0;
  Segment seg{Segment::Kind::External, 0, 0, false, true};
  bool have_ext_seg = false;
  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const StepRec& st = tr.steps[i];
    if (in_call) {
      bool returned = st.kind == StepKind::Return &&
                      st.depth_after == call_entry_depth - 1;
      out.segments.back().last_step = i;
      if (returned) {
        in_call = false;
        seg = Segment{Segment::Kind::External, i + 1, i + 1, false, true};
        have_ext_seg = false;
      }
      continue;
    }
    if (st.kind == StepKind::CallEnter && !st.external_after) {
      // external state calls internal code: must be a public entry
      if (!st.public_entry_after) {
        out.error = "external state entered internal code off a public method";
        return out;
      }
      if (have_ext_seg) out.segments.push_back(seg);
      out.segments.push_back(
          Segment{Segment::Kind::PublicCall, i, i, true, true});
      in_call = true;
      call_entry_depth = st.depth_after;
      continue;
    }
    if (!st.external_after && st.depth_after > base_depth) {
      out.error = "internal state reached outside a public call";
      return out;
    }
    seg.last_step = i;
    have_ext_seg = true;
  }
  if (in_call) out.segments.back().complete = false;
  if (have_ext_seg) out.segments.push_back(seg);
  out.ok = true;
  return out;
}

// ---- trace serialization (External Interfaces: JSON lines) ------------------

inline std::string trace_jsonl(const ScopedTrace& tr) {
  std::ostringstream os;
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '"' || c == '\\') o.push_back('\\');
      o.push_back(c);
    }
    return o;
  };
  for (auto& st : tr.steps) {
    os << "{\"depth\":" << st.depth_after << ",\"kind\":\"" << show(st.kind)
       << "\",\"stmt\":\"" << esc(st.stmt) << "\",\"heap-delta\":\""
       << esc(st.heap_delta) << "\"}\n";
  }
  return os.str();
}

}  // namespace loo
