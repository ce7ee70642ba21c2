// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "loo/adversary.hpp"
#include "loo/proof_parser.hpp"
#include "loo/report.hpp"

namespace loo {

// Exit codes, documented in the README:
//   0 success / verified / accepted      1 violated / open obligations
//   2 stuck                              3 budget exhausted
//   64 usage error                       65 input parse error
enum ExitCode {
  kExitOk = 0,
  kExitViolated = 1,
  kExitStuck = 2,
  kExitBudget = 3,
  kExitUsage = 64,
  kExitParse = 65,
};

struct CliOptions {
  std::optional<std::int64_t> budget;
  std::optional<std::int64_t> fuel;
  bool deep = false;
  size_t max_tuples = 256;
  std::string trace_path;
  std::string json_path;
  std::string emit_cex_path;
  bool timings = false;
  AttackBounds bounds;
  std::ostream* out = &std::cout;
};

namespace cli_detail {

inline std::int64_t env_or(const char* name, std::int64_t fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  try {
    return std::stoll(v);
  } catch (...) {
    return fallback;
  }
}

// flags > environment > defaults
inline std::int64_t resolve_budget(const CliOptions& o, std::int64_t def) {
  if (o.budget) return *o.budget;
  return env_or("LOO_BUDGET", def);
}
inline std::int64_t resolve_fuel(const CliOptions& o) {
  if (o.fuel) return *o.fuel;
  return env_or("LOO_FUEL", kDefaultGhostFuel);
}

struct LoadedModules {
  std::vector<ModuleDef> mods;
  LinkedProgram prog;
};

inline Outcome<LoadedModules> load_modules(
    const std::vector<std::string>& paths, Report* report) {
  LoadedModules lm;
  for (auto& p : paths) {
    auto text = read_file(p);
    if (!text) return Outcome<LoadedModules>::err(text.error());
    if (report) report->add_input(p, *text);
    try {
      lm.mods.push_back(parse_module(*text));
    } catch (const ParseError& e) {
      return Outcome<LoadedModules>::err(p + ": " + e.what());
    }
  }
  if (lm.mods.empty())
    return Outcome<LoadedModules>::err("no module files given");
  std::vector<ModuleDef> externals(lm.mods.begin() + 1, lm.mods.end());
  try {
    lm.prog = link(lm.mods.front(), externals);
  } catch (const LinkError& e) {
    return Outcome<LoadedModules>::err(e.what());
  }
  return lm;
}

inline void finish(const Report& report, const CliOptions& opt) {
  if (!opt.json_path.empty()) report.write(opt.json_path);
}

}  // namespace cli_detail

// loo run <modules...> --scenario <file> [--trace out.jsonl] [--budget N]
inline int cmd_run(const std::vector<std::string>& module_paths,
                   const std::string& scenario_path, const CliOptions& opt) {
  Report report("run");
  auto lm = cli_detail::load_modules(module_paths, &report);
  if (!lm) {
    *opt.out << "error: " << lm.error() << "\n";
    return kExitParse;
  }
  auto sc_text = read_file(scenario_path);
  if (!sc_text) {
    *opt.out << "error: " << sc_text.error() << "\n";
    return kExitParse;
  }
  report.add_input(scenario_path, *sc_text);
  Scenario sc;
  try {
    sc = parse_scenario(*sc_text);
  } catch (const ParseError& e) {
    *opt.out << "error: " << e.what() << "\n";
    return kExitParse;
  }
  auto st = build_scenario_state(lm->prog, sc);
  if (!st) {
    *opt.out << "error: " << st.error() << "\n";
    return kExitParse;
  }
  std::int64_t budget = cli_detail::resolve_budget(opt, kDefaultRunBudget);
  ScopedTrace tr = bounded_star(lm->prog, *st, budget);
  if (!opt.trace_path.empty()) {
    std::ofstream tf(opt.trace_path);
    tf << trace_jsonl(tr);
  }
  int code = kExitOk;
  switch (tr.end) {
    case ScopedTrace::End::Final:
    case ScopedTrace::End::BelowScope:
      report.add_verdict("run", "terminated",
                         std::to_string(tr.steps.size()) + " steps");
      break;
    case ScopedTrace::End::Stuck:
      report.add_verdict("run", "stuck",
                         std::string(show(tr.stuck_reason)) + ": " +
                             tr.stuck_message);
      *opt.out << "stuck: " << show(tr.stuck_reason) << " ("
               << tr.stuck_message << ")\n";
      code = kExitStuck;
      break;
    case ScopedTrace::End::BudgetExhausted:
      report.add_verdict("run", "budget-exhausted", std::to_string(budget));
      *opt.out << "budget exhausted after " << budget << " steps\n";
      code = kExitBudget;
      break;
  }
  if (code == kExitOk)
    *opt.out << "terminated after " << tr.steps.size() << " steps\n";
  cli_detail::finish(report, opt);
  return code;
}

// loo monitor <modules...> --spec <file> --scenario <file>
inline int cmd_monitor(const std::vector<std::string>& module_paths,
                       const std::string& spec_path,
                       const std::string& scenario_path,
                       const CliOptions& opt) {
  Report report("monitor");
  auto lm = cli_detail::load_modules(module_paths, &report);
  if (!lm) {
    *opt.out << "error: " << lm.error() << "\n";
    return kExitParse;
  }
  auto spec_text = read_file(spec_path);
  auto sc_text = read_file(scenario_path);
  if (!spec_text || !sc_text) {
    *opt.out << "error: "
             << (spec_text ? sc_text.error() : spec_text.error()) << "\n";
    return kExitParse;
  }
  report.add_input(spec_path, *spec_text);
  report.add_input(scenario_path, *sc_text);
  Spec spec;
  Scenario sc;
  try {
    spec = parse_spec(*spec_text);
    sc = parse_scenario(*sc_text);
  } catch (const ParseError& e) {
    *opt.out << "error: " << e.what() << "\n";
    return kExitParse;
  }
  Diagnostics wf = wf_spec(lm->prog.internal(), spec);
  if (!wf.empty()) {
    for (auto& d : wf) *opt.out << "spec error: " << d.message << "\n";
    return kExitParse;
  }
  auto st = build_scenario_state(lm->prog, sc);
  if (!st) {
    *opt.out << "error: " << st.error() << "\n";
    return kExitParse;
  }
  MonitorOptions mopt;
  mopt.budget = cli_detail::resolve_budget(opt, kDefaultMonitorBudget);
  mopt.fuel = cli_detail::resolve_fuel(opt);
  mopt.deep = opt.deep;
  mopt.max_tuples = opt.max_tuples;
  auto verdicts = monitor_spec(lm->prog, spec, *st, mopt);
  bool violated = false;
  for (auto& [name, v] : verdicts) {
    std::string kind = show(v.kind);
    report.add_verdict(name, kind, v.why);
    for (auto& nte : v.notes) report.add_note(name + ": " + nte);
    if (v.witness)
      report.add_witness(name, v.witness->description, v.witness->trace_jsonl);
    violated |= v.violated();
    *opt.out << name << ": " << kind;
    if (!v.why.empty()) *opt.out << " (" << v.why << ")";
    if (v.kind == Verdict::Kind::Verified)
      *opt.out << " within " << v.bound << " steps";
    *opt.out << "\n";
  }
  cli_detail::finish(report, opt);
  return violated ? kExitViolated : kExitOk;
}

// loo fuzz <modules...> --spec <file> --scenario <seed> [bounds]
inline int cmd_fuzz(const std::vector<std::string>& module_paths,
                    const std::string& spec_path,
                    const std::string& scenario_path, const CliOptions& opt) {
  Report report("fuzz");
  auto lm = cli_detail::load_modules(module_paths, &report);
  if (!lm) {
    *opt.out << "error: " << lm.error() << "\n";
    return kExitParse;
  }
  auto spec_text = read_file(spec_path);
  auto sc_text = read_file(scenario_path);
  if (!spec_text || !sc_text) {
    *opt.out << "error: "
             << (spec_text ? sc_text.error() : spec_text.error()) << "\n";
    return kExitParse;
  }
  report.add_input(spec_path, *spec_text);
  report.add_input(scenario_path, *sc_text);
  Spec spec;
  AttackSchema schema;
  try {
    spec = parse_spec(*spec_text);
    schema.seed = parse_scenario(*sc_text);
  } catch (const ParseError& e) {
    *opt.out << "error: " << e.what() << "\n";
    return kExitParse;
  }
  schema.internal = lm->mods.front();
  schema.externals.assign(lm->mods.begin() + 1, lm->mods.end());
  schema.bounds = opt.bounds;
  schema.bounds.budget = cli_detail::resolve_budget(opt, kDefaultFuzzBudget);
  Diagnostics wf = wf_spec(schema.internal, spec);
  if (!wf.empty()) {
    for (auto& d : wf) *opt.out << "spec error: " << d.message << "\n";
    return kExitParse;
  }
  MonitorOptions mopt;
  mopt.fuel = cli_detail::resolve_fuel(opt);
  mopt.max_tuples = opt.max_tuples;
  SearchResult r = attack_search(schema, spec, mopt);
  report.set("candidates", r.candidates);
  if (r.found) {
    report.add_verdict(r.cex.conjunct, "violated", r.cex.instantiation);
    report.add_witness(r.cex.conjunct, r.cex.program_text,
                       r.cex.witness_trace);
    *opt.out << "counterexample after " << r.cex.candidate_index + 1
             << " candidates, violating " << r.cex.conjunct << " ("
             << r.cex.instantiation << ")\n"
             << r.cex.program_text;
    if (!opt.emit_cex_path.empty()) {
      std::ofstream cf(opt.emit_cex_path);
      cf << "// violates " << r.cex.conjunct << " " << r.cex.instantiation
         << "\n"
         << r.cex.program_text;
    }
  } else {
    report.add_verdict("search", "exhausted",
                       std::to_string(r.candidates) + " candidates");
    *opt.out << "exhausted " << r.candidates
             << " candidates, no counterexample\n";
  }
  cli_detail::finish(report, opt);
  return r.found ? kExitViolated : kExitOk;
}

// loo check <bundle.proof> (module/spec paths from the bundle)
inline int cmd_check(const std::string& bundle_path, const CliOptions& opt) {
  Report report("check");
  auto text = read_file(bundle_path);
  if (!text) {
    *opt.out << "error: " << text.error() << "\n";
    return kExitParse;
  }
  report.add_input(bundle_path, *text);
  auto [mod_path, spec_path] = scan_proof_paths(*text);
  if (mod_path.empty() || spec_path.empty()) {
    *opt.out << "error: bundle names no module/spec\n";
    return kExitParse;
  }
  auto mod_text = read_file(mod_path);
  auto spec_text = read_file(spec_path);
  if (!mod_text || !spec_text) {
    *opt.out << "error: "
             << (mod_text ? spec_text.error() : mod_text.error()) << "\n";
    return kExitParse;
  }
  report.add_input(mod_path, *mod_text);
  report.add_input(spec_path, *spec_text);
  ModuleDef mod;
  Spec spec;
  ProofBundle bundle;
  try {
    mod = parse_module(*mod_text);
    spec = parse_spec(*spec_text);
    bundle = parse_proof(*text, mod);
  } catch (const ParseError& e) {
    *opt.out << "error: " << e.what() << "\n";
    return kExitParse;
  }
  CheckReport cr = check_module(mod, spec, bundle);
  for (auto& d : cr.diagnostics) {
    report.add_verdict("diagnostic", "rejected", d.message);
    *opt.out << "rejected: " << d.message << "\n";
  }
  for (auto& o : cr.open) {
    report.add_open(o.name, o.description);
    *opt.out << "open obligation " << o.name << ": " << o.description << "\n";
  }
  for (auto& t : cr.trusted) report.add_assumption(t);
  report.set("discharged-entailments", cr.discharged.size());
  if (cr.accepted && cr.zero_open) {
    report.add_verdict(bundle.name, "accepted", "zero open obligations");
    *opt.out << "accepted: " << bundle.name << " with "
             << cr.discharged.size() << " discharged entailments";
    if (!cr.trusted.empty())
      *opt.out << ", trusting " << cr.trusted.size() << " assumptions";
    *opt.out << "\n";
  } else if (cr.accepted) {
    report.add_verdict(bundle.name, "open",
                       std::to_string(cr.open.size()) + " open obligations");
  }
  cli_detail::finish(report, opt);
  if (!cr.accepted) return kExitViolated;
  return cr.zero_open ? kExitOk : kExitViolated;
}

// loo fmt <module.loo>
inline int cmd_fmt(const std::string& path, const CliOptions& opt) {
  auto text = read_file(path);
  if (!text) {
    *opt.out << "error: " << text.error() << "\n";
    return kExitParse;
  }
  try {
    *opt.out << show_module(parse_module(*text));
  } catch (const ParseError& e) {
    *opt.out << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}

}  // namespace loo
