// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include "loo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"loo: interpreter, monitor, fuzzer, and proof checker for the "
               "Loo object-capability language"};
  app.require_subcommand(1);

  loo::CliOptions opt;
  std::vector<std::string> modules;
  std::string scenario, spec, bundle, file;
  std::int64_t budget = -1, fuel = -1;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--budget", budget, "step budget (overrides LOO_BUDGET)");
    c->add_option("--fuel", fuel, "ghost evaluation fuel (overrides LOO_FUEL)");
    c->add_option("--json", opt.json_path, "write a JSON report here");
    c->add_flag("--timings", opt.timings, "include timing in the report");
  };

  CLI::App* run = app.add_subcommand("run", "execute a scenario");
  run->add_option("modules", modules, "module files (first is internal)")
      ->required();
  run->add_option("--scenario", scenario, "scenario file")->required();
  run->add_option("--trace", opt.trace_path, "write a JSON-lines trace here");
  add_common(run);

  CLI::App* mon = app.add_subcommand("monitor", "check a spec along a scenario");
  mon->add_option("modules", modules, "module files (first is internal)")
      ->required();
  mon->add_option("--spec", spec, "specification file")->required();
  mon->add_option("--scenario", scenario, "scenario file")->required();
  mon->add_flag("--deep", opt.deep, "deep satisfaction (all frames)");
  mon->add_option("--max-tuples", opt.max_tuples,
                  "instantiation cap for invariant binders");
  add_common(mon);

  CLI::App* fuzz = app.add_subcommand("fuzz", "search for attacker programs");
  fuzz->add_option("modules", modules, "module files (first is internal)")
      ->required();
  fuzz->add_option("--spec", spec, "specification file")->required();
  fuzz->add_option("--scenario", scenario, "seed scenario (heap only)")
      ->required();
  fuzz->add_option("--max-stmts", opt.bounds.max_stmts, "driver length bound");
  fuzz->add_option("--max-objects", opt.bounds.max_objects,
                   "fresh object bound");
  fuzz->add_option("--max-depth", opt.bounds.max_depth,
                   "attacker call nesting bound");
  fuzz->add_option("--cb-stmts", opt.bounds.cb_stmts,
                   "callback body length bound");
  fuzz->add_option("--emit-cex", opt.emit_cex_path,
                   "write the counterexample program here");
  fuzz->add_option("--max-tuples", opt.max_tuples,
                   "instantiation cap for invariant binders");
  add_common(fuzz);

  CLI::App* check = app.add_subcommand("check", "check a proof bundle");
  check->add_option("bundle", bundle, "proof bundle file")->required();
  add_common(check);

  CLI::App* fmt = app.add_subcommand("fmt", "parse and pretty-print a module");
  fmt->add_option("file", file, "module file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : loo::kExitUsage;
  }

  if (budget >= 0) opt.budget = budget;
  if (fuel >= 0) opt.fuel = fuel;

  if (run->parsed()) return loo::cmd_run(modules, scenario, opt);
  if (mon->parsed()) return loo::cmd_monitor(modules, spec, scenario, opt);
  if (fuzz->parsed()) return loo::cmd_fuzz(modules, spec, scenario, opt);
  if (check->parsed()) return loo::cmd_check(bundle, opt);
  if (fmt->parsed()) return loo::cmd_fmt(file, opt);
  return loo::kExitUsage;
}
