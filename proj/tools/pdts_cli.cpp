// Command-line front end: run, check, explore, matrix.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pdts/harness.hpp"

namespace {

using namespace pdts;

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string meta_path(const std::string& trace_path) { return trace_path + ".meta.json"; }

int cmd_run(const std::string& scenario_arg, const std::string& algorithm_arg, const std::string& schedule_arg,
            const std::string& out_path) {
  const Scenario scenario = load_scenario(scenario_arg);
  const AlgorithmVariant algorithm = AlgorithmVariant::parse(algorithm_arg);
  const SimConfig config;
  const Schedule schedule = load_schedule(schedule_arg, algorithm, config);
  const ExecutionTrace trace = run(config, algorithm, scenario, schedule);

  write_file(out_path, to_jsonl(trace));
  // Sidecar with everything needed to re-run the execution.
  RunContext ctx{config, algorithm, scenario, schedule_from_json(trace.schedule)};
  json meta = to_json(ctx);
  meta["scenario"]["name"] = scenario.name;
  write_file(meta_path(out_path), meta.dump(2) + "\n");

  for (const auto& txn : trace.transactions()) {
    const auto resp = trace.coordinator_response(txn);
    std::cout << txn << ": ";
    if (!resp) {
      std::cout << "undecided\n";
      continue;
    }
    const Step& s = trace[*resp];
    std::cout << (s.outcome == Outcome::Commit ? "commit" : "abort") << " reads=" << s.read_set.dump()
              << " writes=" << s.write_set.dump() << " depth=" << txn_depth(trace, txn) << '\n';
  }
  std::cout << trace.size() << " steps written to " << out_path << '\n';
  return kPass;
}

std::optional<RunContext> load_meta(const std::string& trace_path) {
  std::ifstream in(meta_path(trace_path));
  if (!in) return std::nullopt;
  json j;
  in >> j;
  return run_context_from_json(j);
}

RunContext require_meta(const std::string& trace_path, const std::string& property) {
  auto ctx = load_meta(trace_path);
  if (!ctx) throw ConfigError(property + " needs the run sidecar " + meta_path(trace_path));
  return *ctx;
}

int cmd_check(const std::string& trace_path, const std::string& property_arg, int s) {
  const Property property = property_from_cli(property_arg);
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot open trace '" + trace_path + "'");
  const ExecutionTrace trace = read_jsonl(in);
  const auto meta = load_meta(trace_path);

  Verdict v;
  switch (property) {
    case Property::Serializability: {
      const auto initial = meta ? meta->scenario.placement.initial_values() : std::map<ItemId, Word>{};
      v = check_serializability(derive_history(trace, initial));
      break;
    }
    case Property::WeakProgress: v = check_weak_progress({trace}); break;
    case Property::WeakIR: v = check_weak_ir(trace); break;
    case Property::StrongIR: v = check_strong_ir(require_meta(trace_path, property_arg)); break;
    case Property::DAP:
    case Property::DDAP: {
      const RunContext ctx = require_meta(trace_path, property_arg);
      const Simulator probe(ctx.config, ctx.algorithm, ctx.scenario);
      v = property == Property::DAP ? check_dap(trace, probe.scenario()) : check_ddap(trace, probe.scenario());
      break;
    }
    case Property::FastDecision: v = check_fast_decision(trace); break;
    case Property::SeamlessFT: v = check_seamless_ft(require_meta(trace_path, property_arg), s); break;
    case Property::ReadDelay: v = check_read_delay(trace); break;
  }
  std::cout << to_json(v).dump(2) << '\n';
  if (!v.pass) {
    std::cerr << to_string(v.property) << " FAILED: " << v.details << '\n';
    return kCheckFailed;
  }
  return kPass;
}

int cmd_explore(const std::string& scenario_arg, const std::string& algorithm_arg, const std::string& mode,
                std::optional<std::size_t> max, std::uint64_t seed, std::size_t bound, const std::string& out_path) {
  const Scenario scenario = load_scenario(scenario_arg);
  const AlgorithmVariant algorithm = AlgorithmVariant::parse(algorithm_arg);
  ExploreOptions opt;
  if (mode == "exhaustive") {
    opt.mode = ExploreOptions::Mode::Exhaustive;
    if (max) opt.max_schedules = *max;
  } else if (mode == "random") {
    opt.mode = ExploreOptions::Mode::Random;
    if (max) opt.random_runs = *max;
  } else {
    throw ConfigError("unknown mode '" + mode + "'");
  }
  opt.seed = seed;
  opt.preemption_bound = bound;
  const ExplorationResult r = explore(SimConfig{}, scenario, algorithm, opt);
  json j = to_json(r);
  j["scenario"] = scenario.name;
  j["algorithm"] = algorithm.cli_name();
  j["mode"] = mode;
  j["preemptionBound"] = bound;
  write_file(out_path, j.dump(2) + "\n");

  std::cout << r.schedules_run << " schedules, " << r.terminal_histories.size() << " distinct histories, "
            << r.violation_count << " serializability violation(s), " << r.invariant_failures
            << " invariant failure(s)\n";
  for (const auto& m : r.invariant_messages) std::cout << "  invariant: " << m << '\n';
  if (!r.violations.empty()) {
    const auto& v = r.violations.front();
    std::cerr << "first violation: " << v.verdict.details << ' ' << v.verdict.witness.dump() << '\n';
    return kCheckFailed;
  }
  return r.invariant_failures == 0 ? kPass : kCheckFailed;
}

int cmd_matrix(const std::string& out_path, const std::string& json_path) {
  const MatrixReport report = build_matrix();
  write_file(out_path, report.markdown());
  if (!json_path.empty()) write_file(json_path, report.to_json().dump(2) + "\n");
  std::cout << report.markdown().substr(0, report.markdown().find("## Witnesses"));
  return report.matches_expectations() ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and property checker for parallel distributed transactional systems"};
  app.require_subcommand(1);

  std::string scenario, algorithm, schedule, out, trace, property, mode, json_out;
  int s = 1;
  std::optional<std::size_t> max;
  std::uint64_t seed = 1;
  std::size_t bound = 0;

  auto* run = app.add_subcommand("run", "Run a scenario under a schedule and write its trace");
  run->add_option("--scenario", scenario, "builtin name or scenario JSON file")->required();
  run->add_option("--algorithm", algorithm, "base|no-fast|weak-ir|no-seamless|no-ddap")->required();
  run->add_option("--schedule", schedule, "builtin:fids|builtin:rfids|fifo|random:SEED|file.json")->required();
  run->add_option("--out", out, "trace output (JSON lines)")->required();

  auto* check = app.add_subcommand("check", "Check a property on a recorded trace");
  check->add_option("--trace", trace)->required();
  check->add_option("--property", property,
                    "serializability|weak-progress|weak-ir|strong-ir|dap|ddap|fast-decision|seamless-ft|read-delay")
      ->required();
  check->add_option("--s", s, "crash count for seamless-ft")->check(CLI::NonNegativeNumber);

  auto* exp = app.add_subcommand("explore", "Explore schedules and check serializability of every outcome");
  exp->add_option("--scenario", scenario)->required();
  exp->add_option("--algorithm", algorithm)->required();
  exp->add_option("--mode", mode, "exhaustive|random")->required();
  exp->add_option("--max", max, "schedule budget (exhaustive) or run count (random)");
  exp->add_option("--seed", seed);
  exp->add_option("--preemption-bound", bound, "exhaustive: preemptions allowed per schedule");
  exp->add_option("--out", out)->required();

  auto* matrix = app.add_subcommand("matrix", "Build the variant/property matrix");
  matrix->add_option("--out", out, "Markdown report")->required();
  matrix->add_option("--json", json_out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run) return cmd_run(scenario, algorithm, schedule, out);
    if (*check) return cmd_check(trace, property, s);
    if (*exp) return cmd_explore(scenario, algorithm, mode, max, seed, bound, out);
    if (*matrix) return cmd_matrix(out, json_out);
  } catch (const pdts::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
