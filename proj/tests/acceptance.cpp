// Acceptance run: one PASS/FAIL line per criterion. Usage: acceptance <pdts-cli> <scratch-dir>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

using namespace pdts;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_tmp;

struct TraceRecord {
  ExecutionTrace trace;
  Scenario effective;
};
std::vector<TraceRecord> g_traces;  // for the invariant criterion
std::size_t g_explored = 0, g_explore_invariant_failures = 0;

ExecutionTrace keep(const AlgorithmVariant& v, const Scenario& s, const Schedule& sched) {
  const Simulator probe({}, v, s);
  auto t = run({}, v, s, sched);
  g_traces.push_back({t, probe.scenario()});
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " > " + (g_tmp / "cli.log").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

ExecutionTrace read_trace(const fs::path& p) {
  std::ifstream in(p);
  return read_jsonl(in);
}

struct Result {
  bool pass = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

bool commits_reading_initial(const ExecutionTrace& t, const TxnId& txn) {
  const auto r = t.coordinator_response(txn);
  if (!r || t[*r].outcome != pdts::Outcome::Commit) return false;
  for (const auto& rv : t[*r].read_set) {
    if (!rv.at("value").is_null()) return false;
  }
  return true;
}

int cycle_length(const Verdict& v) {
  if (v.pass || !v.witness.contains("cycle") || !v.witness["cycle"].is_array()) return 0;
  return static_cast<int>(v.witness["cycle"].size());
}

// 1
Result fids_reproduction() {
  Result o;
  const auto trace_path = g_tmp / "fids.jsonl";
  o.require(cli("run --scenario builtin:fids --algorithm base --schedule builtin:fids --out " + trace_path.string()) == 0,
            "run failed");
  const auto t = read_trace(trace_path);
  o.require(commits_reading_initial(t, "T1") && commits_reading_initial(t, "T2"), "not both committed reading ⊥");
  o.require(cli("check --trace " + trace_path.string() + " --property serializability") == 1,
            "check did not exit 1");
  const auto s = scenario_fids();
  const auto v = check_serializability(derive_history(t, s.placement.initial_values()));
  const auto h = derive_history(t, s.placement.initial_values());
  o.require(cycle_length(v) == 2 && oracle::valid_cycle(h, v.witness), "witness is not a 2-cycle");
  keep(AlgorithmVariant::parse("base"), s, schedule_fids(AlgorithmVariant::parse("base")));
  o.detail = o.pass ? "T1, T2 commit reading initial values; cycle " + v.witness["cycle"].dump() : o.detail;
  return o;
}

// 2
Result rfids_reproduction() {
  Result o;
  const auto base = AlgorithmVariant::parse("base");
  const auto s = scenario_rfids();
  const auto t = keep(base, s, schedule_rfids(base));
  for (const TxnId id : {"T1", "T2", "T3"}) o.require(commits_reading_initial(t, id), id + " did not commit reading ⊥");
  const auto h = derive_history(t, s.placement.initial_values());
  const auto v = check_serializability(h);
  o.require(cycle_length(v) == 3 && oracle::valid_cycle(h, v.witness), "witness is not a 3-cycle");
  std::string depths;
  for (int i = 1; i <= 3; ++i) {
    const auto solo = scenario_rfids_solo(i);
    const auto plain = run({}, base, solo, Schedule::fifo());
    const auto crashed = keep(base, solo, inject_crash(schedule_from_json(plain.schedule), i - 1, 0));
    o.require(!crashed.steps.empty() && crashed[0].kind == StepKind::Crash && crashed[0].node == i - 1,
              "solo " + std::to_string(i) + " does not start with the crash");
    const TxnId id = "T" + std::to_string(i);
    const auto r = crashed.coordinator_response(id);
    o.require(r && crashed[*r].outcome == pdts::Outcome::Commit, id + " solo did not commit");
    if (!r) continue;
    const DepthAnalysis da(crashed);
    const int d = da.txn_depth(id);
    o.require(d == 4, id + " solo depth " + std::to_string(d));
    depths += (depths.empty() ? "" : ",") + std::to_string(d);
    for (const auto& [item, idx] : value_learned_events(crashed, id)) {
      const int pd = da.partial_depth(idx + 1, id);
      o.require(pd >= 2, id + " learned " + item + " at partial depth " + std::to_string(pd));
    }
  }
  if (o.pass) o.detail = "3-cycle " + v.witness["cycle"].dump() + "; crash-first solo depths " + depths;
  return o;
}

Verdict recheck(const std::string& column, const RunContext& ctx) {
  const auto t = ctx.run();
  const Simulator probe(ctx.config, ctx.algorithm, ctx.scenario);
  if (column == "Serializability") return check_serializability(derive_history(t, ctx.scenario.placement.initial_values()));
  if (column == "FastDecision") return check_fast_decision(t);
  if (column == "WeakIR") return check_weak_ir(t);
  if (column == "StrongIR") return check_strong_ir(ctx);
  if (column == "DAP/DDAP") {
    const auto dap = check_dap(t, probe.scenario());
    return dap.pass ? check_ddap(t, probe.scenario()) : dap;
  }
  return check_seamless_ft(ctx, 1);
}

// 3
Result property_matrix() {
  Result o;
  const auto report = build_matrix();
  o.require(report.matches_expectations(), "matrix differs from the expected table");
  int fails = 0;
  for (const auto& row : report.rows) {
    for (const auto& c : row.cells) {
      if (c.pass) continue;
      ++fails;
      const std::string where = row.variant.display_name() + "/" + c.column;
      o.require(!c.witness_run.is_null(), where + " has no witness");
      if (c.witness_run.is_null()) continue;
      const RunContext ctx = run_context_from_json(c.witness_run);
      const auto a = ctx.run(), b = ctx.run();
      o.require(to_jsonl(a) == to_jsonl(b), where + " witness does not replay identically");
      o.require(!recheck(c.column, ctx).pass, where + " witness no longer fails");
      const Simulator probe(ctx.config, ctx.algorithm, ctx.scenario);
      g_traces.push_back({a, probe.scenario()});
    }
  }
  o.require(fails == 5, "expected 5 FAIL cells, got " + std::to_string(fails));
  if (o.pass) o.detail = "5x6 table as expected, 5 FAIL cells replay and re-fail";
  return o;
}

// 4
Result fast_decision_depths() {
  Result o;
  std::string base_depths, excess;
  for (int r = 0; r <= 3; ++r) {
    for (const char* name : {"base", "no-fast"}) {
      const auto v = AlgorithmVariant::parse(name);
      const auto t = keep(v, scenario_solo_reads(r), Schedule::fifo());
      const DepthAnalysis da(t);
      const int d = da.txn_depth("T1");
      // Partial depth at the last valueLearned event (the empty prefix when r = 0).
      std::size_t last = 0;
      for (const auto& [item, idx] : value_learned_events(t, "T1")) last = std::max(last, idx + 1);
      const int bound = da.partial_depth(last, "T1") + 2;
      if (v.tag == VariantTag::Base) {
        o.require(d == 2 * r + 2, "base r=" + std::to_string(r) + " depth " + std::to_string(d));
        o.require(d <= bound, "base r=" + std::to_string(r) + " exceeds the bound");
        o.require(check_fast_decision(t).pass, "fast-decision check fails for base");
        base_depths += std::to_string(d) + " ";
      } else {
        o.require(d - bound == 2, "no-fast r=" + std::to_string(r) + " excess " + std::to_string(d - bound));
        o.require(!check_fast_decision(t).pass, "fast-decision check passes for no-fast");
        excess += std::to_string(d - bound) + " ";
      }
    }
  }
  if (o.pass) o.detail = "base depths " + base_depths + "| no-fast excess " + excess;
  return o;
}

json response_sequence(const ExecutionTrace& t) {
  json out = json::array();
  for (const auto& s : t.steps) {
    if (s.is_coordinator_invoke()) out.push_back({{"invoke", *s.txn}});
    if (s.is_coordinator_response()) {
      out.push_back({{"response", *s.txn},
                     {"outcome", s.outcome == pdts::Outcome::Commit ? "commit" : "abort"},
                     {"reads", s.read_set},
                     {"writes", s.write_set}});
    }
  }
  return out;
}

bool same_run(const ExecutionTrace& t, const json& expected, const std::map<TxnId, int>& depth) {
  if (response_sequence(t) != expected) return false;
  for (const auto& [id, d] : depth) {
    if (!t.coordinator_response(id) || txn_depth(t, id) != d) return false;
  }
  return true;
}

/// Crash points (node, prefix length) after which no completion reproduces
/// the responses and depths of the crash-free run. Completions tried: FIFO,
/// then seeded random ones. With `stop_at_first`, returns after one such point.
std::size_t seamless_sweep(const AlgorithmVariant& v, const Scenario& s, std::size_t& points, std::size_t& needed_random,
                           bool stop_at_first = false) {
  const auto plain = keep(v, s, Schedule::fifo());
  const auto script = schedule_from_json(plain.schedule).script;
  const json expected = response_sequence(plain);
  std::map<TxnId, int> depth;
  for (const auto& id : plain.transactions()) depth[id] = txn_depth(plain, id);
  const Simulator probe({}, v, s);
  std::size_t changed = 0;
  for (NodeId n = 0; n < probe.scenario().placement.node_count(); ++n) {
    for (std::size_t at = 0; at <= script.size(); ++at) {
      ++points;
      std::vector<Decision> prefix(script.begin(), script.begin() + static_cast<std::ptrdiff_t>(at));
      prefix.push_back(Decision::crash(n));
      Schedule sched = Schedule::scripted(prefix, TailPolicy::Fifo);
      bool ok = false;
      for (int seed = 0; seed <= kSeamlessRandomCompletions && !ok; ++seed) {
        if (seed > 0) {
          sched.tail = TailPolicy::Random;
          sched.seed = static_cast<std::uint64_t>(seed);
        }
        const auto t = seed == 0 ? keep(v, s, sched) : run({}, v, s, sched);
        ok = same_run(t, expected, depth);
        if (ok && seed > 0) ++needed_random;
      }
      if (!ok) {
        ++changed;
        if (stop_at_first) return changed;
      }
    }
  }
  return changed;
}

// 5
Result seamless_sweep_criterion() {
  Result o;
  std::size_t base_points = 0, ns_points = 0, base_changed = 0, ns_changed = 0, base_random = 0, ns_random = 0;
  for (const auto& s : {scenario_solo_reads(1), scenario_solo_reads(2), scenario_rfids_solo(1)}) {
    o.require(s.placement.k == 3 && s.placement.f == 1, s.name + " is not k=3, f=1");
    base_changed += seamless_sweep(AlgorithmVariant::parse("base"), s, base_points, base_random);
    ns_changed += seamless_sweep(AlgorithmVariant::parse("no-seamless"), s, ns_points, ns_random, true);
  }
  o.require(base_changed == 0, std::to_string(base_changed) + " base injection points change the run");
  o.require(ns_changed >= 1, "no-seamless survives every injection point");
  if (o.pass) {
    o.detail = "base unchanged at all " + std::to_string(base_points) + " points (" + std::to_string(base_random) +
               " via a non-FIFO completion); no-seamless changed at " +
               std::to_string(ns_changed) + " point(s), first found after " + std::to_string(ns_points) + " tried";
  }
  return o;
}

// 6
Result oracle_cross_validation() {
  Result o;
  std::mt19937_64 rng(6);
  int n = 0, disagree = 0, fails = 0;
  for (bool realistic : {true, false}) {
    for (int i = 0; i < 1000; ++i, ++n) {
      const auto h = oracle::random_history(rng, realistic);
      const auto a = serializability_brute_force(h);
      const auto b = serializability_graph(h);
      if (a.pass != b.pass) ++disagree;
      if (!a.pass) ++fails;
      if (a.pass) o.require(oracle::legal_order(h, a.witness["serialOrder"].get<std::vector<TxnId>>()), "bad brute-force order");
      if (b.pass) o.require(oracle::legal_order(h, b.witness["serialOrder"].get<std::vector<TxnId>>()), "bad graph order");
    }
  }
  o.require(disagree == 0, std::to_string(disagree) + " disagreements");
  if (o.pass) {
    o.detail = std::to_string(n) + " histories (" + std::to_string(fails) + " non-serializable), 0 disagreements";
  }
  return o;
}

/// Non-preemptive: a process runs until it blocks or finishes.
constexpr std::size_t kAcceptancePreemptionBound = 0;

ExploreOptions exhaustive() {
  ExploreOptions opt;
  opt.mode = ExploreOptions::Mode::Exhaustive;
  opt.preemption_bound = kAcceptancePreemptionBound;
  return opt;
}

// 7
Result exploration_soundness() {
  Result o;
  std::string summary;
  for (const auto& v : all_variants()) {
    const auto r = explore({}, scenario_fids(), v, exhaustive());
    g_explored += r.schedules_run;
    g_explore_invariant_failures += r.invariant_failures;
    if (v.tag == VariantTag::Base) {
      o.require(r.violation_count >= 1, "no violation found for base");
      for (const auto& viol : r.violations) {
        const auto t = run({}, v, scenario_fids(), viol.schedule);
        o.require(!check_serializability(derive_history(t, scenario_fids().placement.initial_values())).pass,
                  "base violation schedule does not replay to a violation");
      }
    } else {
      o.require(r.violation_count == 0, v.cli_name() + " has " + std::to_string(r.violation_count) + " violations");
    }
    summary += v.cli_name() + "=" + std::to_string(r.violation_count) + "/" + std::to_string(r.schedules_run) + " ";
  }
  if (o.pass) o.detail = "violations/schedules at preemption bound " + std::to_string(kAcceptancePreemptionBound) + ": " + summary;
  return o;
}

// 8
Result determinism() {
  Result o;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"run --scenario builtin:fids --algorithm base --schedule builtin:fids", ".jsonl"},
      {"run --scenario builtin:rfids --algorithm base --schedule builtin:rfids", ".jsonl"},
      {"run --scenario conflict --algorithm no-ddap --schedule random:42", ".jsonl"},
      {"explore --scenario fids --algorithm base --mode exhaustive", ".json"},
      {"explore --scenario conflict --algorithm weak-ir --mode random --max 300 --seed 9", ".json"},
  };
  int i = 0;
  for (const auto& [args, ext] : runs) {
    ++i;
    const auto a = g_tmp / ("det" + std::to_string(i) + "a" + ext);
    const auto b = g_tmp / ("det" + std::to_string(i) + "b" + ext);
    const int ra = cli(args + " --out " + a.string());
    const int rb = cli(args + " --out " + b.string());
    o.require(ra == rb && ra != 2, "exit codes differ or usage error: " + args);
    o.require(slurp(a) == slurp(b) && !slurp(a).empty(), "outputs differ: " + args);
    if (ext == ".jsonl") o.require(slurp(a.string() + ".meta.json") == slurp(b.string() + ".meta.json"), "sidecars differ");
  }
  if (o.pass) o.detail = std::to_string(runs.size()) + " invocations byte-identical on repeat";
  return o;
}

// 9
Result invariant_suite() {
  Result o;
  std::size_t checked = 0;
  for (const auto& r : g_traces) {
    const auto bad = check_invariants(r.trace, r.effective);
    ++checked;
    o.require(bad.empty(), r.trace.scenario + "/" + r.trace.algorithm + ": " + (bad.empty() ? "" : bad.front()));
    o.require(check_weak_ir(r.trace).pass, "weak-IR fails on " + r.trace.scenario);
  }
  o.require(g_explore_invariant_failures == 0, std::to_string(g_explore_invariant_failures) + " explored traces broke invariants");
  if (o.pass) {
    o.detail = std::to_string(checked) + " recorded traces and " + std::to_string(g_explored) + " explored schedules clean";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <pdts-cli> <scratch-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_tmp = argv[2];
  fs::create_directories(g_tmp);

  const std::vector<std::pair<std::string, Result (*)()>> criteria = {
      {"FIDS reproduction", fids_reproduction},
      {"R-FIDS reproduction", rfids_reproduction},
      {"property matrix", property_matrix},
      {"fast-decision depths", fast_decision_depths},
      {"seamless-FT sweep", seamless_sweep_criterion},
      {"oracle cross-validation", oracle_cross_validation},
      {"exhaustive exploration soundness", exploration_soundness},
      {"determinism", determinism},
      {"invariant suite", invariant_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Result o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %zu. %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
