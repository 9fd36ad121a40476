#include "pdts/harness.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace pdts {

// ---------------------------------------------------------------------------
// Scenarios

namespace {

DataPlacement sharded(const std::vector<ItemId>& items) {
  DataPlacement p;
  for (std::size_t i = 0; i < items.size(); ++i) {
    p.items.push_back({items[i], nullptr});
    p.replica_groups[items[i]] = {static_cast<NodeId>(i)};
  }
  p.k = 1;
  p.f = 0;
  return p;
}

DataPlacement replicated(const std::vector<ItemId>& items, int nodes, int f) {
  DataPlacement p;
  std::vector<NodeId> all;
  for (NodeId n = 0; n < nodes; ++n) all.push_back(n);
  for (const auto& x : items) {
    p.items.push_back({x, nullptr});
    p.replica_groups[x] = all;
  }
  p.k = nodes;
  p.f = f;
  return p;
}

TransactionProgram txn(TxnId id, int client, std::vector<ItemId> reads, std::vector<WriteRule> writes) {
  TransactionProgram t;
  t.id = std::move(id);
  t.client = client;
  t.read_set = std::move(reads);
  t.write_rule = std::move(writes);
  return t;
}

WriteRule if_initial(ItemId target, std::string value) {
  return {std::move(target), WriteCondition::AllReadsInitial, std::move(value)};
}

WriteRule always(ItemId target, std::string value) {
  return {std::move(target), WriteCondition::Always, std::move(value)};
}

TransactionProgram rfids_txn(int i) {
  const std::string xi = "X" + std::to_string(i);
  const std::string xr = "X" + std::to_string(i % 3 + 1);
  return txn("T" + std::to_string(i), i - 1, {xr}, {if_initial(xi, "v" + std::to_string(i))});
}

}  // namespace

Scenario scenario_fids() {
  Scenario s;
  s.name = "fids";
  s.placement = sharded({"X1", "X2"});
  s.transactions = {txn("T1", 0, {"X1"}, {if_initial("X2", "v2")}), txn("T2", 1, {"X2"}, {if_initial("X1", "v1")})};
  return s;
}

Scenario scenario_fids_sequential() {
  Scenario s = scenario_fids();
  s.name = "fids-seq";
  s.transactions[1].start_after = "T1";
  return s;
}

Scenario scenario_rfids() {
  Scenario s;
  s.name = "rfids";
  s.placement = replicated({"X1", "X2", "X3"}, 3, 1);
  s.transactions = {rfids_txn(1), rfids_txn(2), rfids_txn(3)};
  return s;
}

Scenario scenario_rfids_solo(int i) {
  if (i < 1 || i > 3) throw ConfigError("rfids-solo index must be 1, 2 or 3");
  Scenario s = scenario_rfids();
  s.name = "rfids-solo-" + std::to_string(i);
  TransactionProgram t = rfids_txn(i);
  t.client = 0;
  s.transactions = {t};
  return s;
}

Scenario scenario_solo_reads(int r) {
  if (r < 0 || r > 3) throw ConfigError("solo read count must be in 0..3");
  Scenario s;
  s.name = "solo-" + std::to_string(r);
  s.placement = replicated({"X1", "X2", "X3", "X4"}, 3, 1);
  std::vector<ItemId> reads;
  for (int i = 1; i <= r; ++i) reads.push_back("X" + std::to_string(i));
  s.transactions = {txn("T1", 0, reads, {r == 0 ? always("X4", "w4") : if_initial("X4", "w4")})};
  return s;
}

Scenario scenario_read_only() {
  Scenario s;
  s.name = "read-only";
  s.placement = replicated({"X1", "X2"}, 3, 1);
  s.transactions = {txn("T1", 0, {"X1", "X2"}, {}), txn("T2", 1, {"X1"}, {always("X2", "w2")})};
  return s;
}

Scenario scenario_strong_ir() {
  Scenario s;
  s.name = "strong-ir";
  s.placement = sharded({"X1", "X2", "X3"});
  s.transactions = {txn("T1", 0, {"X2"}, {always("X1", "w1")}), txn("T2", 1, {"X3"}, {})};
  return s;
}

Scenario scenario_disjoint_writers() {
  Scenario s;
  s.name = "disjoint-writers";
  s.placement = sharded({"X1", "X2"});
  s.transactions = {txn("T1", 0, {"X1"}, {always("X1", "a1")}), txn("T2", 1, {"X2"}, {always("X2", "a2")})};
  return s;
}

Scenario scenario_conflict() {
  Scenario s;
  s.name = "conflict";
  s.placement = replicated({"X1", "X2"}, 3, 1);
  s.transactions = {txn("T1", 0, {"X1"}, {always("X2", "c2")}), txn("T2", 1, {"X2"}, {always("X1", "c1")})};
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  return {"fids",    "fids-seq", "rfids",     "rfids-solo-1", "rfids-solo-2",     "rfids-solo-3", "solo-0",
          "solo-1",  "solo-2",   "solo-3",    "read-only",    "strong-ir",        "disjoint-writers",
          "conflict"};
}

Scenario load_scenario(const std::string& name_or_path) {
  std::string name = name_or_path;
  if (name.starts_with("builtin:")) name = name.substr(8);
  if (name == "fids") return scenario_fids();
  if (name == "fids-seq") return scenario_fids_sequential();
  if (name == "rfids") return scenario_rfids();
  if (name.starts_with("rfids-solo-") && name.size() == 12) return scenario_rfids_solo(name.back() - '0');
  if (name.starts_with("solo-") && name.size() == 6) return scenario_solo_reads(name.back() - '0');
  if (name == "read-only") return scenario_read_only();
  if (name == "strong-ir") return scenario_strong_ir();
  if (name == "disjoint-writers") return scenario_disjoint_writers();
  if (name == "conflict") return scenario_conflict();
  if (name_or_path.starts_with("builtin:")) throw ConfigError("unknown builtin scenario '" + name + "'");
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("cannot open scenario file '" + name_or_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario file is not valid JSON: " + std::string(e.what()));
  }
  Scenario s = scenario_from_json(j);
  if (s.name.empty()) s.name = name_or_path;
  return s;
}

// ---------------------------------------------------------------------------
// Adversarial schedules

namespace {

bool is_validation(const Message& m) {
  const auto k = payload_kind(m.payload);
  return k == MsgKind::Validate || k == MsgKind::Lock;
}

bool isolated(const Message& m, const std::vector<std::optional<TxnId>>& isolate) {
  for (std::size_t n = 0; n < isolate.size(); ++n) {
    if (!isolate[n] || m.txn != isolate[n]) continue;
    const auto node = static_cast<NodeId>(n);
    if ((m.dst.node && *m.dst.node == node) || (m.src.node && *m.src.node == node)) return true;
  }
  return false;
}

/// FIFO choice restricted to decisions that `allowed` accepts; timeouts are
/// never taken.
std::optional<Decision> restricted_fifo(const Simulator& sim, const std::function<bool(const Decision&)>& allowed) {
  const auto choices = sim.enabled();
  for (const auto& d : choices) {
    if (d.kind == Decision::Kind::Step && !sim.step_is_timeout(d.proc) && allowed(d)) return d;
  }
  for (const auto& d : choices) {
    if (d.kind == Decision::Kind::Deliver && allowed(d)) return d;
  }
  return std::nullopt;
}

}  // namespace

Schedule phased_schedule(const SimConfig& config, const AlgorithmVariant& algorithm, const Scenario& scenario,
                         const std::vector<std::vector<TxnId>>& node_orders,
                         const std::vector<std::optional<TxnId>>& isolate) {
  Simulator sim(config, algorithm, scenario);
  auto held = [&](const Message& m) { return (is_validation(m) && !m.dst.is_client()) || isolated(m, isolate); };

  // Phase 1: everything except validation-phase traffic and isolated links.
  auto phase1 = [&](const Decision& d) {
    return d.kind != Decision::Kind::Deliver || !held(sim.in_flight().at(d.msg_id));
  };
  for (std::size_t n = 0; n < kMaxDecisions; ++n) {
    auto d = restricted_fifo(sim, phase1);
    if (!d) break;
    sim.apply(*d);
  }

  // Phase 2: release validation messages node by node, in the given order,
  // running each handler to completion.
  for (std::size_t node = 0; node < node_orders.size(); ++node) {
    for (const auto& t : node_orders[node]) {
      std::optional<std::uint64_t> id;
      for (const auto& [mid, m] : sim.in_flight()) {
        if (m.txn == t && !m.dst.is_client() && *m.dst.node == static_cast<NodeId>(node) && is_validation(m) &&
            !isolated(m, isolate)) {
          id = mid;
          break;
        }
      }
      if (!id || !sim.is_enabled(Decision::deliver(*id))) continue;
      sim.apply(Decision::deliver(*id));
      const ProcessRef p = *sim.trace().steps.back().proc;
      while (sim.has_enabled_step(p)) sim.apply(Decision::step(p));
    }
  }

  // Phase 3: FIFO completion, isolated links included.
  for (std::size_t n = 0; n < kMaxDecisions; ++n) {
    auto d = Scheduler::fifo_choice(sim);
    if (!d) {
      if (sim.advance_idle_time()) continue;
      break;
    }
    sim.apply(*d);
  }
  return Schedule::scripted(sim.realized());
}

Schedule schedule_fids(const AlgorithmVariant& algorithm, const SimConfig& config) {
  return phased_schedule(config, algorithm, scenario_fids(), {{"T1", "T2"}, {"T2", "T1"}});
}

Schedule schedule_rfids(const AlgorithmVariant& algorithm, const SimConfig& config) {
  return phased_schedule(config, algorithm, scenario_rfids(), {{"T2", "T3"}, {"T3", "T1"}, {"T1", "T2"}},
                         {"T1", "T2", "T3"});
}

Schedule load_schedule(const std::string& spec, const AlgorithmVariant& algorithm, const SimConfig& config) {
  if (spec == "builtin:fids") return schedule_fids(algorithm, config);
  if (spec == "builtin:rfids") return schedule_rfids(algorithm, config);
  if (spec == "fifo" || spec == "builtin:fifo") return Schedule::fifo();
  if (spec.starts_with("random:")) {
    try {
      std::size_t used = 0;
      const auto seed = std::stoull(spec.substr(7), &used);
      if (used != spec.size() - 7) throw std::invalid_argument(spec);
      return Schedule::random(seed);
    } catch (const std::logic_error&) {
      throw ConfigError("bad random seed in '" + spec + "'");
    }
  }
  if (spec.starts_with("builtin:")) throw ConfigError("unknown builtin schedule '" + spec + "'");
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot open schedule file '" + spec + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("schedule file is not valid JSON: " + std::string(e.what()));
  }
  if (j.is_array()) {
    std::vector<Decision> script;
    for (const auto& d : j) script.push_back(decision_from_json(d));
    return Schedule::scripted(script);
  }
  if (j.contains("schedule")) return schedule_from_json(j.at("schedule"));
  return schedule_from_json(j);
}

// ---------------------------------------------------------------------------
// Exploration

json to_json(const ExplorationResult& r) {
  json histories = json::array(), violations = json::array();
  for (const auto& h : r.terminal_histories) histories.push_back(to_json(h));
  for (const auto& v : r.violations) {
    violations.push_back(json{{"schedule", to_json(v.schedule)}, {"verdict", to_json(v.verdict)},
                              {"history", to_json(v.history)}});
  }
  return json{{"schedulesRun", r.schedules_run},
              {"terminalHistories", histories},
              {"violationCount", r.violation_count},
              {"violations", violations},
              {"sleepBlocked", r.sleep_blocked},
              {"invariantFailures", r.invariant_failures},
              {"invariantMessages", r.invariant_messages}};
}

namespace {

/// Collects terminal results of explored schedules.
class Collector {
 public:
  Collector(const Scenario& scenario, ExplorationResult& result) : scenario_(scenario), result_(result) {}

  void add(const ExecutionTrace& trace, const Scenario& effective, const std::vector<Decision>& realized) {
    ++result_.schedules_run;
    const CommittedHistory h = derive_history(trace, scenario_.placement.initial_values());
    const std::string key = to_json(h).dump();
    if (seen_.insert(key).second) histories_.emplace(key, h);
    const auto it = verdicts_.find(key);
    const Verdict v = it != verdicts_.end() ? it->second : verdicts_.emplace(key, check_serializability(h)).first->second;
    if (!v.pass) {
      ++result_.violation_count;
      if (result_.violations.size() < kKeptViolations) {
        result_.violations.push_back({Schedule::scripted(realized), v, h});
      }
    }
    const auto problems = check_invariants(trace, effective);
    if (!problems.empty()) {
      ++result_.invariant_failures;
      for (const auto& p : problems) {
        if (result_.invariant_messages.size() < 10) result_.invariant_messages.push_back(p);
      }
    }
  }

  void finish() {
    for (auto& [key, h] : histories_) result_.terminal_histories.push_back(h);
  }

 private:
  static constexpr std::size_t kKeptViolations = 20;
  const Scenario& scenario_;
  ExplorationResult& result_;
  std::set<std::string> seen_;
  std::map<std::string, CommittedHistory> histories_;
  std::map<std::string, Verdict> verdicts_;
};

struct Option {
  Decision decision;
  std::string location;  // process group the decision acts on; "*" for crashes
  std::size_t preemption = 0;
};

struct ChoicePoint {
  std::vector<Option> options;
  std::vector<Option> sleep;  // on entry
  std::size_t taken = 0;
};

std::string location(const Simulator& sim, const Decision& d) {
  auto of = [](const ProcessRef& p) { return p.is_client() ? "C" + std::to_string(p.index) : "N" + std::to_string(*p.node); };
  switch (d.kind) {
    case Decision::Kind::Step: return of(d.proc);
    case Decision::Kind::Deliver: return of(sim.in_flight().at(d.msg_id).dst);
    case Decision::Kind::Crash: return "*";
  }
  return "*";
}

/// Decisions on different nodes/clients touch disjoint state and commute.
bool independent(const Option& a, const Option& b) {
  return a.location != "*" && b.location != "*" && a.location != b.location;
}

bool asleep(const std::vector<Option>& sleep, const Decision& d) {
  return std::any_of(sleep.begin(), sleep.end(), [&](const Option& o) { return o.decision == d; });
}

/// Options at the current state given the running process and the
/// preemptions spent so far.
std::vector<Option> options_at(const Simulator& sim, const std::optional<ProcessRef>& running, std::size_t preemptions,
                               const ExploreOptions& opt) {
  std::vector<Decision> regular, timeouts;
  for (const auto& d : sim.enabled()) {
    if (d.kind == Decision::Kind::Step && sim.step_is_timeout(d.proc)) timeouts.push_back(d);
    else regular.push_back(d);
  }
  // Timers only fire once nothing else can happen.
  if (regular.empty()) regular = timeouts;
  std::vector<Option> out;
  const bool running_busy = running && sim.has_enabled_step(*running) && !sim.step_is_timeout(*running);
  if (running_busy) {
    const Decision cont = Decision::step(*running);
    out.push_back({cont, location(sim, cont), 0});
    if (opt.reduction && sim.next_step_is_local_trivial(*running)) return out;
    if (preemptions < opt.preemption_bound) {
      for (const auto& d : regular) {
        if (d != cont) out.push_back({d, location(sim, d), 1});
      }
    }
    return out;
  }
  for (const auto& d : regular) out.push_back({d, location(sim, d), 0});
  return out;
}

}  // namespace

ExplorationResult explore(const SimConfig& config, const Scenario& scenario, const AlgorithmVariant& algorithm,
                          const ExploreOptions& options) {
  ExplorationResult result;
  Collector collect(scenario, result);

  if (options.mode == ExploreOptions::Mode::Random) {
    for (std::size_t i = 0; i < options.random_runs; ++i) {
      Schedule s = Schedule::random(options.seed * 1000003ULL + i);
      s.allow_crashes = scenario.crash_budget() > 0;
      Simulator sim(config, algorithm, scenario);
      Scheduler sched(s, sim.config().delta, sim.config().gst);
      for (std::size_t n = 0; n < kMaxDecisions; ++n) {
        auto d = sched.next(sim);
        if (!d) break;
        sim.apply(*d);
      }
      const Scenario effective = sim.scenario();
      const std::vector<Decision> realized = sim.realized();
      collect.add(sim.take_trace(false), effective, realized);
    }
    collect.finish();
    return result;
  }

  // Depth-first search with sleep sets; every leaf is one replay from the
  // initial state. stack[i] is the i-th choice point of the current path.
  std::vector<ChoicePoint> stack;
  for (;;) {
    Simulator sim(config, algorithm, scenario);
    std::optional<ProcessRef> running;
    std::size_t preemptions = 0;
    std::size_t depth = 0;
    std::vector<Option> sleep;
    bool blocked = false;
    for (std::size_t n = 0; n < kMaxDecisions; ++n) {
      std::vector<Option> opts = options_at(sim, running, preemptions, options);
      if (opts.empty()) {
        if (sim.advance_idle_time()) continue;
        break;
      }
      if (depth == stack.size()) {
        ChoicePoint cp{opts, sleep, 0};
        while (cp.taken < opts.size() && asleep(sleep, opts[cp.taken].decision)) ++cp.taken;
        if (cp.taken == opts.size()) {
          blocked = true;  // every continuation is covered by another branch
          break;
        }
        stack.push_back(std::move(cp));
      }
      const ChoicePoint& cp = stack[depth];
      const Option chosen = cp.options[cp.taken];
      std::vector<Option> next_sleep;
      for (const auto& o : cp.sleep) {
        if (independent(o, chosen)) next_sleep.push_back(o);
      }
      for (std::size_t i = 0; i < cp.taken; ++i) {
        if (!asleep(cp.sleep, cp.options[i].decision) && independent(cp.options[i], chosen)) {
          next_sleep.push_back(cp.options[i]);
        }
      }
      sleep = std::move(next_sleep);
      ++depth;
      preemptions += chosen.preemption;
      sim.apply(chosen.decision);
      running = sim.trace().steps.back().proc;
    }
    if (blocked) {
      ++result.sleep_blocked;
    } else {
      const Scenario effective = sim.scenario();
      const std::vector<Decision> realized = sim.realized();
      collect.add(sim.take_trace(false), effective, realized);
      if (result.schedules_run > options.max_schedules) {
        throw BudgetExceeded("more than " + std::to_string(options.max_schedules) + " schedules");
      }
    }
    // Backtrack to the deepest point with an untried, awake option.
    stack.resize(depth);
    bool advanced = false;
    while (!stack.empty()) {
      ChoicePoint& cp = stack.back();
      std::size_t next = cp.taken + 1;
      while (next < cp.options.size() && asleep(cp.sleep, cp.options[next].decision)) ++next;
      if (next < cp.options.size()) {
        cp.taken = next;
        advanced = true;
        break;
      }
      stack.pop_back();
    }
    if (!advanced) break;
  }
  collect.finish();
  return result;
}

// ---------------------------------------------------------------------------
// Property matrix

bool matrix_expectation(VariantTag variant, const std::string& column) {
  switch (variant) {
    case VariantTag::Base: return column != "Serializability";
    case VariantTag::NoFastDecision: return column != "FastDecision";
    case VariantTag::WeakIrOnly: return column != "StrongIR";
    case VariantTag::NoSeamlessFt: return column != "SeamlessFT(1)";
    case VariantTag::NoDdap: return column != "DAP/DDAP";
  }
  return true;
}

bool MatrixReport::matches_expectations() const {
  for (const auto& row : rows) {
    for (const auto& c : row.cells) {
      if (c.pass != c.expected_pass) return false;
    }
  }
  return true;
}

std::string MatrixReport::markdown() const {
  std::ostringstream os;
  os << "# Property matrix\n\n| Variant |";
  for (const auto& c : matrix_columns()) os << ' ' << c << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < matrix_columns().size(); ++i) os << "---|";
  os << '\n';
  for (const auto& row : rows) {
    os << "| " << row.variant.display_name() << " |";
    for (const auto& c : row.cells) {
      os << ' ' << (c.pass ? "PASS" : "FAIL") << (c.pass == c.expected_pass ? "" : " (unexpected)") << " |";
    }
    os << '\n';
  }
  os << "\nExpectations met: " << (matches_expectations() ? "yes" : "no") << "\n\n## Witnesses\n";
  for (const auto& row : rows) {
    for (const auto& c : row.cells) {
      if (c.pass) continue;
      os << "\n### " << row.variant.display_name() << " / " << c.column << "\n\n" << c.verdict.details << "\n\n";
      if (!c.witness_run.is_null()) {
        os << "Replay: scenario `" << c.witness_run.at("scenario").value("name", "") << "`, algorithm `"
           << c.witness_run.at("algorithm").get<std::string>() << "`, "
           << c.witness_run.at("schedule").at("script").size() << " scheduled decisions (full schedule in the JSON "
           << "report).\n\n";
      }
      os << "```json\n" << c.verdict.witness.dump() << "\n```\n";
    }
  }
  return os.str();
}

json MatrixReport::to_json() const {
  json out = json::array();
  for (const auto& row : rows) {
    json cells = json::array();
    for (const auto& c : row.cells) {
      cells.push_back(json{{"column", c.column},
                           {"pass", c.pass},
                           {"expectedPass", c.expected_pass},
                           {"verdict", pdts::to_json(c.verdict)},
                           {"witnessRun", c.witness_run}});
    }
    out.push_back(json{{"variant", row.variant.display_name()}, {"cells", cells}});
  }
  return json{{"rows", out}, {"matchesExpectations", matches_expectations()}};
}

namespace {

struct Evidence {
  RunContext ctx;
  ExecutionTrace trace;
  Scenario effective;
};

Evidence evidence(const AlgorithmVariant& v, const Scenario& s, const Schedule& sched) {
  RunContext ctx{SimConfig{}, v, s, sched};
  Simulator probe(ctx.config, v, s);
  return {ctx, ctx.run(), probe.scenario()};
}

// Pins the realized schedule so the witness replays without the scheduler.
json witness_run(const RunContext& ctx) {
  RunContext pinned = ctx;
  pinned.schedule = schedule_from_json(ctx.run().schedule);
  json j = to_json(pinned);
  j["scenario"]["name"] = ctx.scenario.name;
  return j;
}

MatrixCell cell(const std::string& column, VariantTag tag) {
  MatrixCell c;
  c.column = column;
  c.expected_pass = matrix_expectation(tag, column);
  return c;
}

/// Records the first failing verdict in the cell.
void absorb(MatrixCell& c, const Verdict& v, const RunContext& ctx) {
  if (!c.pass) return;
  c.verdict = v;
  if (!v.pass) {
    c.pass = false;
    c.witness_run = witness_run(ctx);
  }
}

}  // namespace

MatrixReport build_matrix() {
  MatrixReport report;
  for (const auto& v : all_variants()) {
    MatrixRow row{v, {}};
    const VariantTag tag = v.tag;

    const Evidence fids = evidence(v, scenario_fids(), schedule_fids(v));
    const Evidence rfids = evidence(v, scenario_rfids(), schedule_rfids(v));
    const Evidence strong = evidence(v, scenario_strong_ir(), Schedule::fifo());
    const Evidence read_only = evidence(v, scenario_read_only(), Schedule::fifo());
    const Evidence disjoint = evidence(v, scenario_disjoint_writers(), Schedule::fifo());

    MatrixCell ser = cell("Serializability", tag);
    for (const Evidence* e : {&fids, &rfids}) {
      absorb(ser, check_serializability(derive_history(e->trace, e->ctx.scenario.placement.initial_values())), e->ctx);
    }
    row.cells.push_back(ser);

    MatrixCell fast = cell("FastDecision", tag);
    for (int r = 0; r <= 3; ++r) {
      const Evidence solo = evidence(v, scenario_solo_reads(r), Schedule::fifo());
      absorb(fast, check_fast_decision(solo.trace), solo.ctx);
    }
    row.cells.push_back(fast);

    MatrixCell wir = cell("WeakIR", tag);
    for (const Evidence* e : {&read_only, &fids, &rfids, &strong}) absorb(wir, check_weak_ir(e->trace), e->ctx);
    row.cells.push_back(wir);

    MatrixCell sir = cell("StrongIR", tag);
    absorb(sir, check_strong_ir(strong.ctx), strong.ctx);
    row.cells.push_back(sir);

    MatrixCell dap = cell("DAP/DDAP", tag);
    for (const Evidence* e : {&disjoint, &fids}) {
      absorb(dap, check_dap(e->trace, e->effective), e->ctx);
      absorb(dap, check_ddap(e->trace, e->effective), e->ctx);
    }
    row.cells.push_back(dap);

    MatrixCell sft = cell("SeamlessFT(1)", tag);
    for (const Scenario& s : {scenario_rfids_solo(1), scenario_solo_reads(2)}) {
      const RunContext ctx{SimConfig{}, v, s, Schedule::fifo()};
      absorb(sft, check_seamless_ft(ctx, 1), ctx);
    }
    row.cells.push_back(sft);

    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace pdts
