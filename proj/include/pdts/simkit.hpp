#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pdts/handler.hpp"
#include "pdts/memory.hpp"
#include "pdts/protocols.hpp"
#include "pdts/trace.hpp"
#include "pdts/txmodel.hpp"

namespace pdts {

struct SimConfig {
  int n_nodes = 0;          // 0: derive from the scenario placement
  int procs_per_node = 4;
  int n_clients = 0;        // 0: derive from the scenario
  std::uint64_t delta = 16; // Δ, in ticks
  std::uint64_t gst = 0;    // 0: synchronous execution
  std::uint64_t seed = 0;

  void validate() const;
};

json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const json& j);

/// One resolution of nondeterminism. A tick is one applied decision.
struct Decision {
  enum class Kind { Step, Deliver, Crash };
  Kind kind = Kind::Step;
  ProcessRef proc;               // Step
  std::uint64_t msg_id = 0;      // Deliver
  std::optional<int> pin;        // Deliver to a node: process index to use
  NodeId node = 0;               // Crash

  static Decision step(ProcessRef p) { return {Kind::Step, p, 0, std::nullopt, 0}; }
  static Decision deliver(std::uint64_t id, std::optional<int> pin = std::nullopt) {
    return {Kind::Deliver, {}, id, pin, 0};
  }
  static Decision crash(NodeId n) { return {Kind::Crash, {}, 0, std::nullopt, n}; }

  bool operator==(const Decision&) const = default;
  std::string str() const;
};

json to_json(const Decision& d);
Decision decision_from_json(const json& j);

/// What happens once a scripted schedule runs out of decisions.
enum class TailPolicy { Stop, Fifo, Random };

struct Schedule {
  enum class Kind { Scripted, RandomSeeded, ExhaustiveCursor };
  Kind kind = Kind::Scripted;
  std::vector<Decision> script;
  TailPolicy tail = TailPolicy::Stop;
  std::uint64_t seed = 0;
  /// RandomSeeded only: crash decisions are eligible (each with weight 1/64).
  bool allow_crashes = false;
  /// Decisions that are not enabled when replayed are skipped with a "skip"
  /// note instead of failing. Set by inject_crash.
  bool lenient = false;
  /// ExhaustiveCursor: index into the canonical enabled list at each tick.
  std::vector<std::size_t> cursor;

  static Schedule scripted(std::vector<Decision> script, TailPolicy tail = TailPolicy::Stop);
  static Schedule fifo() { return scripted({}, TailPolicy::Fifo); }
  static Schedule random(std::uint64_t seed);
};

json to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

/// Inserts a crash of `node` after the first `after_step_index` decisions.
/// Later deliveries to the node replay as drops. Throws AlreadyCrashed.
Schedule inject_crash(const Schedule& schedule, NodeId node, std::size_t after_step_index);

/// The discrete-event engine. Holds the full system state; every change goes
/// through `apply`, which appends the resulting step(s) to the trace.
class Simulator {
 public:
  Simulator(SimConfig config, AlgorithmVariant algorithm, Scenario scenario);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Canonically ordered: steps (clients, then node processes), deliveries by
  /// msgId, crashes by node.
  std::vector<Decision> enabled() const;
  bool is_enabled(const Decision& d) const;
  /// Throws ScheduleStuck if `d` is not applicable.
  void apply(const Decision& d);
  /// Applies `d` if enabled; otherwise logs a drop/skip note. Returns whether
  /// it was applied as given.
  bool apply_lenient(const Decision& d);
  /// Advances the clock to the earliest pending timeout when nothing is
  /// enabled. Returns false if there is no such timer.
  bool advance_idle_time();

  bool all_decided() const;
  std::uint64_t tick() const { return tick_; }
  int crashes() const { return crashes_; }
  bool node_alive(NodeId n) const;

  /// Next step of `p` is a local trivial step (a Read primitive or a note).
  bool next_step_is_local_trivial(const ProcessRef& p) const;
  /// Process whose handler is mid-flight and has an enabled step.
  bool has_enabled_step(const ProcessRef& p) const;
  /// The enabled step of `p` is a receive timeout firing.
  bool step_is_timeout(const ProcessRef& p) const;
  const std::map<std::uint64_t, Message>& in_flight() const { return in_flight_; }

  const ExecutionTrace& trace() const { return trace_; }
  /// Moves the trace out; `with_schedule` fills in the realized schedule.
  ExecutionTrace take_trace(bool with_schedule = true);
  const std::vector<Decision>& realized() const { return realized_; }
  const Scenario& scenario() const { return scenario_; }  // effective placement
  const SimConfig& config() const { return config_; }
  const NodeMemory& memory(NodeId n) const;

 private:
  struct Proc;
  struct NodeState;

  Proc& proc(const ProcessRef& p);
  const Proc& proc(const ProcessRef& p) const;
  bool step_enabled(const Proc& p) const;
  bool delivery_enabled(const Message& m) const;
  bool txn_ready(const TransactionProgram& prog) const;
  bool txn_interval_ended(const TxnId& txn) const;

  Step& log(Step s);
  void start_coordinator(Proc& p);
  void perform_pending(Proc& p);
  void advance(Proc& p, ActionResult result);
  void deliver(const Message& m, std::optional<int> pin);
  void crash(NodeId n);
  void note_engine(const std::string& tag, json data, std::optional<TxnId> txn);

  SimConfig config_;
  AlgorithmVariant algorithm_;
  std::unique_ptr<Protocol> protocol_;
  Scenario scenario_;
  std::vector<std::unique_ptr<Proc>> clients_;
  std::vector<NodeState> nodes_;
  std::map<std::uint64_t, Message> in_flight_;
  std::map<TxnId, int> open_handlers_;
  std::map<TxnId, bool> responded_;
  ExecutionTrace trace_;
  std::vector<Decision> realized_;
  std::uint64_t tick_ = 0;
  std::uint64_t next_msg_id_ = 1;
  std::uint64_t next_handler_id_ = 1;
  int crashes_ = 0;
};

/// Picks decisions for a Simulator according to a Schedule.
class Scheduler {
 public:
  explicit Scheduler(Schedule schedule, std::uint64_t delta = 16, std::uint64_t gst = 0);

  /// Next decision, or empty when the schedule is exhausted/quiescent.
  /// Scripted entries are returned even if not enabled (caller validates).
  std::optional<Decision> next(Simulator& sim);
  bool in_script() const { return pos_ < schedule_.script.size(); }
  /// Branching factor observed at each cursor-driven choice.
  const std::vector<std::size_t>& branching() const { return branching_; }

  static std::optional<Decision> fifo_choice(const Simulator& sim);

 private:
  std::optional<Decision> random_choice(const Simulator& sim);

  Schedule schedule_;
  std::uint64_t delta_;
  std::uint64_t gst_;
  std::size_t pos_ = 0;
  std::size_t cursor_pos_ = 0;
  std::mt19937_64 rng_;
  std::vector<std::size_t> branching_;
};

/// Runs a scenario to quiescence (or until a Stop-tailed script is exhausted).
ExecutionTrace run(const SimConfig& config, const AlgorithmVariant& algorithm,
                   const Scenario& scenario, const Schedule& schedule);

/// Enabled choices after replaying `trace_so_far`'s realized decisions.
std::vector<Decision> enabled_choices(const SimConfig& config, const AlgorithmVariant& algorithm,
                                      const Scenario& scenario, const ExecutionTrace& trace_so_far);

/// Upper bound on decisions per run; guards against non-terminating schedules.
inline constexpr std::size_t kMaxDecisions = 200000;

}  // namespace pdts
