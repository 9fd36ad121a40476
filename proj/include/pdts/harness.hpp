#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdts/checkers.hpp"
#include "pdts/simkit.hpp"

namespace pdts {

// Scenario library.
Scenario scenario_fids();
/// FIDS with T2 invoked only after T1's interval ends.
Scenario scenario_fids_sequential();
Scenario scenario_rfids();
/// R-FIDS transaction i (1-based) alone.
Scenario scenario_rfids_solo(int i);
/// One transaction reading r items on a 3-node, k=3, f=1 cluster, then
/// writing a further item if every read returned ⊥.
Scenario scenario_solo_reads(int r);
Scenario scenario_read_only();
/// T1 reads X2 and writes X1; T2 reads X3 only.
Scenario scenario_strong_ir();
/// Two concurrent writers on disjoint items, sharded over two nodes.
Scenario scenario_disjoint_writers();
/// Two concurrent conflicting transactions on a replicated cluster.
Scenario scenario_conflict();

std::vector<std::string> builtin_scenario_names();
/// Accepts a builtin name (with or without "builtin:" prefix) or a JSON file path.
Scenario load_scenario(const std::string& name_or_path);

/// Two-phase adversarial schedule: validation-phase messages are held until
/// every coordinator has learned its reads, then released node by node in
/// `node_orders` order (txn ids per node), each handler run to completion.
/// `isolate` holds all traffic between node i and transaction isolate[i].
Schedule phased_schedule(const SimConfig& config, const AlgorithmVariant& algorithm,
                         const Scenario& scenario,
                         const std::vector<std::vector<TxnId>>& node_orders,
                         const std::vector<std::optional<TxnId>>& isolate = {});
Schedule schedule_fids(const AlgorithmVariant& algorithm, const SimConfig& config = {});
Schedule schedule_rfids(const AlgorithmVariant& algorithm, const SimConfig& config = {});
/// "builtin:fids", "builtin:rfids", "fifo", "random:SEED" or a JSON file path.
Schedule load_schedule(const std::string& spec, const AlgorithmVariant& algorithm,
                       const SimConfig& config);

struct ExploreOptions {
  enum class Mode { Exhaustive, Random };
  Mode mode = Mode::Exhaustive;
  /// Exhaustive: max number of times the schedule switches away from a
  /// process that could still step.
  std::size_t preemption_bound = 0;
  /// Fold consecutive local trivial steps of one process into one choice.
  bool reduction = true;
  std::size_t max_schedules = 2000000;  // BudgetExceeded beyond this
  std::size_t random_runs = 10000;
  std::uint64_t seed = 1;
};

struct Violation {
  Schedule schedule;
  Verdict verdict;
  CommittedHistory history;
};

struct ExplorationResult {
  std::size_t schedules_run = 0;
  std::vector<CommittedHistory> terminal_histories;  // sorted, unique
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // the first 20
  /// Paths cut because every continuation was covered by another branch.
  std::size_t sleep_blocked = 0;
  std::size_t invariant_failures = 0;
  std::vector<std::string> invariant_messages;  // first few
};

json to_json(const ExplorationResult& r);

ExplorationResult explore(const SimConfig& config, const Scenario& scenario,
                          const AlgorithmVariant& algorithm, const ExploreOptions& options);

struct MatrixCell {
  std::string column;
  bool pass = true;
  bool expected_pass = true;
  Verdict verdict;
  /// Replayable evidence for FAIL cells: {scenario, algorithm, schedule}.
  json witness_run;
};

struct MatrixRow {
  AlgorithmVariant variant;
  std::vector<MatrixCell> cells;
};

struct MatrixReport {
  std::vector<MatrixRow> rows;

  bool matches_expectations() const;
  std::string markdown() const;
  json to_json() const;
};

inline const std::vector<std::string>& matrix_columns() {
  static const std::vector<std::string> cols = {"Serializability", "FastDecision", "WeakIR",
                                                "StrongIR",        "DAP/DDAP",     "SeamlessFT(1)"};
  return cols;
}

/// Expected verdict for each (variant, column) cell.
bool matrix_expectation(VariantTag variant, const std::string& column);

MatrixReport build_matrix();

}  // namespace pdts
