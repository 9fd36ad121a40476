#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pdts/simkit.hpp"
#include "pdts/txmodel.hpp"

namespace pdts {

enum class Property {
  Serializability, WeakProgress, WeakIR, StrongIR, DAP, DDAP, FastDecision, SeamlessFT, ReadDelay
};

std::string to_string(Property p);
Property property_from_cli(const std::string& s);  // serializability|weak-progress|...

struct Verdict {
  Property property = Property::Serializability;
  bool pass = true;
  json witness;  // null on pass unless the check produces positive evidence
  std::string details;
  /// Set when a fail comes from a bounded search rather than a refutation.
  bool caveat = false;
};

json to_json(const Verdict& v);

/// Everything needed to re-run an execution deterministically.
struct RunContext {
  SimConfig config;
  AlgorithmVariant algorithm;
  Scenario scenario;
  Schedule schedule;

  ExecutionTrace run() const;
};

json to_json(const RunContext& c);
RunContext run_context_from_json(const json& j);

/// Legal serial order search. Exact permutation search up to
/// kBruteForceLimit transactions, polygraph search beyond.
Verdict check_serializability(const CommittedHistory& history);
inline constexpr std::size_t kBruteForceLimit = 8;
/// Permutation oracle. Throws TooLarge above kBruteForceLimit.
Verdict serializability_brute_force(const CommittedHistory& history);
/// Polygraph acyclicity over reads-from and write-order choices. Requires
/// written values to be unique per item (throws TooLarge otherwise).
Verdict serializability_graph(const CommittedHistory& history);

Verdict check_weak_progress(const std::vector<ExecutionTrace>& traces);
Verdict check_weak_ir(const ExecutionTrace& trace);
Verdict check_strong_ir(const RunContext& ctx);
Verdict check_dap(const ExecutionTrace& trace, const Scenario& scenario);
Verdict check_ddap(const ExecutionTrace& trace, const Scenario& scenario);
Verdict check_fast_decision(const ExecutionTrace& solo_trace);
/// Completions tried per injection point besides the FIFO one.
inline constexpr int kSeamlessRandomCompletions = 64;
Verdict check_seamless_ft(const RunContext& ctx, int s);
Verdict check_read_delay(const ExecutionTrace& trace);

/// Runtime invariants of a generated trace (crash finality, message
/// integrity, lock safety, monotone seqNum, read atomicity, happened-before
/// acyclicity, depth monotonicity, weak invisible reads). Returns the list of
/// violations; empty means all hold.
std::vector<std::string> check_invariants(const ExecutionTrace& trace, const Scenario& scenario,
                                          bool crash_free_locks_released = true);

}  // namespace pdts
