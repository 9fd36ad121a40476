#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pdts/common.hpp"
#include "pdts/trace.hpp"

namespace pdts {

// ---------------------------------------------------------------------------
// Transaction programs and placement

enum class WriteCondition { Always, AllReadsInitial, Never };

struct WriteRule {
  ItemId target;
  WriteCondition condition = WriteCondition::Always;
  Word value;
};

/// A transaction: an ordered read set followed by a declarative write rule.
struct TransactionProgram {
  TxnId id;
  int client = 0;
  std::vector<ItemId> read_set;
  std::vector<WriteRule> write_rule;
  /// Invocation is held back until this transaction's interval has ended.
  std::optional<TxnId> start_after;

  /// Read set plus every write target, whether or not the write happens.
  std::set<ItemId> data_set() const;
  /// Writes performed given the values returned by the reads (in read_set order).
  std::vector<std::pair<ItemId, Word>> realized_writes(const std::vector<Word>& read_values,
                                                       const std::map<ItemId, Word>& initial) const;
};

struct ItemSpec {
  ItemId id;
  Word initial;  // null = ⊥
};

struct DataPlacement {
  std::vector<ItemSpec> items;
  std::map<ItemId, std::vector<NodeId>> replica_groups;
  int k = 1;
  int f = 0;

  int node_count() const;  // 1 + largest node id mentioned
  std::map<ItemId, Word> initial_values() const;
  /// Items stored on `node` (the node's shard, Σ_i).
  std::set<ItemId> items_on(NodeId node) const;
  const std::vector<NodeId>& group(const ItemId& item) const;
  int quorum() const { return k - f; }
  /// Throws ConfigError unless every group has exactly k members and f < k/2.
  void validate() const;
};

struct Scenario {
  std::string name;
  DataPlacement placement;
  std::vector<TransactionProgram> transactions;

  int crash_budget() const { return placement.f; }
  int client_count() const;
  const TransactionProgram& program(const TxnId& id) const;
  void validate() const;
};

void to_json(json& j, const TransactionProgram& p);
void from_json(const json& j, TransactionProgram& p);
json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const json& j);

// ---------------------------------------------------------------------------
// Analysis over traces

/// Transitive closure of program order within a handler and send→receive.
class HappenedBefore {
 public:
  explicit HappenedBefore(const ExecutionTrace& trace);

  bool operator()(std::size_t a, std::size_t b) const;
  std::size_t size() const { return n_; }
  /// All related pairs (a, b) with a happened-before b.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;  // row b holds the set {a : a → b}
};

/// Depth of every step; empty for steps outside a transaction handler.
/// Throws OrphanStep for a handler step with no causal origin.
std::vector<std::optional<int>> step_depths(const ExecutionTrace& trace);
int step_depth(const ExecutionTrace& trace, std::size_t index);
int txn_depth(const ExecutionTrace& trace, const TxnId& txn);
/// Max depth over the first `prefix_len` steps of `txn` that happened-before
/// its coordinator response; 0 if there are none.
int partial_depth(const ExecutionTrace& trace, std::size_t prefix_len, const TxnId& txn);

/// Reusable analysis state for repeated partial-depth queries on one trace.
class DepthAnalysis {
 public:
  explicit DepthAnalysis(const ExecutionTrace& trace);

  const ExecutionTrace& trace() const { return trace_; }
  const HappenedBefore& hb() const { return hb_; }
  std::optional<int> depth(std::size_t i) const { return depths_[i]; }
  int txn_depth(const TxnId& txn) const;
  int partial_depth(std::size_t prefix_len, const TxnId& txn) const;
  /// Partial depth of every prefix length 0..size() for `txn`.
  std::vector<int> partial_depth_profile(const TxnId& txn) const;

 private:
  const ExecutionTrace& trace_;
  HappenedBefore hb_;
  std::vector<std::optional<int>> depths_;
};

enum class OpKind { Read, Write };

struct HistoryOp {
  OpKind kind = OpKind::Read;
  ItemId item;
  Word value;
  bool operator==(const HistoryOp&) const = default;
};

struct CommittedTxn {
  TxnId txn;
  std::vector<HistoryOp> ops;
  bool operator==(const CommittedTxn&) const = default;
};

struct CommittedHistory {
  std::vector<CommittedTxn> txns;  // in response order
  std::map<ItemId, Word> initial;  // items absent here start at ⊥
  bool operator==(const CommittedHistory&) const = default;

  Word initial_value(const ItemId& item) const;
};

json to_json(const CommittedHistory& h);

CommittedHistory derive_history(const ExecutionTrace& trace,
                                const std::map<ItemId, Word>& initial = {});

/// Item → index of the coordinator's last "valueLearned" note for it.
std::map<ItemId, std::size_t> value_learned_events(const ExecutionTrace& trace, const TxnId& txn);

/// Interval of a transaction: from its coordinator invocation until every
/// handler of it has responded and none of its messages to a live target is
/// still in flight. `end` is empty while the interval is open.
struct Interval {
  std::size_t begin = 0;
  std::optional<std::size_t> end;

  bool overlaps(const Interval& o) const;
};

std::map<TxnId, Interval> transaction_intervals(const ExecutionTrace& trace);

}  // namespace pdts
