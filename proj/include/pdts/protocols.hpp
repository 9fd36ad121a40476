#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdts/handler.hpp"
#include "pdts/txmodel.hpp"

namespace pdts {

enum class VariantTag { Base, NoFastDecision, WeakIrOnly, NoSeamlessFt, NoDdap };

struct AlgorithmVariant {
  VariantTag tag = VariantTag::Base;
  /// Client wait bound before NoSeamlessFt falls back; 0 means 4Δ.
  std::uint64_t timeout_ticks = 0;

  static AlgorithmVariant parse(const std::string& cli_name);  // base|no-fast|weak-ir|no-seamless|no-ddap
  std::string cli_name() const;
  std::string display_name() const;  // Base, NoFastDecision, ...
};

std::vector<AlgorithmVariant> all_variants();

/// Read retry bound of the lock-free read handler.
inline constexpr int kReadRetryBound = 8;

// Protocol message kinds, as they appear in the "kind" field of payloads.
enum class MsgKind {
  Read, ReadReply, Validate, ValidateReply, Commit, Abort, Lock, LockReply, Check, CheckReply, Restart
};
std::string to_string(MsgKind k);
MsgKind msg_kind_from_string(const std::string& s);

/// The transaction record carried by validation-phase messages.
struct TxnRecord {
  TxnId tid;
  std::vector<std::pair<ItemId, std::int64_t>> reads;  // (key, seqNum)
  std::vector<std::pair<ItemId, Word>> writes;         // (key, newVal)
  std::vector<std::int64_t> write_seqs;                // parallel to writes; set at commit
};

json to_json(const TxnRecord& t);
TxnRecord txn_record_from_json(const json& j);

/// Tagged payload {kind, attempt, body}.
json make_payload(MsgKind kind, json body, int attempt = 0);
MsgKind payload_kind(const json& payload);

/// Everything a handler may consult besides memory and messages.
struct HandlerEnv {
  ProcessRef self;
  TxnId txn;
  const Scenario* scenario = nullptr;  // effective placement
  AlgorithmVariant variant;
  std::uint64_t delta = 1;
  int node_count = 1;
};

/// One of the five algorithms: memory layout plus handler factories.
class Protocol {
 public:
  explicit Protocol(AlgorithmVariant v) : variant_(v) {}
  virtual ~Protocol() = default;

  const AlgorithmVariant& variant() const { return variant_; }

  /// Placement the algorithm actually runs on; NoSeamlessFt stores every item
  /// on every node.
  virtual DataPlacement effective_placement(const DataPlacement& p, int node_count) const;
  /// Creates the node's objects: one replica per stored item plus a
  /// per-transaction epoch cell that fences off stale validation messages.
  virtual void init_memory(NodeMemory& mem, const Scenario& effective) const;

  virtual Handler coordinator(HandlerEnv env, TransactionProgram program) const;
  virtual Handler on_message(HandlerEnv env, Message msg) const;

 protected:
  AlgorithmVariant variant_;
};

std::unique_ptr<Protocol> make_protocol(const AlgorithmVariant& v);

}  // namespace pdts
