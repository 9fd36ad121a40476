#pragma once

#include <map>
#include <string>
#include <vector>

#include "pdts/common.hpp"

namespace pdts {

struct BaseObjectId {
  NodeId node = 0;
  std::string name;  // "X1.lockL", "X1.seqNum", "X1.val", "node.globalLock", ...

  auto operator<=>(const BaseObjectId&) const = default;
};

enum class PrimOp { Read, Write, Cas };

std::string to_string(PrimOp op);
PrimOp prim_op_from_string(const std::string& s);

/// Write and CAS may modify the object; a failed CAS still counts.
constexpr bool is_nontrivial(PrimOp op) { return op != PrimOp::Read; }

/// One logged primitive access.
struct PrimitiveStep {
  BaseObjectId obj;
  PrimOp op = PrimOp::Read;
  json args = json::array();
  Word ret;
  bool nontrivial = false;
  ProcessRef proc;
  std::optional<TxnId> txn;
  std::size_t trace_index = 0;
};

/// Names of the base objects backing one replica of a data item.
struct ItemObjects {
  static std::string val(const ItemId& item) { return item + ".val"; }
  static std::string seq_num(const ItemId& item) { return item + ".seqNum"; }
  static std::string lock_s(const ItemId& item) { return item + ".lockS"; }
  static std::string lock_l(const ItemId& item) { return item + ".lockL"; }
  static constexpr const char* kGlobalLock = "node.globalLock";
};

/// Shared memory of a single node. Every access goes through `apply`, which
/// validates the acting node and returns the logged step; the caller owns the
/// log. Objects must be created before use.
class NodeMemory {
 public:
  explicit NodeMemory(NodeId node) : node_(node) {}

  NodeId node() const { return node_; }

  void create(const std::string& name, Word initial);
  bool contains(const std::string& name) const { return cells_.count(name) != 0; }

  Word read(NodeId actor, const std::string& name);
  void write(NodeId actor, const std::string& name, Word value);
  bool cas(NodeId actor, const std::string& name, const Word& expected, Word desired);

  /// Value without logging; for the engine's enabledness tests and checkers.
  const Word& peek(const std::string& name) const;
  const std::map<std::string, Word>& cells() const { return cells_; }

 private:
  Word& cell(NodeId actor, const std::string& name);

  NodeId node_;
  std::map<std::string, Word> cells_;
};

/// Creates the per-replica objects for `item` (val = initial, seqNum = 0,
/// lockS = lockL = None). `with_item_lock` is false for the global-lock layout.
void create_item_objects(NodeMemory& mem, const ItemId& item, const Word& initial,
                         bool with_item_lock = true);

}  // namespace pdts

namespace pdts {

struct ExecutionTrace;

/// Pairs of primitive steps by distinct concurrent transactions on the same
/// object, at least one non-trivial. Both orientations are returned.
std::vector<std::pair<PrimitiveStep, PrimitiveStep>> contending_pairs(const ExecutionTrace& trace);

}  // namespace pdts
