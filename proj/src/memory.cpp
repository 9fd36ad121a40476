#include "pdts/memory.hpp"

#include <algorithm>

#include "pdts/trace.hpp"
#include "pdts/txmodel.hpp"

namespace pdts {

std::string to_string(PrimOp op) {
  switch (op) {
    case PrimOp::Read: return "read";
    case PrimOp::Write: return "write";
    case PrimOp::Cas: return "cas";
  }
  return "?";
}

PrimOp prim_op_from_string(const std::string& s) {
  if (s == "read") return PrimOp::Read;
  if (s == "write") return PrimOp::Write;
  if (s == "cas") return PrimOp::Cas;
  throw ConfigError("unknown primitive '" + s + "'");
}

void NodeMemory::create(const std::string& name, Word initial) {
  cells_[name] = std::move(initial);
}

Word& NodeMemory::cell(NodeId actor, const std::string& name) {
  if (actor != node_) {
    throw CrossNodeAccess("process on N" + std::to_string(actor + 1) + " accessed " + name +
                          " on N" + std::to_string(node_ + 1));
  }
  auto it = cells_.find(name);
  if (it == cells_.end()) throw ConfigError("no base object " + name);
  return it->second;
}

Word NodeMemory::read(NodeId actor, const std::string& name) { return cell(actor, name); }

void NodeMemory::write(NodeId actor, const std::string& name, Word value) {
  cell(actor, name) = std::move(value);
}

bool NodeMemory::cas(NodeId actor, const std::string& name, const Word& expected, Word desired) {
  Word& c = cell(actor, name);
  if (c != expected) return false;
  c = std::move(desired);
  return true;
}

const Word& NodeMemory::peek(const std::string& name) const {
  auto it = cells_.find(name);
  if (it == cells_.end()) throw ConfigError("no base object " + name);
  return it->second;
}

void create_item_objects(NodeMemory& mem, const ItemId& item, const Word& initial,
                         bool with_item_lock) {
  mem.create(ItemObjects::val(item), initial);
  mem.create(ItemObjects::seq_num(item), 0);
  mem.create(ItemObjects::lock_s(item), nullptr);
  if (with_item_lock) mem.create(ItemObjects::lock_l(item), nullptr);
}

std::vector<std::pair<PrimitiveStep, PrimitiveStep>> contending_pairs(const ExecutionTrace& trace) {
  const auto intervals = transaction_intervals(trace);
  const auto prims = trace.primitive_steps();

  std::map<BaseObjectId, std::vector<const PrimitiveStep*>> by_obj;
  for (const auto& p : prims) {
    if (p.txn) by_obj[p.obj].push_back(&p);
  }

  auto concurrent = [&](const TxnId& a, const TxnId& b) {
    auto ia = intervals.find(a), ib = intervals.find(b);
    if (ia == intervals.end() || ib == intervals.end()) return false;
    return ia->second.overlaps(ib->second);
  };

  std::vector<std::pair<PrimitiveStep, PrimitiveStep>> out;
  for (const auto& [obj, steps] : by_obj) {
    for (const auto* a : steps) {
      for (const auto* b : steps) {
        if (a == b || *a->txn == *b->txn) continue;
        if (!a->nontrivial && !b->nontrivial) continue;
        if (!concurrent(*a->txn, *b->txn)) continue;
        out.emplace_back(*a, *b);
      }
    }
  }
  return out;
}

}  // namespace pdts
