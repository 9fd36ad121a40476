#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdts/common.hpp"
#include "pdts/memory.hpp"

namespace pdts {

enum class StepKind { Invoke, Response, Prim, Send, Recv, Crash, Note };

std::string to_string(StepKind k);
StepKind step_kind_from_string(const std::string& s);

enum class Outcome { Commit, Abort };

/// One step of an execution. Fields outside the kind's group keep their
/// defaults and are not serialized.
struct Step {
  std::size_t index = 0;
  StepKind kind = StepKind::Note;
  std::optional<ProcessRef> proc;  // empty for crash steps and engine notes
  std::optional<TxnId> txn;
  std::uint64_t tick = 0;
  /// Handler instance the step belongs to; 0 for steps outside any handler.
  std::uint64_t handler = 0;
  bool coordinator = false;  // step of a coordinator handler

  // prim
  std::string obj;
  PrimOp op = PrimOp::Read;
  bool nontrivial = false;
  json args;
  Word ret;

  // send / recv
  std::uint64_t msg_id = 0;
  std::optional<ProcessRef> peer;  // destination of a send, source of a recv
  json payload;

  // invoke (coordinator): the transaction program
  json program;

  // response
  std::optional<Outcome> outcome;
  json read_set;   // [{item, value}]
  json write_set;  // [{item, value}]

  // crash
  NodeId node = 0;

  // note
  std::string tag;
  json data;

  bool is_coordinator_invoke() const { return kind == StepKind::Invoke && coordinator; }
  bool is_coordinator_response() const { return kind == StepKind::Response && coordinator; }
  std::optional<NodeId> node_of_proc() const { return proc ? proc->node : std::nullopt; }
};

json to_json(const Step& s);
Step step_from_json(const json& j);

/// Sequence of steps plus the identity of what produced it.
struct ExecutionTrace {
  std::vector<Step> steps;
  std::string scenario;
  std::string algorithm;
  json schedule;  // realized decisions; replays to this trace

  std::size_t size() const { return steps.size(); }
  const Step& operator[](std::size_t i) const { return steps[i]; }

  std::optional<std::size_t> coordinator_response(const TxnId& txn) const;
  std::optional<std::size_t> coordinator_invoke(const TxnId& txn) const;
  /// Transaction ids in order of coordinator invocation.
  std::vector<TxnId> transactions() const;
  /// Primitive steps as PrimitiveStep records.
  std::vector<PrimitiveStep> primitive_steps() const;
};

/// JSON-lines: one step per line, LF terminated, keys sorted.
std::string to_jsonl(const ExecutionTrace& trace);
void write_jsonl(std::ostream& os, const ExecutionTrace& trace);
ExecutionTrace read_jsonl(std::istream& is);

}  // namespace pdts
