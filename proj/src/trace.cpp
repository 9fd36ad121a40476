#include "pdts/trace.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace pdts {

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::Invoke: return "invoke";
    case StepKind::Response: return "response";
    case StepKind::Prim: return "prim";
    case StepKind::Send: return "send";
    case StepKind::Recv: return "recv";
    case StepKind::Crash: return "crash";
    case StepKind::Note: return "note";
  }
  return "?";
}

StepKind step_kind_from_string(const std::string& s) {
  static const std::pair<const char*, StepKind> table[] = {
      {"invoke", StepKind::Invoke}, {"response", StepKind::Response}, {"prim", StepKind::Prim},
      {"send", StepKind::Send},     {"recv", StepKind::Recv},         {"crash", StepKind::Crash},
      {"note", StepKind::Note}};
  for (const auto& [name, kind] : table) {
    if (s == name) return kind;
  }
  throw ConfigError("unknown step kind '" + s + "'");
}

json to_json(const Step& s) {
  json j;
  j["i"] = s.index;
  j["kind"] = to_string(s.kind);
  j["proc"] = s.proc ? json(*s.proc) : json(nullptr);
  j["txn"] = s.txn ? json(*s.txn) : json(nullptr);
  j["tick"] = s.tick;
  j["h"] = s.handler;
  j["coord"] = s.coordinator;
  switch (s.kind) {
    case StepKind::Prim:
      j["obj"] = s.obj;
      j["op"] = to_string(s.op);
      j["nontrivial"] = s.nontrivial;
      j["args"] = s.args.is_null() ? json::array() : s.args;
      j["ret"] = s.ret;
      break;
    case StepKind::Send:
    case StepKind::Recv:
      j["msgId"] = s.msg_id;
      j["payload"] = s.payload;
      j[s.kind == StepKind::Send ? "dst" : "src"] = s.peer ? json(*s.peer) : json(nullptr);
      break;
    case StepKind::Invoke:
      if (!s.program.is_null()) j["program"] = s.program;
      break;
    case StepKind::Response:
      j["outcome"] = s.outcome ? json(*s.outcome == Outcome::Commit ? "commit" : "abort")
                               : json(nullptr);
      j["readSet"] = s.read_set.is_null() ? json::array() : s.read_set;
      j["writeSet"] = s.write_set.is_null() ? json::array() : s.write_set;
      break;
    case StepKind::Crash:
      j["node"] = s.node;
      break;
    case StepKind::Note:
      j["tag"] = s.tag;
      j["data"] = s.data.is_null() ? json::object() : s.data;
      break;
  }
  return j;
}

Step step_from_json(const json& j) {
  Step s;
  s.index = j.at("i").get<std::size_t>();
  s.kind = step_kind_from_string(j.at("kind").get<std::string>());
  if (!j.at("proc").is_null()) s.proc = j.at("proc").get<ProcessRef>();
  if (!j.at("txn").is_null()) s.txn = j.at("txn").get<std::string>();
  s.tick = j.value("tick", std::uint64_t{0});
  s.handler = j.value("h", std::uint64_t{0});
  s.coordinator = j.value("coord", false);
  switch (s.kind) {
    case StepKind::Prim:
      s.obj = j.at("obj").get<std::string>();
      s.op = prim_op_from_string(j.at("op").get<std::string>());
      s.nontrivial = j.at("nontrivial").get<bool>();
      s.args = j.at("args");
      s.ret = j.at("ret");
      break;
    case StepKind::Send:
    case StepKind::Recv: {
      s.msg_id = j.at("msgId").get<std::uint64_t>();
      s.payload = j.at("payload");
      const auto& peer = j.value(s.kind == StepKind::Send ? "dst" : "src", json(nullptr));
      if (!peer.is_null()) s.peer = peer.get<ProcessRef>();
      break;
    }
    case StepKind::Invoke:
      if (j.contains("program")) s.program = j.at("program");
      break;
    case StepKind::Response: {
      const auto& o = j.at("outcome");
      if (!o.is_null()) s.outcome = o.get<std::string>() == "commit" ? Outcome::Commit : Outcome::Abort;
      s.read_set = j.at("readSet");
      s.write_set = j.at("writeSet");
      break;
    }
    case StepKind::Crash:
      s.node = j.at("node").get<int>();
      break;
    case StepKind::Note:
      s.tag = j.at("tag").get<std::string>();
      s.data = j.at("data");
      break;
  }
  return s;
}

std::optional<std::size_t> ExecutionTrace::coordinator_response(const TxnId& txn) const {
  for (const auto& s : steps) {
    if (s.is_coordinator_response() && s.txn == txn) return s.index;
  }
  return std::nullopt;
}

std::optional<std::size_t> ExecutionTrace::coordinator_invoke(const TxnId& txn) const {
  for (const auto& s : steps) {
    if (s.is_coordinator_invoke() && s.txn == txn) return s.index;
  }
  return std::nullopt;
}

std::vector<TxnId> ExecutionTrace::transactions() const {
  std::vector<TxnId> out;
  for (const auto& s : steps) {
    if (s.is_coordinator_invoke() && s.txn) out.push_back(*s.txn);
  }
  return out;
}

std::vector<PrimitiveStep> ExecutionTrace::primitive_steps() const {
  std::vector<PrimitiveStep> out;
  for (const auto& s : steps) {
    if (s.kind != StepKind::Prim) continue;
    PrimitiveStep p;
    p.obj = BaseObjectId{s.proc && s.proc->node ? *s.proc->node : 0, s.obj};
    p.op = s.op;
    p.args = s.args;
    p.ret = s.ret;
    p.nontrivial = s.nontrivial;
    p.proc = s.proc.value_or(ProcessRef{});
    p.txn = s.txn;
    p.trace_index = s.index;
    out.push_back(std::move(p));
  }
  return out;
}

void write_jsonl(std::ostream& os, const ExecutionTrace& trace) {
  for (const auto& s : trace.steps) os << to_json(s).dump() << '\n';
}

std::string to_jsonl(const ExecutionTrace& trace) {
  std::ostringstream os;
  write_jsonl(os, trace);
  return os.str();
}

ExecutionTrace read_jsonl(std::istream& is) {
  ExecutionTrace t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.steps.push_back(step_from_json(json::parse(line)));
    if (t.steps.back().index != t.steps.size() - 1) {
      throw ConfigError("trace step indices are not dense at line " + std::to_string(t.steps.size()));
    }
  }
  return t;
}

}  // namespace pdts
