#include "pdts/txmodel.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace pdts {

// ---------------------------------------------------------------------------
// Programs, placement, scenarios

std::set<ItemId> TransactionProgram::data_set() const {
  std::set<ItemId> out(read_set.begin(), read_set.end());
  for (const auto& w : write_rule) out.insert(w.target);
  return out;
}

std::vector<std::pair<ItemId, Word>> TransactionProgram::realized_writes(
    const std::vector<Word>& read_values, const std::map<ItemId, Word>& initial) const {
  bool all_initial = true;
  for (std::size_t i = 0; i < read_set.size() && i < read_values.size(); ++i) {
    auto it = initial.find(read_set[i]);
    const Word init = it == initial.end() ? Word(nullptr) : it->second;
    if (read_values[i] != init) all_initial = false;
  }
  std::vector<std::pair<ItemId, Word>> out;
  for (const auto& w : write_rule) {
    const bool fire = w.condition == WriteCondition::Always ||
                      (w.condition == WriteCondition::AllReadsInitial && all_initial);
    if (fire) out.emplace_back(w.target, w.value);
  }
  return out;
}

int DataPlacement::node_count() const {
  int n = 0;
  for (const auto& [item, nodes] : replica_groups) {
    for (NodeId node : nodes) n = std::max(n, node + 1);
  }
  return n;
}

std::map<ItemId, Word> DataPlacement::initial_values() const {
  std::map<ItemId, Word> out;
  for (const auto& it : items) out[it.id] = it.initial;
  return out;
}

std::set<ItemId> DataPlacement::items_on(NodeId node) const {
  std::set<ItemId> out;
  for (const auto& [item, nodes] : replica_groups) {
    if (std::find(nodes.begin(), nodes.end(), node) != nodes.end()) out.insert(item);
  }
  return out;
}

const std::vector<NodeId>& DataPlacement::group(const ItemId& item) const {
  auto it = replica_groups.find(item);
  if (it == replica_groups.end()) throw PlacementError("item " + item + " has no replica group");
  return it->second;
}

void DataPlacement::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (f < 0) throw ConfigError("f must be >= 0");
  if (f > 0 && 2 * f >= k) {
    throw ConfigError("f=" + std::to_string(f) + " needs f < k/2 for quorum intersection (k=" +
                      std::to_string(k) + ")");
  }
  for (const auto& it : items) {
    auto g = replica_groups.find(it.id);
    if (g == replica_groups.end()) throw PlacementError("item " + it.id + " is not placed");
    std::set<NodeId> distinct(g->second.begin(), g->second.end());
    if (static_cast<int>(distinct.size()) != k || g->second.size() != distinct.size()) {
      throw ConfigError("replica group of " + it.id + " must have exactly k distinct nodes");
    }
    for (NodeId n : g->second) {
      if (n < 0) throw PlacementError("item " + it.id + " mapped to negative node id");
    }
  }
  for (const auto& [item, nodes] : replica_groups) {
    const bool known = std::any_of(items.begin(), items.end(), [&](const ItemSpec& s) { return s.id == item; });
    if (!known) throw PlacementError("placement names unknown item " + item);
  }
}

int Scenario::client_count() const {
  int n = 0;
  for (const auto& t : transactions) n = std::max(n, t.client + 1);
  return n;
}

const TransactionProgram& Scenario::program(const TxnId& id) const {
  for (const auto& t : transactions) {
    if (t.id == id) return t;
  }
  throw ConfigError("no transaction " + id);
}

void Scenario::validate() const {
  placement.validate();
  const auto initial = placement.initial_values();
  std::set<TxnId> ids;
  for (const auto& t : transactions) {
    if (!ids.insert(t.id).second) throw ConfigError("duplicate transaction id " + t.id);
    if (t.client < 0) throw ConfigError("negative client index in " + t.id);
    for (const auto& r : t.read_set) {
      if (!initial.count(r)) throw ConfigError(t.id + " reads unknown item " + r);
    }
    for (const auto& w : t.write_rule) {
      if (!initial.count(w.target)) throw ConfigError(t.id + " writes unknown item " + w.target);
      if (w.condition == WriteCondition::AllReadsInitial && w.value == initial.at(w.target)) {
        throw ConfigError(t.id + " must write a non-initial value to " + w.target);
      }
    }
  }
  for (const auto& t : transactions) {
    if (t.start_after && !ids.count(*t.start_after)) {
      throw ConfigError(t.id + " waits for unknown transaction " + *t.start_after);
    }
  }
}

namespace {

std::string condition_name(WriteCondition c) {
  switch (c) {
    case WriteCondition::Always: return "always";
    case WriteCondition::AllReadsInitial: return "allReadsInitial";
    case WriteCondition::Never: return "never";
  }
  return "?";
}

WriteCondition condition_from(const std::string& s) {
  if (s == "always" || s == "Always") return WriteCondition::Always;
  if (s == "allReadsInitial" || s == "AllReadsInitial") return WriteCondition::AllReadsInitial;
  if (s == "never" || s == "Never") return WriteCondition::Never;
  throw ConfigError("unknown write condition '" + s + "'");
}

}  // namespace

void to_json(json& j, const TransactionProgram& p) {
  json rules = json::array();
  for (const auto& w : p.write_rule) {
    rules.push_back({{"target", w.target}, {"condition", condition_name(w.condition)}, {"value", w.value}});
  }
  j = json{{"txnId", p.id}, {"client", p.client}, {"readSet", p.read_set}, {"writeRule", rules}};
  if (p.start_after) j["after"] = *p.start_after;
}

void from_json(const json& j, TransactionProgram& p) {
  p.id = j.at("txnId").get<std::string>();
  p.client = j.value("client", 0);
  p.read_set = j.value("readSet", std::vector<std::string>{});
  p.write_rule.clear();
  for (const auto& w : j.value("writeRule", json::array())) {
    p.write_rule.push_back({w.at("target").get<std::string>(),
                            condition_from(w.value("condition", std::string("always"))),
                            w.value("value", json(nullptr))});
  }
  p.start_after.reset();
  if (j.contains("after") && !j.at("after").is_null()) p.start_after = j.at("after").get<std::string>();
}

json scenario_to_json(const Scenario& s) {
  json items = json::array();
  for (const auto& it : s.placement.items) items.push_back({{"id", it.id}, {"initial", it.initial}});
  json placement = json::object();
  for (const auto& [item, nodes] : s.placement.replica_groups) placement[item] = nodes;
  return json{{"name", s.name},
              {"items", items},
              {"placement", placement},
              {"k", s.placement.k},
              {"f", s.placement.f},
              {"transactions", s.transactions}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.value("name", std::string("custom"));
  for (const auto& it : j.at("items")) {
    s.placement.items.push_back({it.at("id").get<std::string>(), it.value("initial", json(nullptr))});
  }
  for (const auto& [item, nodes] : j.at("placement").items()) {
    s.placement.replica_groups[item] = nodes.get<std::vector<NodeId>>();
  }
  s.placement.k = j.value("k", 1);
  s.placement.f = j.value("f", 0);
  s.transactions = j.at("transactions").get<std::vector<TransactionProgram>>();
  return s;
}

// ---------------------------------------------------------------------------
// Happened-before

HappenedBefore::HappenedBefore(const ExecutionTrace& trace)
    : n_(trace.size()), words_((trace.size() + 63) / 64), bits_(n_ * words_, 0) {
  std::unordered_map<std::uint64_t, std::size_t> last_in_handler;
  std::unordered_map<std::uint64_t, std::size_t> send_of;
  for (std::size_t b = 0; b < n_; ++b) {
    const Step& s = trace[b];
    std::uint64_t* row = &bits_[b * words_];
    auto inherit = [&](std::size_t a) {
      const std::uint64_t* src = &bits_[a * words_];
      for (std::size_t w = 0; w < words_; ++w) row[w] |= src[w];
      row[a / 64] |= std::uint64_t{1} << (a % 64);
    };
    if (s.handler != 0) {
      auto it = last_in_handler.find(s.handler);
      if (it != last_in_handler.end()) inherit(it->second);
      last_in_handler[s.handler] = b;
    }
    if (s.kind == StepKind::Recv) {
      auto it = send_of.find(s.msg_id);
      if (it != send_of.end()) inherit(it->second);
    }
    if (s.kind == StepKind::Send) send_of[s.msg_id] = b;
  }
}

bool HappenedBefore::operator()(std::size_t a, std::size_t b) const {
  if (a >= n_ || b >= n_) return false;
  return (bits_[b * words_ + a / 64] >> (a % 64)) & 1U;
}

std::vector<std::pair<std::size_t, std::size_t>> HappenedBefore::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n_; ++b) {
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t word = bits_[b * words_ + w];
      while (word) {
        const int bit = std::countr_zero(word);
        out.emplace_back(w * 64 + bit, b);
        word &= word - 1;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Depth

std::vector<std::optional<int>> step_depths(const ExecutionTrace& trace) {
  std::vector<std::optional<int>> depth(trace.size());
  std::unordered_map<std::uint64_t, int> handler_max;
  std::unordered_map<std::uint64_t, std::size_t> send_of;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Step& s = trace[i];
    if (s.kind == StepKind::Send) send_of[s.msg_id] = i;
    if (s.handler == 0) continue;
    auto hm = handler_max.find(s.handler);
    int d = 0;
    if (s.is_coordinator_invoke()) {
      d = 0;
    } else if (s.kind == StepKind::Recv) {
      auto it = send_of.find(s.msg_id);
      if (it == send_of.end() || !depth[it->second]) {
        throw OrphanStep("receive at " + std::to_string(i) + " has no matching send");
      }
      d = 1 + *depth[it->second];
      if (hm != handler_max.end()) d = std::max(d, hm->second);
    } else {
      if (hm == handler_max.end()) {
        throw OrphanStep("step " + std::to_string(i) + " starts a handler without invocation or receive");
      }
      d = hm->second;
    }
    depth[i] = d;
    handler_max[s.handler] = hm == handler_max.end() ? d : std::max(hm->second, d);
  }
  return depth;
}

int step_depth(const ExecutionTrace& trace, std::size_t index) {
  if (index >= trace.size()) throw ConfigError("step index out of range");
  auto d = step_depths(trace)[index];
  if (!d) throw OrphanStep("step " + std::to_string(index) + " belongs to no handler");
  return *d;
}

DepthAnalysis::DepthAnalysis(const ExecutionTrace& trace)
    : trace_(trace), hb_(trace), depths_(step_depths(trace)) {}

int DepthAnalysis::txn_depth(const TxnId& txn) const {
  auto r = trace_.coordinator_response(txn);
  if (!r) throw Undecided(txn + " is not decided");
  return *depths_[*r];
}

int DepthAnalysis::partial_depth(std::size_t prefix_len, const TxnId& txn) const {
  auto r = trace_.coordinator_response(txn);
  if (!r) throw Undecided(txn + " is not decided");
  int best = 0;
  for (std::size_t i = 0; i < std::min(prefix_len, trace_.size()); ++i) {
    const Step& s = trace_[i];
    if (s.txn != txn || !depths_[i]) continue;
    if (hb_(i, *r)) best = std::max(best, *depths_[i]);
  }
  return best;
}

std::vector<int> DepthAnalysis::partial_depth_profile(const TxnId& txn) const {
  auto r = trace_.coordinator_response(txn);
  if (!r) throw Undecided(txn + " is not decided");
  std::vector<int> out(trace_.size() + 1, 0);
  int best = 0;
  for (std::size_t i = 0; i < trace_.size(); ++i) {
    const Step& s = trace_[i];
    if (s.txn == txn && depths_[i] && hb_(i, *r)) best = std::max(best, *depths_[i]);
    out[i + 1] = best;
  }
  return out;
}

int txn_depth(const ExecutionTrace& trace, const TxnId& txn) {
  auto r = trace.coordinator_response(txn);
  if (!r) throw Undecided(txn + " is not decided");
  return step_depth(trace, *r);
}

int partial_depth(const ExecutionTrace& trace, std::size_t prefix_len, const TxnId& txn) {
  return DepthAnalysis(trace).partial_depth(prefix_len, txn);
}

// ---------------------------------------------------------------------------
// Histories

Word CommittedHistory::initial_value(const ItemId& item) const {
  auto it = initial.find(item);
  return it == initial.end() ? Word(nullptr) : it->second;
}

json to_json(const CommittedHistory& h) {
  json txns = json::array();
  for (const auto& t : h.txns) {
    json ops = json::array();
    for (const auto& op : t.ops) {
      ops.push_back({{"kind", op.kind == OpKind::Read ? "R" : "W"}, {"item", op.item}, {"value", op.value}});
    }
    txns.push_back({{"txn", t.txn}, {"ops", ops}});
  }
  json init = json::object();
  for (const auto& [k, v] : h.initial) init[k] = v;
  return json{{"txns", txns}, {"initial", init}};
}

CommittedHistory derive_history(const ExecutionTrace& trace, const std::map<ItemId, Word>& initial) {
  CommittedHistory h;
  h.initial = initial;
  for (const auto& s : trace.steps) {
    if (!s.is_coordinator_response() || s.outcome != Outcome::Commit) continue;
    if (!s.read_set.is_array() || !s.write_set.is_array()) {
      throw MalformedResponse("response at " + std::to_string(s.index) + " lacks read/write sets");
    }
    CommittedTxn t;
    t.txn = s.txn.value_or("");
    auto add = [&](const json& set, OpKind kind) {
      for (const auto& e : set) {
        if (!e.is_object() || !e.contains("item") || !e.contains("value")) {
          throw MalformedResponse("response at " + std::to_string(s.index) + " has a malformed entry");
        }
        t.ops.push_back({kind, e.at("item").get<std::string>(), e.at("value")});
      }
    };
    add(s.read_set, OpKind::Read);
    add(s.write_set, OpKind::Write);
    h.txns.push_back(std::move(t));
  }
  return h;
}

std::map<ItemId, std::size_t> value_learned_events(const ExecutionTrace& trace, const TxnId& txn) {
  if (!trace.coordinator_response(txn)) throw Undecided(txn + " is not decided");
  std::map<ItemId, std::size_t> out;
  for (const auto& s : trace.steps) {
    if (s.kind == StepKind::Note && s.coordinator && s.txn == txn && s.tag == "valueLearned") {
      out[s.data.at("item").get<std::string>()] = s.index;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intervals

bool Interval::overlaps(const Interval& o) const {
  const bool this_before = end && *end < o.begin;
  const bool other_before = o.end && *o.end < begin;
  return !this_before && !other_before;
}

std::map<TxnId, Interval> transaction_intervals(const ExecutionTrace& trace) {
  struct Open {
    TxnId txn;
    std::optional<NodeId> node;
  };
  std::map<TxnId, Interval> out;
  std::unordered_map<std::uint64_t, Open> handlers;
  std::unordered_map<std::uint64_t, Open> messages;  // by msgId, node = destination
  std::set<NodeId> crashed;
  std::set<TxnId> responded;

  auto try_close = [&](std::size_t i) {
    for (auto& [txn, iv] : out) {
      if (iv.end || !responded.count(txn)) continue;
      const bool busy =
          std::any_of(handlers.begin(), handlers.end(), [&](const auto& h) { return h.second.txn == txn; }) ||
          std::any_of(messages.begin(), messages.end(), [&](const auto& m) { return m.second.txn == txn; });
      if (!busy) iv.end = i;
    }
  };

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Step& s = trace[i];
    if (s.is_coordinator_invoke() && s.txn) out[*s.txn] = Interval{i, std::nullopt};
    if (s.handler != 0 && s.txn && !handlers.count(s.handler) && s.kind != StepKind::Response) {
      handlers[s.handler] = Open{*s.txn, s.node_of_proc()};
    }
    switch (s.kind) {
      case StepKind::Send:
        if (s.txn && !(s.peer && s.peer->node && crashed.count(*s.peer->node))) {
          messages[s.msg_id] = Open{*s.txn, s.peer ? s.peer->node : std::nullopt};
        }
        break;
      case StepKind::Recv:
        messages.erase(s.msg_id);
        break;
      case StepKind::Note:
        if (s.tag == "drop" && s.data.contains("msgId")) messages.erase(s.data.at("msgId").get<std::uint64_t>());
        break;
      case StepKind::Response:
        handlers.erase(s.handler);
        if (s.coordinator && s.txn) responded.insert(*s.txn);
        break;
      case StepKind::Crash:
        crashed.insert(s.node);
        std::erase_if(handlers, [&](const auto& h) { return h.second.node == s.node; });
        std::erase_if(messages, [&](const auto& m) { return m.second.node == s.node; });
        break;
      default:
        break;
    }
    try_close(i);
  }
  return out;
}

}  // namespace pdts
