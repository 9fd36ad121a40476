#include "pdts/checkers.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace pdts {

namespace {

const std::vector<std::pair<Property, std::pair<const char*, const char*>>> kProperties = {
    {Property::Serializability, {"Serializability", "serializability"}},
    {Property::WeakProgress, {"WeakProgress", "weak-progress"}},
    {Property::WeakIR, {"WeakIR", "weak-ir"}},
    {Property::StrongIR, {"StrongIR", "strong-ir"}},
    {Property::DAP, {"DAP", "dap"}},
    {Property::DDAP, {"DDAP", "ddap"}},
    {Property::FastDecision, {"FastDecision", "fast-decision"}},
    {Property::SeamlessFT, {"SeamlessFT", "seamless-ft"}},
    {Property::ReadDelay, {"ReadDelay", "read-delay"}},
};

Verdict pass(Property p, json witness = nullptr, std::string details = {}) {
  return Verdict{p, true, std::move(witness), std::move(details), false};
}

Verdict fail(Property p, json witness, std::string details) {
  return Verdict{p, false, std::move(witness), std::move(details), false};
}

}  // namespace

std::string to_string(Property p) {
  for (const auto& [prop, names] : kProperties) {
    if (prop == p) return names.first;
  }
  return "?";
}

Property property_from_cli(const std::string& s) {
  for (const auto& [prop, names] : kProperties) {
    if (s == names.second) return prop;
  }
  throw ConfigError("unknown property '" + s + "'");
}

json to_json(const Verdict& v) {
  json j{{"property", to_string(v.property)}, {"pass", v.pass}, {"witness", v.witness}, {"details", v.details}};
  if (v.caveat) j["caveat"] = true;
  return j;
}

ExecutionTrace RunContext::run() const { return pdts::run(config, algorithm, scenario, schedule); }

json to_json(const RunContext& c) {
  return json{{"config", to_json(c.config)},
              {"algorithm", c.algorithm.cli_name()},
              {"timeoutTicks", c.algorithm.timeout_ticks},
              {"scenario", scenario_to_json(c.scenario)},
              {"schedule", to_json(c.schedule)}};
}

RunContext run_context_from_json(const json& j) {
  RunContext c;
  c.config = sim_config_from_json(j.at("config"));
  c.algorithm = AlgorithmVariant::parse(j.at("algorithm").get<std::string>());
  c.algorithm.timeout_ticks = j.value("timeoutTicks", std::uint64_t{0});
  c.scenario = scenario_from_json(j.at("scenario"));
  c.schedule = schedule_from_json(j.at("schedule"));
  return c;
}

// ---------------------------------------------------------------------------
// Serializability

namespace {

/// Replays `order` serially; returns the index of the first transaction with
/// an illegal read, or order.size() when legal.
std::size_t first_illegal(const CommittedHistory& h, const std::vector<std::size_t>& order) {
  std::map<ItemId, Word> state = h.initial;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (const auto& op : h.txns[order[pos]].ops) {
      if (op.kind == OpKind::Read) {
        auto it = state.find(op.item);
        const Word cur = it == state.end() ? Word(nullptr) : it->second;
        if (cur != op.value) return pos;
      } else {
        state[op.item] = op.value;
      }
    }
  }
  return order.size();
}

json order_json(const CommittedHistory& h, const std::vector<std::size_t>& order) {
  json out = json::array();
  for (auto i : order) out.push_back(h.txns[i].txn);
  return out;
}

struct DepEdge {
  std::size_t from, to;  // indices into txns; kInit for the initial state
  ItemId item;
  std::string kind;  // "wr", "rw"
};

constexpr std::size_t kInit = static_cast<std::size_t>(-1);

struct Polygraph {
  std::vector<DepEdge> forced;
  // Each choice: either edge a or edge b must hold.
  std::vector<std::pair<DepEdge, DepEdge>> choices;
  std::optional<std::string> impossible;  // a read no order can explain
};

/// Reads-from resolution plus the write-order alternatives.
Polygraph build_polygraph(const CommittedHistory& h, bool strict_unique) {
  Polygraph g;
  std::map<std::pair<ItemId, std::string>, std::vector<std::size_t>> writers_of_value;
  std::map<ItemId, std::vector<std::size_t>> writers;
  for (std::size_t t = 0; t < h.txns.size(); ++t) {
    // Only a transaction's last write of an item is visible to others.
    std::map<ItemId, Word> last;
    for (const auto& op : h.txns[t].ops) {
      if (op.kind == OpKind::Write) last[op.item] = op.value;
    }
    for (const auto& [item, value] : last) {
      writers_of_value[{item, value.dump()}].push_back(t);
      writers[item].push_back(t);
    }
  }
  if (strict_unique) {
    for (const auto& [key, ws] : writers_of_value) {
      if (ws.size() > 1 || h.initial_value(key.first) == json::parse(key.second)) {
        throw TooLarge("written values are not unique for " + key.first);
      }
    }
  }
  for (std::size_t r = 0; r < h.txns.size(); ++r) {
    std::map<ItemId, Word> own;
    for (const auto& op : h.txns[r].ops) {
      if (op.kind == OpKind::Write) {
        own[op.item] = op.value;
        continue;
      }
      if (auto o = own.find(op.item); o != own.end()) {
        if (o->second != op.value) {
          g.impossible = h.txns[r].txn + " read " + op.item + "=" + op.value.dump() + " after writing " +
                         o->second.dump();
          return g;
        }
        continue;
      }
      std::size_t w;
      auto it = writers_of_value.find({op.item, op.value.dump()});
      if (it != writers_of_value.end()) {
        w = it->second.front();
      } else if (h.initial_value(op.item) == op.value) {
        w = kInit;
      } else {
        g.impossible = h.txns[r].txn + " read " + op.item + "=" + op.value.dump() + ", which was never written";
        return g;
      }
      if (w == r) {
        g.impossible = h.txns[r].txn + " read its own later write of " + op.item;
        return g;
      }
      if (w != kInit) g.forced.push_back({w, r, op.item, "wr"});
      for (std::size_t w2 : writers[op.item]) {
        if (w2 == w || w2 == r) continue;
        if (w == kInit) g.forced.push_back({r, w2, op.item, "rw"});
        else g.choices.push_back({{w2, w, op.item, "ww"}, {r, w2, op.item, "rw"}});
      }
    }
  }
  return g;
}

struct Digraph {
  explicit Digraph(std::size_t n) : adj(n) {}
  std::vector<std::vector<std::size_t>> adj;

  bool reaches(std::size_t a, std::size_t b) const {
    std::vector<char> seen(adj.size(), 0);
    std::vector<std::size_t> stack{a};
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      if (x == b) return true;
      if (seen[x]) continue;
      seen[x] = 1;
      for (auto y : adj[x]) stack.push_back(y);
    }
    return false;
  }
  /// Adds a→b unless it closes a cycle.
  bool add(std::size_t a, std::size_t b) {
    if (a == b || reaches(b, a)) return false;
    adj[a].push_back(b);
    return true;
  }
  void pop(std::size_t a) { adj[a].pop_back(); }

  std::vector<std::size_t> topo_order() const {
    std::vector<int> indeg(adj.size(), 0);
    for (const auto& out : adj) {
      for (auto y : out) ++indeg[y];
    }
    std::vector<std::size_t> order;
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      if (indeg[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
      auto x = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(x);
      for (auto y : adj[x]) {
        if (--indeg[y] == 0) ready.insert(y);
      }
    }
    return order;
  }
};

/// A cycle through forced dependency edges, if one exists.
std::optional<std::vector<DepEdge>> forced_cycle(const CommittedHistory& h, const std::vector<DepEdge>& edges) {
  const std::size_t n = h.txns.size();
  std::vector<std::vector<const DepEdge*>> out(n);
  for (const auto& e : edges) {
    if (e.from != kInit) out[e.from].push_back(&e);
  }
  std::vector<int> color(n, 0);
  std::vector<const DepEdge*> path;
  std::optional<std::vector<DepEdge>> found;
  std::function<void(std::size_t)> dfs = [&](std::size_t x) {
    color[x] = 1;
    for (const DepEdge* e : out[x]) {
      if (found) return;
      if (color[e->to] == 1) {
        std::vector<DepEdge> cyc;
        std::size_t start = 0;
        while (path[start]->from != e->to) ++start;
        for (std::size_t i = start; i < path.size(); ++i) cyc.push_back(*path[i]);
        cyc.push_back(*e);
        found = cyc;
        return;
      }
      if (color[e->to] == 0) {
        path.push_back(e);
        dfs(e->to);
        path.pop_back();
      }
    }
    color[x] = 2;
  };
  for (std::size_t i = 0; i < n && !found; ++i) {
    if (color[i] == 0) dfs(i);
  }
  return found;
}

json cycle_witness(const CommittedHistory& h, const std::vector<DepEdge>& cyc) {
  json txns = json::array(), edges = json::array();
  for (const auto& e : cyc) {
    txns.push_back(h.txns[e.from].txn);
    edges.push_back(json{{"from", h.txns[e.from].txn}, {"to", h.txns[e.to].txn}, {"item", e.item}, {"kind", e.kind}});
  }
  return json{{"cycle", txns}, {"edges", edges}};
}

Verdict serializability_failure(const CommittedHistory& h, const Polygraph& g) {
  if (g.impossible) {
    return fail(Property::Serializability, json{{"unexplainedRead", *g.impossible}}, *g.impossible);
  }
  if (auto cyc = forced_cycle(h, g.forced)) {
    return fail(Property::Serializability, cycle_witness(h, *cyc),
                "dependency cycle of length " + std::to_string(cyc->size()));
  }
  json edges = json::array();
  for (const auto& e : g.forced) {
    edges.push_back(json{{"from", e.from == kInit ? "init" : h.txns[e.from].txn}, {"to", h.txns[e.to].txn},
                         {"item", e.item}, {"kind", e.kind}});
  }
  return fail(Property::Serializability, json{{"cycle", nullptr}, {"edges", edges}},
              "every choice of write order closes a cycle");
}

}  // namespace

Verdict serializability_brute_force(const CommittedHistory& history) {
  const std::size_t n = history.txns.size();
  if (n > kBruteForceLimit) throw TooLarge(std::to_string(n) + " committed transactions");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    if (first_illegal(history, order) == n) {
      return pass(Property::Serializability, json{{"serialOrder", order_json(history, order)}});
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return serializability_failure(history, build_polygraph(history, false));
}

Verdict serializability_graph(const CommittedHistory& history) {
  const std::size_t n = history.txns.size();
  const Polygraph g = build_polygraph(history, true);
  if (g.impossible) return serializability_failure(history, g);
  Digraph d(n);
  for (const auto& e : g.forced) {
    if (e.from == kInit) continue;
    if (!d.add(e.from, e.to)) return serializability_failure(history, g);
  }
  std::function<bool(std::size_t)> solve = [&](std::size_t i) -> bool {
    if (i == g.choices.size()) return true;
    const auto& [a, b] = g.choices[i];
    for (const DepEdge* e : {&a, &b}) {
      const bool present = std::find(d.adj[e->from].begin(), d.adj[e->from].end(), e->to) != d.adj[e->from].end();
      if (present) {
        if (solve(i + 1)) return true;
        continue;
      }
      if (!d.add(e->from, e->to)) continue;
      if (solve(i + 1)) return true;
      d.pop(e->from);
    }
    return false;
  };
  if (!solve(0)) return serializability_failure(history, g);
  return pass(Property::Serializability, json{{"serialOrder", order_json(history, d.topo_order())}});
}

Verdict check_serializability(const CommittedHistory& history) {
  if (history.txns.size() <= kBruteForceLimit) return serializability_brute_force(history);
  return serializability_graph(history);
}

// ---------------------------------------------------------------------------
// Progress and invisible reads

Verdict check_weak_progress(const std::vector<ExecutionTrace>& traces) {
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    const auto intervals = transaction_intervals(trace);
    for (const auto& txn : trace.transactions()) {
      const auto resp = trace.coordinator_response(txn);
      if (!resp) {
        return fail(Property::WeakProgress, json{{"trace", t}, {"txn", txn}, {"reason", "undecided"}},
                    txn + " never decided");
      }
      bool concurrent = false;
      for (const auto& [other, iv] : intervals) {
        if (other != txn && iv.overlaps(intervals.at(txn))) concurrent = true;
      }
      if (!concurrent && trace[*resp].outcome != Outcome::Commit) {
        return fail(Property::WeakProgress, json{{"trace", t}, {"txn", txn}, {"reason", "solo abort"}, {"step", *resp}},
                    txn + " ran without concurrency and aborted");
      }
    }
  }
  return pass(Property::WeakProgress, nullptr, std::to_string(traces.size()) + " trace(s)");
}

Verdict check_weak_ir(const ExecutionTrace& trace) {
  for (const auto& txn : trace.transactions()) {
    const auto resp = trace.coordinator_response(txn);
    if (!resp) continue;
    const json& ws = trace[*resp].write_set;
    if (!ws.is_null() && !ws.empty()) continue;
    // A retry can re-read and drop writes an earlier attempt proposed; such a
    // transaction was not read-only in that attempt.
    const bool proposed_writes = std::any_of(trace.steps.begin(), trace.steps.end(), [&](const Step& s) {
      if (s.kind != StepKind::Send || s.txn != txn || !s.coordinator) return false;
      const json& body = s.payload.contains("body") ? s.payload["body"] : json();
      return body.is_object() && body.contains("writes") && !body["writes"].empty();
    });
    if (proposed_writes) continue;
    for (const auto& s : trace.steps) {
      if (s.kind == StepKind::Prim && s.nontrivial && s.txn == txn) {
        return fail(Property::WeakIR, json{{"txn", txn}, {"step", to_json(s)}},
                    txn + " has an empty write set but executed " + to_string(s.op) + " on " + s.obj);
      }
    }
  }
  return pass(Property::WeakIR);
}

namespace {

struct MessageKey {
  TxnId txn;
  std::string src, dst, kind;
  int ordinal = 0;
  auto operator<=>(const MessageKey&) const = default;
};

std::string endpoint(const ProcessRef& p) { return p.is_client() ? p.str() : "N" + std::to_string(*p.node + 1); }

/// Keys of the messages sent so far in a trace, by msgId.
class MessageKeys {
 public:
  void scan(const ExecutionTrace& t) {
    for (; next_ < t.size(); ++next_) {
      const Step& s = t[next_];
      if (s.kind != StepKind::Send) continue;
      MessageKey k{s.txn.value_or(""), endpoint(*s.proc), endpoint(*s.peer), s.payload.value("kind", ""), 0};
      k.ordinal = counts_[k]++;
      by_id_[s.msg_id] = k;
      by_key_[k] = s.msg_id;
    }
  }
  const MessageKey* key(std::uint64_t id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &it->second;
  }
  std::optional<std::uint64_t> id(const MessageKey& k) const {
    auto it = by_key_.find(k);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::size_t next_ = 0;
  std::map<MessageKey, int> counts_;
  std::map<std::uint64_t, MessageKey> by_id_;
  std::map<MessageKey, std::uint64_t> by_key_;
};

/// Step signature that is independent of process slots and handler ids.
json step_signature(const Step& s) {
  json j{{"kind", to_string(s.kind)}, {"node", s.node_of_proc() ? json(*s.node_of_proc()) : json(nullptr)}};
  switch (s.kind) {
    case StepKind::Prim:
      j["obj"] = s.obj;
      j["op"] = to_string(s.op);
      j["args"] = s.args;
      j["ret"] = s.ret;
      break;
    case StepKind::Send:
    case StepKind::Recv:
      j["payload"] = s.payload;
      j["peer"] = s.peer ? endpoint(*s.peer) : "";
      break;
    case StepKind::Response:
      if (s.outcome) j["outcome"] = *s.outcome == Outcome::Commit ? "commit" : "abort";
      j["readSet"] = s.read_set;
      j["writeSet"] = s.write_set;
      break;
    case StepKind::Note:
      j["tag"] = s.tag;
      break;
    default:
      break;
  }
  return j;
}

std::map<TxnId, std::vector<json>> per_txn_signatures(const ExecutionTrace& t) {
  std::map<TxnId, std::vector<json>> out;
  for (const auto& s : t.steps) {
    if (s.txn && s.proc) out[*s.txn].push_back(step_signature(s));
  }
  return out;
}

std::multiset<std::string> nontrivial_footprint(const ExecutionTrace& t, const TxnId& txn) {
  std::multiset<std::string> out;
  for (const auto& s : t.steps) {
    if (s.kind == StepKind::Prim && s.nontrivial && s.txn == txn) {
      out.insert("N" + std::to_string(*s.proc->node + 1) + ":" + s.obj + ":" + to_string(s.op) + s.args.dump());
    }
  }
  return out;
}

/// Replays `original`'s decisions against `scenario`, translating message
/// deliveries by (txn, src, dst, kind, ordinal) and skipping decisions that do
/// not apply, then completes with FIFO delivery.
ExecutionTrace replay_mapped(const RunContext& ctx, const Scenario& scenario, const ExecutionTrace& original) {
  MessageKeys orig_keys;
  orig_keys.scan(original);
  const Schedule realized = schedule_from_json(original.schedule);

  Simulator sim(ctx.config, ctx.algorithm, scenario);
  MessageKeys keys;
  for (const auto& d : realized.script) {
    keys.scan(sim.trace());
    Decision mapped = d;
    if (d.kind == Decision::Kind::Deliver) {
      const MessageKey* k = orig_keys.key(d.msg_id);
      auto id = k ? keys.id(*k) : std::nullopt;
      if (!id) continue;
      mapped.msg_id = *id;
      mapped.pin.reset();
    }
    if (sim.is_enabled(mapped)) sim.apply(mapped);
  }
  for (std::size_t n = 0; n < kMaxDecisions; ++n) {
    auto d = Scheduler::fifo_choice(sim);
    if (!d) {
      if (sim.advance_idle_time()) continue;
      break;
    }
    sim.apply(*d);
  }
  return sim.take_trace();
}

}  // namespace

Verdict check_strong_ir(const RunContext& ctx) {
  const ExecutionTrace original = ctx.run();
  Verdict weak = check_weak_ir(original);
  if (!weak.pass) {
    weak.property = Property::StrongIR;
    return weak;
  }
  const auto orig_sigs = per_txn_signatures(original);
  json checked = json::array();
  for (const auto& txn : original.transactions()) {
    const auto resp = original.coordinator_response(txn);
    if (!resp || original[*resp].outcome != Outcome::Commit) continue;
    const json& ws = original[*resp].write_set;
    if (ws.empty()) continue;
    const TransactionProgram& prog = ctx.scenario.program(txn);
    if (prog.read_set.empty()) {
      checked.push_back(txn);
      continue;  // the twin is the transaction itself
    }
    Scenario twin_scenario = ctx.scenario;
    for (auto& p : twin_scenario.transactions) {
      if (p.id != txn) continue;
      p.read_set.clear();
      p.write_rule.clear();
      for (const auto& w : ws) p.write_rule.push_back({w.at("item"), WriteCondition::Always, w.at("value")});
    }
    const ExecutionTrace twin = replay_mapped(ctx, twin_scenario, original);

    const auto a = nontrivial_footprint(original, txn);
    const auto b = nontrivial_footprint(twin, txn);
    if (a != b) {
      std::vector<std::string> only_orig, only_twin;
      std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_orig));
      std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_twin));
      return fail(Property::StrongIR,
                  json{{"txn", txn}, {"onlyOriginal", only_orig}, {"onlyTwin", only_twin},
                       {"schedule", original.schedule}},
                  txn + "'s non-trivial primitives differ from those of its blind-write twin");
    }
    const auto twin_sigs = per_txn_signatures(twin);
    for (const auto& [other, sig] : orig_sigs) {
      if (other == txn) continue;
      auto it = twin_sigs.find(other);
      if (it == twin_sigs.end() || it->second != sig) {
        std::size_t at = 0;
        const std::vector<json> empty;
        const auto& tw = it == twin_sigs.end() ? empty : it->second;
        while (at < sig.size() && at < tw.size() && sig[at] == tw[at]) ++at;
        return fail(Property::StrongIR,
                    json{{"txn", txn}, {"affected", other}, {"position", at},
                         {"original", at < sig.size() ? sig[at] : json(nullptr)},
                         {"twin", at < tw.size() ? tw[at] : json(nullptr)}, {"schedule", original.schedule}},
                    "replacing " + txn + " by its twin changes the steps of " + other);
      }
    }
    checked.push_back(txn);
  }
  return pass(Property::StrongIR, json{{"checked", checked}});
}

// ---------------------------------------------------------------------------
// Disjoint-access parallelism

namespace {

json pair_witness(const PrimitiveStep& a, const PrimitiveStep& b) {
  return json{{"object", json{{"node", a.obj.node}, {"name", a.obj.name}}},
              {"steps", json::array({a.trace_index, b.trace_index})},
              {"txns", json::array({*a.txn, *b.txn})},
              {"ops", json::array({to_string(a.op), to_string(b.op)})}};
}

Verdict check_access_parallelism(const ExecutionTrace& trace, const Scenario& scenario, bool distributed) {
  const Property prop = distributed ? Property::DDAP : Property::DAP;
  std::map<TxnId, std::set<ItemId>> data_sets;
  for (const auto& p : scenario.transactions) data_sets[p.id] = p.data_set();
  for (const auto& [a, b] : contending_pairs(trace)) {
    auto da = data_sets.find(*a.txn), db = data_sets.find(*b.txn);
    if (da == data_sets.end() || db == data_sets.end()) continue;
    std::set<ItemId> common;
    std::set_intersection(da->second.begin(), da->second.end(), db->second.begin(), db->second.end(),
                          std::inserter(common, common.end()));
    if (distributed) {
      const auto shard = scenario.placement.items_on(a.obj.node);
      std::erase_if(common, [&](const ItemId& x) { return !shard.count(x); });
    }
    if (common.empty()) {
      return fail(prop, pair_witness(a, b),
                  *a.txn + " and " + *b.txn + " contend on " + a.obj.name + " at N" + std::to_string(a.obj.node + 1) +
                      (distributed ? " although their data sets are disjoint on that node"
                                   : " although their data sets are disjoint"));
    }
  }
  return pass(prop);
}

}  // namespace

Verdict check_dap(const ExecutionTrace& trace, const Scenario& scenario) {
  return check_access_parallelism(trace, scenario, false);
}

Verdict check_ddap(const ExecutionTrace& trace, const Scenario& scenario) {
  return check_access_parallelism(trace, scenario, true);
}

// ---------------------------------------------------------------------------
// Depth properties

Verdict check_fast_decision(const ExecutionTrace& solo_trace) {
  const DepthAnalysis da(solo_trace);
  json per_txn = json::array();
  for (const auto& txn : solo_trace.transactions()) {
    if (!solo_trace.coordinator_response(txn)) throw Undecided(txn + " has no response");
    const int depth = da.txn_depth(txn);
    const auto profile = da.partial_depth_profile(txn);
    std::vector<std::size_t> learned;
    for (const auto& [item, idx] : value_learned_events(solo_trace, txn)) learned.push_back(idx);
    std::sort(learned.begin(), learned.end());
    auto count_before = [&](std::size_t len) {
      return static_cast<std::size_t>(std::lower_bound(learned.begin(), learned.end(), len) - learned.begin());
    };

    const int last_pd = learned.empty() ? 0 : profile[learned.back() + 1];
    const int bound = last_pd + 2;
    if (depth > bound) {
      return fail(Property::FastDecision,
                  json{{"txn", txn}, {"depth", depth}, {"bound", bound}, {"excess", depth - bound},
                       {"learnedAt", last_pd}},
                  txn + " decided at depth " + std::to_string(depth) + ", " + std::to_string(depth - bound) +
                      " beyond the last learned value's depth + 2");
    }
    for (std::size_t len = 0; len < profile.size(); ++len) {
      if (profile[len] >= depth - 2) break;
      std::size_t further = len;
      while (further + 1 < profile.size() && profile[further + 1] <= profile[len] + 2) ++further;
      if (count_before(further) <= count_before(len)) {
        return fail(Property::FastDecision,
                    json{{"txn", txn}, {"depth", depth}, {"prefix", len}, {"partialDepth", profile[len]},
                         {"excess", depth - bound}},
                    txn + " learns nothing new within two message delays after prefix " + std::to_string(len));
      }
    }
    per_txn.push_back(json{{"txn", txn}, {"depth", depth}, {"bound", bound}});
  }
  return pass(Property::FastDecision, per_txn);
}

Verdict check_read_delay(const ExecutionTrace& trace) {
  const DepthAnalysis da(trace);
  for (const auto& txn : trace.transactions()) {
    if (!trace.coordinator_response(txn)) continue;
    for (const auto& [item, idx] : value_learned_events(trace, txn)) {
      const int pd = da.partial_depth(idx + 1, txn);
      if (pd < 2) {
        return fail(Property::ReadDelay, json{{"txn", txn}, {"item", item}, {"step", idx}, {"partialDepth", pd}},
                    txn + " learned " + item + " at partial depth " + std::to_string(pd));
      }
    }
  }
  return pass(Property::ReadDelay);
}

namespace {

std::vector<json> invocation_response_sequence(const ExecutionTrace& t) {
  std::vector<json> out;
  for (const auto& s : t.steps) {
    if (s.is_coordinator_invoke()) out.push_back(json{{"invoke", *s.txn}});
    if (s.is_coordinator_response()) out.push_back(json{{"response", *s.txn}, {"sig", step_signature(s)}});
  }
  return out;
}

std::map<TxnId, int> decided_depths(const ExecutionTrace& t) {
  std::map<TxnId, int> out;
  const DepthAnalysis da(t);
  for (const auto& txn : t.transactions()) {
    if (t.coordinator_response(txn)) out[txn] = da.txn_depth(txn);
  }
  return out;
}

}  // namespace

Verdict check_seamless_ft(const RunContext& ctx, int s) {
  if (s <= 0) return pass(Property::SeamlessFT, nullptr, "0-seamless holds for every implementation");
  const ExecutionTrace base = ctx.run();
  const Schedule realized = schedule_from_json(base.schedule);
  const auto want_seq = invocation_response_sequence(base);
  const auto want_depth = decided_depths(base);

  std::size_t first = 0;
  int crashes = 0;
  std::set<NodeId> crashed;
  for (std::size_t i = 0; i < realized.script.size(); ++i) {
    if (realized.script[i].kind == Decision::Kind::Crash) {
      first = i + 1;
      ++crashes;
      crashed.insert(realized.script[i].node);
    }
  }
  if (crashes > s - 1) throw ConfigError("the base execution already has " + std::to_string(crashes) + " crash(es)");
  Simulator probe(ctx.config, ctx.algorithm, ctx.scenario);
  const int n_nodes = probe.config().n_nodes;
  if (probe.scenario().crash_budget() < s) throw ConfigError("seamless check needs f >= s");

  int points = 0;
  for (std::size_t pos = first; pos <= realized.script.size(); ++pos) {
    for (NodeId c = 0; c < n_nodes; ++c) {
      if (crashed.count(c)) continue;
      ++points;
      std::vector<Decision> prefix(realized.script.begin(), realized.script.begin() + static_cast<std::ptrdiff_t>(pos));
      Schedule sched = inject_crash(Schedule::scripted(prefix, TailPolicy::Fifo), c, pos);
      bool matched = false;
      json last_mismatch;
      for (int attempt = 0; attempt <= kSeamlessRandomCompletions && !matched; ++attempt) {
        if (attempt > 0) {
          sched.tail = TailPolicy::Random;
          sched.seed = static_cast<std::uint64_t>(attempt);
        }
        const ExecutionTrace e2 = pdts::run(ctx.config, ctx.algorithm, ctx.scenario, sched);
        const auto seq = invocation_response_sequence(e2);
        const auto depths = decided_depths(e2);
        if (seq == want_seq && depths == want_depth) {
          matched = true;
        } else if (attempt == 0) {
          json got_depth = json::object(), exp_depth = json::object();
          for (const auto& [t, d] : depths) got_depth[t] = d;
          for (const auto& [t, d] : want_depth) exp_depth[t] = d;
          last_mismatch = json{{"crashNode", c},
                               {"position", pos},
                               {"expectedDepths", exp_depth},
                               {"observedDepths", got_depth},
                               {"sequenceEqual", seq == want_seq},
                               {"schedule", to_json(sched)}};
        }
      }
      if (!matched) {
        Verdict v = fail(Property::SeamlessFT, last_mismatch,
                         "no seamless completion found after crashing N" + std::to_string(c + 1) + " at position " +
                             std::to_string(pos) + " (FIFO plus " + std::to_string(kSeamlessRandomCompletions) +
                             " random completions)");
        v.caveat = true;
        return v;
      }
    }
  }
  return pass(Property::SeamlessFT, json{{"injectionPoints", points}});
}

// ---------------------------------------------------------------------------
// Runtime invariants

namespace {

bool is_lock(const std::string& obj) {
  return obj == ItemObjects::kGlobalLock || obj.ends_with(".lockL") || obj.ends_with(".lockS");
}

std::string owner_txn(const Word& owner) {
  const std::string s = owner.get<std::string>();
  return s.substr(0, s.find('@'));
}

std::string item_of(const std::string& obj) { return obj.substr(0, obj.rfind('.')); }

}  // namespace

std::vector<std::string> check_invariants(const ExecutionTrace& trace, const Scenario& scenario,
                                          bool crash_free_locks_released) {
  std::vector<std::string> out;
  auto report = [&](std::size_t i, const std::string& what) {
    out.push_back("step " + std::to_string(i) + ": " + what);
  };

  std::set<NodeId> crashed;
  std::map<std::uint64_t, std::size_t> sends;
  std::set<std::uint64_t> received;
  std::map<std::pair<NodeId, std::string>, Word> cells;
  std::map<std::pair<NodeId, ItemId>, std::map<std::int64_t, Word>> installed;
  const auto initial = scenario.placement.initial_values();

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Step& s = trace[i];
    if (s.index != i) report(i, "index out of order");
    if (s.kind == StepKind::Crash) {
      crashed.insert(s.node);
      continue;
    }
    if (s.proc && s.proc->node && crashed.count(*s.proc->node)) report(i, "step by a crashed node");

    if (s.kind == StepKind::Send) {
      if (!sends.emplace(s.msg_id, i).second) report(i, "duplicate msgId " + std::to_string(s.msg_id));
    }
    if (s.kind == StepKind::Recv) {
      auto it = sends.find(s.msg_id);
      if (it == sends.end()) {
        report(i, "receive of unsent message " + std::to_string(s.msg_id));
      } else {
        const Step& snd = trace[it->second];
        if (snd.payload != s.payload) report(i, "payload altered in transit");
        if (snd.peer && s.proc && endpoint(*snd.peer) != endpoint(*s.proc)) report(i, "delivered to the wrong process");
      }
      if (!received.insert(s.msg_id).second) report(i, "message delivered twice");
    }
    if (s.kind != StepKind::Prim) {
      // Read atomicity: a successful read reply carries a (seqNum, value)
      // pair that some commit installed together.
      if (s.kind == StepKind::Send && s.payload.value("kind", "") == "ReadReply" &&
          s.payload.at("body").value("ok", false)) {
        const json& body = s.payload.at("body");
        const ItemId item = body.at("item").get<std::string>();
        const std::int64_t seq = body.at("seqNum").get<std::int64_t>();
        const Word value = body.at("value");
        bool ok;
        if (seq == 0) {
          auto it = initial.find(item);
          ok = value == (it == initial.end() ? Word(nullptr) : it->second);
        } else {
          auto& inst = installed[{*s.proc->node, item}];
          auto it = inst.find(seq);
          ok = it != inst.end() && it->second == value;
        }
        if (!ok) report(i, "read of " + item + " returned seqNum " + std::to_string(seq) + " with a foreign value");
      }
      continue;
    }

    const NodeId node = *s.proc->node;
    const auto key = std::make_pair(node, s.obj);
    Word& cell = cells[key];
    if (is_lock(s.obj)) {
      if (s.op == PrimOp::Cas && s.ret == true && s.args.at(1).is_null()) {
        if (cell != s.args.at(0)) report(i, "conditional release of " + s.obj + " saw a different owner");
        if (owner_txn(s.args.at(0)) != s.txn.value_or("")) report(i, "lock " + s.obj + " released by a non-owner");
        cell = nullptr;
      } else if (s.op == PrimOp::Cas && s.ret == true) {
        if (!s.args.at(0).is_null()) report(i, "lock " + s.obj + " acquired from a non-free state");
        if (!s.args.at(1).is_string() || owner_txn(s.args.at(1)) != s.txn.value_or("")) {
          report(i, "lock " + s.obj + " acquired on behalf of another transaction");
        }
        if (!cell.is_null()) report(i, "lock " + s.obj + " acquired while held by " + cell.dump());
        cell = s.args.at(1);
      } else if (s.op == PrimOp::Write) {
        if (!s.args.at(0).is_null()) report(i, "lock " + s.obj + " written directly");
        if (cell.is_null()) report(i, "release of free lock " + s.obj);
        else if (owner_txn(cell) != s.txn.value_or("")) report(i, "lock " + s.obj + " released by a non-owner");
        cell = nullptr;
      }
    } else if (s.obj.ends_with(".seqNum")) {
      if (s.op == PrimOp::Write) {
        const std::int64_t prev = cell.is_null() ? 0 : cell.get<std::int64_t>();
        if (s.args.at(0).get<std::int64_t>() <= prev) report(i, s.obj + " did not increase");
        cell = s.args.at(0);
      }
    } else if (s.obj.ends_with(".val")) {
      if (s.op == PrimOp::Write) {
        cell = s.args.at(0);
        const auto seq_it = cells.find({node, item_of(s.obj) + ".seqNum"});
        const std::int64_t seq = seq_it == cells.end() || seq_it->second.is_null() ? 0 : seq_it->second.get<std::int64_t>();
        installed[{node, item_of(s.obj)}][seq] = s.args.at(0);
      }
    } else if (s.op == PrimOp::Write || (s.op == PrimOp::Cas && s.ret == true)) {
      cell = s.op == PrimOp::Write ? s.args.at(0) : s.args.at(1);
    }
  }

  try {
    const HappenedBefore hb(trace);
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (hb(i, i)) report(i, "happened-before cycle");
    }
    const auto depths = step_depths(trace);
    std::map<std::uint64_t, int> handler_depth;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const Step& s = trace[i];
      if (!depths[i] || s.handler == 0) continue;
      auto [it, fresh] = handler_depth.emplace(s.handler, *depths[i]);
      if (!fresh) {
        if (*depths[i] < it->second) report(i, "depth decreased within a handler");
        it->second = *depths[i];
      }
      if (s.kind == StepKind::Recv) {
        auto snd = sends.find(s.msg_id);
        if (snd != sends.end() && depths[snd->second] && *depths[i] < *depths[snd->second] + 1) {
          report(i, "receive not deeper than its send");
        }
      }
    }
  } catch (const Error& e) {
    out.push_back(e.what());
  }

  const Verdict wir = check_weak_ir(trace);
  if (!wir.pass) out.push_back("weak invisible reads: " + wir.details);

  bool all_decided = true;
  for (const auto& txn : trace.transactions()) {
    if (!trace.coordinator_response(txn)) all_decided = false;
  }
  if (crash_free_locks_released && crashed.empty() && all_decided) {
    const auto intervals = transaction_intervals(trace);
    const bool quiescent = std::all_of(intervals.begin(), intervals.end(), [](const auto& iv) { return iv.second.end; });
    if (quiescent) {
      for (const auto& [key, value] : cells) {
        if (is_lock(key.second) && !value.is_null()) {
          out.push_back("lock " + key.second + " at N" + std::to_string(key.first + 1) + " still held by " +
                        value.dump() + " at quiescence");
        }
      }
    }
  }
  return out;
}

}  // namespace pdts
