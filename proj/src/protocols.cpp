#include "pdts/protocols.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pdts {

AlgorithmVariant AlgorithmVariant::parse(const std::string& cli_name) {
  AlgorithmVariant v;
  if (cli_name == "base") v.tag = VariantTag::Base;
  else if (cli_name == "no-fast") v.tag = VariantTag::NoFastDecision;
  else if (cli_name == "weak-ir") v.tag = VariantTag::WeakIrOnly;
  else if (cli_name == "no-seamless") v.tag = VariantTag::NoSeamlessFt;
  else if (cli_name == "no-ddap") v.tag = VariantTag::NoDdap;
  else throw ConfigError("unknown algorithm '" + cli_name + "'");
  return v;
}

std::string AlgorithmVariant::cli_name() const {
  switch (tag) {
    case VariantTag::Base: return "base";
    case VariantTag::NoFastDecision: return "no-fast";
    case VariantTag::WeakIrOnly: return "weak-ir";
    case VariantTag::NoSeamlessFt: return "no-seamless";
    case VariantTag::NoDdap: return "no-ddap";
  }
  return "base";
}

std::string AlgorithmVariant::display_name() const {
  switch (tag) {
    case VariantTag::Base: return "Base";
    case VariantTag::NoFastDecision: return "NoFastDecision";
    case VariantTag::WeakIrOnly: return "WeakIrOnly";
    case VariantTag::NoSeamlessFt: return "NoSeamlessFt";
    case VariantTag::NoDdap: return "NoDdap";
  }
  return "Base";
}

std::vector<AlgorithmVariant> all_variants() {
  std::vector<AlgorithmVariant> out;
  for (auto t : {VariantTag::Base, VariantTag::NoFastDecision, VariantTag::WeakIrOnly, VariantTag::NoSeamlessFt,
                 VariantTag::NoDdap}) {
    out.push_back(AlgorithmVariant{t, 0});
  }
  return out;
}

namespace {

const std::vector<std::pair<MsgKind, const char*>> kMsgNames = {
    {MsgKind::Read, "Read"},         {MsgKind::ReadReply, "ReadReply"},   {MsgKind::Validate, "Validate"},
    {MsgKind::ValidateReply, "ValidateReply"}, {MsgKind::Commit, "Commit"}, {MsgKind::Abort, "Abort"},
    {MsgKind::Lock, "Lock"},         {MsgKind::LockReply, "LockReply"},   {MsgKind::Check, "Check"},
    {MsgKind::CheckReply, "CheckReply"}, {MsgKind::Restart, "Restart"}};

}  // namespace

std::string to_string(MsgKind k) {
  for (const auto& [kind, name] : kMsgNames) {
    if (kind == k) return name;
  }
  return "?";
}

MsgKind msg_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kMsgNames) {
    if (s == name) return kind;
  }
  throw ConfigError("unknown message kind '" + s + "'");
}

json to_json(const TxnRecord& t) {
  json reads = json::array(), writes = json::array();
  for (const auto& [k, s] : t.reads) reads.push_back(json::array({k, s}));
  for (const auto& [k, v] : t.writes) writes.push_back(json::array({k, v}));
  return json{{"tid", t.tid}, {"reads", reads}, {"writes", writes}, {"writeSeqs", t.write_seqs}};
}

TxnRecord txn_record_from_json(const json& j) {
  TxnRecord t;
  t.tid = j.at("tid").get<std::string>();
  for (const auto& r : j.at("reads")) t.reads.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::int64_t>());
  for (const auto& w : j.at("writes")) t.writes.emplace_back(w.at(0).get<std::string>(), w.at(1));
  t.write_seqs = j.value("writeSeqs", std::vector<std::int64_t>{});
  return t;
}

json make_payload(MsgKind kind, json body, int attempt) {
  return json{{"kind", to_string(kind)}, {"attempt", attempt}, {"body", std::move(body)}};
}

MsgKind payload_kind(const json& payload) { return msg_kind_from_string(payload.at("kind").get<std::string>()); }

namespace {

constexpr std::int64_t kFinished = 1 << 30;

std::string epoch_obj(const TxnId& tid) { return tid + ".epoch"; }

ProcessRef node_ref(NodeId n) { return ProcessRef::node_process(n, 0); }

json vote(bool commit, json write_seqs = json::object()) {
  return json{{"vote", commit ? "commit" : "abort"}, {"writeSeqs", std::move(write_seqs)}};
}

bool contains(const std::vector<ItemId>& v, const ItemId& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::vector<ItemId> read_keys(const TxnRecord& r) {
  std::vector<ItemId> out;
  for (const auto& [k, s] : r.reads) out.push_back(k);
  return out;
}

std::vector<ItemId> write_keys(const TxnRecord& r) {
  std::vector<ItemId> out;
  for (const auto& [k, v] : r.writes) out.push_back(k);
  return out;
}

/// Items of the record stored on `node`, ascending.
std::vector<ItemId> local_items(const TxnRecord& r, const DataPlacement& p, NodeId node) {
  std::set<ItemId> all;
  for (const auto& [k, s] : r.reads) all.insert(k);
  for (const auto& [k, v] : r.writes) all.insert(k);
  std::vector<ItemId> out;
  for (const auto& k : all) {
    const auto& g = p.group(k);
    if (std::find(g.begin(), g.end(), node) != g.end()) out.push_back(k);
  }
  return out;
}

std::int64_t read_seq(const TxnRecord& r, const ItemId& k) {
  for (const auto& [key, s] : r.reads) {
    if (key == k) return s;
  }
  return -1;
}

/// Tracks replies of one round and tells when every item has a quorum.
struct RoundState {
  std::vector<ItemId> items;
  std::set<NodeId> targets;
  std::map<NodeId, json> replies;
  bool wait_all = false;

  bool complete(const DataPlacement& p) const {
    if (wait_all) return replies.size() == targets.size();
    for (const auto& k : items) {
      int n = 0;
      for (NodeId node : p.group(k)) n += replies.count(node) ? 1 : 0;
      if (n < p.quorum()) return false;
    }
    return true;
  }
  bool all_commit() const {
    return std::all_of(replies.begin(), replies.end(),
                       [](const auto& r) { return r.second.at("vote") == "commit"; });
  }
};

std::set<NodeId> nodes_of(const std::vector<ItemId>& items, const DataPlacement& p) {
  std::set<NodeId> out;
  for (const auto& k : items) {
    for (NodeId n : p.group(k)) out.insert(n);
  }
  return out;
}

}  // namespace

DataPlacement Protocol::effective_placement(const DataPlacement& p, int node_count) const {
  if (variant_.tag != VariantTag::NoSeamlessFt) return p;
  DataPlacement out = p;
  std::vector<NodeId> everyone;
  for (NodeId n = 0; n < node_count; ++n) everyone.push_back(n);
  for (auto& [item, group] : out.replica_groups) group = everyone;
  out.k = node_count;
  return out;
}

void Protocol::init_memory(NodeMemory& mem, const Scenario& effective) const {
  const bool global = variant_.tag == VariantTag::NoDdap;
  const auto initial = effective.placement.initial_values();
  for (const auto& item : effective.placement.items_on(mem.node())) {
    create_item_objects(mem, item, initial.at(item), !global);
  }
  if (global) mem.create(ItemObjects::kGlobalLock, nullptr);
  for (const auto& t : effective.transactions) mem.create(epoch_obj(t.id), 0);
}

Handler Protocol::coordinator(HandlerEnv env, TransactionProgram program) const {
  const DataPlacement& placement = env.scenario->placement;
  const auto initial = placement.initial_values();
  const VariantTag tag = variant_.tag;
  int attempt = 0;
  bool two_rounds = tag == VariantTag::NoFastDecision;

  for (;;) {
    // Read phase: each key from a quorum of its replica group, keeping the
    // value with the highest sequence number.
    TxnRecord rec;
    rec.tid = env.txn;
    std::vector<Word> values;
    bool read_failed = false;
    for (const auto& key : program.read_set) {
      const auto& group = placement.group(key);
      const json read_msg = make_payload(MsgKind::Read, json{{"item", key}}, attempt);
      for (NodeId n : group) co_await send_to(node_ref(n), read_msg);
      int replies = 0;
      std::int64_t best_seq = -1;
      Word best_val;
      while (replies < placement.quorum()) {
        ActionResult r = co_await receive();
        const json& pl = r.message->payload;
        if (payload_kind(pl) != MsgKind::ReadReply || pl.at("attempt") != attempt || pl.at("body").at("item") != key) {
          continue;
        }
        ++replies;
        const json& body = pl.at("body");
        if (body.at("ok").get<bool>() && body.at("seqNum").get<std::int64_t>() > best_seq) {
          best_seq = body.at("seqNum").get<std::int64_t>();
          best_val = body.at("value");
        }
      }
      if (best_seq < 0) {
        read_failed = true;
        break;
      }
      const json learned{{"item", key}, {"seqNum", best_seq}, {"value", best_val}};
      co_await note("valueLearned", learned);
      rec.reads.emplace_back(key, best_seq);
      values.push_back(best_val);
    }
    json read_set = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
      read_set.push_back(json{{"item", program.read_set[i]}, {"value", values[i]}});
    }
    if (read_failed) {
      co_await respond(Outcome::Abort, read_set, json::array());
      co_return;
    }
    rec.writes = program.realized_writes(values, initial);

    std::vector<ItemId> items = read_keys(rec);
    for (const auto& k : write_keys(rec)) {
      if (!contains(items, k)) items.push_back(k);
    }
    std::set<NodeId> targets = nodes_of(items, placement);
    if (tag == VariantTag::NoDdap && !rec.writes.empty()) {
      for (NodeId n = 0; n < env.node_count; ++n) targets.insert(n);
    }

    const std::vector<MsgKind> rounds = two_rounds ? std::vector<MsgKind>{MsgKind::Lock, MsgKind::Check}
                                                   : std::vector<MsgKind>{MsgKind::Validate};
    bool commit = true;
    bool timed_out = false;
    std::map<ItemId, std::int64_t> seqs;
    for (MsgKind round : rounds) {
      const MsgKind reply_kind = round == MsgKind::Lock    ? MsgKind::LockReply
                                 : round == MsgKind::Check ? MsgKind::CheckReply
                                                           : MsgKind::ValidateReply;
      RoundState st{items, targets, {}, tag == VariantTag::NoSeamlessFt && attempt == 0};
      for (NodeId n : targets) co_await send_to(node_ref(n), make_payload(round, to_json(rec), attempt));
      while (!st.complete(placement)) {
        std::optional<std::uint64_t> timeout;
        if (st.wait_all) timeout = env.variant.timeout_ticks;
        ActionResult r = co_await receive(timeout);
        if (r.timed_out) {
          timed_out = true;
          break;
        }
        const json& pl = r.message->payload;
        if (payload_kind(pl) != reply_kind || pl.at("attempt") != attempt) continue;
        st.replies[*r.message->src.node] = pl.at("body");
      }
      if (timed_out) break;
      for (const auto& [node, body] : st.replies) {
        for (const auto& [k, s] : body.at("writeSeqs").items()) {
          seqs[k] = std::max(seqs.count(k) ? seqs[k] : std::int64_t{0}, s.get<std::int64_t>());
        }
      }
      if (!st.all_commit()) {
        commit = false;
        break;
      }
    }

    if (timed_out) {
      // Slow path: fence off this attempt everywhere and start over with
      // separate lock and check rounds.
      const json fallback{{"attempt", attempt + 1}};
      co_await note("fallback", fallback);
      ++attempt;
      std::set<NodeId> everyone;
      for (NodeId n = 0; n < env.node_count; ++n) everyone.insert(n);
      for (NodeId n : everyone) co_await send_to(node_ref(n), make_payload(MsgKind::Restart, to_json(rec), attempt));
      two_rounds = true;
      continue;
    }

    json write_set = json::array();
    for (const auto& [k, v] : rec.writes) write_set.push_back(json{{"item", k}, {"value", v}});
    if (commit) {
      for (const auto& [k, v] : rec.writes) rec.write_seqs.push_back(seqs.count(k) ? seqs[k] + 1 : 1);
      for (NodeId n : targets) co_await send_to(node_ref(n), make_payload(MsgKind::Commit, to_json(rec), attempt));
      co_await respond(Outcome::Commit, read_set, write_set);
    } else {
      for (NodeId n : targets) co_await send_to(node_ref(n), make_payload(MsgKind::Abort, to_json(rec), attempt));
      co_await respond(Outcome::Abort, read_set, write_set);
    }
    co_return;
  }
}

Handler Protocol::on_message(HandlerEnv env, Message msg) const {
  const DataPlacement& placement = env.scenario->placement;
  const NodeId self = *env.self.node;
  const VariantTag tag = variant_.tag;
  const json& pl = msg.payload;
  const MsgKind kind = payload_kind(pl);
  const int attempt = pl.at("attempt").get<int>();
  const json body = pl.at("body");
  const ProcessRef reply_to = msg.src;
  const bool global = tag == VariantTag::NoDdap;

  if (kind == MsgKind::Read) {
    const ItemId key = body.at("item").get<std::string>();
    for (int tries = 0; tries < kReadRetryBound; ++tries) {
      if (!(co_await prim_read(ItemObjects::lock_s(key))).value.is_null()) continue;
      const Word s1 = (co_await prim_read(ItemObjects::seq_num(key))).value;
      if (!(co_await prim_read(ItemObjects::lock_s(key))).value.is_null()) continue;
      const Word v = (co_await prim_read(ItemObjects::val(key))).value;
      const Word s2 = (co_await prim_read(ItemObjects::seq_num(key))).value;
      if (s1 != s2) continue;
      const json reply = make_payload(MsgKind::ReadReply, json{{"item", key}, {"ok", true}, {"seqNum", s1}, {"value", v}},
                                      attempt);
      co_await send_to(reply_to, reply);
      co_await respond();
      co_return;
    }
    const json reply = make_payload(MsgKind::ReadReply, json{{"item", key}, {"ok", false}}, attempt);
    co_await send_to(reply_to, reply);
    co_await respond();
    co_return;
  }

  const TxnRecord rec = txn_record_from_json(body);
  const Word tid = rec.tid;
  // Item locks taken by a slow-path attempt carry the attempt number.
  const Word owner = attempt == 0 ? tid : Word(rec.tid + "@" + std::to_string(attempt));
  const auto items = local_items(rec, placement, self);
  const auto reads = read_keys(rec);
  const auto writes = write_keys(rec);
  const bool lockable = std::any_of(items.begin(), items.end(), [&](const ItemId& k) { return contains(writes, k); }) ||
                        (!writes.empty() && (global || (tag == VariantTag::WeakIrOnly && !items.empty())));

  if (kind == MsgKind::Commit || kind == MsgKind::Abort || kind == MsgKind::Restart) {
    // Only nodes where validation may have locked something need fencing;
    // elsewhere the handler stays free of non-trivial steps.
    if (lockable) {
      if (kind == MsgKind::Restart) {
        co_await prim_cas(epoch_obj(rec.tid), std::int64_t{attempt - 1}, std::int64_t{attempt});
      } else {
        co_await prim_write(epoch_obj(rec.tid), kFinished);
      }
    }
    if (kind == MsgKind::Commit) {
      for (std::size_t i = 0; i < rec.writes.size(); ++i) {
        const auto& [key, val] = rec.writes[i];
        if (!contains(items, key)) continue;
        const std::int64_t seq = rec.write_seqs.at(i);
        co_await lock_acquire(ItemObjects::lock_s(key), tid);
        const Word cur = (co_await prim_read(ItemObjects::seq_num(key))).value;
        if (cur.get<std::int64_t>() < seq) {
          co_await prim_write(ItemObjects::seq_num(key), seq);
          co_await prim_write(ItemObjects::val(key), val);
        }
        co_await prim_write(ItemObjects::lock_s(key), nullptr);
      }
    }
    if (global) {
      if ((co_await prim_read(ItemObjects::kGlobalLock)).value == tid) {
        co_await prim_cas(ItemObjects::kGlobalLock, tid, nullptr);
      }
    } else {
      for (const auto& key : items) {
        const Word l = (co_await prim_read(ItemObjects::lock_l(key))).value;
        if (l == tid || (kind != MsgKind::Restart && l == owner)) {
          co_await prim_cas(ItemObjects::lock_l(key), l, nullptr);
        }
      }
    }
    co_await respond();
    co_return;
  }

  // Validation-phase messages: Validate, Lock, Check.
  const MsgKind reply_kind = kind == MsgKind::Lock    ? MsgKind::LockReply
                             : kind == MsgKind::Check ? MsgKind::CheckReply
                                                      : MsgKind::ValidateReply;
  const bool stale = (co_await prim_read(epoch_obj(rec.tid))).value.get<std::int64_t>() > attempt;
  if (stale) {
    co_await send_to(reply_to, make_payload(reply_kind, vote(false), attempt));
    co_await respond();
    co_return;
  }

  const bool lock_reads = tag == VariantTag::WeakIrOnly && !rec.writes.empty();
  std::vector<std::string> acquired;
  bool ok = true;
  json write_seqs = json::object();

  if (global) {
    if (!rec.writes.empty()) {
      ok = (co_await prim_cas(ItemObjects::kGlobalLock, nullptr, tid)).value.get<bool>();
      if (ok) acquired.push_back(ItemObjects::kGlobalLock);
    } else {
      const Word g = (co_await prim_read(ItemObjects::kGlobalLock)).value;
      ok = g.is_null();
    }
    for (const auto& key : items) {
      if (!ok) break;
      if (contains(reads, key)) {
        const Word s = (co_await prim_read(ItemObjects::seq_num(key))).value;
        if (s.get<std::int64_t>() != read_seq(rec, key)) ok = false;
      }
      if (ok && contains(writes, key)) write_seqs[key] = (co_await prim_read(ItemObjects::seq_num(key))).value;
    }
  } else if (kind == MsgKind::Check) {
    for (const auto& key : items) {
      if (!contains(reads, key)) continue;
      const Word l = (co_await prim_read(ItemObjects::lock_l(key))).value;
      if (!l.is_null() && l != owner) {
        ok = false;
        break;
      }
      const Word s = (co_await prim_read(ItemObjects::seq_num(key))).value;
      if (s.get<std::int64_t>() != read_seq(rec, key)) {
        ok = false;
        break;
      }
    }
  } else {
    // Lock everything first, then validate the reads: checking an item
    // before another is locked lets two handlers on one node both pass.
    const bool check_reads = kind == MsgKind::Validate;
    for (const auto& key : items) {
      const bool is_read = contains(reads, key);
      const bool is_write = contains(writes, key);
      if (!(is_write || (lock_reads && is_read))) continue;
      const Word l = (co_await prim_read(ItemObjects::lock_l(key))).value;
      if (l == owner) {
        if (is_write) write_seqs[key] = (co_await prim_read(ItemObjects::seq_num(key))).value;
        continue;
      }
      if (!l.is_null() || !(co_await prim_cas(ItemObjects::lock_l(key), nullptr, owner)).value.get<bool>()) {
        ok = false;
        break;
      }
      acquired.push_back(ItemObjects::lock_l(key));
      if (is_write) write_seqs[key] = (co_await prim_read(ItemObjects::seq_num(key))).value;
    }
    for (const auto& key : items) {
      if (!ok || !check_reads || !contains(reads, key)) continue;
      const Word l = (co_await prim_read(ItemObjects::lock_l(key))).value;
      if (!l.is_null() && l != owner) {
        ok = false;
        break;
      }
      const Word s = (co_await prim_read(ItemObjects::seq_num(key))).value;
      if (s.get<std::int64_t>() != read_seq(rec, key)) ok = false;
    }
  }

  if (ok && !acquired.empty()) {
    // A Restart/Commit/Abort may have run while the locks were taken.
    if ((co_await prim_read(epoch_obj(rec.tid))).value.get<std::int64_t>() > attempt) ok = false;
  }
  if (!ok) {
    // Conditional release: a concurrent Commit/Abort of this transaction may
    // already have freed the lock and someone else may hold it now.
    for (const auto& obj : acquired) {
      const Word held = obj == ItemObjects::kGlobalLock ? tid : owner;
      co_await prim_cas(obj, held, nullptr);
    }
    write_seqs = json::object();
  }
  co_await send_to(reply_to, make_payload(reply_kind, vote(ok, write_seqs), attempt));
  co_await respond();
}

std::unique_ptr<Protocol> make_protocol(const AlgorithmVariant& v) { return std::make_unique<Protocol>(v); }

}  // namespace pdts
