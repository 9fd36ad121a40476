#include "pdts/simkit.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace pdts {

// ---------------------------------------------------------------------------
// Config, decisions, schedules

void SimConfig::validate() const {
  if (n_nodes < 0) throw ConfigError("nNodes must be >= 1");
  if (procs_per_node < 1) throw ConfigError("procsPerNode must be >= 1");
  if (n_clients < 0) throw ConfigError("nClients must be >= 0");
  if (delta < 1) throw ConfigError("delta must be >= 1");
}

json to_json(const SimConfig& c) {
  return json{{"nNodes", c.n_nodes}, {"procsPerNode", c.procs_per_node}, {"nClients", c.n_clients},
              {"delta", c.delta},     {"gst", c.gst},                     {"seed", c.seed}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  c.n_nodes = j.value("nNodes", 0);
  c.procs_per_node = j.value("procsPerNode", 4);
  c.n_clients = j.value("nClients", 0);
  c.delta = j.value("delta", std::uint64_t{16});
  c.gst = j.value("gst", std::uint64_t{0});
  c.seed = j.value("seed", std::uint64_t{0});
  c.validate();
  return c;
}

std::string Decision::str() const {
  switch (kind) {
    case Kind::Step: return "step " + proc.str();
    case Kind::Deliver:
      return "deliver #" + std::to_string(msg_id) + (pin ? " to p" + std::to_string(*pin) : "");
    case Kind::Crash: return "crash N" + std::to_string(node + 1);
  }
  return "?";
}

json to_json(const Decision& d) {
  switch (d.kind) {
    case Decision::Kind::Step: return json{{"step", d.proc}};
    case Decision::Kind::Deliver: {
      json j{{"deliver", d.msg_id}};
      if (d.pin) j["pin"] = *d.pin;
      return j;
    }
    case Decision::Kind::Crash: return json{{"crash", d.node}};
  }
  return nullptr;
}

Decision decision_from_json(const json& j) {
  if (j.contains("step")) return Decision::step(j.at("step").get<ProcessRef>());
  if (j.contains("deliver")) {
    std::optional<int> pin;
    if (j.contains("pin")) pin = j.at("pin").get<int>();
    return Decision::deliver(j.at("deliver").get<std::uint64_t>(), pin);
  }
  if (j.contains("crash")) return Decision::crash(j.at("crash").get<int>());
  throw ConfigError("malformed schedule decision: " + j.dump());
}

Schedule Schedule::scripted(std::vector<Decision> script, TailPolicy tail) {
  Schedule s;
  s.kind = Kind::Scripted;
  s.script = std::move(script);
  s.tail = tail;
  return s;
}

Schedule Schedule::random(std::uint64_t seed) {
  Schedule s;
  s.kind = Kind::RandomSeeded;
  s.seed = seed;
  return s;
}

namespace {

std::string tail_name(TailPolicy t) {
  switch (t) {
    case TailPolicy::Stop: return "stop";
    case TailPolicy::Fifo: return "fifo";
    case TailPolicy::Random: return "random";
  }
  return "stop";
}

}  // namespace

json to_json(const Schedule& s) {
  json script = json::array();
  for (const auto& d : s.script) script.push_back(to_json(d));
  const char* kind = s.kind == Schedule::Kind::Scripted       ? "scripted"
                     : s.kind == Schedule::Kind::RandomSeeded ? "random"
                                                              : "exhaustive";
  json j{{"kind", kind}, {"script", script}, {"tail", tail_name(s.tail)}, {"seed", s.seed}};
  if (s.lenient) j["lenient"] = true;
  if (s.allow_crashes) j["allowCrashes"] = true;
  if (!s.cursor.empty()) j["cursor"] = s.cursor;
  return j;
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  const auto kind = j.value("kind", std::string("scripted"));
  if (kind == "scripted") s.kind = Schedule::Kind::Scripted;
  else if (kind == "random") s.kind = Schedule::Kind::RandomSeeded;
  else if (kind == "exhaustive") s.kind = Schedule::Kind::ExhaustiveCursor;
  else throw ConfigError("unknown schedule kind '" + kind + "'");
  for (const auto& d : j.value("script", json::array())) s.script.push_back(decision_from_json(d));
  const auto tail = j.value("tail", std::string("stop"));
  if (tail == "stop") s.tail = TailPolicy::Stop;
  else if (tail == "fifo") s.tail = TailPolicy::Fifo;
  else if (tail == "random") s.tail = TailPolicy::Random;
  else throw ConfigError("unknown schedule tail '" + tail + "'");
  s.seed = j.value("seed", std::uint64_t{0});
  s.lenient = j.value("lenient", false);
  s.allow_crashes = j.value("allowCrashes", false);
  s.cursor = j.value("cursor", std::vector<std::size_t>{});
  return s;
}

Schedule inject_crash(const Schedule& schedule, NodeId node, std::size_t after_step_index) {
  if (schedule.kind != Schedule::Kind::Scripted) {
    throw ConfigError("crashes can only be injected into scripted schedules");
  }
  if (node < 0) throw ConfigError("node index must be >= 0");
  if (after_step_index > schedule.script.size()) {
    throw ConfigError("crash position " + std::to_string(after_step_index) + " is past the script end");
  }
  for (std::size_t i = 0; i < after_step_index; ++i) {
    const auto& d = schedule.script[i];
    if (d.kind == Decision::Kind::Crash && d.node == node) {
      throw AlreadyCrashed("N" + std::to_string(node + 1) + " already crashes at decision " + std::to_string(i));
    }
  }
  Schedule out = schedule;
  out.script.insert(out.script.begin() + static_cast<std::ptrdiff_t>(after_step_index), Decision::crash(node));
  out.lenient = true;
  return out;
}

// ---------------------------------------------------------------------------
// Simulator

struct Simulator::Proc {
  ProcessRef ref;
  Handler handler;
  std::uint64_t handler_id = 0;
  std::optional<TxnId> txn;
  bool coordinator = false;
  std::optional<std::uint64_t> deadline;
  std::deque<std::size_t> queue;  // clients: programs not yet invoked
};

struct Simulator::NodeState {
  explicit NodeState(NodeId id) : mem(id) {}
  bool alive = true;
  NodeMemory mem;
  std::vector<std::unique_ptr<Proc>> procs;
};

namespace {

Handler discard_handler() { co_await respond(); }

}  // namespace

Simulator::Simulator(SimConfig config, AlgorithmVariant algorithm, Scenario scenario)
    : config_(config), algorithm_(algorithm), protocol_(make_protocol(algorithm)), scenario_(std::move(scenario)) {
  config_.validate();
  scenario_.validate();
  const int needed = scenario_.placement.node_count();
  if (config_.n_nodes == 0) config_.n_nodes = std::max(needed, 1);
  if (needed > config_.n_nodes) {
    throw PlacementError("placement uses N" + std::to_string(needed) + " but the system has " +
                         std::to_string(config_.n_nodes) + " nodes");
  }
  scenario_.placement = protocol_->effective_placement(scenario_.placement, config_.n_nodes);
  if (algorithm_.timeout_ticks == 0) algorithm_.timeout_ticks = 4 * config_.delta;

  nodes_.reserve(config_.n_nodes);
  for (NodeId n = 0; n < config_.n_nodes; ++n) {
    nodes_.emplace_back(n);
    protocol_->init_memory(nodes_.back().mem, scenario_);
    for (int p = 0; p < config_.procs_per_node; ++p) {
      auto proc = std::make_unique<Proc>();
      proc->ref = ProcessRef::node_process(n, p);
      nodes_.back().procs.push_back(std::move(proc));
    }
  }
  const int n_clients = std::max(config_.n_clients, scenario_.client_count());
  config_.n_clients = n_clients;
  for (int c = 0; c < n_clients; ++c) {
    auto proc = std::make_unique<Proc>();
    proc->ref = ProcessRef::client(c);
    clients_.push_back(std::move(proc));
  }
  for (std::size_t i = 0; i < scenario_.transactions.size(); ++i) {
    const auto& t = scenario_.transactions[i];
    clients_[t.client]->queue.push_back(i);
    open_handlers_[t.id] = 0;
    responded_[t.id] = false;
  }
  trace_.scenario = scenario_.name;
  trace_.algorithm = algorithm_.cli_name();
}

Simulator::~Simulator() = default;

Simulator::Proc& Simulator::proc(const ProcessRef& p) {
  return const_cast<Proc&>(std::as_const(*this).proc(p));
}

const Simulator::Proc& Simulator::proc(const ProcessRef& p) const {
  if (p.is_client()) {
    if (p.index < 0 || p.index >= static_cast<int>(clients_.size())) {
      throw ScheduleStuck("no client " + p.str());
    }
    return *clients_[p.index];
  }
  if (!p.node || *p.node < 0 || *p.node >= static_cast<int>(nodes_.size()) || p.index < 0 ||
      p.index >= config_.procs_per_node) {
    throw ScheduleStuck("no process " + (p.node ? p.str() : std::string("?")));
  }
  return *nodes_[*p.node].procs[p.index];
}

bool Simulator::node_alive(NodeId n) const {
  return n >= 0 && n < static_cast<int>(nodes_.size()) && nodes_[n].alive;
}

const NodeMemory& Simulator::memory(NodeId n) const { return nodes_.at(n).mem; }

bool Simulator::txn_interval_ended(const TxnId& txn) const {
  auto r = responded_.find(txn);
  if (r == responded_.end() || !r->second) return false;
  if (open_handlers_.at(txn) != 0) return false;
  for (const auto& [id, m] : in_flight_) {
    if (m.txn != txn) continue;
    if (m.dst.is_client() || node_alive(*m.dst.node)) return false;
  }
  return true;
}

bool Simulator::txn_ready(const TransactionProgram& prog) const {
  return !prog.start_after || txn_interval_ended(*prog.start_after);
}

bool Simulator::step_enabled(const Proc& p) const {
  if (!p.ref.is_client() && !nodes_[*p.ref.node].alive) return false;
  if (!p.handler) {
    return p.ref.is_client() && !p.queue.empty() && txn_ready(scenario_.transactions[p.queue.front()]);
  }
  const Action& a = p.handler.pending();
  switch (a.kind) {
    case ActionKind::Prim:
    case ActionKind::Send:
    case ActionKind::Note:
    case ActionKind::Respond:
      return true;
    case ActionKind::LockAcquire:
      return nodes_[*p.ref.node].mem.peek(a.obj).is_null();
    case ActionKind::Receive:
      return p.deadline && tick_ >= *p.deadline;
  }
  return false;
}

bool Simulator::delivery_enabled(const Message& m) const {
  if (m.dst.is_client()) {
    const Proc& p = proc(m.dst);
    if (!p.handler) return true;
    return p.handler.pending().kind == ActionKind::Receive && p.txn == m.txn;
  }
  const auto& node = nodes_[*m.dst.node];
  if (!node.alive) return false;
  return std::any_of(node.procs.begin(), node.procs.end(), [](const auto& p) { return !p->handler; });
}

bool Simulator::has_enabled_step(const ProcessRef& p) const {
  const Proc& pr = proc(p);
  return pr.handler && step_enabled(pr);
}

bool Simulator::step_is_timeout(const ProcessRef& p) const {
  const Proc& pr = proc(p);
  return pr.handler && pr.handler.pending().kind == ActionKind::Receive && step_enabled(pr);
}

bool Simulator::next_step_is_local_trivial(const ProcessRef& p) const {
  const Proc& pr = proc(p);
  if (!pr.handler || !step_enabled(pr)) return false;
  const Action& a = pr.handler.pending();
  return (a.kind == ActionKind::Prim && a.op == PrimOp::Read) || a.kind == ActionKind::Note;
}

std::vector<Decision> Simulator::enabled() const {
  std::vector<Decision> out;
  for (const auto& c : clients_) {
    if (step_enabled(*c)) out.push_back(Decision::step(c->ref));
  }
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    for (const auto& p : n.procs) {
      if (step_enabled(*p)) out.push_back(Decision::step(p->ref));
    }
  }
  for (const auto& [id, m] : in_flight_) {
    if (delivery_enabled(m)) out.push_back(Decision::deliver(id));
  }
  if (crashes_ < scenario_.crash_budget()) {
    for (const auto& n : nodes_) {
      if (n.alive) out.push_back(Decision::crash(n.mem.node()));
    }
  }
  return out;
}

bool Simulator::is_enabled(const Decision& d) const {
  switch (d.kind) {
    case Decision::Kind::Step: {
      if (d.proc.is_client() ? (d.proc.index < 0 || d.proc.index >= static_cast<int>(clients_.size()))
                             : (!d.proc.node || *d.proc.node < 0 || *d.proc.node >= static_cast<int>(nodes_.size()) ||
                                d.proc.index < 0 || d.proc.index >= config_.procs_per_node)) {
        return false;
      }
      return step_enabled(proc(d.proc));
    }
    case Decision::Kind::Deliver: {
      auto it = in_flight_.find(d.msg_id);
      if (it == in_flight_.end()) return false;
      if (!delivery_enabled(it->second)) return false;
      if (d.pin) {
        const Message& m = it->second;
        if (m.dst.is_client() || *d.pin < 0 || *d.pin >= config_.procs_per_node) return false;
        return !nodes_[*m.dst.node].procs[*d.pin]->handler;
      }
      return true;
    }
    case Decision::Kind::Crash:
      // The crash budget only limits what enabled() offers; an explicitly
      // scripted crash of any live node is honoured.
      return d.node >= 0 && d.node < static_cast<int>(nodes_.size()) && node_alive(d.node);
  }
  return false;
}

Step& Simulator::log(Step s) {
  s.index = trace_.steps.size();
  s.tick = tick_;
  trace_.steps.push_back(std::move(s));
  return trace_.steps.back();
}

void Simulator::note_engine(const std::string& tag, json data, std::optional<TxnId> txn) {
  Step s;
  s.kind = StepKind::Note;
  s.tag = tag;
  s.data = std::move(data);
  s.txn = std::move(txn);
  log(std::move(s));
}

void Simulator::apply(const Decision& d) {
  if (d.kind == Decision::Kind::Deliver) {
    auto it = in_flight_.find(d.msg_id);
    if (it != in_flight_.end() && !it->second.dst.is_client() && !node_alive(*it->second.dst.node)) {
      const Message m = it->second;
      in_flight_.erase(it);
      realized_.push_back(d);
      note_engine("drop", json{{"msgId", m.msg_id}, {"dst", m.dst}}, m.txn);
      ++tick_;
      return;
    }
  }
  if (!is_enabled(d)) throw ScheduleStuck(d.str() + " is not enabled at tick " + std::to_string(tick_));
  realized_.push_back(d);
  switch (d.kind) {
    case Decision::Kind::Step: {
      Proc& p = proc(d.proc);
      if (!p.handler) start_coordinator(p);
      else perform_pending(p);
      break;
    }
    case Decision::Kind::Deliver: {
      const Message m = in_flight_.at(d.msg_id);
      in_flight_.erase(d.msg_id);
      deliver(m, d.pin);
      break;
    }
    case Decision::Kind::Crash:
      crash(d.node);
      break;
  }
  ++tick_;
}

bool Simulator::apply_lenient(const Decision& d) {
  if (d.kind == Decision::Kind::Deliver) {
    auto it = in_flight_.find(d.msg_id);
    if (it != in_flight_.end() && !it->second.dst.is_client() && !node_alive(*it->second.dst.node)) {
      apply(d);
      return false;
    }
  }
  if (is_enabled(d)) {
    apply(d);
    return true;
  }
  realized_.push_back(d);
  note_engine("skip", json{{"decision", to_json(d)}}, std::nullopt);
  ++tick_;
  return false;
}

bool Simulator::advance_idle_time() {
  if (!enabled().empty()) return false;
  std::optional<std::uint64_t> earliest;
  auto consider = [&](const Proc& p) {
    if (p.handler && p.deadline && p.handler.pending().kind == ActionKind::Receive) {
      if (!earliest || *p.deadline < *earliest) earliest = p.deadline;
    }
  };
  for (const auto& c : clients_) consider(*c);
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    for (const auto& p : n.procs) consider(*p);
  }
  if (!earliest || *earliest <= tick_) return false;
  tick_ = *earliest;
  return true;
}

bool Simulator::all_decided() const {
  return std::all_of(responded_.begin(), responded_.end(), [](const auto& r) { return r.second; });
}

ExecutionTrace Simulator::take_trace(bool with_schedule) {
  if (with_schedule) trace_.schedule = to_json(Schedule::scripted(realized_));
  return std::move(trace_);
}

void Simulator::start_coordinator(Proc& p) {
  const std::size_t idx = p.queue.front();
  p.queue.pop_front();
  const TransactionProgram& prog = scenario_.transactions[idx];
  p.handler_id = next_handler_id_++;
  p.txn = prog.id;
  p.coordinator = true;

  Step s;
  s.kind = StepKind::Invoke;
  s.proc = p.ref;
  s.txn = prog.id;
  s.handler = p.handler_id;
  s.coordinator = true;
  s.program = json(prog);
  log(std::move(s));
  ++open_handlers_[prog.id];

  HandlerEnv env{p.ref, prog.id, &scenario_, algorithm_, config_.delta, config_.n_nodes};
  p.handler = protocol_->coordinator(env, prog);
  advance(p, {});
}

void Simulator::advance(Proc& p, ActionResult result) {
  p.handler.resume(std::move(result));
  if (p.handler.done()) throw std::logic_error("handler on " + p.ref.str() + " finished without a response step");
  const Action& a = p.handler.pending();
  if (a.kind == ActionKind::Receive && a.timeout_ticks) {
    p.deadline = tick_ + *a.timeout_ticks;
  } else {
    p.deadline.reset();
  }
}

void Simulator::perform_pending(Proc& p) {
  // `a` stays valid until the handler is resumed.
  const Action& a = p.handler.pending();
  Step s;
  s.proc = p.ref;
  s.txn = p.txn;
  s.handler = p.handler_id;
  s.coordinator = p.coordinator;

  switch (a.kind) {
    case ActionKind::Prim:
    case ActionKind::LockAcquire: {
      NodeMemory& mem = nodes_[*p.ref.node].mem;
      const NodeId actor = *p.ref.node;
      Word ret;
      json args = json::array();
      switch (a.op) {
        case PrimOp::Read:
          ret = mem.read(actor, a.obj);
          break;
        case PrimOp::Write:
          mem.write(actor, a.obj, a.arg);
          args.push_back(a.arg);
          break;
        case PrimOp::Cas:
          ret = mem.cas(actor, a.obj, a.arg, a.arg2);
          args.push_back(a.arg);
          args.push_back(a.arg2);
          break;
      }
      s.kind = StepKind::Prim;
      s.obj = a.obj;
      s.op = a.op;
      s.nontrivial = is_nontrivial(a.op);
      s.args = std::move(args);
      s.ret = ret;
      log(std::move(s));
      advance(p, {ret, std::nullopt, false});
      return;
    }
    case ActionKind::Send: {
      Message m;
      m.msg_id = next_msg_id_++;
      m.txn = p.txn;
      m.src = p.ref;
      m.dst = a.dst;
      m.payload = a.payload;
      m.sent_at_step = trace_.steps.size();
      m.sent_tick = tick_;
      s.kind = StepKind::Send;
      s.msg_id = m.msg_id;
      s.peer = m.dst;
      s.payload = m.payload;
      log(std::move(s));
      in_flight_.emplace(m.msg_id, std::move(m));
      advance(p, {});
      return;
    }
    case ActionKind::Receive:
      s.kind = StepKind::Note;
      s.tag = "timeout";
      s.data = json{{"after", *a.timeout_ticks}};
      log(std::move(s));
      advance(p, {nullptr, std::nullopt, true});
      return;
    case ActionKind::Note:
      s.kind = StepKind::Note;
      s.tag = a.tag;
      s.data = a.data;
      log(std::move(s));
      advance(p, {});
      return;
    case ActionKind::Respond: {
      s.kind = StepKind::Response;
      if (p.coordinator) {
        s.outcome = a.outcome;
        s.read_set = a.read_set.is_null() ? json::array() : a.read_set;
        s.write_set = a.write_set.is_null() ? json::array() : a.write_set;
      }
      log(std::move(s));
      if (p.txn) {
        --open_handlers_[*p.txn];
        if (p.coordinator) responded_[*p.txn] = true;
      }
      p.handler = Handler{};
      p.txn.reset();
      p.coordinator = false;
      p.deadline.reset();
      return;
    }
  }
}

void Simulator::deliver(const Message& m, std::optional<int> pin) {
  Proc* target = nullptr;
  if (m.dst.is_client()) {
    target = &proc(m.dst);
  } else {
    auto& node = nodes_[*m.dst.node];
    if (pin) {
      target = node.procs[*pin].get();
    } else {
      for (auto& p : node.procs) {
        if (!p->handler) {
          target = p.get();
          break;
        }
      }
    }
  }
  Proc& p = *target;

  Step s;
  s.kind = StepKind::Recv;
  s.proc = p.ref;
  s.msg_id = m.msg_id;
  s.peer = m.src;
  s.payload = m.payload;

  if (p.handler) {
    // A coordinator waiting for replies.
    s.txn = p.txn;
    s.handler = p.handler_id;
    s.coordinator = p.coordinator;
    log(std::move(s));
    advance(p, {nullptr, m, false});
    return;
  }

  p.handler_id = next_handler_id_++;
  p.txn = m.txn;
  p.coordinator = false;
  s.txn = m.txn;
  s.handler = p.handler_id;
  log(std::move(s));
  if (m.txn) ++open_handlers_[*m.txn];

  if (p.ref.is_client()) {
    p.handler = discard_handler();
  } else {
    HandlerEnv env{p.ref, m.txn.value_or(""), &scenario_, algorithm_, config_.delta, config_.n_nodes};
    p.handler = protocol_->on_message(env, m);
  }
  advance(p, {});
}

void Simulator::crash(NodeId n) {
  Step s;
  s.kind = StepKind::Crash;
  s.node = n;
  log(std::move(s));
  auto& node = nodes_[n];
  node.alive = false;
  for (auto& p : node.procs) {
    if (!p->handler) continue;
    if (p->txn) --open_handlers_[*p->txn];
    p->handler = Handler{};
    p->txn.reset();
    p->deadline.reset();
  }
  ++crashes_;
}

// ---------------------------------------------------------------------------
// Scheduler

Scheduler::Scheduler(Schedule schedule, std::uint64_t delta, std::uint64_t gst)
    : schedule_(std::move(schedule)), delta_(delta), gst_(gst), rng_(schedule_.seed) {}

std::optional<Decision> Scheduler::fifo_choice(const Simulator& sim) {
  const auto choices = sim.enabled();
  std::optional<Decision> timeout_step;
  for (const auto& d : choices) {
    if (d.kind != Decision::Kind::Step) continue;
    if (!sim.step_is_timeout(d.proc)) return d;
    if (!timeout_step) timeout_step = d;
  }
  for (const auto& d : choices) {
    if (d.kind == Decision::Kind::Deliver) return d;
  }
  return timeout_step;
}

std::optional<Decision> Scheduler::random_choice(const Simulator& sim) {
  const auto choices = sim.enabled();
  std::vector<Decision> regular, crashes;
  for (const auto& d : choices) {
    (d.kind == Decision::Kind::Crash ? crashes : regular).push_back(d);
  }
  if (sim.tick() >= gst_) {
    const Decision* overdue = nullptr;
    std::uint64_t oldest = std::numeric_limits<std::uint64_t>::max();
    for (const auto& d : regular) {
      if (d.kind != Decision::Kind::Deliver) continue;
      const auto& m = sim.in_flight().at(d.msg_id);
      const std::uint64_t sent = std::max(m.sent_tick, gst_);
      if (sim.tick() >= sent + delta_ && m.sent_tick < oldest) {
        oldest = m.sent_tick;
        overdue = &d;
      }
    }
    if (overdue) return *overdue;
  }
  if (schedule_.allow_crashes && !crashes.empty() && rng_() % 64 == 0) {
    return crashes[rng_() % crashes.size()];
  }
  if (regular.empty()) return std::nullopt;
  return regular[rng_() % regular.size()];
}

std::optional<Decision> Scheduler::next(Simulator& sim) {
  if (schedule_.kind == Schedule::Kind::Scripted && pos_ < schedule_.script.size()) {
    return schedule_.script[pos_++];
  }
  auto pick = [&]() -> std::optional<Decision> {
    switch (schedule_.kind) {
      case Schedule::Kind::Scripted:
        if (schedule_.tail == TailPolicy::Fifo) return fifo_choice(sim);
        if (schedule_.tail == TailPolicy::Random) return random_choice(sim);
        return std::nullopt;
      case Schedule::Kind::RandomSeeded:
        return random_choice(sim);
      case Schedule::Kind::ExhaustiveCursor: {
        const auto choices = sim.enabled();
        if (choices.empty()) return std::nullopt;
        const std::size_t idx = cursor_pos_ < schedule_.cursor.size() ? schedule_.cursor[cursor_pos_] : 0;
        ++cursor_pos_;
        branching_.push_back(choices.size());
        if (idx >= choices.size()) throw ScheduleStuck("cursor index out of range");
        return choices[idx];
      }
    }
    return std::nullopt;
  };
  if (schedule_.kind == Schedule::Kind::Scripted && schedule_.tail == TailPolicy::Stop) return std::nullopt;
  auto d = pick();
  while (!d && sim.advance_idle_time()) d = pick();
  return d;
}

ExecutionTrace run(const SimConfig& config, const AlgorithmVariant& algorithm, const Scenario& scenario,
                   const Schedule& schedule) {
  Simulator sim(config, algorithm, scenario);
  Scheduler sched(schedule, sim.config().delta, sim.config().gst);
  for (std::size_t n = 0; n < kMaxDecisions; ++n) {
    const bool scripted = sched.in_script();
    auto d = sched.next(sim);
    if (!d) break;
    if (scripted && schedule.lenient) sim.apply_lenient(*d);
    else sim.apply(*d);
  }
  ExecutionTrace t = sim.take_trace();
  if (schedule.lenient) t.schedule["lenient"] = true;
  return t;
}

std::vector<Decision> enabled_choices(const SimConfig& config, const AlgorithmVariant& algorithm,
                                      const Scenario& scenario, const ExecutionTrace& trace_so_far) {
  Simulator sim(config, algorithm, scenario);
  const Schedule s = trace_so_far.schedule.is_null() ? Schedule{} : schedule_from_json(trace_so_far.schedule);
  for (const auto& d : s.script) {
    if (s.lenient) sim.apply_lenient(d);
    else sim.apply(d);
  }
  return sim.enabled();
}

}  // namespace pdts
