#include "doctest.h"
#include "oracles.hpp"

using namespace pdts;

namespace {

const AlgorithmVariant kBase = AlgorithmVariant::parse("base");

std::size_t count_kind(const std::vector<Decision>& ds, Decision::Kind k) {
  return static_cast<std::size_t>(std::count_if(ds.begin(), ds.end(), [&](const Decision& d) { return d.kind == k; }));
}

}  // namespace

TEST_CASE("empty frontier before any work only offers invocations") {
  Simulator sim({}, kBase, scenario_solo_reads(0));
  const auto en = sim.enabled();
  // One client to invoke plus one crash per node (f = 1, three nodes).
  CHECK(count_kind(en, Decision::Kind::Step) == 1);
  CHECK(count_kind(en, Decision::Kind::Deliver) == 0);
  CHECK(count_kind(en, Decision::Kind::Crash) == 3);
}

TEST_CASE("a read broadcast to three replicas yields three delivery choices") {
  Simulator sim({}, kBase, scenario_solo_reads(1));
  // Invoke, then let the client run until it blocks waiting for read replies.
  const auto client = ProcessRef::client(0);
  do {
    sim.apply(Decision::step(client));
  } while (sim.has_enabled_step(client));
  const auto en = sim.enabled();
  CHECK(count_kind(en, Decision::Kind::Deliver) == 3);
  CHECK(count_kind(en, Decision::Kind::Step) == 0);
}

TEST_CASE("hand-counted first branch point of FIDS") {
  // Both clients can start; sharded placement allows no crashes.
  Simulator sim({}, kBase, scenario_fids());
  const auto en = sim.enabled();
  CHECK(en.size() == 2);
  CHECK(count_kind(en, Decision::Kind::Step) == 2);
  CHECK(enabled_choices({}, kBase, scenario_fids(), ExecutionTrace{}).size() == 2);
}

TEST_CASE("scripted decision that is not enabled is rejected") {
  const auto sched = Schedule::scripted({Decision::deliver(99)});
  CHECK_THROWS_AS(run({}, kBase, scenario_fids(), sched), ScheduleStuck);
}

TEST_CASE("run is deterministic and its realized schedule replays exactly") {
  for (std::uint64_t seed : {1u, 2u, 17u}) {
    const auto a = run({}, kBase, scenario_conflict(), Schedule::random(seed));
    const auto b = run({}, kBase, scenario_conflict(), Schedule::random(seed));
    CHECK(to_jsonl(a) == to_jsonl(b));
    const auto replay = run({}, kBase, scenario_conflict(), schedule_from_json(a.schedule));
    CHECK(to_jsonl(replay) == to_jsonl(a));
  }
}

TEST_CASE("schedule JSON round trip") {
  Schedule s = Schedule::scripted({Decision::step(ProcessRef::client(1)), Decision::deliver(4, 2), Decision::crash(1)},
                                  TailPolicy::Fifo);
  const Schedule back = schedule_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));
  CHECK(back.script == s.script);
}

TEST_CASE("crash injected first makes the crash the first event") {
  const auto plain = run({}, kBase, scenario_rfids_solo(3), Schedule::fifo());
  const Schedule s = inject_crash(schedule_from_json(plain.schedule), 2, 0);
  const auto t = run({}, kBase, scenario_rfids_solo(3), s);
  REQUIRE(t.size() > 0);
  CHECK(t[0].kind == StepKind::Crash);
  CHECK(t[0].node == 2);
  CHECK_THROWS_AS(inject_crash(s, 2, 5), AlreadyCrashed);
}

TEST_CASE("crash finality and decision under every single-crash injection") {
  const auto base_trace = run({}, kBase, scenario_solo_reads(1), Schedule::fifo());
  const auto script = schedule_from_json(base_trace.schedule);
  for (NodeId n = 0; n < 3; ++n) {
    for (std::size_t at = 0; at <= script.script.size(); ++at) {
      const auto t = run({}, kBase, scenario_solo_reads(1), inject_crash(script, n, at));
      CAPTURE(n);
      CAPTURE(at);
      CHECK(t.coordinator_response("T1").has_value());
      bool crashed = false;
      for (const auto& s : t.steps) {
        if (s.kind == StepKind::Crash && s.node == n) crashed = true;
        if (crashed && s.proc && !s.proc->is_client()) CHECK(*s.proc->node != n);
      }
      CHECK(crashed);
    }
  }
}

TEST_CASE("crash of a node that holds nothing leaves the run unchanged") {
  Scenario s = scenario_solo_reads(0);
  s.placement.f = 0;
  s.placement.k = 3;
  const auto clean = run({}, kBase, s, Schedule::fifo());
  SimConfig cfg;
  cfg.n_nodes = 4;
  const auto plain = run(cfg, kBase, s, Schedule::fifo());
  const auto crashed = run(cfg, kBase, s, inject_crash(schedule_from_json(plain.schedule), 3, plain.schedule["script"].size()));
  REQUIRE(crashed.size() == plain.size() + 1);
  CHECK(crashed.steps.back().kind == StepKind::Crash);
  CHECK(txn_depth(crashed, "T1") == txn_depth(clean, "T1"));
}

TEST_CASE("receives only consume earlier, undelivered sends") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto t = run({}, kBase, scenario_rfids(), Schedule::random(seed));
    std::map<std::uint64_t, int> sent;
    for (const auto& s : t.steps) {
      if (s.kind == StepKind::Send) ++sent[s.msg_id];
      if (s.kind == StepKind::Recv) {
        CHECK(sent[s.msg_id] == 1);
        --sent[s.msg_id];
      }
    }
  }
}

TEST_CASE("after GST overdue deliveries are always offered and every transaction decides") {
  SimConfig cfg;
  cfg.gst = 1;
  cfg.delta = 8;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Simulator sim(cfg, kBase, scenario_rfids());
    std::mt19937_64 rng(seed);
    for (int guard = 0; guard < 20000; ++guard) {
      auto en = sim.enabled();
      if (en.empty()) {
        if (!sim.advance_idle_time()) break;
        continue;
      }
      for (const auto& [id, m] : sim.in_flight()) {
        if (m.dst.is_client() || sim.tick() < cfg.gst || sim.tick() - m.sent_tick <= cfg.delta) continue;
        if (!sim.node_alive(*m.dst.node)) continue;
        if (!sim.is_enabled(Decision::deliver(id))) continue;
        CHECK(std::count_if(en.begin(), en.end(), [&](const Decision& d) {
                return d.kind == Decision::Kind::Deliver && d.msg_id == id;
              }) == 1);
      }
      sim.apply(en[std::uniform_int_distribution<std::size_t>(0, en.size() - 1)(rng)]);
    }
    CHECK(sim.all_decided());
  }
}
