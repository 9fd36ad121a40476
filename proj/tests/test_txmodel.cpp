#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace pdts;

namespace {

Step mk(StepKind k, std::uint64_t handler, ProcessRef p, bool coord = false) {
  Step s;
  s.kind = k;
  s.handler = handler;
  s.proc = p;
  s.txn = "T1";
  s.coordinator = coord;
  return s;
}

// Client → node → client, one round trip.
ExecutionTrace round_trip() {
  const auto c = ProcessRef::client(0);
  const auto n = ProcessRef::node_process(0, 0);
  ExecutionTrace t;
  t.steps.push_back(mk(StepKind::Invoke, 1, c, true));
  auto send1 = mk(StepKind::Send, 1, c, true);
  send1.msg_id = 1;
  t.steps.push_back(send1);
  auto recv1 = mk(StepKind::Recv, 2, n);
  recv1.msg_id = 1;
  t.steps.push_back(recv1);
  auto prim = mk(StepKind::Prim, 2, n);
  prim.obj = "X1.seqNum";
  t.steps.push_back(prim);
  auto send2 = mk(StepKind::Send, 2, n);
  send2.msg_id = 2;
  t.steps.push_back(send2);
  t.steps.push_back(mk(StepKind::Response, 2, n));
  auto recv2 = mk(StepKind::Recv, 1, c, true);
  recv2.msg_id = 2;
  t.steps.push_back(recv2);
  auto resp = mk(StepKind::Response, 1, c, true);
  resp.outcome = Outcome::Commit;
  resp.read_set = json::array();
  resp.write_set = json::array();
  t.steps.push_back(resp);
  for (std::size_t i = 0; i < t.steps.size(); ++i) t.steps[i].index = i;
  return t;
}

}  // namespace

TEST_CASE("depth of a hand-traced round trip") {
  const auto t = round_trip();
  const auto d = step_depths(t);
  const std::vector<int> expected{0, 0, 1, 1, 1, 1, 2, 2};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(d[i] == expected[i]);
  CHECK(txn_depth(t, "T1") == 2);
  CHECK(partial_depth(t, 0, "T1") == 0);
  CHECK(partial_depth(t, 2, "T1") == 0);
  CHECK(partial_depth(t, 3, "T1") == 1);
  // The node's response does not happen-before the coordinator response.
  HappenedBefore hb(t);
  CHECK(hb(4, 6));
  CHECK(hb(0, 7));
  CHECK_FALSE(hb(5, 7));
  CHECK_FALSE(hb(7, 0));
}

TEST_CASE("receive without a send is an orphan") {
  auto t = round_trip();
  t.steps.erase(t.steps.begin() + 1);
  for (std::size_t i = 0; i < t.steps.size(); ++i) t.steps[i].index = i;
  CHECK_THROWS_AS(step_depths(t), OrphanStep);
}

TEST_CASE("realized writes follow the write rule") {
  TransactionProgram p;
  p.id = "T1";
  p.read_set = {"X1", "X2"};
  p.write_rule = {{"X3", WriteCondition::AllReadsInitial, "v"}, {"X4", WriteCondition::Always, "w"},
                  {"X5", WriteCondition::Never, "z"}};
  const std::map<ItemId, Word> init{{"X1", nullptr}, {"X2", "a"}};
  auto w = p.realized_writes({nullptr, "a"}, init);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == std::pair<ItemId, Word>{"X3", "v"});
  CHECK(w[1] == std::pair<ItemId, Word>{"X4", "w"});
  w = p.realized_writes({"b", "a"}, init);
  REQUIRE(w.size() == 1);
  CHECK(w[0].first == "X4");
  CHECK(p.data_set() == std::set<ItemId>{"X1", "X2", "X3", "X4", "X5"});
}

TEST_CASE("placement validation") {
  DataPlacement p;
  p.items = {{"X1", nullptr}};
  p.replica_groups = {{"X1", {0, 1, 2}}};
  p.k = 3;
  p.f = 1;
  CHECK_NOTHROW(p.validate());
  CHECK(p.quorum() == 2);
  p.f = 2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.f = 1;
  p.replica_groups["X1"] = {0, 1};
  CHECK_THROWS(p.validate());
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    const Scenario s = load_scenario(name);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(scenario_to_json(back) == scenario_to_json(s));
  }
}

TEST_CASE("trace JSON-lines round trip") {
  const auto algo = AlgorithmVariant::parse("base");
  const auto t = run({}, algo, scenario_rfids(), schedule_rfids(algo));
  std::istringstream in(to_jsonl(t));
  const auto back = read_jsonl(in);
  CHECK(to_jsonl(back) == to_jsonl(t));
}

TEST_CASE("library depths agree with the edge-fixpoint oracle") {
  std::vector<ExecutionTrace> traces;
  for (const auto& v : all_variants()) {
    traces.push_back(run({}, v, scenario_fids(), schedule_fids(v)));
    traces.push_back(run({}, v, scenario_rfids(), schedule_rfids(v)));
    for (int r = 0; r <= 3; ++r) traces.push_back(run({}, v, scenario_solo_reads(r), Schedule::fifo()));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) traces.push_back(run({}, v, scenario_conflict(), Schedule::random(seed)));
  }
  for (const auto& t : traces) {
    const auto lib = step_depths(t);
    const auto ref = oracle::depths(t);
    REQUIRE(lib.size() == ref.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
      CAPTURE(i);
      CHECK(lib[i] == ref[i]);
    }
  }
}

TEST_CASE("derived history lists committed transactions with reads then writes") {
  const auto algo = AlgorithmVariant::parse("base");
  const auto s = scenario_fids();
  const auto h = derive_history(run({}, algo, s, schedule_fids(algo)), s.placement.initial_values());
  REQUIRE(h.txns.size() == 2);
  for (const auto& c : h.txns) {
    REQUIRE(c.ops.size() == 2);
    CHECK(c.ops[0].kind == OpKind::Read);
    CHECK(c.ops[0].value.is_null());
    CHECK(c.ops[1].kind == OpKind::Write);
  }
}

TEST_CASE("FIDS transactions overlap, sequential FIDS does not") {
  const auto algo = AlgorithmVariant::parse("base");
  auto iv = transaction_intervals(run({}, algo, scenario_fids(), schedule_fids(algo)));
  CHECK(iv.at("T1").overlaps(iv.at("T2")));
  iv = transaction_intervals(run({}, algo, scenario_fids_sequential(), Schedule::fifo()));
  REQUIRE(iv.at("T1").end);
  CHECK_FALSE(iv.at("T1").overlaps(iv.at("T2")));
}
