#include "doctest.h"
#include "oracles.hpp"

using namespace pdts;

namespace {

CommittedTxn txn(const std::string& id, std::vector<HistoryOp> ops) { return {id, std::move(ops)}; }
HistoryOp R(const std::string& item, Word v) { return {OpKind::Read, item, std::move(v)}; }
HistoryOp W(const std::string& item, Word v) { return {OpKind::Write, item, std::move(v)}; }

std::vector<TxnId> order_of(const Verdict& v) { return v.witness.at("serialOrder").get<std::vector<TxnId>>(); }

}  // namespace

TEST_CASE("serializability: hand-checked histories") {
  SUBCASE("FIDS: both read initial values and write the other's item") {
    CommittedHistory h{{txn("T1", {R("X1", nullptr), W("X2", "v2")}), txn("T2", {R("X2", nullptr), W("X1", "v1")})}, {}};
    for (const auto& v : {serializability_brute_force(h), serializability_graph(h)}) {
      CHECK_FALSE(v.pass);
      CHECK(v.witness.at("cycle").size() == 2);
      CHECK(oracle::valid_cycle(h, v.witness));
    }
  }
  SUBCASE("R-FIDS: three-way read/write ring") {
    CommittedHistory h{{txn("T1", {R("X2", nullptr), W("X1", "v1")}), txn("T2", {R("X3", nullptr), W("X2", "v2")}),
                        txn("T3", {R("X1", nullptr), W("X3", "v3")})},
                       {}};
    const auto v = check_serializability(h);
    CHECK_FALSE(v.pass);
    CHECK(v.witness.at("cycle").size() == 3);
    CHECK(oracle::valid_cycle(h, v.witness));
  }
  SUBCASE("reads-from chain is serializable in write order") {
    CommittedHistory h{{txn("T2", {R("X1", "a"), W("X1", "b")}), txn("T1", {R("X1", nullptr), W("X1", "a")})}, {}};
    const auto v = check_serializability(h);
    CHECK(v.pass);
    CHECK(order_of(v) == std::vector<TxnId>{"T1", "T2"});
  }
  SUBCASE("a value nobody wrote") {
    CommittedHistory h{{txn("T1", {R("X1", "ghost")})}, {}};
    CHECK_FALSE(serializability_brute_force(h).pass);
    CHECK_FALSE(serializability_graph(h).pass);
  }
  SUBCASE("empty history") {
    CHECK(check_serializability({}).pass);
  }
  SUBCASE("brute force refuses large histories") {
    CommittedHistory h;
    for (int i = 0; i < 9; ++i) h.txns.push_back(txn("T" + std::to_string(i), {}));
    CHECK_THROWS_AS(serializability_brute_force(h), TooLarge);
    CHECK(check_serializability(h).pass);
  }
}

TEST_CASE("serializability: brute force and graph method agree on random histories") {
  std::mt19937_64 rng(20261016);
  int disagreements = 0, serializable = 0, total = 0;
  for (bool realistic : {true, false}) {
    for (int i = 0; i < 1500; ++i) {
      const auto h = oracle::random_history(rng, realistic);
      const auto bf = serializability_brute_force(h);
      const auto gr = serializability_graph(h);
      ++total;
      if (bf.pass != gr.pass) {
        ++disagreements;
        MESSAGE(to_json(h).dump());
        continue;
      }
      if (bf.pass) {
        ++serializable;
        CHECK(oracle::legal_order(h, order_of(bf)));
        CHECK(oracle::legal_order(h, order_of(gr)));
      } else if (bf.witness.contains("cycle") && !bf.witness["cycle"].is_null()) {
        CHECK(oracle::valid_cycle(h, bf.witness));
      }
    }
  }
  CHECK(disagreements == 0);
  // The generator must exercise both outcomes.
  CHECK(serializable > total / 10);
  CHECK(total - serializable > total / 10);
}

TEST_CASE("weak invisible reads: read-only transactions leave memory untouched") {
  for (const auto& v : all_variants()) {
    CAPTURE(v.cli_name());
    const auto t = run({}, v, scenario_read_only(), Schedule::fifo());
    CHECK(check_weak_ir(t).pass);
    for (const auto& p : t.primitive_steps()) {
      if (p.txn == "T1") CHECK_FALSE(p.nontrivial);
    }
  }
}

TEST_CASE("fast decision: base decides two delays after learning, no-fast needs two more") {
  for (int r = 0; r <= 3; ++r) {
    CAPTURE(r);
    const auto base = run({}, AlgorithmVariant::parse("base"), scenario_solo_reads(r), Schedule::fifo());
    CHECK(txn_depth(base, "T1") == 2 * r + 2);
    CHECK(check_fast_decision(base).pass);
    const auto slow = run({}, AlgorithmVariant::parse("no-fast"), scenario_solo_reads(r), Schedule::fifo());
    CHECK(txn_depth(slow, "T1") == 2 * r + 4);
    const auto v = check_fast_decision(slow);
    CHECK_FALSE(v.pass);
  }
}

TEST_CASE("read delay holds on the counterexample runs") {
  for (const auto& v : all_variants()) {
    CHECK(check_read_delay(run({}, v, scenario_fids(), schedule_fids(v))).pass);
    CHECK(check_read_delay(run({}, v, scenario_rfids(), schedule_rfids(v))).pass);
  }
}

TEST_CASE("strong invisible reads: only the read-locking variant fails") {
  for (const auto& v : all_variants()) {
    CAPTURE(v.cli_name());
    const RunContext ctx{{}, v, scenario_strong_ir(), Schedule::fifo()};
    CHECK(check_strong_ir(ctx).pass == (v.tag != VariantTag::WeakIrOnly));
  }
}

TEST_CASE("DAP and DDAP on disjoint writers") {
  for (const auto& v : all_variants()) {
    CAPTURE(v.cli_name());
    const Simulator probe({}, v, scenario_disjoint_writers());
    const auto t = run({}, v, scenario_disjoint_writers(), Schedule::fifo());
    const bool expect = v.tag != VariantTag::NoDdap;
    CHECK(check_ddap(t, probe.scenario()).pass == expect);
    CHECK(check_dap(t, probe.scenario()).pass == expect);
  }
}

TEST_CASE("weak progress: every transaction decides, solo ones commit") {
  for (const auto& v : all_variants()) {
    std::vector<ExecutionTrace> ts;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) ts.push_back(run({}, v, scenario_conflict(), Schedule::random(seed)));
    for (int r = 0; r <= 2; ++r) ts.push_back(run({}, v, scenario_solo_reads(r), Schedule::fifo()));
    CHECK(check_weak_progress(ts).pass);
  }
}

TEST_CASE("invariants hold on random schedules of every variant") {
  for (const auto& v : all_variants()) {
    for (const auto& s : {scenario_conflict(), scenario_fids(), scenario_rfids()}) {
      for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto t = run({}, v, s, Schedule::random(seed));
        const Simulator probe({}, v, s);
        const auto bad = check_invariants(t, probe.scenario());
        CAPTURE(v.cli_name());
        CAPTURE(s.name);
        CAPTURE(seed);
        CHECK(bad.empty());
        for (const auto& m : bad) MESSAGE(m);
      }
    }
  }
}

TEST_CASE("serializable variants stay serializable under random schedules") {
  for (const auto& v : all_variants()) {
    if (v.tag == VariantTag::Base) continue;
    for (const auto& s : {scenario_conflict(), scenario_fids(), scenario_rfids()}) {
      for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto t = run({}, v, s, Schedule::random(seed));
        CAPTURE(v.cli_name());
        CAPTURE(s.name);
        CAPTURE(seed);
        CHECK(check_serializability(derive_history(t, s.placement.initial_values())).pass);
      }
    }
  }
}
