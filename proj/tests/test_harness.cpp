#include "doctest.h"
#include "oracles.hpp"

using namespace pdts;

TEST_CASE("every builtin scenario validates and runs to a decision under fifo") {
  for (const auto& name : builtin_scenario_names()) {
    for (const auto& v : all_variants()) {
      CAPTURE(name);
      CAPTURE(v.cli_name());
      const Scenario s = load_scenario(name);
      CHECK_NOTHROW(s.validate());
      const auto t = run({}, v, s, Schedule::fifo());
      for (const auto& id : t.transactions()) CHECK(t.coordinator_response(id).has_value());
    }
  }
  CHECK_THROWS_AS(load_scenario("nope"), ConfigError);
}

TEST_CASE("counterexample schedules are valid for every variant") {
  for (const auto& v : all_variants()) {
    CAPTURE(v.cli_name());
    CHECK_NOTHROW(run({}, v, scenario_fids(), schedule_fids(v)));
    CHECK_NOTHROW(run({}, v, scenario_rfids(), schedule_rfids(v)));
  }
}

TEST_CASE("phased schedule replays from its script alone") {
  const auto base = AlgorithmVariant::parse("base");
  const Schedule s = schedule_rfids(base);
  CHECK(s.kind == Schedule::Kind::Scripted);
  const auto a = run({}, base, scenario_rfids(), s);
  const auto b = run({}, base, scenario_rfids(), schedule_from_json(to_json(s)));
  CHECK(to_jsonl(a) == to_jsonl(b));
}

TEST_CASE("schedule specs") {
  const auto base = AlgorithmVariant::parse("base");
  CHECK(load_schedule("random:5", base, {}).kind == Schedule::Kind::RandomSeeded);
  CHECK(load_schedule("random:5", base, {}).seed == 5);
  CHECK(load_schedule("fifo", base, {}).tail == TailPolicy::Fifo);
  CHECK_THROWS_AS(load_schedule("random:x", base, {}), ConfigError);
  CHECK_THROWS_AS(load_schedule("builtin:nothing", base, {}), ConfigError);
}

TEST_CASE("random exploration is deterministic per seed") {
  ExploreOptions opt;
  opt.mode = ExploreOptions::Mode::Random;
  opt.random_runs = 200;
  opt.seed = 11;
  const auto v = AlgorithmVariant::parse("base");
  const auto a = explore({}, scenario_conflict(), v, opt);
  const auto b = explore({}, scenario_conflict(), v, opt);
  CHECK(to_json(a) == to_json(b));
  CHECK(a.schedules_run == 200);
}

TEST_CASE("exhaustive exploration: violation schedules replay to violations") {
  ExploreOptions opt;
  opt.preemption_bound = 0;
  const auto v = AlgorithmVariant::parse("base");
  const auto r = explore({}, scenario_fids(), v, opt);
  REQUIRE(r.violation_count > 0);
  CHECK(r.invariant_failures == 0);
  for (const auto& viol : r.violations) {
    const auto t = run({}, v, scenario_fids(), viol.schedule);
    const auto h = derive_history(t, scenario_fids().placement.initial_values());
    CHECK(h == viol.history);
    CHECK_FALSE(check_serializability(h).pass);
  }
  // Terminal histories are sorted and unique.
  for (std::size_t i = 1; i < r.terminal_histories.size(); ++i) {
    CHECK(to_json(r.terminal_histories[i - 1]).dump() < to_json(r.terminal_histories[i]).dump());
  }
}

TEST_CASE("exhaustive exploration of sequential FIDS finds only serial outcomes") {
  ExploreOptions opt;
  opt.preemption_bound = 0;
  const auto r = explore({}, scenario_fids_sequential(), AlgorithmVariant::parse("base"), opt);
  CHECK(r.violation_count == 0);
  CHECK(r.schedules_run > 0);
}

TEST_CASE("budget is enforced") {
  ExploreOptions opt;
  opt.preemption_bound = 0;
  opt.max_schedules = 3;
  CHECK_THROWS_AS(explore({}, scenario_fids(), AlgorithmVariant::parse("base"), opt), BudgetExceeded);
}

TEST_CASE("matrix expectations table") {
  CHECK_FALSE(matrix_expectation(VariantTag::Base, "Serializability"));
  CHECK(matrix_expectation(VariantTag::Base, "SeamlessFT(1)"));
  CHECK_FALSE(matrix_expectation(VariantTag::NoFastDecision, "FastDecision"));
  CHECK_FALSE(matrix_expectation(VariantTag::WeakIrOnly, "StrongIR"));
  CHECK(matrix_expectation(VariantTag::WeakIrOnly, "WeakIR"));
  CHECK_FALSE(matrix_expectation(VariantTag::NoSeamlessFt, "SeamlessFT(1)"));
  CHECK_FALSE(matrix_expectation(VariantTag::NoDdap, "DAP/DDAP"));
}
