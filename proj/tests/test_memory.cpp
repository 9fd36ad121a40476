#include "doctest.h"
#include "pdts/memory.hpp"
#include "pdts/harness.hpp"

using namespace pdts;

TEST_CASE("node memory: read, write and cas semantics") {
  NodeMemory m(2);
  create_item_objects(m, "X1", "a");
  CHECK(m.read(2, ItemObjects::val("X1")) == "a");
  CHECK(m.read(2, ItemObjects::seq_num("X1")) == 0);
  CHECK(m.read(2, ItemObjects::lock_l("X1")).is_null());
  CHECK(m.read(2, ItemObjects::lock_s("X1")).is_null());

  CHECK(m.cas(2, ItemObjects::lock_l("X1"), nullptr, "T1"));
  CHECK_FALSE(m.cas(2, ItemObjects::lock_l("X1"), nullptr, "T2"));
  CHECK(m.peek(ItemObjects::lock_l("X1")) == "T1");
  m.write(2, ItemObjects::lock_l("X1"), nullptr);
  CHECK(m.cas(2, ItemObjects::lock_l("X1"), nullptr, "T2"));
}

TEST_CASE("node memory: another node's process cannot touch it") {
  NodeMemory m(0);
  m.create("o", 1);
  CHECK_THROWS_AS(m.read(1, "o"), CrossNodeAccess);
  CHECK_THROWS_AS(m.write(1, "o", 2), CrossNodeAccess);
  CHECK(m.peek("o") == 1);
}

TEST_CASE("global-lock layout has no item lock") {
  NodeMemory m(0);
  create_item_objects(m, "X1", nullptr, false);
  CHECK_FALSE(m.contains(ItemObjects::lock_l("X1")));
  CHECK(m.contains(ItemObjects::lock_s("X1")));
}

TEST_CASE("non-triviality") {
  CHECK_FALSE(is_nontrivial(PrimOp::Read));
  CHECK(is_nontrivial(PrimOp::Write));
  CHECK(is_nontrivial(PrimOp::Cas));
}

TEST_CASE("contention on the FIDS execution is only between concurrent transactions") {
  const auto trace = run({}, AlgorithmVariant::parse("base"), scenario_fids(), schedule_fids(AlgorithmVariant::parse("base")));
  const auto pairs = contending_pairs(trace);
  const auto intervals = transaction_intervals(trace);
  for (const auto& [a, b] : pairs) {
    REQUIRE(a.txn);
    REQUIRE(b.txn);
    CHECK(*a.txn != *b.txn);
    CHECK(a.obj == b.obj);
    CHECK((a.nontrivial || b.nontrivial));
    CHECK(intervals.at(*a.txn).overlaps(intervals.at(*b.txn)));
  }
}
