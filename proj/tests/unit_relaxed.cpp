#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>
#include <vector>

#include "lftrie/relaxed_trie.hpp"
#include "lftrie/verify/oracle.hpp"
#include "lftrie/verify/sweep.hpp"
#include "test_util.hpp"

using namespace lftrie;
using verify::SetOracle;
using verify::quiescent_sweep;

TEST_CASE("relaxed trie: fresh structure is empty with all bits 0") {
  RelaxedBinaryTrie t(2);
  for (Key x = 0; x < 4; ++x) {
    CHECK_FALSE(t.trie_search(x));
    CHECK(t.debug_latest_head(x)->kind == NodeKind::kDel);
  }
  for (std::size_t i = 1; i < t.slot_count(); ++i)
    CHECK(t.debug_interpreted_bit(i) == 0);
  CHECK(t.relaxed_predecessor(3) == kNoKey);
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: latest entry follows insert/delete/insert") {
  RelaxedBinaryTrie t(3);
  t.trie_insert(5);
  CHECK(t.debug_latest_head(5)->kind == NodeKind::kIns);
  CHECK(t.trie_search(5));
  t.trie_delete(5);
  CHECK(t.debug_latest_head(5)->kind == NodeKind::kDel);
  t.trie_insert(5);
  CHECK(t.debug_latest_head(5)->kind == NodeKind::kIns);
  CHECK(t.trie_search(5));
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: S={0,2} bits match the OR of leaves") {
  RelaxedBinaryTrie t(2);
  t.trie_insert(0);
  t.trie_insert(2);
  // Leaves 0 and 2 set; both level-1 nodes set; root set.
  CHECK(t.debug_interpreted_bit(1) == 1);
  CHECK(t.debug_interpreted_bit(2) == 1);
  CHECK(t.debug_interpreted_bit(3) == 1);
  CHECK(t.debug_interpreted_bit(4) == 1);
  CHECK(t.debug_interpreted_bit(5) == 0);
  CHECK(t.debug_interpreted_bit(6) == 1);
  CHECK(t.debug_interpreted_bit(7) == 0);
  CHECK(quiescent_sweep(t).clean());

  CHECK(t.relaxed_predecessor(3) == 2);
  CHECK(t.relaxed_predecessor(2) == 0);
  CHECK(t.relaxed_predecessor(1) == 0);
  CHECK(t.relaxed_predecessor(0) == kNoKey);
}

TEST_CASE("relaxed trie: insert reaches the root through a MinWrite") {
  RelaxedBinaryTrie t(2);
  // Leave the root depending on a key-3 delete record.
  t.trie_insert(3);
  t.trie_delete(3);
  UpdateNode* d3 = t.debug_latest_head(3);
  REQUIRE(d3->kind == NodeKind::kDel);
  CHECK(d3->lower1.read() == 3);
  CHECK(d3->upper0.load() == 2);
  CHECK(t.debug_interpreted_bit(1) == 0);

  t.trie_insert(0);
  // The root step lowered the key-3 record's one-threshold to the root height.
  CHECK(d3->lower1.read() == 2);
  CHECK(t.debug_interpreted_bit(1) == 1);
  CHECK(t.debug_interpreted_bit(2) == 1);
  CHECK(t.debug_interpreted_bit(4) == 1);
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: deleting the only element clears the root path") {
  RelaxedBinaryTrie t(2);
  t.trie_insert(1);
  CHECK(t.debug_interpreted_bit(1) == 1);
  t.trie_delete(1);
  UpdateNode* d = t.debug_latest_head(1);
  CHECK(d->upper0.load() == 2);  // walked to the root
  for (std::size_t i = 1; i < t.slot_count(); ++i)
    CHECK(t.debug_interpreted_bit(i) == 0);
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: sequential deletes of {0,1} converge to empty") {
  RelaxedBinaryTrie t(2);
  t.trie_insert(0);
  t.trie_insert(1);
  t.trie_delete(0);
  t.trie_delete(1);
  CHECK(quiescent_sweep(t).clean());
  CHECK(t.relaxed_predecessor(3) == kNoKey);
}

TEST_CASE("relaxed trie: updating a present/absent key performs no writes") {
  RelaxedBinaryTrie t(3);
  t.trie_insert(6);
  StepCounter c;
  {
    ScopedStepCounter s(c);
    t.trie_insert(6);  // already present
  }
  CHECK(c.writes == 0);
  CHECK(c.cas == 0);
  CHECK(c.reads <= 4);
  c.reset();
  {
    ScopedStepCounter s(c);
    t.trie_delete(3);  // absent
  }
  CHECK(c.writes == 0);
  CHECK(c.cas == 0);
}

TEST_CASE("relaxed trie: search costs at most 3 shared reads") {
  RelaxedBinaryTrie t(4);
  t.trie_insert(9);
  StepCounter c;
  {
    ScopedStepCounter s(c);
    CHECK(t.trie_search(9));
  }
  CHECK(c.reads <= 3);
}

TEST_CASE("relaxed trie: 10^4 random sequential ops match the oracle") {
  const int kBits = 5;
  RelaxedBinaryTrie t(kBits);
  SetOracle oracle;
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<Key> keys(0, (1 << kBits) - 1);
  for (int i = 0; i < 10000; ++i) {
    Key x = keys(rng);
    switch (rng() % 4) {
      case 0:
        CHECK(t.trie_search(x) == oracle.search(x));
        break;
      case 1:
        t.trie_insert(x);
        oracle.insert(x);
        break;
      case 2:
        t.trie_delete(x);
        oracle.erase(x);
        break;
      case 3: {
        auto r = t.relaxed_predecessor(x);
        REQUIRE(r.has_value());  // no concurrency, never inconclusive
        CHECK(*r == oracle.predecessor(x));
        break;
      }
    }
  }
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: racing inserts of one key leave one winner") {
  for (int trial = 0; trial < 200; ++trial) {
    RelaxedBinaryTrie t(3);
    std::thread a([&] { t.trie_insert(4); });
    std::thread b([&] { t.trie_insert(4); });
    a.join();
    b.join();
    CHECK(t.trie_search(4));
    CHECK(t.debug_latest_head(4)->kind == NodeKind::kIns);
    CHECK(quiescent_sweep(t).clean());
  }
}

TEST_CASE("relaxed trie: scripted inconclusive traversal") {
  // Freeze a delete between claiming a level and writing its threshold: the
  // level keeps bit 1 while both children read 0, which strands the
  // descending walk.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s, std::int64_t h, std::int64_t key) {
    if (s == Site::kDelTrieAfterCas && h == 1 && key == 0 &&
        armed.exchange(false))
      gate.arrive();
  };
  RelaxedBinaryTrie t(2, &hooks);
  t.trie_insert(0);
  std::thread del([&] { t.trie_delete(0); });
  gate.await_arrival();

  CHECK(t.debug_interpreted_bit(2) == 1);  // claimed level still reads 1
  CHECK(t.debug_interpreted_bit(4) == 0);
  CHECK(t.debug_interpreted_bit(5) == 0);
  auto r = t.relaxed_predecessor(3);
  CHECK_FALSE(r.has_value());

  gate.release();
  del.join();
  CHECK(t.relaxed_predecessor(3) == kNoKey);
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: a superseded insert stops before its MinWrite") {
  // Park an insert after it publishes its target, then delete the key; on
  // resume the insert's re-check fails and the threshold stays untouched.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{false};
  hooks.on_sync = [&](Site s, std::int64_t h, std::int64_t target_key) {
    if (s == Site::kInsTrieAfterSetTarget && h == 2 && target_key == 3 &&
        armed.exchange(false))
      gate.arrive();
  };
  RelaxedBinaryTrie t(2, &hooks);
  t.trie_insert(3);
  t.trie_delete(3);  // root now depends on the key-3 delete record
  UpdateNode* d3 = t.debug_latest_head(3);

  armed.store(true);
  std::thread ins([&] { t.trie_insert(0); });
  gate.await_arrival();
  t.trie_delete(0);  // supersede the parked insert
  gate.release();
  ins.join();

  CHECK(d3->lower1.read() == 3);  // no MinWrite happened
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: double CAS failure returns without a threshold write") {
  // A delete that loses the same level twice to newer deletes must give up
  // without writing its threshold. Both removals are published first (so
  // neither returns at the sibling check), then the competing level is
  // churned between the victim's two attempts.
  testutil::GateHooks hooks;
  testutil::Gate start_b, start_v, first_cas, second_cas;
  std::atomic<int> phase{0};
  hooks.on_sync = [&](Site s, std::int64_t h, std::int64_t key) {
    int p = phase.load();
    if (s == Site::kDelTrieStart && key == 1 && p == 0) {
      phase.store(1);
      start_b.arrive();
    } else if (s == Site::kDelTrieStart && key == 0 && p == 1) {
      phase.store(2);
      start_v.arrive();
    } else if (s == Site::kDelTrieBeforeFirstCas && key == 0 && h == 1 &&
               p == 2) {
      phase.store(3);
      first_cas.arrive();
    } else if (s == Site::kDelTrieBeforeSecondCas && key == 0 && h == 1 &&
               p == 3) {
      phase.store(4);
      second_cas.arrive();
    }
  };
  RelaxedBinaryTrie t(2, &hooks);
  t.trie_insert(0);
  t.trie_insert(1);

  std::thread other([&] { t.trie_delete(1); });
  start_b.await_arrival();  // latest[1] now holds the key-1 delete record
  std::thread victim([&] { t.trie_delete(0); });
  start_v.await_arrival();  // latest[0] now holds the victim's record
  UpdateNode* d0 = t.debug_latest_head(0);
  REQUIRE(d0->kind == NodeKind::kDel);

  start_b.release();  // key-1 delete claims the contested level and finishes
  other.join();
  start_v.release();
  first_cas.await_arrival();  // victim read the level before this churn:
  t.trie_insert(1);
  t.trie_delete(1);  // level now owned by a second key-1 delete record
  first_cas.release();
  second_cas.await_arrival();  // retry read the level; churn it again
  t.trie_insert(1);
  t.trie_delete(1);
  second_cas.release();
  victim.join();

  CHECK(d0->upper0.load() == 0);  // gave up before any threshold write
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: concurrent deletes of siblings converge") {
  for (int trial = 0; trial < 200; ++trial) {
    RelaxedBinaryTrie t(2);
    t.trie_insert(0);
    t.trie_insert(1);
    std::thread a([&] { t.trie_delete(0); });
    std::thread b([&] { t.trie_delete(1); });
    a.join();
    b.join();
    CHECK(quiescent_sweep(t).clean());
    CHECK(t.relaxed_predecessor(3) == kNoKey);
  }
}

TEST_CASE("relaxed trie: concurrent mixed stress keeps quiescent invariants") {
  const int kBits = 6;
  const int kThreads = 8;
  RelaxedBinaryTrie t(kBits);
  std::vector<std::thread> ts;
  for (int w = 0; w < kThreads; ++w) {
    ts.emplace_back([&, w] {
      std::mt19937_64 rng(w * 77 + 1);
      std::uniform_int_distribution<Key> keys(0, (1 << kBits) - 1);
      for (int i = 0; i < 4000; ++i) {
        Key x = keys(rng);
        switch (rng() % 4) {
          case 0: t.trie_search(x); break;
          case 1: t.trie_insert(x); break;
          case 2: t.trie_delete(x); break;
          case 3: t.relaxed_predecessor(x); break;
        }
      }
    });
  }
  for (auto& th : ts) th.join();
  CHECK(quiescent_sweep(t).clean());
}

TEST_CASE("relaxed trie: traversal steps stay within 16 per level") {
  const int kBits = 10;
  RelaxedBinaryTrie t(kBits);
  std::atomic<std::uint64_t> max_steps{0};
  std::vector<std::thread> ts;
  for (int w = 0; w < 4; ++w) {
    ts.emplace_back([&, w] {
      std::mt19937_64 rng(w + 5);
      std::uniform_int_distribution<Key> keys(0, (1 << kBits) - 1);
      StepCounter c;
      ScopedStepCounter s(c);
      for (int i = 0; i < 2000; ++i) {
        Key x = keys(rng);
        c.reset();
        switch (rng() % 3) {
          case 0: t.trie_insert(x); break;
          case 1: t.trie_delete(x); break;
          case 2: t.relaxed_predecessor(x); break;
        }
        std::uint64_t cur = max_steps.load();
        while (c.steps > cur &&
               !max_steps.compare_exchange_weak(cur, c.steps)) {
        }
      }
    });
  }
  for (auto& th : ts) th.join();
  CHECK(max_steps.load() <= 16u * kBits);
}
