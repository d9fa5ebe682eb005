#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>
#include <vector>

#include "lftrie/lockfree_set.hpp"
#include "lftrie/verify/oracle.hpp"
#include "lftrie/verify/sweep.hpp"
#include "test_util.hpp"

using namespace lftrie;
using verify::SetOracle;
using verify::quiescent_sweep_full;

TEST_CASE("set: fresh structure answers empty") {
  BinaryTrieSet s(3);
  for (Key x = 0; x < 8; ++x) {
    CHECK_FALSE(s.search(x));
    CHECK(s.predecessor(x) == kNoKey);
  }
  CHECK(s.announcements_clear());
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: keys outside the universe are rejected") {
  BinaryTrieSet s(3);
  CHECK_THROWS_AS(s.search(8), std::out_of_range);
  CHECK_THROWS_AS(s.insert(-1), std::out_of_range);
  CHECK_THROWS_AS(s.remove(99), std::out_of_range);
  CHECK_THROWS_AS(s.predecessor(8), std::out_of_range);
}

TEST_CASE("set: solo insert becomes visible to search and predecessor") {
  BinaryTrieSet s(4);
  s.insert(5);
  CHECK(s.search(5));
  CHECK(s.predecessor(6) == 5);
  CHECK(s.predecessor(5) == kNoKey);
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: solo delete of the only element empties the set") {
  BinaryTrieSet s(4);
  s.insert(9);
  s.remove(9);
  CHECK_FALSE(s.search(9));
  CHECK(s.predecessor(15) == kNoKey);
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: delete records its embedded predecessor results") {
  BinaryTrieSet s(2);
  s.insert(0);
  s.insert(1);
  s.insert(3);
  s.remove(3);
  CHECK_FALSE(s.search(3));
  CHECK(s.search(0));
  CHECK(s.search(1));
  const UpdateNode* d = s.debug_latest_head(3);
  REQUIRE(d->kind == NodeKind::kDel);
  // Both embedded runs saw {0,1} below 3 and no concurrent updates.
  CHECK(d->del_pred == 1);
  CHECK(d->del_pred2.load() == 1);
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: predecessor over a quiescent {0,1,3}") {
  BinaryTrieSet s(2);
  s.insert(0);
  s.insert(1);
  s.insert(3);
  CHECK(s.predecessor(3) == 1);
  CHECK(s.predecessor(2) == 1);
  CHECK(s.predecessor(1) == 0);
  CHECK(s.predecessor(0) == kNoKey);
}

TEST_CASE("set: updates of present/absent keys are cheap and silent") {
  BinaryTrieSet s(4);
  s.insert(7);
  StepCounter c;
  {
    ScopedStepCounter g(c);
    s.insert(7);
  }
  CHECK(c.reads <= 4);
  CHECK(c.cas == 0);
  CHECK(c.writes == 0);
  c.reset();
  {
    ScopedStepCounter g(c);
    s.remove(2);
  }
  CHECK(c.reads <= 4);
  CHECK(c.cas == 0);
  CHECK(c.writes == 0);
  CHECK(s.announcements_clear());
}

TEST_CASE("set: search costs at most 4 shared reads") {
  BinaryTrieSet s(5);
  s.insert(11);
  StepCounter c;
  {
    ScopedStepCounter g(c);
    CHECK(s.search(11));
  }
  CHECK(c.reads <= 4);
}

TEST_CASE("set: 10^4 random sequential ops match the oracle") {
  const int kBits = 5;
  BinaryTrieSet s(kBits);
  SetOracle oracle;
  std::mt19937_64 rng(321);
  std::uniform_int_distribution<Key> keys(0, (1 << kBits) - 1);
  for (int i = 0; i < 10000; ++i) {
    Key x = keys(rng);
    switch (rng() % 4) {
      case 0:
        CHECK(s.search(x) == oracle.search(x));
        break;
      case 1:
        s.insert(x);
        oracle.insert(x);
        break;
      case 2:
        s.remove(x);
        oracle.erase(x);
        break;
      case 3:
        CHECK(s.predecessor(x) == oracle.predecessor(x));
        break;
    }
  }
  CHECK(s.announcements_clear());
  CHECK(quiescent_sweep_full(s).clean());
  s.epoch_domain().drain();
  CHECK(s.epoch_domain().pending() == 0);
}

TEST_CASE("set: a loser helps the suspended winner become visible") {
  // Winner parks between announcement and activation; the losing insert of
  // the same key must activate it on the winner's behalf before returning.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s2, std::int64_t, std::int64_t) {
    if (s2 == Site::kUpdateBeforeActivate && armed.exchange(false))
      gate.arrive();
  };
  BinaryTrieSet s(3, &hooks);
  std::thread winner([&] { s.insert(5); });
  gate.await_arrival();
  CHECK_FALSE(s.search(5));  // inactive node is not yet in the set
  s.insert(5);               // loser: CAS fails, helps activate, returns
  CHECK(s.search(5));        // visible although the winner is still parked
  gate.release();
  winner.join();
  CHECK(s.search(5));
  CHECK(s.announcements_clear());
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: predecessor sees an announced update with unfinished trie work") {
  // An activated insert parked before its trie walk is announced in the
  // U-ALL; a predecessor must pick it up as a candidate.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s2, std::int64_t, std::int64_t) {
    if (s2 == Site::kUpdateAfterActivate && armed.exchange(false))
      gate.arrive();
  };
  BinaryTrieSet s(4, &hooks);
  std::thread ins([&] { s.insert(6); });
  gate.await_arrival();
  CHECK(s.predecessor(10) == 6);
  gate.release();
  ins.join();
  CHECK(s.predecessor(10) == 6);
  CHECK(s.announcements_clear());
}

TEST_CASE("set: a parked predecessor learns about later updates by notification") {
  // The predecessor announces itself and parks; an insert then runs to
  // completion (and leaves the announcement lists). Only its notification
  // can tell the predecessor about the key.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s2, std::int64_t arg, std::int64_t) {
    if (s2 == Site::kPredAfterAnnounce && arg == 7 && armed.exchange(false))
      gate.arrive();
  };
  BinaryTrieSet s(3, &hooks);
  Key result = kNoKey;
  std::thread pred([&] { result = s.predecessor(7); });
  gate.await_arrival();
  s.insert(3);  // completes fully while the predecessor is parked
  gate.release();
  pred.join();
  CHECK(result == 3);
  CHECK(s.announcements_clear());
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: notification thresholds accept deletes consistently (neither)") {
  // Both deletes linearize while the parked predecessor still publishes the
  // head sentinel position: both notifications carry threshold +inf and both
  // are rejected. Accepting exactly one would let it answer 25 although 29
  // is present whenever 25 is.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s2, std::int64_t arg, std::int64_t) {
    if (s2 == Site::kRuallBeforeFirstHop && arg == 40 &&
        armed.exchange(false))
      gate.arrive();
  };
  BinaryTrieSet s(6, &hooks);
  s.insert(10);
  s.insert(25);
  s.insert(29);
  Key result = kNoKey;
  std::thread pred([&] { result = s.predecessor(40); });
  gate.await_arrival();
  s.remove(25);
  s.remove(29);
  gate.release();
  pred.join();
  CHECK(result != 25);
  bool valid = result == 10 || result == 29;
  CHECK(valid);
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: notification thresholds accept deletes consistently (both)") {
  // Same schedule, but the predecessor has already finished its reverse
  // traversal: both notifications carry threshold -inf, both deletes are
  // accepted as candidates, and the larger one wins.
  testutil::GateHooks hooks;
  testutil::Gate gate;
  std::atomic<bool> armed{true};
  hooks.on_sync = [&](Site s2, std::int64_t arg, std::int64_t) {
    if (s2 == Site::kPredAfterRuall && arg == 40 && armed.exchange(false))
      gate.arrive();
  };
  BinaryTrieSet s(6, &hooks);
  s.insert(10);
  s.insert(25);
  s.insert(29);
  Key result = kNoKey;
  std::thread pred([&] { result = s.predecessor(40); });
  gate.await_arrival();
  s.remove(25);
  s.remove(29);
  gate.release();
  pred.join();
  CHECK(result == 29);
  CHECK(quiescent_sweep_full(s).clean());
}

TEST_CASE("set: racing inserts of one key both return with the key present") {
  for (int trial = 0; trial < 150; ++trial) {
    BinaryTrieSet s(3);
    std::thread a([&] { s.insert(4); });
    std::thread b([&] { s.insert(4); });
    a.join();
    b.join();
    CHECK(s.search(4));
    CHECK(s.predecessor(5) == 4);
    CHECK(s.announcements_clear());
    CHECK(quiescent_sweep_full(s).clean());
  }
}

TEST_CASE("set: racing insert/delete/predecessor settle to a clean state") {
  for (int trial = 0; trial < 150; ++trial) {
    BinaryTrieSet s(3);
    s.insert(2);
    std::thread a([&] { s.remove(2); });
    std::thread b([&] { s.insert(5); });
    std::thread c([&] { s.predecessor(7); });
    a.join();
    b.join();
    c.join();
    CHECK(s.search(5));
    CHECK_FALSE(s.search(2));
    CHECK(s.announcements_clear());
    CHECK(quiescent_sweep_full(s).clean());
  }
}

TEST_CASE("set: mixed concurrent stress keeps quiescent invariants") {
  const int kBits = 6;
  const int kThreads = 8;
  BinaryTrieSet s(kBits);
  std::vector<std::thread> ts;
  for (int w = 0; w < kThreads; ++w) {
    ts.emplace_back([&, w] {
      std::mt19937_64 rng(w * 31 + 7);
      std::uniform_int_distribution<Key> keys(0, (1 << kBits) - 1);
      for (int i = 0; i < 2500; ++i) {
        Key x = keys(rng);
        switch (rng() % 4) {
          case 0: s.search(x); break;
          case 1: s.insert(x); break;
          case 2: s.remove(x); break;
          case 3: s.predecessor(x); break;
        }
      }
    });
  }
  for (auto& th : ts) th.join();
  CHECK(s.announcements_clear());
  CHECK(quiescent_sweep_full(s).clean());
  s.epoch_domain().drain();
  CHECK(s.epoch_domain().pending() == 0);
}

TEST_CASE("set: disjoint-range workers produce the oracle's final set") {
  const int kBits = 6;
  const int kThreads = 4;
  const Key span = (1 << kBits) / kThreads;
  BinaryTrieSet s(kBits);
  std::vector<std::thread> ts;
  for (int w = 0; w < kThreads; ++w) {
    ts.emplace_back([&, w] {
      Key lo = w * span;
      for (Key x = lo; x < lo + span; ++x) s.insert(x);
      for (Key x = lo; x < lo + span; x += 2) s.remove(x);  // evens out
    });
  }
  for (auto& th : ts) th.join();
  for (Key x = 0; x < (1 << kBits); ++x) CHECK(s.search(x) == (x % 2 == 1));
  CHECK(s.predecessor(17) == 15);
  CHECK(quiescent_sweep_full(s).clean());
}
