#pragma once

#include <condition_variable>
#include <istream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lftrie/lockfree_set.hpp"
#include "lftrie/verify/lincheck.hpp"
#include "lftrie/verify/sweep.hpp"

namespace lftrie::verify {

// Randomized concurrent trial: worker threads run seeded operation streams
// in rounds small enough for exhaustive checking; the driver joins everyone
// between rounds (a quiescent barrier), checks the round's window for
// linearizability, and sweeps the trie at the end.
struct TrialConfig {
  int bits = 3;
  int threads = 2;
  int ops = 24;
  int window = 12;
  double mix[4] = {0.25, 0.25, 0.25, 0.25};  // search insert delete pred
  std::uint64_t seed = 1;
  std::string suspend = "none";  // none | insert | delete

  // Text form: one `key value...` pair per line, '#' comments.
  static TrialConfig parse(std::istream& in) {
    TrialConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key)) continue;
      if (key == "bits") ls >> cfg.bits;
      else if (key == "threads") ls >> cfg.threads;
      else if (key == "ops") ls >> cfg.ops;
      else if (key == "window") ls >> cfg.window;
      else if (key == "seed") ls >> cfg.seed;
      else if (key == "suspend") ls >> cfg.suspend;
      else if (key == "mix")
        ls >> cfg.mix[0] >> cfg.mix[1] >> cfg.mix[2] >> cfg.mix[3];
      else
        throw std::invalid_argument("unknown trial config key: " + key);
    }
    return cfg;
  }
};

struct TrialResult {
  bool linearizable = true;
  bool sweep_clean = true;
  int windows = 0;
  std::string failure;
  std::vector<Event> history;

  bool ok() const { return linearizable && sweep_clean; }
};

namespace detail {

// Blocks one thread at a named site until released; used for the
// suspension trials.
class SuspendHooks : public Recorder {
 public:
  SuspendHooks(Site site, std::uint64_t victim_tag)
      : site_(site), victim_tag_(victim_tag) {}

  void sync(Site s, std::int64_t, std::int64_t) override {
    if (s != site_) return;
    if (op_tag() != victim_tag_.load(std::memory_order_acquire)) return;
    std::unique_lock<std::mutex> lk(mu_);
    waiting_ = true;
    cv_.notify_all();
    cv_.wait(lk, [&] { return released_; });
  }

  void arm(std::uint64_t tag) {
    victim_tag_.store(tag, std::memory_order_release);
  }

  void await_suspended() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return waiting_; });
  }

  bool suspended() {
    std::lock_guard<std::mutex> lk(mu_);
    return waiting_;
  }

  void release_victim() {
    std::lock_guard<std::mutex> lk(mu_);
    released_ = true;
    cv_.notify_all();
  }

 private:
  Site site_;
  std::atomic<std::uint64_t> victim_tag_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool waiting_ = false;
  bool released_ = false;
};

inline OpKind pick_kind(std::mt19937_64& rng, const double mix[4]) {
  double total = mix[0] + mix[1] + mix[2] + mix[3];
  std::uniform_real_distribution<double> dist(0.0, total);
  double r = dist(rng);
  if ((r -= mix[0]) < 0) return OpKind::kSearch;
  if ((r -= mix[1]) < 0) return OpKind::kInsert;
  if ((r -= mix[2]) < 0) return OpKind::kDelete;
  return OpKind::kPredecessor;
}

inline bool contains_id(const std::vector<GenOp>& ops, std::uint64_t id) {
  for (const GenOp& op : ops)
    if (op.id == id) return true;
  return false;
}

inline std::int64_t run_one(BinaryTrieSet& set, Recorder& rec, OpKind kind,
                            Key arg, bool* has_result) {
  std::uint64_t id = rec.begin(kind, arg);
  std::int64_t result = 0;
  *has_result = false;
  switch (kind) {
    case OpKind::kSearch:
      result = set.search(arg) ? 1 : 0;
      *has_result = true;
      break;
    case OpKind::kInsert:
      set.insert(arg);
      break;
    case OpKind::kDelete:
      set.remove(arg);
      break;
    case OpKind::kPredecessor:
      result = set.predecessor(arg);
      *has_result = true;
      break;
  }
  rec.end(id, kind, arg, result, *has_result);
  return result;
}

}  // namespace detail

inline TrialResult run_trial(const TrialConfig& cfg) {
  TrialResult out;
  const bool suspend = cfg.suspend != "none";
  auto hooks = std::make_unique<detail::SuspendHooks>(
      Site::kUpdateBeforeActivate, 0);
  Recorder& rec = *hooks;
  BinaryTrieSet set(cfg.bits, hooks.get());
  const Key u = set.universe();

  std::thread victim;
  std::vector<GenOp> pending_ops;
  if (suspend) {
    // Start an update and park it between announcement and activation.
    bool is_insert = cfg.suspend == "insert";
    Key vkey = u / 2;
    if (!is_insert) set.insert(vkey);
    victim = std::thread([&, vkey, is_insert] {
      std::uint64_t id = rec.begin(
          is_insert ? OpKind::kInsert : OpKind::kDelete, vkey);
      hooks->arm(id);
      if (is_insert)
        set.insert(vkey);
      else
        set.remove(vkey);
      rec.end(id, is_insert ? OpKind::kInsert : OpKind::kDelete, vkey, 0,
              false);
    });
    hooks->await_suspended();
  }

  int remaining = cfg.ops;
  int round = 0;
  SetOracle carried;  // abstract state at the last quiescent barrier
  while (remaining > 0 && out.linearizable) {
    int round_ops = std::min(cfg.window, remaining);
    remaining -= round_ops;
    ++round;
    std::vector<std::thread> workers;
    for (int t = 0; t < cfg.threads; ++t) {
      int quota = round_ops / cfg.threads + (t < round_ops % cfg.threads);
      if (quota == 0) continue;
      workers.emplace_back([&, t, quota] {
        std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + t +
                            static_cast<std::uint64_t>(round) * 131);
        std::uniform_int_distribution<Key> keys(0, u - 1);
        for (int k = 0; k < quota; ++k) {
          bool has;
          detail::run_one(set, rec, detail::pick_kind(rng, cfg.mix),
                          keys(rng), &has);
        }
      });
    }
    for (auto& w : workers) w.join();

    auto events = rec.collect();
    rec.clear();
    std::string err;
    auto ops = ops_from_events(events, &err);
    if (!ops) {
      out.linearizable = false;
      out.failure = "malformed history: " + err;
      break;
    }
    // Carry the suspended update (still pending) into every window.
    for (GenOp& p : pending_ops)
      ops->push_back(p);
    for (GenOp& op : *ops) {
      if (op.respond_ts == kPendingTs && op.invoke_ts != 0 &&
          !detail::contains_id(pending_ops, op.id))
        pending_ops.push_back(op);
    }
    ++out.windows;
    auto res = check_linearizable(*ops, carried);
    if (!res.ok) {
      out.linearizable = false;
      out.failure = res.message;
    }
    out.history.insert(out.history.end(), events.begin(), events.end());
    // Re-read the membership at the barrier; this is the next window's
    // starting state. (A still-suspended update that a helper activates
    // later stays in the pending set; set updates are idempotent, so
    // re-linearizing it in a later window is harmless.)
    carried = SetOracle{};
    for (Key x = 0; x < u; ++x)
      if (set.search(x)) carried.insert(x);
  }

  if (suspend) {
    hooks->release_victim();
    victim.join();
    rec.clear();
  }

  if (out.linearizable) {
    auto rep = quiescent_sweep_full(set);
    out.sweep_clean = rep.clean();
    if (!rep.clean()) out.failure = rep.violations.front();
  }
  return out;
}

}  // namespace lftrie::verify
