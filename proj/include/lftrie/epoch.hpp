#pragma once

#include <array>
#include <atomic>
#include <cassert>
#include <cstdint>
#include <mutex>
#include <unordered_set>
#include <vector>

namespace lftrie {

// Epoch-based reclamation with per-thread retire lists. Threads pin the
// current epoch around every access to shared nodes; a node retired in epoch
// e is freed once the global epoch has advanced to e+2, which cannot happen
// while any thread is still pinned at e or earlier. Pins nest: inner guards
// reuse the outer announcement.
//
// drain() and the destructor assume quiescence (no concurrent pins).
class EpochDomain {
  static constexpr int kMaxSlots = 512;
  static constexpr std::uint64_t kQuiescent = ~std::uint64_t{0};
  static constexpr int kAdvanceInterval = 64;

  struct Retired {
    void* p;
    void (*fn)(void*);
  };

  struct alignas(64) Slot {
    std::atomic<std::uint64_t> announced{kQuiescent};
    std::atomic<bool> used{false};
    int depth = 0;  // pin nesting, owner thread only
    std::array<std::vector<Retired>, 3> bucket;
    std::array<std::uint64_t, 3> bucket_epoch{0, 1, 2};
    int since_advance = 0;
  };

 public:
  EpochDomain() : id_(next_id().fetch_add(1, std::memory_order_relaxed) + 1) {
    registry_mutex().lock();
    registry().insert(this);
    registry_mutex().unlock();
  }

  ~EpochDomain() {
    {
      std::lock_guard<std::mutex> lk(registry_mutex());
      registry().erase(this);
    }
    drain();
  }

  EpochDomain(const EpochDomain&) = delete;
  EpochDomain& operator=(const EpochDomain&) = delete;

  class Guard {
   public:
    explicit Guard(EpochDomain& d) : d_(&d), s_(d.my_slot()) { d_->pin(s_); }
    ~Guard() { d_->unpin(s_); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    EpochDomain* d_;
    Slot* s_;
  };

  template <class T>
  void retire(T* p) {
    retire_raw(p, [](void* q) { delete static_cast<T*>(q); });
  }

  void retire_raw(void* p, void (*fn)(void*)) {
    Slot* s = my_slot();
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    int idx = static_cast<int>(e % 3);
    if (s->bucket_epoch[idx] != e) {
      free_bucket(*s, idx);
      s->bucket_epoch[idx] = e;
    }
    s->bucket[idx].push_back({p, fn});
    pending_.fetch_add(1, std::memory_order_relaxed);
    if (++s->since_advance >= kAdvanceInterval) {
      s->since_advance = 0;
      try_advance();
      collect(*s);
    }
  }

  std::uint64_t epoch() const { return epoch_.load(std::memory_order_acquire); }

  std::int64_t pending() const {
    return pending_.load(std::memory_order_acquire);
  }

  // Advances the global epoch if every pinned thread has caught up.
  bool try_advance() {
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    int n = high_water_.load(std::memory_order_acquire);
    for (int i = 0; i < n; ++i) {
      const Slot& s = slots_[i];
      if (!s.used.load(std::memory_order_acquire)) continue;
      std::uint64_t a = s.announced.load(std::memory_order_acquire);
      if (a != kQuiescent && a < e) return false;
    }
    epoch_.compare_exchange_strong(e, e + 1, std::memory_order_acq_rel);
    return true;
  }

  // One collection pass over every slot and the orphan list. Quiescent use.
  void collect_all() {
    int n = high_water_.load(std::memory_order_acquire);
    for (int i = 0; i < n; ++i) collect(slots_[i]);
    collect_orphans();
  }

  // Frees everything still pending. Quiescent use only.
  void drain() {
    for (int round = 0; round < 8 && pending() > 0; ++round) {
      try_advance();
      try_advance();
      int n = high_water_.load(std::memory_order_acquire);
      for (int i = 0; i < n; ++i) collect(slots_[i]);
      collect_orphans();
    }
    assert(pending() == 0 && "drain() requires quiescence");
  }

 private:
  void pin(Slot* s) {
    if (s->depth++ > 0) return;
    // Announce the epoch current at some instant during the pin.
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    for (;;) {
      s->announced.store(e, std::memory_order_seq_cst);
      std::uint64_t now = epoch_.load(std::memory_order_seq_cst);
      if (now == e) break;
      e = now;
    }
  }

  void unpin(Slot* s) {
    assert(s->depth > 0);
    if (--s->depth == 0)
      s->announced.store(kQuiescent, std::memory_order_release);
  }

  void collect(Slot& s) {
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    for (int idx = 0; idx < 3; ++idx) {
      if (s.bucket_epoch[idx] + 2 <= e) free_bucket(s, idx);
    }
  }

  void free_bucket(Slot& s, int idx) {
    auto& b = s.bucket[idx];
    if (b.empty()) return;
    pending_.fetch_sub(static_cast<std::int64_t>(b.size()),
                       std::memory_order_relaxed);
    for (Retired& r : b) r.fn(r.p);
    b.clear();
  }

  void collect_orphans() {
    std::lock_guard<std::mutex> lk(orphan_mutex_);
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    for (auto it = orphans_.begin(); it != orphans_.end();) {
      if (it->epoch + 2 <= e) {
        it->r.fn(it->r.p);
        pending_.fetch_sub(1, std::memory_order_relaxed);
        it = orphans_.erase(it);
      } else {
        ++it;
      }
    }
  }

  // ---- per-thread slot management -------------------------------------

  struct TlEntry {
    EpochDomain* d;
    std::uint64_t id;
    int idx;
  };

  struct TlRegistry {
    std::vector<TlEntry> entries;
    ~TlRegistry() {
      std::lock_guard<std::mutex> lk(registry_mutex());
      for (const TlEntry& e : entries) {
        if (registry().count(e.d)) e.d->release_slot(e.idx);
      }
    }
  };

  Slot* my_slot() {
    thread_local TlRegistry reg;
    thread_local TlEntry cache{nullptr, 0, -1};
    if (cache.d == this && cache.id == id_) return &slots_[cache.idx];
    for (const TlEntry& e : reg.entries) {
      if (e.d == this && e.id == id_) {
        cache = e;
        return &slots_[e.idx];
      }
    }
    int idx = acquire_slot();
    reg.entries.push_back({this, id_, idx});
    cache = reg.entries.back();
    return &slots_[idx];
  }

  int acquire_slot() {
    for (int i = 0; i < kMaxSlots; ++i) {
      bool expected = false;
      if (slots_[i].used.compare_exchange_strong(expected, true,
                                                 std::memory_order_acq_rel)) {
        int hw = high_water_.load(std::memory_order_relaxed);
        while (hw < i + 1 && !high_water_.compare_exchange_weak(
                                 hw, i + 1, std::memory_order_acq_rel)) {
        }
        return i;
      }
    }
    assert(false && "epoch domain out of thread slots");
    return 0;
  }

  void release_slot(int idx) {
    Slot& s = slots_[idx];
    assert(s.depth == 0);
    // Hand unreclaimed retirees to the orphan list before recycling the slot.
    std::uint64_t e = epoch_.load(std::memory_order_acquire);
    {
      std::lock_guard<std::mutex> lk(orphan_mutex_);
      for (int b = 0; b < 3; ++b) {
        for (Retired& r : s.bucket[b]) orphans_.push_back({r, e});
        s.bucket[b].clear();
      }
    }
    s.bucket_epoch = {0, 1, 2};
    s.since_advance = 0;
    s.announced.store(kQuiescent, std::memory_order_release);
    s.used.store(false, std::memory_order_release);
  }

  struct Orphan {
    Retired r;
    std::uint64_t epoch;
  };

  static std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
  }
  static std::unordered_set<EpochDomain*>& registry() {
    static std::unordered_set<EpochDomain*> s;
    return s;
  }
  static std::atomic<std::uint64_t>& next_id() {
    static std::atomic<std::uint64_t> n{0};
    return n;
  }

  const std::uint64_t id_;
  std::atomic<std::uint64_t> epoch_{3};
  std::atomic<std::int64_t> pending_{0};
  std::atomic<int> high_water_{0};
  std::mutex orphan_mutex_;
  std::vector<Orphan> orphans_;
  Slot slots_[kMaxSlots];
};

using EpochGuard = EpochDomain::Guard;

}  // namespace lftrie
