#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <ostream>
#include <vector>

#include "lftrie/hooks.hpp"
#include "lftrie/keys.hpp"
#include "lftrie/verify/oracle.hpp"

namespace lftrie::verify {

enum class Phase : std::uint8_t { kInvoke, kRespond, kLin };

struct Event {
  std::uint64_t ts;
  std::uint64_t op_id;
  std::uint32_t thread;
  Phase phase;
  OpKind kind;
  Key arg;
  std::int64_t result;   // respond only
  bool has_result;       // respond only
  LinSite lin_site;      // lin only
};

// Lock-free history recording: each thread appends to its own buffer;
// timestamps come from one shared counter, so their order is a legal
// real-time order. Buffers are merged at quiescence.
//
// Also serves as the structures' trace hook: linearization-site events are
// attributed to the operation whose node carries the tag.
class Recorder : public Hooks {
  struct Buffer {
    std::vector<Event> events;
    std::uint32_t thread_id = 0;
    std::uint64_t current_op = 0;
  };

 public:
  Recorder() = default;

  std::uint64_t begin(OpKind kind, Key arg) {
    Buffer* b = buf();
    std::uint64_t id = next_op_.fetch_add(1, std::memory_order_relaxed) + 1;
    b->current_op = id;
    b->events.push_back({tick(), id, b->thread_id, Phase::kInvoke, kind, arg,
                         0, false, LinSite::kSearchLatestRead});
    return id;
  }

  void end(std::uint64_t id, OpKind kind, Key arg, std::int64_t result,
           bool has_result) {
    Buffer* b = buf();
    b->events.push_back({tick(), id, b->thread_id, Phase::kRespond, kind, arg,
                         result, has_result, LinSite::kSearchLatestRead});
    b->current_op = 0;
  }

  // Hooks interface.
  std::uint64_t op_tag() override { return buf()->current_op; }

  void lin_point(LinSite site, std::uint64_t tag) override {
    Buffer* b = buf();
    b->events.push_back({tick(), tag, b->thread_id, Phase::kLin,
                         OpKind::kSearch, 0, 0, false, site});
  }

  // Quiescent merge of all per-thread buffers, sorted by timestamp.
  std::vector<Event> collect() {
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<Event> all;
    for (auto& b : buffers_) {
      all.insert(all.end(), b->events.begin(), b->events.end());
    }
    std::sort(all.begin(), all.end(),
              [](const Event& a, const Event& b) { return a.ts < b.ts; });
    return all;
  }

  void clear() {
    std::lock_guard<std::mutex> lk(mu_);
    for (auto& b : buffers_) b->events.clear();
  }

 private:
  std::uint64_t tick() { return clock_.fetch_add(1, std::memory_order_seq_cst); }

  Buffer* buf() {
    thread_local struct Cache {
      const Recorder* r = nullptr;
      std::uint64_t id = 0;
      Buffer* b = nullptr;
    } cache;
    if (cache.r == this && cache.id == id_) return cache.b;
    std::lock_guard<std::mutex> lk(mu_);
    buffers_.push_back(std::make_unique<Buffer>());
    Buffer* b = buffers_.back().get();
    b->thread_id = next_thread_++;
    cache = {this, id_, b};
    return b;
  }

  static std::atomic<std::uint64_t>& next_recorder_id() {
    static std::atomic<std::uint64_t> n{0};
    return n;
  }

  const std::uint64_t id_ = next_recorder_id().fetch_add(1) + 1;
  std::atomic<std::uint64_t> clock_{1};
  std::atomic<std::uint64_t> next_op_{0};
  std::mutex mu_;
  std::uint32_t next_thread_ = 0;
  std::vector<std::unique_ptr<Buffer>> buffers_;
};

inline void dump_history(const std::vector<Event>& events, std::ostream& os) {
  for (const Event& e : events) {
    os << e.ts << ' ' << e.thread << ' ' << op_name(e.kind) << ' ' << e.arg
       << ' ';
    if (e.phase == Phase::kRespond && e.has_result)
      os << e.result;
    else
      os << '-';
    os << ' '
       << (e.phase == Phase::kInvoke
               ? "invoke"
               : e.phase == Phase::kRespond ? "respond" : "lin")
       << '\n';
  }
}

}  // namespace lftrie::verify
