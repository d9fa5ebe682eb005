#pragma once

#include <cstdint>

namespace lftrie {

// Tallies of shared-memory accesses made by the calling thread while a
// counter is installed. `reads`, `writes` and `cas` count individual atomic
// accesses to shared mutable state. `steps` is the coarser traversal-step
// tally used for the trie walks: one unit per shared access or per O(1)
// helper probe (FindLatest / FirstActivated / InterpretedBit) performed by
// the walk itself.
struct StepCounter {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t cas = 0;
  std::uint64_t steps = 0;

  void reset() { *this = StepCounter{}; }
};

namespace steps {

inline thread_local StepCounter* tl_counter = nullptr;

inline void on_read() {
  if (tl_counter) ++tl_counter->reads;
}
inline void on_write() {
  if (tl_counter) ++tl_counter->writes;
}
inline void on_cas() {
  if (tl_counter) ++tl_counter->cas;
}
inline void on_step() {
  if (tl_counter) ++tl_counter->steps;
}

}  // namespace steps

// Installs a counter for the current thread for the lifetime of the scope.
class ScopedStepCounter {
 public:
  explicit ScopedStepCounter(StepCounter& c) : prev_(steps::tl_counter) {
    steps::tl_counter = &c;
  }
  ~ScopedStepCounter() { steps::tl_counter = prev_; }

  ScopedStepCounter(const ScopedStepCounter&) = delete;
  ScopedStepCounter& operator=(const ScopedStepCounter&) = delete;

 private:
  StepCounter* prev_;
};

}  // namespace lftrie
