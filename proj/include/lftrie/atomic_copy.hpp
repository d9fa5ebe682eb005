#pragma once

#include <atomic>
#include <cstdint>

#include "lftrie/epoch.hpp"
#include "lftrie/step_counter.hpp"

namespace lftrie {

// Single-writer atomic copy cell built from CAS. copy_from(src) behaves as if
// src were read and the cell written in one atomic step: there is a single
// linearization point at which the copied value was the content of src.
//
// The construction is the usual descriptor indirection: the owner installs a
// descriptor referencing src, then the owner and any concurrent readers race
// to resolve it by reading src and CASing the descriptor out. Exactly one
// resolution wins, and the read of src it performed is the linearization
// point of the copy. Readers that lose re-read the cell, helping any newer
// descriptor along; the owner performs O(1) steps per copy.
//
// Only the owning thread may call copy_from. All callers must hold an epoch
// guard on the domain passed at construction.
class CopyCell {
  static constexpr std::uint64_t kDescTag = 1;

  struct Desc {
    const std::atomic<std::uint64_t>* src;
    std::uint64_t keep;
  };

 public:
  // Values stored in the cell must leave the low bit clear (pointers do).
  CopyCell(std::uint64_t initial, EpochDomain& ep) : ep_(ep), word_(initial) {
    assert((initial & kDescTag) == 0);
  }

  CopyCell(const CopyCell&) = delete;
  CopyCell& operator=(const CopyCell&) = delete;

  // Atomically copies `src & keep_mask` into the cell. Owner only.
  void copy_from(const std::atomic<std::uint64_t>& src,
                 std::uint64_t keep_mask) {
    Desc* d = new Desc{&src, keep_mask};
    auto tagged = reinterpret_cast<std::uint64_t>(d) | kDescTag;
    word_.store(tagged, std::memory_order_seq_cst);
    steps::on_write();
    std::uint64_t v = src.load(std::memory_order_seq_cst) & keep_mask;
    steps::on_read();
    word_.compare_exchange_strong(tagged, v, std::memory_order_seq_cst);
    steps::on_cas();
    ep_.retire(d);
  }

  std::uint64_t read() const {
    std::uint64_t w = word_.load(std::memory_order_seq_cst);
    steps::on_read();
    while (w & kDescTag) {
      Desc* d = reinterpret_cast<Desc*>(w & ~kDescTag);
      std::uint64_t v = d->src->load(std::memory_order_seq_cst) & d->keep;
      steps::on_read();
      if (word_.compare_exchange_strong(w, v, std::memory_order_seq_cst))
        return v;
      steps::on_cas();
      // w reloaded by the failed CAS: either a resolved value or a newer
      // descriptor installed by the owner.
    }
    return w;
  }

 private:
  EpochDomain& ep_;
  mutable std::atomic<std::uint64_t> word_;
};

}  // namespace lftrie
