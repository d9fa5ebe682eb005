#pragma once

#include <atomic>
#include <bit>
#include <cassert>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>

#include "lftrie/epoch.hpp"
#include "lftrie/hooks.hpp"
#include "lftrie/keys.hpp"
#include "lftrie/nodes.hpp"
#include "lftrie/step_counter.hpp"

namespace lftrie {

// The binary trie over {0..u-1}, u = 2^b, stored as one implicit heap of
// 2u-1 slots (index 1 is the root, node i has children 2i and 2i+1, the leaf
// for key x sits at u+x). Each internal slot holds dNodePtr, a pointer to a
// DEL node whose key lies in the slot's subtree; the slot's interpreted bit
// is computed on demand from the latest update node of that key.
//
// The walks below are shared between the relaxed trie and the full
// structure through two customization points supplied by Derived:
//   UpdateNode* find_latest_node(Key x)   - latest update node for x
//   bool first_activated(UpdateNode* n)   - n is the current latest node
//
// On construction every key's latest entry holds a dummy DEL node with
// upper0 = b and lower1 = b+1, and every slot points at the dummy of the
// smallest key in its subtree, which makes every interpreted bit 0.
template <class Derived>
class TrieCore {
 public:
  int bits() const { return bits_; }
  Key universe() const { return u_; }

  EpochDomain& epoch_domain() { return ep_; }

  // ---- diagnostics (quiescent callers) --------------------------------

  std::size_t slot_count() const { return static_cast<std::size_t>(2 * u_); }

  int debug_interpreted_bit(std::size_t idx) {
    EpochGuard g(ep_);
    return interpreted_bit(idx);
  }

  UpdateNode* debug_latest_head(Key x) const {
    return latest_[static_cast<std::size_t>(x)].load(std::memory_order_seq_cst);
  }

 protected:
  TrieCore(int bits, Hooks* hooks)
      : bits_(bits), u_(universe_size(bits)), hooks_(hooks) {
    if (bits < 1 || bits > kMaxUniverseBits)
      throw std::invalid_argument("universe bits out of range");
    latest_ = std::make_unique<std::atomic<UpdateNode*>[]>(
        static_cast<std::size_t>(u_));
    slots_ = std::make_unique<Slot[]>(static_cast<std::size_t>(2 * u_));
    for (Key x = 0; x < u_; ++x) {
      auto* d = new UpdateNode(x, NodeKind::kDel, bits_, 1);
      d->status.store(NodeStatus::kActive, std::memory_order_relaxed);
      d->completed.store(true, std::memory_order_relaxed);
      d->upper0.store(static_cast<std::uint32_t>(bits_),
                      std::memory_order_relaxed);
      latest_[static_cast<std::size_t>(x)].store(d, std::memory_order_relaxed);
    }
    for (std::size_t i = 1; i < static_cast<std::size_t>(2 * u_); ++i) {
      std::size_t leaf = i;
      while (leaf < static_cast<std::size_t>(u_)) leaf <<= 1;
      UpdateNode* d = latest_[leaf - static_cast<std::size_t>(u_)].load(
          std::memory_order_relaxed);
      acquire(d);
      slots_[i].dptr.store(d, std::memory_order_relaxed);
    }
  }

  ~TrieCore() {
    for (std::size_t i = 1; i < static_cast<std::size_t>(2 * u_); ++i)
      release(slots_[i].dptr.exchange(nullptr, std::memory_order_relaxed),
              ep_);
    for (Key x = 0; x < u_; ++x)
      release(latest_[static_cast<std::size_t>(x)].exchange(
                  nullptr, std::memory_order_relaxed),
              ep_);
  }

  Derived& self() { return *static_cast<Derived*>(this); }

  void check_key(Key x) const {
    if (x < 0 || x >= u_) throw std::out_of_range("key outside universe");
  }

  std::size_t leaf_index(Key x) const {
    return static_cast<std::size_t>(u_ + x);
  }

  int height_of(std::size_t idx) const {
    return bits_ - (std::bit_width(idx) - 1);
  }

  void sync(Site s, std::int64_t a = 0, std::int64_t b = 0) {
    if (hooks_) hooks_->sync(s, a, b);
  }
  void lin_point(LinSite s, std::uint64_t tag) {
    if (hooks_) hooks_->lin_point(s, tag);
  }
  std::uint64_t op_tag() { return hooks_ ? hooks_->op_tag() : 0; }

  // ---- interpreted bits -------------------------------------------------

  int interpreted_bit(std::size_t t) {
    steps::on_read();
    UpdateNode* dref = slots_[t].dptr.load(std::memory_order_seq_cst);
    UpdateNode* u = self().find_latest_node(dref->key);
    if (u->kind == NodeKind::kIns) return 1;
    int h = height_of(t);
    steps::on_read();
    if (h <= static_cast<int>(u->upper0.load(std::memory_order_seq_cst))) {
      if (h < static_cast<int>(u->lower1.read()) && self().first_activated(u))
        return 0;
    }
    return 1;
  }

  // ---- upward walks -----------------------------------------------------

  // Sets the interpreted bits on the path from the parent of iNode's leaf to
  // the root to 1. At most one MinWrite per level; wait-free.
  void insert_binary_trie(UpdateNode* inode) {
    int h = 1;
    for (std::size_t t = leaf_index(inode->key) >> 1; t >= 1; t >>= 1, ++h) {
      steps::on_step();
      UpdateNode* dref = slots_[t].dptr.load(std::memory_order_seq_cst);
      steps::on_read();
      UpdateNode* u = self().find_latest_node(dref->key);
      if (u->kind == NodeKind::kDel) {
        steps::on_step();
        steps::on_read();
        bool depends =
            slots_[t].dptr.load(std::memory_order_seq_cst) == u ||
            h <= static_cast<int>(u->upper0.load(std::memory_order_seq_cst));
        if (depends) {
          steps::on_step();
          UpdateNode* held = try_acquire(u) ? u : nullptr;
          release(inode->target.exchange(held, std::memory_order_seq_cst),
                  ep_);
          steps::on_write();
          sync(Site::kInsTrieAfterSetTarget, h, u->key);
          steps::on_step();
          if (!self().first_activated(inode)) return;
          steps::on_step();
          if (h < static_cast<int>(u->lower1.read())) {
            steps::on_step();
            u->lower1.min_write(static_cast<std::uint64_t>(h));
          }
        }
      }
      if (t == 1) break;
    }
  }

  // Tries to set the interpreted bits on the path from dNode's leaf to the
  // root to 0; gives up as soon as a sibling subtree is occupied, a newer
  // update supersedes dNode, an insert asked it to stop, or another delete
  // owns the level. Two CAS attempts per level; wait-free.
  void delete_binary_trie(UpdateNode* dnode) {
    const std::uint64_t never_written = dnode->lower1.bound();
    sync(Site::kDelTrieStart, 0, dnode->key);
    std::size_t t = leaf_index(dnode->key);
    int h = 0;
    while (t != 1) {
      steps::on_step();
      if (interpreted_bit(t ^ 1) == 1) return;
      steps::on_step();
      if (interpreted_bit(t) == 1) return;
      t >>= 1;
      ++h;
      steps::on_step();
      steps::on_read();
      UpdateNode* d = slots_[t].dptr.load(std::memory_order_seq_cst);
      steps::on_step();
      if (!self().first_activated(dnode)) return;
      steps::on_step();
      steps::on_read();
      if (dnode->stop.load(std::memory_order_seq_cst)) return;
      steps::on_step();
      if (dnode->lower1.read() != never_written) return;
      sync(Site::kDelTrieBeforeFirstCas, h, dnode->key);
      acquire(dnode);  // reference for the slot
      steps::on_step();
      steps::on_cas();
      if (!slots_[t].dptr.compare_exchange_strong(d, dnode,
                                                  std::memory_order_seq_cst)) {
        steps::on_step();
        steps::on_read();
        d = slots_[t].dptr.load(std::memory_order_seq_cst);
        steps::on_step();
        if (!self().first_activated(dnode)) {
          release(dnode, ep_);
          return;
        }
        steps::on_step();
        steps::on_read();
        if (dnode->stop.load(std::memory_order_seq_cst) ||
            dnode->lower1.read() != never_written) {
          release(dnode, ep_);
          return;
        }
        sync(Site::kDelTrieBeforeSecondCas, h, dnode->key);
        steps::on_step();
        steps::on_cas();
        if (!slots_[t].dptr.compare_exchange_strong(
                d, dnode, std::memory_order_seq_cst)) {
          release(dnode, ep_);
          return;
        }
      }
      release(d, ep_);  // displaced slot reference
      sync(Site::kDelTrieAfterCas, h, dnode->key);
      steps::on_step();
      if (interpreted_bit(2 * t) == 1) return;
      steps::on_step();
      if (interpreted_bit(2 * t + 1) == 1) return;
      steps::on_step();
      steps::on_write();
      dnode->upper0.store(static_cast<std::uint32_t>(h),
                          std::memory_order_seq_cst);
    }
  }

  // ---- relaxed predecessor traversal -------------------------------------
  //
  // Climbs from the leaf of y until a right-child position whose sibling has
  // interpreted bit 1, then follows the right-most path of 1-bits down.
  // Returns nullopt when a 1-bit node with two 0-bit children blocks the
  // descent (a concurrent update owns that region).
  std::optional<Key> relaxed_predecessor_walk(Key y) {
    std::size_t t = leaf_index(y);
    for (;;) {
      bool climb = (t & 1) == 0;
      if (!climb) {
        steps::on_step();
        climb = interpreted_bit(t ^ 1) == 0;
      }
      if (!climb) break;
      t >>= 1;
      if (t == 1) return kNoKey;
    }
    t ^= 1;  // sibling: left child of the parent, root of the descent
    while (t < static_cast<std::size_t>(u_)) {
      steps::on_step();
      if (interpreted_bit(2 * t + 1) == 1) {
        t = 2 * t + 1;
        continue;
      }
      steps::on_step();
      if (interpreted_bit(2 * t) == 1) {
        t = 2 * t;
        continue;
      }
      return std::nullopt;
    }
    return static_cast<Key>(t) - u_;
  }

  struct alignas(64) Slot {
    std::atomic<UpdateNode*> dptr{nullptr};
  };

  const int bits_;
  const Key u_;
  Hooks* hooks_;
  EpochDomain ep_;
  std::unique_ptr<std::atomic<UpdateNode*>[]> latest_;
  std::unique_ptr<Slot[]> slots_;
};

}  // namespace lftrie
