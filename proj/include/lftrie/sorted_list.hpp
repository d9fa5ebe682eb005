#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <utility>

#include "lftrie/epoch.hpp"
#include "lftrie/nodes.hpp"
#include "lftrie/step_counter.hpp"

namespace lftrie {

// Lock-free sorted list of announcement cells with marked links, deletion
// flags and backlinks. A removal first flags the predecessor's link, then
// marks the victim's own link (freezing it), then swings the predecessor
// past the victim. Operations that fail a CAS back up through backlinks
// instead of restarting from the head.
//
// Keys are ordered ascending or descending; equal keys keep insertion order
// (a new cell goes after every existing cell with the same key). Membership
// is per update node: the node's anchor field holds the cell of its current
// episode, which makes insert and remove idempotent under helping. Cells are
// never reused; a traversal standing on a removed cell sees a frozen suffix.
class AnnounceList {
 public:
  using Anchor = std::atomic<ListCell*> UpdateNode::*;

  AnnounceList(bool ascending, Anchor anchor, EpochDomain& ep)
      : ascending_(ascending), anchor_(anchor), ep_(ep) {
    head_.key = ascending ? kNegInf : kPosInf;
    tail_.key = ascending ? kPosInf : kNegInf;
    head_.succ.store(ListCell::word(&tail_), std::memory_order_relaxed);
  }

  ~AnnounceList() {
    ListCell* c = ListCell::ptr(head_.succ.load(std::memory_order_relaxed));
    while (c != &tail_) {
      ListCell* nx = ListCell::ptr(c->succ.load(std::memory_order_relaxed));
      release(c->unode, ep_);
      delete c;
      c = nx;
    }
  }

  ListCell* head() { return &head_; }
  ListCell* tail() { return &tail_; }

  // Adds n to the list unless its current episode is still present.
  void insert(UpdateNode* n) {
    if (!try_acquire(n)) return;  // node already dead, nothing to announce
    ListCell* c = new ListCell;
    c->unode = n;
    c->key = n->key;
    ListCell* expected = nullptr;
    if (!(n->*anchor_).compare_exchange_strong(expected, c,
                                               std::memory_order_seq_cst)) {
      release(n, ep_);
      delete c;
      return;
    }
    splice(c);
  }

  // Takes n's current episode out of the list. Idempotent.
  void remove(UpdateNode* n) {
    ListCell* c = (n->*anchor_).load(std::memory_order_seq_cst);
    if (c == nullptr) return;
    for (;;) {
      auto [prev, found] = find_cell(c);
      if (found) {
        unlink(prev, c);
        break;
      }
      std::uint64_t s = c->succ.load(std::memory_order_seq_cst);
      if (ListCell::marked(s)) break;  // settled by the inserter or a helper
      // Not linked yet: freeze the cell so the in-flight insert aborts or
      // cleans up after publishing.
      if (c->succ.compare_exchange_strong(s, s | ListCell::kMark,
                                          std::memory_order_seq_cst))
        break;
    }
    (n->*anchor_).compare_exchange_strong(c, nullptr,
                                          std::memory_order_seq_cst);
  }

  // Raw hop; traversals decide liveness per visit via cell_live().
  ListCell* next(const ListCell* c) const {
    steps::on_read();
    return ListCell::ptr(c->succ.load(std::memory_order_seq_cst));
  }
  static bool cell_live(const ListCell* c) {
    return !ListCell::marked(c->succ.load(std::memory_order_seq_cst));
  }

  bool only_sentinels() const {
    const ListCell* c = ListCell::ptr(head_.succ.load());
    while (c != &tail_) {
      if (cell_live(c)) return false;
      c = ListCell::ptr(c->succ.load());
    }
    return true;
  }

 private:
  bool goes_before(Key a, Key b) const {
    return ascending_ ? a <= b : a >= b;
  }

  // Walks from prev while keep(cur) holds, unlinking marked cells whose
  // predecessor is live. Returns adjacent (prev, cur) with cur the first
  // cell where keep fails.
  template <class Pred>
  std::pair<ListCell*, ListCell*> search_from(ListCell* prev, Pred keep) {
    for (;;) {
      std::uint64_t ps = prev->succ.load(std::memory_order_seq_cst);
      steps::on_read();
      ListCell* cur = ListCell::ptr(ps);
      if (!keep(cur)) return {prev, cur};
      std::uint64_t cs = cur->succ.load(std::memory_order_seq_cst);
      if (ListCell::marked(cs) && !ListCell::marked(ps)) {
        if (ListCell::flagged(ps)) {
          help_flagged(prev, cur);
        } else {
          std::uint64_t expect = ListCell::word(cur);
          if (prev->succ.compare_exchange_strong(expect,
                                                 expect | ListCell::kFlag,
                                                 std::memory_order_seq_cst))
            help_flagged(prev, cur);
          steps::on_cas();
        }
        continue;  // re-read prev->succ
      }
      prev = cur;
    }
  }

  std::pair<ListCell*, ListCell*> search_position(Key key, ListCell* from) {
    return search_from(from, [&](ListCell* c) {
      return c != &tail_ && goes_before(c->key, key);
    });
  }

  // Locates target's predecessor starting at from. found == (cur == target).
  std::pair<ListCell*, bool> find_from(ListCell* from, ListCell* target) {
    auto [prev, cur] = search_from(from, [&](ListCell* c) {
      return c != &tail_ && c != target && goes_before(c->key, target->key);
    });
    return {prev, cur == target};
  }

  std::pair<ListCell*, bool> find_cell(ListCell* target) {
    return find_from(&head_, target);
  }

  void splice(ListCell* c) {
    UpdateNode* n = c->unode;
    ListCell* prev = &head_;
    for (;;) {
      auto [p, nx] = search_position(c->key, prev);
      prev = p;
      std::uint64_t cs = c->succ.load(std::memory_order_seq_cst);
      if (ListCell::marked(cs)) {
        // A remover froze us before we ever linked; the episode is over.
        (n->*anchor_).compare_exchange_strong(c, nullptr,
                                              std::memory_order_seq_cst);
        release(n, ep_);
        ep_.retire(c);
        return;
      }
      if (ListCell::ptr(cs) != nx &&
          !c->succ.compare_exchange_strong(cs, ListCell::word(nx),
                                           std::memory_order_seq_cst)) {
        continue;  // froze mid-update; handled on the next pass
      }
      std::uint64_t expect = ListCell::word(nx);
      if (prev->succ.compare_exchange_strong(expect, ListCell::word(c),
                                             std::memory_order_seq_cst)) {
        steps::on_cas();
        if (ListCell::marked(c->succ.load(std::memory_order_seq_cst))) {
          // Removal requested while we were splicing; finish it.
          auto [rp, found] = find_cell(c);
          if (found) unlink(rp, c);
        }
        return;
      }
      steps::on_cas();
      std::uint64_t now = prev->succ.load(std::memory_order_seq_cst);
      if (ListCell::flagged(now)) help_flagged(prev, ListCell::ptr(now));
      prev = backtrack(prev);
    }
  }

  // Completes the removal of a linked cell starting from its predecessor.
  void unlink(ListCell* prev, ListCell* target) {
    for (;;) {
      auto [p, flagged_by_us] = try_flag(prev, target);
      if (p == nullptr) return;  // already unlinked
      (void)flagged_by_us;
      help_flagged(p, target);
      return;
    }
  }

  std::pair<ListCell*, bool> try_flag(ListCell* prev, ListCell* target) {
    const std::uint64_t flagged = ListCell::word(target) | ListCell::kFlag;
    for (;;) {
      if (prev->succ.load(std::memory_order_seq_cst) == flagged)
        return {prev, false};
      std::uint64_t expect = ListCell::word(target);
      if (prev->succ.compare_exchange_strong(expect, flagged,
                                             std::memory_order_seq_cst)) {
        steps::on_cas();
        return {prev, true};
      }
      steps::on_cas();
      if (expect == flagged) return {prev, false};
      prev = backtrack(prev);
      auto [p, found] = find_from(prev, target);
      if (!found) return {nullptr, false};
      prev = p;
    }
  }

  void help_flagged(ListCell* prev, ListCell* del) {
    del->backlink.store(prev, std::memory_order_seq_cst);
    if (!ListCell::marked(del->succ.load(std::memory_order_seq_cst)))
      try_mark(del);
    help_marked(prev, del);
  }

  void try_mark(ListCell* del) {
    for (;;) {
      std::uint64_t s = del->succ.load(std::memory_order_seq_cst);
      if (ListCell::marked(s)) return;
      if (ListCell::flagged(s)) {
        help_flagged(del, ListCell::ptr(s));
        continue;
      }
      if (del->succ.compare_exchange_strong(s, s | ListCell::kMark,
                                            std::memory_order_seq_cst)) {
        steps::on_cas();
        return;
      }
      steps::on_cas();
    }
  }

  void help_marked(ListCell* prev, ListCell* del) {
    ListCell* after =
        ListCell::ptr(del->succ.load(std::memory_order_seq_cst));
    std::uint64_t expect = ListCell::word(del) | ListCell::kFlag;
    if (prev->succ.compare_exchange_strong(expect, ListCell::word(after),
                                           std::memory_order_seq_cst)) {
      retire_cell(del);
    }
    steps::on_cas();
  }

  ListCell* backtrack(ListCell* c) {
    while (ListCell::marked(c->succ.load(std::memory_order_seq_cst))) {
      ListCell* b = c->backlink.load(std::memory_order_seq_cst);
      if (b == nullptr) return &head_;
      c = b;
    }
    return c;
  }

  // Unique per cell: called only by the winner of the unlink CAS (or the
  // splice-abort path, which never made the cell reachable).
  void retire_cell(ListCell* c) {
    release(c->unode, ep_);
    ep_.retire(c);
  }

  const bool ascending_;
  const Anchor anchor_;
  EpochDomain& ep_;
  ListCell head_;
  ListCell tail_;
};

}  // namespace lftrie
