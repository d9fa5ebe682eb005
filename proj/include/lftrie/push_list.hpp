#pragma once

#include <atomic>
#include <cstdint>

#include "lftrie/epoch.hpp"
#include "lftrie/nodes.hpp"
#include "lftrie/step_counter.hpp"

namespace lftrie {

// Push-front with a guard re-evaluated before every CAS attempt. Returns
// false (list unchanged by us) as soon as the guard fails.
template <class Node, class Guard>
bool push_front_guarded(std::atomic<Node*>& head, Node* n, Guard&& guard) {
  for (;;) {
    Node* h = head.load(std::memory_order_seq_cst);
    steps::on_read();
    n->next = h;
    if (!guard()) return false;
    if (head.compare_exchange_strong(h, n, std::memory_order_seq_cst)) {
      steps::on_cas();
      return true;
    }
    steps::on_cas();
  }
}

// The predecessor announcement list: unsorted, insert at head, marked-link
// removal. Each node is announced once, so nodes carry their own link word
// and no per-episode cells are needed. Only the announcing operation removes
// its node; helpers never do, which keeps the unlink single-writer.
class PredList {
 public:
  explicit PredList(EpochDomain& ep)
      : ep_(ep), head_(kPosInf, 1, nullptr, ep) {}

  PredecessorNode* head_sentinel() { return &head_; }

  // Caller transfers one reference for the list membership.
  void push(PredecessorNode* p) {
    for (;;) {
      std::uint64_t h = head_.pall_succ.load(std::memory_order_seq_cst);
      p->pall_succ.store(h, std::memory_order_seq_cst);
      if (head_.pall_succ.compare_exchange_strong(
              h, PredecessorNode::word(p), std::memory_order_seq_cst)) {
        steps::on_cas();
        return;
      }
      steps::on_cas();
    }
  }

  void remove(PredecessorNode* p) {
    // Logical removal: freeze p's link.
    for (;;) {
      std::uint64_t s = p->pall_succ.load(std::memory_order_seq_cst);
      if (PredecessorNode::marked(s)) break;
      if (p->pall_succ.compare_exchange_strong(s, s | PredecessorNode::kMark,
                                               std::memory_order_seq_cst)) {
        release(p, ep_);  // membership reference ends here
        break;
      }
    }
    // Physical unlink. A marked predecessor freezes its own link, so the
    // CAS below cannot resurrect p through a dead node.
    for (;;) {
      PredecessorNode* prev = &head_;
      PredecessorNode* cur =
          PredecessorNode::ptr(prev->pall_succ.load(std::memory_order_seq_cst));
      while (cur != nullptr && cur != p) {
        prev = cur;
        cur = PredecessorNode::ptr(
            cur->pall_succ.load(std::memory_order_seq_cst));
      }
      if (cur == nullptr) return;  // already off the list
      std::uint64_t expect = PredecessorNode::word(p);
      std::uint64_t after =
          p->pall_succ.load(std::memory_order_seq_cst) & ~PredecessorNode::kMark;
      if (prev->pall_succ.compare_exchange_strong(expect, after,
                                                  std::memory_order_seq_cst)) {
        steps::on_cas();
        return;
      }
      steps::on_cas();
    }
  }

  // Live traversal (skips logically removed announcements).
  PredecessorNode* first_live() const { return next_live(&head_); }

  PredecessorNode* next_live(const PredecessorNode* p) const {
    PredecessorNode* c =
        PredecessorNode::ptr(p->pall_succ.load(std::memory_order_seq_cst));
    steps::on_read();
    while (c != nullptr &&
           PredecessorNode::marked(c->pall_succ.load(std::memory_order_seq_cst)))
      c = PredecessorNode::ptr(c->pall_succ.load(std::memory_order_seq_cst));
    return c;
  }

  bool only_sentinels() const { return first_live() == nullptr; }

 private:
  EpochDomain& ep_;
  PredecessorNode head_;
};

}  // namespace lftrie
