#pragma once

#include <optional>

#include "lftrie/trie_core.hpp"

namespace lftrie {

// Wait-free relaxed binary trie. TrieSearch, TrieInsert and TrieDelete are
// linearizable (updates linearize at the successful CAS on latest[x]);
// RelaxedPredecessor may return nullopt while concurrent updates own part of
// the path it needs, but returns the exact predecessor whenever no update
// with a key in the interfering range is concurrent with it.
//
// latest[x] holds the single latest update node for x; the latest view is
// one read, and a node is current while latest[x] still points at it.
class RelaxedBinaryTrie : public TrieCore<RelaxedBinaryTrie> {
  using Base = TrieCore<RelaxedBinaryTrie>;
  friend Base;

 public:
  explicit RelaxedBinaryTrie(int bits, Hooks* hooks = nullptr)
      : Base(bits, hooks) {}

  bool trie_search(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* u = find_latest_node(x);
    lin_point(LinSite::kSearchLatestRead, op_tag());
    return u->kind == NodeKind::kIns;
  }

  void trie_insert(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* d = find_latest_node(x);
    if (d->kind != NodeKind::kDel) return;
    auto* inode = new UpdateNode(x, NodeKind::kIns, bits_, 2);
    inode->op_tag = op_tag();
    inode->status.store(NodeStatus::kActive, std::memory_order_relaxed);
    stop_via_latest_next(d);
    UpdateNode* expect = d;
    steps::on_cas();
    if (!latest_[static_cast<std::size_t>(x)].compare_exchange_strong(
            expect, inode, std::memory_order_seq_cst)) {
      release(inode, ep_);
      release(inode, ep_);
      return;
    }
    lin_point(LinSite::kLatestCas, inode->op_tag);
    // d left the latest chain: drop the INS it was holding, then d itself.
    release(d->latest_next.exchange(nullptr, std::memory_order_seq_cst), ep_);
    release(d, ep_);
    insert_binary_trie(inode);
    release(inode, ep_);
  }

  void trie_delete(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* i = find_latest_node(x);
    if (i->kind != NodeKind::kIns) return;
    auto* dnode = new UpdateNode(x, NodeKind::kDel, bits_, 2);
    dnode->op_tag = op_tag();
    dnode->status.store(NodeStatus::kActive, std::memory_order_relaxed);
    dnode->latest_next.store(i, std::memory_order_relaxed);
    UpdateNode* expect = i;
    steps::on_cas();
    if (!latest_[static_cast<std::size_t>(x)].compare_exchange_strong(
            expect, dnode, std::memory_order_seq_cst)) {
      dnode->latest_next.store(nullptr, std::memory_order_relaxed);
      release(dnode, ep_);
      release(dnode, ep_);
      return;
    }
    lin_point(LinSite::kLatestCas, dnode->op_tag);
    // i's chain reference is now held through dnode->latest_next.
    UpdateNode* t = i->target.load(std::memory_order_seq_cst);
    steps::on_read();
    if (t) {
      t->stop.store(true, std::memory_order_seq_cst);
      steps::on_write();
    }
    delete_binary_trie(dnode);
    release(dnode, ep_);
  }

  std::optional<Key> relaxed_predecessor(Key y) {
    check_key(y);
    EpochGuard g(ep_);
    return relaxed_predecessor_walk(y);
  }

 private:
  UpdateNode* find_latest_node(Key x) {
    steps::on_read();
    return latest_[static_cast<std::size_t>(x)].load(std::memory_order_seq_cst);
  }

  bool first_activated(UpdateNode* n) {
    steps::on_read();
    return latest_[static_cast<std::size_t>(n->key)].load(
               std::memory_order_seq_cst) == n;
  }

  // dNode.latestNext.target.stop := true, skipping any null link.
  void stop_via_latest_next(UpdateNode* d) {
    UpdateNode* pi = d->latest_next.load(std::memory_order_seq_cst);
    steps::on_read();
    if (!pi) return;
    UpdateNode* t = pi->target.load(std::memory_order_seq_cst);
    steps::on_read();
    if (!t) return;
    t->stop.store(true, std::memory_order_seq_cst);
    steps::on_write();
  }
};

}  // namespace lftrie
