#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lftrie/push_list.hpp"
#include "lftrie/sorted_list.hpp"
#include "lftrie/trie_core.hpp"

namespace lftrie {

// Linearizable lock-free dynamic set over {0..2^b-1} supporting search,
// insert, remove and predecessor. Built from the relaxed trie walks plus:
//
//  - latest[x] lists of length <= 2 with an Inactive/Active status; an
//    S-modifying update linearizes exactly at its status write,
//  - the U-ALL (ascending) and RU-ALL (descending) update announcement
//    lists, entered before activation and left after completion,
//  - the P-ALL of predecessor announcements, each carrying an insert-only
//    notify list fed by update operations,
//  - two embedded predecessor runs inside every remove, whose results feed
//    other predecessors' recovery when the trie traversal is inconclusive.
//
// search is wait-free with O(1) reads; insert, remove and predecessor are
// lock-free.
class BinaryTrieSet : public TrieCore<BinaryTrieSet> {
  using Base = TrieCore<BinaryTrieSet>;
  friend Base;

 public:
  explicit BinaryTrieSet(int bits, Hooks* hooks = nullptr)
      : Base(bits, hooks),
        uall_(/*ascending=*/true, &UpdateNode::uall_cell, ep_),
        ruall_(/*ascending=*/false, &UpdateNode::ruall_cell, ep_),
        pall_(ep_) {}

  bool search(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* u = find_latest_node(x);
    lin_point(LinSite::kSearchLatestRead, op_tag());
    return u->kind == NodeKind::kIns;
  }

  void insert(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* d = find_latest_node(x);
    if (d->kind != NodeKind::kDel) return;  // already present
    auto* inode = new UpdateNode(x, NodeKind::kIns, bits_, 2);
    inode->op_tag = op_tag();
    inode->latest_next.store(d, std::memory_order_relaxed);
    stop_via_latest_next(d);
    release(d->latest_next.exchange(nullptr, std::memory_order_seq_cst), ep_);
    UpdateNode* expect = d;
    steps::on_cas();
    if (!latest_[static_cast<std::size_t>(x)].compare_exchange_strong(
            expect, inode, std::memory_order_seq_cst)) {
      inode->latest_next.store(nullptr, std::memory_order_relaxed);
      release(inode, ep_);
      release(inode, ep_);
      help_activate(latest_[static_cast<std::size_t>(x)].load(
          std::memory_order_seq_cst));
      return;
    }
    announce(inode);
    sync(Site::kUpdateBeforeActivate, x);
    inode->status.store(NodeStatus::kActive, std::memory_order_seq_cst);
    steps::on_write();
    lin_point(LinSite::kActivate, inode->op_tag);
    sync(Site::kUpdateAfterActivate, x);
    release(inode->latest_next.exchange(nullptr, std::memory_order_seq_cst),
            ep_);
    insert_binary_trie(inode);
    notify_pred_ops(inode);
    inode->completed.store(true, std::memory_order_seq_cst);
    retract(inode);
    release(inode, ep_);
  }

  void remove(Key x) {
    check_key(x);
    EpochGuard g(ep_);
    UpdateNode* i = find_latest_node(x);
    if (i->kind != NodeKind::kIns) return;  // not present
    PredResult pr1 = pred_helper(x);
    auto* dnode = new UpdateNode(x, NodeKind::kDel, bits_, 2);
    dnode->op_tag = op_tag();
    dnode->latest_next.store(i, std::memory_order_relaxed);
    dnode->del_pred = pr1.value;
    acquire(pr1.pnode);
    dnode->del_pred_node = pr1.pnode;
    release(i->latest_next.exchange(nullptr, std::memory_order_seq_cst), ep_);
    notify_pred_ops(i);  // help the previous insert send notifications
    UpdateNode* expect = i;
    steps::on_cas();
    if (!latest_[static_cast<std::size_t>(x)].compare_exchange_strong(
            expect, dnode, std::memory_order_seq_cst)) {
      dnode->latest_next.store(nullptr, std::memory_order_relaxed);
      release(dnode, ep_);
      release(dnode, ep_);
      help_activate(latest_[static_cast<std::size_t>(x)].load(
          std::memory_order_seq_cst));
      pall_.remove(pr1.pnode);
      release(pr1.pnode, ep_);
      return;
    }
    announce(dnode);
    sync(Site::kUpdateBeforeActivate, x);
    dnode->status.store(NodeStatus::kActive, std::memory_order_seq_cst);
    steps::on_write();
    lin_point(LinSite::kActivate, dnode->op_tag);
    sync(Site::kUpdateAfterActivate, x);
    stop_target(i);
    release(dnode->latest_next.exchange(nullptr, std::memory_order_seq_cst),
            ep_);
    PredResult pr2 = pred_helper(x);
    dnode->del_pred2.store(pr2.value, std::memory_order_seq_cst);
    delete_binary_trie(dnode);
    notify_pred_ops(dnode);
    dnode->completed.store(true, std::memory_order_seq_cst);
    retract(dnode);
    pall_.remove(pr1.pnode);
    release(pr1.pnode, ep_);
    pall_.remove(pr2.pnode);
    release(pr2.pnode, ep_);
    release(dnode, ep_);
  }

  Key predecessor(Key y) {
    check_key(y);
    EpochGuard g(ep_);
    PredResult pr = pred_helper(y);
    pall_.remove(pr.pnode);
    release(pr.pnode, ep_);
    return pr.value;
  }

  // ---- diagnostics ------------------------------------------------------

  bool announcements_clear() const {
    return uall_.only_sentinels() && ruall_.only_sentinels() &&
           pall_.only_sentinels();
  }

 private:
  // ---- latest view --------------------------------------------------------

  // First activated update node of the latest[x] list.
  UpdateNode* find_latest_node(Key x) {
    steps::on_read();
    UpdateNode* u = latest_[static_cast<std::size_t>(x)].load(
        std::memory_order_seq_cst);
    steps::on_read();
    if (u->status.load(std::memory_order_seq_cst) == NodeStatus::kInactive) {
      steps::on_read();
      UpdateNode* v = u->latest_next.load(std::memory_order_seq_cst);
      if (v != nullptr) return v;
      // activated between the two reads
    }
    return u;
  }

  bool first_activated(UpdateNode* n) {
    steps::on_read();
    UpdateNode* h = latest_[static_cast<std::size_t>(n->key)].load(
        std::memory_order_seq_cst);
    if (h == n) return true;
    steps::on_read();
    if (h->status.load(std::memory_order_seq_cst) == NodeStatus::kInactive) {
      steps::on_read();
      return h->latest_next.load(std::memory_order_seq_cst) == n;
    }
    return false;
  }

  // ---- helping ------------------------------------------------------------

  void help_activate(UpdateNode* u) {
    if (!try_acquire(u)) return;  // superseded long ago, nothing to help
    if (u->status.load(std::memory_order_seq_cst) == NodeStatus::kInactive) {
      announce(u);
      u->status.store(NodeStatus::kActive, std::memory_order_seq_cst);
      lin_point(LinSite::kActivate, u->op_tag);
      if (u->kind == NodeKind::kDel) stop_via_latest_next(u);
      release(u->latest_next.exchange(nullptr, std::memory_order_seq_cst),
              ep_);
      if (u->completed.load(std::memory_order_seq_cst)) {
        // The owner may already have removed it; we may have re-added it.
        retract(u);
      }
    }
    release(u, ep_);
  }

  void announce(UpdateNode* u) {
    uall_.insert(u);
    ruall_.insert(u);
  }

  void retract(UpdateNode* u) {
    uall_.remove(u);
    ruall_.remove(u);
  }

  // uNode.latestNext.target.stop := true, skipping null links.
  void stop_via_latest_next(UpdateNode* u) {
    UpdateNode* pi = u->latest_next.load(std::memory_order_seq_cst);
    if (!pi) return;
    stop_target(pi);
  }

  void stop_target(UpdateNode* i) {
    UpdateNode* t = i->target.load(std::memory_order_seq_cst);
    steps::on_read();
    if (!t) return;
    t->stop.store(true, std::memory_order_seq_cst);
    steps::on_write();
  }

  // ---- announcement traversals ---------------------------------------------

  // First-activated update nodes with key < x, in ascending key order.
  void traverse_uall(Key x, std::vector<UpdateNode*>& ins,
                     std::vector<UpdateNode*>& del) {
    for (ListCell* c = uall_.next(uall_.head()); c != uall_.tail();
         c = uall_.next(c)) {
      if (c->key >= x) break;
      if (!AnnounceList::cell_live(c)) continue;
      UpdateNode* u = c->unode;
      steps::on_read();
      if (u->status.load(std::memory_order_seq_cst) != NodeStatus::kInactive &&
          first_activated(u)) {
        (u->kind == NodeKind::kIns ? ins : del).push_back(u);
      }
    }
  }

  // Descending walk publishing the current position through the atomic copy
  // cell before every hop, so notify thresholds and this traversal agree.
  void traverse_ruall(PredecessorNode* p, std::vector<UpdateNode*>& ins,
                      std::vector<UpdateNode*>& del) {
    const Key y = p->key;
    sync(Site::kRuallBeforeFirstHop, y);
    ListCell* cur = reinterpret_cast<ListCell*>(p->ruall_position.read());
    do {
      p->ruall_position.copy_from(cur->succ, ListCell::kPtrMask);
      cur = reinterpret_cast<ListCell*>(p->ruall_position.read());
      if (cur->key < y && cur != ruall_.tail() &&
          AnnounceList::cell_live(cur)) {
        UpdateNode* u = cur->unode;
        steps::on_read();
        if (u->status.load(std::memory_order_seq_cst) !=
                NodeStatus::kInactive &&
            first_activated(u)) {
          (u->kind == NodeKind::kIns ? ins : del).push_back(u);
        }
      }
    } while (cur->key != kNegInf);
  }

  // ---- notifications --------------------------------------------------------

  void notify_pred_ops(UpdateNode* u) {
    if (!try_acquire(u)) return;  // node already superseded and dropped
    std::vector<UpdateNode*> ins, del;
    traverse_uall(kPosInf, ins, del);
    for (PredecessorNode* p = pall_.first_live(); p != nullptr;
         p = pall_.next_live(p)) {
      if (!first_activated(u)) break;
      if (p->key <= u->key) continue;  // its collection filters on key < y
      auto* nn = new NotifyNode;
      nn->key = u->key;
      acquire(u);
      nn->update_node = u;
      UpdateNode* best = nullptr;
      for (UpdateNode* cand : ins) {  // ascending
        if (cand->key >= p->key) break;
        best = cand;
      }
      nn->update_node_max = (best && try_acquire(best)) ? best : nullptr;
      nn->notify_threshold =
          reinterpret_cast<ListCell*>(p->ruall_position.read())->key;
      if (!send_notification(nn, p)) {
        release(nn->update_node, ep_);
        release(nn->update_node_max, ep_);
        delete nn;
        break;
      }
    }
    release(u, ep_);
  }

  bool send_notification(NotifyNode* nn, PredecessorNode* p) {
    return push_front_guarded(p->notify_head, nn, [&] {
      return first_activated(nn->update_node);
    });
  }

  // ---- predecessor ----------------------------------------------------------

  struct PredResult {
    Key value;
    PredecessorNode* pnode;
  };

  template <class Vec, class T>
  static bool contains(const Vec& v, const T* x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  }

  // The whole predecessor computation minus the final P-ALL removal, so
  // remove() can keep its embedded announcements alive until it finishes.
  // Caller holds the epoch guard; the returned pnode carries one reference
  // owned by the caller.
  PredResult pred_helper(Key y) {
    auto* pnode = new PredecessorNode(y, 2, ruall_.head(), ep_);
    pnode->op_tag = op_tag();
    pall_.push(pnode);
    sync(Site::kPredAfterAnnounce, y);

    // Announcements made before ours, oldest first.
    std::vector<PredecessorNode*> q;
    for (PredecessorNode* pp = pall_.next_live(pnode); pp != nullptr;
         pp = pall_.next_live(pp))
      q.push_back(pp);
    std::reverse(q.begin(), q.end());

    std::vector<UpdateNode*> i_ruall, d_ruall;
    traverse_ruall(pnode, i_ruall, d_ruall);
    sync(Site::kPredAfterRuall, y);

    std::optional<Key> r0 = relaxed_predecessor_walk(y);

    std::vector<UpdateNode*> i_uall, d_uall;
    traverse_uall(y, i_uall, d_uall);

    std::vector<UpdateNode*> i_notify, d_notify;
    for (NotifyNode* nn = pnode->notify_head.load(std::memory_order_seq_cst);
         nn != nullptr; nn = nn->next) {
      if (nn->key >= y) continue;
      if (nn->update_node->kind == NodeKind::kIns) {
        if (nn->notify_threshold <= nn->key)
          i_notify.push_back(nn->update_node);
      } else {
        if (nn->notify_threshold < nn->key)
          d_notify.push_back(nn->update_node);
      }
      if (nn->notify_threshold == kNegInf && nn->update_node_max != nullptr &&
          !contains(i_ruall, nn->update_node) &&
          !contains(d_ruall, nn->update_node)) {
        i_notify.push_back(nn->update_node_max);
      }
    }

    Key r1 = kNoKey;
    for (UpdateNode* u : i_uall) r1 = std::max(r1, u->key);
    for (UpdateNode* u : i_notify) r1 = std::max(r1, u->key);
    for (UpdateNode* u : d_uall)
      if (!contains(d_ruall, u)) r1 = std::max(r1, u->key);
    for (UpdateNode* u : d_notify)
      if (!contains(d_ruall, u)) r1 = std::max(r1, u->key);

    if (!r0.has_value() && !d_ruall.empty())
      r0 = recover_from_deletes(y, pnode, q, d_ruall);

    return {std::max(r0.value_or(kNoKey), r1), pnode};
  }

  // The trie traversal was blocked and at least one delete linearized around
  // our start is responsible. Reconstruct a safe candidate from the notify
  // history of the oldest such delete's first embedded predecessor plus our
  // own, following the embedded-predecessor results of deletes between them.
  Key recover_from_deletes(Key y, PredecessorNode* pnode,
                           const std::vector<PredecessorNode*>& q,
                           const std::vector<UpdateNode*>& d_ruall) {
    std::vector<PredecessorNode*> pred_nodes;
    for (UpdateNode* d : d_ruall) pred_nodes.push_back(d->del_pred_node);

    std::vector<UpdateNode*> l1;
    for (PredecessorNode* pp : q) {
      if (!contains(pred_nodes, pp)) continue;
      for (NotifyNode* nn = pp->notify_head.load(std::memory_order_seq_cst);
           nn != nullptr; nn = nn->next) {
        if (nn->key >= y) continue;
        if (!contains(l1, nn->update_node))
          l1.insert(l1.begin(), nn->update_node);
      }
      break;  // earliest announced member only
    }

    std::vector<UpdateNode*> l2;
    for (NotifyNode* nn = pnode->notify_head.load(std::memory_order_seq_cst);
         nn != nullptr; nn = nn->next) {
      if (nn->key >= y) continue;
      l1.erase(std::remove(l1.begin(), l1.end(), nn->update_node), l1.end());
      if (nn->notify_threshold >= nn->key && !contains(l2, nn->update_node))
        l2.insert(l2.begin(), nn->update_node);
    }

    std::vector<UpdateNode*> l = l1;
    l.insert(l.end(), l2.begin(), l2.end());

    // Keep only the last delete per key.
    std::vector<UpdateNode*> pruned;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (l[i]->kind == NodeKind::kDel) {
        bool later = false;
        for (std::size_t j = i + 1; j < l.size() && !later; ++j)
          later = l[j]->key == l[i]->key;
        if (later) continue;
      }
      pruned.push_back(l[i]);
    }

    // Candidate-recovery graph: one edge per delete in the pruned sequence,
    // from its key to its second embedded predecessor's result. Out-degree
    // is at most 1 and every edge strictly decreases, so following edges
    // from a start key reaches a unique sink.
    std::map<Key, Key> edge;
    for (UpdateNode* n : pruned) {
      if (n->kind != NodeKind::kDel) continue;
      Key dp2 = n->del_pred2.load(std::memory_order_seq_cst);
      assert(dp2 != kNegInf && "delete notified before recording delPred2");
      if (dp2 != kNegInf) edge[n->key] = dp2;
    }

    std::set<Key> starts;
    for (UpdateNode* d : d_ruall) starts.insert(d->del_pred);
    for (UpdateNode* n : pruned)
      if (n->kind == NodeKind::kIns) starts.insert(n->key);

    std::set<Key> sinks;
    for (Key x : starts) {
      Key w = x;
      for (auto it = edge.find(w); it != edge.end() && it->second < w;
           it = edge.find(w))
        w = it->second;
      sinks.insert(w);
    }
    for (UpdateNode* d : d_ruall) sinks.erase(d->key);

    assert(!sinks.empty() && "recovery produced no candidate");
    if (sinks.empty()) return kNoKey;
    return *sinks.rbegin();
  }

  AnnounceList uall_;
  AnnounceList ruall_;
  PredList pall_;
};

}  // namespace lftrie
