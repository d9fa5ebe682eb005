#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <vector>

#include "lftrie/atomic_copy.hpp"
#include "lftrie/epoch.hpp"
#include "lftrie/keys.hpp"
#include "lftrie/min_register.hpp"

namespace lftrie {

struct UpdateNode;
struct PredecessorNode;

// One membership episode of an update node in the U-ALL or RU-ALL. A node
// can be removed by its owner and re-added by a lagging helper, so each
// episode gets a fresh cell; traversals standing on a retired episode's cell
// keep a coherent frozen view of the list. succ packs mark and flag bits.
struct ListCell {
  static constexpr std::uint64_t kMark = 1;
  static constexpr std::uint64_t kFlag = 2;
  static constexpr std::uint64_t kPtrMask = ~std::uint64_t{3};

  std::atomic<std::uint64_t> succ{0};
  std::atomic<ListCell*> backlink{nullptr};
  UpdateNode* unode{nullptr};
  Key key{0};

  static ListCell* ptr(std::uint64_t w) {
    return reinterpret_cast<ListCell*>(w & kPtrMask);
  }
  static bool marked(std::uint64_t w) { return (w & kMark) != 0; }
  static bool flagged(std::uint64_t w) { return (w & kFlag) != 0; }
  static std::uint64_t word(ListCell* c) {
    return reinterpret_cast<std::uint64_t>(c);
  }
};

enum class NodeKind : std::uint8_t { kIns, kDel };
enum class NodeStatus : std::uint8_t { kInactive, kActive };

// Record of one S-modifying Insert or Delete. The same layout serves the
// relaxed trie (which ignores status/completed and the announcement fields)
// and the full structure.
struct alignas(64) UpdateNode {
  const Key key;
  const NodeKind kind;
  std::atomic<NodeStatus> status{NodeStatus::kInactive};
  std::atomic<bool> stop{false};
  std::atomic<bool> completed{false};
  std::atomic<std::uint32_t> refs;

  // DEL thresholds driving interpreted bits. upper0 is written only by the
  // creating Delete, one level per completed iteration.
  std::atomic<std::uint32_t> upper0{0};
  MinRegister lower1;

  std::atomic<UpdateNode*> latest_next{nullptr};
  std::atomic<UpdateNode*> target{nullptr};

  // DEL bookkeeping for embedded predecessor operations.
  PredecessorNode* del_pred_node{nullptr};
  Key del_pred{kNoKey};
  std::atomic<Key> del_pred2{kNegInf};  // kNegInf = not yet recorded

  // Current membership episode in each announcement list (null = not in).
  std::atomic<ListCell*> uall_cell{nullptr};
  std::atomic<ListCell*> ruall_cell{nullptr};

  std::uint64_t op_tag{0};

  UpdateNode(Key k, NodeKind kd, int bits, std::uint32_t initial_refs)
      : key(k),
        kind(kd),
        refs(initial_refs),
        lower1(static_cast<std::uint32_t>(bits) + 1) {}
};

struct NotifyNode {
  Key key;
  UpdateNode* update_node;
  UpdateNode* update_node_max;  // may be null
  Key notify_threshold;
  NotifyNode* next{nullptr};
};

// Announcement of one PredHelper instance.
struct alignas(64) PredecessorNode {
  const Key key;
  std::atomic<std::uint32_t> refs;
  std::atomic<NotifyNode*> notify_head{nullptr};
  CopyCell ruall_position;  // holds a ListCell* into the RU-ALL
  std::atomic<std::uint64_t> pall_succ{0};  // PredecessorNode* | mark bit
  std::uint64_t op_tag{0};

  PredecessorNode(Key k, std::uint32_t initial_refs, ListCell* ruall_head,
                  EpochDomain& ep)
      : key(k), refs(initial_refs), ruall_position(ListCell::word(ruall_head), ep) {}

  static constexpr std::uint64_t kMark = 1;
  static PredecessorNode* ptr(std::uint64_t w) {
    return reinterpret_cast<PredecessorNode*>(w & ~kMark);
  }
  static bool marked(std::uint64_t w) { return (w & kMark) != 0; }
  static std::uint64_t word(PredecessorNode* p) {
    return reinterpret_cast<std::uint64_t>(p);
  }
};

// ---- reference counting ----------------------------------------------
//
// Epoch guards make raw dereferences safe within an operation; reference
// counts track the stored, cross-operation edges:
//   UpdateNode:      latest-list membership, trie-slot dNodePtr installs,
//                    INS target, announcement cells, notify-node references,
//                    and the creating operation's own handle.
//   PredecessorNode: P-ALL membership, DEL delPredNode, own handle.
// A count that reaches zero releases the node's outgoing edges immediately
// and retires the node through the epoch domain, so readers pinned before
// the drop stay safe.

inline void acquire(UpdateNode* n) {
  if (!n) return;
  [[maybe_unused]] auto prev = n->refs.fetch_add(1, std::memory_order_acq_rel);
  assert(prev > 0 && "acquire of a dead update node");
}

inline void acquire(PredecessorNode* p) {
  if (!p) return;
  [[maybe_unused]] auto prev = p->refs.fetch_add(1, std::memory_order_acq_rel);
  assert(prev > 0 && "acquire of a dead predecessor node");
}

// Acquires only if the node is still live; fails once the count hit zero.
inline bool try_acquire(UpdateNode* n) {
  if (!n) return false;
  std::uint32_t c = n->refs.load(std::memory_order_acquire);
  while (c != 0) {
    if (n->refs.compare_exchange_weak(c, c + 1, std::memory_order_acq_rel))
      return true;
  }
  return false;
}

namespace detail {

inline void free_pred_node(void* q) {
  auto* p = static_cast<PredecessorNode*>(q);
  NotifyNode* n = p->notify_head.load(std::memory_order_relaxed);
  while (n) {
    NotifyNode* nx = n->next;
    delete n;
    n = nx;
  }
  delete p;
}

struct ReleaseQueue {
  std::vector<UpdateNode*> us;
  std::vector<PredecessorNode*> ps;

  void push(UpdateNode* n) {
    if (n && n->refs.fetch_sub(1, std::memory_order_acq_rel) == 1)
      us.push_back(n);
  }
  void push(PredecessorNode* p) {
    if (p && p->refs.fetch_sub(1, std::memory_order_acq_rel) == 1)
      ps.push_back(p);
  }

  void drain(EpochDomain& ep) {
    while (!us.empty() || !ps.empty()) {
      if (!us.empty()) {
        UpdateNode* n = us.back();
        us.pop_back();
        assert(n->uall_cell.load(std::memory_order_acquire) == nullptr);
        assert(n->ruall_cell.load(std::memory_order_acquire) == nullptr);
        push(n->target.exchange(nullptr, std::memory_order_acq_rel));
        push(n->latest_next.exchange(nullptr, std::memory_order_acq_rel));
        PredecessorNode* dp = n->del_pred_node;
        n->del_pred_node = nullptr;
        push(dp);
        ep.retire(n);
      } else {
        PredecessorNode* p = ps.back();
        ps.pop_back();
        for (NotifyNode* nn = p->notify_head.load(std::memory_order_acquire);
             nn != nullptr; nn = nn->next) {
          push(nn->update_node);
          push(nn->update_node_max);
        }
        ep.retire_raw(p, &free_pred_node);
      }
    }
  }
};

}  // namespace detail

inline void release(UpdateNode* n, EpochDomain& ep) {
  if (!n) return;
  detail::ReleaseQueue q;
  q.push(n);
  q.drain(ep);
}

inline void release(PredecessorNode* p, EpochDomain& ep) {
  if (!p) return;
  detail::ReleaseQueue q;
  q.push(p);
  q.drain(ep);
}

}  // namespace lftrie
