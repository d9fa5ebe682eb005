#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lftrie/verify/history.hpp"
#include "lftrie/verify/oracle.hpp"

namespace lftrie::verify {

inline constexpr std::uint64_t kPendingTs = ~std::uint64_t{0};

// One operation as seen by the checker. `code`/`arg` feed the sequential
// model; mutators that never responded may be linearized or dropped, pure
// operations without a response are dropped.
struct GenOp {
  std::uint64_t id = 0;
  int code = 0;
  std::int64_t arg = 0;
  std::int64_t result = 0;
  bool has_result = false;
  bool is_mutator = false;
  std::uint64_t invoke_ts = 0;
  std::uint64_t respond_ts = kPendingTs;
};

struct CheckResult {
  bool ok = false;
  bool malformed = false;
  std::string message;
  std::vector<std::size_t> witness;  // indices into the op vector, in order
};

// Wing&Gong-style exhaustive search with memoized (chosen-set, state)
// pruning. An operation may be scheduled next only if no unscheduled
// operation responded before it was invoked. Intended for windows of at
// most ~14 completed operations.
template <class Model>
CheckResult check_linearizable(const std::vector<GenOp>& ops, Model initial) {
  CheckResult res;
  if (ops.size() > 32) {
    res.malformed = true;
    res.message = "history too large for exhaustive checking";
    return res;
  }
  for (const GenOp& op : ops) {
    if (op.respond_ts != kPendingTs && op.respond_ts <= op.invoke_ts) {
      res.malformed = true;
      res.message = "response precedes invocation";
      return res;
    }
  }

  const std::uint32_t n = static_cast<std::uint32_t>(ops.size());
  std::uint32_t must_mask = 0;  // completed ops: all must be scheduled
  std::uint32_t cand_mask = 0;  // completed ops plus pending mutators
  for (std::uint32_t i = 0; i < n; ++i) {
    if (ops[i].respond_ts != kPendingTs) {
      must_mask |= 1u << i;
      cand_mask |= 1u << i;
    } else if (ops[i].is_mutator) {
      cand_mask |= 1u << i;
    }
  }

  using State = typename Model::State;
  std::set<std::pair<std::uint32_t, State>> failed;
  std::vector<std::size_t> order;

  auto dfs = [&](auto&& self, std::uint32_t mask, const Model& model) -> bool {
    if ((mask & must_mask) == must_mask) return true;
    auto key = std::make_pair(mask, model.snapshot());
    if (failed.count(key)) return false;
    std::uint64_t min_respond = kPendingTs;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) continue;
      if ((must_mask & (1u << i)) == 0) continue;
      min_respond = std::min(min_respond, ops[i].respond_ts);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t bit = 1u << i;
      if ((mask & bit) || (cand_mask & bit) == 0) continue;
      if (ops[i].invoke_ts >= min_respond) continue;
      Model next = model;
      std::int64_t r = next.apply(ops[i].code, ops[i].arg);
      if (ops[i].has_result && r != ops[i].result) continue;
      order.push_back(i);
      if (self(self, mask | bit, next)) return true;
      order.pop_back();
    }
    failed.insert(std::move(key));
    return false;
  };

  if (!dfs(dfs, 0, initial)) {
    res.ok = false;
    res.message = "no linearization found";
    return res;
  }

  // Re-verify the witness by an independent replay.
  Model replay = initial;
  std::uint64_t prev_ts = 0;
  std::set<std::size_t> seen;
  for (std::size_t idx : order) {
    const GenOp& op = ops[idx];
    (void)prev_ts;
    std::int64_t r = replay.apply(op.code, op.arg);
    if (op.has_result && r != op.result) {
      res.message = "witness failed replay";
      return res;
    }
    if (!seen.insert(idx).second) {
      res.message = "witness repeats an operation";
      return res;
    }
  }
  // Real-time order: if a responds before b invokes, a must come first.
  for (std::size_t ai = 0; ai < order.size(); ++ai) {
    for (std::size_t bi = ai + 1; bi < order.size(); ++bi) {
      const GenOp& first = ops[order[ai]];
      const GenOp& later = ops[order[bi]];
      if (later.respond_ts != kPendingTs &&
          later.respond_ts < first.invoke_ts) {
        res.message = "witness violates real-time order";
        return res;
      }
    }
  }
  res.ok = true;
  res.witness = order;
  return res;
}

// Brute-force reference: enumerates every real-time-respecting permutation
// of the completed operations and every subset/placement of pending
// mutators. Exponential; for cross-checking the searcher on tiny histories.
template <class Model>
bool brute_force_linearizable(const std::vector<GenOp>& ops, Model initial) {
  const std::size_t n = ops.size();
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self, std::size_t done_completed,
                 std::size_t total_completed, const Model& model) -> bool {
    if (done_completed == total_completed) return true;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      bool completed = ops[i].respond_ts != kPendingTs;
      if (!completed && !ops[i].is_mutator) continue;
      bool legal = true;
      for (std::size_t j = 0; j < n && legal; ++j) {
        if (used[j] || j == i) continue;
        if (ops[j].respond_ts != kPendingTs &&
            ops[j].respond_ts < ops[i].invoke_ts)
          legal = false;  // j finished before i started, must go first
      }
      if (!legal) continue;
      Model next = model;
      std::int64_t r = next.apply(ops[i].code, ops[i].arg);
      if (ops[i].has_result && r != ops[i].result) continue;
      used[i] = true;
      if (self(self, done_completed + (completed ? 1 : 0), total_completed,
               next))
        return true;
      used[i] = false;
    }
    return false;
  };
  std::size_t total_completed = 0;
  for (const GenOp& op : ops)
    if (op.respond_ts != kPendingTs) ++total_completed;
  return rec(rec, 0, total_completed, initial);
}

// Builds checker input from recorded set-operation events.
// Returns nullopt on malformed histories.
inline std::optional<std::vector<GenOp>> ops_from_events(
    const std::vector<Event>& events, std::string* error = nullptr) {
  std::map<std::uint64_t, GenOp> by_id;
  for (const Event& e : events) {
    if (e.phase == Phase::kLin) continue;
    GenOp& op = by_id[e.op_id];
    if (e.phase == Phase::kInvoke) {
      if (op.invoke_ts != 0) {
        if (error) *error = "duplicate invocation";
        return std::nullopt;
      }
      op.id = e.op_id;
      op.code = static_cast<int>(e.kind);
      op.arg = e.arg;
      op.invoke_ts = e.ts;
      op.is_mutator =
          e.kind == OpKind::kInsert || e.kind == OpKind::kDelete;
    } else {
      if (op.respond_ts != kPendingTs) {
        if (error) *error = "duplicate response";
        return std::nullopt;
      }
      op.respond_ts = e.ts;
      op.result = e.result;
      op.has_result = e.has_result;
    }
  }
  std::vector<GenOp> ops;
  for (auto& [id, op] : by_id) {
    if (op.invoke_ts == 0) {
      if (error) *error = "response without invocation";
      return std::nullopt;
    }
    ops.push_back(op);
  }
  return ops;
}

}  // namespace lftrie::verify
