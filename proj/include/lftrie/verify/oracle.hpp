#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "lftrie/keys.hpp"

namespace lftrie::verify {

enum class OpKind : std::uint8_t { kSearch, kInsert, kDelete, kPredecessor };

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kSearch: return "search";
    case OpKind::kInsert: return "insert";
    case OpKind::kDelete: return "delete";
    case OpKind::kPredecessor: return "predecessor";
  }
  return "?";
}

// Textbook dynamic set with predecessor; the ground truth every concurrent
// result is replayed against.
class SetOracle {
 public:
  using State = std::vector<Key>;

  std::int64_t apply(int code, Key arg) {
    switch (static_cast<OpKind>(code)) {
      case OpKind::kSearch:
        return s_.count(arg) ? 1 : 0;
      case OpKind::kInsert:
        s_.insert(arg);
        return 0;
      case OpKind::kDelete:
        s_.erase(arg);
        return 0;
      case OpKind::kPredecessor:
        return predecessor(arg);
    }
    return 0;
  }

  bool search(Key x) const { return s_.count(x) != 0; }

  Key predecessor(Key y) const {
    auto it = s_.lower_bound(y);
    if (it == s_.begin()) return kNoKey;
    return *std::prev(it);
  }

  void insert(Key x) { s_.insert(x); }
  void erase(Key x) { s_.erase(x); }

  const std::set<Key>& contents() const { return s_; }

  State snapshot() const { return State(s_.begin(), s_.end()); }

 private:
  std::set<Key> s_;
};

// Sequential spec of a bounded min-register, for checking concurrent
// histories of min_write / read against linearizability.
class MinRegisterOracle {
 public:
  using State = std::int64_t;
  static constexpr int kMinWrite = 0;
  static constexpr int kRead = 1;

  explicit MinRegisterOracle(std::int64_t bound) : v_(bound) {}

  std::int64_t apply(int code, std::int64_t arg) {
    if (code == kMinWrite) {
      if (arg < v_) v_ = arg;
      return 0;
    }
    return v_;
  }

  State snapshot() const { return v_; }

 private:
  std::int64_t v_;
};

// Sequential spec of a source register plus a copy cell: write_src(v) sets
// the source, copy() moves the source into the cell atomically, read_dst()
// returns the cell.
class CopyCellOracle {
 public:
  using State = std::pair<std::int64_t, std::int64_t>;
  static constexpr int kWriteSrc = 0;
  static constexpr int kCopy = 1;
  static constexpr int kReadDst = 2;

  CopyCellOracle(std::int64_t src, std::int64_t dst) : src_(src), dst_(dst) {}

  std::int64_t apply(int code, std::int64_t arg) {
    switch (code) {
      case kWriteSrc:
        src_ = arg;
        return 0;
      case kCopy:
        dst_ = src_;
        return 0;
      case kReadDst:
        return dst_;
    }
    return 0;
  }

  State snapshot() const { return {src_, dst_}; }

 private:
  std::int64_t src_;
  std::int64_t dst_;
};

}  // namespace lftrie::verify
