#pragma once

#include <cstdint>
#include <limits>

namespace lftrie {

// Keys live in {0 .. u-1} with u = 2^b. The extended domain adds the two
// list sentinels and -1, which Predecessor returns when no key qualifies.
using Key = std::int64_t;

inline constexpr Key kNegInf = std::numeric_limits<Key>::min();
inline constexpr Key kPosInf = std::numeric_limits<Key>::max();
inline constexpr Key kNoKey = -1;

inline constexpr int kMaxUniverseBits = 24;

constexpr Key universe_size(int bits) { return Key{1} << bits; }

}  // namespace lftrie
