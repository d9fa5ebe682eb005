#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "lftrie/keys.hpp"
#include "lftrie/nodes.hpp"

namespace lftrie::verify {

struct SweepReport {
  std::vector<std::string> violations;
  bool clean() const { return violations.empty(); }

  void flag(std::string msg) { violations.push_back(std::move(msg)); }
};

// Quiescent invariant sweep over all 2u-1 trie positions: with no active
// operations, every node's interpreted bit must equal the OR of the leaves
// below it (the two relaxation properties collapse to this), and each
// internal bit must equal the OR of its children's bits. For the full
// structure the announcement lists must also be back to sentinels only.
template <class Trie>
SweepReport quiescent_sweep(Trie& t) {
  SweepReport rep;
  const Key u = t.universe();
  std::vector<char> member(static_cast<std::size_t>(u), 0);
  for (Key x = 0; x < u; ++x) {
    const UpdateNode* head = t.debug_latest_head(x);
    member[static_cast<std::size_t>(x)] = head->kind == NodeKind::kIns;
  }
  // Suffix OR per heap slot, leaves up.
  std::vector<char> expected(static_cast<std::size_t>(2 * u), 0);
  for (Key x = 0; x < u; ++x)
    expected[static_cast<std::size_t>(u + x)] =
        member[static_cast<std::size_t>(x)];
  for (std::size_t i = static_cast<std::size_t>(u) - 1; i >= 1; --i)
    expected[i] = expected[2 * i] | expected[2 * i + 1];

  std::vector<char> actual(static_cast<std::size_t>(2 * u), 0);
  for (std::size_t i = 1; i < static_cast<std::size_t>(2 * u); ++i)
    actual[i] = static_cast<char>(t.debug_interpreted_bit(i));

  for (std::size_t i = 1; i < static_cast<std::size_t>(2 * u); ++i) {
    if (actual[i] != expected[i]) {
      std::ostringstream os;
      os << "slot " << i << ": interpreted bit " << int(actual[i])
         << ", expected " << int(expected[i]);
      rep.flag(os.str());
    }
  }
  for (std::size_t i = 1; i < static_cast<std::size_t>(u); ++i) {
    if (actual[i] != (actual[2 * i] | actual[2 * i + 1])) {
      std::ostringstream os;
      os << "slot " << i << ": bit is not the OR of its children";
      rep.flag(os.str());
    }
  }
  return rep;
}

template <class Trie>
SweepReport quiescent_sweep_full(Trie& t) {
  SweepReport rep = quiescent_sweep(t);
  if (!t.announcements_clear())
    rep.flag("announcement lists hold non-sentinel entries");
  return rep;
}

}  // namespace lftrie::verify
