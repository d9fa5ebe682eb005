#pragma once

#include <cstdint>

namespace lftrie {

// Named points inside the algorithms where tests can pause or observe a
// thread. Production code passes no hooks; every call site degrades to a
// null check.
enum class Site : int {
  kDelTrieStart,            // delete walk entered, before the leaf checks
  kDelTrieBeforeFirstCas,   // before the first dNodePtr CAS of a level
  kDelTrieBeforeSecondCas,  // between the re-read and the retry CAS
  kDelTrieAfterCas,         // after a successful dNodePtr CAS, before the
                            // children re-check and threshold write
  kInsTrieAfterSetTarget,   // after target is set, before the re-check
  kRuallBeforeFirstHop,     // before the first atomic copy of a traversal
  kPredAfterRuall,          // announcement traversal done, position at -inf
  kUpdateBeforeActivate,    // announced in both lists, status still inactive
  kUpdateAfterActivate,     // immediately after the status write
  kPredAfterAnnounce,       // predecessor node linked into P-ALL
};

// Sites whose timestamps identify an operation's linearization.
enum class LinSite : int {
  kSearchLatestRead,  // Search: read of latest[x]
  kLatestCas,         // relaxed trie updates: successful CAS on latest[x]
  kActivate,          // full structure updates: status write
};

struct Hooks {
  virtual ~Hooks() = default;

  // Scheduling control; a and b carry site-specific context (height, key).
  virtual void sync(Site /*site*/, std::int64_t /*a*/ = 0,
                    std::int64_t /*b*/ = 0) {}

  // Trace emission. `op_tag` identifies the operation the event belongs to;
  // update nodes carry the tag of the operation that created them, so a
  // helper performing the step attributes it correctly.
  virtual void lin_point(LinSite /*site*/, std::uint64_t /*op_tag*/) {}

  // Tag for an operation starting on the calling thread (0 = untraced).
  virtual std::uint64_t op_tag() { return 0; }
};

}  // namespace lftrie
