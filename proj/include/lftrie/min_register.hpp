#pragma once

#include <atomic>
#include <bit>
#include <cassert>
#include <cstdint>

#include "lftrie/step_counter.hpp"

namespace lftrie {

// Bounded min-register: holds a value in {0..bound}, initially bound, and
// supports wait-free MinWrite and Read.
//
// The primary representation is a thermometer encoding, value v stored as the
// word 2^v - 1, so MinWrite is a single fetch-AND and Read is a popcount:
// (2^v - 1) & (2^w - 1) == 2^min(v,w) - 1. That needs bound <= 63; wider
// registers fall back to a CAS loop on the plain value. The CAS variant is
// also kept as an independent reference implementation for cross-checking.
class CasMinRegister {
 public:
  explicit CasMinRegister(std::uint32_t bound) : bound_(bound), value_(bound) {}

  void min_write(std::uint64_t v) {
    assert(v <= bound_ && "min-register write out of range");
    std::uint64_t cur = value_.load(std::memory_order_seq_cst);
    while (v < cur) {
      if (value_.compare_exchange_weak(cur, v, std::memory_order_seq_cst))
        break;
    }
    steps::on_write();
  }

  std::uint64_t read() const {
    steps::on_read();
    return value_.load(std::memory_order_seq_cst);
  }

  std::uint32_t bound() const { return bound_; }

 private:
  std::uint32_t bound_;
  std::atomic<std::uint64_t> value_;
};

class MinRegister {
 public:
  explicit MinRegister(std::uint32_t bound)
      : bound_(bound), thermo_(bound <= 63), bits_(initial_bits(bound)) {}

  void min_write(std::uint64_t v) {
    assert(v <= bound_ && "min-register write out of range");
    if (thermo_) {
      bits_.fetch_and(encode(v), std::memory_order_seq_cst);
      steps::on_write();
    } else {
      std::uint64_t cur = bits_.load(std::memory_order_seq_cst);
      while (v < cur) {
        if (bits_.compare_exchange_weak(cur, v, std::memory_order_seq_cst))
          break;
      }
      steps::on_write();
    }
  }

  std::uint64_t read() const {
    steps::on_read();
    std::uint64_t w = bits_.load(std::memory_order_seq_cst);
    return thermo_ ? static_cast<std::uint64_t>(std::popcount(w)) : w;
  }

  std::uint32_t bound() const { return bound_; }

 private:
  static std::uint64_t encode(std::uint64_t v) {
    return v >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << v) - 1;
  }
  static std::uint64_t initial_bits(std::uint32_t bound) {
    return bound <= 63 ? encode(bound) : bound;
  }

  std::uint32_t bound_;
  bool thermo_;
  std::atomic<std::uint64_t> bits_;
};

}  // namespace lftrie
