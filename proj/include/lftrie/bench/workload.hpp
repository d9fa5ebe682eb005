#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lftrie/lockfree_set.hpp"
#include "lftrie/step_counter.hpp"
#include "lftrie/verify/history.hpp"

namespace lftrie::bench {

enum class Dist { kUniform, kZipf, kClustered };

struct WorkloadConfig {
  int bits = 10;
  int threads = 1;
  std::uint64_t ops = 100000;
  double mix[4] = {0.6, 0.15, 0.15, 0.1};  // search insert delete predecessor
  Dist dist = Dist::kUniform;
  double zipf_theta = 0.99;
  std::uint64_t seed = 1;
  double prefill = 0.5;
  bool trace = false;

  // Empty string when valid.
  std::string validate() const {
    if (bits < 1 || bits > kMaxUniverseBits) return "bits out of range";
    if (threads < 1 || threads > 256) return "threads out of range";
    if (ops == 0) return "ops must be positive";
    double sum = mix[0] + mix[1] + mix[2] + mix[3];
    if (sum <= 0) return "mix weights must be positive";
    for (double m : mix)
      if (m < 0) return "mix weights must be non-negative";
    if (dist == Dist::kZipf && (zipf_theta <= 0 || zipf_theta >= 1))
      return "zipf theta must be in (0,1)";
    if (prefill < 0 || prefill > 1) return "prefill must be in [0,1]";
    return "";
  }
};

struct OpStats {
  std::uint64_t count = 0;
  double ops_per_s = 0;
  std::uint64_t p50_ns = 0;
  std::uint64_t p99_ns = 0;
  double mean_steps = 0;
};

struct RunStats {
  int threads = 0;
  int bits = 0;
  OpStats per_kind[4];
  std::uint64_t max_active = 0;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& k : per_kind) t += k.count;
    return t;
  }
};

inline const char* kind_name(int k) {
  static const char* names[4] = {"search", "insert", "delete", "predecessor"};
  return names[k];
}

namespace detail {

// Power-law sampler over {0..n-1} (Gray et al. incremental form); the zeta
// sums are computed once at setup in O(n).
class ZipfGen {
 public:
  ZipfGen(std::uint64_t n, double theta) : n_(n), theta_(theta) {
    double zeta2 = 0;
    for (std::uint64_t i = 1; i <= 2 && i <= n; ++i)
      zeta2 += 1.0 / std::pow(double(i), theta);
    zetan_ = 0;
    for (std::uint64_t i = 1; i <= n; ++i)
      zetan_ += 1.0 / std::pow(double(i), theta);
    alpha_ = 1.0 / (1.0 - theta);
    eta_ = (1.0 - std::pow(2.0 / double(n), 1.0 - theta)) /
           (1.0 - zeta2 / zetan_);
  }

  std::uint64_t next(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    double uz = u * zetan_;
    if (uz < 1.0) return 0;
    if (uz < 1.0 + std::pow(0.5, theta_)) return 1;
    auto v = static_cast<std::uint64_t>(
        double(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_));
    return v >= n_ ? n_ - 1 : v;
  }

 private:
  std::uint64_t n_;
  double theta_;
  double zetan_;
  double alpha_;
  double eta_;
};

struct KeyGen {
  Dist dist;
  Key u;
  const ZipfGen* zipf;
  Key center;

  Key next(std::mt19937_64& rng) {
    switch (dist) {
      case Dist::kUniform:
        return static_cast<Key>(rng() % static_cast<std::uint64_t>(u));
      case Dist::kZipf:
        return static_cast<Key>(zipf->next(rng));
      case Dist::kClustered: {
        // Geometric spread around a per-thread hot spot.
        std::geometric_distribution<int> g(0.25);
        Key off = g(rng);
        Key k = (rng() & 1) ? center + off : center - off;
        k %= u;
        if (k < 0) k += u;
        return k;
      }
    }
    return 0;
  }
};

}  // namespace detail

inline RunStats bench_run(const WorkloadConfig& cfg) {
  const Key u = universe_size(cfg.bits);
  verify::Recorder recorder;
  BinaryTrieSet set(cfg.bits, cfg.trace ? &recorder : nullptr);

  {  // deterministic prefill to the requested density
    std::mt19937_64 rng(cfg.seed ^ 0xc0ffee);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (Key x = 0; x < u; ++x)
      if (uni(rng) < cfg.prefill) set.insert(x);
  }

  std::optional<detail::ZipfGen> zipf;
  if (cfg.dist == Dist::kZipf)
    zipf.emplace(static_cast<std::uint64_t>(u), cfg.zipf_theta);

  struct PerThread {
    std::uint64_t count[4] = {0, 0, 0, 0};
    std::uint64_t steps[4] = {0, 0, 0, 0};
    std::vector<std::uint32_t> lat[4];
  };
  std::vector<PerThread> acc(static_cast<std::size_t>(cfg.threads));
  std::atomic<std::uint64_t> active{0};
  std::atomic<std::uint64_t> max_active{0};

  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> workers;
  for (int t = 0; t < cfg.threads; ++t) {
    std::uint64_t quota = cfg.ops / cfg.threads +
                          (static_cast<std::uint64_t>(t) <
                                   cfg.ops % cfg.threads
                               ? 1
                               : 0);
    workers.emplace_back([&, t, quota] {
      std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + t + 1);
      detail::KeyGen keys{cfg.dist, u, zipf ? &*zipf : nullptr,
                          static_cast<Key>(rng() % static_cast<std::uint64_t>(u))};
      PerThread& mine = acc[static_cast<std::size_t>(t)];
      StepCounter counter;
      ScopedStepCounter scope(counter);
      const double total_mix =
          cfg.mix[0] + cfg.mix[1] + cfg.mix[2] + cfg.mix[3];
      for (std::uint64_t i = 0; i < quota; ++i) {
        double r = std::uniform_real_distribution<double>(0, total_mix)(rng);
        int kind = 0;
        for (; kind < 3; ++kind) {
          if (r < cfg.mix[kind]) break;
          r -= cfg.mix[kind];
        }
        Key x = keys.next(rng);
        std::uint64_t a = active.fetch_add(1, std::memory_order_acq_rel) + 1;
        std::uint64_t m = max_active.load(std::memory_order_relaxed);
        while (a > m &&
               !max_active.compare_exchange_weak(m, a,
                                                 std::memory_order_acq_rel)) {
        }
        counter.reset();
        auto s0 = std::chrono::steady_clock::now();
        switch (kind) {
          case 0: set.search(x); break;
          case 1: set.insert(x); break;
          case 2: set.remove(x); break;
          case 3: set.predecessor(x); break;
        }
        auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - s0)
                      .count();
        active.fetch_sub(1, std::memory_order_acq_rel);
        ++mine.count[kind];
        mine.steps[kind] += counter.reads + counter.writes + counter.cas;
        mine.lat[kind].push_back(
            static_cast<std::uint32_t>(std::min<std::int64_t>(ns, UINT32_MAX)));
      }
    });
  }
  for (auto& w : workers) w.join();
  double elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

  RunStats stats;
  stats.threads = cfg.threads;
  stats.bits = cfg.bits;
  stats.max_active = max_active.load();
  for (int k = 0; k < 4; ++k) {
    std::uint64_t count = 0, steps = 0;
    std::vector<std::uint32_t> lat;
    for (auto& a : acc) {
      count += a.count[k];
      steps += a.steps[k];
      lat.insert(lat.end(), a.lat[k].begin(), a.lat[k].end());
    }
    OpStats& o = stats.per_kind[k];
    o.count = count;
    o.ops_per_s = elapsed > 0 ? double(count) / elapsed : 0;
    o.mean_steps = count ? double(steps) / double(count) : 0;
    if (!lat.empty()) {
      auto nth = [&](double q) {
        std::size_t idx = static_cast<std::size_t>(q * double(lat.size() - 1));
        std::nth_element(lat.begin(), lat.begin() + idx, lat.end());
        return static_cast<std::uint64_t>(lat[idx]);
      };
      o.p50_ns = nth(0.50);
      o.p99_ns = nth(0.99);
    }
  }
  return stats;
}

// ---- emitters --------------------------------------------------------
// CSV column order is a contract: threads,bits,op,count,ops_per_s,p50_ns,
// p99_ns,mean_steps; one row per operation kind.

inline void emit_csv(const RunStats& s, std::ostream& os) {
  os << "threads,bits,op,count,ops_per_s,p50_ns,p99_ns,mean_steps\n";
  for (int k = 0; k < 4; ++k) {
    const OpStats& o = s.per_kind[k];
    os << s.threads << ',' << s.bits << ',' << kind_name(k) << ',' << o.count
       << ',' << o.ops_per_s << ',' << o.p50_ns << ',' << o.p99_ns << ','
       << o.mean_steps << '\n';
  }
}

inline std::optional<RunStats> parse_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) ||
      header != "threads,bits,op,count,ops_per_s,p50_ns,p99_ns,mean_steps")
    return std::nullopt;
  RunStats s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string op;
    OpStats o;
    int threads, bits;
    if (!(ls >> threads >> bits >> op >> o.count >> o.ops_per_s >> o.p50_ns >>
          o.p99_ns >> o.mean_steps))
      return std::nullopt;
    s.threads = threads;
    s.bits = bits;
    for (int k = 0; k < 4; ++k)
      if (op == kind_name(k)) s.per_kind[k] = o;
  }
  return s;
}

}  // namespace lftrie::bench
