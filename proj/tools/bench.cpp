// Workload runner for the concurrent trie set: configurable operation mix,
// key distribution and thread count; emits per-operation throughput, latency
// percentiles and shared-memory step counts as CSV or JSON.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lftrie/bench/workload.hpp"

using lftrie::bench::Dist;
using lftrie::bench::RunStats;
using lftrie::bench::WorkloadConfig;

namespace {

bool parse_dist(const std::string& text, WorkloadConfig& cfg) {
  if (text == "uniform") {
    cfg.dist = Dist::kUniform;
    return true;
  }
  if (text == "clustered") {
    cfg.dist = Dist::kClustered;
    return true;
  }
  if (text.rfind("zipf", 0) == 0) {
    cfg.dist = Dist::kZipf;
    auto colon = text.find(':');
    if (colon != std::string::npos) {
      try {
        cfg.zipf_theta = std::stod(text.substr(colon + 1));
      } catch (...) {
        return false;
      }
    }
    return true;
  }
  return false;
}

bool parse_mix(const std::string& text, WorkloadConfig& cfg) {
  double m[4];
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf:%lf", &m[0], &m[1], &m[2],
                  &m[3]) != 4)
    return false;
  for (int i = 0; i < 4; ++i) cfg.mix[i] = m[i];
  return true;
}

void emit_json(const RunStats& s, std::ostream& os) {
  nlohmann::json j;
  j["threads"] = s.threads;
  j["bits"] = s.bits;
  j["max_active"] = s.max_active;
  j["ops"] = nlohmann::json::array();
  for (int k = 0; k < 4; ++k) {
    const auto& o = s.per_kind[k];
    j["ops"].push_back({{"op", lftrie::bench::kind_name(k)},
                        {"count", o.count},
                        {"ops_per_s", o.ops_per_s},
                        {"p50_ns", o.p50_ns},
                        {"p99_ns", o.p99_ns},
                        {"mean_steps", o.mean_steps}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent binary-trie set benchmark"};
  WorkloadConfig cfg;
  std::string mix = "0.6:0.15:0.15:0.1";
  std::string dist = "uniform";
  std::string format = "csv";

  app.add_option("--bits", cfg.bits, "Universe bits (u = 2^bits)")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads")
      ->capture_default_str();
  app.add_option("--ops", cfg.ops, "Total operations")->capture_default_str();
  app.add_option("--mix", mix, "Weights search:insert:delete:predecessor")
      ->capture_default_str();
  app.add_option("--dist", dist,
                 "Key distribution: uniform | zipf[:theta] | clustered")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Stream seed")->capture_default_str();
  app.add_option("--format", format, "Output format: csv | json")
      ->capture_default_str();
  app.add_option("--prefill", cfg.prefill, "Prefill density before timing")
      ->capture_default_str();
  app.add_flag("--trace", cfg.trace,
               "Enable the verification trace hooks (slower)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!parse_mix(mix, cfg)) {
    std::cerr << "bad --mix, expected s:i:d:p\n";
    return 2;
  }
  if (!parse_dist(dist, cfg)) {
    std::cerr << "bad --dist, expected uniform | zipf[:theta] | clustered\n";
    return 2;
  }
  if (format != "csv" && format != "json") {
    std::cerr << "bad --format, expected csv | json\n";
    return 2;
  }
  if (std::string err = cfg.validate(); !err.empty()) {
    std::cerr << err << '\n';
    return 2;
  }

  RunStats stats = lftrie::bench::bench_run(cfg);
  if (stats.total() != cfg.ops) {
    std::cerr << "lost operations: issued " << cfg.ops << ", counted "
              << stats.total() << '\n';
    return 1;
  }
  if (format == "csv")
    lftrie::bench::emit_csv(stats, std::cout);
  else
    emit_json(stats, std::cout);
  return 0;
}
