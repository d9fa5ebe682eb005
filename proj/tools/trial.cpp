// Runs one randomized concurrent trial from a text config and reports the
// linearizability verdict plus the quiescent sweep result. The recorded
// history is dumped as `ts thread op arg result phase` lines.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lftrie/verify/trial.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Concurrent trie-set trial runner"};
  std::string config_path;
  std::string history_path;
  app.add_option("config", config_path,
                 "Trial config file (key value lines); '-' for stdin")
      ->required();
  app.add_option("--history", history_path, "Write the history dump here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  lftrie::verify::TrialConfig cfg;
  try {
    if (config_path == "-") {
      cfg = lftrie::verify::TrialConfig::parse(std::cin);
    } else {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open " << config_path << '\n';
        return 2;
      }
      cfg = lftrie::verify::TrialConfig::parse(in);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  lftrie::verify::TrialResult r = lftrie::verify::run_trial(cfg);
  if (!history_path.empty()) {
    std::ofstream out(history_path);
    lftrie::verify::dump_history(r.history, out);
  }
  std::cout << "windows " << r.windows << '\n'
            << "linearizable " << (r.linearizable ? "yes" : "no") << '\n'
            << "sweep " << (r.sweep_clean ? "clean" : "violated") << '\n';
  if (!r.ok()) {
    std::cout << "failure " << r.failure << '\n';
    return 1;
  }
  return 0;
}
