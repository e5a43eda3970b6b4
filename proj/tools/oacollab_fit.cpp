// Identifies a person's gain and field laws from logged individual sessions.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "oacollab/oacollab.hpp"

using namespace oacollab;

int main(int argc, char** argv) {
  CLI::App app{"Fit movement-model laws to trial logs"};
  std::vector<std::string> logs;
  std::string out;
  double tau = 1.0;
  bool include_failed = false;
  app.add_option("--log", logs, "trial log (.jsonl); repeatable")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "write the fit report here instead of stdout");
  app.add_option("--tau", tau, "temporal scaling used for every trial")->check(CLI::PositiveNumber);
  app.add_flag("--include-failed", include_failed, "also fit unsuccessful obstacle-free trials");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<fit::RecordedTrial> free, obstacle;
    for (const auto& path : logs) {
      const auto log = metrics::read_trial_log(path);
      for (auto& rec : metrics::recordings_from_log(log)) {
        if (rec.trial.obstacle) {
          obstacle.push_back(std::move(rec));
        } else if (rec.outcome.success || include_failed) {
          free.push_back(std::move(rec));
        }
      }
    }
    const auto report = fit::identify(free, obstacle, tau);
    const std::string text = fit::to_json(report).dump(2);
    if (out.empty()) {
      std::cout << text << "\n";
    } else {
      std::ofstream os(out);
      if (!(os << text << "\n")) throw Error(ErrorCode::IoError, "cannot write '" + out + "'");
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
