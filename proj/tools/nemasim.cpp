#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nemasim/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Age-structured banana plant / burrowing nematode simulator"};
  app.require_subcommand(1);

  std::string config;
  auto* sim = app.add_subcommand("simulate", "run a scenario and write its time series, fields and reports");
  sim->add_option("config", config, "scenario file")->required();

  auto* analyze = app.add_subcommand("analyze", "threshold analysis only (thresholds.txt)");
  analyze->add_option("config", config, "scenario file")->required();

  std::string baseline;
  std::vector<std::string> others;
  unsigned threads = 0;
  auto* compare = app.add_subcommand("compare", "production losses of scenarios against a pest-free baseline");
  compare->add_option("baseline", baseline, "baseline scenario")->required();
  compare->add_option("scenarios", others, "scenarios to compare")->required();
  compare->add_option("-j,--threads", threads, "parallel runs (default: NEMASIM_THREADS or all cores)");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite: convergence, invariants or stability");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_option("config", config, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nemasim::kExitParse;
  }

  return nemasim::guarded(
      [&] {
        if (*sim) return nemasim::run_scenario(config);
        if (*analyze) return nemasim::run_analysis(config);
        if (*compare) {
          std::vector<std::filesystem::path> paths(others.begin(), others.end());
          return nemasim::compare_scenarios(baseline, paths, threads);
        }
        return nemasim::run_verification(suite, config);
      },
      std::cerr);
}
