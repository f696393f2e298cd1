#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nemasim/config.hpp"
#include "nemasim/io.hpp"
#include "nemasim/production.hpp"
#include "nemasim/threshold.hpp"
#include "nemasim/verification.hpp"

namespace nemasim {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitParse = 2,
  kExitInvalid = 3,
  kExitPopulationFloor = 4,
};

struct ScenarioResult {
  Trajectory<double> trajectory;
  ProductionSeries<double> production;
  std::optional<ThresholdReport<double>> thresholds;
  std::optional<InvariantAuditReport<double>> audit;
};

/// Validates and runs one configuration in memory.
ScenarioResult evaluate_scenario(const ScenarioConfig& cfg, bool with_analysis = true);
ThresholdReport<double> evaluate_thresholds(const ScenarioConfig& cfg);

int run_scenario(const std::filesystem::path& config_path);
int run_analysis(const std::filesystem::path& config_path);
/// `threads` = 0 reads NEMASIM_THREADS, falling back to the hardware count.
int compare_scenarios(const std::filesystem::path& baseline_path,
                      const std::vector<std::filesystem::path>& scenario_paths, unsigned threads = 0);
int run_verification(const std::string& suite, const std::filesystem::path& config_path);

std::vector<ComparisonRow> comparison_rows(const ScenarioConfig& baseline,
                                           const std::vector<ScenarioConfig>& scenarios, unsigned threads = 0);

/// Runs `body` and maps library exceptions to exit codes, printing the
/// message to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

unsigned thread_budget(unsigned requested);

}  // namespace nemasim
