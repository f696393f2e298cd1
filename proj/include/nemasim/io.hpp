#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nemasim/production.hpp"
#include "nemasim/state.hpp"
#include "nemasim/verification.hpp"

namespace nemasim {

/// Shortest decimal string that parses back to the same double ('.' always).
std::string format_number(double v);

void write_timeseries(const std::filesystem::path& path, const Trajectory<double>& traj,
                      const ProductionSeries<double>& production);
void write_fields(const std::filesystem::path& path, const Trajectory<double>& traj, bool infected);
void write_production(const std::filesystem::path& path, const ProductionSeries<double>& production);
void write_thresholds(const std::filesystem::path& path, const ThresholdReport<double>& report);
void write_audit(const std::filesystem::path& path, const InvariantAuditReport<double>& report);
void write_convergence(const std::filesystem::path& path, const ConvergenceReport<double>& report);
void write_stability(const std::filesystem::path& path, const StabilityExperiment<double>& experiment);

struct ComparisonRow {
  std::string scenario;
  double production = 0;
  double loss_pct = 0;
  // filled for scenarios with a control schedule, against the same scenario without it
  std::optional<double> production_no_control;
  std::optional<double> gain_pct;
  std::optional<double> gain_over_baseline_pct;
  std::optional<double> recovered_fraction_pct;
};

void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows);

/// Numeric matrix with a header row, as written by write_fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace nemasim
