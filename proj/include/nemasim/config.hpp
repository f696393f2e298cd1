#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "nemasim/parameters.hpp"
#include "nemasim/solver.hpp"
#include "nemasim/state.hpp"
#include "nemasim/verification.hpp"

namespace nemasim {

/// Malformed or incomplete configuration text. The message carries
/// "file:line:" when the problem can be pinned to a line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialProfile { SpikeAtZero, SteadyState, File };

struct InitialSpec {
  InitialProfile kind = InitialProfile::SpikeAtZero;
  double spike = 100;
  double N_F0 = 0;
  double N_I0 = 0;
  std::filesystem::path file;  // columns a,S,I; ages must cover the grid
};

struct AnalysisOptions {
  bool thresholds = true;
  bool audit = true;
  long quadrature_intervals = 3000;
};

struct VerificationOptions {
  int refinements = 4;
  double h_coarsest = 2;
};

struct ScenarioConfig {
  std::filesystem::path source;
  ModelParameters<double> params;
  SolverConfig<double> solver;
  std::optional<ControlSchedule<double>> control;
  InitialSpec initial;
  AnalysisOptions analysis;
  VerificationOptions verification;
  std::filesystem::path output_dir = "out";
};

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& source = "<string>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// S0 and I0 as functions of age, and the initial nematode counts.
InitialData<double> initial_data(const ScenarioConfig& cfg);
DiscreteState<double> make_initial_state(const ScenarioConfig& cfg, double h);

}  // namespace nemasim
