#include "nemasim/scenario.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace nemasim {
namespace {

void check_runnable(const ScenarioConfig& cfg) {
  validate_parameters(cfg.params);
  if (cfg.control) cfg.control->validate();
  grid_cells(cfg.params.a_max, cfg.solver.h);
  cfg.solver.steps();
}

}  // namespace

ThresholdReport<double> evaluate_thresholds(const ScenarioConfig& cfg) {
  validate_parameters(cfg.params);
  const auto grid = threshold_grid(cfg.params, static_cast<Eigen::Index>(cfg.analysis.quadrature_intervals));
  return analyze_thresholds(cfg.params, grid);
}

ScenarioResult evaluate_scenario(const ScenarioConfig& cfg, bool with_analysis) {
  check_runnable(cfg);
  const auto profiles = sample_profiles(cfg.solver.h, cfg.params);
  const auto initial = make_initial_state(cfg, cfg.solver.h);
  ScenarioResult r;
  r.trajectory = simulate(initial, profiles, cfg.params, cfg.control, cfg.solver);
  r.production = cumulative_production(r.trajectory, cfg.params);
  if (with_analysis && cfg.analysis.thresholds) r.thresholds = evaluate_thresholds(cfg);
  if (with_analysis && cfg.analysis.audit) r.audit = invariant_audit(r.trajectory, cfg.params);
  return r;
}

int run_scenario(const std::filesystem::path& config_path) {
  const auto cfg = load_config(config_path);
  const auto r = evaluate_scenario(cfg);
  const auto& dir = cfg.output_dir;
  write_timeseries(dir / "timeseries.csv", r.trajectory, r.production);
  write_fields(dir / "fields_S.csv", r.trajectory, false);
  write_fields(dir / "fields_I.csv", r.trajectory, true);
  write_production(dir / "production.csv", r.production);
  if (r.thresholds) write_thresholds(dir / "thresholds.txt", *r.thresholds);
  if (r.audit) write_audit(dir / "audit.txt", *r.audit);
  std::cout << "final cumulative production " << format_number(r.production.final()) << '\n';
  if (r.thresholds)
    std::cout << "N = " << format_number(r.thresholds->N_basic) << " (" << to_string(r.thresholds->verdict) << ")\n";
  return kExitOk;
}

int run_analysis(const std::filesystem::path& config_path) {
  const auto cfg = load_config(config_path);
  const auto r = evaluate_thresholds(cfg);
  write_thresholds(cfg.output_dir / "thresholds.txt", r);
  std::cout << "N = " << format_number(r.N_basic) << ", lambda* = " << format_number(r.lambda_star)
            << ", N0 = " << format_number(r.N0_threshold) << ", verdict " << to_string(r.verdict) << '\n';
  return kExitOk;
}

unsigned thread_budget(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NEMASIM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ComparisonRow> comparison_rows(const ScenarioConfig& baseline, const std::vector<ScenarioConfig>& scenarios,
                                           unsigned threads) {
  auto same_grid = [&](const ScenarioConfig& c) {
    return c.solver.h == baseline.solver.h && c.solver.T == baseline.solver.T &&
           c.params.a_max == baseline.params.a_max;
  };
  for (const auto& c : scenarios)
    if (!same_grid(c))
      throw ConfigurationError(c.source.string() + ": h, T and a_max must match the baseline " +
                               baseline.source.string());

  // every controlled scenario also runs without its schedule
  std::vector<ScenarioConfig> jobs{baseline};
  std::vector<std::optional<std::size_t>> twin(scenarios.size());
  for (const auto& c : scenarios) jobs.push_back(c);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (!scenarios[i].control) continue;
    ScenarioConfig uncontrolled = scenarios[i];
    uncontrolled.control.reset();
    twin[i] = jobs.size();
    jobs.push_back(uncontrolled);
  }
  for (auto& j : jobs) j.solver.record_every = std::max<std::int64_t>(1, j.solver.steps());
  for (const auto& j : jobs) check_runnable(j);

  std::vector<double> production(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        production[i] = evaluate_scenario(jobs[i], false).production.final();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(thread_budget(threads), static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ComparisonRow> rows;
  auto row = [&](const ScenarioConfig& c, double value, std::optional<double> uncontrolled) {
    const auto loss = loss_report<double>(production[0], uncontrolled.value_or(value),
                                          uncontrolled ? std::optional<double>(value) : std::nullopt);
    ComparisonRow r;
    r.scenario = c.source.stem().string();
    r.production = value;
    r.loss_pct = uncontrolled ? *loss.control_loss_pct : loss.loss_pct;
    if (uncontrolled) {
      r.production_no_control = uncontrolled;
      r.gain_pct = loss.gain_pct;
      r.gain_over_baseline_pct = loss.gain_over_baseline_pct;
      r.recovered_fraction_pct = loss.recovered_fraction_pct;
    }
    rows.push_back(r);
  };
  row(baseline, production[0], std::nullopt);
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    row(scenarios[i], production[i + 1],
        twin[i] ? std::optional<double>(production[*twin[i]]) : std::nullopt);
  return rows;
}

int compare_scenarios(const std::filesystem::path& baseline_path, const std::vector<std::filesystem::path>& scenario_paths,
                      unsigned threads) {
  const auto baseline = load_config(baseline_path);
  std::vector<ScenarioConfig> scenarios;
  for (const auto& p : scenario_paths) scenarios.push_back(load_config(p));
  const auto rows = comparison_rows(baseline, scenarios, threads);
  write_comparison(baseline.output_dir / "comparison.csv", rows);
  for (const auto& r : rows) {
    std::cout << r.scenario << ": production " << format_number(r.production) << ", loss "
              << format_number(r.loss_pct) << '%';
    if (r.gain_pct) std::cout << ", gain " << format_number(*r.gain_pct) << '%';
    std::cout << '\n';
  }
  return kExitOk;
}

int run_verification(const std::string& suite, const std::filesystem::path& config_path) {
  if (suite != "convergence" && suite != "invariants" && suite != "stability")
    throw ParseError("unknown verification suite '" + suite + "' (expected convergence, invariants or stability)");
  const auto cfg = load_config(config_path);
  check_runnable(cfg);
  const auto& dir = cfg.output_dir;

  if (suite == "convergence") {
    const auto r = convergence_order(cfg.params, cfg.solver, initial_data(cfg), cfg.verification.refinements,
                                     cfg.verification.h_coarsest);
    write_convergence(dir / "convergence.csv", r);
    const bool ok = r.exact || (r.order >= 0.8 && r.order <= 1.2);
    std::cout << "convergence against " << r.reference << ": order " << format_number(r.order)
              << (r.monotone ? "" : " (errors not monotone)") << (ok ? " PASS" : " FAIL") << '\n';
    return ok ? kExitOk : kExitCheckFailed;
  }
  if (suite == "invariants") {
    ScenarioConfig c = cfg;
    c.analysis.thresholds = false;
    c.analysis.audit = true;
    const auto r = evaluate_scenario(c);
    write_audit(dir / "audit.txt", *r.audit);
    std::cout << "invariants: " << r.audit->violation_count() << " violation(s) over " << r.audit->steps.size()
              << " steps" << (r.audit->passed() ? " PASS" : " FAIL") << '\n';
    return r.audit->passed() ? kExitOk : kExitCheckFailed;
  }
  const auto grid = threshold_grid(cfg.params, static_cast<Eigen::Index>(cfg.analysis.quadrature_intervals));
  const auto e = stability_experiment(cfg.params, cfg.solver, make_initial_state(cfg, cfg.solver.h), grid, cfg.control);
  write_stability(dir / "stability.txt", e);
  std::cout << "stability: N = " << format_number(e.N_basic) << ", observed " << to_string(e.outcome)
            << (e.agrees ? " PASS" : " FAIL") << '\n';
  return e.agrees ? kExitOk : kExitCheckFailed;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const UnsupportedCaseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const PopulationFloorError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPopulationFloor;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace nemasim
