#include "nemasim/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nemasim/config.hpp"

namespace nemasim {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf.data(), ptr);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

}  // namespace

void write_timeseries(const std::filesystem::path& path, const Trajectory<double>& traj,
                      const ProductionSeries<double>& production) {
  auto out = open_output(path);
  out << "t,N_F,N_I,P,B,C,D,u,P_c,P_d\n";
  const auto per_day = detail::steps_per_day(traj.h);
  const std::int64_t N = traj.step_count();
  for (std::int64_t n = 0; n <= N; ++n) {
    if (n % traj.record_every != 0 && n != N) continue;
    const auto& r = traj.steps[static_cast<std::size_t>(n)];
    std::optional<double> daily;
    // production over the trailing day (t - 1, t]
    if (per_day && n >= *per_day) daily = production.cumulative[n] - production.cumulative[n - *per_day];
    out << format_number(r.t) << ',' << format_number(r.N_F) << ',' << format_number(r.N_I) << ','
        << format_number(r.aggregates.P) << ',' << format_number(r.aggregates.B) << ','
        << format_number(r.aggregates.C) << ',' << format_number(r.aggregates.D) << ',' << format_number(r.u)
        << ',' << format_number(production.cumulative[n]) << ',' << cell(daily) << '\n';
  }
  close_checked(out, path);
}

void write_fields(const std::filesystem::path& path, const Trajectory<double>& traj, bool infected) {
  auto out = open_output(path);
  const Eigen::Index M = traj.initial().cells();
  for (Eigen::Index j = 0; j <= M; ++j) out << (j ? "," : "") << format_number(static_cast<double>(j) * traj.h);
  out << '\n';
  for (const auto& s : traj.states) {
    const auto& v = infected ? s.I : s.S;
    for (Eigen::Index j = 0; j <= M; ++j) out << (j ? "," : "") << format_number(v[j]);
    out << '\n';
  }
  close_checked(out, path);
}

void write_production(const std::filesystem::path& path, const ProductionSeries<double>& production) {
  auto out = open_output(path);
  out << "t,P_c,P_d\n";
  if (const auto per_day = detail::steps_per_day(production.h)) {
    const Eigen::Index days = (production.cumulative.size() - 1) / *per_day;
    for (Eigen::Index D = 0; D <= days; ++D)
      out << D << ',' << format_number(production.cumulative[D * *per_day]) << ','
          << (D ? format_number(production.daily[D - 1]) : std::string()) << '\n';
  } else {
    for (Eigen::Index n = 0; n < production.cumulative.size(); ++n)
      out << format_number(static_cast<double>(n) * production.h) << ','
          << format_number(production.cumulative[n]) << ",\n";
  }
  close_checked(out, path);
}

void write_thresholds(const std::filesystem::path& path, const ThresholdReport<double>& r) {
  auto out = open_output(path);
  out << "sigma = " << format_number(r.sigma) << '\n'
      << "S0_norm = " << format_number(r.S0_norm) << '\n'
      << "N = " << format_number(r.N_basic) << '\n'
      << "lambda_star = " << format_number(r.lambda_star) << '\n'
      << "N0 = " << format_number(r.N0_threshold) << '\n'
      << "renewal_ratio = " << format_number(r.renewal_ratio) << '\n'
      << "verdict = " << to_string(r.verdict) << '\n';
  close_checked(out, path);
}

void write_audit(const std::filesystem::path& path, const InvariantAuditReport<double>& r) {
  auto out = open_output(path);
  const auto& b = r.bounds;
  out << "K0 = " << format_number(b.K0) << '\n'
      << "K1 = " << format_number(b.K1) << '\n'
      << "K2 = " << format_number(b.K2) << '\n'
      << "B_max = " << format_number(b.B_max) << '\n'
      << "C_max = " << format_number(b.C_max) << '\n'
      << "D_max = " << format_number(b.D_max) << '\n'
      << "steps = " << r.steps.size() << '\n'
      << "violations = " << r.violation_count() << '\n'
      << "first_violation = " << (r.first_violation ? std::to_string(*r.first_violation) : "none") << '\n'
      << "result = " << (r.passed() ? "pass" : "fail") << '\n';
  for (const auto& s : r.steps) {
    if (s.ok()) continue;
    out << "violation n=" << s.n << ':' << (s.nonnegative ? "" : " negative") << (s.plants_bounded ? "" : " K0")
        << (s.population_bounded ? "" : " K1") << (s.nematodes_bounded ? "" : " K2")
        << (s.aggregates_bounded ? "" : " aggregates") << '\n';
  }
  close_checked(out, path);
}

void write_convergence(const std::filesystem::path& path, const ConvergenceReport<double>& r) {
  auto out = open_output(path);
  out << "# reference = " << r.reference << ", order = " << format_number(r.order)
      << ", monotone = " << (r.monotone ? "true" : "false") << '\n';
  out << "h,field_error,scalar_error\n";
  for (std::size_t k = 0; k < r.h.size(); ++k)
    out << format_number(r.h[k]) << ',' << format_number(r.field_errors[k]) << ','
        << format_number(r.scalar_errors[k]) << '\n';
  close_checked(out, path);
}

void write_stability(const std::filesystem::path& path, const StabilityExperiment<double>& e) {
  auto out = open_output(path);
  out << "N = " << format_number(e.N_basic) << '\n'
      << "lambda_star = " << format_number(e.lambda_star) << '\n'
      << "nematodes_initial = " << format_number(e.nematodes_initial) << '\n'
      << "nematodes_final = " << format_number(e.nematodes_final) << '\n'
      << "N_I_final = " << format_number(e.N_I_final) << '\n'
      << "N_I_peak = " << format_number(e.N_I_peak) << '\n'
      << "infected_final = " << format_number(e.infected_final) << '\n'
      << "healthy_final = " << format_number(e.healthy_final) << '\n'
      << "outcome = " << to_string(e.outcome) << '\n'
      << "predicted = " << (e.N_basic < 1 ? "extinction" : "persistence") << '\n'
      << "agrees = " << (e.agrees ? "true" : "false") << '\n';
  close_checked(out, path);
}

void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows) {
  auto out = open_output(path);
  out << "scenario,production,loss_pct,production_no_control,gain_pct,gain_over_baseline_pct,"
         "recovered_fraction_pct\n";
  for (const auto& r : rows)
    out << r.scenario << ',' << format_number(r.production) << ',' << format_number(r.loss_pct) << ','
        << cell(r.production_no_control) << ',' << cell(r.gain_pct) << ',' << cell(r.gain_over_baseline_pct) << ','
        << cell(r.recovered_fraction_pct) << '\n';
  close_checked(out, path);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header) {
      t.header = cells;
      header = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& s : cells) {
      double v = std::nan("");
      if (!s.empty()) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "' in " + path.string());
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace nemasim
