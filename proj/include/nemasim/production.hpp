#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"
#include "nemasim/rates.hpp"
#include "nemasim/state.hpp"

namespace nemasim {

/// Cumulative harvest weight at every time level and its daily increments.
template <typename Scalar = double>
struct ProductionSeries {
  Scalar h{};
  Vector<Scalar> cumulative;  // P_c(t^n), n = 0..N
  Vector<Scalar> daily;       // P_d(D), D = 1..floor(T); empty when days are off-grid

  Scalar final() const { return cumulative[cumulative.size() - 1]; }
  Scalar horizon() const { return h * static_cast<Scalar>(cumulative.size() - 1); }
};

namespace detail {

/// Number of steps per day when integer days fall on the time grid.
template <typename Scalar>
std::optional<Eigen::Index> steps_per_day(Scalar h) {
  const Scalar r = 1 / h;
  const Scalar rounded = std::round(r);
  if (rounded >= 1 && std::abs(r - rounded) <= 1e-9 * r) return static_cast<Eigen::Index>(rounded);
  return std::nullopt;
}

}  // namespace detail

/// P_d(D) = P_c(D) - P_c(D - 1) for D = 1..floor(T).
template <typename Scalar>
Vector<Scalar> daily_production(const ProductionSeries<Scalar>& series) {
  const auto per_day = detail::steps_per_day(series.h);
  if (!per_day) throw DomainError("daily_production: integer days are not on the time grid");
  const Eigen::Index days = (series.cumulative.size() - 1) / *per_day;
  Vector<Scalar> out(days);
  for (Eigen::Index D = 1; D <= days; ++D)
    out[D - 1] = series.cumulative[D * *per_day] - series.cumulative[(D - 1) * *per_day];
  return out;
}

template <typename Scalar>
Scalar daily_production(const ProductionSeries<Scalar>& series, Eigen::Index day) {
  if (day < 1) throw DomainError("daily_production: day must be at least 1");
  const Vector<Scalar> d = daily_production(series);
  if (day > d.size()) throw DomainError("daily_production: day beyond the horizon");
  return d[day - 1];
}

/// P_c(t^n) = h * sum_{k=1..n} h sum_{j >= j*} theta(a_j) S_j^k, the
/// right-endpoint rule used by the solver. P_c(0) = 0.
template <typename Scalar>
ProductionSeries<Scalar> cumulative_production(const Trajectory<Scalar>& traj, const ModelParameters<Scalar>& p) {
  grid_cells(p.a_star, traj.h, "a_star");  // alignment check
  ProductionSeries<Scalar> out;
  out.h = traj.h;
  const auto n_levels = static_cast<Eigen::Index>(traj.steps.size());
  out.cumulative.resize(n_levels);
  Scalar acc = 0;
  out.cumulative[0] = 0;
  for (Eigen::Index n = 1; n < n_levels; ++n) {
    acc += traj.h * traj.steps[static_cast<std::size_t>(n)].harvest;
    out.cumulative[n] = acc;
  }
  if (detail::steps_per_day(traj.h)) out.daily = daily_production(out);
  return out;
}

/// Production losses relative to a pest-free baseline, plus the gain from
/// control when a controlled scenario is supplied. The gain is reported under
/// three normalisations; `gain_pct` is the one relative to the uncontrolled run.
template <typename Scalar = double>
struct LossReport {
  Scalar production_baseline = 0;
  Scalar production_no_control = 0;
  std::optional<Scalar> production_with_control;

  Scalar loss_pct = 0;
  std::optional<Scalar> control_loss_pct;

  std::optional<Scalar> gain_pct;                   // (with - without) / without
  std::optional<Scalar> gain_over_baseline_pct;     // (with - without) / baseline
  std::optional<Scalar> recovered_fraction_pct;     // (with - without) / (baseline - without)
};

template <typename Scalar>
LossReport<Scalar> loss_report(Scalar baseline, Scalar no_control, std::optional<Scalar> with_control) {
  if (baseline == 0) throw DomainError("loss_report: baseline production is zero; percentages undefined");
  LossReport<Scalar> r;
  r.production_baseline = baseline;
  r.production_no_control = no_control;
  r.loss_pct = 100 * (1 - no_control / baseline);
  if (with_control) {
    const Scalar recovered = *with_control - no_control;
    r.production_with_control = with_control;
    r.control_loss_pct = 100 * (1 - *with_control / baseline);
    r.gain_over_baseline_pct = 100 * recovered / baseline;
    if (no_control != 0) r.gain_pct = 100 * recovered / no_control;
    if (baseline != no_control) r.recovered_fraction_pct = 100 * recovered / (baseline - no_control);
  }
  return r;
}

template <typename Scalar>
LossReport<Scalar> loss_report(const ProductionSeries<Scalar>& baseline, const ProductionSeries<Scalar>& no_control,
                               const ProductionSeries<Scalar>* with_control = nullptr) {
  auto same_horizon = [&](const ProductionSeries<Scalar>& s) {
    return s.cumulative.size() == baseline.cumulative.size() && std::abs(s.h - baseline.h) <= 1e-12 * baseline.h;
  };
  if (!same_horizon(no_control) || (with_control && !same_horizon(*with_control)))
    throw ConfigurationError("loss_report: production series must share h and horizon");
  return loss_report<Scalar>(baseline.final(), no_control.final(),
                             with_control ? std::optional<Scalar>(with_control->final()) : std::nullopt);
}

}  // namespace nemasim
