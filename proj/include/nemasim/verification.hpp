#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"
#include "nemasim/quadrature.hpp"
#include "nemasim/rates.hpp"
#include "nemasim/solver.hpp"
#include "nemasim/state.hpp"
#include "nemasim/threshold.hpp"

namespace nemasim {

template <typename Scalar>
using AgeFunction = std::function<Scalar(Scalar)>;

// Characteristics oracle ------------------------------------------------------

/// Exact solution of the age equations when the nonlocal coefficients are
/// frozen: S is integrated in closed form along t - a = const, I by one
/// adaptive quadrature per point.
template <typename Scalar = double>
class CharacteristicsOracle {
 public:
  CharacteristicsOracle(const ModelParameters<Scalar>& p, const FrozenCoefficients<Scalar>& frozen,
                        AgeFunction<Scalar> S0, AgeFunction<Scalar> I0, Scalar rel_tol = 1e-8)
      : p_(p), frozen_(frozen), S0_(std::move(S0)), I0_(std::move(I0)), rel_tol_(rel_tol) {}

  /// Healthy density at age a, time t.
  Scalar S(Scalar a, Scalar t) const {
    if (removed(a)) return 0;
    if (t <= a) return S0_(a - t) * std::exp(-healthy_hazard(a - t, a));
    return p_.recruitment_m * std::exp(-healthy_hazard(0, a));
  }

  /// Infected density at age a, time t.
  Scalar I(Scalar a, Scalar t) const {
    if (removed(a)) return 0;
    const Scalar w = frozen_.force_scale;
    if (t <= a) {
      const Scalar c = a - t;
      const Scalar S_c = S0_(c);
      Scalar out = I0_(c) * std::exp(-infected_hazard(c, a));
      if (w != 0 && S_c != 0) {
        auto f = [&](Scalar s) {
          return w * infection_rate(s, p_) * S_c * std::exp(-healthy_hazard(c, s) - infected_hazard(s, a));
        };
        out += adaptive_simpson<Scalar>(f, c, a, rel_tol_);
      }
      return out;
    }
    if (w == 0) return 0;
    auto f = [&](Scalar s) {
      return w * infection_rate(s, p_) * p_.recruitment_m * std::exp(-healthy_hazard(0, s) - infected_hazard(s, a));
    };
    return adaptive_simpson<Scalar>(f, Scalar(0), a, rel_tol_);
  }

  /// Oracle values on the grid a_j = j h at t = n h.
  DiscreteState<Scalar> sample(Scalar h, std::int64_t n) const {
    const Eigen::Index M = grid_cells(p_.a_max, h);
    const Scalar t = static_cast<Scalar>(n) * h;
    DiscreteState<Scalar> s;
    s.time_index = n;
    s.S.resize(M + 1);
    s.I.resize(M + 1);
    for (Eigen::Index j = 0; j <= M; ++j) {
      const Scalar a = std::min(static_cast<Scalar>(j) * h, p_.a_max);
      s.S[j] = S(a, t);
      s.I[j] = I(a, t);
    }
    return s;
  }

 private:
  bool removed(Scalar a) const { return p_.mortality == MortalityModel::PowerLaw && a >= p_.a_max; }

  Scalar mortality_hazard(Scalar x, Scalar y) const {
    return cumulative_mortality(y, p_) - cumulative_mortality(x, p_);
  }
  Scalar healthy_hazard(Scalar x, Scalar y) const {
    return frozen_.force_scale * integrated_infection_rate(x, y, p_) + mortality_hazard(x, y);
  }
  Scalar infected_hazard(Scalar x, Scalar y) const {
    return frozen_.consumption_scale * integrated_consumption_rate(x, y, p_) + mortality_hazard(x, y);
  }

  ModelParameters<Scalar> p_;
  FrozenCoefficients<Scalar> frozen_;
  AgeFunction<Scalar> S0_;
  AgeFunction<Scalar> I0_;
  Scalar rel_tol_;
};

template <typename Scalar>
CharacteristicsOracle<Scalar> characteristics_oracle(const ModelParameters<Scalar>& p,
                                                     const SolverConfig<Scalar>& config, AgeFunction<Scalar> S0,
                                                     AgeFunction<Scalar> I0) {
  if (!config.frozen)
    throw UnsupportedCaseError("characteristics oracle requires frozen coefficients (decoupled case)");
  return CharacteristicsOracle<Scalar>(p, *config.frozen, std::move(S0), std::move(I0));
}

// Discrete norms ---------------------------------------------------------------

/// h sum_{j=1..M} |u_j|
template <typename Scalar, typename Derived>
Scalar discrete_l1(const Eigen::MatrixBase<Derived>& u, Scalar h) {
  return h * u.tail(u.size() - 1).cwiseAbs().sum();
}

// Convergence ------------------------------------------------------------------

template <typename Scalar = double>
struct InitialData {
  AgeFunction<Scalar> S0;
  AgeFunction<Scalar> I0;
  Scalar N_F0 = 0;
  Scalar N_I0 = 0;
};

template <typename Scalar = double>
struct ConvergenceReport {
  std::vector<Scalar> h;
  std::vector<Scalar> field_errors;   // ||E||_{1,inf,h}, S and I summed
  std::vector<Scalar> scalar_errors;  // ||e||_{inf,h}, N_F + N_I + P
  Scalar order = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar scalar_order = std::numeric_limits<Scalar>::quiet_NaN();
  bool monotone = true;
  bool exact = false;  // every field error is zero
  std::string reference;
};

/// Least-squares slope of log(error) against log(h); NaN if any error is zero.
template <typename Scalar>
Scalar fitted_order(const std::vector<Scalar>& h, const std::vector<Scalar>& err) {
  const auto n = static_cast<Eigen::Index>(h.size());
  if (n < 2) return std::numeric_limits<Scalar>::quiet_NaN();
  Vector<Scalar> x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (!(err[i] > 0)) return std::numeric_limits<Scalar>::quiet_NaN();
    x[k] = std::log(h[i]);
    y[k] = std::log(err[i]);
  }
  const Scalar xm = x.mean(), ym = y.mean();
  return (x.array() - xm).matrix().dot((y.array() - ym).matrix()) / (x.array() - xm).square().sum();
}

namespace detail {

template <typename Scalar>
bool strictly_decreasing(const std::vector<Scalar>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace detail

/// Errors of the scheme for h = h_coarsest / 2^k, k = 0..refinements-1. With
/// frozen coefficients the reference is the characteristics oracle; otherwise
/// a run on h_min / 4.
template <typename Scalar = double>
ConvergenceReport<Scalar> convergence_order(const ModelParameters<Scalar>& p, const SolverConfig<Scalar>& config,
                                            const InitialData<Scalar>& init, int refinements, Scalar h_coarsest) {
  if (refinements < 3) throw ConfigurationError("convergence_order needs at least 3 refinements");
  ConvergenceReport<Scalar> report;
  for (int k = 0; k < refinements; ++k) report.h.push_back(h_coarsest / static_cast<Scalar>(1 << k));
  const Scalar h_min = report.h.back();

  auto make_initial = [&](Scalar h) {
    return initial_state<Scalar>(h, p, init.S0, init.I0, init.N_F0, init.N_I0);
  };
  auto config_for = [&](Scalar h) {
    SolverConfig<Scalar> c = config;
    c.h = h;
    return c;
  };

  if (config.frozen) {
    report.reference = "characteristics";
    const auto oracle = characteristics_oracle<Scalar>(p, config, init.S0, init.I0);
    for (Scalar h : report.h) {
      const auto cfg = config_for(h);
      const auto profiles = sample_profiles(h, p);
      const Eigen::Index M = profiles.cells();
      // boundary-fed values depend on age only
      Vector<Scalar> S_fed(M + 1), I_fed(M + 1);
      for (Eigen::Index j = 0; j <= M; ++j) {
        const Scalar a = std::min(static_cast<Scalar>(j) * h, p.a_max);
        S_fed[j] = oracle.S(a, a + 1);
        I_fed[j] = oracle.I(a, a + 1);
      }
      const std::int64_t N = cfg.steps();
      DiscreteState<Scalar> s = make_initial(h);
      Scalar worst = 0;
      for (std::int64_t n = 1; n <= N; ++n) {
        s = step(s, profiles, p, std::optional<ControlSchedule<Scalar>>{}, cfg);
        const Scalar t = static_cast<Scalar>(n) * h;
        Scalar sum = 0;
        for (Eigen::Index j = 1; j <= M; ++j) {
          const Scalar a = std::min(static_cast<Scalar>(j) * h, p.a_max);
          const bool fed = j < n;
          const Scalar S_ref = fed ? S_fed[j] : oracle.S(a, t);
          const Scalar I_ref = fed ? I_fed[j] : oracle.I(a, t);
          sum += std::abs(S_ref - s.S[j]) + std::abs(I_ref - s.I[j]);
        }
        worst = std::max(worst, h * sum);
      }
      report.field_errors.push_back(worst);
      report.scalar_errors.push_back(0);
    }
  } else {
    report.reference = "fine-grid";
    const Scalar h_ref = h_min / 4;
    const auto cfg_ref = config_for(h_ref);
    const auto profiles_ref = sample_profiles(h_ref, p);
    const std::int64_t stride_min = 4;
    const Eigen::Index M_min = grid_cells(p.a_max, h_min);
    const std::int64_t N_min = config_for(h_min).steps();
    // reference restricted to the h_min space-time lattice
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S_ref(M_min + 1, N_min + 1), I_ref(M_min + 1, N_min + 1);
    Eigen::Matrix<Scalar, 3, Eigen::Dynamic> scal_ref(3, N_min + 1);
    {
      DiscreteState<Scalar> s = make_initial(h_ref);
      const std::int64_t N_ref = cfg_ref.steps();
      for (std::int64_t n = 0; n <= N_ref; ++n) {
        if (n > 0) s = step(s, profiles_ref, p, std::optional<ControlSchedule<Scalar>>{}, cfg_ref);
        if (n % stride_min != 0) continue;
        const std::int64_t col = n / stride_min;
        for (Eigen::Index j = 0; j <= M_min; ++j) {
          S_ref(j, col) = s.S[j * stride_min];
          I_ref(j, col) = s.I[j * stride_min];
        }
        scal_ref(0, col) = s.N_F;
        scal_ref(1, col) = s.N_I;
        scal_ref(2, col) = aggregates(s, profiles_ref, p).P;
      }
    }
    for (Scalar h : report.h) {
      const auto cfg = config_for(h);
      const auto profiles = sample_profiles(h, p);
      const Eigen::Index M = profiles.cells();
      const auto ratio = static_cast<std::int64_t>(std::llround(h / h_min));
      const std::int64_t N = cfg.steps();
      DiscreteState<Scalar> s = make_initial(h);
      Scalar worst_field = 0, worst_scalar = 0;
      for (std::int64_t n = 1; n <= N; ++n) {
        const auto agg = aggregates(s, profiles, p);
        s = step(s, agg, profiles, p, std::optional<ControlSchedule<Scalar>>{}, cfg);
        const std::int64_t col = n * ratio;
        Scalar sum = 0;
        for (Eigen::Index j = 1; j <= M; ++j)
          sum += std::abs(S_ref(j * ratio, col) - s.S[j]) + std::abs(I_ref(j * ratio, col) - s.I[j]);
        worst_field = std::max(worst_field, h * sum);
        const Scalar P = aggregates(s, profiles, p).P;
        worst_scalar = std::max(worst_scalar, std::abs(scal_ref(0, col) - s.N_F) +
                                                  std::abs(scal_ref(1, col) - s.N_I) +
                                                  std::abs(scal_ref(2, col) - P));
      }
      report.field_errors.push_back(worst_field);
      report.scalar_errors.push_back(worst_scalar);
    }
    report.scalar_order = fitted_order(report.h, report.scalar_errors);
  }

  report.order = fitted_order(report.h, report.field_errors);
  report.exact = std::all_of(report.field_errors.begin(), report.field_errors.end(),
                             [](Scalar e) { return e == 0; });
  report.monotone = detail::strictly_decreasing(report.field_errors);
  return report;
}

// Invariant audit --------------------------------------------------------------

template <typename Scalar = double>
struct InvariantBounds {
  Scalar K0 = 0;     // plants per age cell
  Scalar K1 = 0;     // total plants
  Scalar K2 = 0;     // total nematodes
  Scalar B_max = 0;
  Scalar C_max = 0;
  Scalar D_max = 0;
};

struct StepAudit {
  std::int64_t n = 0;
  bool grid_checked = false;  // grid values are only available on recorded levels
  bool nonnegative = true;
  bool plants_bounded = true;     // max S_j, max p_j <= K0
  bool population_bounded = true; // P <= K1
  bool nematodes_bounded = true;  // N_F + N_I <= K2
  bool aggregates_bounded = true; // B <= P, B/C/D bounds

  bool ok() const {
    return nonnegative && plants_bounded && population_bounded && nematodes_bounded && aggregates_bounded;
  }
};

template <typename Scalar = double>
struct InvariantAuditReport {
  InvariantBounds<Scalar> bounds;
  std::vector<StepAudit> steps;
  std::optional<std::int64_t> first_violation;

  bool passed() const { return !first_violation.has_value(); }
  std::int64_t violation_count() const {
    return std::count_if(steps.begin(), steps.end(), [](const StepAudit& s) { return !s.ok(); });
  }
};

/// Discrete a-priori bounds from the initial data and horizon.
template <typename Scalar>
InvariantBounds<Scalar> invariant_bounds(const DiscreteState<Scalar>& initial, Scalar P0, Scalar T,
                                         const ModelParameters<Scalar>& p) {
  InvariantBounds<Scalar> b;
  const Scalar S_inf = initial.S.size() ? initial.S.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar I_inf = initial.I.size() ? initial.I.cwiseAbs().maxCoeff() : Scalar(0);
  b.K0 = std::max(p.recruitment_m, S_inf + I_inf);
  b.K1 = P0 + p.recruitment_m * T;
  // K2 = e^{T x} Q0 + gamma a_max K0 (e^{T x} - 1)/x, x = rho a_max |d| K0 / K_d
  const Scalar d_sup = p.d_max;
  const Scalar x = p.rho * p.a_max * d_sup * b.K0 / p.K_d;
  const Scalar Q0 = initial.N_F + initial.N_I;
  const Scalar growth = x > 0 ? std::expm1(T * x) / x : T;
  b.K2 = std::exp(T * x) * Q0 + p.gamma * p.a_max * b.K0 * growth;
  b.B_max = p.a_max * b.K0;
  b.C_max = p.a_max * (1 + p.e_reinfect) * max_infection_rate(p) * b.K0;
  b.D_max = p.a_max * d_sup * b.K0;
  return b;
}

template <typename Scalar>
InvariantAuditReport<Scalar> invariant_audit(const Trajectory<Scalar>& traj, const ModelParameters<Scalar>& p) {
  InvariantAuditReport<Scalar> r;
  if (traj.steps.empty() || traj.states.empty()) return r;
  r.bounds = invariant_bounds(traj.initial(), traj.steps.front().aggregates.P, traj.horizon(), p);
  const auto& b = r.bounds;
  constexpr Scalar slack = 1e-12;
  auto within = [&](Scalar v, Scalar bound) { return v <= bound + slack * std::abs(bound); };

  std::size_t next_state = 0;
  for (const auto& rec : traj.steps) {
    StepAudit a;
    a.n = static_cast<std::int64_t>(&rec - traj.steps.data());
    const auto& g = rec.aggregates;
    a.nonnegative = rec.N_F >= 0 && rec.N_I >= 0 && g.P >= 0 && g.B >= 0 && g.C >= 0 && g.D >= 0;
    a.population_bounded = within(g.P, b.K1);
    a.nematodes_bounded = within(rec.N_F + rec.N_I, b.K2);
    a.aggregates_bounded = within(g.B, g.P) && within(g.B, b.B_max) && within(g.C, b.C_max) && within(g.D, b.D_max);
    if (next_state < traj.states.size() && traj.states[next_state].time_index == a.n) {
      const auto& s = traj.states[next_state++];
      a.grid_checked = true;
      a.nonnegative = a.nonnegative && (s.S.array() >= 0).all() && (s.I.array() >= 0).all() && s.N_F >= 0 &&
                      s.N_I >= 0;
      // the spike at n = 0 may exceed m; the bound K0 covers it
      a.plants_bounded = within(s.S.maxCoeff(), b.K0) && within((s.S + s.I).maxCoeff(), b.K0);
    }
    if (!a.ok() && !r.first_violation) r.first_violation = a.n;
    r.steps.push_back(a);
  }
  return r;
}

// Stability experiment ---------------------------------------------------------

enum class AsymptoticOutcome { Extinction, Persistence, Inconclusive };

inline const char* to_string(AsymptoticOutcome o) {
  switch (o) {
    case AsymptoticOutcome::Extinction: return "extinction";
    case AsymptoticOutcome::Persistence: return "persistence";
    case AsymptoticOutcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

template <typename Scalar = double>
struct StabilityExperiment {
  AsymptoticOutcome outcome = AsymptoticOutcome::Inconclusive;
  Scalar N_basic = 0;
  Scalar lambda_star = 0;
  Scalar nematodes_initial = 0;
  Scalar nematodes_final = 0;  // N_F(T) + N_I(T)
  Scalar N_I_final = 0;
  Scalar N_I_peak = 0;
  Scalar infected_final = 0;   // int I(., T)
  Scalar healthy_final = 0;    // int S(., T)
  bool agrees = false;         // outcome matches sign(N - 1)
};

template <typename Scalar>
AsymptoticOutcome classify_outcome(const StabilityExperiment<Scalar>& e) {
  if (e.nematodes_final < 1e-6 * e.nematodes_initial && e.infected_final < 1e-6 * e.healthy_final)
    return AsymptoticOutcome::Extinction;
  if (e.N_I_peak > 0 && e.N_I_final > 1e-2 * e.N_I_peak) return AsymptoticOutcome::Persistence;
  return AsymptoticOutcome::Inconclusive;
}

/// Runs the scheme to the horizon and compares the observed asymptotics with
/// the threshold prediction.
template <typename Scalar>
StabilityExperiment<Scalar> stability_experiment(const ModelParameters<Scalar>& p, const SolverConfig<Scalar>& config,
                                                 const DiscreteState<Scalar>& initial,
                                                 const QuadratureGrid<Scalar>& grid,
                                                 const std::optional<ControlSchedule<Scalar>>& schedule = std::nullopt) {
  validate_parameters(p);
  StabilityExperiment<Scalar> e;
  e.N_basic = basic_reproduction_number(p, grid);
  e.lambda_star = characteristic_root(p, grid);

  SolverConfig<Scalar> cfg = config;
  cfg.record_every = std::max<std::int64_t>(1, cfg.steps());
  const auto profiles = sample_profiles(cfg.h, p);
  Scalar peak = 0;
  const auto traj = simulate(initial, profiles, p, schedule, cfg,
                             [&](const DiscreteState<Scalar>& s, const StepRecord<Scalar>&) { peak = std::max(peak, s.N_I); });
  const auto& last = traj.steps.back();
  e.nematodes_initial = initial.N_F + initial.N_I;
  e.nematodes_final = last.N_F + last.N_I;
  e.N_I_final = last.N_I;
  e.N_I_peak = peak;
  e.infected_final = last.aggregates.B;
  e.healthy_final = last.aggregates.P - last.aggregates.B;
  e.outcome = classify_outcome(e);
  e.agrees = (e.outcome == AsymptoticOutcome::Extinction && e.N_basic < 1) ||
             (e.outcome == AsymptoticOutcome::Persistence && e.N_basic > 1);
  return e;
}

}  // namespace nemasim
