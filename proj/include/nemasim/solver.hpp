#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <type_traits>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"
#include "nemasim/rates.hpp"
#include "nemasim/state.hpp"

namespace nemasim {

/// Replaces the nonlocal coefficients by constants: the force-of-infection
/// scale N_F/P and the consumption scale N_I/(K_d + B). Nematode counts are
/// held fixed. This decouples the age equations so that they can be solved
/// along characteristics.
template <typename Scalar = double>
struct FrozenCoefficients {
  Scalar force_scale = 0;
  Scalar consumption_scale = 0;
};

template <typename Scalar = double>
struct SolverConfig {
  Scalar h = 1;    // dt = da
  Scalar T = 550;  // horizon
  std::int64_t record_every = 1;
  Scalar epsilon_P = 1e-12;
  std::optional<FrozenCoefficients<Scalar>> frozen;

  std::int64_t steps() const { return static_cast<std::int64_t>(grid_cells(T, h, "T")); }
};

template <typename Scalar>
StepAggregates<Scalar> aggregates(const DiscreteState<Scalar>& s, const RateProfiles<Scalar>& profiles,
                                  const ModelParameters<Scalar>& p) {
  const Eigen::Index M = s.cells();
  const Scalar h = profiles.h();
  const auto S = s.S.tail(M);
  const auto I = s.I.tail(M);
  const auto beta = profiles.infection.values.tail(M);
  const auto d = profiles.consumption.values.tail(M);
  StepAggregates<Scalar> out;
  out.P = h * (S + I).sum();
  out.B = h * I.sum();
  out.C = h * beta.cwiseProduct(S + p.e_reinfect * I).sum();
  out.D = h * d.cwiseProduct(I).sum();
  return out;
}

template <typename Scalar>
Scalar control_value(Scalar t, const ControlSchedule<Scalar>& schedule) {
  if (!(t >= 0)) throw DomainError("control_value: negative time");
  if (t >= schedule.horizon) return 0;
  return std::fmod(t, schedule.period) < schedule.pulse_width ? schedule.u_max : Scalar(0);
}

template <typename Scalar>
Scalar control_value(Scalar t, const std::optional<ControlSchedule<Scalar>>& schedule) {
  return schedule ? control_value(t, *schedule) : Scalar(0);
}

/// One semi-implicit Euler step from level n-1 to n, given the aggregates of
/// the previous level. Losses sit in the denominators, so every output is a
/// ratio of nonnegative terms.
template <typename Scalar>
DiscreteState<Scalar> step(const DiscreteState<Scalar>& prev, const StepAggregates<Scalar>& agg,
                           const RateProfiles<Scalar>& profiles, const ModelParameters<Scalar>& p,
                           const std::optional<ControlSchedule<std::type_identity_t<Scalar>>>& schedule,
                           const SolverConfig<Scalar>& config) {
  const Eigen::Index M = prev.cells();
  if (M != profiles.cells()) throw ConfigurationError("state and rate profiles use different grids");
  const Scalar h = profiles.h();
  const auto& beta = profiles.infection.values;
  const auto& d = profiles.consumption.values;
  const auto& mu = profiles.mortality.values;

  Scalar force_scale;     // N_F / P
  Scalar contact_rate;    // alpha C / P
  Scalar consumption;     // N_I / (K_d + B)
  if (config.frozen) {
    force_scale = config.frozen->force_scale;
    consumption = config.frozen->consumption_scale;
    contact_rate = 0;
  } else {
    if (agg.P <= 0) {
      // no hosts in the quadrature: no contacts this step
      force_scale = 0;
      contact_rate = 0;
    } else if (agg.P < config.epsilon_P) {
      std::ostringstream os;
      os << "population floor breached at step " << prev.time_index + 1 << ": P = " << agg.P
         << " < epsilon_P = " << config.epsilon_P << " (total plant population must stay bounded below)";
      throw PopulationFloorError(os.str());
    } else {
      force_scale = prev.N_F / agg.P;
      contact_rate = p.alpha * agg.C / agg.P;
    }
    consumption = prev.N_I / (p.K_d + agg.B);
  }

  DiscreteState<Scalar> next;
  next.time_index = prev.time_index + 1;
  next.S.resize(M + 1);
  next.I.resize(M + 1);
  next.S[0] = p.recruitment_m;
  next.I[0] = 0;
  for (Eigen::Index j = 1; j <= M; ++j) {
    const Scalar Lambda = beta[j] * force_scale;
    next.S[j] = prev.S[j - 1] / (1 + h * (mu[j] + Lambda));
    next.I[j] = (prev.I[j - 1] + h * Lambda * next.S[j]) / (1 + h * (mu[j] + d[j] * consumption));
  }

  if (config.frozen) {
    next.N_F = prev.N_F;
    next.N_I = prev.N_I;
    return next;
  }

  const Scalar u = control_value(static_cast<Scalar>(prev.time_index) * h, schedule);
  next.N_F = (prev.N_F + h * p.gamma * agg.B) / (1 + h * (p.mu_F + u + contact_rate));
  const Scalar feeding = p.rho * agg.D / (p.K_d + agg.B);
  next.N_I = (prev.N_I * (1 + h * feeding) + h * contact_rate * next.N_F) /
             (1 + h * (p.mu_I + feeding * prev.N_I / p.K_cap));
  return next;
}

template <typename Scalar>
DiscreteState<Scalar> step(const DiscreteState<Scalar>& prev, const RateProfiles<Scalar>& profiles,
                           const ModelParameters<Scalar>& p,
                           const std::optional<ControlSchedule<std::type_identity_t<Scalar>>>& schedule,
                           const SolverConfig<Scalar>& config) {
  return step(prev, aggregates(prev, profiles, p), profiles, p, schedule, config);
}

/// Runs N = T/h steps. `observer(state, record)` is called for every level
/// n = 0..N, before anything is stored.
template <typename Scalar, typename Observer>
Trajectory<Scalar> simulate(const DiscreteState<Scalar>& initial, const RateProfiles<Scalar>& profiles,
                            const ModelParameters<Scalar>& p,
                            const std::optional<ControlSchedule<std::type_identity_t<Scalar>>>& schedule,
                            const SolverConfig<Scalar>& config, Observer&& observer) {
  if (initial.cells() != profiles.cells())
    throw ConfigurationError("initial state and rate profiles use different grids");
  if (config.record_every < 1) throw ConfigurationError("record_every must be at least 1");
  if (schedule) schedule->validate();
  const Scalar h = profiles.h();
  if (std::abs(h - config.h) > 1e-12 * h) throw ConfigurationError("profiles sampled with a different h");
  const std::int64_t N = config.steps();
  const Vector<Scalar> theta = harvest_weights(h, p);

  Trajectory<Scalar> traj;
  traj.h = h;
  traj.record_every = config.record_every;
  traj.steps.reserve(static_cast<std::size_t>(N + 1));

  DiscreteState<Scalar> current = initial;
  current.time_index = 0;
  for (std::int64_t n = 0;; ++n) {
    const auto agg = aggregates(current, profiles, p);
    const Scalar t = static_cast<Scalar>(n) * h;
    StepRecord<Scalar> rec{t, current.N_F, current.N_I, agg, control_value(t, schedule),
                           h * theta.dot(current.S)};
    observer(current, rec);
    traj.steps.push_back(rec);
    if (n % config.record_every == 0 || n == N) traj.states.push_back(current);
    if (n == N) break;
    current = step(current, agg, profiles, p, schedule, config);
  }
  return traj;
}

template <typename Scalar>
Trajectory<Scalar> simulate(const DiscreteState<Scalar>& initial, const RateProfiles<Scalar>& profiles,
                            const ModelParameters<Scalar>& p,
                            const std::optional<ControlSchedule<std::type_identity_t<Scalar>>>& schedule,
                            const SolverConfig<Scalar>& config) {
  return simulate(initial, profiles, p, schedule, config,
                  [](const DiscreteState<Scalar>&, const StepRecord<Scalar>&) {});
}

}  // namespace nemasim
