#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/rates.hpp"

namespace nemasim {

/// Grid snapshot at time level n: healthy and infected densities over ages
/// a_j = j h (j = 0..M) plus the two nematode counts.
template <typename Scalar = double>
struct DiscreteState {
  std::int64_t time_index = 0;
  Vector<Scalar> S;
  Vector<Scalar> I;
  Scalar N_F = 0;
  Scalar N_I = 0;

  Eigen::Index cells() const { return S.size() - 1; }
};

/// Periodic nematicide pulses: u(t) = u_max on [k period, k period + pulse_width)
/// for t < horizon, zero elsewhere.
template <typename Scalar = double>
struct ControlSchedule {
  Scalar u_max = 0;
  Scalar period = 16;
  Scalar pulse_width = 1;
  Scalar horizon = 550;

  void validate() const {
    if (!(u_max >= 0)) throw ConfigurationError("control u_max must be nonnegative");
    if (!(pulse_width > 0 && pulse_width <= period))
      throw ConfigurationError("control pulse_width must lie in (0, period]");
  }
};

/// Right-endpoint rectangle sums over j = 1..M.
template <typename Scalar = double>
struct StepAggregates {
  Scalar P = 0;  // h sum (S_j + I_j)
  Scalar B = 0;  // h sum I_j
  Scalar C = 0;  // h sum beta_j (S_j + e I_j)
  Scalar D = 0;  // h sum d_j I_j
};

/// Scalars recorded at every time level.
template <typename Scalar = double>
struct StepRecord {
  Scalar t = 0;
  Scalar N_F = 0;
  Scalar N_I = 0;
  StepAggregates<Scalar> aggregates;
  Scalar u = 0;        // control value at t
  Scalar harvest = 0;  // h sum_{j >= j*} theta_j S_j
};

template <typename Scalar = double>
struct Trajectory {
  Scalar h{};
  std::int64_t record_every = 1;
  std::vector<StepRecord<Scalar>> steps;   // n = 0..N
  std::vector<DiscreteState<Scalar>> states;  // n = 0, r, 2r, ..., N

  std::int64_t step_count() const { return static_cast<std::int64_t>(steps.size()) - 1; }
  Scalar horizon() const { return static_cast<Scalar>(step_count()) * h; }
  const DiscreteState<Scalar>& initial() const { return states.front(); }
  const DiscreteState<Scalar>& final() const { return states.back(); }
};

enum class StabilityVerdict { Stable, Unstable, Marginal };

inline const char* to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::Stable: return "stable";
    case StabilityVerdict::Unstable: return "unstable";
    case StabilityVerdict::Marginal: return "marginal";
  }
  return "?";
}

template <typename Scalar = double>
struct ThresholdReport {
  Vector<Scalar> ages;
  Vector<Scalar> S0_profile;
  Scalar S0_norm = 0;
  Scalar sigma = 0;
  Scalar N_basic = 0;
  Scalar N0_threshold = 0;
  Scalar lambda_star = 0;
  Scalar renewal_ratio = 0;
  StabilityVerdict verdict = StabilityVerdict::Stable;
};

// Initial conditions ---------------------------------------------------------

template <typename Scalar>
DiscreteState<Scalar> initial_state(Scalar h, const ModelParameters<Scalar>& p,
                                    const std::function<Scalar(Scalar)>& S0,
                                    const std::function<Scalar(Scalar)>& I0, Scalar N_F0, Scalar N_I0) {
  const Eigen::Index M = grid_cells(p.a_max, h);
  DiscreteState<Scalar> s;
  s.S.resize(M + 1);
  s.I.resize(M + 1);
  for (Eigen::Index j = 0; j <= M; ++j) {
    const Scalar a = std::min(static_cast<Scalar>(j) * h, p.a_max);
    s.S[j] = S0(a);
    s.I[j] = I0(a);
  }
  s.N_F = N_F0;
  s.N_I = N_I0;
  return s;
}

/// All healthy plants concentrated at age zero: S0(0) = spike, zero elsewhere.
template <typename Scalar>
DiscreteState<Scalar> spike_initial_state(Scalar h, const ModelParameters<Scalar>& p, Scalar spike,
                                          Scalar N_F0, Scalar N_I0) {
  return initial_state<Scalar>(
      h, p, [spike](Scalar a) { return a == 0 ? spike : Scalar(0); }, [](Scalar) { return Scalar(0); },
      N_F0, N_I0);
}

/// Pest-free equilibrium S0(a) = m pi(a), no infected plants.
template <typename Scalar>
DiscreteState<Scalar> steady_initial_state(Scalar h, const ModelParameters<Scalar>& p, Scalar N_F0,
                                           Scalar N_I0) {
  return initial_state<Scalar>(
      h, p, [&p](Scalar a) { return p.recruitment_m * survival_probability(a, p); },
      [](Scalar) { return Scalar(0); }, N_F0, N_I0);
}

}  // namespace nemasim
