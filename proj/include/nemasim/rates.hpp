#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"

namespace nemasim {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
void check_age(Scalar a, const ModelParameters<Scalar>& p, const char* what) {
  if (!(a >= 0 && a <= p.a_max))
    throw DomainError(std::string(what) + ": age " + std::to_string(static_cast<double>(a)) +
                      " outside [0, a_max]");
}

}  // namespace detail

template <typename Scalar>
Scalar infection_rate(Scalar a, const ModelParameters<Scalar>& p) {
  detail::check_age(a, p, "infection_rate");
  if (p.infection == InfectionModel::Constant) return p.beta_max;
  const Scalar z = (a - p.a_opt) / p.sigma_p;
  return p.beta_max * std::exp(-z * z / 2);
}

template <typename Scalar>
Scalar consumption_rate(Scalar a, const ModelParameters<Scalar>& p) {
  detail::check_age(a, p, "consumption_rate");
  return p.d_max * std::exp(-p.eta * a);
}

/// Plant mortality. For the power-law family the value at a >= a_max is
/// +infinity, which the solver treats as instant removal.
template <typename Scalar>
Scalar plant_mortality(Scalar a, const ModelParameters<Scalar>& p) {
  if (!(a >= 0)) throw DomainError("plant_mortality: negative age");
  if (p.mortality == MortalityModel::Constant) {
    if (a > p.a_max) throw DomainError("plant_mortality: age beyond a_max");
    return p.mu_constant;
  }
  if (a >= p.a_max) return std::numeric_limits<Scalar>::infinity();
  return p.mu_alpha0 / std::pow(p.a_max - a, p.mu_exp);
}

/// Closed-form cumulative hazard H(a) = int_0^a mu(s) ds.
template <typename Scalar>
Scalar cumulative_mortality(Scalar a, const ModelParameters<Scalar>& p) {
  detail::check_age(a, p, "cumulative_mortality");
  if (p.mortality == MortalityModel::Constant) return p.mu_constant * a;
  if (a >= p.a_max) return std::numeric_limits<Scalar>::infinity();
  // log(1 - a/a_max) keeps small ages accurate
  const Scalar log_frac = std::log1p(-a / p.a_max);
  if (p.mu_exp == 1) return -p.mu_alpha0 * log_frac;
  const Scalar k = 1 - p.mu_exp;
  return p.mu_alpha0 * std::pow(p.a_max, k) * std::expm1(k * log_frac) / (p.mu_exp - 1);
}

template <typename Scalar>
Scalar survival_probability(Scalar a, const ModelParameters<Scalar>& p) {
  return std::exp(-cumulative_mortality(a, p));
}

template <typename Scalar>
Scalar bunch_weight(Scalar a, const ModelParameters<Scalar>& p) {
  if (!(a >= 0)) throw DomainError("bunch_weight: negative age");
  if (a == 0) return 0;
  return a / (a + p.a_0) * p.theta_max;
}

/// Rate sampled on the age grid a_j = j h, j = 0..M.
template <typename Scalar>
struct AgeRateProfile {
  Vector<Scalar> values;
  Scalar h{};

  Eigen::Index cells() const { return values.size() - 1; }
};

template <typename Scalar>
struct RateProfiles {
  AgeRateProfile<Scalar> infection;
  AgeRateProfile<Scalar> consumption;
  AgeRateProfile<Scalar> mortality;

  Scalar h() const { return infection.h; }
  Eigen::Index cells() const { return infection.cells(); }
};

/// Number of cells M = length / h; throws when h does not divide length.
template <typename Scalar>
Eigen::Index grid_cells(Scalar length, Scalar h, const char* what = "a_max") {
  if (!(h > 0)) throw ConfigurationError("grid step h must be positive");
  const Scalar ratio = length / h;
  const Scalar rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max<Scalar>(1, ratio))
    throw ConfigurationError("grid step h = " + std::to_string(static_cast<double>(h)) +
                             " does not divide " + what + " = " +
                             std::to_string(static_cast<double>(length)));
  return static_cast<Eigen::Index>(rounded);
}

template <typename Scalar, typename F>
AgeRateProfile<Scalar> sample_profile(Scalar h, Eigen::Index cells, F&& f) {
  AgeRateProfile<Scalar> out{Vector<Scalar>(cells + 1), h};
  for (Eigen::Index j = 0; j <= cells; ++j) out.values[j] = f(static_cast<Scalar>(j) * h);
  return out;
}

template <typename Scalar>
RateProfiles<Scalar> sample_profiles(Scalar h, const ModelParameters<Scalar>& p) {
  const Eigen::Index M = grid_cells(p.a_max, h);
  // j*h can overshoot a_max by an ulp; clamp the last node
  auto age = [&](Scalar a) { return std::min(a, p.a_max); };
  return {sample_profile<Scalar>(h, M, [&](Scalar a) { return infection_rate(age(a), p); }),
          sample_profile<Scalar>(h, M, [&](Scalar a) { return consumption_rate(age(a), p); }),
          sample_profile<Scalar>(h, M, [&](Scalar a) { return plant_mortality(age(a), p); })};
}

/// theta(a_j) for a_j >= a_star, zero below; a_star must sit on the grid.
template <typename Scalar>
Vector<Scalar> harvest_weights(Scalar h, const ModelParameters<Scalar>& p) {
  const Eigen::Index M = grid_cells(p.a_max, h);
  const Eigen::Index j_star = grid_cells(p.a_star, h, "a_star");
  Vector<Scalar> w = Vector<Scalar>::Zero(M + 1);
  for (Eigen::Index j = j_star; j <= M; ++j)
    w[j] = bunch_weight(std::min(static_cast<Scalar>(j) * h, p.a_max), p);
  return w;
}

/// Supremum of beta over [0, a_max].
template <typename Scalar>
Scalar max_infection_rate(const ModelParameters<Scalar>& p) {
  if (p.infection == InfectionModel::Constant) return p.beta_max;
  const Scalar peak = std::clamp(p.a_opt, Scalar(0), p.a_max);
  return infection_rate(peak, p);
}

/// Infimum of beta over [0, a_max]; for the Gaussian it sits at the endpoint
/// farther from a_opt.
template <typename Scalar>
Scalar min_infection_rate(const ModelParameters<Scalar>& p) {
  if (p.infection == InfectionModel::Constant) return p.beta_max;
  return std::min(infection_rate(Scalar(0), p), infection_rate(p.a_max, p));
}

/// int_x^y beta(s) ds in closed form.
template <typename Scalar>
Scalar integrated_infection_rate(Scalar x, Scalar y, const ModelParameters<Scalar>& p) {
  if (p.infection == InfectionModel::Constant) return p.beta_max * (y - x);
  const Scalar s = p.sigma_p * std::sqrt(Scalar(2));
  const Scalar half_sqrt_pi = std::sqrt(std::acos(Scalar(-1))) / 2;
  return p.beta_max * s * half_sqrt_pi * (std::erf((y - p.a_opt) / s) - std::erf((x - p.a_opt) / s));
}

/// int_x^y d(s) ds in closed form.
template <typename Scalar>
Scalar integrated_consumption_rate(Scalar x, Scalar y, const ModelParameters<Scalar>& p) {
  if (p.eta == 0) return p.d_max * (y - x);
  return p.d_max * (std::exp(-p.eta * x) - std::exp(-p.eta * y)) / p.eta;
}

}  // namespace nemasim
