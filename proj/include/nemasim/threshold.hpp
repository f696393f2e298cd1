#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/parameters.hpp"
#include "nemasim/quadrature.hpp"
#include "nemasim/rates.hpp"
#include "nemasim/state.hpp"

namespace nemasim {

inline constexpr Eigen::Index kDefaultQuadratureIntervals = 3000;

template <typename Scalar>
QuadratureGrid<Scalar> threshold_grid(const ModelParameters<Scalar>& p,
                                      Eigen::Index intervals = kDefaultQuadratureIntervals) {
  return simpson_grid(p.a_max, intervals);
}

/// Pest-free steady state S0(a) = m pi(a) at the quadrature nodes.
template <typename Scalar>
Vector<Scalar> disease_free_state(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  return g.nodes.unaryExpr([&](Scalar a) { return p.recruitment_m * survival_probability(a, p); });
}

template <typename Scalar>
Vector<Scalar> sampled_infection_rate(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  return g.nodes.unaryExpr([&](Scalar a) { return infection_rate(a, p); });
}

/// sigma = alpha ||beta S0|| / ||S0||.
template <typename Scalar>
Scalar sigma_rate(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  if (!(p.recruitment_m > 0)) throw DomainError("sigma_rate: degenerate equilibrium (m = 0)");
  const Vector<Scalar> S0 = disease_free_state(p, g);
  const Vector<Scalar> beta = sampled_infection_rate(p, g);
  return p.alpha * g.integrate(beta.cwiseProduct(S0)) / g.integrate(S0);
}

namespace detail {

/// R(zeta_i) = int_{zeta_i}^{a_max} exp(-lambda (a - zeta_i)) pi(a) da on every
/// node, built backwards one interval at a time. Each interval uses the
/// third-order three-point rule h/12 (5 f0 + 8 f1 - f2).
template <typename Scalar>
Vector<Scalar> discounted_survival_tail(Scalar lambda, const Vector<Scalar>& pi,
                                        const QuadratureGrid<Scalar>& g) {
  const Eigen::Index n = g.intervals();
  const Scalar h = g.spacing;
  const Scalar decay = std::exp(-lambda * h);
  const Scalar growth = std::exp(lambda * h);
  Vector<Scalar> R(n + 1);
  R[n] = 0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Scalar local;
    if (i + 2 <= n) {
      local = h / 12 * (5 * pi[i] + 8 * decay * pi[i + 1] - decay * decay * pi[i + 2]);
    } else {
      local = h / 12 * (-growth * pi[i - 1] + 8 * pi[i] + 5 * decay * pi[i + 1]);
    }
    R[i] = decay * R[i + 1] + local;
  }
  return R;
}

}  // namespace detail

/// Precomputed pieces of the characteristic function
/// K(lambda) = gamma/(sigma+mu_F) int int l(zeta) e^{-int_zeta^a (lambda+mu)} dzeta da
///             - lambda/(sigma+mu_F).
template <typename Scalar = double>
class CharacteristicFunction {
 public:
  CharacteristicFunction(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g)
      : grid_(g), params_(p) {
    if (!(p.recruitment_m > 0)) throw DomainError("characteristic function: degenerate equilibrium (m = 0)");
    pi_ = g.nodes.unaryExpr([&](Scalar a) { return survival_probability(a, p); });
    beta_ = sampled_infection_rate(p, g);
    survival_mass_ = g.integrate(pi_);
    sigma_ = p.alpha * g.integrate(beta_.cwiseProduct(pi_)) / survival_mass_;
    prefactor_ = p.gamma / (sigma_ + p.mu_F);
  }

  Scalar sigma() const { return sigma_; }
  Scalar survival_mass() const { return survival_mass_; }

  Scalar operator()(Scalar lambda) const {
    // l(zeta) pi(a)/pi(zeta) = beta(zeta) pi(a) / int pi, which avoids 0/0 near a_max
    const Vector<Scalar> R = detail::discounted_survival_tail(lambda, pi_, grid_);
    const Scalar kernel = grid_.integrate(beta_.cwiseProduct(R)) / survival_mass_;
    return prefactor_ * kernel - lambda / (sigma_ + params_.mu_F);
  }

 private:
  QuadratureGrid<Scalar> grid_;
  ModelParameters<Scalar> params_;
  Vector<Scalar> pi_;
  Vector<Scalar> beta_;
  Scalar survival_mass_{};
  Scalar sigma_{};
  Scalar prefactor_{};
};

/// N = K(0): mean number of infesting nematodes produced by one free nematode.
template <typename Scalar>
Scalar basic_reproduction_number(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  return CharacteristicFunction<Scalar>(p, g)(0);
}

/// Unique real root of K(lambda) = 1. K is decreasing, so the root is
/// bracketed by doubling and then bisected.
template <typename Scalar>
Scalar characteristic_root(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g,
                           Scalar tolerance = 1e-10) {
  const CharacteristicFunction<Scalar> K(p, g);
  auto excess = [&](Scalar l) { return K(l) - 1; };

  const Scalar limit = 1e6;
  Scalar width = K.sigma() + p.mu_F + 1;
  Scalar lo = -width, hi = width;
  while (!(excess(lo) > 0)) {
    lo *= 2;
    if (-lo > limit) throw NumericalError("characteristic_root: cannot bracket from below");
  }
  while (!(excess(hi) < 0)) {
    hi *= 2;
    if (hi > limit) throw NumericalError("characteristic_root: cannot bracket from above");
  }
  Scalar mid = (lo + hi) / 2;
  for (int it = 0; it < 2000; ++it) {
    mid = (lo + hi) / 2;
    const Scalar f = excess(mid);
    if (std::abs(f) <= tolerance / 100) break;
    (f > 0 ? lo : hi) = mid;
    if (hi - lo <= 4 * std::numeric_limits<Scalar>::epsilon() * std::abs(mid)) break;
  }
  if (!(std::abs(excess(mid)) <= tolerance)) throw NumericalError("characteristic_root: bisection stalled");
  return mid;
}

/// N0 = (e alpha inf(beta) + mu_F) b / ((sigma + mu_F) ||S0||).
template <typename Scalar>
Scalar global_stability_threshold(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  const Scalar sigma = sigma_rate(p, g);
  const Scalar S0_norm = g.integrate(disease_free_state(p, g));
  return (p.e_reinfect * p.alpha * min_infection_rate(p) + p.mu_F) * p.b_floor / ((sigma + p.mu_F) * S0_norm);
}

/// (m / b) int_0^{a_max} pi(a) da.
template <typename Scalar>
Scalar renewal_capacity(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g) {
  const Vector<Scalar> pi = g.nodes.unaryExpr([&](Scalar a) { return survival_probability(a, p); });
  return p.recruitment_m / p.b_floor * g.integrate(pi);
}

template <typename Scalar>
ThresholdReport<Scalar> analyze_thresholds(const ModelParameters<Scalar>& p, const QuadratureGrid<Scalar>& g,
                                           Scalar marginal_tolerance = 1e-9) {
  ThresholdReport<Scalar> r;
  r.ages = g.nodes;
  r.S0_profile = disease_free_state(p, g);
  r.S0_norm = g.integrate(r.S0_profile);
  r.sigma = sigma_rate(p, g);
  r.N_basic = basic_reproduction_number(p, g);
  r.N0_threshold = global_stability_threshold(p, g);
  r.lambda_star = characteristic_root(p, g);
  r.renewal_ratio = renewal_capacity(p, g);
  if (std::abs(r.N_basic - 1) <= marginal_tolerance)
    r.verdict = StabilityVerdict::Marginal;
  else
    r.verdict = r.N_basic < 1 ? StabilityVerdict::Stable : StabilityVerdict::Unstable;
  return r;
}

}  // namespace nemasim
