#include <doctest.h>

#include <cmath>

#include "nemasim/verification.hpp"

using namespace nemasim;
using doctest::Approx;

namespace {

ModelParameters<> bounded_mortality(double beta_max) {
  auto p = reference_parameters(beta_max);
  p.mortality = MortalityModel::Constant;
  p.mu_constant = 0.01;
  return p;
}

SolverConfig<> frozen_config(double force, double consumption) {
  SolverConfig<> c;
  c.T = 360;
  c.frozen = FrozenCoefficients<>{force, consumption};
  return c;
}

double smooth_S0(double a) { return 200 * std::exp(-a / 80) * (1 + 0.3 * std::sin(a / 20)); }

}  // namespace

TEST_CASE("oracle needs frozen coefficients") {
  const ModelParameters<> p;
  SolverConfig<> c;
  CHECK_THROWS_AS(characteristics_oracle<double>(p, c, smooth_S0, [](double) { return 0.0; }), UnsupportedCaseError);
}

TEST_CASE("oracle without infection is the survival ratio") {
  const auto p = reference_parameters(7e-5);  // singular mortality
  const auto oracle = characteristics_oracle<double>(p, frozen_config(0, 0), smooth_S0, [](double) { return 0.0; });
  for (double a : {50.0, 120.0, 250.0, 299.0})
    for (double t : {10.0, 40.0}) {
      const double expect = smooth_S0(a - t) * survival_probability(a, p) / survival_probability(a - t, p);
      CHECK(oracle.S(a, t) == Approx(expect).epsilon(1e-12));
      CHECK(oracle.I(a, t) == 0);
    }
  CHECK(oracle.S(100.0, 150.0) == Approx(p.recruitment_m * survival_probability(100.0, p)).epsilon(1e-12));
  CHECK(oracle.S(300.0, 10.0) == 0);
}

TEST_CASE("constant force of infection multiplies by exp(-c t)") {
  auto p = bounded_mortality(1e-6);
  p.infection = InfectionModel::Constant;  // Lambda = beta_max * force
  const double force = 500, c = p.beta_max * force;
  const auto oracle = characteristics_oracle<double>(p, frozen_config(force, 0), smooth_S0, [](double) { return 0.0; });
  const double a = 150, t = 60;
  const double S = smooth_S0(a - t) * std::exp(-p.mu_constant * t) * std::exp(-c * t);
  CHECK(oracle.S(a, t) == Approx(S).epsilon(1e-12));
  // healthy + infected only lose plants to mortality when consumption is zero
  const double total = smooth_S0(a - t) * std::exp(-p.mu_constant * t);
  CHECK(oracle.S(a, t) + oracle.I(a, t) == Approx(total).epsilon(1e-7));
}

TEST_CASE("pure transport is reproduced exactly") {
  ModelParameters<> p;
  p.mortality = MortalityModel::Constant;
  p.mu_constant = 0;
  p.beta_max = 0;
  p.recruitment_m = 5;
  InitialData<> init{[](double a) { return 5 + 0.1 * a; }, [](double) { return 0.0; }, 0, 0};
  auto c = frozen_config(0, 0);
  c.T = 60;
  const auto r = convergence_order(p, c, init, 3, 4.0);
  CHECK(r.exact);
  for (double e : r.field_errors) CHECK(e == Approx(0).epsilon(1e-9));
}

TEST_CASE("frozen-coefficient convergence is first order") {
  const auto p = bounded_mortality(7e-5);
  InitialData<> init{[&](double a) { return p.recruitment_m * survival_probability(a, p); }, [](double) { return 0.0; },
                     0, 0};
  auto c = frozen_config(1000, 100);
  c.T = 120;
  const auto r = convergence_order(p, c, init, 3, 2.0);
  CHECK(r.reference == "characteristics");
  CHECK(r.monotone);
  CHECK(r.order >= 0.8);
  CHECK(r.order <= 1.2);
  CHECK_THROWS_AS(convergence_order(p, c, init, 2, 2.0), ConfigurationError);
}

TEST_CASE("coupled system self-converges at first order") {
  const auto p = bounded_mortality(7e-5);
  InitialData<> init{[&](double a) { return p.recruitment_m * survival_probability(a, p); }, [](double) { return 0.0; },
                     1e4, 0};
  SolverConfig<> c;
  c.T = 360;
  const auto r = convergence_order(p, c, init, 3, 2.0);
  CHECK(r.reference == "fine-grid");
  CHECK(r.order >= 0.8);
  CHECK(r.order <= 1.2);
}

TEST_CASE("fitted order") {
  CHECK(fitted_order<double>({1, 0.5, 0.25}, {4, 1, 0.25}) == Approx(2));
  CHECK(std::isnan(fitted_order<double>({1, 0.5}, {1, 0})));
}

TEST_CASE("invariant audit") {
  const auto p = reference_parameters(7e-5);
  const SolverConfig<> cfg{1.0, 200.0};
  auto traj = simulate(spike_initial_state(1.0, p, 100.0, 1e4, 0.0), sample_profiles(1.0, p), p, std::nullopt, cfg);
  const auto ok = invariant_audit(traj, p);
  CHECK(ok.passed());
  CHECK(ok.steps.size() == 201);
  CHECK(ok.bounds.K0 == 300);
  CHECK(ok.bounds.K1 == Approx(traj.steps[0].aggregates.P + 300 * 200));

  SUBCASE("injected negative entry") {
    traj.states[57].S[12] = -1;
    const auto bad = invariant_audit(traj, p);
    CHECK_FALSE(bad.passed());
    REQUIRE(bad.first_violation);
    CHECK(*bad.first_violation == 57);
    CHECK(bad.violation_count() == 1);
  }
  SUBCASE("scalar overshoot") {
    traj.steps[80].aggregates.P = 1e12;
    CHECK(*invariant_audit(traj, p).first_violation == 80);
  }
  SUBCASE("degenerate empty system") {
    auto z = p;
    z.recruitment_m = 0;
    DiscreteState<> s;
    s.S = Eigen::VectorXd::Zero(301);
    s.I = Eigen::VectorXd::Zero(301);
    const auto t = simulate(s, sample_profiles(1.0, z), z, std::nullopt, SolverConfig<>{1.0, 20.0});
    const auto r = invariant_audit(t, z);
    CHECK(r.bounds.K0 == 0);
    CHECK(r.passed());
  }
}

TEST_CASE("stability experiment without transmission") {
  auto p = reference_parameters(1e-6);
  p.gamma = 0;
  p.beta_max = 0;
  const SolverConfig<> cfg{1.0, 550.0};
  const auto e = stability_experiment(p, cfg, spike_initial_state(1.0, p, 100.0, 1e4, 0.0), threshold_grid(p));
  CHECK(e.N_basic == 0);
  CHECK(e.outcome == AsymptoticOutcome::Extinction);
  CHECK(e.agrees);
}

TEST_CASE("stability experiment in the endemic regime") {
  const auto p = reference_parameters(7e-5);
  const SolverConfig<> cfg{1.0, 550.0};
  const auto e = stability_experiment(p, cfg, spike_initial_state(1.0, p, 100.0, 1e4, 0.0), threshold_grid(p));
  CHECK(e.N_basic > 1);
  CHECK(e.outcome == AsymptoticOutcome::Persistence);
  CHECK(e.agrees);
}
