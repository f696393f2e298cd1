#include <doctest.h>

#include <cmath>

#include "nemasim/rates.hpp"

using namespace nemasim;
using doctest::Approx;

namespace {

// composite trapezoid of mu over [0, a]
double trapezoid_hazard(double a, const ModelParameters<>& p, int n) {
  const double w = a / n;
  double s = 0.5 * (plant_mortality(0.0, p) + plant_mortality(a, p));
  for (int i = 1; i < n; ++i) s += plant_mortality(i * w, p);
  return s * w;
}

}  // namespace

TEST_CASE("infection rate") {
  const ModelParameters<> p;
  CHECK(infection_rate(p.a_opt, p) == p.beta_max);
  CHECK(infection_rate(p.a_opt + p.sigma_p, p) == Approx(p.beta_max * std::exp(-0.5)).epsilon(1e-14));
  auto q = p;
  q.beta_max = 0;
  CHECK(infection_rate(100.0, q) == 0);
  q.infection = InfectionModel::Constant;
  q.beta_max = 3e-5;
  CHECK(infection_rate(250.0, q) == 3e-5);
  CHECK_THROWS_AS(infection_rate(-1.0, p), DomainError);
  CHECK_THROWS_AS(infection_rate(301.0, p), DomainError);
}

TEST_CASE("consumption rate") {
  ModelParameters<> p;
  CHECK(consumption_rate(0.0, p) == p.d_max);
  CHECK(consumption_rate(1.0, p) == Approx(1e-4 * std::exp(-2.5)).epsilon(1e-14));
  CHECK(consumption_rate(2.0, p) < consumption_rate(1.0, p));
  p.eta = 0;
  CHECK(consumption_rate(200.0, p) == p.d_max);
}

TEST_CASE("power-law mortality") {
  const ModelParameters<> p;
  CHECK(plant_mortality(299.0, p) == Approx(1.0));
  CHECK(plant_mortality(0.0, p) == Approx(1.0 / 2.7e7));
  CHECK(std::isinf(plant_mortality(300.0, p)));
  CHECK(plant_mortality(150.0, p) < plant_mortality(151.0, p));
}

TEST_CASE("survival probability closed form") {
  const ModelParameters<> p;
  CHECK(survival_probability(0.0, p) == 1);
  CHECK(survival_probability(150.0, p) == Approx(std::exp(-1.0 / 60000)).epsilon(1e-14));
  CHECK(survival_probability(300.0, p) == 0);

  auto c = p;
  c.mortality = MortalityModel::Constant;
  c.mu_constant = 0.02;
  CHECK(survival_probability(40.0, c) == Approx(std::exp(-0.8)).epsilon(1e-14));

  SUBCASE("agrees with a trapezoid integral of mu") {
    for (double a : {10.0, 100.0, 250.0, 290.0, 299.0}) {
      const double H = trapezoid_hazard(a, p, 200000);
      CHECK(cumulative_mortality(a, p) == Approx(H).epsilon(1e-6));
    }
  }
  SUBCASE("unit exponent uses the logarithmic antiderivative") {
    auto q = p;
    q.mu_exp = 1;
    CHECK(cumulative_mortality(200.0, q) == Approx(trapezoid_hazard(200.0, q, 200000)).epsilon(1e-6));
  }
  SUBCASE("bounds") {
    const double mu0 = plant_mortality(0.0, p);
    for (double a = 0; a <= 300; a += 7.5) {
      CHECK(survival_probability(a, p) <= std::exp(-mu0 * a) * (1 + 1e-15));
      for (double t = 0; t <= a; t += 12.5) {
        const double ratio = survival_probability(a, p) / survival_probability(a - t, p);
        if (std::isfinite(ratio)) CHECK(ratio <= survival_probability(t, p) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("bunch weight") {
  const ModelParameters<> p;
  CHECK(bunch_weight(0.0, p) == 0);
  CHECK(bunch_weight(p.a_0, p) == Approx(p.theta_max / 2));
  CHECK(bunch_weight(300.0, p) == Approx(35.0 * 300 / 570));
  CHECK(bunch_weight(1e9, p) < p.theta_max);
}

TEST_CASE("sampled profiles") {
  const ModelParameters<> p;
  const auto prof = sample_profiles(100.0, p);
  CHECK(prof.cells() == 3);
  CHECK(prof.infection.values.size() == 4);
  CHECK(std::isinf(prof.mortality.values[3]));

  const auto fine = sample_profiles(0.5, p);
  Eigen::Index argmax;
  fine.infection.values.maxCoeff(&argmax);
  CHECK(argmax == 11);  // a = 5.5
  for (Eigen::Index j = 1; j < fine.cells(); ++j) CHECK(fine.mortality.values[j] > fine.mortality.values[j - 1]);
  CHECK((fine.consumption.values.array() >= 0).all());

  CHECK_THROWS_AS(sample_profiles(7.0, p), ConfigurationError);
  try {
    sample_profiles(7.0, p);
  } catch (const ConfigurationError& e) {
    CHECK(std::string(e.what()).find("does not divide") != std::string::npos);
  }
}

TEST_CASE("harvest weights start at a_star") {
  const ModelParameters<> p;
  const auto w = harvest_weights(1.0, p);
  CHECK(w[239] == 0);
  CHECK(w[240] == Approx(bunch_weight(240.0, p)));
  CHECK(w[300] == Approx(bunch_weight(300.0, p)));
  auto q = p;
  q.a_star = 240.5;
  CHECK_THROWS_AS(harvest_weights(1.0, q), ConfigurationError);
}

TEST_CASE("closed-form integrals of the rates") {
  ModelParameters<> p;
  p.beta_max = 7e-5;
  auto trap = [&](auto f, double x, double y) {
    const int n = 100000;
    const double w = (y - x) / n;
    double s = 0.5 * (f(x) + f(y));
    for (int i = 1; i < n; ++i) s += f(x + i * w);
    return s * w;
  };
  const double ib = trap([&](double a) { return infection_rate(a, p); }, 2.0, 40.0);
  CHECK(integrated_infection_rate(2.0, 40.0, p) == Approx(ib).epsilon(1e-8));
  const double id = trap([&](double a) { return consumption_rate(a, p); }, 0.0, 3.0);
  CHECK(integrated_consumption_rate(0.0, 3.0, p) == Approx(id).epsilon(1e-8));
  CHECK(max_infection_rate(p) == p.beta_max);
  CHECK(min_infection_rate(p) == Approx(infection_rate(300.0, p)));
}
