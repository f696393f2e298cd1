#include <doctest.h>

#include <cmath>

#include "nemasim/threshold.hpp"

using namespace nemasim;
using doctest::Approx;

namespace {

const auto kGrid = threshold_grid(ModelParameters<>{});

// Brute-force nested trapezoid of
// gamma/(sigma+mu_F) int_0^A int_0^a l(z) exp(-(H(a) - H(z))) dz da,
// l(z) = beta(z) S0(z) / ||S0||, with every piece evaluated from scratch.
double nested_N(const ModelParameters<>& p, int n) {
  const double w = p.a_max / n;
  std::vector<double> a(n + 1), H(n + 1), S0(n + 1), beta(n + 1);
  for (int i = 0; i <= n; ++i) {
    a[i] = i * w;
    beta[i] = p.beta_max * std::exp(-std::pow(a[i] - p.a_opt, 2) / (2 * p.sigma_p * p.sigma_p));
    H[i] = i == n ? INFINITY : p.mu_alpha0 / 2 * (1 / std::pow(p.a_max - a[i], 2) - 1 / std::pow(p.a_max, 2));
    S0[i] = p.recruitment_m * std::exp(-H[i]);
  }
  auto trap = [&](auto f, int hi) {
    double s = 0;
    for (int i = 0; i <= hi; ++i) s += (i == 0 || i == hi ? 0.5 : 1.0) * f(i);
    return s * w;
  };
  const double norm = trap([&](int i) { return S0[i]; }, n);
  const double sigma = p.alpha * trap([&](int i) { return beta[i] * S0[i]; }, n) / norm;
  const double outer = trap(
      [&](int i) {
        if (i == n || i == 0) return 0.0;
        return trap([&](int k) { return beta[k] * S0[k] / norm * std::exp(H[k] - H[i]); }, i);
      },
      n);
  return p.gamma / (sigma + p.mu_F) * outer;
}

}  // namespace

TEST_CASE("grid sanity") {
  CHECK(kGrid.intervals() == 3000);
  CHECK(kGrid.weights.sum() == Approx(300).epsilon(1e-13));
  CHECK((kGrid.weights.array() >= 0).all());
  CHECK_THROWS_AS(simpson_grid(300.0, 3001), ConfigurationError);
}

TEST_CASE("pest-free steady state") {
  const ModelParameters<> p;
  const auto S0 = disease_free_state(p, kGrid);
  CHECK(S0[0] == 300);
  CHECK(S0[1500] == Approx(300 * std::exp(-1.0 / 60000)).epsilon(1e-14));
  CHECK(S0[3000] == 0);
  CHECK(disease_free_state(reference_parameters(7e-5), kGrid) == S0);
}

TEST_CASE("sigma") {
  ModelParameters<> p;
  p.beta_max = 0;
  CHECK(sigma_rate(p, kGrid) == 0);
  p.infection = InfectionModel::Constant;
  p.beta_max = 2e-6;
  CHECK(sigma_rate(p, kGrid) == Approx(p.alpha * 2e-6).epsilon(1e-12));

  const ModelParameters<> q;
  const double fine = sigma_rate(q, simpson_grid(300.0, 30000));
  CHECK(sigma_rate(q, kGrid) == Approx(fine).epsilon(1e-6));

  p.recruitment_m = 0;
  CHECK_THROWS_AS(sigma_rate(p, kGrid), DomainError);
}

TEST_CASE("basic reproduction number on the reference parameter sets") {
  const double low = basic_reproduction_number(reference_parameters(1e-6), kGrid);
  const double high = basic_reproduction_number(reference_parameters(7e-5), kGrid);
  CHECK(low >= 0.11);
  CHECK(low <= 0.15);
  CHECK(high >= 8.0);
  CHECK(high <= 9.7);
  CHECK(high / low <= 70);
}

TEST_CASE("basic reproduction number against a brute-force nested integral") {
  for (double beta : {1e-6, 7e-5}) {
    const auto p = reference_parameters(beta);
    CHECK(basic_reproduction_number(p, kGrid) == Approx(nested_N(p, 1500)).epsilon(1e-3));
  }
}

TEST_CASE("basic reproduction number: limits, monotonicity, quadrature") {
  auto p = reference_parameters(7e-5);
  const double base = basic_reproduction_number(p, kGrid);

  auto q = p;
  q.gamma = 0;
  CHECK(basic_reproduction_number(q, kGrid) == 0);
  q = p;
  q.gamma = 2000;
  CHECK(basic_reproduction_number(q, kGrid) > base);
  q = p;
  q.beta_max = 8e-5;
  CHECK(basic_reproduction_number(q, kGrid) > base);
  q = p;
  q.mu_F = 0.06;
  CHECK(basic_reproduction_number(q, kGrid) < base);

  const double doubled = basic_reproduction_number(p, simpson_grid(300.0, 6000));
  CHECK(std::abs(doubled - base) / base < 1e-4);
}

TEST_CASE("characteristic function is decreasing") {
  const CharacteristicFunction<> K(reference_parameters(7e-5), kGrid);
  double prev = K(-0.5);
  for (double l = -0.45; l <= 0.5; l += 0.05) {
    const double v = K(l);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("dominant root sign follows N - 1") {
  const auto low = reference_parameters(1e-6);
  const auto high = reference_parameters(7e-5);
  const double l_low = characteristic_root(low, kGrid);
  const double l_high = characteristic_root(high, kGrid);
  CHECK(l_low < 0);
  CHECK(l_high > 0);
  const CharacteristicFunction<> K(high, kGrid);
  CHECK(std::abs(K(l_high) - 1) <= 1e-10);

  SUBCASE("dense sampling brackets the same root") {
    double bracket_lo = NAN;
    for (double l = 0; l < 0.2; l += 1e-4)
      if (K(l) > 1 && K(l + 1e-4) <= 1) bracket_lo = l;
    REQUIRE(std::isfinite(bracket_lo));
    CHECK(l_high >= bracket_lo);
    CHECK(l_high <= bracket_lo + 1e-4);
  }
  SUBCASE("rescaled gamma gives a marginal case") {
    auto m = high;
    m.gamma /= basic_reproduction_number(high, kGrid);
    CHECK(basic_reproduction_number(m, kGrid) == Approx(1).epsilon(1e-12));
    CHECK(std::abs(characteristic_root(m, kGrid)) <= 1e-8);
    CHECK(analyze_thresholds(m, kGrid).verdict == StabilityVerdict::Marginal);
  }
  SUBCASE("no transmission") {
    auto z = high;
    z.gamma = 0;
    const CharacteristicFunction<> Kz(z, kGrid);
    CHECK(characteristic_root(z, kGrid) == Approx(-(Kz.sigma() + z.mu_F)).epsilon(1e-9));
  }
}

TEST_CASE("global threshold and renewal capacity") {
  const auto p = reference_parameters(7e-5);
  const double sigma = sigma_rate(p, kGrid);
  const double norm = kGrid.integrate(disease_free_state(p, kGrid));
  const double beta_inf = std::min(p.beta_max * std::exp(-std::pow(5.5, 2) / 12.5),
                                   p.beta_max * std::exp(-std::pow(294.5, 2) / 12.5));
  const double direct = (p.e_reinfect * p.alpha * beta_inf + p.mu_F) * p.b_floor / ((sigma + p.mu_F) * norm);
  CHECK(global_stability_threshold(p, kGrid) == Approx(direct).epsilon(1e-13));

  auto e0 = p;
  e0.e_reinfect = 1e-300;  // e must stay positive; this is the e -> 0 limit
  CHECK(global_stability_threshold(e0, kGrid) ==
        Approx(p.mu_F * p.b_floor / ((sigma_rate(e0, kGrid) + p.mu_F) * norm)).epsilon(1e-12));

  const double ratio = renewal_capacity(p, kGrid);
  CHECK(ratio == Approx(renewal_capacity(p, simpson_grid(300.0, 30000))).epsilon(1e-6));
  CHECK(ratio > 1);
  CHECK(global_stability_threshold(p, kGrid) <= 1);

  auto b = p;
  b.b_floor = norm;  // m * int pi
  CHECK(renewal_capacity(b, kGrid) == Approx(1).epsilon(1e-13));
  auto m2 = p;
  m2.recruitment_m *= 2;
  CHECK(renewal_capacity(m2, kGrid) == Approx(2 * ratio).epsilon(1e-13));
}

TEST_CASE("threshold report") {
  const auto low = analyze_thresholds(reference_parameters(1e-6), kGrid);
  CHECK(low.verdict == StabilityVerdict::Stable);
  CHECK(low.lambda_star < 0);
  CHECK(low.S0_norm == Approx(300 * kGrid.integrate(disease_free_state(ModelParameters<>{}, kGrid)) / 300));
  const auto high = analyze_thresholds(reference_parameters(7e-5), kGrid);
  CHECK(high.verdict == StabilityVerdict::Unstable);
  CHECK(high.lambda_star > 0);
  CHECK(std::string(to_string(high.verdict)) == "unstable");
}
