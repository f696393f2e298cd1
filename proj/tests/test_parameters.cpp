#include <doctest.h>

#include <algorithm>

#include "nemasim/parameters.hpp"

using namespace nemasim;

namespace {

bool flags(const std::vector<ParameterViolation>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const ParameterViolation& x) { return x.field == field; });
}

}  // namespace

TEST_CASE("defaults reproduce the reference parameter set") {
  const ModelParameters<> p;
  CHECK(p.recruitment_m == 300);
  CHECK(p.beta_max == 1e-6);
  CHECK(p.a_opt == 5.5);
  CHECK(p.sigma_p == 2.5);
  CHECK(p.d_max == 1e-4);
  CHECK(p.eta == 2.5);
  CHECK(p.mu_alpha0 == 1);
  CHECK(p.mu_exp == 3);
  CHECK(p.mu_F == 0.0495);
  CHECK(p.mu_I == 0.045);
  CHECK(p.alpha == 100);
  CHECK(p.e_reinfect == 0.0002);
  CHECK(p.gamma == 1000);
  CHECK(p.rho == 400);
  CHECK(p.K_cap == 1000);
  CHECK(p.K_d == 60);
  CHECK(p.a_max == 300);
  CHECK(p.theta_max == 35);
  CHECK(p.a_star == 240);
  CHECK(p.a_0 == 270);
  CHECK(check_parameters(p).empty());
}

TEST_CASE("reference_parameters only changes the infection peak") {
  auto p = reference_parameters(7e-5);
  CHECK(p.beta_max == 7e-5);
  p.beta_max = 1e-6;
  CHECK(p == ModelParameters<>{});
}

TEST_CASE("ordering and range constraints") {
  ModelParameters<> p;
  p.mu_I = p.mu_F;
  CHECK(flags(check_parameters(p), "mu_F"));

  p = {};
  p.e_reinfect = 1;
  CHECK(flags(check_parameters(p), "e_reinfect"));
  p.e_reinfect = 0;
  CHECK(flags(check_parameters(p), "e_reinfect"));

  p = {};
  p.K_d = 0;
  CHECK(flags(check_parameters(p), "K_d"));

  p = {};
  p.a_star = 300;
  CHECK(flags(check_parameters(p), "a_star"));

  p = {};
  p.mu_exp = 0.5;
  CHECK(flags(check_parameters(p), "mu_exp"));
  p.mortality = MortalityModel::Constant;  // exponent is irrelevant then
  CHECK_FALSE(flags(check_parameters(p), "mu_exp"));
}

TEST_CASE("negative and non-finite values are rejected") {
  ModelParameters<> p;
  p.gamma = -1;
  p.rho = std::numeric_limits<double>::quiet_NaN();
  const auto v = check_parameters(p);
  CHECK(flags(v, "gamma"));
  CHECK(flags(v, "rho"));
}

TEST_CASE("validate_parameters reports every violation at once") {
  ModelParameters<> p;
  p.mu_I = 1;
  p.K_cap = 0;
  try {
    validate_parameters(p);
    FAIL("expected InvalidParameters");
  } catch (const InvalidParameters& e) {
    CHECK(e.violations().size() == 2);
    CHECK(std::string(e.what()).find("K_cap") != std::string::npos);
  }
  ModelParameters<> ok;
  CHECK(&validate_parameters(ok) == &ok);
}
