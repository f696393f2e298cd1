#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nemasim {

enum class MortalityModel { PowerLaw, Constant };
enum class InfectionModel { Gaussian, Constant };

/// Constants and rate-family parameters of the banana-plantain / nematode
/// system. Units follow the reference parameter set; every plant quantity
/// is measured in one consistent "plant-unit".
template <typename Scalar = double>
struct ModelParameters {
  Scalar recruitment_m = 300;  // S(0,t) = m

  // beta(a) = beta_max exp(-(a - a_opt)^2 / (2 sigma_p^2))
  Scalar beta_max = 1e-6;
  Scalar a_opt = 5.5;
  Scalar sigma_p = 2.5;
  InfectionModel infection = InfectionModel::Gaussian;  // Constant: beta == beta_max

  // d(a) = d_max exp(-eta a)
  Scalar d_max = 1e-4;
  Scalar eta = 2.5;

  // mu(a) = mu_alpha0 / (a_max - a)^mu_exp
  Scalar mu_alpha0 = 1;
  Scalar mu_exp = 3;
  MortalityModel mortality = MortalityModel::PowerLaw;
  Scalar mu_constant = 0;  // used when mortality == Constant

  Scalar mu_F = 0.0495;
  Scalar mu_I = 0.045;
  Scalar alpha = 100;
  Scalar e_reinfect = 0.0002;
  Scalar gamma = 1000;
  Scalar rho = 400;
  Scalar K_cap = 1000;
  Scalar K_d = 60;
  Scalar a_max = 300;
  Scalar b_floor = 100;

  Scalar theta_max = 35;
  Scalar a_star = 240;
  Scalar a_0 = 270;

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Reference parameter set with the given peak infection rate
/// (1e-6 gives the pest-free regime, 7e-5 the endemic one).
template <typename Scalar = double>
ModelParameters<Scalar> reference_parameters(Scalar beta_max) {
  ModelParameters<Scalar> p;
  p.beta_max = beta_max;
  return p;
}

struct ParameterViolation {
  std::string field;
  std::string message;
  std::string assumption;  // modelling hypothesis the value breaks
};

template <typename Scalar>
std::vector<ParameterViolation> check_parameters(const ModelParameters<Scalar>& p) {
  std::vector<ParameterViolation> out;
  auto require = [&](bool ok, const char* field, std::string msg, const char* assumption) {
    if (!ok) out.push_back({field, std::move(msg), assumption});
  };
  auto nonneg = [&](Scalar v, const char* field) {
    require(std::isfinite(v) && v >= 0, field, std::string(field) + " must be finite and nonnegative",
            "nonnegative parameters");
  };

  nonneg(p.recruitment_m, "recruitment_m");
  nonneg(p.beta_max, "beta_max");
  nonneg(p.a_opt, "a_opt");
  nonneg(p.sigma_p, "sigma_p");
  nonneg(p.d_max, "d_max");
  nonneg(p.eta, "eta");
  nonneg(p.mu_alpha0, "mu_alpha0");
  nonneg(p.mu_exp, "mu_exp");
  nonneg(p.mu_constant, "mu_constant");
  nonneg(p.mu_F, "mu_F");
  nonneg(p.mu_I, "mu_I");
  nonneg(p.alpha, "alpha");
  nonneg(p.e_reinfect, "e_reinfect");
  nonneg(p.gamma, "gamma");
  nonneg(p.rho, "rho");
  nonneg(p.K_cap, "K_cap");
  nonneg(p.K_d, "K_d");
  nonneg(p.a_max, "a_max");
  nonneg(p.b_floor, "b_floor");
  nonneg(p.theta_max, "theta_max");
  nonneg(p.a_star, "a_star");
  nonneg(p.a_0, "a_0");

  require(p.mu_F > p.mu_I, "mu_F", "mu_F must exceed mu_I", "mu_I < mu_F");
  require(p.e_reinfect > 0 && p.e_reinfect < 1, "e_reinfect", "e_reinfect must lie in (0, 1)",
          "0 < e < 1");
  require(p.a_max > 0, "a_max", "a_max must be positive", "finite maximum age");
  require(p.a_star < p.a_max, "a_star", "a_star must be below a_max", "harvest age inside the age domain");
  require(p.K_d > 0, "K_d", "K_d must be positive", "Holling-II half saturation");
  require(p.K_cap > 0, "K_cap", "K_cap must be positive", "logistic carrying capacity");
  require(p.b_floor > 0, "b_floor", "b_floor must be positive", "P(t) >= b > 0");
  if (p.infection == InfectionModel::Gaussian)
    require(p.sigma_p > 0, "sigma_p", "sigma_p must be positive", "bounded infection rate");
  if (p.mortality == MortalityModel::PowerLaw) {
    require(p.mu_exp >= 1, "mu_exp", "mu_exp must be at least 1 so that the mortality integral diverges",
            "integral of mu over [0, a_max) is infinite");
    require(p.mu_alpha0 > 0, "mu_alpha0", "mu_alpha0 must be positive", "mu >= mu_tilde > 0");
  }
  return out;
}

class InvalidParameters : public std::invalid_argument {
 public:
  explicit InvalidParameters(std::vector<ParameterViolation> v)
      : std::invalid_argument(format(v)), violations_(std::move(v)) {}

  const std::vector<ParameterViolation>& violations() const noexcept { return violations_; }

 private:
  static std::string format(const std::vector<ParameterViolation>& v) {
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& x : v) os << "\n  " << x.field << ": " << x.message << " [" << x.assumption << "]";
    return os.str();
  }
  std::vector<ParameterViolation> violations_;
};

/// Returns `p` unchanged when every invariant holds; throws InvalidParameters
/// carrying the complete violation list otherwise.
template <typename Scalar>
const ModelParameters<Scalar>& validate_parameters(const ModelParameters<Scalar>& p) {
  auto v = check_parameters(p);
  if (!v.empty()) throw InvalidParameters(std::move(v));
  return p;
}

}  // namespace nemasim
