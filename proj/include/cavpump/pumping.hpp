// Weak-drive rate model for optical pumping between two ground states whose
// cavity couplings differ. Eliminating the cavity field and the coherences
// adiabatically leaves a single nonlinear equation for the population P_-
// of the initially occupied state:
//
//   dP_-/dt = -Gamma_eff P_- / (alpha P_-^2 + beta P_- + 1).
//
// alpha and beta measure how strongly the pumped population feeds back on
// the intracavity field through the effective coupling.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cavpump/meanfield.hpp"
#include "cavpump/ode.hpp"

namespace cavpump {

/// Raised when the rate-model denominators are not positive.
class DegenerateParameters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TwoTransitionParams {
  double c_minus_sq = 1.0 / 3.0;
  double c_plus_sq = 1.0;
  double g0 = 0.0;     // rad/s
  double gamma = 0.0;  // rad/s
  double kappa = 0.0;  // rad/s
  double N = 0.0;
  double delta_a = 0.0;  // rad/s
  double delta_c = 0.0;  // rad/s
  double eta = 0.0;      // rad/s

  void validate() const;
  DriveParams drive() const { return {eta, delta_a, delta_c, kappa}; }
};

struct RateCoefficients {
  double u = 0.0;
  double w = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma_eff = 0.0;  // rad/s
};

enum class Regime { exponential, accelerated, decelerated };
std::string to_string(Regime r);

RateCoefficients rate_coefficients(const TwoTransitionParams& p);

/// Nonlinear factor f(P) = 1 / (alpha P^2 + beta P + 1).
double rate_nonlinearity(double P, const RateCoefficients& c);

/// Right-hand side dP_-/dt of the rate equation.
double rate_derivative(double P, const RateCoefficients& c);

struct RateTrace {
  std::vector<double> times;
  std::vector<double> p_minus;
  OdeStats stats;
};

/// Integrates the rate equation from P_-(t0) = 1 and samples it on `grid`.
RateTrace integrate_rate(const TwoTransitionParams& p, std::pair<double, double> t_span,
                         std::span<const double> grid, const OdeSettings& ctrl = {});

/// Elapsed time at which P_- has decayed from 1 to P (closed-form inverse of
/// the rate equation). Throws std::domain_error unless 0 < P <= 1.
double implicit_time(double P, const RateCoefficients& c);

/// Exponential when max(|alpha|, |beta|) < 0.1, else by the sign of alpha + beta.
Regime classify_regime(const RateCoefficients& c);

inline constexpr double kExponentialThreshold = 0.1;

/// Strong-coupling estimate (c_-^2 - c_+^2)^2 g0^2 N / (Gamma/2 + kappa)^2.
double alpha_strong_coupling(const TwoTransitionParams& p);

/// Time scale tau = alpha / (2 Gamma_eff) of the early square-root decay.
double square_root_time(const RateCoefficients& c);

/// Power absorbed at t = 0 per unit dipole response, |a(0)|^2 / (Delta_a^2 + Gamma^2/4),
/// with |a(0)|^2 from the weak-field steady state at P_- = 1.
double initial_absorption(const TwoTransitionParams& p);

/// Pump rate eta for `p` giving the same initial absorption as `reference`.
double match_drive_strength(const TwoTransitionParams& p, const TwoTransitionParams& reference);

struct CrosscheckReport {
  std::vector<double> times;
  std::vector<double> p_minus_rate;
  std::vector<double> p_minus_meanfield;
  double max_deviation = 0.0;
  double peak_rho_ee = 0.0;
};

/// Integrates both the rate equation and the full mean-field equations of
/// the two-transition scheme (pure pumping decay) and compares P_-(t).
CrosscheckReport crosscheck_meanfield(const TwoTransitionParams& p, std::pair<double, double> t_span,
                                      std::size_t samples = 201, const MeanFieldControl& control = {});

}  // namespace cavpump
