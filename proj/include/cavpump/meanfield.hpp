// Mean-field equations of motion for N identical multilevel atoms coupled to
// one driven cavity mode.
//
// Per ground sublevel m (paired with excited m' = m + q):
//   a'        = -(kappa - i Delta_c) a + N sum_m g_m sigma_m + eta
//   sigma_m'  = -(Gamma/2 - i Delta_a) sigma_m + g_m (2 rho_m' - P_m) a
//   P_m'      = -Gamma rho_m' + Gamma sum_k beta_m^k rho_k
//   rho_m''   = -Gamma rho_m' - g_m (a conj(sigma_m) + conj(a) sigma_m)

#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cavpump/levels.hpp"
#include "cavpump/ode.hpp"

namespace cavpump {

using Complex = std::complex<double>;

struct DriveParams {
  double eta = 0.0;      // pump rate, rad/s
  double delta_a = 0.0;  // probe - atom detuning, rad/s
  double delta_c = 0.0;  // probe - cavity detuning, rad/s
  double kappa = 0.0;    // cavity field decay, rad/s

  void validate() const;
};

struct MeanFieldState {
  Complex a{0.0, 0.0};
  Eigen::VectorXcd sigma;  // per ground sublevel
  Eigen::VectorXd P;       // per ground sublevel
  Eigen::VectorXd rho_ee;  // per ground sublevel's excited partner

  Eigen::Index size() const { return P.size(); }
  double photon_number() const { return std::norm(a); }
};

/// Effective atom number as a function of time.
class AtomNumberModel {
 public:
  struct Constant {
    double n0;
  };
  /// Transverse overlap of a ballistically expanding Gaussian cloud with a
  /// Gaussian mode, normalized to n0 at t = 0.
  struct Ballistic {
    double n0;
    double temperature;  // K
    double sigma0;       // initial cloud rms radius, m
    double waist;        // mode waist w0, m
    double mass;         // kg
  };
  /// Piecewise-linear interpolation, clamped at both ends.
  struct Table {
    std::vector<double> times;
    std::vector<double> values;
  };

  AtomNumberModel(Constant c);
  AtomNumberModel(Ballistic b);
  AtomNumberModel(Table t);

  double operator()(double t) const;
  bool is_constant() const { return std::holds_alternative<Constant>(model_); }

 private:
  std::variant<Constant, Ballistic, Table> model_;
};

/// Derivative of the mean-field state with atom number N.
MeanFieldState derivatives(const MeanFieldState& state, const DriveParams& params,
                           const CouplingSet& couplings, double N);

/// Ground populations normalized to unit sum; field, coherences and
/// excited populations zero.
MeanFieldState initial_state(const Eigen::VectorXd& populations);

struct MeanFieldControl {
  OdeSettings ode{};
  /// Step cap in units of 1 / max(kappa, Gamma, g0 sqrt(N(0)), |Delta_a|, |Delta_c|).
  /// Zero leaves the step bounded by the controller alone.
  double max_step_factor = 0.0;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<MeanFieldState> states;
  std::vector<double> n_eff;
  std::vector<double> g_eff;  // rad/s

  std::size_t size() const { return times.size(); }
};

struct MeanFieldRun {
  TimeSeries series;
  OdeStats stats;
  double conservation_drift = 0.0;  // max_t |sum_m P_m - 1| over accepted steps
  double peak_rho_ee = 0.0;         // max_t max_m rho_m'
  double peak_photon_number = 0.0;
};

/// Integrates the mean-field equations over [t0, t1] and samples the dense
/// solution on `grid` (sorted, within the span). N(t) is refreshed from
/// `atoms` at the start of every step. Throws StiffnessError on step-size
/// underflow.
MeanFieldRun integrate(const MeanFieldState& initial, const DriveParams& params,
                       const CouplingSet& couplings, const AtomNumberModel& atoms,
                       std::pair<double, double> t_span, std::span<const double> grid,
                       const MeanFieldControl& control = {});

/// Evenly spaced grid of `count` points covering [t0, t1].
std::vector<double> linear_grid(double t0, double t1, std::size_t count);

}  // namespace cavpump
