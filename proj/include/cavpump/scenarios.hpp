// Parameterized reproductions of the Rb F = 2 -> F' = 3 cavity experiment and
// of the two-transition pumping landscape.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavpump/constants.hpp"
#include "cavpump/levels.hpp"
#include "cavpump/meanfield.hpp"
#include "cavpump/pumping.hpp"

namespace cavpump {

/// Effective atom number of a cloud expanding ballistically at temperature T
/// from rms radius sigma0, seen through a Gaussian mode of waist w0:
///   N(t) = N0 (w0^2 + 4 sigma0^2) / (w0^2 + 4 sigma(t)^2),
///   sigma(t)^2 = sigma0^2 + k_B T t^2 / mass.
double atom_number_ballistic(double t, double n0, double temperature, double sigma0, double waist,
                             double mass = constants::rb87_mass);

/// Pump rate that gives the resonant empty-cavity photon number belonging to
/// the intracavity power p_cav: eta = kappa sqrt(n), n = p_cav l / (hbar omega c).
double eta_from_power(double p_cav, double kappa, double omega, double round_trip);

/// Two-level dipole potential at a standing-wave antinode, in kelvin.
/// Antinode intensity 8 P / (pi w0^2): the circulating power P splits into
/// two counter-propagating beams of P/2 whose fields add at the antinode.
double dipole_potential_depth(double p_cav, double waist, double delta, double gamma, double omega0);

struct CloudParams {
  double temperature = 75e-6;  // K
  double sigma0 = 2.5e-3;      // m
  double waist = 80e-6;        // m
  double mass = constants::rb87_mass;
};

struct CavityGeometry {
  double round_trip = 0.1;             // m
  double mirror_transmission = 0.015;  // power transmission of the output mirror
  double omega = constants::rb87_d2_omega;
};

struct ExperimentConfig {
  LevelScheme scheme{4, 6, Polarization::pi, constants::two_pi * 210e3,
                     constants::two_pi * constants::rb87_d2_linewidth};
  double kappa = constants::two_pi * 6.7e6;  // rad/s
  double n0 = 11200;
  CloudParams cloud{};
  CavityGeometry cavity{};
  std::vector<double> delta_p_mhz{24.0};
  std::vector<double> n0_per_detuning{};  // empty: n0 for every detuning
  double p_cav = 2.4e-9;                  // W
  std::optional<double> eta{};            // rad/s; overrides p_cav when set
  bool ballistic = true;
  double t_start = 0.0;
  double t_end = 20e-3;  // s
  std::size_t samples = 2001;
  Eigen::VectorXd initial_populations{};  // empty: equal populations
  MeanFieldControl control{};

  void validate() const;
  double pump_rate() const;
  double atoms_for(std::size_t detuning_index) const;
};

/// Peak excited population above which a run is flagged as outside the
/// weak-drive regime.
inline constexpr double kWeakFieldLimit = 0.05;

struct DynamicsTrace {
  double delta_p_mhz = 0.0;
  double n0 = 0.0;
  MeanFieldRun run;
  std::vector<double> transmission;      // |a|^2 relative to the empty-cavity maximum
  std::vector<double> power_w;           // transmitted power
  std::vector<double> collective_mhz;    // g_eff sqrt(N) / 2 pi, MHz
  double empty_cavity_transmission = 0.0;
  bool weak_field_ok = true;
};

/// Mean-field run at one probe detuning (Delta_a = Delta_c = 2 pi delta_p).
DynamicsTrace run_dynamics(const ExperimentConfig& config, double delta_p_mhz, double n0);

/// Single-detuning run with the cloud expanding (first configured detuning).
DynamicsTrace scenario_fig3(const ExperimentConfig& config);

/// One run per configured detuning, executed on up to `jobs` threads and
/// returned in detuning order.
std::vector<DynamicsTrace> scenario_fig4(const ExperimentConfig& config, unsigned jobs = 1);

struct Fig2Options {
  double atoms = 1.0;
  double delta_p_mhz = 0.0;
  double photon_number = 0.1;     // empty-cavity resonant photon number
  double relative_tolerance = 1e-6;  // max |dP_m/dt| / (Gamma sum rho_ee) at convergence
  double chunk = 1e-3;            // s
  double max_time = 1.0;          // s
};

struct Fig2Row {
  std::string label;
  double geff2_over_g02;
};

struct Fig2Result {
  std::vector<Fig2Row> rows;
  Eigen::VectorXd steady_state;
  double settle_time = 0.0;    // s
  double residual = 0.0;       // max |dP_m/dt| / (Gamma sum rho_ee) at settle_time
  double peak_rho_ee = 0.0;
};

/// Steady-state populations under weak cavity pumping, from long mean-field
/// integration until the largest population rate falls below
/// relative_tolerance times the total scattering rate Gamma sum rho_ee.
Fig2Result steady_state_populations(const CouplingSet& couplings, double kappa,
                                    const Fig2Options& options = {},
                                    const MeanFieldControl& control = {});

/// g_eff^2 / g0^2 for equal, steady-state and each single-sublevel population.
Fig2Result scenario_fig2(const LevelScheme& scheme, double kappa, const Fig2Options& options = {},
                         const MeanFieldControl& control = {});

struct Fig5Config {
  double gamma = constants::two_pi * constants::rb87_d2_linewidth;  // kappa = gamma
  double g0 = constants::two_pi * 210e3;
  double c_minus_sq = 1.0 / 3.0;
  double c_plus_sq = 1.0;
  double strong_coupling = 10.0;  // g0 sqrt(N) / Gamma
  double weak_coupling = 0.01;
  double sweep_min = -30.0;  // Delta_a / Gamma
  double sweep_max = 30.0;
  std::size_t sweep_points = 601;
  double initial_rate = 1e4;  // |dP_-/dt| at t = 0, 1/s
  double t_end = 1e-3;        // s
  std::size_t samples = 501;
  OdeSettings ode{1e-10, 1e-12};

  TwoTransitionParams params(double coupling, double delta_a) const;
};

struct Fig5Trace {
  std::string label;
  TwoTransitionParams params;
  RateCoefficients coeffs;
  Regime regime;
  RateTrace trace;
};

struct Fig5Result {
  Eigen::VectorXd delta_a_over_gamma;
  Eigen::VectorXd alpha_strong, beta_strong, alpha_weak, beta_weak;
  std::vector<Fig5Trace> traces;  // weak (reference), strong at Delta_a = g0 sqrt(N), strong at 0
};

Fig5Result scenario_fig5(const Fig5Config& config);

}  // namespace cavpump
