// Closed-form weak-field steady state of the driven atom-cavity system.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cavpump/levels.hpp"
#include "cavpump/meanfield.hpp"

namespace cavpump {

/// g_eff = g0 sqrt(sum_m c_m^2 P_m). Populations must sum to one within 1e-9.
double effective_coupling(const CouplingSet& couplings, const Eigen::VectorXd& populations);

/// Steady-state intracavity photon number |a|^2 in the weak-field limit.
/// Throws std::domain_error when the denominator vanishes.
double intracavity_intensity_ss(const DriveParams& params, double gamma, double N, double g_eff);

/// Collective normal-mode splitting 2 g_eff sqrt(N).
double normal_mode_splitting(double g_eff, double N);

/// Located maximum of a sampled curve.
struct Peak {
  double position;
  double value;
};

struct SpectrumScan {
  Eigen::VectorXd detunings;    // probe detuning Delta_a = Delta_c, rad/s
  Eigen::VectorXd intensities;  // |a|^2
  std::vector<Peak> peaks;      // one or two, ordered by position
  double separation = 0.0;      // rad/s, zero for a single peak
};

/// Up to `max_peaks` largest local maxima, refined by a three-point parabola
/// through the logarithm of the samples. Returned in increasing position.
std::vector<Peak> find_peaks(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int max_peaks = 2);

/// Evaluates the steady-state intensity along Delta_a = Delta_c = grid.
/// `drive` supplies eta and kappa; its detunings are ignored.
SpectrumScan transmission_spectrum(const DriveParams& drive, double gamma, double N,
                                   const CouplingSet& couplings, const Eigen::VectorXd& populations,
                                   const Eigen::VectorXd& grid);

/// Transmitted power (W) for intracavity photon number `a_sq`:
/// P_circ = a_sq * hbar * omega * c / round_trip, transmitted through a mirror
/// of power transmission `mirror_transmission`.
double transmitted_power(double a_sq, double omega, double round_trip, double mirror_transmission);

/// Circulating power (W) for intracavity photon number `a_sq`.
double circulating_power(double a_sq, double omega, double round_trip);

}  // namespace cavpump
