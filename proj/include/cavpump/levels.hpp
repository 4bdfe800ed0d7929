// Angular-momentum algebra for an F -> F' transition driven by a single
// cavity polarization.
//
// All angular momenta and projections are passed as twice their value so
// that half-integer quantum numbers are represented exactly.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace cavpump {

using Rational = boost::multiprecision::cpp_rational;

enum class Polarization { pi, sigma_plus, sigma_minus };

/// Spherical photon component q (0, +1, -1), returned doubled (0, +2, -2).
int two_q(Polarization p);
Polarization parse_polarization(const std::string& name);
std::string to_string(Polarization p);

/// Formats a doubled projection as "-2", "0", "+1/2" etc.
std::string format_two_m(int two_m);

struct LevelScheme {
  int two_fg = 4;
  int two_fe = 6;
  Polarization polarization = Polarization::pi;
  double g0 = 0.0;     // rad/s
  double gamma = 0.0;  // rad/s

  /// Throws std::invalid_argument on inconsistent quantum numbers or rates,
  /// and on open transitions (Fe != Fg + 1).
  void validate() const;
};

/// Couplings of the ground manifold to the cavity and the spontaneous
/// decay branching of the excited manifold.
///
/// Ground sublevels are ordered by increasing m. Each ground sublevel i is
/// driven to excited sublevel `paired[i]` (index into `two_m_excited`).
struct CouplingSet {
  std::vector<int> two_m_ground;
  std::vector<int> two_m_excited;
  std::vector<int> paired;
  Eigen::VectorXd cg;         // signed Clebsch-Gordan coefficient c_m
  Eigen::VectorXd g;          // g0 * c_m, rad/s
  Eigen::MatrixXd branching;  // (ground m, excited k) -> beta_m^k
  double g0 = 0.0;
  double gamma = 0.0;

  Eigen::Index ground_count() const { return static_cast<Eigen::Index>(two_m_ground.size()); }

  /// c_m^2 for every ground sublevel.
  Eigen::VectorXd cg_squared() const { return cg.array().square(); }

  /// Branching restricted to the driven excited sublevels:
  /// column j is the decay distribution of the excited partner of ground j.
  Eigen::MatrixXd paired_branching() const;

  /// Index of the ground sublevel with doubled projection two_m, or -1.
  int ground_index(int two_m) const;
};

/// <j1 m1; j2 m2 | j m> with the Condon-Shortley phase. Evaluated by the
/// Racah sum in exact rational arithmetic; zero when the projection or
/// triangle selection rules fail.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m);

/// Exact square of the Clebsch-Gordan coefficient, carrying its sign:
/// returns sign(c) * c^2.
Rational clebsch_gordan_signed_square(int two_j1, int two_m1, int two_j2, int two_m2, int two_j,
                                      int two_m);

CouplingSet coupling_set(const LevelScheme& scheme);

/// Decay channel of the excited partner of m = -1/2 in the two-ground-state
/// model.
enum class TwoTransitionDecay {
  /// Decays only into m = +1/2, so every scattering event pumps the atom.
  pumping,
  /// Branching of a real F = 1/2 -> F' = 3/2 transition (1/3 returns to -1/2).
  fe_three_halves,
};

/// Synthetic two-ground-state scheme (m = -1/2, +1/2) driven by sigma+ light
/// with freely chosen squared coupling coefficients.
CouplingSet two_transition_scheme(double c_minus_sq, double c_plus_sq, double g0, double gamma,
                                  TwoTransitionDecay decay = TwoTransitionDecay::pumping);

}  // namespace cavpump
