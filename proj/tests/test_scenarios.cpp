#include <cmath>

#include "cavpump/constants.hpp"
#include "cavpump/scenarios.hpp"
#include "doctest.h"

using namespace cavpump;
using constants::two_pi;

namespace {

// Weak-field steady state of resonant pi pumping: every sublevel is excited
// at a rate proportional to c_m^2 P_m, so the populations solve
// sum_k beta_m^k c_k^2 P_k = c_m^2 P_m.
Eigen::VectorXd pumping_fixed_point(const CouplingSet& c) {
  const Eigen::MatrixXd B = c.paired_branching();
  const Eigen::MatrixXd A = (B - Eigen::MatrixXd::Identity(B.rows(), B.cols())) * c.cg_squared().asDiagonal();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd v = lu.kernel().col(0);
  return v / v.sum();
}

}  // namespace

TEST_SUITE("scenarios") {
  TEST_CASE("ballistic atom number") {
    const double n0 = 1e4, T = 75e-6, s0 = 1e-3, w0 = 80e-6, m = constants::rb87_mass;
    CHECK(atom_number_ballistic(0.0, n0, T, s0, w0, m) == doctest::Approx(n0));
    double prev = n0;
    for (double t = 1e-3; t < 0.05; t += 1e-3) {
      const double n = atom_number_ballistic(t, n0, T, s0, w0, m);
      CHECK(n < prev);
      prev = n;
    }
    // Late times: N t^2 -> n0 (w0^2 + 4 s0^2) m / (4 kB T).
    const double t = 10.0;
    const double asym = n0 * (w0 * w0 + 4 * s0 * s0) * m / (4 * constants::boltzmann * T);
    CHECK(atom_number_ballistic(t, n0, T, s0, w0, m) * t * t == doctest::Approx(asym).epsilon(1e-4));
    CHECK(atom_number_ballistic(1.0, n0, 0.0, s0, w0, m) == n0);
    CHECK_THROWS_AS(atom_number_ballistic(-1.0, n0, T, s0, w0, m), std::invalid_argument);
  }

  TEST_CASE("pump rate from intracavity power") {
    const double kappa = two_pi * 6.7e6;
    const double omega = two_pi * 384.2304844685e12;
    // Photon energy 2.5459e-19 J; round-trip time 0.1 m / c.
    const double photons = 2.4e-9 * (0.1 / 299792458.0) / (1.054571817e-34 * omega);
    CHECK(photons == doctest::Approx(3.1437).epsilon(1e-3));
    CHECK(eta_from_power(2.4e-9, kappa, omega, 0.1) == doctest::Approx(kappa * std::sqrt(photons)).epsilon(1e-9));
    CHECK(eta_from_power(0.0, kappa, omega, 0.1) == 0.0);
    CHECK_THROWS_AS(eta_from_power(-1.0, kappa, omega, 0.1), std::invalid_argument);
  }

  TEST_CASE("dipole potential") {
    const double gamma = two_pi * constants::rb87_d2_linewidth;
    const double depth = dipole_potential_depth(2.4e-9, 80e-6, two_pi * 25e6, gamma, constants::rb87_d2_omega);
    CHECK(depth == doctest::Approx(0.505e-6).epsilon(0.01));
    CHECK(dipole_potential_depth(2.4e-9, 80e-6, -two_pi * 25e6, gamma, constants::rb87_d2_omega) ==
          doctest::Approx(-depth));
    CHECK_THROWS_AS(dipole_potential_depth(1e-9, 80e-6, 0.0, gamma, constants::rb87_d2_omega), std::domain_error);
  }

  TEST_CASE("experiment configuration validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.pump_rate() == doctest::Approx(eta_from_power(2.4e-9, c.kappa, c.cavity.omega, 0.1)));
    c.eta = 5.0;
    CHECK(c.pump_rate() == 5.0);
    c.n0_per_detuning = {1.0, 2.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.t_end = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.delta_p_mhz.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.scheme.two_fe = 4;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("steady-state populations match the pumping fixed point") {
    const LevelScheme scheme{4, 6, Polarization::pi, two_pi * 210e3, two_pi * constants::rb87_d2_linewidth};
    const Fig2Result f = scenario_fig2(scheme, two_pi * 6.7e6);
    const Eigen::VectorXd expected = pumping_fixed_point(coupling_set(scheme));
    CHECK((f.steady_state - expected).cwiseAbs().maxCoeff() < 1e-4);
    REQUIRE(f.rows.size() == 7);
    CHECK(f.rows[0].label == "equal");
    CHECK(f.rows[1].label == "steady_state");
    CHECK(f.rows[2].label == "m=-2");
    CHECK(f.rows[4].label == "m=0");
    CHECK(f.rows[4].geff2_over_g02 == doctest::Approx(0.6));
    CHECK(f.rows[6].geff2_over_g02 == doctest::Approx(1.0 / 3.0));
    const double expected_ratio = coupling_set(scheme).cg_squared().dot(expected);
    CHECK(f.rows[1].geff2_over_g02 == doctest::Approx(expected_ratio).epsilon(1e-4));
    CHECK(f.peak_rho_ee < 1e-3);
    CHECK_THROWS_AS(scenario_fig2(LevelScheme{4, 6, Polarization::sigma_plus, 1.0, 1.0}, 1.0), std::invalid_argument);
  }

  TEST_CASE("steady-state search gives up after max_time") {
    const LevelScheme scheme{4, 6, Polarization::pi, two_pi * 210e3, two_pi * constants::rb87_d2_linewidth};
    Fig2Options o;
    o.chunk = 1e-5;
    o.max_time = 2e-5;
    CHECK_THROWS_AS(steady_state_populations(coupling_set(scheme), two_pi * 6.7e6, o), std::runtime_error);
  }

  TEST_CASE("detuning family runs are independent of the worker count") {
    ExperimentConfig c;
    c.delta_p_mhz = {-24.0, -15.0, 15.0, 24.0};
    c.n0_per_detuning = {10600, 9200, 10500, 11200};
    c.t_end = 0.2e-3;
    c.samples = 21;
    const auto serial = scenario_fig4(c, 1);
    const auto parallel = scenario_fig4(c, 4);
    REQUIRE(serial.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(serial[i].delta_p_mhz == c.delta_p_mhz[i]);
      CHECK(serial[i].n0 == c.n0_per_detuning[i]);
      CHECK(serial[i].transmission == parallel[i].transmission);
      CHECK(serial[i].weak_field_ok);
      CHECK(serial[i].empty_cavity_transmission ==
            doctest::Approx(1.0 / (1.0 + std::pow(c.delta_p_mhz[i] / 6.7, 2))));
    }
  }

  TEST_CASE("constant atom number without drive keeps the coupling fixed") {
    ExperimentConfig c;
    c.eta = 0.0;
    c.ballistic = false;
    c.t_end = 0.1e-3;
    c.samples = 11;
    const DynamicsTrace t = scenario_fig3(c);
    for (double v : t.collective_mhz) CHECK(v == doctest::Approx(t.collective_mhz.front()));
    CHECK(t.collective_mhz.front() == doctest::Approx(0.210 * std::sqrt(7.0 / 15.0 * 11200)).epsilon(1e-12));
  }

  TEST_CASE("two-transition landscape") {
    Fig5Config f;
    f.sweep_points = 61;
    f.samples = 21;
    const Fig5Result r = scenario_fig5(f);
    CHECK(r.delta_a_over_gamma.size() == 61);
    CHECK(r.alpha_weak.cwiseAbs().maxCoeff() < 1e-3);
    CHECK(r.beta_weak.cwiseAbs().maxCoeff() < 1e-2);
    // The landscape is symmetric in the detuning.
    CHECK((r.alpha_strong - r.alpha_strong.reverse()).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE(r.traces.size() == 3);
    CHECK(r.traces[0].label == "weak");
    CHECK(r.traces[0].regime == Regime::exponential);
    CHECK(r.traces[1].regime == Regime::accelerated);
    CHECK(r.traces[2].regime == Regime::decelerated);
    const double slope = rate_derivative(1.0, r.traces[0].coeffs);
    CHECK(slope == doctest::Approx(-f.initial_rate).epsilon(1e-9));
    for (const auto& t : r.traces) CHECK(rate_derivative(1.0, t.coeffs) == doctest::Approx(slope).epsilon(1e-9));
    // Acceleration: the strong resonant trace is below the weak one at the end.
    CHECK(r.traces[1].trace.p_minus.back() < r.traces[0].trace.p_minus.back());
    CHECK(r.traces[2].trace.p_minus.back() > r.traces[0].trace.p_minus.back());
  }
}
