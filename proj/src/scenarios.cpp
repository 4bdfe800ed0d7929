#include "cavpump/scenarios.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cavpump/spectra.hpp"

namespace cavpump {

using constants::two_pi;

double atom_number_ballistic(double t, double n0, double temperature, double sigma0, double waist,
                             double mass) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  const double w2 = waist * waist;
  const double s0 = sigma0 * sigma0;
  const double st = s0 + constants::boltzmann * temperature / mass * t * t;
  return n0 * (w2 + 4.0 * s0) / (w2 + 4.0 * st);
}

double eta_from_power(double p_cav, double kappa, double omega, double round_trip) {
  if (!(p_cav >= 0.0) || !(kappa > 0.0) || !(omega > 0.0) || !(round_trip > 0.0))
    throw std::invalid_argument("eta_from_power needs positive inputs");
  const double photons = p_cav * round_trip / (constants::hbar * omega * constants::speed_of_light);
  return kappa * std::sqrt(photons);
}

double dipole_potential_depth(double p_cav, double waist, double delta, double gamma, double omega0) {
  if (delta == 0.0) throw std::domain_error("dipole potential diverges at zero detuning");
  const double intensity = 8.0 * p_cav / (std::numbers::pi * waist * waist);
  const double c = constants::speed_of_light;
  const double u = 3.0 * std::numbers::pi * c * c / (2.0 * omega0 * omega0 * omega0) * (gamma / delta) * intensity;
  return u / constants::boltzmann;
}

void ExperimentConfig::validate() const {
  scheme.validate();
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(n0 >= 0.0)) throw std::invalid_argument("atom number must be nonnegative");
  if (delta_p_mhz.empty()) throw std::invalid_argument("at least one probe detuning is required");
  if (!n0_per_detuning.empty() && n0_per_detuning.size() != delta_p_mhz.size())
    throw std::invalid_argument("per-detuning atom numbers must match the detuning list");
  if (!(p_cav >= 0.0)) throw std::invalid_argument("intracavity power must be nonnegative");
  if (eta && !(*eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (!(cloud.temperature >= 0.0) || !(cloud.sigma0 >= 0.0) || !(cloud.waist > 0.0) || !(cloud.mass > 0.0))
    throw std::invalid_argument("invalid cloud parameters");
  if (!(cavity.round_trip > 0.0) || !(cavity.mirror_transmission > 0.0) || !(cavity.omega > 0.0))
    throw std::invalid_argument("invalid cavity geometry");
  if (!(t_end > t_start)) throw std::invalid_argument("time span must be increasing");
  if (samples < 2) throw std::invalid_argument("at least two output samples are required");
}

double ExperimentConfig::pump_rate() const {
  return eta ? *eta : eta_from_power(p_cav, kappa, cavity.omega, cavity.round_trip);
}

double ExperimentConfig::atoms_for(std::size_t i) const {
  return n0_per_detuning.empty() ? n0 : n0_per_detuning.at(i);
}

DynamicsTrace run_dynamics(const ExperimentConfig& config, double delta_p_mhz, double n0) {
  config.validate();
  const CouplingSet couplings = coupling_set(config.scheme);
  const double eta = config.pump_rate();
  const double detuning = two_pi * delta_p_mhz * 1e6;
  const DriveParams drive{eta, detuning, detuning, config.kappa};

  Eigen::VectorXd pops = config.initial_populations;
  if (pops.size() == 0) pops = Eigen::VectorXd::Ones(couplings.ground_count());
  const MeanFieldState start = initial_state(pops);

  const AtomNumberModel atoms =
      config.ballistic ? AtomNumberModel(AtomNumberModel::Ballistic{n0, config.cloud.temperature,
                                                                     config.cloud.sigma0, config.cloud.waist,
                                                                     config.cloud.mass})
                       : AtomNumberModel(AtomNumberModel::Constant{n0});

  const auto grid = linear_grid(config.t_start, config.t_end, config.samples);
  DynamicsTrace out;
  out.delta_p_mhz = delta_p_mhz;
  out.n0 = n0;
  out.run = integrate(start, drive, couplings, atoms, {config.t_start, config.t_end}, grid, config.control);

  const double empty_max = eta * eta / (config.kappa * config.kappa);
  out.empty_cavity_transmission = config.kappa * config.kappa / (config.kappa * config.kappa + detuning * detuning);
  const auto& series = out.run.series;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double photons = series.states[i].photon_number();
    out.transmission.push_back(empty_max > 0.0 ? photons / empty_max : 0.0);
    out.power_w.push_back(transmitted_power(photons, config.cavity.omega, config.cavity.round_trip,
                                            config.cavity.mirror_transmission));
    out.collective_mhz.push_back(series.g_eff[i] * std::sqrt(series.n_eff[i]) / two_pi / 1e6);
  }
  out.weak_field_ok = out.run.peak_rho_ee <= kWeakFieldLimit;
  return out;
}

DynamicsTrace scenario_fig3(const ExperimentConfig& config) {
  config.validate();
  return run_dynamics(config, config.delta_p_mhz.front(), config.atoms_for(0));
}

std::vector<DynamicsTrace> scenario_fig4(const ExperimentConfig& config, unsigned jobs) {
  config.validate();
  const std::size_t count = config.delta_p_mhz.size();
  std::vector<DynamicsTrace> traces(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        traces[i] = run_dynamics(config, config.delta_p_mhz[i], config.atoms_for(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

Fig2Result steady_state_populations(const CouplingSet& couplings, double kappa, const Fig2Options& options,
                                    const MeanFieldControl& control) {
  if (!(options.chunk > 0.0) || !(options.max_time > 0.0) || !(options.relative_tolerance > 0.0))
    throw std::invalid_argument("invalid steady-state search options");
  const double detuning = two_pi * options.delta_p_mhz * 1e6;
  const DriveParams drive{kappa * std::sqrt(options.photon_number), detuning, detuning, kappa};
  const AtomNumberModel atoms = AtomNumberModel::Constant{options.atoms};

  MeanFieldState state = initial_state(Eigen::VectorXd::Ones(couplings.ground_count()));
  Fig2Result result;
  double t = 0.0;
  while (true) {
    const double end = t + options.chunk;
    const std::vector<double> grid{end};
    MeanFieldRun run = integrate(state, drive, couplings, atoms, {t, end}, grid, control);
    state = run.series.states.back();
    result.peak_rho_ee = std::max(result.peak_rho_ee, run.peak_rho_ee);
    t = end;
    const MeanFieldState rate = derivatives(state, drive, couplings, options.atoms);
    const double scattering = couplings.gamma * state.rho_ee.sum();
    result.residual = scattering > 0.0 ? rate.P.cwiseAbs().maxCoeff() / scattering : 0.0;
    if (result.residual < options.relative_tolerance) break;
    if (t >= options.max_time) {
      std::ostringstream msg;
      msg << "steady state not reached within " << options.max_time << " s (relative residual " << result.residual
          << ")";
      throw std::runtime_error(msg.str());
    }
  }
  result.settle_time = t;
  result.steady_state = state.P / state.P.sum();
  return result;
}

Fig2Result scenario_fig2(const LevelScheme& scheme, double kappa, const Fig2Options& options,
                         const MeanFieldControl& control) {
  if (scheme.polarization != Polarization::pi) throw std::invalid_argument("the population table assumes pi driving");
  const CouplingSet couplings = coupling_set(scheme);
  const Eigen::Index n = couplings.ground_count();
  const double g02 = couplings.g0 * couplings.g0;
  auto ratio = [&](const Eigen::VectorXd& pops) {
    const double g = effective_coupling(couplings, pops);
    return g * g / g02;
  };

  Fig2Result result = steady_state_populations(couplings, kappa, options, control);
  result.rows.push_back({"equal", ratio(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)))});
  result.rows.push_back({"steady_state", ratio(result.steady_state)});
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd single = Eigen::VectorXd::Zero(n);
    single[i] = 1.0;
    result.rows.push_back({"m=" + format_two_m(couplings.two_m_ground[static_cast<std::size_t>(i)]), ratio(single)});
  }
  return result;
}

TwoTransitionParams Fig5Config::params(double coupling, double delta_a) const {
  TwoTransitionParams p;
  p.c_minus_sq = c_minus_sq;
  p.c_plus_sq = c_plus_sq;
  p.g0 = g0;
  p.gamma = gamma;
  p.kappa = gamma;
  const double root_n = coupling * gamma / g0;
  p.N = root_n * root_n;
  p.delta_a = p.delta_c = delta_a;
  p.eta = 1.0;
  return p;
}

Fig5Result scenario_fig5(const Fig5Config& config) {
  if (config.sweep_points < 2 || !(config.sweep_max > config.sweep_min))
    throw std::invalid_argument("invalid detuning sweep");
  if (!(config.initial_rate > 0.0) || !(config.t_end > 0.0)) throw std::invalid_argument("invalid trace settings");

  Fig5Result out;
  const auto sweep = linear_grid(config.sweep_min, config.sweep_max, config.sweep_points);
  const Eigen::Index n = static_cast<Eigen::Index>(sweep.size());
  out.delta_a_over_gamma = Eigen::Map<const Eigen::VectorXd>(sweep.data(), n);
  out.alpha_strong.resize(n);
  out.beta_strong.resize(n);
  out.alpha_weak.resize(n);
  out.beta_weak.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double delta = sweep[static_cast<std::size_t>(i)] * config.gamma;
    const RateCoefficients strong = rate_coefficients(config.params(config.strong_coupling, delta));
    const RateCoefficients weak = rate_coefficients(config.params(config.weak_coupling, delta));
    out.alpha_strong[i] = strong.alpha;
    out.beta_strong[i] = strong.beta;
    out.alpha_weak[i] = weak.alpha;
    out.beta_weak[i] = weak.beta;
  }

  // Reference drive: weak coupling on resonance, scaled to the requested
  // initial decay rate. The other traces absorb the same initial power.
  TwoTransitionParams reference = config.params(config.weak_coupling, 0.0);
  {
    const RateCoefficients unit = rate_coefficients(reference);
    const double unit_rate = -rate_derivative(1.0, unit);
    reference.eta = std::sqrt(config.initial_rate / unit_rate);
  }
  const double strong_detuning = config.strong_coupling * config.gamma;  // Delta_a = g0 sqrt(N)
  std::vector<std::pair<std::string, TwoTransitionParams>> cases{
      {"weak", reference},
      {"strong_resonant_normal_mode", config.params(config.strong_coupling, strong_detuning)},
      {"strong_zero_detuning", config.params(config.strong_coupling, 0.0)},
  };
  const auto grid = linear_grid(0.0, config.t_end, config.samples);
  for (auto& [label, p] : cases) {
    if (label != "weak") p.eta = match_drive_strength(p, reference);
    Fig5Trace trace;
    trace.label = label;
    trace.params = p;
    trace.coeffs = rate_coefficients(p);
    trace.regime = classify_regime(trace.coeffs);
    trace.trace = integrate_rate(p, {0.0, config.t_end}, grid, config.ode);
    out.traces.push_back(std::move(trace));
  }
  return out;
}

}  // namespace cavpump
