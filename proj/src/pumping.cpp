#include "cavpump/pumping.hpp"

#include <algorithm>
#include <cmath>

#include "cavpump/levels.hpp"
#include "cavpump/spectra.hpp"

namespace cavpump {

void TwoTransitionParams::validate() const {
  if (!(c_minus_sq > 0.0 && c_minus_sq <= 1.0) || !(c_plus_sq > 0.0 && c_plus_sq <= 1.0))
    throw std::invalid_argument("squared coupling coefficients must lie in (0, 1]");
  if (!(g0 > 0.0) || !(gamma > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("g0, Gamma and kappa must be positive");
  if (!(N > 0.0)) throw std::invalid_argument("atom number must be positive");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::exponential: return "exponential";
    case Regime::accelerated: return "accelerated";
    case Regime::decelerated: return "decelerated";
  }
  return "?";
}

RateCoefficients rate_coefficients(const TwoTransitionParams& p) {
  p.validate();
  const double g2n = p.g0 * p.g0 * p.N;
  RateCoefficients c;
  c.u = (p.gamma * p.kappa - 2.0 * p.delta_a * p.delta_c) / g2n;
  c.w = (0.25 * p.gamma * p.gamma + p.delta_a * p.delta_a) * (p.kappa * p.kappa + p.delta_c * p.delta_c) /
        (g2n * g2n);

  const double diff = p.c_minus_sq - p.c_plus_sq;
  const double den_alpha = p.c_plus_sq * (p.c_plus_sq + c.u) + c.w;
  const double den_beta = (p.c_plus_sq + c.u) + c.w;
  if (!(den_alpha > 0.0) || !(den_beta > 0.0))
    throw DegenerateParameters("rate-model denominator is not positive (u = " + std::to_string(c.u) +
                               ", w = " + std::to_string(c.w) + ")");

  c.alpha = diff * diff / den_alpha;
  c.beta = 2.0 * diff * (1.0 + 0.5 * c.u) / den_beta;
  c.gamma_eff = p.eta * p.eta / (p.g0 * p.g0 * p.N * p.N) * (p.c_minus_sq / p.c_plus_sq) * p.gamma / den_beta;
  return c;
}

double rate_nonlinearity(double P, const RateCoefficients& c) {
  return 1.0 / (c.alpha * P * P + c.beta * P + 1.0);
}

double rate_derivative(double P, const RateCoefficients& c) {
  return -c.gamma_eff * rate_nonlinearity(P, c) * P;
}

RateTrace integrate_rate(const TwoTransitionParams& p, std::pair<double, double> t_span,
                         std::span<const double> grid, const OdeSettings& ctrl) {
  const RateCoefficients c = rate_coefficients(p);
  // f must stay positive on [0, 1]; its reciprocal is a quadratic whose
  // minimum on the interval is at an end point or the vertex.
  double lowest = std::min(1.0, c.alpha + c.beta + 1.0);
  if (c.alpha > 0.0) {
    const double vertex = -c.beta / (2.0 * c.alpha);
    if (vertex > 0.0 && vertex < 1.0) lowest = std::min(lowest, 1.0 - c.beta * c.beta / (4.0 * c.alpha));
  }
  if (!(lowest > 0.0)) throw DegenerateParameters("rate nonlinearity changes sign on [0, 1]");

  using State = Eigen::Matrix<double, 1, 1>;
  RateTrace trace;
  trace.times.reserve(grid.size());
  trace.p_minus.reserve(grid.size());
  auto rhs = [&](double, const State& y, State& dy) { dy[0] = rate_derivative(y[0], c); };
  auto observe = [&](double t, const State& y) {
    trace.times.push_back(t);
    trace.p_minus.push_back(y[0]);
  };
  State y;
  y[0] = 1.0;
  DormandPrince<State> solver(ctrl);
  trace.stats = solver.integrate(rhs, y, t_span.first, t_span.second, grid, observe);
  return trace;
}

double implicit_time(double P, const RateCoefficients& c) {
  if (!(P > 0.0 && P <= 1.0)) throw std::domain_error("implicit time needs 0 < P <= 1");
  if (!(c.gamma_eff > 0.0)) throw std::domain_error("implicit time needs a positive decay rate");
  return -(0.5 * c.alpha * P * P + c.beta * P + std::log(P)) / c.gamma_eff +
         (c.alpha + 2.0 * c.beta) / (2.0 * c.gamma_eff);
}

Regime classify_regime(const RateCoefficients& c) {
  if (std::max(std::abs(c.alpha), std::abs(c.beta)) < kExponentialThreshold) return Regime::exponential;
  return c.alpha + c.beta > 0.0 ? Regime::accelerated : Regime::decelerated;
}

double alpha_strong_coupling(const TwoTransitionParams& p) {
  const double diff = p.c_minus_sq - p.c_plus_sq;
  const double width = 0.5 * p.gamma + p.kappa;
  return diff * diff * p.g0 * p.g0 * p.N / (width * width);
}

double square_root_time(const RateCoefficients& c) { return c.alpha / (2.0 * c.gamma_eff); }

double initial_absorption(const TwoTransitionParams& p) {
  p.validate();
  const double g_eff = p.g0 * std::sqrt(p.c_minus_sq);
  const double a_sq = intracavity_intensity_ss(p.drive(), p.gamma, p.N, g_eff);
  return a_sq / (p.delta_a * p.delta_a + 0.25 * p.gamma * p.gamma);
}

double match_drive_strength(const TwoTransitionParams& p, const TwoTransitionParams& reference) {
  const double target = initial_absorption(reference);
  if (!(target > 0.0)) throw std::domain_error("reference absorbs no light; drive cannot be matched");
  TwoTransitionParams unit = p;
  unit.eta = 1.0;
  return std::sqrt(target / initial_absorption(unit));
}

CrosscheckReport crosscheck_meanfield(const TwoTransitionParams& p, std::pair<double, double> t_span,
                                      std::size_t samples, const MeanFieldControl& control) {
  p.validate();
  const auto grid = linear_grid(t_span.first, t_span.second, std::max<std::size_t>(samples, 2));

  CrosscheckReport report;
  report.times = grid;
  const RateTrace rate = integrate_rate(p, t_span, grid, control.ode);
  report.p_minus_rate = rate.p_minus;

  const CouplingSet scheme =
      two_transition_scheme(p.c_minus_sq, p.c_plus_sq, p.g0, p.gamma, TwoTransitionDecay::pumping);
  const MeanFieldState start = initial_state(Eigen::Vector2d(1.0, 0.0));
  const MeanFieldRun run =
      integrate(start, p.drive(), scheme, AtomNumberModel::Constant{p.N}, t_span, grid, control);
  report.peak_rho_ee = run.peak_rho_ee;
  report.p_minus_meanfield.reserve(grid.size());
  for (const auto& s : run.series.states) report.p_minus_meanfield.push_back(s.P[0]);

  for (std::size_t i = 0; i < grid.size(); ++i)
    report.max_deviation =
        std::max(report.max_deviation, std::abs(report.p_minus_rate[i] - report.p_minus_meanfield[i]));
  return report;
}

}  // namespace cavpump
