#include "cavpump/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavpump/scenarios.hpp"

namespace cavpump {

void DriveParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (!std::isfinite(delta_a) || !std::isfinite(delta_c))
    throw std::invalid_argument("detunings must be finite");
}

AtomNumberModel::AtomNumberModel(Constant c) : model_(c) {
  if (!(c.n0 >= 0.0)) throw std::invalid_argument("atom number must be nonnegative");
}

AtomNumberModel::AtomNumberModel(Ballistic b) : model_(b) {
  if (!(b.n0 >= 0.0) || !(b.temperature >= 0.0) || !(b.sigma0 >= 0.0) || !(b.waist > 0.0) ||
      !(b.mass > 0.0))
    throw std::invalid_argument("invalid ballistic cloud parameters");
}

AtomNumberModel::AtomNumberModel(Table t) : model_(std::move(t)) {
  const auto& tab = std::get<Table>(model_);
  if (tab.times.empty() || tab.times.size() != tab.values.size())
    throw std::invalid_argument("atom-number table needs matching, nonempty columns");
  for (std::size_t i = 1; i < tab.times.size(); ++i)
    if (!(tab.times[i] > tab.times[i - 1]))
      throw std::invalid_argument("atom-number table times must be strictly increasing");
  for (double v : tab.values)
    if (!(v >= 0.0)) throw std::invalid_argument("atom-number table values must be nonnegative");
}

double AtomNumberModel::operator()(double t) const {
  struct Visitor {
    double t;
    double operator()(const Constant& c) const { return c.n0; }
    double operator()(const Ballistic& b) const {
      return atom_number_ballistic(t, b.n0, b.temperature, b.sigma0, b.waist, b.mass);
    }
    double operator()(const Table& tab) const {
      if (t <= tab.times.front()) return tab.values.front();
      if (t >= tab.times.back()) return tab.values.back();
      auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
      const auto i = static_cast<std::size_t>(it - tab.times.begin());
      const double w = (t - tab.times[i - 1]) / (tab.times[i] - tab.times[i - 1]);
      return (1.0 - w) * tab.values[i - 1] + w * tab.values[i];
    }
  };
  return std::visit(Visitor{t}, model_);
}

namespace {

void check_sizes(const MeanFieldState& s, const CouplingSet& c) {
  const Eigen::Index n = c.ground_count();
  if (s.sigma.size() != n || s.P.size() != n || s.rho_ee.size() != n)
    throw std::invalid_argument("state sublevels do not match the coupling set");
}

// Flat layout: [a, sigma_0..n-1, P_0..n-1, rho_0..n-1]; populations are
// carried as complex numbers with zero imaginary part.
Eigen::VectorXcd pack(const MeanFieldState& s) {
  const Eigen::Index n = s.size();
  Eigen::VectorXcd y(1 + 3 * n);
  y[0] = s.a;
  y.segment(1, n) = s.sigma;
  y.segment(1 + n, n) = s.P.cast<Complex>();
  y.segment(1 + 2 * n, n) = s.rho_ee.cast<Complex>();
  return y;
}

MeanFieldState unpack(const Eigen::VectorXcd& y, Eigen::Index n) {
  MeanFieldState s;
  s.a = y[0];
  s.sigma = y.segment(1, n);
  s.P = y.segment(1 + n, n).real();
  s.rho_ee = y.segment(1 + 2 * n, n).real();
  return s;
}

class MeanFieldRhs {
 public:
  MeanFieldRhs(const DriveParams& p, const CouplingSet& c, double N)
      : p_(p), g_(c.g), beta_(c.paired_branching()), gamma_(c.gamma), n_atoms_(N) {}

  void set_atoms(double N) { n_atoms_ = N; }

  void operator()(double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
    const Eigen::Index n = g_.size();
    const Complex a = y[0];
    const Complex cavity_damp(p_.kappa, -p_.delta_c);
    const Complex dipole_damp(0.5 * gamma_, -p_.delta_a);

    Complex polarization{0.0, 0.0};
    for (Eigen::Index m = 0; m < n; ++m) {
      const Complex sigma = y[1 + m];
      const double P = y[1 + n + m].real();
      const double rho = y[1 + 2 * n + m].real();
      polarization += g_[m] * sigma;
      dy[1 + m] = -dipole_damp * sigma + g_[m] * (2.0 * rho - P) * a;
      dy[1 + 2 * n + m] = -gamma_ * rho - 2.0 * g_[m] * (a * std::conj(sigma)).real();
    }
    dy[0] = -cavity_damp * a + n_atoms_ * polarization + p_.eta;

    for (Eigen::Index m = 0; m < n; ++m) {
      double refill = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) refill += beta_(m, k) * y[1 + 2 * n + k].real();
      dy[1 + n + m] = gamma_ * (refill - y[1 + 2 * n + m].real());
    }
  }

 private:
  DriveParams p_;
  Eigen::VectorXd g_;
  Eigen::MatrixXd beta_;
  double gamma_;
  double n_atoms_;
};

}  // namespace

MeanFieldState derivatives(const MeanFieldState& state, const DriveParams& params,
                           const CouplingSet& couplings, double N) {
  check_sizes(state, couplings);
  MeanFieldRhs rhs(params, couplings, N);
  const Eigen::VectorXcd y = pack(state);
  Eigen::VectorXcd dy(y.size());
  rhs(0.0, y, dy);
  return unpack(dy, state.size());
}

MeanFieldState initial_state(const Eigen::VectorXd& populations) {
  if (populations.size() == 0) throw std::invalid_argument("empty population vector");
  if ((populations.array() < 0.0).any() || !populations.allFinite())
    throw std::invalid_argument("populations must be finite and nonnegative");
  const double total = populations.sum();
  if (!(total > 0.0)) throw std::invalid_argument("populations must not all be zero");
  MeanFieldState s;
  s.P = populations / total;
  s.sigma = Eigen::VectorXcd::Zero(populations.size());
  s.rho_ee = Eigen::VectorXd::Zero(populations.size());
  return s;
}

std::vector<double> linear_grid(double t0, double t1, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {t0};
  std::vector<double> out(count);
  const double step = (t1 - t0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = t0 + step * static_cast<double>(i);
  out.back() = t1;
  return out;
}

MeanFieldRun integrate(const MeanFieldState& initial, const DriveParams& params,
                       const CouplingSet& couplings, const AtomNumberModel& atoms,
                       std::pair<double, double> t_span, std::span<const double> grid,
                       const MeanFieldControl& control) {
  check_sizes(initial, couplings);
  params.validate();
  const auto [t0, t1] = t_span;
  if (!(t1 > t0)) throw std::invalid_argument("time span must be increasing");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("output grid must be strictly increasing");

  const Eigen::Index n = initial.size();
  const Eigen::VectorXd g2 = couplings.g.array().square();

  OdeSettings ode = control.ode;
  if (control.max_step_factor > 0.0) {
    const double fastest = std::max({params.kappa, couplings.gamma,
                                     couplings.g0 * std::sqrt(std::max(atoms(t0), 0.0)),
                                     std::abs(params.delta_a), std::abs(params.delta_c)});
    const double cap = control.max_step_factor / fastest;
    ode.max_step = ode.max_step > 0.0 ? std::min(ode.max_step, cap) : cap;
  }

  MeanFieldRun run;
  MeanFieldRhs rhs(params, couplings, atoms(t0));
  auto& series = run.series;
  series.times.reserve(grid.size());
  series.states.reserve(grid.size());

  auto observe = [&](double t, const Eigen::VectorXcd& y) {
    MeanFieldState s = unpack(y, n);
    const double geff2 = g2.dot(s.P);
    series.times.push_back(t);
    series.n_eff.push_back(atoms(t));
    series.g_eff.push_back(std::sqrt(std::max(geff2, 0.0)));
    run.peak_rho_ee = std::max(run.peak_rho_ee, s.rho_ee.maxCoeff());
    run.peak_photon_number = std::max(run.peak_photon_number, s.photon_number());
    series.states.push_back(std::move(s));
  };

  const bool varying = !atoms.is_constant();
  auto on_step = [&](double t, const Eigen::VectorXcd& y) {
    double total = 0.0;
    double peak = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      total += y[1 + n + m].real();
      peak = std::max(peak, y[1 + 2 * n + m].real());
    }
    run.conservation_drift = std::max(run.conservation_drift, std::abs(total - 1.0));
    run.peak_rho_ee = std::max(run.peak_rho_ee, peak);
    run.peak_photon_number = std::max(run.peak_photon_number, std::norm(y[0]));
    if (varying) rhs.set_atoms(atoms(t));
    return varying;
  };

  Eigen::VectorXcd y = pack(initial);
  DormandPrince<Eigen::VectorXcd> solver(ode);
  run.stats = solver.integrate(rhs, y, t0, t1, grid, observe, on_step);
  return run;
}

}  // namespace cavpump
