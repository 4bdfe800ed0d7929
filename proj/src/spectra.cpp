#include "cavpump/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavpump/constants.hpp"

namespace cavpump {

double effective_coupling(const CouplingSet& couplings, const Eigen::VectorXd& populations) {
  if (populations.size() != couplings.ground_count())
    throw std::invalid_argument("population vector does not match the coupling set");
  if ((populations.array() < 0.0).any())
    throw std::invalid_argument("populations must be nonnegative");
  if (std::abs(populations.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("populations must be normalized");
  return couplings.g0 * std::sqrt(couplings.cg_squared().dot(populations));
}

double intracavity_intensity_ss(const DriveParams& params, double gamma, double N, double g_eff) {
  if (!(N >= 0.0)) throw std::invalid_argument("atom number must be nonnegative");
  const double dipole = 0.25 * gamma * gamma + params.delta_a * params.delta_a;
  const double cavity = params.kappa * params.kappa + params.delta_c * params.delta_c;
  const double ng2 = N * g_eff * g_eff;
  const double denom =
      ng2 * ng2 + ng2 * (gamma * params.kappa - 2.0 * params.delta_a * params.delta_c) + dipole * cavity;
  if (!(denom > 0.0)) throw std::domain_error("vanishing steady-state denominator");
  return dipole * params.eta * params.eta / denom;
}

double normal_mode_splitting(double g_eff, double N) {
  return 2.0 * g_eff * std::sqrt(std::max(N, 0.0));
}

std::vector<Peak> find_peaks(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int max_peaks) {
  const Eigen::Index n = x.size();
  if (n == 0 || y.size() != n) throw std::invalid_argument("peak search needs matching, nonempty samples");

  std::vector<Eigen::Index> maxima;
  for (Eigen::Index i = 1; i + 1 < n; ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) maxima.push_back(i);
  if (maxima.empty()) {
    Eigen::Index best;
    y.maxCoeff(&best);
    return {Peak{x[best], y[best]}};
  }
  std::stable_sort(maxima.begin(), maxima.end(), [&](auto a, auto b) { return y[a] > y[b]; });
  if (static_cast<int>(maxima.size()) > max_peaks) maxima.resize(static_cast<std::size_t>(max_peaks));

  std::vector<Peak> peaks;
  for (Eigen::Index i : maxima) {
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    if (!(y[i - 1] > 0.0 && y[i] > 0.0 && y[i + 1] > 0.0)) {
      peaks.push_back({x1, y[i]});
      continue;
    }
    const double l0 = std::log(y[i - 1]), l1 = std::log(y[i]), l2 = std::log(y[i + 1]);
    // Vertex of the parabola through the three (x, log y) samples.
    const double d01 = (l1 - l0) / (x1 - x0);
    const double d12 = (l2 - l1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (!(curv < 0.0)) {
      peaks.push_back({x1, y[i]});
      continue;
    }
    const double slope_mid = d01 - curv * (x0 - x1);  // derivative at x1
    const double xv = x1 - slope_mid / (2.0 * curv);
    const double lv = l1 + slope_mid * (xv - x1) + curv * (xv - x1) * (xv - x1);
    peaks.push_back({xv, std::exp(lv)});
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.position < b.position; });
  return peaks;
}

SpectrumScan transmission_spectrum(const DriveParams& drive, double gamma, double N,
                                   const CouplingSet& couplings, const Eigen::VectorXd& populations,
                                   const Eigen::VectorXd& grid) {
  if (grid.size() == 0) throw std::invalid_argument("empty detuning grid");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("detuning grid must be strictly increasing");

  const double g_eff = effective_coupling(couplings, populations);
  SpectrumScan scan;
  scan.detunings = grid;
  scan.intensities.resize(grid.size());
  DriveParams p = drive;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    p.delta_a = p.delta_c = grid[i];
    scan.intensities[i] = intracavity_intensity_ss(p, gamma, N, g_eff);
  }
  scan.peaks = find_peaks(scan.detunings, scan.intensities, 2);
  if (scan.peaks.size() == 2) scan.separation = scan.peaks[1].position - scan.peaks[0].position;
  return scan;
}

double circulating_power(double a_sq, double omega, double round_trip) {
  if (!(omega > 0.0) || !(round_trip > 0.0)) throw std::invalid_argument("geometry values must be positive");
  return a_sq * constants::hbar * omega * constants::speed_of_light / round_trip;
}

double transmitted_power(double a_sq, double omega, double round_trip, double mirror_transmission) {
  if (!(mirror_transmission > 0.0)) throw std::invalid_argument("mirror transmission must be positive");
  return circulating_power(a_sq, omega, round_trip) * mirror_transmission;
}

}  // namespace cavpump
