// Adaptive Dormand-Prince 5(4) integrator with PI step-size control and
// fourth-order dense output.
//
// The state type is any dense Eigen column vector (real or complex).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace cavpump {

struct OdeSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;      // 0: bounded only by the integration span
  double initial_step = 0.0;  // 0: automatic
  long max_steps = 200'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  double t_reached = 0.0;
};

/// Raised when the step size underflows or the step budget is exhausted.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double t_reached)
      : std::runtime_error(what), t_reached_(t_reached) {}
  double time_reached() const { return t_reached_; }

 private:
  double t_reached_;
};

/// Default per-step hook: never changes the right-hand side.
struct NoStepHook {
  template <typename Vector>
  bool operator()(double, const Vector&) const {
    return false;
  }
};

namespace detail {
// Butcher tableau of Dormand & Prince (1980) and the dense-output
// coefficients of Hairer's DOPRI5.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace detail

template <typename Vector>
class DormandPrince {
 public:
  explicit DormandPrince(OdeSettings settings = {}) : settings_(settings) {
    if (!(settings_.rel_tol > 0.0) || !(settings_.abs_tol > 0.0))
      throw std::invalid_argument("integrator tolerances must be positive");
  }

  const OdeSettings& settings() const { return settings_; }

  /// Integrates y' = rhs(t, y) from t0 to t1, overwriting y with y(t1).
  ///
  /// `rhs(t, y, dydt)` writes the derivative. `observe(t, y)` receives the
  /// dense-output solution at every entry of `outputs` (sorted, inside
  /// [t0, t1]). `on_step(t, y)` runs before the first step and after every
  /// accepted step; it returns true when it has altered the right-hand side,
  /// in which case the cached first stage is re-evaluated.
  template <typename Rhs, typename Observer, typename Hook = NoStepHook>
  OdeStats integrate(Rhs&& rhs, Vector& y, double t0, double t1, std::span<const double> outputs,
                     Observer&& observe, Hook&& on_step = {}) const {
    using namespace detail;
    if (!(t1 > t0)) throw std::invalid_argument("integration span must be increasing");

    const double span = t1 - t0;
    const double hmax = settings_.max_step > 0.0 ? std::min(settings_.max_step, span) : span;
    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 5.0, facc2 = 0.1;  // bounds on the step-size ratio
    constexpr double eps = std::numeric_limits<double>::epsilon();

    OdeStats stats;
    const Eigen::Index n = y.size();
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), errv(n);
    Vector r2(n), r3(n), r4(n), r5(n);

    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] < t0) ++next_out;
    while (next_out < outputs.size() && outputs[next_out] == t0) observe(outputs[next_out++], y);

    double t = t0;
    on_step(t, y);
    rhs(t, y, k1);
    ++stats.evaluations;

    double h = settings_.initial_step > 0.0 ? settings_.initial_step : initial_step(rhs, t, y, k1, hmax, stats);
    double facold = 1e-4;
    bool last_rejected = false;

    while (t < t1) {
      if (stats.accepted + stats.rejected >= settings_.max_steps) {
        std::ostringstream msg;
        msg << "step budget exhausted at t = " << t;
        throw StiffnessError(msg.str(), t);
      }
      if (!(h > 16.0 * eps * std::abs(t)) || !(h > 0.0)) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " (system too stiff for explicit integration)";
        throw StiffnessError(msg.str(), t);
      }
      const bool final_step = t + 1.01 * h >= t1;
      if (final_step) h = t1 - t;

      ytmp = y + h * a21 * k1;
      rhs(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs(t + h, ynew, k7);
      stats.evaluations += 6;

      errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const auto scale = (settings_.abs_tol +
                          settings_.rel_tol * y.cwiseAbs().array().max(ynew.cwiseAbs().array()))
                             .eval();
      double err = std::sqrt((errv.cwiseAbs().array() / scale).square().mean());
      if (!std::isfinite(err)) err = 1e10;

      const double fac11 = std::pow(err, expo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold, beta);
        fac = std::clamp(fac / safe, facc2, facc1);
        facold = std::max(err, 1e-4);
        ++stats.accepted;

        const bool has_output = next_out < outputs.size() && outputs[next_out] <= t + h;
        if (has_output) {
          r2 = ynew - y;
          r3 = h * k1 - r2;
          r4 = r2 - h * k7 - r3;
          r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        }
        const double t_old = t;
        const double t_new = final_step ? t1 : t + h;
        while (next_out < outputs.size() && outputs[next_out] <= t_new) {
          const double to = outputs[next_out++];
          if (to == t_new) {
            observe(to, ynew);
          } else {
            const double theta = (to - t_old) / h;
            const double theta1 = 1.0 - theta;
            ytmp = y + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
            observe(to, ytmp);
          }
        }

        y = ynew;
        t = t_new;
        k1 = k7;
        if (on_step(t, y)) {
          rhs(t, y, k1);
          ++stats.evaluations;
        }
        double hnew = h / fac;
        hnew = std::min(hnew, hmax);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        h = hnew;
      } else {
        ++stats.rejected;
        h = h / std::min(facc1, fac11 / safe);
        last_rejected = true;
      }
    }
    stats.t_reached = t;
    return stats;
  }

 private:
  template <typename Rhs>
  double initial_step(Rhs& rhs, double t, const Vector& y, const Vector& f0, double hmax,
                      OdeStats& stats) const {
    const auto sk = (settings_.abs_tol + settings_.rel_tol * y.cwiseAbs().array()).eval();
    const double d0 = std::sqrt((y.cwiseAbs().array() / sk).square().mean());
    const double d1n = std::sqrt((f0.cwiseAbs().array() / sk).square().mean());
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 * hmax : 0.01 * d0 / d1n;
    h0 = std::min(h0, hmax);
    Vector y1 = y + h0 * f0;
    Vector f1(y.size());
    rhs(t + h0, y1, f1);
    ++stats.evaluations;
    const double d2 = std::sqrt(((f1 - f0).cwiseAbs().array() / sk).square().mean()) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * hmax, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, hmax});
  }

  OdeSettings settings_;
};

}  // namespace cavpump
