#include "cavpump/levels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cavpump {

namespace {

using boost::multiprecision::cpp_int;

constexpr int kMaxFactorial = 128;

const std::vector<cpp_int>& factorials() {
  static const std::vector<cpp_int> table = [] {
    std::vector<cpp_int> f(kMaxFactorial + 1);
    f[0] = 1;
    for (int n = 1; n <= kMaxFactorial; ++n) f[n] = f[n - 1] * n;
    return f;
  }();
  return table;
}

const cpp_int& fact(int n) {
  if (n < 0 || n > kMaxFactorial) throw std::invalid_argument("factorial argument out of range");
  return factorials()[static_cast<std::size_t>(n)];
}

void check_pair(int two_j, int two_m, const char* which) {
  if (two_j < 0) throw std::invalid_argument(std::string("negative angular momentum ") + which);
  if ((two_j + two_m) % 2 != 0)
    throw std::invalid_argument(std::string("inconsistent parity of j and m for ") + which);
  if (std::abs(two_m) > two_j)
    throw std::invalid_argument(std::string("|m| > j for ") + which);
}

}  // namespace

int two_q(Polarization p) {
  switch (p) {
    case Polarization::pi: return 0;
    case Polarization::sigma_plus: return 2;
    case Polarization::sigma_minus: return -2;
  }
  return 0;
}

Polarization parse_polarization(const std::string& name) {
  if (name == "pi") return Polarization::pi;
  if (name == "sigma_plus" || name == "sigma+") return Polarization::sigma_plus;
  if (name == "sigma_minus" || name == "sigma-") return Polarization::sigma_minus;
  throw std::invalid_argument("unknown polarization '" + name + "'");
}

std::string to_string(Polarization p) {
  switch (p) {
    case Polarization::pi: return "pi";
    case Polarization::sigma_plus: return "sigma_plus";
    case Polarization::sigma_minus: return "sigma_minus";
  }
  return "?";
}

std::string format_two_m(int two_m) {
  std::string sign = two_m > 0 ? "+" : (two_m < 0 ? "-" : "");
  int mag = std::abs(two_m);
  if (mag % 2 == 0) return sign + std::to_string(mag / 2);
  return sign + std::to_string(mag) + "/2";
}

void LevelScheme::validate() const {
  if (two_fg < 0 || two_fe < 0) throw std::invalid_argument("angular momenta must be nonnegative");
  if ((two_fg + two_fe) % 2 != 0)
    throw std::invalid_argument("Fg and Fe must both be integer or both half-integer");
  if (std::abs(two_fg - two_fe) > 2) throw std::invalid_argument("|Fg - Fe| must be at most 1");
  if (two_fg + two_fe < 2) throw std::invalid_argument("Fg + Fe must be at least 1");
  if (!(g0 > 0.0)) throw std::invalid_argument("g0 must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("Gamma must be positive");
  if (two_fe != two_fg + 2) throw std::invalid_argument("unsupported: open transition");
}

Rational clebsch_gordan_signed_square(int two_j1, int two_m1, int two_j2, int two_m2, int two_j,
                                      int two_m) {
  check_pair(two_j1, two_m1, "j1");
  check_pair(two_j2, two_m2, "j2");
  check_pair(two_j, two_m, "j");
  if ((two_j1 + two_j2 + two_j) % 2 != 0)
    throw std::invalid_argument("j1 + j2 + j must be an integer");

  if (two_m != two_m1 + two_m2) return Rational(0);
  if (two_j < std::abs(two_j1 - two_j2) || two_j > two_j1 + two_j2) return Rational(0);

  // Integer arguments of the Racah formula.
  const int a = (two_j1 + two_j2 - two_j) / 2;
  const int b = (two_j1 - two_j2 + two_j) / 2;
  const int c = (-two_j1 + two_j2 + two_j) / 2;
  const int d = (two_j1 + two_j2 + two_j) / 2 + 1;
  const int j1mm1 = (two_j1 - two_m1) / 2;
  const int j1pm1 = (two_j1 + two_m1) / 2;
  const int j2mm2 = (two_j2 - two_m2) / 2;
  const int j2pm2 = (two_j2 + two_m2) / 2;
  const int jmm = (two_j - two_m) / 2;
  const int jpm = (two_j + two_m) / 2;
  const int s1 = (two_j - two_j2 + two_m1) / 2;  // j - j2 + m1
  const int s2 = (two_j - two_j1 - two_m2) / 2;  // j - j1 - m2

  const int kmin = std::max({0, -s1, -s2});
  const int kmax = std::min({a, j1mm1, j2pm2});

  Rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = fact(k) * fact(a - k) * fact(j1mm1 - k) * fact(j2pm2 - k) * fact(s1 + k) *
                  fact(s2 + k);
    Rational term(cpp_int(1), den);
    if (k % 2 == 0)
      sum += term;
    else
      sum -= term;
  }
  if (sum == 0) return Rational(0);

  Rational prefactor(cpp_int(two_j + 1) * fact(a) * fact(b) * fact(c), fact(d));
  prefactor *= Rational(fact(jpm) * fact(jmm) * fact(j1mm1) * fact(j1pm1) * fact(j2mm2) *
                        fact(j2pm2));
  Rational sq = prefactor * sum * sum;
  return sum > 0 ? sq : Rational(-sq);
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m) {
  Rational s = clebsch_gordan_signed_square(two_j1, two_m1, two_j2, two_m2, two_j, two_m);
  if (s == 0) return 0.0;
  const double mag = std::sqrt(boost::multiprecision::abs(s).convert_to<double>());
  return s > 0 ? mag : -mag;
}

Eigen::MatrixXd CouplingSet::paired_branching() const {
  const Eigen::Index n = ground_count();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) out.col(j) = branching.col(paired[static_cast<std::size_t>(j)]);
  return out;
}

int CouplingSet::ground_index(int two_m) const {
  auto it = std::find(two_m_ground.begin(), two_m_ground.end(), two_m);
  return it == two_m_ground.end() ? -1 : static_cast<int>(it - two_m_ground.begin());
}

namespace {

Eigen::MatrixXd branching_matrix(int two_fg, int two_fe) {
  const int ng = two_fg + 1;
  const int ne = two_fe + 1;
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(ng, ne);
  for (int i = 0; i < ng; ++i) {
    const int two_m = -two_fg + 2 * i;
    for (int k = 0; k < ne; ++k) {
      const int two_k = -two_fe + 2 * k;
      const int dq = two_k - two_m;
      if (std::abs(dq) > 2) continue;
      const double c = clebsch_gordan(two_fg, two_m, 2, dq, two_fe, two_k);
      beta(i, k) = c * c;
    }
  }
  return beta;
}

}  // namespace

CouplingSet coupling_set(const LevelScheme& scheme) {
  scheme.validate();
  const int q = two_q(scheme.polarization);

  CouplingSet out;
  out.g0 = scheme.g0;
  out.gamma = scheme.gamma;
  for (int two_k = -scheme.two_fe; two_k <= scheme.two_fe; two_k += 2) out.two_m_excited.push_back(two_k);

  std::vector<double> cg;
  for (int two_m = -scheme.two_fg; two_m <= scheme.two_fg; two_m += 2) {
    const int two_k = two_m + q;
    if (std::abs(two_k) > scheme.two_fe) continue;  // uncoupled ground sublevel
    out.two_m_ground.push_back(two_m);
    out.paired.push_back((two_k + scheme.two_fe) / 2);
    cg.push_back(clebsch_gordan(scheme.two_fg, two_m, 2, q, scheme.two_fe, two_k));
  }
  out.cg = Eigen::Map<Eigen::VectorXd>(cg.data(), static_cast<Eigen::Index>(cg.size()));
  out.g = scheme.g0 * out.cg;

  Eigen::MatrixXd full = branching_matrix(scheme.two_fg, scheme.two_fe);
  out.branching.resize(out.ground_count(), full.cols());
  for (Eigen::Index i = 0; i < out.ground_count(); ++i)
    out.branching.row(i) = full.row((out.two_m_ground[static_cast<std::size_t>(i)] + scheme.two_fg) / 2);
  return out;
}

CouplingSet two_transition_scheme(double c_minus_sq, double c_plus_sq, double g0, double gamma,
                                  TwoTransitionDecay decay) {
  if (!(c_minus_sq > 0.0 && c_minus_sq <= 1.0) || !(c_plus_sq > 0.0 && c_plus_sq <= 1.0))
    throw std::invalid_argument("squared coupling coefficients must lie in (0, 1]");
  if (!(g0 > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("g0 and Gamma must be positive");

  CouplingSet out;
  out.g0 = g0;
  out.gamma = gamma;
  out.two_m_ground = {-1, 1};
  out.two_m_excited = {-3, -1, 1, 3};
  out.paired = {2, 3};  // sigma+: -1/2 -> +1/2, +1/2 -> +3/2
  out.cg = Eigen::Vector2d(std::sqrt(c_minus_sq), std::sqrt(c_plus_sq));
  out.g = g0 * out.cg;
  out.branching = branching_matrix(1, 3);
  if (decay == TwoTransitionDecay::pumping) {
    out.branching(0, 2) = 0.0;
    out.branching(1, 2) = 1.0;
  }
  return out;
}

}  // namespace cavpump
