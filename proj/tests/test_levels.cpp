#include <cmath>
#include <stdexcept>

#include "cavpump/levels.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cavpump;

TEST_SUITE("levels") {
  TEST_CASE("clebsch_gordan known values") {
    CHECK(clebsch_gordan(4, 0, 2, 0, 6, 0) == doctest::Approx(std::sqrt(3.0 / 5.0)).epsilon(1e-15));
    CHECK(clebsch_gordan(4, 4, 2, 2, 6, 6) == 1.0);
    CHECK(clebsch_gordan(4, 0, 2, 2, 6, 0) == 0.0);  // m != m1 + m2
    CHECK(clebsch_gordan(2, 0, 2, 0, 6, 0) == 0.0);  // triangle violated
    CHECK(clebsch_gordan(2, 0, 2, 0, 2, 0) == 0.0);  // <1 0; 1 0|1 0> vanishes
    CHECK(clebsch_gordan(1, 1, 1, -1, 0, 0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(clebsch_gordan(1, -1, 1, 1, 0, 0) == doctest::Approx(-std::sqrt(0.5)));
    CHECK(clebsch_gordan_signed_square(4, 0, 2, 0, 6, 0) == Rational(3, 5));
    CHECK(clebsch_gordan_signed_square(1, -1, 1, 1, 0, 0) == Rational(-1, 2));
  }

  TEST_CASE("clebsch_gordan rejects inconsistent arguments") {
    CHECK_THROWS_AS(clebsch_gordan(4, 1, 2, 0, 6, 1), std::invalid_argument);   // parity of j1, m1
    CHECK_THROWS_AS(clebsch_gordan(4, 6, 2, 0, 6, 6), std::invalid_argument);   // |m1| > j1
    CHECK_THROWS_AS(clebsch_gordan(4, 0, 2, 0, 5, 0), std::invalid_argument);   // j parity
    CHECK_THROWS_AS(clebsch_gordan(-2, 0, 2, 0, 2, 0), std::invalid_argument);
  }

  TEST_CASE("clebsch_gordan matches lowering-operator construction") {
    for (int two_j1 = 0; two_j1 <= 8; ++two_j1)
      for (int two_j2 = 0; two_j2 <= 4; ++two_j2) {
        oracle::CoupledBasis basis(two_j1, two_j2);
        for (int two_j = std::abs(two_j1 - two_j2); two_j <= two_j1 + two_j2; two_j += 2)
          for (int two_m = -two_j; two_m <= two_j; two_m += 2)
            for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
              const int two_m2 = two_m - two_m1;
              if (std::abs(two_m2) > two_j2) continue;
              CAPTURE(two_j1);
              CAPTURE(two_j2);
              CAPTURE(two_j);
              CAPTURE(two_m1);
              CAPTURE(two_m2);
              CHECK(clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m) ==
                    doctest::Approx(basis(two_m1, two_m2, two_j, two_m)).epsilon(1e-10));
            }
      }
  }

  TEST_CASE("orthogonality for all twoF up to 12 with spin-1 and spin-2 partners") {
    double worst = 0.0;
    for (int two_j1 = 0; two_j1 <= 12; ++two_j1)
      for (int two_j2 : {2, 4}) {
        std::vector<int> js;
        for (int two_j = std::abs(two_j1 - two_j2); two_j <= two_j1 + two_j2; two_j += 2) js.push_back(two_j);
        for (int a : js)
          for (int b : js)
            for (int two_m = -std::min(a, b); two_m <= std::min(a, b); two_m += 2) {
              double sum = 0.0;
              for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
                const int two_m2 = two_m - two_m1;
                if (std::abs(two_m2) > two_j2) continue;
                sum += clebsch_gordan(two_j1, two_m1, two_j2, two_m2, a, two_m) *
                       clebsch_gordan(two_j1, two_m1, two_j2, two_m2, b, two_m);
              }
              worst = std::max(worst, std::abs(sum - (a == b ? 1.0 : 0.0)));
            }
      }
    CHECK(worst < 1e-12);
  }

  TEST_CASE("F=2 -> F'=3 pi couplings") {
    LevelScheme scheme{4, 6, Polarization::pi, 2.0, 1.0};
    const CouplingSet c = coupling_set(scheme);
    REQUIRE(c.ground_count() == 5);
    const Eigen::VectorXd c2 = c.cg_squared();
    const double expected[] = {1.0 / 3, 8.0 / 15, 3.0 / 5, 8.0 / 15, 1.0 / 3};
    for (int i = 0; i < 5; ++i) CHECK(c2[i] == doctest::Approx(expected[i]).epsilon(1e-14));
    CHECK((c.g - 2.0 * c.cg).norm() == 0.0);
    // Symmetric squares; Condon-Shortley signs are odd in m for this transition.
    for (int i = 0; i < 5; ++i) CHECK(std::abs(c.cg[i]) == doctest::Approx(std::abs(c.cg[4 - i])));

    const int k0 = 3;  // excited m' = 0
    CHECK(c.branching(2, k0) == doctest::Approx(3.0 / 5));
    CHECK(c.branching(1, k0) == doctest::Approx(1.0 / 5));
    CHECK(c.branching(3, k0) == doctest::Approx(1.0 / 5));
    CHECK(c.branching(0, k0) == 0.0);
    for (int k = 0; k < c.branching.cols(); ++k) CHECK(c.branching.col(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 5; ++i) CHECK(c.two_m_excited[static_cast<std::size_t>(c.paired[i])] == c.two_m_ground[i]);
  }

  TEST_CASE("F=1/2 -> F'=3/2 sigma+ couplings") {
    LevelScheme scheme{1, 3, Polarization::sigma_plus, 1.0, 1.0};
    const CouplingSet c = coupling_set(scheme);
    REQUIRE(c.ground_count() == 2);
    CHECK(c.cg_squared()[0] == doctest::Approx(1.0 / 3));
    CHECK(c.cg_squared()[1] == doctest::Approx(1.0));
    CHECK(c.two_m_excited[static_cast<std::size_t>(c.paired[0])] == 1);
    CHECK(c.two_m_excited[static_cast<std::size_t>(c.paired[1])] == 3);
  }

  TEST_CASE("closed-transition branching sums to one") {
    for (int two_fg = 0; two_fg <= 10; ++two_fg)
      for (Polarization pol : {Polarization::pi, Polarization::sigma_plus, Polarization::sigma_minus}) {
        if (two_fg == 0 && pol == Polarization::pi) {
          // F = 0 -> F' = 1 pi still couples m = 0.
        }
        const CouplingSet c = coupling_set(LevelScheme{two_fg, two_fg + 2, pol, 1.0, 1.0});
        for (int k = 0; k < c.branching.cols(); ++k)
          CHECK(std::abs(c.branching.col(k).sum() - 1.0) < 1e-12);
        CHECK((c.branching.array() >= 0.0).all());
        CHECK((c.cg.array().abs() <= 1.0 + 1e-15).all());
      }
  }

  TEST_CASE("scheme validation") {
    CHECK_THROWS_WITH_AS(coupling_set(LevelScheme{4, 4, Polarization::pi, 1.0, 1.0}),
                         "unsupported: open transition", std::invalid_argument);
    CHECK_THROWS_WITH_AS(coupling_set(LevelScheme{4, 2, Polarization::pi, 1.0, 1.0}),
                         "unsupported: open transition", std::invalid_argument);
    CHECK_THROWS_AS(coupling_set(LevelScheme{4, 8, Polarization::pi, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(coupling_set(LevelScheme{4, 5, Polarization::pi, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(coupling_set(LevelScheme{0, 0, Polarization::pi, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(coupling_set(LevelScheme{4, 6, Polarization::pi, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(coupling_set(LevelScheme{4, 6, Polarization::pi, 1.0, -1.0}), std::invalid_argument);
  }

  TEST_CASE("two_transition_scheme") {
    const CouplingSet c = two_transition_scheme(1.0 / 3, 1.0, 3.0, 1.0);
    CHECK(c.g[0] == doctest::Approx(3.0 / std::sqrt(3.0)));
    CHECK(c.g[1] == doctest::Approx(3.0));
    const Eigen::MatrixXd b = c.paired_branching();
    CHECK(b(1, 0) == 1.0);  // the -1/2 partner pumps into +1/2
    CHECK(b(0, 0) == 0.0);
    CHECK(b(1, 1) == doctest::Approx(1.0));
    for (int k = 0; k < c.branching.cols(); ++k) CHECK(c.branching.col(k).sum() == doctest::Approx(1.0));

    const CouplingSet real = two_transition_scheme(1.0 / 3, 1.0, 3.0, 1.0, TwoTransitionDecay::fe_three_halves);
    CHECK(real.paired_branching()(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(real.paired_branching()(1, 0) == doctest::Approx(2.0 / 3));

    const CouplingSet mirror = two_transition_scheme(1.0, 1.0 / 3, 3.0, 1.0);
    CHECK(mirror.g[0] == doctest::Approx(c.g[1]));
    CHECK(mirror.g[1] == doctest::Approx(c.g[0]));

    CHECK_THROWS_AS(two_transition_scheme(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(two_transition_scheme(0.5, -1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(two_transition_scheme(1.5, 1.0, 1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("format_two_m") {
    CHECK(format_two_m(-4) == "-2");
    CHECK(format_two_m(0) == "0");
    CHECK(format_two_m(1) == "+1/2");
    CHECK(format_two_m(-3) == "-3/2");
  }
}
