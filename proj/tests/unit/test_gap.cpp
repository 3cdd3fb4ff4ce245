#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gapcert/eigensolver.hpp"

using namespace gapcert;

TEST_SUITE("gap") {
  TEST_CASE("right isosceles triangle against separation of variables") {
    // Half of the unit square: eigenvalues π²(m² + n²) with m > n ≥ 1.
    const double pi2 = kPi * kPi;
    const auto g = gap_with_error(Triangle(0.0, 1.0), 1e-5);
    REQUIRE(g.accuracy_met);
    CHECK(std::abs(g.lambda1 - 5.0 * pi2) <= g.err_lambda1);
    CHECK(std::abs(g.lambda2 - 10.0 * pi2) <= g.err_lambda2);
    CHECK(g.diameter == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(g.xi - 2.0 * 5.0 * pi2) <= g.err);
  }

  TEST_CASE("equilateral triangle error bound covers the exact gap") {
    for (const double target : {1e-2, 1e-4, 1e-6}) {
      CAPTURE(target);
      const auto g = gap_with_error(Triangle(kEquilateralApex), target);
      REQUIRE(g.accuracy_met);
      CHECK(g.err <= target);
      CHECK(std::abs(g.xi - kEquilateralGap) <= g.err);
      CHECK(std::abs(g.lambda1 - 16.0 * kPi * kPi / 3.0) <= g.err_lambda1);
      CHECK(std::abs(g.lambda2 - 112.0 * kPi * kPi / 9.0) <= g.err_lambda2);
    }
  }

  TEST_CASE("estimator refines monotonically and reuses levels") {
    GapEstimator est(Triangle(0.7, 0.5).vertices());
    const auto coarse = est.solve_to(1e-2);
    const int coarse_level = coarse.spectrum.fine_level;
    const auto fine = est.solve_to(1e-6);
    CHECK(fine.spectrum.fine_level >= coarse_level);
    CHECK(std::abs(fine.xi - coarse.xi) <= coarse.err + fine.err);
    // A fresh estimator at the same target gives the same answer.
    const auto direct = gap_with_error(Triangle(0.7, 0.5), 1e-6);
    CHECK(direct.xi == doctest::Approx(fine.xi).epsilon(1e-12));
  }

  TEST_CASE("unreachable targets are reported, not faked") {
    GapOptions opt;
    opt.max_level = 6;
    opt.thin_max_level = 6;
    const auto g = gap_with_error(Triangle(0.6, 0.4), 1e-12, opt);
    CHECK_FALSE(g.accuracy_met);
    CHECK(g.err > 1e-12);
  }

  TEST_CASE("extrapolation exponents") {
    // Right angle and two 45° corners: 2mπ/α gives 4, 8, ... and 4, 8, 12, ...
    const auto e = extrapolation_exponents(Triangle(0.0, 1.0).vertices());
    REQUIRE(!e.empty());
    CHECK(e.front() == doctest::Approx(2.0));
    CHECK(std::is_sorted(e.begin(), e.end()));
    // An obtuse corner of angle α contributes 2π/α < 4.
    const auto o = extrapolation_exponents(Triangle(0.5, 0.2).vertices());
    const double alpha = kPi - 2.0 * std::atan(0.2 / 0.5);
    const double singular = 2.0 * kPi / alpha;
    CHECK(std::any_of(o.begin(), o.end(), [&](double p) { return std::abs(p - singular) < 1e-12; }));
  }

  TEST_CASE("spectrum beyond the gap") {
    // Equilateral: λ₂ = λ₃ (index 21), λ₄ has index 36.
    const auto s = compute_spectrum(Triangle(kEquilateralApex).vertices(), 4, 1e-3);
    REQUIRE(s.eigenvalues.size() == 4);
    const double c = 16.0 * kPi * kPi / 27.0;
    CHECK(std::abs(s.eigenvalues[1] - c * 21) <= s.error_bounds[1]);
    CHECK(std::abs(s.eigenvalues[2] - c * 21) <= s.error_bounds[2]);
    CHECK(std::abs(s.eigenvalues[3] - c * 36) <= s.error_bounds[3]);
  }
}
