#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <random>

#include "gapcert/deformation.hpp"
#include "gapcert/eigensolver.hpp"

using namespace gapcert;
using namespace gapcert::deform;

namespace {

// u = v∘M gives ∇v = M⁻ᵀ∇u, so the pulled-back Laplacian has coefficient matrix M⁻¹M⁻ᵀ.
Eigen::Matrix2d oracle_metric(double k, Direction d, double t) {
  const auto m = deformation_matrix({0.5, k}, d, t);
  Eigen::Matrix2d e;
  e << m[0][0], m[0][1], m[1][0], m[1][1];
  const Eigen::Matrix2d inv = e.inverse();
  return inv * inv.transpose();
}

Direction random_preserving(std::mt19937& rng) {
  // a ≥ 0, a + √3 b ≤ 0 on the unit circle: angles in [−π/2, −π/6].
  std::uniform_real_distribution<double> u(-kPi / 2.0, -kPi / 6.0);
  return direction_from_angle(u(rng));
}

}  // namespace

TEST_SUITE("deformation") {
  TEST_CASE("direction validation") {
    CHECK_THROWS_AS(make_direction(1.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(make_direction(0.6, -0.8));
    CHECK(preserves_diameter({std::sqrt(3.0) / 2.0, -0.5}));
    CHECK(preserves_diameter({0.0, -1.0}));
    CHECK_FALSE(preserves_diameter({0.0, 1.0}));
    CHECK_FALSE(preserves_diameter({-0.6, -0.8}));
  }

  TEST_CASE("deformation matrix maps the apex") {
    const Direction d{0.6, -0.8};
    const double k = 0.7, t = 0.05;
    const auto m = deformation_matrix({0.3, k}, d, t);
    CHECK(m[0][0] * 0.3 + m[0][1] * k == doctest::Approx(0.3 + t * d.a));
    CHECK(m[1][0] * 0.3 + m[1][1] * k == doctest::Approx(k + t * d.b));
    CHECK_THROWS_AS(deformation_matrix({0.5, 0.1}, {0.0, -1.0}, 0.2), std::invalid_argument);
  }

  TEST_CASE("inverse metric and gamma bounds against Eigen") {
    std::mt19937 rng(3);
    for (int k = 0; k < 30; ++k) {
      const Direction d = random_preserving(rng);
      for (const double t : {0.0, 0.01, 0.1}) {
        const double h = kSqrt3 / 2.0;
        const auto g = inverse_metric(h, d, t);
        const auto o = oracle_metric(h, d, t);
        CHECK(g.A == doctest::Approx(o(0, 0)).epsilon(1e-13));
        CHECK(std::abs(g.B - o(0, 1)) < 1e-13);
        CHECK(g.D == doctest::Approx(o(1, 1)).epsilon(1e-13));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(o);
        const auto b = gamma_bounds(h, d, t);
        CHECK(b.gamma_minus == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));
        CHECK(b.gamma_plus == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-12));
        CHECK(gamma_spread(h, d, t) == doctest::Approx(b.gamma_plus - b.gamma_minus).epsilon(1e-10).scale(1e-12));
      }
    }
  }

  TEST_CASE("perturbation operators expand the pulled-back Laplacian") {
    const Direction d{0.6, -0.8};
    for (const double t : {0.01, 0.03}) {
      const auto p = perturbation_operator_coeffs(d, t);
      const auto base = perturbation_operator_coeffs(d, 0.0).laplacian;
      CHECK(base.cxx == doctest::Approx(1.0));
      CHECK(base.cyy == doctest::Approx(1.0));
      CHECK(p.laplacian.cxx == doctest::Approx(base.cxx + t * p.L.cxx).epsilon(1e-12));
      CHECK(p.laplacian.cxy == doctest::Approx(base.cxy + t * p.L.cxy).epsilon(1e-12).scale(1e-12));
      CHECK(p.laplacian.cyy == doctest::Approx(base.cyy + t * p.L.cyy).epsilon(1e-12));
    }
  }

  TEST_CASE("closed form of I agrees with quadrature") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    for (int k = 0; k < 20; ++k) {
      const double s = u(rng);
      const Direction d = random_preserving(rng);
      const SecondCoeffs c{std::cos(s), std::sin(s)};
      CHECK(slope_gap_I(c, d) == doctest::Approx(slope_gap_I_quadrature(c, d)).epsilon(1e-9));
    }
  }

  TEST_CASE("minimum of I") {
    const double expected = (25600.0 * kPi * kPi - 236196.0) / (3600.0 * std::sqrt(3.0));
    CHECK(prop_minimum() == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(2.6407156).epsilon(1e-7));
    const auto r = minimize_I(400, 2);
    CHECK(std::abs(r.value - expected) < 1e-10);
    CHECK(std::abs(r.coeffs.alpha) < 1e-6);
    CHECK(std::abs(std::abs(r.coeffs.beta) - 1.0) < 1e-9);
    CHECK(r.direction.a == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-6));
    CHECK(r.direction.b == doctest::Approx(-0.5).epsilon(1e-6));
    // Thread count does not change the result.
    const auto r1 = minimize_I(400, 1);
    CHECK(r1.value == r.value);
    CHECK(r1.s == r.s);
  }

  TEST_CASE("lambda1 slope against finite differences of the FEM eigenvalue") {
    const Direction d{0.0, -1.0};
    const double h = 2e-3;
    // One-sided magnitudes only: step forward along d and along −d.
    const auto up = gap_with_error(Triangle(deformed_equilateral_apex(d, h)), 1e-6);
    const auto down = gap_with_error(Triangle(deformed_equilateral_apex({0.0, 1.0}, h)), 1e-6);
    const double fd = (up.lambda1 - down.lambda1) / (2.0 * h);
    CHECK(lambda1_slope(d) == doctest::Approx(fd).epsilon(1e-3));
  }

  TEST_CASE("sandwich property on a few directions") {
    std::mt19937 rng(21);
    for (int k = 0; k < 3; ++k) {
      const Direction d = random_preserving(rng);
      const double t = 0.05;
      const auto g = gap_with_error(Triangle(deformed_equilateral_apex(d, t)), 1e-4);
      const auto b = gamma_bounds(kSqrt3 / 2.0, d, t);
      const double l1 = 16.0 * kPi * kPi / 3.0, l2 = 112.0 * kPi * kPi / 9.0;
      CHECK(g.lambda1 >= b.gamma_minus * l1 - 2.0 * g.err_lambda1);
      CHECK(g.lambda1 <= b.gamma_plus * l1 + 2.0 * g.err_lambda1);
      CHECK(g.lambda2 >= b.gamma_minus * l2 - 2.0 * g.err_lambda2);
      CHECK(g.lambda2 <= b.gamma_plus * l2 + 2.0 * g.err_lambda2);
    }
  }
}
