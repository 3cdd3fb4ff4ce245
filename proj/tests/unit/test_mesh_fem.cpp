#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <random>

#include "gapcert/fem.hpp"
#include "gapcert/mesh.hpp"
#include "gapcert/quadrature.hpp"

using namespace gapcert;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// ∫ x^a y^b over the reference triangle (0,0), (1,0), (0,1).
double reference_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

// Element matrices from barycentric gradients, computed with Eigen.
void oracle_element(Point a, Point b, Point c, double k[3][3], double m[3][3]) {
  Eigen::Matrix3d v;
  v << 1, a.x, a.y, 1, b.x, b.y, 1, c.x, c.y;
  const Eigen::Matrix3d coef = v.inverse();  // column i: coefficients of barycentric i
  const double area = 0.5 * std::abs(v.determinant());
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      k[i][j] = area * (coef(1, i) * coef(1, j) + coef(2, i) * coef(2, j));
      m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
  }
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("lattice counts match a direct count") {
    for (int level = 0; level <= 6; ++level) {
      const Mesh m = build_mesh(Triangle(0.3, 0.7), level);
      const std::size_t n = std::size_t{1} << level;
      CHECK(m.elements.size() == n * n);
      CHECK(m.vertices.size() == lattice_vertex_count(level));
      std::size_t interior = 0;
      for (const char b : m.boundary) interior += b ? 0 : 1;
      CHECK(interior == lattice_interior_count(level));
      CHECK(m.interior_count() == interior);
    }
    CHECK(lattice_interior_count(8) == 32385);
    CHECK_THROWS_AS(build_mesh(Triangle(0.5, 0.5), kMaxMeshLevel + 1), std::invalid_argument);
  }

  TEST_CASE("elements are counter-clockwise and tile the triangle") {
    const Triangle t(0.8, 0.35);
    const Mesh m = build_mesh(t, 4);
    double total = 0.0;
    for (const auto& e : m.elements) {
      const double c = cross(m.vertices[e[0]], m.vertices[e[1]], m.vertices[e[2]]);
      CHECK(c > 0.0);
      total += 0.5 * c;
    }
    CHECK(total == doctest::Approx(t.area()).epsilon(1e-13));
  }

  TEST_CASE("boundary flags mark exactly the vertices on the edges") {
    const Triangle t(0.6, 0.5);
    const auto tv = t.vertices();
    const Mesh m = build_mesh(t, 3);
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
      const Point p = m.vertices[k];
      bool on_edge = false;
      for (int e = 0; e < 3; ++e) on_edge |= std::abs(cross(tv.v[e], tv.v[(e + 1) % 3], p)) < 1e-12;
      CHECK(static_cast<bool>(m.boundary[k]) == on_edge);
    }
  }

  TEST_CASE("prolongation keeps coarse values and averages edge midpoints") {
    const int level = 3;
    const Mesh coarse = build_mesh(Triangle(0.5, 0.8), level);
    const Mesh fine = build_mesh(Triangle(0.5, 0.8), level + 1);
    // Nodal values of f(x, y) = y·(a polynomial) restricted to interior nodes.
    std::vector<double> cv;
    for (std::size_t k = 0; k < coarse.vertices.size(); ++k) {
      if (!coarse.boundary[k]) cv.push_back(std::sin(3.0 * coarse.vertices[k].x) + coarse.vertices[k].y);
    }
    const auto fv = prolongate_interior(cv, level);
    REQUIRE(fv.size() == lattice_interior_count(level + 1));
    // Full coarse nodal field, zero on the boundary, evaluated as a P1 function.
    std::vector<double> full(coarse.vertices.size(), 0.0);
    for (std::size_t k = 0, r = 0; k < coarse.vertices.size(); ++k) {
      if (!coarse.boundary[k]) full[k] = cv[r++];
    }
    const auto p1_value = [&](Point p) {
      for (const auto& e : coarse.elements) {
        const Point a = coarse.vertices[e[0]], b = coarse.vertices[e[1]], c = coarse.vertices[e[2]];
        const double area = cross(a, b, c);
        const double l0 = cross(p, b, c) / area, l1 = cross(a, p, c) / area, l2 = cross(a, b, p) / area;
        if (l0 > -1e-12 && l1 > -1e-12 && l2 > -1e-12) return l0 * full[e[0]] + l1 * full[e[1]] + l2 * full[e[2]];
      }
      return std::nan("");
    };
    for (std::size_t k = 0, r = 0; k < fine.vertices.size(); ++k) {
      if (fine.boundary[k]) continue;
      CHECK(fv[r++] == doctest::Approx(p1_value(fine.vertices[k])).epsilon(1e-12));
    }
  }
}

TEST_SUITE("fem") {
  TEST_CASE("element matrices agree with barycentric gradients") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
      if (cross(a, b, c) < 0) std::swap(b, c);
      if (std::abs(cross(a, b, c)) < 1e-3) continue;
      double k[3][3], m[3][3];
      oracle_element(a, b, c, k, m);
      const auto e = p1_element(a, b, c);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          CHECK(e.stiffness[i][j] == doctest::Approx(k[i][j]).epsilon(1e-12).scale(1.0));
          CHECK(e.mass[i][j] == doctest::Approx(m[i][j]).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("assembled matrices are symmetric and consistent") {
    const Triangle t(0.7, 0.45);
    const auto s = assemble(build_mesh(t, 4));
    CHECK(s.full_mass_total == doctest::Approx(t.area()).epsilon(1e-13));
    CHECK(s.size() == lattice_interior_count(4));
    for (std::size_t r = 0; r < s.size(); r += 7) {
      for (std::size_t c = 0; c < s.size(); c += 5) {
        CHECK(s.stiffness.at(r, c) == doctest::Approx(s.stiffness.at(c, r)).epsilon(1e-14));
        CHECK(s.mass.at(r, c) == doctest::Approx(s.mass.at(c, r)).epsilon(1e-14));
      }
    }
    // uᵀKu for the nodal interpolant of a smooth function approximates its Dirichlet energy.
    const Mesh m = build_mesh(t, 6);
    const auto s6 = assemble(m);
    std::vector<double> u(s6.size()), ku(s6.size());
    // Cubic bubble: product of the three edge functions, zero on the boundary.
    const auto tv = t.vertices();
    const auto bubble = [&](Point p) {
      return cross(tv.v[0], tv.v[1], p) * cross(tv.v[1], tv.v[2], p) * cross(tv.v[2], tv.v[0], p);
    };
    for (std::size_t r = 0; r < s6.size(); ++r) u[r] = bubble(m.vertices[s6.interior_to_vertex[r]]);
    s6.stiffness.multiply(u, ku);
    double energy = 0.0;
    for (std::size_t r = 0; r < s6.size(); ++r) energy += u[r] * ku[r];
    // Reference ∫|∇f|² by a high-order quadrature with central-difference gradients.
    const auto rule = composite_rule(tv, 10, 2);
    const double h = 1e-6;
    const double ref = integrate(rule, [&](double x, double y) {
      const double gx = (bubble({x + h, y}) - bubble({x - h, y})) / (2 * h);
      const double gy = (bubble({x, y + h}) - bubble({x, y - h})) / (2 * h);
      return gx * gx + gy * gy;
    });
    CHECK(energy == doctest::Approx(ref).epsilon(2e-3));
  }
}

TEST_SUITE("quadrature") {
  TEST_CASE("symmetric rule integrates monomials exactly up to its degree") {
    for (const int degree : {2, 5, 10, 14}) {
      const auto rule = symmetric_triangle_rule(degree);
      for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
          const double v = integrate(rule, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
          CHECK(v == doctest::Approx(reference_monomial(a, b)).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("composite rule on a general triangle") {
    const VertexTriangle t{{Point{0.2, 0.1}, Point{1.3, 0.4}, Point{0.5, 1.2}}};
    const auto rule = composite_rule(t, 6, 2);
    double w = 0.0;
    for (const auto& q : rule) w += q.w;
    CHECK(w == doctest::Approx(t.area()).epsilon(1e-14));
    // ∫ x over a triangle = area · centroid x.
    const double cx = (0.2 + 1.3 + 0.5) / 3.0;
    CHECK(integrate(rule, [](double x, double) { return x; }) == doctest::Approx(t.area() * cx).epsilon(1e-14));
  }

  TEST_CASE("gauss-legendre on the unit interval") {
    const auto g = gauss_legendre_unit(5);
    for (int p = 0; p <= 9; ++p) {
      double s = 0.0;
      for (const auto& q : g) s += q.w * std::pow(q.p.x, p);
      CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
    }
  }
}
