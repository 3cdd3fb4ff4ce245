#include "gapcert/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "gapcert/mesh.hpp"

namespace gapcert {

std::vector<QuadratureNode> gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  std::vector<QuadratureNode> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    out[static_cast<std::size_t>(i)] = {{0.5 * (1.0 - z), 0.0}, 0.5 * w};
  }
  return out;
}

std::vector<QuadratureNode> symmetric_triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature degree must be non-negative");
  // In collapsed coordinates x = s, y = r(1 − s) a degree-D polynomial times
  // the Jacobian (1 − s) has degree D + 1 in s, so n ≥ (D + 2)/2 points.
  const int n = (degree + 3) / 2;
  const auto g = gauss_legendre_unit(n);
  std::vector<QuadratureNode> base;
  for (const auto& a : g) {
    for (const auto& b : g) {
      const double s = a.p.x, r = b.p.x;
      base.push_back({{s, r * (1.0 - s)}, a.w * b.w * (1.0 - s)});
    }
  }
  // Average over the permutations of the barycentric coordinates.
  std::vector<QuadratureNode> out;
  out.reserve(6 * base.size());
  for (const auto& q : base) {
    const double l[3] = {1.0 - q.p.x - q.p.y, q.p.x, q.p.y};
    static constexpr int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& pm : perm) out.push_back({{l[pm[1]], l[pm[2]]}, q.w / 6.0});
  }
  return out;
}

std::vector<QuadratureNode> composite_rule(const VertexTriangle& t, int degree, int level) {
  const auto ref = symmetric_triangle_rule(degree);
  const Mesh m = build_mesh(t, level);
  std::vector<QuadratureNode> out;
  out.reserve(ref.size() * m.elements.size());
  for (const auto& e : m.elements) {
    const Point a = m.vertices[static_cast<std::size_t>(e[0])];
    const Point b = m.vertices[static_cast<std::size_t>(e[1])];
    const Point c = m.vertices[static_cast<std::size_t>(e[2])];
    const double jac = std::abs(cross(a, b, c));
    for (const auto& q : ref) {
      out.push_back({a + q.p.x * (b - a) + q.p.y * (c - a), q.w * jac});
    }
  }
  return out;
}

double integrate(const std::vector<QuadratureNode>& rule, const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (const auto& q : rule) s += q.w * f(q.p.x, q.p.y);
  return s;
}

}  // namespace gapcert
