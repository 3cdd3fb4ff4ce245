#pragma once

#include <functional>
#include <vector>

#include "gapcert/geometry.hpp"

namespace gapcert {

struct QuadratureNode {
  Point p;
  double w = 0.0;
};

/// n-point Gauss–Legendre rule on [0, 1].
std::vector<QuadratureNode> gauss_legendre_unit(int n);

/// Fully symmetric rule on the triangle (0,0), (1,0), (0,1), exact for
/// polynomials of total degree ≤ `degree`. Built from a collapsed
/// Gauss–Legendre product rule averaged over the six vertex permutations.
std::vector<QuadratureNode> symmetric_triangle_rule(int degree);

/// Composite rule: the triangle is split uniformly 4-way `level` times and
/// the symmetric rule of `degree` is applied on every piece.
std::vector<QuadratureNode> composite_rule(const VertexTriangle& t, int degree, int level);

double integrate(const std::vector<QuadratureNode>& rule, const std::function<double(double, double)>& f);

}  // namespace gapcert
