#include "gapcert/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gapcert {

Triangle::Triangle(double apex_x, double apex_y) : apex_{apex_x, apex_y} {
  if (!std::isfinite(apex_x) || !std::isfinite(apex_y)) {
    throw std::invalid_argument("triangle apex must be finite");
  }
  if (!(apex_y > 0.0)) {
    throw std::invalid_argument("triangle apex must satisfy y > 0, got y = " + std::to_string(apex_y));
  }
}

double diameter(const VertexTriangle& t) {
  const auto& v = t.v;
  return std::max({distance(v[0], v[1]), distance(v[1], v[2]), distance(v[2], v[0])});
}

double diameter(const Triangle& t) { return diameter(t.vertices()); }

double gap_function(double lambda1, double lambda2, double d) {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("gap_function: lambda1 must be positive");
  if (!(lambda2 > lambda1)) throw std::invalid_argument("gap_function: lambda2 must exceed lambda1");
  if (!(d > 0.0)) throw std::invalid_argument("gap_function: diameter must be positive");
  return d * d * (lambda2 - lambda1);
}

bool in_moduli_domain(double x, double y) {
  return x * x + y * y <= 1.0 && x >= 0.5 && x <= 1.0 && y > 0.0;
}

bool in_sweep_region(double x, double y) {
  if (!(x * x + y * y <= 1.0)) return false;
  if (!(x >= 0.5 && x <= 1.0)) return false;
  if (!(y >= kThinStripHeight && y <= 1.0)) return false;
  return distance({x, y}, kEquilateralApex) > kExclusionRadius;
}

Point tau_nu_to_apex(TauNu p) {
  if (!(p.tau > 0.0 && p.tau < 2.0)) throw std::invalid_argument("tau must lie in (0,2)");
  if (!(p.nu > 0.0 && p.nu <= 1.0)) throw std::invalid_argument("nu must lie in (0,1]");
  const double s = 2.0 - p.tau;
  return {1.0 - p.tau / 2.0, 0.5 * p.nu * std::sqrt(4.0 - s * s)};
}

ScaledTriangle scale_to_unit_diameter(const VertexTriangle& t) {
  const double d = diameter(t);
  ScaledTriangle out{t, d};
  for (auto& p : out.triangle.v) p = {p.x / d, p.y / d};
  return out;
}

ScaledTriangle scale_to_unit_diameter(const Triangle& t) { return scale_to_unit_diameter(t.vertices()); }

}  // namespace gapcert
