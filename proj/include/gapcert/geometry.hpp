#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace gapcert {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt3 = std::numbers::sqrt3;

/// ξ of the equilateral triangle; the global minimum over all triangles.
inline constexpr double kEquilateralGap = 64.0 * kPi * kPi / 9.0;

/// Radius of the ball around the equilateral apex handled analytically.
inline constexpr double kExclusionRadius = 0.0004;

/// Apex heights below this are handled analytically (thin triangles).
inline constexpr double kThinStripHeight = 0.005;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point, Point) = default;
};

inline constexpr Point kEquilateralApex{0.5, kSqrt3 / 2.0};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
inline double cross(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Arbitrary triangle given by three vertices. Used for scaled copies and
/// anything not in normalized position.
struct VertexTriangle {
  std::array<Point, 3> v;

  double signed_area() const { return 0.5 * cross(v[0], v[1], v[2]); }
  double area() const { return std::abs(signed_area()); }
};

/// Triangle in normalized position: vertices (0,0), (1,0) and the apex.
class Triangle {
 public:
  /// Throws std::invalid_argument unless apex_y > 0 and both coordinates are finite.
  Triangle(double apex_x, double apex_y);
  explicit Triangle(Point apex) : Triangle(apex.x, apex.y) {}

  Point apex() const { return apex_; }
  double apex_x() const { return apex_.x; }
  double apex_y() const { return apex_.y; }
  double area() const { return 0.5 * apex_.y; }
  VertexTriangle vertices() const { return {{Point{0.0, 0.0}, Point{1.0, 0.0}, apex_}}; }

 private:
  Point apex_;
};

double diameter(const VertexTriangle& t);
double diameter(const Triangle& t);

/// ξ = d²(λ₂ − λ₁). Throws std::invalid_argument unless λ₂ > λ₁ > 0 and d > 0.
double gap_function(double lambda1, double lambda2, double d);

/// Membership in the region the certification sweep must cover:
/// x² + y² ≤ 1, 0.5 ≤ x ≤ 1, 0.005 ≤ y ≤ 1, and strictly outside the
/// exclusion ball around the equilateral apex. Exact comparisons, no slack.
bool in_sweep_region(double x, double y);

/// x² + y² ≤ 1 and 0.5 ≤ x ≤ 1 and 0 < y: the fundamental domain of the
/// moduli space (triangles with unit base as the longest side, mirrored to x ≥ 1/2).
bool in_moduli_domain(double x, double y);

struct TauNu {
  double tau = 1.0;
  double nu = 1.0;
};

/// x = 1 − τ/2, y = (ν/2)·√(4 − (2−τ)²). Throws std::invalid_argument for
/// τ ∉ (0,2) or ν ∉ (0,1].
Point tau_nu_to_apex(TauNu p);

struct ScaledTriangle {
  VertexTriangle triangle;
  double factor = 1.0;  // the original diameter; coordinates were divided by it
};

ScaledTriangle scale_to_unit_diameter(const VertexTriangle& t);
ScaledTriangle scale_to_unit_diameter(const Triangle& t);

}  // namespace gapcert
