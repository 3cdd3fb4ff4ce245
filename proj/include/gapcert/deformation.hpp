#pragma once

#include <array>

#include "gapcert/geometry.hpp"

namespace gapcert::deform {

/// Unit direction (a, b) in which the apex moves.
struct Direction {
  double a = 0.0;
  double b = 1.0;
};

/// Throws std::invalid_argument unless |a² + b² − 1| ≤ 1e-14.
Direction make_direction(double a, double b);
Direction direction_from_angle(double theta);

/// a ≥ 0 and a + √3·b ≤ 0: moving the apex this way keeps the base as the
/// longest side to first order.
bool preserves_diameter(Direction d);

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Linear map of T onto T(t), fixing the base and sending the apex (j, k)
/// to (j + t·a, k + t·b). Throws if k ≤ 0, t < 0 or k + t·b ≤ 0.
Mat2 deformation_matrix(Point apex, Direction d, double t);

/// Apex of the deformed unit equilateral triangle.
Point deformed_equilateral_apex(Direction d, double t);

struct InverseMetric {
  double A = 1.0;
  double B = 0.0;
  double D = 1.0;
};

InverseMetric inverse_metric(double k, Direction d, double t);

struct GammaBounds {
  double gamma_minus = 1.0;
  double gamma_plus = 1.0;
};

/// Eigenvalues of the inverse metric.
GammaBounds gamma_bounds(double k, Direction d, double t);
/// Closed form of γ₊ − γ₋.
double gamma_spread(double k, Direction d, double t);

/// c_xx ∂x² + c_xy ∂x∂y + c_yy ∂y².
struct SecondOrderOperator {
  double cxx = 0.0;
  double cxy = 0.0;
  double cyy = 0.0;
};

/// Pulled-back Laplacian of T(t) on the equilateral triangle and its
/// expansion Δ = Δ₀ + t·L = Δ₀ + t·L₁ + t²·L₂.
struct PerturbationOperators {
  SecondOrderOperator laplacian;
  SecondOrderOperator L;
  SecondOrderOperator L1;
  SecondOrderOperator L2;
};

/// Throws unless √3 + 2tb > 0.
PerturbationOperators perturbation_operator_coeffs(Direction d, double t);

/// First-order change of λ₁ of the equilateral triangle, −∫φ₁ L₁|₀ φ₁,
/// by quadrature of the analytic eigenfunction.
double lambda1_slope(Direction d, int quad_degree = 10);

/// φ = α·u + β·v in the second eigenspace.
struct SecondCoeffs {
  double alpha = 1.0;
  double beta = 0.0;
};

/// I = −∫φ L₁|₀ φ + ∫φ₁ L₁|₀ φ₁, closed form.
double slope_gap_I(SecondCoeffs c, Direction d);
/// The same quantity by quadrature of the defining integrals.
double slope_gap_I_quadrature(SecondCoeffs c, Direction d, int quad_degree = 10);

struct MinimizeResult {
  double value = 0.0;
  double s = 0.0;  // α = cos s, β = sin s
  SecondCoeffs coeffs;
  Direction direction;
  double grid_value = 0.0;
  std::size_t evaluations = 0;
};

/// Minimum of I over s ∈ [0, 2π) and a ∈ [0, √3/2], b = −√(1 − a²):
/// exhaustive grid of `grid` × `grid` points, then local descent.
MinimizeResult minimize_I(int grid = 10000, int threads = 1);

/// (25600π² − 236196)/(3600√3).
double prop_minimum();

}  // namespace gapcert::deform
