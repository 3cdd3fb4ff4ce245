#pragma once

#include <array>
#include <string>
#include <vector>

#include "gapcert/geometry.hpp"
#include "gapcert/quadrature.hpp"

namespace gapcert::lame {

/// Unit equilateral triangle (0,0), (1,0), (1/2, √3/2).
VertexTriangle equilateral();

struct LamePair {
  int m = 0;
  int n = 0;
};

/// m + n ≡ 0 (mod 3), m ≠ 2n, n ≠ 2m, m ≠ −n.
bool admissible(LamePair p);

/// m² − mn + n², exact.
long long quadratic_index(LamePair p);

/// (16π²/27)(m² − mn + n²). Throws std::invalid_argument for inadmissible pairs.
double eigenvalue_of_pair(LamePair p);

struct EquilateralEigenvalue {
  double value = 0.0;
  long long index = 0;  // m² − mn + n²
  int multiplicity = 0;
  std::vector<LamePair> representative_pairs;
};

/// First `count` distinct eigenvalues, ascending. Multiplicity is the rank
/// of the span of all orbit sums with the same index.
std::vector<EquilateralEigenvalue> distinct_spectrum(int count);

/// The six pairs of the orbit of p, in the order the alternating sum uses.
std::array<LamePair, 6> orbit(LamePair p);

/// Value and derivatives up to second order.
struct Jet {
  double f = 0.0, fx = 0.0, fy = 0.0, fxx = 0.0, fxy = 0.0, fyy = 0.0;
};

/// c · sin(kx·x + ky·y) or c · cos(kx·x + ky·y).
struct PlaneWave {
  double c = 0.0;
  double kx = 0.0;
  double ky = 0.0;
  bool sine = true;
};

class WaveSum {
 public:
  WaveSum() = default;
  explicit WaveSum(std::vector<PlaneWave> waves) : waves_(std::move(waves)) {}
  double operator()(double x, double y) const;
  Jet jet(double x, double y) const;
  const std::vector<PlaneWave>& waves() const { return waves_; }

 private:
  std::vector<PlaneWave> waves_;
};

/// Alternating orbit sum of sin (or cos) of (2π/3)(n·x + (2m − n)·y/√3).
WaveSum orbit_sum(LamePair p, bool sine);

enum class Form { phi1_sum, phi1_product, u, v, A3_printed, A3 };
const char* form_name(Form f);

/// Ground state as a sum of three sines, prefactor 2√2/3^(3/4).
const WaveSum& phi1_sum();
/// The triple-product expression with the same prefactor.
double phi1_product(double x, double y);
/// phi1_sum / phi1_product at the centroid.
double phi1_form_ratio();

/// Orthonormal basis of the second eigenspace.
const WaveSum& u_basis();
const WaveSum& v_basis();

/// Third eigenfunction exactly as printed (stray π in the last argument).
const WaveSum& third_printed();
/// Third eigenfunction rebuilt from the (6,6) orbit, same prefactor.
const WaveSum& third_reconstructed();

double evaluate(Form f, double x, double y);

struct FormulaCheck {
  double boundary_max = 0.0;   // max |f| on sampled edges, relative to max |f| inside
  double residual = 0.0;       // ‖Δf + λf‖ / ‖f‖ on the interior sample grid
  double l2_norm_sq = 0.0;     // ∫ f²
  bool dirichlet_ok = false;   // boundary_max < 1e-10
  bool eigen_ok = false;       // residual < 1e-6
};

/// Finite-difference diagnostics of f against eigenvalue λ.
FormulaCheck check_eigenfunction(Form f, double lambda);

struct ThirdEigenfunctionReport {
  FormulaCheck printed;
  FormulaCheck reconstructed;
  bool printed_consistent = false;
};
ThirdEigenfunctionReport check_third_eigenfunction();

struct IntegralCheck {
  std::string name;
  double paper_value = 0.0;
  double computed = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  std::string status;  // pass, fail, paper_typo
  std::string note;
};

struct IntegralReport {
  int quad_degree = 0;
  int composite_level = 0;
  std::vector<IntegralCheck> entries;
  double max_degree_change = 0.0;  // max |value(deg) − value(deg + 2)|
  bool all_ok() const;
};

inline constexpr double kIntegralRelTol = 1e-6;
inline constexpr double kIntegralZeroTol = 1e-9;

/// Quadrature check of every tabulated integral of the first two
/// eigenspaces, plus normalization and orthogonality.
IntegralReport verify_integral_tables(int quad_degree, int composite_level = 4);

std::string integral_report_csv(const IntegralReport& r);

}  // namespace gapcert::lame
