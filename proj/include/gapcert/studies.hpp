#pragma once

#include <string>
#include <vector>

#include "gapcert/eigensolver.hpp"
#include "gapcert/geometry.hpp"

namespace gapcert {

/// Heights below this are left to the analytic thin-triangle regime.
inline constexpr double kMinScalingHeight = 0.01;

struct ScalingRow {
  double h = 0.0;
  double xi = 0.0;
  double err = 0.0;
  double scaled = 0.0;  // ξ·h^(4/3)
  bool accuracy_met = false;
  std::string note;
};

struct ScalingResult {
  double x0 = 0.5;
  std::vector<ScalingRow> rows;
  /// Least-squares slope of log ξ against log h.
  double slope = 0.0;
  /// ξ grows strictly as h decreases (rows in input order).
  bool increasing = false;
  double min_scaled = 0.0;
  bool all_converged = false;
};

/// ξ of the triangle with apex (x0, h) for each height. Heights must be
/// strictly decreasing and ≥ 0.01; x0 ∈ [0.5, 1].
ScalingResult scaling_study(const std::vector<double>& heights, double x0, double target,
                            const GapOptions& opt = {}, int threads = 1);

struct GridPoint {
  double tau = 0.0;
  double nu = 0.0;
  double x = 0.0;
  double y = 0.0;
  /// NaN when the triangle is outside the numerical range or the solve failed.
  double log_xi = 0.0;
  double err = 0.0;
  std::string status;  // "ok", "too_thin", "accuracy_not_met", "error"
};

/// τ_i = 2(i+1)/(tau_steps+1), ν_k = (k+1)/nu_steps; rows ordered by τ then ν.
std::vector<double> grid_taus(int tau_steps);
std::vector<double> grid_nus(int nu_steps);

/// log ξ over the uniform (τ, ν) lattice. Apexes lower than 0.01 are
/// reported as missing. Steps must be ≥ 2.
std::vector<GridPoint> plot_grid(int tau_steps, int nu_steps, double target, const GapOptions& opt = {},
                                 int threads = 1);

}  // namespace gapcert
