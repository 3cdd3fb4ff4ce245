#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gapcert/fem.hpp"
#include "gapcert/geometry.hpp"
#include "gapcert/sparse_cholesky.hpp"

namespace gapcert {

enum class SolveStatus { converged, iteration_cap };

enum class Factorization {
  /// Sparse Cholesky under a cached minimum-degree ordering.
  sparse,
  /// Profile Cholesky in lattice order (dense rows, SIMD kernels).
  envelope,
};

struct EigenOptions {
  /// Ritz block size is k + extra_vectors.
  int extra_vectors = 1;
  /// The search space restarts onto the Ritz block once it would exceed this.
  int max_basis = 30;
  int max_iterations = 10000;
  /// Relative residual ‖K v − λ M v‖ ≤ tolerance · ‖K v‖ for each pair. The
  /// eigenvalue error is of the order of the squared residual.
  double tolerance = 1e-10;
  Factorization factorization = Factorization::sparse;
};

struct EigenPairs {
  SolveStatus status = SolveStatus::iteration_cap;
  std::vector<double> values;                // ascending, k entries
  std::vector<std::vector<double>> vectors;  // mass-orthonormal, k entries
  std::vector<double> relative_residuals;
  int iterations = 0;
  /// All Ritz vectors of the final subspace, for warm-starting a finer level.
  std::vector<std::vector<double>> subspace;
  /// Sparse factor applied in the iteration (own or borrowed); null for the
  /// envelope factorization.
  std::shared_ptr<const SparseCholesky> factor;

  bool converged() const { return status == SolveStatus::converged; }
};

/// k smallest eigenpairs of K v = λ M v. K is factorized once; each step
/// adds K⁻¹ applied to the Ritz residuals to an M-orthonormal search space
/// and takes Rayleigh–Ritz values on it (a block Davidson method with an
/// exact shift-invert preconditioner and thick restarts).
/// `preconditioner`, when given, replaces the factorization of K: the factor
/// of a nearby matrix with the same pattern still converges to the same
/// tolerance, in a few more steps. Throws std::invalid_argument for k < 1 or
/// k > system size.
EigenPairs smallest_eigenpairs(const AssembledSystem& s, int k, const EigenOptions& opt = {},
                               std::span<const std::vector<double>> warm_start = {},
                               std::shared_ptr<const SparseCholesky> preconditioner = nullptr);

inline EigenPairs smallest_eigenpairs(const AssembledSystem& s, int k, double tol) {
  EigenOptions opt;
  opt.tolerance = tol;
  return smallest_eigenpairs(s, k, opt);
}

/// Raw discrete eigenvalues at one refinement level.
struct LevelEigenvalues {
  int level = 0;
  std::vector<double> values;
  int iterations = 0;
};

/// Richardson-extrapolated eigenvalues with an empirical (asymptotic,
/// non-rigorous) error estimate per eigenvalue.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<double> error_bounds;
  int coarse_level = 0;
  int fine_level = 0;
  int richardson_depth = 0;
  /// (λ_{L−2} − λ_{L−1}) / (λ_{L−1} − λ_L) per eigenvalue; 4 for O(h²).
  std::vector<double> observed_rates;
  std::vector<LevelEigenvalues> levels;
};

struct GapOptions {
  int start_level = 6;
  int max_level = 10;
  /// Cap for thin triangles (apex height ≤ 0.05 relative to the diameter).
  int thin_max_level = 11;
  /// Levels whose envelope factor would exceed this many bytes are not attempted.
  std::size_t memory_budget_bytes = std::size_t{3} << 30;
  /// Number of consecutive levels in the Richardson table (≥ 2).
  int table_levels = 5;
  /// Highest extrapolation depth: depth k removes the h², …, h^(2k) terms.
  int max_depth = 3;
  double safety_factor = 2.0;
  /// Accepted window for the observed first-order convergence rate.
  double min_rate = 3.0;
  double max_rate = 5.5;
  /// Residual 1e-7 already puts the eigenvalues within ~1e-11 of the
  /// converged discrete values, far below any Richardson error estimate.
  EigenOptions eigen{.tolerance = 1e-7};
};

struct GapEstimate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double xi = 0.0;     // diameter² · (λ₂ − λ₁)
  double err = 0.0;    // bound on |ξ error| and on |(λ₁+λ₂)·d² error|
  double err_lambda1 = 0.0;
  double err_lambda2 = 0.0;
  double diameter = 0.0;
  bool accuracy_met = false;
  bool solver_converged = true;
  bool rate_ok = true;
  std::string note;
  Spectrum spectrum;
};

/// Refines one triangle level by level and keeps the Richardson table,
/// so a caller can tighten the accuracy target without recomputing the
/// coarser levels.
class GapEstimator {
 public:
  GapEstimator(const VertexTriangle& t, GapOptions opt = {}, int eigen_count = 2);

  /// Uses the Ritz subspaces of a nearby triangle's estimator as starting
  /// blocks and its stiffness factors as preconditioners; the lattices of
  /// equal level share their numbering, so both carry over unchanged. Only
  /// iteration counts depend on this, up to the solver tolerance.
  void warm_start_from(const GapEstimator& other);

  /// Refines until err ≤ target or the level cap is reached.
  const GapEstimate& solve_to(double target);

  const GapEstimate& estimate() const { return estimate_; }
  int level_cap() const { return cap_; }

 private:
  void add_level(int level);
  void update_estimate();

  VertexTriangle triangle_;
  GapOptions opt_;
  int count_;
  int cap_;
  std::vector<LevelEigenvalues> levels_;
  /// Final Ritz block per level (index = level).
  std::vector<std::vector<std::vector<double>>> subspaces_;
  std::vector<std::vector<std::vector<double>>> hints_;
  std::vector<std::shared_ptr<const SparseCholesky>> factors_;
  std::vector<double> exponents_;
  bool all_converged_ = true;
  GapEstimate estimate_;
};

/// λ₁, λ₂ and ξ with error estimate; levels increase until err ≤ target or
/// the cap is hit (accuracy_met = false; never use such a result to certify).
GapEstimate gap_with_error(const VertexTriangle& t, double target, const GapOptions& opt = {});
GapEstimate gap_with_error(const Triangle& t, double target, const GapOptions& opt = {});

/// First `count` eigenvalues with Richardson error bounds.
Spectrum compute_spectrum(const VertexTriangle& t, int count, double target, const GapOptions& opt = {});

/// Powers of h in the eigenvalue error expansion, ascending: the even
/// powers of the smooth part plus 2mπ/α + 2k from each corner of angle α.
/// Powers closer than 0.25 to a smaller one are dropped.
std::vector<double> extrapolation_exponents(const VertexTriangle& t);

/// Bytes held by the envelope Cholesky factor of the level-L lattice.
std::size_t envelope_factor_bytes(int level);

/// Rough peak bytes of one eigensolve at level L: factor plus search space.
std::size_t solve_bytes_estimate(int level, const EigenOptions& opt);

/// Single-level discrete eigenvalues (no extrapolation).
LevelEigenvalues discrete_eigenvalues(const VertexTriangle& t, int level, int count,
                                      const EigenOptions& opt = {});

}  // namespace gapcert
