#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapcert/eigensolver.hpp"
#include "gapcert/geometry.hpp"

namespace gapcert {

/// Constant of the continuity estimate ξ(x*, y*) ≥ ξ(x, y) − (c t / y²)(λ₁ + λ₂).
inline constexpr double kContinuityConstant = 2.4;

double continuity_lower_bound(double xi, double a_sum, double y, double t);

/// t′ = (ξ − 64π²/9)·y²/(2.4·A). Empty when ξ ≤ 64π²/9 or A ≤ 0.
std::optional<double> certification_radius(double xi, double a_sum, double y);

struct Truncation {
  int n = 0;
  int d = 0;
  double t_radius = 0.0;
};

/// Keeps the first nonzero decimal digit: t = d·10⁻ⁿ ≤ t′. Values ≥ 1 clamp
/// to (1, 9, 0.9); empty for t′ ≤ 0 or non-finite input.
std::optional<Truncation> truncate_radius(double t_prime);

/// Required accuracy 0.5·10^(−n−1) for a radius truncated at digit n.
double required_accuracy(int n);

struct CertifiedCell {
  long j = 0;
  long i = 0;
  double x = 0.0;
  double y = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double xi = 0.0;
  double a_sum = 0.0;
  double t_prime = 0.0;
  int n = 0;
  int d = 0;
  double t_radius = 0.0;
  double err = 0.0;
  bool accuracy_met = false;
};

struct SweepWindow {
  double x0 = 0.5;
  double x1 = 1.0;
  double y0 = kThinStripHeight;
  double y1 = 1.0;
};

/// Throws std::invalid_argument unless the window is ordered and inside
/// 0.5 ≤ x ≤ 1, 0.005 ≤ y ≤ 1.
void validate_window(const SweepWindow& w);

enum class SweepRule {
  /// Rows restart at the window's left edge and advance by the seed radius.
  paper,
  /// The window is tiled by square root boxes, one committed row per row of
  /// boxes. A box gets a cell at its centre (or the nearest region point)
  /// and is split into m×m children until every box lies inside the open
  /// ball of its cell; boxes without region points are skipped.
  covering,
};

const char* rule_name(SweepRule r);
SweepRule parse_rule(const std::string& s);

struct AccuracyPolicy {
  /// First solve target for every cell.
  double floor = 1e-3;
  /// Bound on re-solves per cell while the radius digit keeps moving.
  int max_resolves = 16;
};

struct SweepConfig {
  SweepWindow window;
  SweepRule rule = SweepRule::covering;
  AccuracyPolicy accuracy;
  GapOptions gap;
  int threads = 1;
  /// Side of the covering rule's root boxes.
  double root_box = 0.01;
  /// Stop (status running) after this many committed rows; 0 = no limit.
  std::size_t stop_after_rows = 0;
};

/// One triangle's numerical gap, refinable to a tighter target.
struct CellSolution {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double xi = 0.0;
  double err = 0.0;
  bool accuracy_met = false;
  std::string note;
};

class CellSolver {
 public:
  virtual ~CellSolver() = default;
  virtual CellSolution solve_to(double target) = 0;
  /// Optional hint from the solver of a nearby cell; must not change results
  /// beyond the solver tolerance.
  virtual void warm_start_from(const CellSolver& /*other*/) {}
};

using CellSolverFactory = std::function<std::unique_ptr<CellSolver>(const Point& apex)>;

/// Finite-element solver for the triangle (0,0), (1,0), apex.
CellSolverFactory fem_cell_solver(const GapOptions& opt);

enum class SweepStatus { running, complete, failed };
const char* status_name(SweepStatus s);

struct SweepState {
  SweepStatus status = SweepStatus::running;
  /// Next row to compute and its height.
  long j = 0;
  double y = 0.0;
  /// Column index and abscissa where the next row starts.
  long i = 0;
  double x = 0.0;
  /// Radius of the last committed row's first cell, t_{0,j−1}.
  double row_seed_radius = 0.0;
  std::size_t completed_cells = 0;
  std::size_t completed_rows = 0;
  std::string failure;
  /// Paper rule only: the first cell of every row, computed up front.
  std::vector<CertifiedCell> seeds;
  bool seeds_complete = false;
};

/// Receives every committed row in order with the state after it.
using RowSink = std::function<void(std::span<const CertifiedCell> row, const SweepState& after)>;

/// Executes the sweep from `resume` (or from the start). Returns with status
/// complete, failed, or running when stop_after_rows was hit.
SweepState run_sweep(const SweepConfig& cfg, const CellSolverFactory& solver, const RowSink& sink,
                     const SweepState* resume = nullptr);

/// Certifies one cell: solves, derives the radius with ξ − err and A + err,
/// and re-solves until err ≤ 0.5·10^(−n−1). Empty cell plus message on failure.
struct CellOutcome {
  std::optional<CertifiedCell> cell;
  std::string failure;
};
CellOutcome certify_cell(CellSolver& solver, double x, double y, const AccuracyPolicy& policy);

// CSV and resume-file plumbing.

std::string csv_header();
std::string csv_row(const CertifiedCell& c);
/// Parses rows written by csv_row (header lines are skipped).
std::vector<CertifiedCell> read_cells_csv(std::istream& in);

/// Plain key=value snapshot; doubles at 17 significant digits.
std::string serialize_state(const SweepState& s, const SweepConfig& cfg, std::size_t csv_bytes);
struct StoredState {
  SweepState state;
  std::size_t csv_bytes = 0;
  std::string config_fingerprint;
};
StoredState parse_state(std::istream& in);
std::string config_fingerprint(const SweepConfig& cfg);

/// Writes a CSV plus resume file; rows are flushed before each snapshot.
class SweepFiles {
 public:
  /// Resumes when `resume` is set and the state file exists; otherwise
  /// truncates the CSV and starts over.
  SweepFiles(std::string csv_path, std::string state_path, const SweepConfig& cfg, bool resume);

  const SweepState* resume_state() const { return resumed_ ? &stored_.state : nullptr; }
  void commit(std::span<const CertifiedCell> row, const SweepState& after);

 private:
  std::string csv_path_;
  std::string state_path_;
  SweepConfig cfg_;
  std::size_t csv_bytes_ = 0;
  bool resumed_ = false;
  StoredState stored_;
};

struct CoverageReport {
  std::size_t points = 0;
  std::size_t by_cells = 0;
  std::size_t in_strip = 0;
  std::size_t in_ball = 0;
  std::size_t outside_region = 0;
  std::size_t uncovered = 0;
  /// First few uncovered lattice points.
  std::vector<Point> examples;

  bool ok() const { return uncovered == 0; }
};

/// Checks every lattice point of the window (spacing h) against the cells'
/// open balls, the thin strip, the exclusion ball and the region boundary.
CoverageReport coverage_audit(std::span<const CertifiedCell> cells, const SweepWindow& w, double spacing = 1e-4,
                              std::size_t max_examples = 20);

}  // namespace gapcert
