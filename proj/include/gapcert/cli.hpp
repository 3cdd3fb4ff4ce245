#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gapcert/deformation.hpp"
#include "gapcert/eigensolver.hpp"
#include "gapcert/lame.hpp"
#include "gapcert/studies.hpp"
#include "gapcert/sweep.hpp"

// Command implementations behind the gapcert tool. Each returns structured
// results; the tool only parses flags and writes files.
namespace gapcert::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kIncomplete = 3 };

struct EigenReport {
  Point apex;
  GapEstimate estimate;
  double seconds = 0.0;
};

/// λ₁, λ₂, ξ and err for the triangle (0,0), (1,0), apex.
EigenReport cmd_eigen(Point apex, double accuracy, const GapOptions& opt = {});
std::string eigen_csv_header();
std::string eigen_csv_row(const EigenReport& r);

struct SweepReport {
  SweepState state;
  CoverageReport audit;
  std::size_t cells = 0;
  /// Cells with ξ ≤ 64π²/9 + 2·err or accuracy not met.
  std::size_t margin_violations = 0;
  double seconds = 0.0;
  int exit_code = kFailed;
};

/// Runs (or resumes) the sweep into `csv_path` with its state next to it
/// (`csv_path` + ".state"), then audits the complete CSV.
SweepReport cmd_sweep(const SweepConfig& cfg, const std::string& csv_path, bool resume,
                      const std::function<void(const SweepState&)>& progress = {});

std::string scaling_csv(const ScalingResult& r);
std::string grid_csv(const std::vector<GridPoint>& g);
std::string spectrum_csv(const std::vector<lame::EquilateralEigenvalue>& s);

/// I over an (s, a) lattice with b = −√(1 − a²): steps × steps rows.
std::string deform_landscape_csv(int steps);

struct SlopeRow {
  double t = 0.0;
  Point apex;
  double xi = 0.0;
  double err = 0.0;
  /// (ξ(t) − 64π²/9)/t.
  double difference = 0.0;
  bool accuracy_met = false;
  /// ξ − err > 64π²/9 and (ξ + err − 64π²/9)/t ≥ threshold.
  bool ok = false;
};

struct SlopeReport {
  deform::Direction direction;
  double lambda1_slope = 0.0;
  /// min of I over unit (α, β) for this direction.
  double min_I = 0.0;
  std::vector<SlopeRow> rows;
  bool ok = false;
};

/// FEM gap of the equilateral triangle deformed by t·d for each t, against
/// the first-order prediction.
SlopeReport cmd_deform_slope(deform::Direction d, const std::vector<double>& ts, double accuracy,
                             double threshold = 2.0, const GapOptions& opt = {});
std::string slope_csv(const SlopeReport& r);

/// Reads "key = value" lines ('#' starts a comment).
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

/// Inserts "--key=value" after position `at` for every config entry whose
/// flag does not already appear in args, so command-line flags win.
std::vector<std::string> merge_config(std::vector<std::string> args, std::size_t at,
                                      const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace gapcert::cli
