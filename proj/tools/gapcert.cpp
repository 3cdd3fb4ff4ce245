#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gapcert/cli.hpp"
#include "gapcert/simd/kernels.hpp"

namespace {

using namespace gapcert;

struct Common {
  std::optional<int> max_level;
  std::string out;
};

// CSV to --out when given, otherwise to stdout after the summary.
void emit(const std::string& out, const std::string& csv) {
  if (out.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << csv;
}

void summary(const std::string& line) { std::cout << "# " << line << '\n'; }

GapOptions gap_options(const Common& c) {
  GapOptions o;
  if (c.max_level) {
    if (*c.max_level < o.start_level) throw std::invalid_argument(fmt::format("--max-level must be >= {}", o.start_level));
    o.max_level = *c.max_level;
    o.thin_max_level = *c.max_level;
  }
  return o;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be positive", what));
}

void add_common(CLI::App* sub, Common& c, double& accuracy, double default_accuracy) {
  accuracy = default_accuracy;
  sub->add_option("--accuracy", accuracy, "Target accuracy for xi")->capture_default_str();
  sub->add_option("--max-level", c.max_level, "Finest mesh level (uniform refinement count)");
  sub->add_option("--out", c.out, "CSV output path (default: standard output)");
}

// Index of the subcommand token, for inserting config entries after it.
std::size_t subcommand_position(const std::vector<std::string>& args, const CLI::App& app) {
  for (std::size_t k = 1; k < args.size(); ++k) {
    for (const auto* sub : app.get_subcommands({})) {
      if (args[k] == sub->get_name()) return k + 1;
    }
  }
  return args.size();
}

std::vector<std::string> apply_config_file(int argc, char** argv, const CLI::App& app) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  const std::size_t at = subcommand_position(args, app);
  return cli::merge_config(std::move(args), at, cli::read_config(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified Dirichlet eigenvalue gaps of triangles"};
  app.require_subcommand(1);
  int threads = 1;
  std::string simd_name;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads")->envname("GAPCERT_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--simd", simd_name, "Kernel set: scalar, avx2 or neon")
      ->check(CLI::IsMember({"scalar", "avx2", "neon"}))
      ->each([](const std::string& s) {
        simd::set_active_isa(s == "avx2" ? simd::Isa::avx2 : s == "neon" ? simd::Isa::neon : simd::Isa::scalar);
      });
  app.add_option("--config", config_path, "File of key = value defaults; flags override it");

  Common common;
  double accuracy = 0.0;
  int exit_code = cli::kOk;

  auto* eigen = app.add_subcommand("eigen", "lambda1, lambda2 and xi with an error bound for one triangle");
  std::vector<double> apex{0.5, 0.5 * std::sqrt(3.0)};
  eigen->add_option("--apex", apex, "Apex x,y of the triangle (0,0), (1,0), apex")->delimiter(',')->expected(2);
  add_common(eigen, common, accuracy, 1e-4);
  eigen->callback([&] {
    require_positive(accuracy, "--accuracy");
    const auto r = cli::cmd_eigen({apex[0], apex[1]}, accuracy, gap_options(common));
    const auto& g = r.estimate;
    summary(fmt::format("lambda1 = {:.12g}", g.lambda1));
    summary(fmt::format("lambda2 = {:.12g}", g.lambda2));
    summary(fmt::format("xi = {:.12g} +/- {:.3g}", g.xi, g.err));
    summary(fmt::format("level = {}  accuracy_met = {}  seconds = {:.2f}", g.spectrum.fine_level, g.accuracy_met, r.seconds));
    if (!g.note.empty()) summary("note: " + g.note);
    emit(common.out, cli::eigen_csv_header() + cli::eigen_csv_row(r));
    exit_code = g.accuracy_met ? cli::kOk : cli::kFailed;
  });

  auto* sweep = app.add_subcommand("sweep", "Certify xi > 64 pi^2/9 over a window of apexes");
  std::vector<double> window{0.5, 0.85, 0.4, 0.95};
  std::string rule = "covering";
  double root_box = SweepConfig{}.root_box;
  bool resume = false;
  std::size_t stop_after_rows = 0;
  sweep->add_option("--window", window, "x0,x1,y0,y1")->delimiter(',')->expected(4)->capture_default_str();
  sweep->add_option("--rule", rule, "Cell placement: covering or paper")->capture_default_str();
  sweep->add_option("--root-box", root_box, "Side of the covering rule's root boxes")->capture_default_str();
  sweep->add_flag("--resume", resume, "Continue from <out>.state when it exists");
  sweep->add_option("--stop-after-rows", stop_after_rows, "Stop after this many committed rows (0 = run to the end)");
  add_common(sweep, common, accuracy, AccuracyPolicy{}.floor);
  sweep->callback([&] {
    if (common.out.empty()) throw std::invalid_argument("sweep needs --out");
    require_positive(accuracy, "--accuracy");
    SweepConfig cfg;
    cfg.window = {window[0], window[1], window[2], window[3]};
    cfg.rule = parse_rule(rule);
    cfg.root_box = root_box;
    cfg.accuracy.floor = accuracy;
    cfg.gap = gap_options(common);
    cfg.threads = threads;
    cfg.stop_after_rows = stop_after_rows;
    const auto r = cli::cmd_sweep(cfg, common.out, resume, [](const SweepState& s) {
      std::cerr << fmt::format("row {} committed, {} cells\n", s.completed_rows, s.completed_cells);
    });
    summary(fmt::format("status = {}  rows = {}  cells = {}  seconds = {:.1f}", status_name(r.state.status),
                        r.state.completed_rows, r.state.completed_cells, r.seconds));
    if (!r.state.failure.empty()) summary("failure: " + r.state.failure);
    if (r.state.status == SweepStatus::complete) {
      summary(fmt::format("margin violations = {}", r.margin_violations));
      summary(fmt::format("audit points = {}  uncovered = {}", r.audit.points, r.audit.uncovered));
      for (const auto& p : r.audit.examples) summary(fmt::format("uncovered ({:.6f}, {:.6f})", p.x, p.y));
    }
    exit_code = r.exit_code;
  });

  auto* scaling = app.add_subcommand("scaling", "xi against apex height for thin triangles");
  std::vector<double> heights{0.1, 0.05, 0.02};
  double x0 = 0.5;
  scaling->add_option("--heights", heights, "Strictly decreasing heights >= 0.01")->delimiter(',')->capture_default_str();
  scaling->add_option("--x0", x0, "Apex x coordinate")->capture_default_str();
  add_common(scaling, common, accuracy, 1e-3);
  scaling->callback([&] {
    require_positive(accuracy, "--accuracy");
    const auto r = scaling_study(heights, x0, accuracy, gap_options(common), threads);
    for (const auto& row : r.rows) {
      summary(fmt::format("h = {:g}  xi = {:.10g} +/- {:.3g}  xi*h^(4/3) = {:.6g}{}", row.h, row.xi, row.err, row.scaled,
                          row.note.empty() ? "" : "  " + row.note));
    }
    summary(fmt::format("slope = {:.4f}  increasing = {}  min xi*h^(4/3) = {:.6g}", r.slope, r.increasing, r.min_scaled));
    emit(common.out, cli::scaling_csv(r));
    exit_code = r.increasing && r.all_converged && r.min_scaled > 0.0 ? cli::kOk : cli::kFailed;
  });

  auto* lame_verify = app.add_subcommand("lame-verify", "Quadrature check of the equilateral eigenfunction integrals");
  int quad_degree = 10;
  int composite_level = 4;
  lame_verify->add_option("--degree", quad_degree, "Quadrature degree")->capture_default_str();
  lame_verify->add_option("--level", composite_level, "Composite subdivision level")->capture_default_str();
  lame_verify->add_option("--out", common.out, "CSV output path (default: standard output)");
  lame_verify->callback([&] {
    const auto r = lame::verify_integral_tables(quad_degree, composite_level);
    for (const auto& e : r.entries) {
      summary(fmt::format("{}: {} (computed {:.12g}, table {:.12g}){}", e.name, e.status, e.computed, e.paper_value,
                          e.note.empty() ? "" : "  " + e.note));
    }
    summary(fmt::format("max change degree {} -> {}: {:.3g}", quad_degree, quad_degree + 2, r.max_degree_change));
    const auto third = lame::check_third_eigenfunction();
    summary(fmt::format("third eigenfunction as printed: residual {:.3g}, boundary {:.3g}", third.printed.residual,
                        third.printed.boundary_max));
    summary(fmt::format("third eigenfunction reconstructed: residual {:.3g}, boundary {:.3g}",
                        third.reconstructed.residual, third.reconstructed.boundary_max));
    emit(common.out, lame::integral_report_csv(r));
    exit_code = r.all_ok() ? cli::kOk : cli::kFailed;
  });

  auto* lame_spectrum = app.add_subcommand("lame-spectrum", "Distinct Dirichlet eigenvalues of the unit equilateral triangle");
  int count = 10;
  lame_spectrum->add_option("--count", count, "Number of distinct eigenvalues")->check(CLI::PositiveNumber)->capture_default_str();
  lame_spectrum->add_option("--out", common.out, "CSV output path (default: standard output)");
  lame_spectrum->callback([&] { emit(common.out, cli::spectrum_csv(lame::distinct_spectrum(count))); });

  auto* deform_min = app.add_subcommand("deform-minimize", "Minimum of the first-order gap slope I");
  int grid = 10000;
  int landscape_steps = 0;
  deform_min->add_option("--grid", grid, "Grid points per axis")->check(CLI::Range(2, 100000))->capture_default_str();
  deform_min->add_option("--landscape", landscape_steps, "Also write an I landscape with this many steps per axis to --out");
  deform_min->add_option("--out", common.out, "Landscape CSV path (default: standard output)");
  deform_min->callback([&] {
    const auto r = deform::minimize_I(grid, threads);
    const double expected = deform::prop_minimum();
    std::cout << fmt::format("value = {:.12f}\n", r.value);
    std::cout << fmt::format("closed_form = {:.12f}\n", expected);
    std::cout << fmt::format("difference = {:.3g}\n", r.value - expected);
    std::cout << fmt::format("alpha = {:.9f}\nbeta = {:.9f}\n", r.coeffs.alpha, r.coeffs.beta);
    std::cout << fmt::format("a = {:.9f}\nb = {:.9f}\n", r.direction.a, r.direction.b);
    std::cout << fmt::format("evaluations = {}\n", r.evaluations);
    if (landscape_steps > 0) emit(common.out, cli::deform_landscape_csv(landscape_steps));
    exit_code = std::abs(r.value - expected) <= 1e-5 ? cli::kOk : cli::kFailed;
  });

  auto* deform_slope = app.add_subcommand("deform-slope", "FEM gap along a deformation of the equilateral triangle");
  std::vector<double> direction{0.5 * std::sqrt(3.0), -0.5};
  std::vector<double> ts{0.005, 0.01, 0.02};
  double threshold = 2.0;
  deform_slope->add_option("--direction", direction, "Unit direction a,b of the apex motion")->delimiter(',')->expected(2);
  deform_slope->add_option("--t", ts, "Deformation magnitudes")->delimiter(',')->capture_default_str();
  deform_slope->add_option("--threshold", threshold, "Required first difference")->capture_default_str();
  add_common(deform_slope, common, accuracy, 1e-3);
  deform_slope->callback([&] {
    require_positive(accuracy, "--accuracy");
    const auto d = deform::make_direction(direction[0], direction[1]);
    const auto r = cli::cmd_deform_slope(d, ts, accuracy, threshold, gap_options(common));
    std::cout << fmt::format("lambda1_slope = {:.12g}\nmin_I = {:.12g}\n", r.lambda1_slope, r.min_I);
    for (const auto& row : r.rows) {
      std::cout << fmt::format("t = {:g}: xi = {:.10g} +/- {:.3g}, (xi - 64pi^2/9)/t = {:.6g}, {}\n", row.t, row.xi, row.err,
                               row.difference, row.ok ? "ok" : "FAIL");
    }
    if (!common.out.empty()) emit(common.out, cli::slope_csv(r));
    exit_code = r.ok ? cli::kOk : cli::kFailed;
  });

  auto* plot = app.add_subcommand("plot-grid", "log xi over a uniform (tau, nu) lattice");
  int tau_steps = 20;
  int nu_steps = 10;
  plot->add_option("--tau-steps", tau_steps, "Lattice points in tau")->capture_default_str();
  plot->add_option("--nu-steps", nu_steps, "Lattice points in nu")->capture_default_str();
  add_common(plot, common, accuracy, 1e-2);
  plot->callback([&] {
    require_positive(accuracy, "--accuracy");
    const auto g = plot_grid(tau_steps, nu_steps, accuracy, gap_options(common), threads);
    std::size_t ok = 0;
    for (const auto& p : g) ok += p.status == "ok";
    summary(fmt::format("points = {}  computed = {}  missing = {}", g.size(), ok, g.size() - ok));
    emit(common.out, cli::grid_csv(g));
  });

  try {
    const auto args = apply_config_file(argc, argv, app);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kFailed;
  }
  return exit_code;
}
