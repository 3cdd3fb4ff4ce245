#include "gapcert/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace gapcert::cli {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

EigenReport cmd_eigen(Point apex, double accuracy, const GapOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  EigenReport r;
  r.apex = apex;
  r.estimate = gap_with_error(Triangle(apex), accuracy, opt);
  r.seconds = seconds_since(t0);
  return r;
}

std::string eigen_csv_header() { return "apex_x,apex_y,level,lambda1,lambda2,xi,err,converged\n"; }

std::string eigen_csv_row(const EigenReport& r) {
  const auto& g = r.estimate;
  return fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.apex.x, r.apex.y,
                     g.spectrum.fine_level, g.lambda1, g.lambda2, g.xi, g.err, g.accuracy_met ? "true" : "false");
}

SweepReport cmd_sweep(const SweepConfig& cfg, const std::string& csv_path, bool resume,
                      const std::function<void(const SweepState&)>& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepFiles files(csv_path, csv_path + ".state", cfg, resume);
  SweepReport r;
  r.state = run_sweep(
      cfg, fem_cell_solver(cfg.gap),
      [&](std::span<const CertifiedCell> row, const SweepState& after) {
        files.commit(row, after);
        if (progress) progress(after);
      },
      files.resume_state());
  r.seconds = seconds_since(t0);
  if (r.state.status != SweepStatus::complete) {
    r.exit_code = r.state.status == SweepStatus::running ? kIncomplete : kFailed;
    return r;
  }
  std::ifstream in(csv_path);
  const auto cells = read_cells_csv(in);
  r.cells = cells.size();
  for (const auto& c : cells) {
    if (!c.accuracy_met || !(c.xi > kEquilateralGap + 2.0 * c.err)) ++r.margin_violations;
  }
  r.audit = coverage_audit(cells, cfg.window);
  r.exit_code = r.audit.ok() && r.margin_violations == 0 ? kOk : kFailed;
  return r;
}

std::string scaling_csv(const ScalingResult& r) {
  std::string out = "h,xi,err,xi_h43,accuracy_met\n";
  for (const auto& row : r.rows) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", row.h, row.xi, row.err, row.scaled,
                       row.accuracy_met ? "true" : "false");
  }
  return out;
}

std::string grid_csv(const std::vector<GridPoint>& g) {
  std::string out = "tau,nu,x,y,log_xi,err,status\n";
  for (const auto& p : g) {
    const std::string lx = std::isnan(p.log_xi) ? std::string() : fmt::format("{:.17g}", p.log_xi);
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{}\n", p.tau, p.nu, p.x, p.y, lx, p.err, p.status);
  }
  return out;
}

std::string spectrum_csv(const std::vector<lame::EquilateralEigenvalue>& s) {
  std::string out = "k,value,value_over_pi2,index,multiplicity,pairs\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::string pairs;
    for (const auto& p : s[k].representative_pairs) {
      if (!pairs.empty()) pairs += ';';
      pairs += fmt::format("({} {})", p.m, p.n);
    }
    out += fmt::format("{},{:.17g},{:.17g},{},{},{}\n", k + 1, s[k].value, s[k].value / (kPi * kPi), s[k].index,
                       s[k].multiplicity, pairs);
  }
  return out;
}

std::string deform_landscape_csv(int steps) {
  if (steps < 2) throw std::invalid_argument("landscape needs at least 2 steps");
  std::string out = "s,alpha,beta,a,b,I\n";
  const double amax = 0.5 * kSqrt3;
  for (int i = 0; i < steps; ++i) {
    const double s = kPi * i / steps;
    for (int k = 0; k < steps; ++k) {
      const double a = amax * k / (steps - 1);
      const deform::Direction d{a, -std::sqrt(std::max(0.0, 1.0 - a * a))};
      const deform::SecondCoeffs c{std::cos(s), std::sin(s)};
      out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s, c.alpha, c.beta, d.a, d.b,
                         deform::slope_gap_I(c, d));
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(fmt::format("{}:{}: expected key = value", path, no));
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

SlopeReport cmd_deform_slope(deform::Direction d, const std::vector<double>& ts, double accuracy,
                             double threshold, const GapOptions& opt) {
  SlopeReport r;
  r.direction = d;
  r.lambda1_slope = deform::lambda1_slope(d);
  // I restricted to the unit circle is a quadratic form in (α, β).
  const double q11 = deform::slope_gap_I({1.0, 0.0}, d);
  const double q22 = deform::slope_gap_I({0.0, 1.0}, d);
  const double h = 1.0 / std::sqrt(2.0);
  const double q12 = deform::slope_gap_I({h, h}, d) - 0.5 * (q11 + q22);
  r.min_I = 0.5 * (q11 + q22) - std::sqrt(0.25 * (q11 - q22) * (q11 - q22) + q12 * q12);
  r.ok = !ts.empty();
  for (const double t : ts) {
    if (!(t > 0.0)) throw std::invalid_argument("deformation magnitudes must be positive");
    SlopeRow row;
    row.t = t;
    row.apex = deform::deformed_equilateral_apex(d, t);
    const auto g = gap_with_error(Triangle(row.apex), accuracy, opt);
    row.xi = g.xi;
    row.err = g.err;
    row.accuracy_met = g.accuracy_met;
    row.difference = (g.xi - kEquilateralGap) / t;
    row.ok = g.xi - g.err > kEquilateralGap && (g.xi + g.err - kEquilateralGap) / t >= threshold;
    r.ok = r.ok && row.ok;
    r.rows.push_back(row);
  }
  return r;
}

std::string slope_csv(const SlopeReport& r) {
  std::string out = "t,apex_x,apex_y,xi,err,difference,accuracy_met,ok\n";
  for (const auto& row : r.rows) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", row.t, row.apex.x, row.apex.y, row.xi,
                       row.err, row.difference, row.accuracy_met ? "true" : "false", row.ok ? "true" : "false");
  }
  return out;
}

std::vector<std::string> merge_config(std::vector<std::string> args, std::size_t at,
                                      const std::vector<std::pair<std::string, std::string>>& kv) {
  at = std::min(at, args.size());
  std::vector<std::string> extra;
  for (const auto& [key, value] : kv) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) extra.push_back(flag + "=" + value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return args;
}

}  // namespace gapcert::cli
