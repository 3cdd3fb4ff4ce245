#include "gapcert/studies.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace gapcert {

namespace {

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) body(k);
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (t == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (int k = 0; k < t; ++k) pool.emplace_back(worker);
}

}  // namespace

ScalingResult scaling_study(const std::vector<double>& heights, double x0, double target, const GapOptions& opt,
                            int threads) {
  if (heights.empty()) throw std::invalid_argument("scaling study needs at least one height");
  if (!(x0 >= 0.5 && x0 <= 1.0)) throw std::invalid_argument("scaling study needs x0 in [0.5, 1]");
  for (std::size_t k = 0; k < heights.size(); ++k) {
    if (!(heights[k] >= kMinScalingHeight)) throw std::invalid_argument("scaling heights must be >= 0.01");
    if (k > 0 && !(heights[k] < heights[k - 1])) throw std::invalid_argument("scaling heights must be strictly decreasing");
  }
  if (!(target > 0.0)) throw std::invalid_argument("accuracy target must be positive");

  ScalingResult r;
  r.x0 = x0;
  r.rows.resize(heights.size());
  parallel_for(heights.size(), threads, [&](std::size_t k) {
    const double h = heights[k];
    const GapEstimate g = gap_with_error(Triangle(x0, h), target, opt);
    r.rows[k] = {h, g.xi, g.err, g.xi * std::pow(h, 4.0 / 3.0), g.accuracy_met, g.note};
  });

  r.all_converged = true;
  r.increasing = true;
  r.min_scaled = std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    r.all_converged = r.all_converged && row.accuracy_met;
    r.min_scaled = std::min(r.min_scaled, row.scaled);
    // Strict growth must survive the error bars.
    if (k > 0 && !(row.xi - row.err > r.rows[k - 1].xi + r.rows[k - 1].err)) r.increasing = false;
    const double lx = std::log(row.h), ly = std::log(row.xi);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto n = static_cast<double>(r.rows.size());
  const double den = n * sxx - sx * sx;
  r.slope = r.rows.size() >= 2 && den != 0.0 ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<double> grid_taus(int tau_steps) {
  if (tau_steps < 2) throw std::invalid_argument("grid needs at least 2 steps per axis");
  std::vector<double> v;
  for (int i = 0; i < tau_steps; ++i) v.push_back(2.0 * (i + 1) / (tau_steps + 1));
  return v;
}

std::vector<double> grid_nus(int nu_steps) {
  if (nu_steps < 2) throw std::invalid_argument("grid needs at least 2 steps per axis");
  std::vector<double> v;
  for (int k = 0; k < nu_steps; ++k) v.push_back(static_cast<double>(k + 1) / nu_steps);
  return v;
}

std::vector<GridPoint> plot_grid(int tau_steps, int nu_steps, double target, const GapOptions& opt, int threads) {
  if (!(target > 0.0)) throw std::invalid_argument("accuracy target must be positive");
  const auto taus = grid_taus(tau_steps);
  const auto nus = grid_nus(nu_steps);
  std::vector<GridPoint> out;
  for (const double tau : taus) {
    for (const double nu : nus) {
      const Point a = tau_nu_to_apex({tau, nu});
      out.push_back({tau, nu, a.x, a.y, std::numeric_limits<double>::quiet_NaN(), 0.0, ""});
    }
  }
  parallel_for(out.size(), threads, [&](std::size_t k) {
    GridPoint& p = out[k];
    if (!(p.y >= kMinScalingHeight)) {
      p.status = "too_thin";
      return;
    }
    try {
      const GapEstimate g = gap_with_error(Triangle(p.x, p.y), target, opt);
      p.err = g.err;
      if (g.accuracy_met) {
        p.log_xi = std::log(g.xi);
        p.status = "ok";
      } else {
        p.status = "accuracy_not_met";
      }
    } catch (const std::exception&) {
      p.status = "error";
    }
  });
  return out;
}

}  // namespace gapcert
