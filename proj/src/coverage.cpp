#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "gapcert/sweep.hpp"

namespace gapcert {

namespace {

// Uniform bucket grid over the window; each ball is listed in every bucket
// its bounding box touches.
class BallIndex {
 public:
  BallIndex(std::span<const CertifiedCell> cells, const SweepWindow& w, double bucket)
      : cells_(cells), x0_(w.x0), y0_(w.y0), size_(bucket) {
    nx_ = static_cast<long>(std::ceil((w.x1 - w.x0) / bucket)) + 1;
    ny_ = static_cast<long>(std::ceil((w.y1 - w.y0) / bucket)) + 1;
    std::vector<std::uint32_t> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    const auto each_bucket = [&](const CertifiedCell& c, auto&& f) {
      const long ax = clampx(static_cast<long>(std::floor((c.x - c.t_radius - x0_) / size_)));
      const long bx = clampx(static_cast<long>(std::floor((c.x + c.t_radius - x0_) / size_)));
      const long ay = clampy(static_cast<long>(std::floor((c.y - c.t_radius - y0_) / size_)));
      const long by = clampy(static_cast<long>(std::floor((c.y + c.t_radius - y0_) / size_)));
      for (long iy = ay; iy <= by; ++iy) {
        for (long ix = ax; ix <= bx; ++ix) f(static_cast<std::size_t>(iy * nx_ + ix));
      }
    };
    for (const auto& c : cells_) each_bucket(c, [&](std::size_t b) { ++count[b + 1]; });
    for (std::size_t b = 1; b < count.size(); ++b) count[b] += count[b - 1];
    start_ = count;
    items_.resize(count.back());
    for (std::uint32_t k = 0; k < cells_.size(); ++k) {
      each_bucket(cells_[k], [&](std::size_t b) { items_[count[b]++] = k; });
    }
  }

  bool covers(double x, double y) const {
    const long ix = clampx(static_cast<long>(std::floor((x - x0_) / size_)));
    const long iy = clampy(static_cast<long>(std::floor((y - y0_) / size_)));
    const auto b = static_cast<std::size_t>(iy * nx_ + ix);
    for (std::uint32_t k = start_[b]; k < start_[b + 1]; ++k) {
      const auto& c = cells_[items_[k]];
      const double dx = x - c.x, dy = y - c.y;
      if (dx * dx + dy * dy < c.t_radius * c.t_radius) return true;
    }
    return false;
  }

 private:
  long clampx(long v) const { return std::clamp(v, 0L, nx_ - 1); }
  long clampy(long v) const { return std::clamp(v, 0L, ny_ - 1); }

  std::span<const CertifiedCell> cells_;
  double x0_, y0_, size_;
  long nx_ = 0, ny_ = 0;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;
};

}  // namespace

CoverageReport coverage_audit(std::span<const CertifiedCell> cells, const SweepWindow& w, double spacing,
                              std::size_t max_examples) {
  if (!(spacing > 0.0)) throw std::invalid_argument("audit spacing must be positive");
  if (!(w.x0 <= w.x1) || !(w.y0 <= w.y1)) throw std::invalid_argument("audit window is empty");
  const BallIndex index(cells, w, std::max(10.0 * spacing, 1e-3));
  const auto nx = static_cast<long>(std::floor((w.x1 - w.x0) / spacing + 1e-9));
  const auto ny = static_cast<long>(std::floor((w.y1 - w.y0) / spacing + 1e-9));

  CoverageReport r;
  for (long b = 0; b <= ny; ++b) {
    const double y = w.y0 + static_cast<double>(b) * spacing;
    for (long a = 0; a <= nx; ++a) {
      const double x = w.x0 + static_cast<double>(a) * spacing;
      ++r.points;
      if (!(x * x + y * y <= 1.0) || x < 0.5 || x > 1.0 || y > 1.0) {
        ++r.outside_region;
      } else if (y < kThinStripHeight) {
        ++r.in_strip;
      } else if (std::hypot(x - kEquilateralApex.x, y - kEquilateralApex.y) <= kExclusionRadius) {
        ++r.in_ball;
      } else if (index.covers(x, y)) {
        ++r.by_cells;
      } else {
        ++r.uncovered;
        if (r.examples.size() < max_examples) r.examples.push_back({x, y});
      }
    }
  }
  return r;
}

}  // namespace gapcert
