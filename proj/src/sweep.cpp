#include "gapcert/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

namespace gapcert {

double continuity_lower_bound(double xi, double a_sum, double y, double t) {
  return xi - kContinuityConstant * t / (y * y) * a_sum;
}

std::optional<double> certification_radius(double xi, double a_sum, double y) {
  const double margin = xi - kEquilateralGap;
  if (!(margin > 0.0) || !(a_sum > 0.0) || !(y > 0.0)) return std::nullopt;
  return margin * y * y / (kContinuityConstant * a_sum);
}

std::optional<Truncation> truncate_radius(double t_prime) {
  if (!std::isfinite(t_prime) || !(t_prime > 0.0)) return std::nullopt;
  if (t_prime >= 1.0) return Truncation{1, 9, 0.9};
  // Leading digit position from the exponent, corrected for rounding in log10.
  int n = static_cast<int>(std::ceil(-std::log10(t_prime)));
  n = std::max(n, 1);
  const auto scaled = [&](int k) { return t_prime * std::pow(10.0, k); };
  while (n > 1 && scaled(n - 1) >= 1.0) --n;
  while (scaled(n) < 1.0) ++n;
  int d = std::clamp(static_cast<int>(std::floor(scaled(n))), 1, 9);
  // The digit must never produce a radius above t′ after rounding.
  while (d / std::pow(10.0, n) > t_prime) {
    if (--d == 0) {
      ++n;
      d = 9;
    }
  }
  return Truncation{n, d, d / std::pow(10.0, n)};
}

double required_accuracy(int n) { return 0.5 * std::pow(10.0, -(n + 1)); }

void validate_window(const SweepWindow& w) {
  const bool finite = std::isfinite(w.x0) && std::isfinite(w.x1) && std::isfinite(w.y0) && std::isfinite(w.y1);
  if (!finite || !(w.x0 < w.x1) || !(w.y0 < w.y1)) {
    throw std::invalid_argument("sweep window must satisfy x0 < x1 and y0 < y1");
  }
  if (w.x0 < 0.5 || w.x1 > 1.0 || w.y0 < kThinStripHeight || w.y1 > 1.0) {
    throw std::invalid_argument("sweep window must lie in 0.5 <= x <= 1, 0.005 <= y <= 1");
  }
}

const char* rule_name(SweepRule r) { return r == SweepRule::paper ? "paper" : "covering"; }

SweepRule parse_rule(const std::string& s) {
  if (s == "paper") return SweepRule::paper;
  if (s == "covering") return SweepRule::covering;
  throw std::invalid_argument("unknown sweep rule '" + s + "' (expected paper or covering)");
}

const char* status_name(SweepStatus s) {
  switch (s) {
    case SweepStatus::running: return "running";
    case SweepStatus::complete: return "complete";
    case SweepStatus::failed: return "failed";
  }
  return "?";
}

namespace {

class FemCellSolver final : public CellSolver {
 public:
  FemCellSolver(const Point& apex, const GapOptions& opt) : est_(Triangle(apex).vertices(), opt) {}

  CellSolution solve_to(double target) override {
    const GapEstimate& g = est_.solve_to(target);
    return {g.lambda1, g.lambda2, g.xi, g.err, g.accuracy_met, g.note};
  }

  void warm_start_from(const CellSolver& other) override {
    if (const auto* o = dynamic_cast<const FemCellSolver*>(&other)) est_.warm_start_from(o->est_);
  }

 private:
  GapEstimator est_;
};

std::string describe(long i, long j, double x, double y) {
  return fmt::format("cell (i={}, j={}) at apex ({:.17g}, {:.17g})", i, j, x, y);
}

bool inside_ball(double x, double y) {
  return std::hypot(x - kEquilateralApex.x, y - kEquilateralApex.y) <= kExclusionRadius;
}

struct RowResult {
  std::vector<CertifiedCell> cells;
  std::string failure;
};

// Covering rule: the window is tiled by root boxes; each box gets a cell
// near its centre and is split into m×m children while the cell's ball does
// not contain the whole box.
struct Box {
  double x0, y0, x1, y1;
};

double corner_reach(const Box& b, Point c) {
  double r = 0.0;
  for (const double x : {b.x0, b.x1}) {
    for (const double y : {b.y0, b.y1}) r = std::max(r, std::hypot(x - c.x, y - c.y));
  }
  return r;
}

// True when no point of the box belongs to the sweep region.
bool box_excluded(const Box& b) {
  if (corner_reach(b, kEquilateralApex) <= kExclusionRadius) return true;
  const double nx = std::clamp(0.0, b.x0, b.x1);
  const double ny = std::clamp(0.0, b.y0, b.y1);
  return nx * nx + ny * ny > 1.0;
}

// Region point of the box closest to its centre among a 9×9 sample grid.
std::optional<Point> place_cell(const Box& b) {
  const Point c{0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)};
  if (in_sweep_region(c.x, c.y)) return c;
  constexpr int kSamples = 9;
  std::optional<Point> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kSamples; ++a) {
    for (int k = 0; k < kSamples; ++k) {
      const Point p{b.x0 + (b.x1 - b.x0) * a / (kSamples - 1), b.y0 + (b.y1 - b.y0) * k / (kSamples - 1)};
      const double d = std::hypot(p.x - c.x, p.y - c.y);
      if (d < best_d && in_sweep_region(p.x, p.y)) {
        best = p;
        best_d = d;
      }
    }
  }
  return best;
}

constexpr double kMinBoxSide = 1e-9;
// Balls of the nearest ancestors checked before a box gets its own cell.
constexpr std::size_t kAncestorBalls = 8;
// Subtrees this shallow become separate tasks; deeper ones run inline.
constexpr int kSpawnDepth = 3;

struct Ball {
  Point c;
  double t;
};

// Cells of one subtree in emission order, with spawned subtrees spliced in
// where they belong.
struct Subtree {
  struct Item {
    std::optional<CertifiedCell> cell;
    std::shared_ptr<Subtree> child;
  };
  std::vector<Item> items;
  std::string failure;
};

class RowCoverer {
 public:
  RowCoverer(const SweepConfig& cfg, const CellSolverFactory& make) : cfg_(cfg), make_(make) {}

  RowResult run(const std::vector<Box>& roots) {
    std::vector<std::shared_ptr<Subtree>> tops;
    for (const auto& b : roots) {
      tops.push_back(std::make_shared<Subtree>());
      push({b, nullptr, {}, 0, tops.back()});
    }
    const int nthreads = std::max(1, cfg_.threads);
    {
      std::vector<std::jthread> pool;
      for (int k = 1; k < nthreads; ++k) pool.emplace_back([this] { work(); });
      work();
    }
    RowResult out;
    for (const auto& t : tops) {
      if (!flatten(*t, out)) break;
    }
    return out;
  }

 private:
  struct Task {
    Box box;
    std::shared_ptr<const CellSolver> hint;
    std::vector<Ball> ancestors;
    int depth = 0;
    std::shared_ptr<Subtree> into;
  };

  void push(Task t) {
    const std::lock_guard lock(mutex_);
    queue_.push_back(std::move(t));
    ++pending_;
    cv_.notify_one();
  }

  void work() {
    for (;;) {
      Task t;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !queue_.empty() || pending_ == 0; });
        if (queue_.empty()) return;
        t = std::move(queue_.front());
        queue_.pop_front();
      }
      cover(t.box, t.hint, t.ancestors, t.depth, *t.into);
      const std::lock_guard lock(mutex_);
      if (--pending_ == 0) cv_.notify_all();
    }
  }

  void cover(const Box& b, const std::shared_ptr<const CellSolver>& parent, const std::vector<Ball>& ancestors,
             int depth, Subtree& out) {
    if (!out.failure.empty() || box_excluded(b)) return;
    for (const auto& a : ancestors) {
      if (corner_reach(b, a.c) <= a.t * (1.0 - 1e-12)) return;
    }
    const double side = std::max(b.x1 - b.x0, b.y1 - b.y0);
    double t = 0.0;
    std::shared_ptr<const CellSolver> hint = parent;
    std::vector<Ball> chain = ancestors;
    if (const auto p = place_cell(b)) {
      std::shared_ptr<CellSolver> solver = make_(*p);
      if (parent) solver->warm_start_from(*parent);
      CellOutcome oc = certify_cell(*solver, p->x, p->y, cfg_.accuracy);
      if (!oc.cell) {
        out.failure = fmt::format("cell at apex ({:.17g}, {:.17g}): {}", p->x, p->y, oc.failure);
        return;
      }
      t = oc.cell->t_radius;
      out.items.push_back({std::move(oc.cell), nullptr});
      // The balls are open; keep a relative hair of slack.
      if (corner_reach(b, *p) <= t * (1.0 - 1e-12)) return;
      hint = std::move(solver);
      chain.push_back({*p, t});
      if (chain.size() > kAncestorBalls) chain.erase(chain.begin());
    }
    if (side < kMinBoxSide) {
      out.failure = fmt::format("box [{:.17g}, {:.17g}] x [{:.17g}, {:.17g}] is too small to split", b.x0, b.x1,
                                b.y0, b.y1);
      return;
    }
    // Children about as large as a ball of the parent's radius can contain.
    int m = 2;
    if (t > 0.0) m = std::clamp(static_cast<int>(std::ceil(side / (std::numbers::sqrt2 * t))), 2, 16);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const Box child{split(b.x0, b.x1, c, m), split(b.y0, b.y1, r, m), split(b.x0, b.x1, c + 1, m),
                        split(b.y0, b.y1, r + 1, m)};
        if (depth < kSpawnDepth && cfg_.threads > 1) {
          auto sub = std::make_shared<Subtree>();
          out.items.push_back({std::nullopt, sub});
          push({child, hint, chain, depth + 1, sub});
        } else {
          cover(child, hint, chain, depth + 1, out);
        }
      }
    }
  }

  // Appends the cells in order; false at the first failure.
  static bool flatten(const Subtree& s, RowResult& out) {
    for (const auto& it : s.items) {
      if (it.cell) {
        out.cells.push_back(*it.cell);
      } else if (it.child && !flatten(*it.child, out)) {
        return false;
      }
    }
    if (!s.failure.empty()) {
      out.failure = s.failure;
      return false;
    }
    return true;
  }

  static double split(double lo, double hi, int k, int m) { return k == m ? hi : lo + (hi - lo) * k / m; }

  const SweepConfig& cfg_;
  const CellSolverFactory& make_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Task> queue_;
  std::size_t pending_ = 0;
};

struct RootGrid {
  long rows = 0;
  long cols = 0;
  double edge(double lo, double hi, long k, long count) const {
    return k == count ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count);
  }
};

RootGrid root_grid(const SweepConfig& cfg) {
  const auto count = [&](double span) {
    return std::max(1L, static_cast<long>(std::ceil(span / cfg.root_box * (1.0 - 1e-12))));
  };
  return {count(cfg.window.y1 - cfg.window.y0), count(cfg.window.x1 - cfg.window.x0)};
}

RowResult covering_row(const SweepConfig& cfg, const CellSolverFactory& make, const RootGrid& g, long j) {
  const auto& w = cfg.window;
  const double y0 = g.edge(w.y0, w.y1, j, g.rows);
  const double y1 = g.edge(w.y0, w.y1, j + 1, g.rows);
  std::vector<Box> roots;
  for (long c = 0; c < g.cols; ++c) roots.push_back({g.edge(w.x0, w.x1, c, g.cols), y0, g.edge(w.x0, w.x1, c + 1, g.cols), y1});
  RowResult out = RowCoverer(cfg, make).run(roots);
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    out.cells[k].i = static_cast<long>(k);
    out.cells[k].j = j;
  }
  if (!out.failure.empty()) out.failure = fmt::format("row j={}: {}", j, out.failure);
  return out;
}

// Paper rule: cells after the seed, advancing by t until check 3.1, 3.2 or
// the window's right edge fails.
RowResult paper_row_tail(const SweepConfig& cfg, const CellSolverFactory& make, const CertifiedCell& seed) {
  RowResult out;
  out.cells.push_back(seed);
  const double y = seed.y;
  double x = seed.x;
  double t = seed.t_radius;
  for (long i = 1;; ++i) {
    x += t;
    if (!(x * x + y * y <= 1.0) || inside_ball(x, y) || x > cfg.window.x1) break;
    auto solver = make(Point{x, y});
    CellOutcome oc = certify_cell(*solver, x, y, cfg.accuracy);
    if (!oc.cell) {
      out.failure = describe(i, seed.j, x, y) + ": " + oc.failure;
      return out;
    }
    oc.cell->i = i;
    oc.cell->j = seed.j;
    t = oc.cell->t_radius;
    out.cells.push_back(*oc.cell);
  }
  return out;
}

void fail(SweepState& st, std::string msg) {
  st.status = SweepStatus::failed;
  st.failure = std::move(msg);
}

SweepState run_covering(const SweepConfig& cfg, const CellSolverFactory& make, const RowSink& sink, SweepState st) {
  const RootGrid g = root_grid(cfg);
  std::size_t rows_this_run = 0;
  while (st.status == SweepStatus::running) {
    if (st.j >= g.rows) {
      st.status = SweepStatus::complete;
      break;
    }
    if (cfg.stop_after_rows != 0 && rows_this_run == cfg.stop_after_rows) break;
    RowResult r = covering_row(cfg, make, g, st.j);
    if (!r.failure.empty()) {
      fail(st, r.failure);
      break;
    }
    st.row_seed_radius = r.cells.empty() ? 0.0 : r.cells.front().t_radius;
    st.completed_cells += r.cells.size();
    ++st.completed_rows;
    ++st.j;
    st.y = g.edge(cfg.window.y0, cfg.window.y1, st.j, g.rows);
    st.x = cfg.window.x0;
    st.i = 0;
    if (st.j >= g.rows) st.status = SweepStatus::complete;
    ++rows_this_run;
    sink(r.cells, st);
  }
  return st;
}

SweepState run_paper(const SweepConfig& cfg, const CellSolverFactory& make, const RowSink& sink, SweepState st) {
  const double x0 = cfg.window.x0;
  // Seed column (sequential: each row's height depends on the previous seed).
  if (!st.seeds_complete) {
    for (;;) {
      const double y = st.seeds.empty() ? cfg.window.y0 : st.seeds.back().y + st.seeds.back().t_radius;
      // Checks 4.1 and 4.2, plus the window's top edge.
      if (!(x0 * x0 + y * y <= 1.0) || inside_ball(x0, y) || y > cfg.window.y1) break;
      const long j = static_cast<long>(st.seeds.size());
      auto solver = make(Point{x0, y});
      CellOutcome oc = certify_cell(*solver, x0, y, cfg.accuracy);
      if (!oc.cell) {
        fail(st, describe(0, j, x0, y) + ": " + oc.failure);
        return st;
      }
      oc.cell->i = 0;
      oc.cell->j = j;
      st.seeds.push_back(*oc.cell);
    }
    st.seeds_complete = true;
  }

  const std::size_t total = st.seeds.size();
  const std::size_t begin = static_cast<std::size_t>(st.j);
  std::size_t end = total;
  if (cfg.stop_after_rows != 0) end = std::min(total, begin + cfg.stop_after_rows);

  std::vector<RowResult> rows(end > begin ? end - begin : 0);
  std::atomic<std::size_t> next{begin};
  const auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < end;) {
      rows[r - begin] = paper_row_tail(cfg, make, st.seeds[r]);
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(rows.size())));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }

  for (std::size_t r = begin; r < end; ++r) {
    RowResult& row = rows[r - begin];
    if (!row.failure.empty()) {
      fail(st, row.failure);
      return st;
    }
    st.row_seed_radius = row.cells.front().t_radius;
    st.completed_cells += row.cells.size();
    ++st.completed_rows;
    st.j = static_cast<long>(r) + 1;
    if (r + 1 < total) {
      st.y = st.seeds[r + 1].y;
      st.x = st.seeds[r + 1].x;
    } else {
      st.y = st.seeds[r].y + st.seeds[r].t_radius;
      st.x = x0;
    }
    st.i = 0;
    if (st.j == static_cast<long>(total)) st.status = SweepStatus::complete;
    sink(row.cells, st);
  }
  if (total == 0) st.status = SweepStatus::complete;
  return st;
}

}  // namespace

CellSolverFactory fem_cell_solver(const GapOptions& opt) {
  return [opt](const Point& apex) -> std::unique_ptr<CellSolver> {
    return std::make_unique<FemCellSolver>(apex, opt);
  };
}

CellOutcome certify_cell(CellSolver& solver, double x, double y, const AccuracyPolicy& policy) {
  CellSolution s = solver.solve_to(policy.floor);
  for (int round = 0;; ++round) {
    if (!s.accuracy_met) {
      return {std::nullopt, "accuracy not met (" + (s.note.empty() ? std::string("level cap") : s.note) +
                                fmt::format("), xi={:.17g} err={:.3g}", s.xi, s.err)};
    }
    if (round > policy.max_resolves) {
      return {std::nullopt, "radius digit did not settle within the re-solve budget"};
    }
    const double margin = s.xi - kEquilateralGap;
    if (!(margin > 2.0 * s.err)) {
      // The margin may only be hidden by the error; tighten once it is positive.
      if (margin > 0.0 && s.err > 0.0) {
        s = solver.solve_to(std::min(s.err, margin) / 4.0);
        continue;
      }
      return {std::nullopt, fmt::format("certification failure: xi={:.17g} err={:.3g} does not exceed 64pi^2/9 + 2err",
                                        s.xi, s.err)};
    }
    const double a_sum = s.lambda1 + s.lambda2;
    const auto tp = certification_radius(s.xi - s.err, a_sum + s.err, y);
    const auto tr = tp ? truncate_radius(*tp) : std::nullopt;
    if (!tr) return {std::nullopt, "certification failure: no positive radius"};
    const double need = required_accuracy(tr->n);
    if (s.err <= need) {
      CertifiedCell c;
      c.x = x;
      c.y = y;
      c.lambda1 = s.lambda1;
      c.lambda2 = s.lambda2;
      c.xi = s.xi;
      c.a_sum = a_sum;
      c.t_prime = *tp;
      c.n = tr->n;
      c.d = tr->d;
      c.t_radius = tr->t_radius;
      c.err = s.err;
      c.accuracy_met = true;
      return {c, {}};
    }
    s = solver.solve_to(need);
  }
}

SweepState run_sweep(const SweepConfig& cfg, const CellSolverFactory& solver, const RowSink& sink,
                     const SweepState* resume) {
  validate_window(cfg.window);
  SweepState st;
  if (resume) {
    st = *resume;
    if (st.status != SweepStatus::running) return st;
  } else {
    st.y = cfg.window.y0;
    st.x = cfg.window.x0;
  }
  if (cfg.rule == SweepRule::covering && !(cfg.root_box > 0.0 && std::isfinite(cfg.root_box))) {
    throw std::invalid_argument("root box side must be positive");
  }
  return cfg.rule == SweepRule::covering ? run_covering(cfg, solver, sink, std::move(st))
                                         : run_paper(cfg, solver, sink, std::move(st));
}

}  // namespace gapcert
