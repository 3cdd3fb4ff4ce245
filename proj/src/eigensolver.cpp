#include "gapcert/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

#include "gapcert/envelope_cholesky.hpp"
#include "gapcert/mesh.hpp"
#include "gapcert/sparse_cholesky.hpp"
#include "gapcert/simd/kernels.hpp"

namespace gapcert {

namespace {

using Block = std::vector<std::vector<double>>;

double norm(std::span<const double> v) { return std::sqrt(simd::sum_squares(v)); }

bool is_thin(const VertexTriangle& t) {
  const double d = diameter(t);
  const double min_height = 2.0 * t.area() / d;
  return min_height <= 0.05 * d;
}

}  // namespace

namespace {

// K⁻¹ applied through whichever factorization the options ask for.
class Factor {
 public:
  Factor(const CsrMatrix& k, Factorization f, std::shared_ptr<const SparseCholesky> given) {
    if (given && given->size() == k.rows) {
      sparse_ = std::move(given);
    } else if (f == Factorization::envelope) {
      env_.emplace(k);
    } else {
      sparse_ = std::make_shared<const SparseCholesky>(k);
    }
  }
  void solve(Block& b) const {
    if (env_) {
      env_->solve_in_place(std::span<std::vector<double>>(b));
    } else {
      sparse_->solve_in_place(std::span<std::vector<double>>(b));
    }
  }
  const std::shared_ptr<const SparseCholesky>& sparse() const { return sparse_; }

 private:
  std::optional<EnvelopeCholesky> env_;
  std::shared_ptr<const SparseCholesky> sparse_;
};

// M-orthonormal basis with its images under K and M kept alongside.
struct Basis {
  Block v, kv, mv;
  std::size_t size() const { return v.size(); }
};

// Orthogonalizes w against the basis (two classical Gram-Schmidt passes in
// the M inner product) and appends it unless it was already in the span.
bool extend(Basis& b, const AssembledSystem& s, std::vector<double> w) {
  const std::size_t n = w.size();
  std::vector<double> mw(n);
  s.mass.multiply(w, mw);
  const double before = std::sqrt(std::max(0.0, simd::dot(w, mw)));
  if (!(before > 0.0)) return false;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> c(b.size());
    for (std::size_t a = 0; a < b.size(); ++a) c[a] = simd::dot(b.mv[a], w);
    for (std::size_t a = 0; a < b.size(); ++a) simd::axpy(-c[a], b.v[a], w);
    s.mass.multiply(w, mw);
  }
  const double after = std::sqrt(std::max(0.0, simd::dot(w, mw)));
  if (!(after > 1e-10 * before)) return false;
  const double scale = 1.0 / after;
  for (auto& x : w) x *= scale;
  for (auto& x : mw) x *= scale;
  std::vector<double> kw(n);
  s.stiffness.multiply(w, kw);
  b.v.push_back(std::move(w));
  b.mv.push_back(std::move(mw));
  b.kv.push_back(std::move(kw));
  return true;
}

// Columns 0..cols−1 of V·Y.
Block combine(const Block& v, const Eigen::MatrixXd& y, std::size_t cols) {
  Block out(cols, std::vector<double>(v.front().size(), 0.0));
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < v.size(); ++r) {
      simd::axpy(y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), v[r], out[c]);
    }
  }
  return out;
}

}  // namespace

EigenPairs smallest_eigenpairs(const AssembledSystem& s, int k, const EigenOptions& opt,
                               std::span<const std::vector<double>> warm_start,
                               std::shared_ptr<const SparseCholesky> preconditioner) {
  const std::size_t n = s.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("smallest_eigenpairs: k must lie in [1, " + std::to_string(n) + "]");
  }
  const auto ku = static_cast<std::size_t>(k);
  const std::size_t p = std::min(n, ku + static_cast<std::size_t>(std::max(0, opt.extra_vectors)));
  const std::size_t max_basis = std::min(n, std::max(3 * p, static_cast<std::size_t>(opt.max_basis)));
  const Factor chol(s.stiffness, opt.factorization, std::move(preconditioner));

  Basis basis;
  {
    Block x;
    for (const auto& w : warm_start) {
      if (x.size() == p) break;
      if (w.size() == n) x.push_back(w);
    }
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const bool cold = x.empty();
    while (x.size() < p) {
      std::vector<double> r(n);
      for (auto& v : r) v = u(rng);
      x.push_back(std::move(r));
    }
    // One inverse-iteration step damps the high modes of random vectors.
    if (cold) {
      Block mx(x.size(), std::vector<double>(n));
      for (std::size_t a = 0; a < x.size(); ++a) s.mass.multiply(x[a], mx[a]);
      chol.solve(mx);
      x = std::move(mx);
    }
    for (auto& w : x) extend(basis, s, std::move(w));
  }

  EigenPairs out;
  out.values.assign(ku, 0.0);
  out.relative_residuals.assign(ku, 0.0);
  Block x;
  Eigen::MatrixXd h, g;
  std::size_t known = 0;  // leading block of h, g already filled
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const std::size_t m = basis.size();
    h.conservativeResize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    g.conservativeResize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t b = known; b < m; ++b) {
      for (std::size_t a = 0; a <= b; ++a) {
        const double hab = 0.5 * (simd::dot(basis.v[a], basis.kv[b]) + simd::dot(basis.v[b], basis.kv[a]));
        const double gab = 0.5 * (simd::dot(basis.v[a], basis.mv[b]) + simd::dot(basis.v[b], basis.mv[a]));
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        h(ia, ib) = h(ib, ia) = hab;
        g(ia, ib) = g(ib, ia) = gab;
      }
    }
    known = m;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(h, g);
    if (ges.info() != Eigen::Success) throw std::runtime_error("smallest_eigenpairs: Rayleigh-Ritz step failed");
    const Eigen::VectorXd theta = ges.eigenvalues();
    const Eigen::MatrixXd y = ges.eigenvectors();
    const std::size_t q = std::min(p, m);

    x = combine(basis.v, y, q);
    const Block kx = combine(basis.kv, y, q);
    const Block mx = combine(basis.mv, y, q);
    Block residual(q);
    bool done = q >= ku;
    for (std::size_t a = 0; a < q; ++a) {
      const double lam = theta(static_cast<Eigen::Index>(a));
      residual[a] = kx[a];
      simd::axpy(-lam, mx[a], residual[a]);
      const double rel = norm(residual[a]) / norm(kx[a]);
      if (a < ku) {
        out.values[a] = lam;
        out.relative_residuals[a] = rel;
        if (!(rel <= opt.tolerance)) done = false;
      }
    }
    out.iterations = it;
    if (done) {
      out.status = SolveStatus::converged;
      break;
    }
    if (it == opt.max_iterations) break;

    // Thick restart onto the current Ritz block.
    if (m + q > max_basis) {
      basis.v = x;
      basis.kv = kx;
      basis.mv = mx;
      known = 0;
    }
    // Shift-invert correction K⁻¹ r for every unconverged or guard vector.
    Block corr;
    for (std::size_t a = 0; a < q; ++a) {
      if (a < ku && out.relative_residuals[a] <= opt.tolerance) continue;
      corr.push_back(std::move(residual[a]));
    }
    chol.solve(corr);
    const std::size_t before = basis.size();
    for (auto& w : corr) extend(basis, s, std::move(w));
    if (basis.size() == before) break;  // no new direction: stagnated
  }

  // Report residuals from fresh products, not the recurrences.
  std::vector<double> kv(n), mv(n);
  for (std::size_t a = 0; a < std::min(ku, x.size()); ++a) {
    s.stiffness.multiply(x[a], kv);
    s.mass.multiply(x[a], mv);
    const double kn = norm(kv);
    simd::axpy(-out.values[a], mv, kv);
    out.relative_residuals[a] = norm(kv) / kn;
  }
  out.vectors.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(ku, x.size())));
  out.subspace = std::move(x);
  out.factor = chol.sparse();
  return out;
}

std::vector<double> extrapolation_exponents(const VertexTriangle& t) {
  constexpr double kMaxExponent = 12.0;
  std::vector<double> out;
  for (double e = 2.0; e <= kMaxExponent; e += 2.0) out.push_back(e);
  for (int c = 0; c < 3; ++c) {
    const Point a = t.v[static_cast<std::size_t>(c)];
    const Point u = t.v[static_cast<std::size_t>((c + 1) % 3)] - a;
    const Point w = t.v[static_cast<std::size_t>((c + 2) % 3)] - a;
    const double angle = std::atan2(std::abs(u.x * w.y - u.y * w.x), u.x * w.x + u.y * w.y);
    // Corners of at most a right angle leave only tiny singular terms.
    if (angle <= 0.5 * kPi) continue;
    const double s = 2.0 * kPi / angle;
    for (int m = 1; m * s <= kMaxExponent; ++m) {
      for (double e = m * s; e <= kMaxExponent; e += 2.0) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double p, double q) { return q - p < 1e-9; }), out.end());
  return out;
}

std::size_t envelope_factor_bytes(int level) {
  // Interior row j has N − 1 − j unknowns; each reaches back one lattice row.
  const std::size_t n = std::size_t{1} << level;
  std::size_t entries = 0;
  for (std::size_t j = 1; j + 2 <= n; ++j) entries += (n - 1 - j) * (n - j + 1);
  return entries * sizeof(double);
}

std::size_t solve_bytes_estimate(int level, const EigenOptions& opt) {
  const std::size_t side = std::size_t{1} << level;
  const std::size_t n = (side - 1) * (side - 2) / 2;
  const double logn = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  // Minimum-degree fill on these lattices stays below 3·n·log₂n entries.
  const auto factor = opt.factorization == Factorization::envelope
                          ? envelope_factor_bytes(level)
                          : static_cast<std::size_t>(3.0 * static_cast<double>(n) * logn) * (sizeof(double) + sizeof(int));
  const std::size_t vectors = 3 * static_cast<std::size_t>(std::max(opt.max_basis, 8)) + 16;
  return factor + vectors * n * sizeof(double);
}

LevelEigenvalues discrete_eigenvalues(const VertexTriangle& t, int level, int count, const EigenOptions& opt) {
  const AssembledSystem s = assemble(build_mesh(t, level));
  const EigenPairs ep = smallest_eigenpairs(s, count, opt);
  if (!ep.converged()) throw std::runtime_error("discrete_eigenvalues: iteration cap reached");
  return {level, ep.values, ep.iterations};
}

GapEstimator::GapEstimator(const VertexTriangle& t, GapOptions opt, int eigen_count)
    : triangle_(t), opt_(opt), count_(eigen_count) {
  if (eigen_count < 2) throw std::invalid_argument("GapEstimator needs at least two eigenvalues");
  if (opt_.table_levels < 2) throw std::invalid_argument("GapEstimator needs at least two table levels");
  if (!(t.area() >= 1e-14)) throw std::invalid_argument("degenerate triangle (area < 1e-14)");
  cap_ = std::min(is_thin(t) ? opt_.thin_max_level : opt_.max_level, kMaxMeshLevel);
  while (cap_ > 2 && solve_bytes_estimate(cap_, opt_.eigen) > opt_.memory_budget_bytes) --cap_;
  estimate_.diameter = diameter(t);
  exponents_ = extrapolation_exponents(t);
}

void GapEstimator::warm_start_from(const GapEstimator& other) {
  hints_ = other.subspaces_;
  factors_ = other.factors_;
}

void GapEstimator::add_level(int level) {
  const Mesh mesh = build_mesh(triangle_, level);
  const AssembledSystem s = assemble(mesh);
  const auto lu = static_cast<std::size_t>(level);
  std::vector<std::vector<double>> warm;
  if (lu < hints_.size() && !hints_[lu].empty() && hints_[lu].front().size() == s.size()) {
    warm = hints_[lu];
  } else if (!levels_.empty() && levels_.back().level == level - 1) {
    const auto& prev = subspaces_[lu - 1];
    warm.reserve(prev.size());
    for (const auto& v : prev) warm.push_back(prolongate_interior(v, level - 1));
  }
  const int k = std::min<int>(count_, static_cast<int>(s.size()));
  std::shared_ptr<const SparseCholesky> pre = lu < factors_.size() ? factors_[lu] : nullptr;
  EigenPairs ep = smallest_eigenpairs(s, k, opt_.eigen, warm, pre);
  if (factors_.size() <= lu) factors_.resize(lu + 1);
  factors_[lu] = std::move(ep.factor);
  if (!ep.converged()) all_converged_ = false;
  LevelEigenvalues lv{level, ep.values, ep.iterations};
  lv.values.resize(static_cast<std::size_t>(count_), std::numeric_limits<double>::quiet_NaN());
  levels_.push_back(std::move(lv));
  if (subspaces_.size() <= lu) subspaces_.resize(lu + 1);
  subspaces_[lu] = std::move(ep.subspace);
}

void GapEstimator::update_estimate() {
  const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(opt_.table_levels), levels_.size());
  const std::size_t first = levels_.size() - used;
  const int depth = std::min<int>(static_cast<int>(used) - 1, std::max(1, opt_.max_depth));
  const auto cnt = static_cast<std::size_t>(count_);

  Spectrum sp;
  sp.coarse_level = levels_[first].level;
  sp.fine_level = levels_.back().level;
  sp.richardson_depth = depth;
  sp.levels = levels_;
  sp.eigenvalues.resize(cnt);
  sp.error_bounds.resize(cnt);
  sp.observed_rates.assign(cnt, std::numeric_limits<double>::quiet_NaN());

  bool rate_ok = true;
  for (std::size_t e = 0; e < cnt; ++e) {
    // table[d][i]: depth-d extrapolation ending at level first + i.
    std::vector<std::vector<double>> table(static_cast<std::size_t>(depth) + 1);
    for (std::size_t i = first; i < levels_.size(); ++i) table[0].push_back(levels_[i].values[e]);
    for (int d = 1; d <= depth; ++d) {
      const double f = std::exp2(exponents_[static_cast<std::size_t>(d) - 1]) - 1.0;
      const auto& prev = table[static_cast<std::size_t>(d) - 1];
      for (std::size_t i = 1; i < prev.size(); ++i) {
        table[static_cast<std::size_t>(d)].push_back(prev[i] + (prev[i] - prev[i - 1]) / f);
      }
    }
    const auto& top = table[static_cast<std::size_t>(depth)];
    const double best = top.back();
    sp.eigenvalues[e] = best;
    if (depth == 0) {
      sp.error_bounds[e] = std::numeric_limits<double>::infinity();
    } else {
      // Size of the last eliminated term, and the level-to-level change of
      // the best value scaled by the next power; the larger one is kept so a
      // term with a vanishing coefficient cannot hide the remaining error.
      double est = std::abs(best - table[static_cast<std::size_t>(depth) - 1].back());
      if (top.size() >= 2) {
        const double next = std::exp2(exponents_[static_cast<std::size_t>(depth)]) - 1.0;
        est = std::max(est, std::abs(best - top[top.size() - 2]) / next);
      }
      sp.error_bounds[e] = opt_.safety_factor * est;
    }
    if (levels_.size() >= 3) {
      const std::size_t l = levels_.size() - 1;
      const double d1 = levels_[l - 2].values[e] - levels_[l - 1].values[e];
      const double d2 = levels_[l - 1].values[e] - levels_[l].values[e];
      const double rate = d1 / d2;
      sp.observed_rates[e] = rate;
      // Only the pair the gap depends on gates acceptance; differences at
      // round-off level carry no rate information.
      const bool resolved = std::abs(d2) > 1e-12 * std::abs(levels_[l].values[e]);
      if (e < 2 && resolved && !(rate >= opt_.min_rate && rate <= opt_.max_rate)) rate_ok = false;
    }
  }

  GapEstimate g;
  g.diameter = estimate_.diameter;
  const double d2 = g.diameter * g.diameter;
  g.lambda1 = sp.eigenvalues[0];
  g.lambda2 = sp.eigenvalues[1];
  g.err_lambda1 = sp.error_bounds[0];
  g.err_lambda2 = sp.error_bounds[1];
  g.xi = d2 * (g.lambda2 - g.lambda1);
  g.err = d2 * (g.err_lambda1 + g.err_lambda2);
  g.solver_converged = all_converged_;
  g.rate_ok = rate_ok;
  g.spectrum = std::move(sp);
  estimate_ = std::move(g);
}

const GapEstimate& GapEstimator::solve_to(double target) {
  if (!(target > 0.0)) throw std::invalid_argument("accuracy target must be positive");
  if (levels_.empty()) {
    const int fine = std::min(std::max(opt_.start_level, 3), cap_);
    const int coarse = std::max(2, fine - opt_.table_levels + 1);
    for (int l = coarse; l <= fine; ++l) add_level(l);
    update_estimate();
  }
  const auto good = [&] {
    return estimate_.err <= target && estimate_.rate_ok && estimate_.solver_converged;
  };
  while (!good() && levels_.back().level < cap_) {
    add_level(levels_.back().level + 1);
    update_estimate();
  }
  estimate_.accuracy_met = good();
  if (!estimate_.accuracy_met) {
    if (!estimate_.solver_converged) {
      estimate_.note = "eigensolver iteration cap reached";
    } else if (!estimate_.rate_ok) {
      estimate_.note = "observed convergence rate outside the asymptotic window";
    } else {
      estimate_.note = "accuracy not met at level cap";
    }
  } else {
    estimate_.note.clear();
  }
  return estimate_;
}

GapEstimate gap_with_error(const VertexTriangle& t, double target, const GapOptions& opt) {
  GapEstimator est(t, opt);
  return est.solve_to(target);
}

GapEstimate gap_with_error(const Triangle& t, double target, const GapOptions& opt) {
  return gap_with_error(t.vertices(), target, opt);
}

Spectrum compute_spectrum(const VertexTriangle& t, int count, double target, const GapOptions& opt) {
  GapEstimator est(t, opt, count);
  // The estimator's stopping rule looks at λ₁, λ₂; keep refining for the rest.
  const GapEstimate* g = &est.solve_to(target);
  const auto worst = [&] {
    return *std::max_element(g->spectrum.error_bounds.begin(), g->spectrum.error_bounds.end());
  };
  while (!(worst() <= target) && g->spectrum.fine_level < est.level_cap()) {
    const double tighter = std::min(target, g->err * 0.5);
    if (!(tighter > 0.0)) break;
    g = &est.solve_to(tighter);
  }
  return g->spectrum;
}

}  // namespace gapcert
