#include "gapcert/sparse_cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace gapcert {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Pattern {
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  bool operator==(const Pattern&) const = default;
};

std::uint64_t pattern_hash(const CsrMatrix& a) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(a.rows);
  for (const auto p : a.row_ptr) mix(p);
  for (const auto c : a.col) mix(static_cast<std::uint64_t>(c));
  return h;
}

struct CachedOrdering {
  Pattern pattern;
  std::vector<int> perm;  // original index → factor index
};

std::mutex g_cache_mutex;
std::multimap<std::uint64_t, std::shared_ptr<const CachedOrdering>> g_cache;

std::shared_ptr<const CachedOrdering> ordering_for(const CsrMatrix& a) {
  const std::uint64_t key = pattern_hash(a);
  {
    const std::lock_guard lock(g_cache_mutex);
    const auto [lo, hi] = g_cache.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
      if (it->second->pattern.row_ptr == a.row_ptr && it->second->pattern.col == a.col) return it->second;
    }
  }
  // Pattern-only matrix for the ordering.
  const auto n = static_cast<int>(a.rows);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.col.size());
  for (int r = 0; r < n; ++r) {
    for (std::size_t k = a.row_ptr[static_cast<std::size_t>(r)]; k < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      t.emplace_back(r, a.col[k], 1.0);
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  Eigen::AMDOrdering<int> amd;
  amd(m, pinv);
  auto entry = std::make_shared<CachedOrdering>();
  entry->pattern = {a.row_ptr, a.col};
  entry->perm.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) entry->perm[static_cast<std::size_t>(pinv.indices()(i))] = i;
  const std::lock_guard lock(g_cache_mutex);
  g_cache.emplace(key, entry);
  return entry;
}

}  // namespace

struct SparseCholesky::Impl {
  std::shared_ptr<const CachedOrdering> ord;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>> llt;
};

SparseCholesky::SparseCholesky(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
  impl_->ord = ordering_for(a);
  const auto& p = impl_->ord->perm;
  const auto n = static_cast<int>(a.rows);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.col.size() / 2 + a.rows);
  for (int r = 0; r < n; ++r) {
    const int pr = p[static_cast<std::size_t>(r)];
    for (std::size_t k = a.row_ptr[static_cast<std::size_t>(r)]; k < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      const int pc = p[static_cast<std::size_t>(a.col[k])];
      if (pr >= pc) t.emplace_back(pr, pc, a.val[k]);
    }
  }
  SpMat lower(n, n);
  lower.setFromTriplets(t.begin(), t.end());
  impl_->llt.compute(lower);
  if (impl_->llt.info() != Eigen::Success) throw std::domain_error("SparseCholesky: matrix is not positive definite");
  const SpMat& l = impl_->llt.matrixL().nestedExpression();
  if (!l.isCompressed()) throw std::logic_error("SparseCholesky: unexpected factor layout");
  for (int j = 0; j < n; ++j) {
    if (l.innerIndexPtr()[l.outerIndexPtr()[j]] != j) throw std::logic_error("SparseCholesky: unexpected factor layout");
  }
}

SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

std::size_t SparseCholesky::size() const { return impl_->ord->perm.size(); }

std::size_t SparseCholesky::factor_nonzeros() const {
  return static_cast<std::size_t>(impl_->llt.matrixL().nestedExpression().nonZeros());
}

void SparseCholesky::solve_in_place(std::span<double> b) const {
  std::vector<double> v(b.begin(), b.end());
  solve_in_place(std::span<std::vector<double>>(&v, 1));
  std::copy(v.begin(), v.end(), b.begin());
}

void SparseCholesky::solve_in_place(std::span<std::vector<double>> block) const {
  const auto& p = impl_->ord->perm;
  const std::size_t n = p.size();
  const std::size_t r = block.size();
  if (r == 0) return;
  for (const auto& v : block) {
    if (v.size() != n) throw std::invalid_argument("SparseCholesky: right-hand side has the wrong size");
  }
  // Right-hand sides interleaved so each factor entry is read once per block.
  std::vector<double> w(n * r);
  for (std::size_t c = 0; c < r; ++c) {
    for (std::size_t i = 0; i < n; ++i) w[static_cast<std::size_t>(p[i]) * r + c] = block[c][i];
  }
  const SpMat& l = impl_->llt.matrixL().nestedExpression();
  const int* outer = l.outerIndexPtr();
  const int* inner = l.innerIndexPtr();
  const double* val = l.valuePtr();
  // Columns of L hold the diagonal first, then rows below it in order.
  for (std::size_t j = 0; j < n; ++j) {
    const auto k0 = static_cast<std::size_t>(outer[j]);
    const auto k1 = static_cast<std::size_t>(outer[j + 1]);
    double* yj = &w[j * r];
    const double d = 1.0 / val[k0];
    for (std::size_t c = 0; c < r; ++c) yj[c] *= d;
    for (std::size_t k = k0 + 1; k < k1; ++k) {
      double* yi = &w[static_cast<std::size_t>(inner[k]) * r];
      const double lij = val[k];
      for (std::size_t c = 0; c < r; ++c) yi[c] -= lij * yj[c];
    }
  }
  for (std::size_t j = n; j-- > 0;) {
    const auto k0 = static_cast<std::size_t>(outer[j]);
    const auto k1 = static_cast<std::size_t>(outer[j + 1]);
    double* xj = &w[j * r];
    for (std::size_t k = k0 + 1; k < k1; ++k) {
      const double* xi = &w[static_cast<std::size_t>(inner[k]) * r];
      const double lij = val[k];
      for (std::size_t c = 0; c < r; ++c) xj[c] -= lij * xi[c];
    }
    const double d = 1.0 / val[k0];
    for (std::size_t c = 0; c < r; ++c) xj[c] *= d;
  }
  for (std::size_t c = 0; c < r; ++c) {
    for (std::size_t i = 0; i < n; ++i) block[c][i] = w[static_cast<std::size_t>(p[i]) * r + c];
  }
}

std::size_t cached_orderings() {
  const std::lock_guard lock(g_cache_mutex);
  return g_cache.size();
}

}  // namespace gapcert
