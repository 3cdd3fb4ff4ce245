#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gapcert/fem.hpp"

namespace gapcert {

/// Sparse Cholesky factor of a symmetric positive definite CSR matrix under
/// an approximate-minimum-degree ordering. The ordering depends only on the
/// sparsity pattern and is cached process-wide, so refactoring a matrix with
/// a previously seen pattern (same mesh level, any triangle) skips it.
class SparseCholesky {
 public:
  /// Throws std::domain_error if the matrix is not positive definite.
  explicit SparseCholesky(const CsrMatrix& a);
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  std::size_t size() const;
  std::size_t factor_nonzeros() const;

  /// Overwrites b with A⁻¹ b.
  void solve_in_place(std::span<double> b) const;
  void solve_in_place(std::span<std::vector<double>> block) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Number of distinct sparsity patterns whose ordering is cached.
std::size_t cached_orderings();

}  // namespace gapcert
