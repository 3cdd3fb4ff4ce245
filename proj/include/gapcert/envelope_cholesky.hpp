#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gapcert/fem.hpp"

namespace gapcert {

/// Cholesky factor A = L Lᵀ stored by rows over the envelope (profile) of
/// the lower triangle: row i keeps columns first(i) .. i. Fill-in stays
/// inside the envelope, so the row-by-row lattice order of the mesh gives a
/// profile of roughly one lattice row per matrix row.
class EnvelopeCholesky {
 public:
  /// Throws std::domain_error if a non-positive pivot appears.
  explicit EnvelopeCholesky(const CsrMatrix& a);

  std::size_t size() const { return first_.size(); }
  std::size_t envelope_entries() const { return values_.size(); }

  /// Overwrites b with A⁻¹ b.
  void solve_in_place(std::span<double> b) const;

  /// Same for several right-hand sides at once; each factor row is read
  /// once per block instead of once per vector.
  void solve_in_place(std::span<std::vector<double>> block) const;

 private:
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + offset_[i], i - first_[i] + 1};
  }

  std::vector<std::size_t> first_;
  std::vector<std::size_t> offset_;
  std::vector<double> values_;
};

}  // namespace gapcert
