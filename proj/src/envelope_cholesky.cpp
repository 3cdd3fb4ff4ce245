#include "gapcert/envelope_cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gapcert/simd/kernels.hpp"

namespace gapcert {

EnvelopeCholesky::EnvelopeCholesky(const CsrMatrix& a) {
  const std::size_t n = a.rows;
  first_.resize(n);
  offset_.resize(n + 1);
  offset_[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t f = i;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      f = std::min(f, static_cast<std::size_t>(a.col[k]));
    }
    first_[i] = f;
    offset_[i + 1] = offset_[i] + (i - f + 1);
  }
  values_.assign(offset_[n], 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const auto c = static_cast<std::size_t>(a.col[k]);
      if (c <= i) values_[offset_[i] + (c - first_[i])] = a.val[k];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double* li = values_.data() + offset_[i];
    const std::size_t fi = first_[i];
    for (std::size_t k = fi; k < i; ++k) {
      const double* lk = values_.data() + offset_[k];
      const std::size_t lo = std::max(fi, first_[k]);
      const std::size_t len = k - lo;
      const double s = simd::dot({li + (lo - fi), len}, {lk + (lo - first_[k]), len});
      li[k - fi] = (li[k - fi] - s) / lk[k - first_[k]];
    }
    const std::size_t len = i - fi;
    const double d = li[len] - simd::sum_squares({li, len});
    if (!(d > 0.0)) {
      throw std::domain_error("EnvelopeCholesky: matrix not positive definite at row " + std::to_string(i));
    }
    li[len] = std::sqrt(d);
  }
}

void EnvelopeCholesky::solve_in_place(std::span<double> b) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = row(i);
    const std::size_t len = r.size() - 1;
    b[i] = (b[i] - simd::dot(r.first(len), b.subspan(first_[i], len))) / r[len];
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto r = row(i);
    const std::size_t len = r.size() - 1;
    b[i] /= r[len];
    simd::axpy(-b[i], r.first(len), b.subspan(first_[i], len));
  }
}

void EnvelopeCholesky::solve_in_place(std::span<std::vector<double>> block) const {
  const std::size_t n = size();
  for (const auto& b : block) {
    if (b.size() != n) throw std::invalid_argument("EnvelopeCholesky: right-hand side has wrong size");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = row(i);
    const std::size_t len = r.size() - 1;
    for (auto& b : block) {
      b[i] = (b[i] - simd::dot(r.first(len), std::span<const double>(b).subspan(first_[i], len))) / r[len];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto r = row(i);
    const std::size_t len = r.size() - 1;
    for (auto& b : block) {
      b[i] /= r[len];
      simd::axpy(-b[i], r.first(len), std::span<double>(b).subspan(first_[i], len));
    }
  }
}

}  // namespace gapcert
