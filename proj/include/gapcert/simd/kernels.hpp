#pragma once

// Dense vector kernels used by the envelope Cholesky factorization and the
// eigensolver. Every kernel has a scalar reference implementation; vector
// variants are compiled in separate translation units with their own target
// flags and chosen once at runtime from CPUID.

#include <cstddef>
#include <span>
#include <string_view>

namespace gapcert::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best ISA this CPU supports among those compiled in.
Isa detected_isa();

/// ISA currently used by the dispatching entry points below. Defaults to
/// detected_isa(), or to scalar when GAPCERT_SIMD=scalar is set.
Isa active_isa();

/// Overrides the dispatch target. Throws std::invalid_argument if the CPU
/// (or the build) does not support `isa`. Not thread-safe against concurrent
/// kernel calls; call it at startup or in tests.
void set_active_isa(Isa isa);

bool isa_available(Isa isa);

/// Σ a[i]·b[i]; a and b must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// y[i] += alpha·x[i].
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Σ x[i]² (squared Euclidean norm).
double sum_squares(std::span<const double> x);

/// Per-ISA kernel table. Exposed so equivalence tests can call every
/// variant directly regardless of the active one.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
};

const KernelTable& kernels_for(Isa isa);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace scalar

#if defined(GAPCERT_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(GAPCERT_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace neon
#endif

}  // namespace gapcert::simd
