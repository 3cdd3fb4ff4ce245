#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gapcert/simd/kernels.hpp"

namespace gapcert::simd {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::sum_squares};
#if defined(GAPCERT_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::sum_squares};
#endif
#if defined(GAPCERT_HAVE_NEON)
constexpr KernelTable kNeonTable{&neon::dot, &neon::axpy, &neon::sum_squares};
#endif

Isa initial_isa() {
  if (const char* env = std::getenv("GAPCERT_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return detected_isa();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernels_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active_isa_slot() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(GAPCERT_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(GAPCERT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return active_isa_slot().load(std::memory_order_relaxed); }

const KernelTable& kernels_for(Isa isa) {
  switch (isa) {
#if defined(GAPCERT_HAVE_AVX2)
    case Isa::avx2: return kAvx2Table;
#endif
#if defined(GAPCERT_HAVE_NEON)
    case Isa::neon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("SIMD target not available: " + std::string(isa_name(isa)));
  }
  active_table().store(&kernels_for(isa), std::memory_order_relaxed);
  active_isa_slot().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_table().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active_table().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) {
  return active_table().load(std::memory_order_relaxed)->sum_squares(x.data(), x.size());
}

}  // namespace gapcert::simd
