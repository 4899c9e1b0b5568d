#include "vdrive/simd/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace vdrive::simd {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace scalar

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  Isa isa;
};

constexpr KernelTable kScalarTable{scalar::dot, scalar::axpy, scalar::sum, Isa::kScalar};
#if defined(VDRIVE_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::dot, avx2::axpy, avx2::sum, Isa::kAvx2};
#endif

bool cpu_has_avx2() {
#if defined(VDRIVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &kScalarTable;
    case Isa::kAvx2:
#if defined(VDRIVE_HAVE_AVX2)
      return cpu_has_avx2() ? &kAvx2Table : nullptr;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* forced = std::getenv("VDRIVE_ISA")) {
    if (std::string(forced) == "scalar") return &kScalarTable;
  }
  if (const KernelTable* t = table_for(Isa::kAvx2)) return t;
  return &kScalarTable;
}

const KernelTable*& current() {
  static const KernelTable* table = initial_table();
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

Isa active_isa() { return current()->isa; }

void set_active_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) {
    throw std::invalid_argument("kernel variant not available: " + std::string(to_string(isa)));
  }
  current() = t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current()->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current()->axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return current()->sum(x.data(), x.size()); }

}  // namespace vdrive::simd
