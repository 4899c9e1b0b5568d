#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner loops used by the nn layers. Each kernel has a portable scalar
// reference and, on x86-64 builds, an AVX2/FMA variant. The active variant is
// chosen once from CPUID; VDRIVE_ISA=scalar in the environment forces the
// reference path.
namespace vdrive::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

/// True if this build contains the variant and the CPU can run it.
bool isa_available(Isa isa);

Isa active_isa();

/// Switches the dispatch target. Throws std::invalid_argument if unavailable.
void set_active_isa(Isa isa);

/// Σ a[i]·b[i]
double dot(std::span<const double> a, std::span<const double> b);

/// y[i] += alpha·x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Σ x[i]
double sum(std::span<const double> x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

#if defined(VDRIVE_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace vdrive::simd
