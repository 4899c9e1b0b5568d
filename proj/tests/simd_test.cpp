#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vdrive/rng.hpp"
#include "vdrive/simd/kernels.hpp"

using namespace vdrive;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Reassociation changes rounding; bound it by n·eps·Σ|terms|.
double reassoc_bound(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * (b.empty() ? 1.0 : b[i]));
  return 4.0 * static_cast<double>(a.size() + 1) * 2.2e-16 * s + 1e-300;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  Rng rng(3);
  for (std::size_t n : {0u, 1u, 3u, 7u, 64u, 101u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double dot = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      sum += a[i];
    }
    CHECK(simd::scalar::dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(simd::scalar::sum(a.data(), n) == doctest::Approx(sum).epsilon(1e-12));
    auto y = b;
    simd::scalar::axpy(0.5, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.5 * a[i]);
  }
}

#if defined(VDRIVE_HAVE_AVX2)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!simd::isa_available(simd::Isa::kAvx2)) {
    MESSAGE("CPU lacks AVX2/FMA; skipping");
    return;
  }
  Rng rng(11);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    CHECK(std::abs(simd::avx2::dot(a.data(), b.data(), n) - simd::scalar::dot(a.data(), b.data(), n)) <=
          reassoc_bound(a, b));
    CHECK(std::abs(simd::avx2::sum(a.data(), n) - simd::scalar::sum(a.data(), n)) <= reassoc_bound(a, {}));
    auto y1 = b;
    auto y2 = b;
    simd::avx2::axpy(-1.25, a.data(), y1.data(), n);
    simd::scalar::axpy(-1.25, a.data(), y2.data(), n);
    // FMA rounds once instead of twice.
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 4e-16 * (std::abs(y2[i]) + 3.0));
  }
}
#endif

TEST_CASE("dispatch can be forced to the scalar path") {
  const simd::Isa before = simd::active_isa();
  simd::set_active_isa(simd::Isa::kScalar);
  CHECK(simd::active_isa() == simd::Isa::kScalar);
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(simd::dot(a, a) == 55.0);
  CHECK(simd::sum(a) == 15.0);
  simd::set_active_isa(before);
  CHECK(simd::active_isa() == before);
}

TEST_CASE("requesting an unavailable isa throws") {
  if (!simd::isa_available(simd::Isa::kAvx2)) {
    CHECK_THROWS_AS(simd::set_active_isa(simd::Isa::kAvx2), std::invalid_argument);
  }
  CHECK(simd::isa_available(simd::Isa::kScalar));
}
