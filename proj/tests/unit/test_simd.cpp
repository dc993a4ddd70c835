#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cellkit/simd/kernels.hpp"

using namespace cellkit::simd;

namespace {

std::vector<double> random_vec(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (avx2_kernels() == nullptr || !cpu_supports_avx2()) GTEST_SKIP() << "AVX2 not available";
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Simd, ActiveTableIsValid) {
  const auto& k = active();
  EXPECT_NE(k.name, nullptr);
  EXPECT_NE(k.axpy, nullptr);
  EXPECT_EQ(scalar_kernels().isa, Isa::Scalar);
}

TEST_P(SimdEquivalence, ElectrolyteFaces) {
  const std::size_t n = GetParam();
  const auto c = random_vec(n, 0.5, 1.5, 1), phi = random_vec(n, -1, 1, 2);
  std::vector<double> ns(n), is(n), nv(n), iv(n);
  scalar_kernels().electrolyte_faces(c.data(), phi.data(), n, 37.0, 0.3, 1.7, ns.data(), is.data());
  avx2_kernels()->electrolyte_faces(c.data(), phi.data(), n, 37.0, 0.3, 1.7, nv.data(), iv.data());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    EXPECT_LT(rel(nv[k], ns[k]), 1e-13) << k;
    EXPECT_LT(rel(iv[k], is[k]), 1e-13) << k;
  }
}

TEST_P(SimdEquivalence, DivergenceAxpyNorms) {
  const std::size_t n = GetParam();
  const auto f = random_vec(n + 1, -2, 2, 3);
  std::vector<double> a(n), b(n);
  scalar_kernels().divergence(f.data(), n, 12.5, a.data());
  avx2_kernels()->divergence(f.data(), n, 12.5, b.data());
  for (std::size_t k = 0; k < n; ++k) EXPECT_LT(rel(b[k], a[k]), 1e-14);

  auto y1 = random_vec(n, -1, 1, 4), y2 = y1;
  const auto x = random_vec(n, -1, 1, 5);
  scalar_kernels().axpy(0.37, x.data(), y1.data(), n);
  avx2_kernels()->axpy(0.37, x.data(), y2.data(), n);
  for (std::size_t k = 0; k < n; ++k) EXPECT_LT(rel(y2[k], y1[k]), 1e-15);

  const auto w = random_vec(n, 0.1, 1, 6);
  const double s1 = scalar_kernels().weighted_sq_sum(x.data(), w.data(), n);
  const double s2 = avx2_kernels()->weighted_sq_sum(x.data(), w.data(), n);
  EXPECT_LT(rel(s2, s1), 1e-13);

  std::vector<double> w1(n), w2(n);
  scalar_kernels().error_weights(x.data(), w.data(), 1e-6, n, w1.data());
  avx2_kernels()->error_weights(x.data(), w.data(), 1e-6, n, w2.data());
  for (std::size_t k = 0; k < n; ++k) EXPECT_LT(rel(w2[k], w1[k]), 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Lengths, SimdEquivalence, ::testing::Values(1, 2, 3, 4, 5, 7, 8, 9, 16, 31, 100, 257));
