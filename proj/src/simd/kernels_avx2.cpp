// Compiled with -mavx2 -mfma.  Keep this file free of inline library templates
// so no AVX2 code can leak into translation units built for the baseline ISA.
#include "cellkit/simd/kernels.hpp"

#if defined(CELLKIT_HAVE_AVX2)
#include <immintrin.h>

namespace cellkit::simd {

namespace {

void electrolyte_faces(const double* c, const double* phi, std::size_t n, double inv_dx, double kappa_d,
                       double peclet, double* n_out, double* i_out) {
  const std::size_t m = n > 0 ? n - 1 : 0;
  const __m256d vdx = _mm256_set1_pd(inv_dx);
  const __m256d vk = _mm256_set1_pd(kappa_d);
  const __m256d vpe = _mm256_set1_pd(peclet);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const __m256d c0 = _mm256_loadu_pd(c + k);
    const __m256d c1 = _mm256_loadu_pd(c + k + 1);
    const __m256d p0 = _mm256_loadu_pd(phi + k);
    const __m256d p1 = _mm256_loadu_pd(phi + k + 1);
    const __m256d gc = _mm256_mul_pd(_mm256_sub_pd(c1, c0), vdx);
    const __m256d gp = _mm256_mul_pd(_mm256_sub_pd(p1, p0), vdx);
    const __m256d cm = _mm256_mul_pd(half, _mm256_add_pd(c0, c1));
    const __m256d i = _mm256_sub_pd(_mm256_div_pd(_mm256_mul_pd(vk, gc), cm), gp);
    _mm256_storeu_pd(i_out + k, i);
    _mm256_storeu_pd(n_out + k, _mm256_fmsub_pd(vpe, i, gc));
  }
  for (; k < m; ++k) {
    const double gc = (c[k + 1] - c[k]) * inv_dx;
    const double gp = (phi[k + 1] - phi[k]) * inv_dx;
    const double cm = 0.5 * (c[k] + c[k + 1]);
    const double i = kappa_d * gc / cm - gp;
    i_out[k] = i;
    n_out[k] = peclet * i - gc;
  }
}

void divergence(const double* flux, std::size_t n_cells, double scale, double* out) {
  const __m256d ms = _mm256_set1_pd(-scale);
  std::size_t k = 0;
  for (; k + 4 <= n_cells; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(flux + k + 1), _mm256_loadu_pd(flux + k));
    _mm256_storeu_pd(out + k, _mm256_mul_pd(ms, d));
  }
  for (; k < n_cells; ++k) out[k] = -scale * (flux[k + 1] - flux[k]);
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double weighted_sq_sum(const double* x, const double* w, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d q0 = _mm256_div_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(w + k));
    const __m256d q1 = _mm256_div_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(w + k + 4));
    acc0 = _mm256_fmadd_pd(q0, q0, acc0);
    acc1 = _mm256_fmadd_pd(q1, q1, acc1);
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(w + k));
    acc0 = _mm256_fmadd_pd(q, q, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    const double q = x[k] / w[k];
    s += q * q;
  }
  return s;
}

void error_weights(const double* y, const double* atol, double rtol, std::size_t n, double* w) {
  const __m256d vr = _mm256_set1_pd(rtol);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d ay = _mm256_andnot_pd(sign, _mm256_loadu_pd(y + k));
    _mm256_storeu_pd(w + k, _mm256_fmadd_pd(vr, ay, _mm256_loadu_pd(atol + k)));
  }
  for (; k < n; ++k) w[k] = atol[k] + rtol * (y[k] < 0.0 ? -y[k] : y[k]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
    _mm256_storeu_pd(y + k + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4)));
  }
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  for (; k < n; ++k) y[k] += a * x[k];
}

const Kernels kAvx2{Isa::Avx2, "avx2", electrolyte_faces, divergence, weighted_sq_sum, error_weights, axpy};

}  // namespace

const Kernels* avx2_kernels() { return &kAvx2; }

}  // namespace cellkit::simd

#else

namespace cellkit::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace cellkit::simd

#endif
