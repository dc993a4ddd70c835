#include <cmath>
#include <cstdlib>
#include <string_view>

#include "cellkit/simd/kernels.hpp"

namespace cellkit::simd {

namespace {

void electrolyte_faces(const double* c, const double* phi, std::size_t n, double inv_dx, double kappa_d,
                       double peclet, double* n_out, double* i_out) {
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double gc = (c[k + 1] - c[k]) * inv_dx;
    const double gp = (phi[k + 1] - phi[k]) * inv_dx;
    const double cm = 0.5 * (c[k] + c[k + 1]);
    const double i = -gp + kappa_d * gc / cm;
    i_out[k] = i;
    n_out[k] = -gc + peclet * i;
  }
}

void divergence(const double* flux, std::size_t n_cells, double scale, double* out) {
  for (std::size_t k = 0; k < n_cells; ++k) out[k] = -scale * (flux[k + 1] - flux[k]);
}

double weighted_sq_sum(const double* x, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = x[k] / w[k];
    s += q * q;
  }
  return s;
}

void error_weights(const double* y, const double* atol, double rtol, std::size_t n, double* w) {
  for (std::size_t k = 0; k < n; ++k) w[k] = atol[k] + rtol * std::abs(y[k]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

const Kernels kScalar{Isa::Scalar, "scalar", electrolyte_faces, divergence, weighted_sq_sum, error_weights, axpy};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active() {
  static const Kernels& chosen = [] () -> const Kernels& {
    const char* env = std::getenv("CELLKIT_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return kScalar;
    const Kernels* v = avx2_kernels();
    if (v != nullptr && cpu_supports_avx2()) return *v;
    return kScalar;
  }();
  return chosen;
}

}  // namespace cellkit::simd
