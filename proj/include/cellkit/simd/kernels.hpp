#pragma once

#include <cstddef>

namespace cellkit::simd {

enum class Isa { Scalar, Avx2 };

/// Hot loops of the discretization and the linear algebra.  Each ISA provides
/// the same table; results agree to rounding (the AVX2 table uses FMA).
struct Kernels {
  Isa isa;
  const char* name;

  /// Interior electrolyte faces between cells k and k+1, k = 0..n-2.
  /// i = -dphi/dx + kappa_d * dc/dx / cmean, N = -dc/dx + peclet * i.
  void (*electrolyte_faces)(const double* c, const double* phi, std::size_t n, double inv_dx, double kappa_d,
                            double peclet, double* n_out, double* i_out);

  /// out[k] = -scale * (flux[k+1] - flux[k]) for k = 0..n_cells-1.
  void (*divergence)(const double* flux, std::size_t n_cells, double scale, double* out);

  /// Sum of (x_k / w_k)^2.
  double (*weighted_sq_sum)(const double* x, const double* w, std::size_t n);

  /// w_k = atol_k + rtol * |y_k|.
  void (*error_weights)(const double* y, const double* atol, double rtol, std::size_t n, double* w);

  /// y += a * x.
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();

/// nullptr when the library was built without AVX2 support.
const Kernels* avx2_kernels();

bool cpu_supports_avx2();

/// Kernel table chosen once per process: AVX2 when the CPU supports it,
/// unless the environment variable CELLKIT_SIMD is set to "scalar".
const Kernels& active();

}  // namespace cellkit::simd
