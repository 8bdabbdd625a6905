#pragma once
// Data-parallel inner loops used by the network and the spectral operators.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is chosen once per process from CPUID;
// setting SINN_FORCE_SCALAR=1 in the environment pins the scalar table.
// The two tables agree to rounding (summation order differs), so a training
// trajectory is bit-reproducible only within one table.

#include <complex>
#include <cstddef>
#include <string_view>

namespace sinn::simd {

using Complex = std::complex<double>;

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // Y[s][o] = bias[o] + sum_i W[o][i] * X[s][i]
  // W is rows x cols row-major, X is batch x cols, Y is batch x rows.
  // bias may be null.
  void (*dense_forward)(const double* weights, const double* bias, const double* x, double* y,
                        std::size_t rows, std::size_t cols, std::size_t batch);

  // GX[s][i] = sum_o G[s][o] * W[o][i]
  void (*dense_transpose)(const double* weights, const double* g, double* gx, std::size_t rows,
                          std::size_t cols, std::size_t batch);

  // GW[o][i] += sum_s G[s][o] * X[s][i]
  void (*outer_accumulate)(const double* g, const double* x, double* gw, std::size_t rows,
                           std::size_t cols, std::size_t batch);

  // data[i] *= factor[i]  (real factor)
  void (*scale_complex)(const double* factor, Complex* data, std::size_t n);

  // data[i] *= factor[i]  (complex factor)
  void (*multiply_complex)(const Complex* factor, Complex* data, std::size_t n);

  // Adam moment update and parameter step. bias_correction1/2 are
  // (1 - beta1^t) and (1 - beta2^t) for the current step t.
  void (*adam_update)(double* params, const double* grads, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double bias_correction1,
                      double bias_correction2);
};

const KernelTable& scalar_kernels();

// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// Active table for this process.
const KernelTable& kernels();

}  // namespace sinn::simd
