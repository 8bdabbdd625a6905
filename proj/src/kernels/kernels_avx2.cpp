// Compiled with -mavx2 -mfma. Only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>

#include "sinn/kernels.hpp"

namespace sinn::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void dense_forward(const double* w, const double* bias, const double* x, double* y,
                   std::size_t rows, std::size_t cols, std::size_t batch) {
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * cols;
    double* ys = y + s * rows;
    std::size_t o = 0;
    // four output rows share each load of the input vector
    for (; o + 4 <= rows; o += 4) {
      const double* w0 = w + o * cols;
      const double* w1 = w0 + cols;
      const double* w2 = w1 + cols;
      const double* w3 = w2 + cols;
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      std::size_t i = 0;
      for (; i + 4 <= cols; i += 4) {
        const __m256d xv = _mm256_loadu_pd(xs + i);
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + i), xv, a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + i), xv, a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + i), xv, a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + i), xv, a3);
      }
      double r0 = hsum(a0), r1 = hsum(a1), r2 = hsum(a2), r3 = hsum(a3);
      for (; i < cols; ++i) {
        r0 += w0[i] * xs[i];
        r1 += w1[i] * xs[i];
        r2 += w2[i] * xs[i];
        r3 += w3[i] * xs[i];
      }
      ys[o] = (bias ? bias[o] : 0.0) + r0;
      ys[o + 1] = (bias ? bias[o + 1] : 0.0) + r1;
      ys[o + 2] = (bias ? bias[o + 2] : 0.0) + r2;
      ys[o + 3] = (bias ? bias[o + 3] : 0.0) + r3;
    }
    for (; o < rows; ++o) ys[o] = (bias ? bias[o] : 0.0) + dot(w + o * cols, xs, cols);
  }
}

void dense_transpose(const double* w, const double* g, double* gx, std::size_t rows,
                     std::size_t cols, std::size_t batch) {
  for (std::size_t s = 0; s < batch; ++s) {
    double* gxs = gx + s * cols;
    const double* gs = g + s * rows;
    std::size_t i = 0;
    for (; i + 4 <= cols; i += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t o = 0; o < rows; ++o) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(gs[o]), _mm256_loadu_pd(w + o * cols + i), acc);
      }
      _mm256_storeu_pd(gxs + i, acc);
    }
    for (; i < cols; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < rows; ++o) acc += gs[o] * w[o * cols + i];
      gxs[i] = acc;
    }
  }
}

void outer_accumulate(const double* g, const double* x, double* gw, std::size_t rows,
                      std::size_t cols, std::size_t batch) {
  for (std::size_t s = 0; s < batch; ++s) {
    const double* gs = g + s * rows;
    const double* xs = x + s * cols;
    for (std::size_t o = 0; o < rows; ++o) axpy(gs[o], xs, gw + o * cols, cols);
  }
}

void scale_complex(const double* factor, Complex* data, std::size_t n) {
  double* d = reinterpret_cast<double*>(data);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // [f0 f0 f1 f1]
    const __m128d f = _mm_loadu_pd(factor + i);
    const __m256d ff = _mm256_permute4x64_pd(_mm256_castpd128_pd256(f), 0b01010000);
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i), ff));
  }
  for (; i < n; ++i) data[i] *= factor[i];
}

void multiply_complex(const Complex* factor, Complex* data, std::size_t n) {
  double* d = reinterpret_cast<double*>(data);
  const double* f = reinterpret_cast<const double*>(factor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(d + 2 * i);  // ar ai ...
    const __m256d b = _mm256_loadu_pd(f + 2 * i);  // br bi ...
    const __m256d b_re = _mm256_movedup_pd(b);      // br br
    const __m256d b_im = _mm256_permute_pd(b, 0b1111);  // bi bi
    const __m256d a_sw = _mm256_permute_pd(a, 0b0101);  // ai ar
    // (ar*br - ai*bi, ai*br + ar*bi)
    const __m256d r = _mm256_addsub_pd(_mm256_mul_pd(a, b_re), _mm256_mul_pd(a_sw, b_im));
    _mm256_storeu_pd(d + 2 * i, r);
  }
  for (; i < n; ++i) {
    const double ar = data[i].real(), ai = data[i].imag();
    const double br = factor[i].real(), bi = factor[i].imag();
    data[i] = Complex(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void adam_update(double* params, const double* grads, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1), vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vb2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grads + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(vb1c, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(vb2c, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, vbc1);
    const __m256d v_hat = _mm256_div_pd(vi, vbc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
    _mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{
      "avx2",           dot,           axpy,             dense_forward, dense_transpose,
      outer_accumulate, scale_complex, multiply_complex, adam_update,
  };
  return table;
}

}  // namespace sinn::simd
