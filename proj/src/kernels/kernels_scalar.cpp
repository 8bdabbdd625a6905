#include <cmath>

#include "sinn/kernels.hpp"

namespace sinn::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void dense_forward(const double* w, const double* bias, const double* x, double* y,
                   std::size_t rows, std::size_t cols, std::size_t batch) {
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * cols;
    double* ys = y + s * rows;
    for (std::size_t o = 0; o < rows; ++o) {
      ys[o] = (bias ? bias[o] : 0.0) + dot(w + o * cols, xs, cols);
    }
  }
}

void dense_transpose(const double* w, const double* g, double* gx, std::size_t rows,
                     std::size_t cols, std::size_t batch) {
  for (std::size_t s = 0; s < batch; ++s) {
    double* gxs = gx + s * cols;
    for (std::size_t i = 0; i < cols; ++i) gxs[i] = 0.0;
    const double* gs = g + s * rows;
    for (std::size_t o = 0; o < rows; ++o) axpy(gs[o], w + o * cols, gxs, cols);
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
  for (std::size_t i = 0; i < n; ++i) data[i] *= factor[i];
}

void multiply_complex(const Complex* factor, Complex* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // written out so both tables use the textbook formula (no NaN recovery)
    const double ar = data[i].real(), ai = data[i].imag();
    const double br = factor[i].real(), bi = factor[i].imag();
    data[i] = Complex(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void adam_update(double* params, const double* grads, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",      dot,           axpy,        dense_forward, dense_transpose,
      outer_accumulate, scale_complex, multiply_complex, adam_update,
  };
  return table;
}

}  // namespace sinn::simd
