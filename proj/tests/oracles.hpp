#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library's transform or loss code.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

// Direct O(N^2 d) evaluation of the unnormalized forward DFT on a full grid,
// row-major with the last axis fastest and wavenumbers in FFT order.
inline std::vector<Complex> naive_dft(const std::vector<double>& f, int dims, int n) {
  std::size_t total = 1;
  for (int a = 0; a < dims; ++a) total *= static_cast<std::size_t>(n);
  std::vector<Complex> out(total);
  auto unpack = [&](std::size_t idx, int* c) {
    for (int a = dims - 1; a >= 0; --a) {
      c[a] = static_cast<int>(idx % static_cast<std::size_t>(n));
      idx /= static_cast<std::size_t>(n);
    }
  };
  int kk[3], jj[3];
  for (std::size_t k = 0; k < total; ++k) {
    unpack(k, kk);
    Complex s = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      unpack(j, jj);
      long phase = 0;
      for (int a = 0; a < dims; ++a) phase += static_cast<long>(kk[a]) * jj[a];
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(phase % n) / n;
      s += f[j] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

// Central finite difference of a scalar function.
inline double central_difference(const std::function<double(double)>& g, double x, double h) {
  return (g(x + h) - g(x - h)) / (2.0 * h);
}

// Fourth-order five-point stencil.
inline double five_point_difference(const std::function<double(double)>& g, double x, double h) {
  return (8.0 * (g(x + h) - g(x - h)) - (g(x + 2.0 * h) - g(x - 2.0 * h))) / (12.0 * h);
}

// Relative difference with an absolute floor so tiny derivatives do not
// blow the ratio up.
inline double rel_diff(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// The WL loss written as (1/M) exp(-eps W L)^T L with an explicit
// strictly-lower-triangular W over ||k||_1-sorted points. `l1` holds the
// shell of each point; `losses` the per-point residual.
inline double wl_matrix_form(const std::vector<int>& l1, const std::vector<double>& losses,
                             double eps, int max_l1) {
  const std::size_t n = losses.size();
  // Shell sums S_i = sum of points on shell i; exponent for a point on
  // shell i is sum over points on shells j < i.
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double expo = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      if (l1[q] < l1[p]) expo += losses[q];  // W[p][q] = 1
    }
    total += std::exp(-eps * expo) * losses[p];
  }
  return total / static_cast<double>(max_l1);
}

}  // namespace oracle
