#pragma once
// Diagonal spectral operators on a full n^dims grid, shared by the residual
// losses and the reference steppers. Internal to the library.

#include <cmath>
#include <span>
#include <vector>

#include "sinn/fft.hpp"
#include "sinn/spectral.hpp"

namespace sinn::detail {

using spectral::Complex;
using spectral::Wavevector;

inline std::size_t grid_points(int dims, int n) {
  std::size_t s = 1;
  for (int a = 0; a < dims; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

// Diagonal spectral factors on the full grid, built once per loss call.
struct Operators {
  int dims;
  int n;
  std::size_t size;
  std::vector<double> k2;
  std::vector<double> filter;
  std::vector<std::vector<Complex>> d1;  // per axis, (i k_a) with Nyquist zeroed
  std::vector<Wavevector> k;

  Operators(int dims_, int n_, spectral::Dealias kind)
      : dims(dims_), n(n_), size(grid_points(dims_, n_)), k2(size), filter(size),
        d1(static_cast<std::size_t>(dims_), std::vector<Complex>(size)), k(size) {
    const spectral::FrequencyGrid grid(dims, n, false);
    const int third = n / 3;
    for (std::size_t i = 0; i < size; ++i) {
      k[i] = grid.wavevector(i);
      double s = 0.0;
      bool outside = false;
      for (int a = 0; a < dims; ++a) {
        const int ka = k[i][static_cast<std::size_t>(a)];
        s += static_cast<double>(ka) * ka;
        outside = outside || std::abs(ka) > third;
        d1[static_cast<std::size_t>(a)][i] = spectral::derivative_symbol(ka, 1, n);
      }
      k2[i] = s;
      switch (kind) {
        case spectral::Dealias::smoothing:
          filter[i] = spectral::smoothing_factor(std::sqrt(s) / (n / 2.0));
          break;
        case spectral::Dealias::two_thirds: filter[i] = outside ? 0.0 : 1.0; break;
        case spectral::Dealias::none: filter[i] = 1.0; break;
      }
    }
  }

  // u = Re F^-1[U] (with 1/N^d)
  std::vector<double> to_physical(std::vector<Complex> buf) const {
    fft::transform_nd(buf, dims, n, true);
    std::vector<double> out(size);
    const double scale = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = buf[i].real() * scale;
    return out;
  }

  // Unnormalized forward transform times `scale`.
  std::vector<Complex> to_spectral(std::span<const double> f, double scale = 1.0) const {
    std::vector<Complex> buf(size);
    for (std::size_t i = 0; i < size; ++i) buf[i] = Complex(f[i], 0.0);
    fft::transform_nd(buf, dims, n, false);
    if (scale != 1.0) {
      for (auto& c : buf) c *= scale;
    }
    return buf;
  }

  // Re sum_k G(k) exp(ikx), no 1/N^d.
  std::vector<double> to_physical_unnormalized(std::vector<Complex> buf) const {
    fft::transform_nd(buf, dims, n, true);
    std::vector<double> out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = buf[i].real();
    return out;
  }

  void project(std::span<Complex> u, std::span<Complex> v) const {
    for (std::size_t i = 0; i < size; ++i) {
      if (k2[i] == 0.0) continue;
      const double kx = k[i][0];
      const double ky = k[i][1];
      const Complex s = (kx * u[i] + ky * v[i]) / k2[i];
      u[i] -= kx * s;
      v[i] -= ky * s;
    }
  }
};

}  // namespace sinn::detail
