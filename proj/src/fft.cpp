#include "sinn/fft.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "sinn/errors.hpp"

namespace sinn::fft {

Plan::Plan(int n) : n_(n) {
  if (n < 1) throw InvalidGridError("fft length must be positive");
  int rest = n;
  for (int p : {4, 2, 3, 5}) {
    while (rest % p == 0) {
      factors_.push_back(p);
      rest /= p;
    }
  }
  for (int p = 7; p * p <= rest; p += 2) {
    while (rest % p == 0) {
      factors_.push_back(p);
      rest /= p;
    }
  }
  if (rest > 1) factors_.push_back(rest);

  twiddles_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(j) / n;
    twiddles_[static_cast<std::size_t>(j)] = Complex(std::cos(phase), std::sin(phase));
  }
}

void Plan::forward(std::span<Complex> data) const { execute(data, false); }
void Plan::inverse(std::span<Complex> data) const { execute(data, true); }

void Plan::execute(std::span<Complex> data, bool inverse) const {
  if (static_cast<int>(data.size()) != n_) throw ShapeError("fft buffer length mismatch");
  if (n_ == 1) return;
  std::vector<Complex> input(data.begin(), data.end());
  work(data.data(), input.data(), 1, 1, 0, n_, inverse);
}

// Decimation in time. `span` is the length of the sub-transform handled at
// this stage; `fstride` the stride through the twiddle table for it.
void Plan::work(Complex* out, const Complex* in, int fstride, int in_stride, std::size_t stage,
                int span, bool inverse) const {
  const int p = factors_[stage];
  const int m = span / p;

  if (m == 1) {
    for (int j = 0; j < p; ++j) out[j] = in[j * fstride * in_stride];
  } else {
    for (int j = 0; j < p; ++j) {
      work(out + j * m, in + j * fstride * in_stride, fstride * p, in_stride, stage + 1, m,
           inverse);
    }
  }

  auto twiddle = [&](long idx) {
    const Complex w = twiddles_[static_cast<std::size_t>(idx % n_)];
    return inverse ? std::conj(w) : w;
  };

  if (p == 2) {
    for (int u = 0; u < m; ++u) {
      const Complex t = out[u + m] * twiddle(static_cast<long>(u) * fstride);
      out[u + m] = out[u] - t;
      out[u] += t;
    }
    return;
  }

  // generic radix-p butterfly
  Complex small[16];
  std::vector<Complex> large;
  Complex* scratch = small;
  if (p > 16) {
    large.resize(static_cast<std::size_t>(p));
    scratch = large.data();
  }
  for (int u = 0; u < m; ++u) {
    for (int q = 0; q < p; ++q) scratch[q] = out[u + q * m];
    for (int q1 = 0; q1 < p; ++q1) {
      const long k = u + static_cast<long>(q1) * m;
      Complex acc = scratch[0];
      for (int q = 1; q < p; ++q) {
        acc += scratch[q] * twiddle(static_cast<long>(q) * k * fstride);
      }
      out[k] = acc;
    }
  }
}

const Plan& plan_for(int n) {
  thread_local std::unordered_map<int, Plan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Plan(n)).first;
  return it->second;
}

void transform_nd(std::span<Complex> data, int dims, int n, bool inverse) {
  std::size_t total = 1;
  for (int d = 0; d < dims; ++d) total *= static_cast<std::size_t>(n);
  if (data.size() != total) throw ShapeError("nd fft buffer size mismatch");
  const Plan& plan = plan_for(n);
  std::vector<Complex> line(static_cast<std::size_t>(n));

  std::size_t stride = 1;
  for (int axis = dims - 1; axis >= 0; --axis) {
    const std::size_t block = stride * static_cast<std::size_t>(n);
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        Complex* base = data.data() + outer + inner;
        for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = base[j * stride];
        if (inverse) {
          plan.inverse(line);
        } else {
          plan.forward(line);
        }
        for (int j = 0; j < n; ++j) base[j * stride] = line[static_cast<std::size_t>(j)];
      }
    }
    stride = block;
  }
}

}  // namespace sinn::fft
