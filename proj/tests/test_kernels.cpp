#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sinn/kernels.hpp"

using sinn::simd::Complex;
using sinn::simd::KernelTable;

namespace {

std::vector<double> randvec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol * std::max(1.0, std::abs(a[i])));
}

// Sizes straddle the 4-wide vector width and its tails.
const std::size_t kSizes[] = {1, 3, 4, 5, 7, 8, 13, 31, 64, 67};

}  // namespace

TEST_CASE("active kernel table is one of the known tables") {
  const auto& k = sinn::simd::kernels();
  const bool scalar = &k == &sinn::simd::scalar_kernels();
  const bool avx = sinn::simd::avx2_kernels() && &k == sinn::simd::avx2_kernels();
  CHECK((scalar || avx));
  CHECK_FALSE(k.name.empty());
}

TEST_CASE("scalar kernels match plain loops") {
  const auto& s = sinn::simd::scalar_kernels();
  const double a[] = {1, 2, 3}, b[] = {4, -5, 6};
  CHECK(s.dot(a, b, 3) == 12.0);
  double y[] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  // 2x3 layer on a batch of one.
  const double w[] = {1, 0, 2, 0, 1, -1}, bias[] = {0.5, -0.5}, x[] = {1, 2, 3};
  double out[2];
  s.dense_forward(w, bias, x, out, 2, 3, 1);
  CHECK(out[0] == 7.5);
  CHECK(out[1] == -1.5);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* v = sinn::simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 table unavailable on this build or CPU; equivalence not exercised");
    return;
  }
  const auto& s = sinn::simd::scalar_kernels();
  std::mt19937_64 rng(17);
  for (std::size_t n : kSizes) {
    const auto a = randvec(n, rng), b = randvec(n, rng);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v->dot(a.data(), b.data(), n)) < 1e-13);

    auto y1 = randvec(n, rng);
    auto y2 = y1;
    s.axpy(0.37, a.data(), y1.data(), n);
    v->axpy(0.37, a.data(), y2.data(), n);
    close(y1, y2, 1e-15);

    std::vector<Complex> c1(n), c2(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
      c1[i] = Complex(a[i], b[i]);
      f[i] = Complex(b[i], -a[i]);
    }
    c2 = c1;
    s.scale_complex(a.data(), c1.data(), n);
    v->scale_complex(a.data(), c2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c1[i] - c2[i]) < 1e-15);
    s.multiply_complex(f.data(), c1.data(), n);
    v->multiply_complex(f.data(), c2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c1[i] - c2[i]) < 1e-14);

    auto p1 = randvec(n, rng), m1 = randvec(n, rng), q1 = randvec(n, rng);
    for (auto& q : q1) q = std::abs(q);
    auto p2 = p1, m2 = m1, q2 = q1;
    s.adam_update(p1.data(), a.data(), m1.data(), q1.data(), n, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    v->adam_update(p2.data(), a.data(), m2.data(), q2.data(), n, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    close(p1, p2, 1e-14);
    close(m1, m2, 1e-15);
    close(q1, q2, 1e-15);
  }

  for (std::size_t rows : {1, 5, 8, 64}) {
    for (std::size_t cols : {2, 3, 9, 64}) {
      for (std::size_t batch : {1, 4, 7}) {
        const auto w = randvec(rows * cols, rng), bias = randvec(rows, rng);
        const auto x = randvec(batch * cols, rng), g = randvec(batch * rows, rng);
        std::vector<double> y1(batch * rows), y2(batch * rows);
        s.dense_forward(w.data(), bias.data(), x.data(), y1.data(), rows, cols, batch);
        v->dense_forward(w.data(), bias.data(), x.data(), y2.data(), rows, cols, batch);
        close(y1, y2, 1e-13);
        s.dense_forward(w.data(), nullptr, x.data(), y1.data(), rows, cols, batch);
        v->dense_forward(w.data(), nullptr, x.data(), y2.data(), rows, cols, batch);
        close(y1, y2, 1e-13);

        std::vector<double> gx1(batch * cols), gx2(batch * cols);
        s.dense_transpose(w.data(), g.data(), gx1.data(), rows, cols, batch);
        v->dense_transpose(w.data(), g.data(), gx2.data(), rows, cols, batch);
        close(gx1, gx2, 1e-13);

        auto gw1 = randvec(rows * cols, rng);
        auto gw2 = gw1;
        s.outer_accumulate(g.data(), x.data(), gw1.data(), rows, cols, batch);
        v->outer_accumulate(g.data(), x.data(), gw2.data(), rows, cols, batch);
        close(gw1, gw2, 1e-13);
      }
    }
  }
}
