#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sinn/errors.hpp"
#include "sinn/fft.hpp"
#include "sinn/spectral.hpp"

using namespace sinn;
using namespace sinn::spectral;

namespace {

PhysicalField random_field(int dims, int n, int comps, std::uint64_t seed) {
  auto f = PhysicalField::zeros(dims, n, comps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (auto& v : f.samples) v = nd(rng);
  return f;
}

PhysicalField sample(int n, double (*fn)(double)) {
  auto f = PhysicalField::zeros(1, n);
  for (int j = 0; j < n; ++j) f.samples[static_cast<std::size_t>(j)] = fn(grid_point(j, n));
  return f;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

SpectralField random_real_spectrum(int dims, int n, int comps, std::uint64_t seed) {
  return forward_transform(random_field(dims, n, comps, seed), false);
}

}  // namespace

TEST_CASE("grid sizes must be even and at least 4") {
  CHECK_THROWS_AS(validate_grid_size(7), InvalidGridError);
  CHECK_THROWS_AS(validate_grid_size(2), InvalidGridError);
  CHECK_NOTHROW(validate_grid_size(4));
  CHECK_THROWS_AS(forward_transform(PhysicalField::zeros(1, 7)), InvalidGridError);
}

TEST_CASE("FFT agrees with direct summation for mixed-radix lengths") {
  for (int n : {4, 6, 10, 12, 14, 100}) {
    const auto f = random_field(1, n, 1, static_cast<std::uint64_t>(n));
    const auto ref = oracle::naive_dft(f.samples, 1, n);
    std::vector<fft::Complex> data(f.samples.begin(), f.samples.end());
    fft::plan_for(n).forward(data);
    double err = 0.0, scale = 0.0;
    for (int k = 0; k < n; ++k) {
      err = std::max(err, std::abs(data[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]));
      scale = std::max(scale, std::abs(ref[static_cast<std::size_t>(k)]));
    }
    CHECK(err <= 1e-12 * scale);
  }
  const int n = 6;
  const auto f = random_field(2, n, 1, 11);
  const auto ref = oracle::naive_dft(f.samples, 2, n);
  const auto F = forward_transform(f, false);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(F.coeffs[i] - ref[i]) < 1e-11);
}

TEST_CASE("constant and single sine forward transforms") {
  auto one = PhysicalField::zeros(1, 8);
  for (auto& v : one.samples) v = 1.0;
  const auto F = forward_transform(one, false);
  CHECK(std::abs(F.coeffs[0] - Complex(8.0, 0.0)) < 1e-14);
  for (std::size_t i = 1; i < F.coeffs.size(); ++i) CHECK(std::abs(F.coeffs[i]) < 1e-14);

  const auto s = forward_transform(sample(8, [](double x) { return std::sin(2 * x); }), true);
  CHECK(s.grid.half_spectrum());
  CHECK(std::abs(s.coeffs[2] - Complex(0.0, -4.0)) < 1e-13);
  const auto full = to_full_spectrum(s);
  CHECK(std::abs(full.coeffs[full.grid.index_of({-2, 0, 0})] - Complex(0.0, 4.0)) < 1e-13);
  for (std::size_t i = 0; i < full.coeffs.size(); ++i) {
    const int k = full.grid.wavevector(i)[0];
    if (k != 2 && k != -2) CHECK(std::abs(full.coeffs[i]) < 1e-13);
  }
}

TEST_CASE("inverse transform of elementary spectra") {
  const int n = 16;
  auto F = SpectralField::zeros(FrequencyGrid(1, n, true));
  F.coeffs[0] = static_cast<double>(n);
  for (double v : inverse_transform(F).samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  auto S = SpectralField::zeros(FrequencyGrid(1, n, true));
  S.coeffs[1] = Complex(0.0, -n / 2.0);
  const auto f = inverse_transform(S);
  for (int j = 0; j < n; ++j) CHECK(std::abs(f.samples[static_cast<std::size_t>(j)] - std::sin(grid_point(j, n))) < 1e-14);

  auto bad = SpectralField::zeros(FrequencyGrid(1, n, true));
  bad.coeffs[3] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(inverse_transform(bad), NumericError);
}

TEST_CASE("round trip and Parseval in 1 to 3 dimensions") {
  for (int dims = 1; dims <= 3; ++dims) {
    for (int n : {8, 16, 64}) {
      if (dims == 3 && n == 64) continue;
      const auto f = random_field(dims, n, 1, static_cast<std::uint64_t>(dims * 100 + n));
      for (bool half : {true, false}) {
        const auto F = forward_transform(f, half);
        const auto g = inverse_transform(F);
        CHECK(max_abs_diff(f.samples, g.samples) <= 1e-12 * norm2(f.samples));
      }
      const auto F = forward_transform(f, false);
      double energy = 0.0, spec = 0.0;
      for (double v : f.samples) energy += v * v;
      for (const auto& c : F.coeffs) spec += std::norm(c);
      spec /= static_cast<double>(f.samples.size());
      CHECK(std::abs(energy - spec) <= 1e-12 * energy);
    }
  }
}

TEST_CASE("half spectrum reconstructs Hermitian symmetry") {
  const auto F = to_full_spectrum(forward_transform(random_field(2, 8, 1, 5), true));
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    const auto k = F.grid.wavevector(i);
    const Wavevector m{-k[0] == 4 ? -4 : -k[0], -k[1] == 4 ? -4 : -k[1], 0};
    CHECK(std::abs(F.coeffs[F.grid.index_of(m)] - std::conj(F.coeffs[i])) < 1e-12);
  }
  const auto round = to_half_spectrum(F);
  const auto direct = forward_transform(random_field(2, 8, 1, 5), true);
  for (std::size_t i = 0; i < round.coeffs.size(); ++i) CHECK(std::abs(round.coeffs[i] - direct.coeffs[i]) < 1e-12);
}

TEST_CASE("spectral derivatives of sine sums") {
  const int n = 16;
  const auto d1 = inverse_transform(spectral_derivative(forward_transform(sample(n, [](double x) { return std::sin(2 * x); })), 0, 1));
  const auto d2 = inverse_transform(spectral_derivative(forward_transform(sample(n, [](double x) { return std::sin(3 * x); })), 0, 2));
  for (int j = 0; j < n; ++j) {
    const double x = grid_point(j, n);
    CHECK(std::abs(d1.samples[static_cast<std::size_t>(j)] - 2 * std::cos(2 * x)) < 1e-12);
    CHECK(std::abs(d2.samples[static_cast<std::size_t>(j)] + 9 * std::sin(3 * x)) < 1e-12);
  }
  // Mixed sum, third derivative, relative to the analytic result.
  auto f = sample(n, [](double x) { return std::sin(x) + 0.5 * std::cos(4 * x) - 0.25 * std::sin(7 * x); });
  const auto d3 = inverse_transform(spectral_derivative(forward_transform(f), 0, 3));
  double err = 0.0, ref = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = grid_point(j, n);
    const double exact = -std::cos(x) + 32.0 * std::sin(4 * x) + 0.25 * 343.0 * std::cos(7 * x);
    err = std::max(err, std::abs(d3.samples[static_cast<std::size_t>(j)] - exact));
    ref = std::max(ref, std::abs(exact));
  }
  CHECK(err <= 1e-10 * ref);
}

TEST_CASE("derivative orders compose and odd orders drop the Nyquist mode") {
  const auto F = random_real_spectrum(2, 8, 1, 9);
  const auto twice = spectral_derivative(spectral_derivative(F, 1, 2), 1, 2);
  const auto once = spectral_derivative(F, 1, 4);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    CHECK(std::abs(twice.coeffs[i] - once.coeffs[i]) <= 1e-12 * std::max(1.0, std::abs(once.coeffs[i])));
  }
  CHECK(derivative_symbol(-4, 1, 8) == Complex(0.0, 0.0));
  CHECK(derivative_symbol(-4, 3, 8) == Complex(0.0, 0.0));
  CHECK(std::abs(derivative_symbol(-4, 2, 8) - Complex(-16.0, 0.0)) < 1e-14);
  CHECK(std::abs(derivative_symbol(3, 1, 8) - Complex(0.0, 3.0)) < 1e-14);
  // Even orders keep the Hermitian pairing.
  const auto even = spectral_derivative(F, 0, 2);
  const auto back = inverse_transform(even);
  const auto again = forward_transform(back, false);
  for (std::size_t i = 0; i < even.coeffs.size(); ++i) CHECK(std::abs(again.coeffs[i] - even.coeffs[i]) < 1e-10);
}

TEST_CASE("two-thirds rule") {
  auto F = SpectralField::zeros(FrequencyGrid(1, 12, false));
  F.coeffs[F.grid.index_of({5, 0, 0})] = 1.0;
  F.coeffs[F.grid.index_of({4, 0, 0})] = 2.0;
  F.coeffs[F.grid.index_of({-5, 0, 0})] = 3.0;
  const auto G = dealias_two_thirds(F);
  CHECK(G.coeffs[G.grid.index_of({5, 0, 0})] == Complex(0.0));
  CHECK(G.coeffs[G.grid.index_of({-5, 0, 0})] == Complex(0.0));
  CHECK(G.coeffs[G.grid.index_of({4, 0, 0})] == Complex(2.0));
  const auto H = dealias_two_thirds(G);
  CHECK(H.coeffs == G.coeffs);

  const auto R = random_real_spectrum(2, 12, 1, 3);
  const auto once = dealias_two_thirds(R);
  CHECK(dealias_two_thirds(once).coeffs == once.coeffs);
  for (std::size_t i = 0; i < R.coeffs.size(); ++i) {
    const auto k = R.grid.wavevector(i);
    const bool kept = std::abs(k[0]) <= 4 && std::abs(k[1]) <= 4;
    CHECK(once.coeffs[i] == (kept ? R.coeffs[i] : Complex(0.0)));
  }
}

TEST_CASE("Fourier smoothing filter values") {
  CHECK(smoothing_factor(0.0) == 1.0);
  CHECK(smoothing_factor(1.0) == doctest::Approx(std::exp(-36.0)).epsilon(1e-12));
  CHECK(smoothing_factor(1.0) == doctest::Approx(2.3195228302435696e-16).epsilon(1e-9));
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double v = smoothing_factor(i / 100.0);
    CHECK(v <= prev);
    prev = v;
  }
  // |k| = N/2 along an axis is rho = 1.
  auto F = SpectralField::zeros(FrequencyGrid(1, 16, false));
  for (auto& c : F.coeffs) c = 1.0;
  const auto G = dealias_smoothing(F);
  CHECK(std::abs(G.coeffs[G.grid.index_of({-8, 0, 0})] - std::exp(-36.0)) < 1e-30);
  CHECK(G.coeffs[0] == Complex(1.0));
}

TEST_CASE("dealiasing commutes with differentiation and keeps real fields real") {
  const auto F = random_real_spectrum(2, 12, 1, 21);
  for (auto kind : {Dealias::two_thirds, Dealias::smoothing}) {
    const auto a = dealias(spectral_derivative(F, 0, 3), kind);
    const auto b = spectral_derivative(dealias(F, kind), 0, 3);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) CHECK(std::abs(a.coeffs[i] - b.coeffs[i]) < 1e-10);
    const auto real = forward_transform(inverse_transform(dealias(F, kind)), false);
    const auto d = dealias(F, kind);
    for (std::size_t i = 0; i < d.coeffs.size(); ++i) CHECK(std::abs(real.coeffs[i] - d.coeffs[i]) < 1e-10);
  }
}

TEST_CASE("Leray projection") {
  const FrequencyGrid grid(2, 8, false);
  auto U = SpectralField::zeros(grid, 2);
  const auto k10 = grid.index_of({1, 0, 0});
  U.component(0)[k10] = 1.0;
  auto P = leray_project(U);
  CHECK(std::abs(P.component(0)[k10]) < 1e-15);
  CHECK(std::abs(P.component(1)[k10]) < 1e-15);

  auto V = SpectralField::zeros(grid, 2);
  V.component(1)[k10] = 1.0;
  P = leray_project(V);
  CHECK(std::abs(P.component(0)[k10]) < 1e-15);
  CHECK(P.component(1)[k10] == Complex(1.0));

  const auto R = random_real_spectrum(2, 16, 2, 8);
  const auto once = leray_project(R);
  const auto twice = leray_project(once);
  double norm = 0.0;
  for (const auto& c : once.coeffs) norm += std::norm(c);
  norm = std::sqrt(norm);
  CHECK(max_divergence(once) <= 1e-12 * norm);
  for (std::size_t i = 0; i < once.coeffs.size(); ++i) CHECK(std::abs(twice.coeffs[i] - once.coeffs[i]) <= 1e-12 * norm);
  // The mean flow is untouched.
  CHECK(once.component(0)[0] == R.component(0)[0]);
  CHECK(once.component(1)[0] == R.component(1)[0]);
}

TEST_CASE("Navier-Stokes nonlinear term") {
  const int n = 16;
  const FrequencyGrid grid(2, n, false);
  const auto zero = SpectralField::zeros(grid, 2);
  for (const auto& c : nonlinear_term_ns(zero).coeffs) CHECK(c == Complex(0.0));

  auto uniform = SpectralField::zeros(grid, 2);
  uniform.component(0)[0] = 3.0 * n * n;
  uniform.component(1)[0] = -1.0 * n * n;
  for (const auto& c : nonlinear_term_ns(uniform).coeffs) CHECK(std::abs(c) < 1e-9);

  // Taylor-Green: the nonlinear term is a pure gradient, so its projection
  // vanishes while the unprojected term does not.
  auto tg = PhysicalField::zeros(2, n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = grid_point(i, n), y = grid_point(j, n);
      tg.component(0)[static_cast<std::size_t>(i * n + j)] = -std::cos(x) * std::sin(y);
      tg.component(1)[static_cast<std::size_t>(i * n + j)] = std::sin(x) * std::cos(y);
    }
  }
  const auto Nh = nonlinear_term_ns(forward_transform(tg, false));
  double raw = 0.0;
  for (const auto& c : Nh.coeffs) raw = std::max(raw, std::abs(c));
  CHECK(raw > 1.0);
  const auto proj = leray_project(Nh);
  for (const auto& c : proj.coeffs) CHECK(std::abs(c) / (n * n) < 1e-10);

  CHECK_THROWS_AS(nonlinear_term_ns(SpectralField::zeros(FrequencyGrid(1, n, false), 1)), UnsupportedDimensionError);
}

TEST_CASE("Hermitian layout expand, gather and gradient adjoint") {
  const HermitianLayout l1(1, 100);
  CHECK(l1.size() == 51);
  CHECK(l1.self_conjugate(0));
  CHECK(l1.self_conjugate(50));
  CHECK_FALSE(l1.self_conjugate(1));

  const HermitianLayout layout(2, 8);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<Complex> reps(layout.size());
  for (std::size_t r = 0; r < reps.size(); ++r) reps[r] = layout.self_conjugate(r) ? Complex(nd(rng), 0.0) : Complex(nd(rng), nd(rng));
  std::vector<Complex> full(layout.full_grid().size());
  layout.expand(reps, full);
  SpectralField F{layout.full_grid(), 1, full};
  const auto f = inverse_transform(F);
  const auto back = forward_transform(f, false);
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(std::abs(back.coeffs[i] - full[i]) < 1e-12);
  std::vector<Complex> gathered(layout.size());
  layout.gather(full, gathered);
  for (std::size_t r = 0; r < reps.size(); ++r) CHECK(std::abs(gathered[r] - reps[r]) < 1e-15);

  // <G, expand(v)>_R = <reduce(G), v>_R for the real inner product.
  std::vector<Complex> G(full.size());
  for (auto& g : G) g = Complex(nd(rng), nd(rng));
  std::vector<Complex> red(layout.size());
  layout.reduce_gradient(G, red);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) lhs += G[i].real() * full[i].real() + G[i].imag() * full[i].imag();
  for (std::size_t r = 0; r < reps.size(); ++r) rhs += red[r].real() * reps[r].real() + red[r].imag() * reps[r].imag();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("wavevector norms") {
  CHECK(l1_norm({-3, 2, 7}, 2) == 5);
  CHECK(euclidean_norm({3, -4, 0}, 2) == doctest::Approx(5.0));
  CHECK(euclidean_norm({1, 2, 2}, 3) == doctest::Approx(3.0));
}
