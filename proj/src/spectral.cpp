#include "sinn/spectral.hpp"

#include <cmath>
#include <numbers>

#include "sinn/errors.hpp"
#include "sinn/fft.hpp"
#include "sinn/kernels.hpp"

namespace sinn::spectral {

void validate_grid_size(int n) {
  if (n < 4 || n % 2 != 0) {
    throw InvalidGridError("grid size must be even and >= 4, got " + std::to_string(n));
  }
}

FrequencyGrid::FrequencyGrid(int dims, int n_per_axis, bool half_spectrum)
    : dims_(dims), n_(n_per_axis), half_(half_spectrum) {
  if (dims < 1 || dims > 3) throw InvalidGridError("dims must be 1, 2 or 3");
  validate_grid_size(n_per_axis);
}

int FrequencyGrid::axis_length(int axis) const {
  return (half_ && axis == dims_ - 1) ? n_ / 2 + 1 : n_;
}

int FrequencyGrid::wavenumber(int axis, int index) const {
  if (half_ && axis == dims_ - 1) return index;
  return index < n_ / 2 ? index : index - n_;
}

std::vector<int> FrequencyGrid::wavenumbers(int axis) const {
  std::vector<int> out(static_cast<std::size_t>(axis_length(axis)));
  for (int i = 0; i < axis_length(axis); ++i) out[static_cast<std::size_t>(i)] = wavenumber(axis, i);
  return out;
}

std::size_t FrequencyGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dims_; ++a) s *= static_cast<std::size_t>(axis_length(a));
  return s;
}

std::size_t FrequencyGrid::physical_size() const {
  std::size_t s = 1;
  for (int a = 0; a < dims_; ++a) s *= static_cast<std::size_t>(n_);
  return s;
}

Wavevector FrequencyGrid::wavevector(std::size_t index) const {
  Wavevector k{0, 0, 0};
  for (int a = dims_ - 1; a >= 0; --a) {
    const auto len = static_cast<std::size_t>(axis_length(a));
    k[static_cast<std::size_t>(a)] = wavenumber(a, static_cast<int>(index % len));
    index /= len;
  }
  return k;
}

std::size_t FrequencyGrid::index_of(const Wavevector& k) const {
  std::size_t index = 0;
  for (int a = 0; a < dims_; ++a) {
    int w = k[static_cast<std::size_t>(a)];
    int i;
    if (half_ && a == dims_ - 1) {
      if (w < 0 || w > n_ / 2) throw ShapeError("wavenumber outside half-spectrum axis");
      i = w;
    } else {
      if (w < -n_ / 2 || w > n_ / 2) throw ShapeError("wavenumber outside grid");
      i = ((w % n_) + n_) % n_;
    }
    index = index * static_cast<std::size_t>(axis_length(a)) + static_cast<std::size_t>(i);
  }
  return index;
}

PhysicalField PhysicalField::zeros(int dims, int n, int components) {
  PhysicalField f;
  f.dims = dims;
  f.n = n;
  f.components = components;
  f.samples.assign(f.points() * static_cast<std::size_t>(components), 0.0);
  return f;
}

std::size_t PhysicalField::points() const {
  std::size_t s = 1;
  for (int a = 0; a < dims; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

std::span<double> PhysicalField::component(int c) {
  return std::span<double>(samples).subspan(static_cast<std::size_t>(c) * points(), points());
}

std::span<const double> PhysicalField::component(int c) const {
  return std::span<const double>(samples).subspan(static_cast<std::size_t>(c) * points(), points());
}

SpectralField SpectralField::zeros(const FrequencyGrid& grid, int components) {
  SpectralField f;
  f.grid = grid;
  f.components = components;
  f.coeffs.assign(grid.size() * static_cast<std::size_t>(components), Complex(0.0, 0.0));
  return f;
}

std::span<Complex> SpectralField::component(int c) {
  return std::span<Complex>(coeffs).subspan(static_cast<std::size_t>(c) * grid.size(), grid.size());
}

std::span<const Complex> SpectralField::component(int c) const {
  return std::span<const Complex>(coeffs).subspan(static_cast<std::size_t>(c) * grid.size(),
                                                  grid.size());
}

double grid_point(int j, int n) { return 2.0 * std::numbers::pi * static_cast<double>(j) / n; }

namespace {

void check_shapes(const SpectralField& F) {
  if (F.components < 1 || F.coeffs.size() != F.grid.size() * static_cast<std::size_t>(F.components)) {
    throw ShapeError("spectral field coefficient count does not match grid layout");
  }
}

// Half-spectrum component to full spectrum via U(-k) = conj(U(k)).
void expand_half(const FrequencyGrid& half, std::span<const Complex> in, std::span<Complex> out) {
  const int n = half.n();
  const int dims = half.dims();
  const std::size_t full_size = half.physical_size();
  const auto half_last = static_cast<std::size_t>(n / 2 + 1);
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t f = 0; f < full_size; ++f) {
    std::size_t rem = f;
    for (int a = dims - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    const int last = idx[static_cast<std::size_t>(dims - 1)];
    bool mirror = last > n / 2;
    std::size_t h = 0;
    for (int a = 0; a < dims; ++a) {
      int i = idx[static_cast<std::size_t>(a)];
      if (mirror) i = (n - i) % n;
      const std::size_t len = (a == dims - 1) ? half_last : static_cast<std::size_t>(n);
      h = h * len + static_cast<std::size_t>(i);
    }
    out[f] = mirror ? std::conj(in[h]) : in[h];
  }
}

void truncate_to_half(const FrequencyGrid& full, std::span<const Complex> in, std::span<Complex> out) {
  const int n = full.n();
  const auto half_last = static_cast<std::size_t>(n / 2 + 1);
  const std::size_t rows = full.physical_size() / static_cast<std::size_t>(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < half_last; ++j) {
      out[r * half_last + j] = in[r * static_cast<std::size_t>(n) + j];
    }
  }
}

template <typename Factor>
SpectralField apply_real_diagonal(const SpectralField& F, Factor&& factor_of) {
  check_shapes(F);
  SpectralField out = F;
  std::vector<double> factor(F.grid.size());
  for (std::size_t i = 0; i < factor.size(); ++i) factor[i] = factor_of(F.grid.wavevector(i));
  for (int c = 0; c < F.components; ++c) {
    auto comp = out.component(c);
    simd::kernels().scale_complex(factor.data(), comp.data(), comp.size());
  }
  return out;
}

}  // namespace

SpectralField forward_transform(const PhysicalField& f, bool half_spectrum) {
  validate_grid_size(f.n);
  if (f.dims < 1 || f.dims > 3) throw InvalidGridError("dims must be 1, 2 or 3");
  if (f.samples.size() != f.points() * static_cast<std::size_t>(f.components)) {
    throw ShapeError("sample count does not match grid");
  }
  const FrequencyGrid full(f.dims, f.n, false);
  SpectralField out = SpectralField::zeros(half_spectrum ? full.as_half() : full, f.components);
  std::vector<Complex> buffer(full.physical_size());
  for (int c = 0; c < f.components; ++c) {
    const auto src = f.component(c);
    for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = Complex(src[i], 0.0);
    fft::transform_nd(buffer, f.dims, f.n, false);
    if (half_spectrum) {
      truncate_to_half(full, buffer, out.component(c));
    } else {
      std::copy(buffer.begin(), buffer.end(), out.component(c).begin());
    }
  }
  return out;
}

PhysicalField inverse_transform(const SpectralField& F) {
  check_shapes(F);
  for (const Complex& z : F.coeffs) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw NumericError("non-finite Fourier coefficient");
    }
  }
  const FrequencyGrid& grid = F.grid;
  PhysicalField out = PhysicalField::zeros(grid.dims(), grid.n(), F.components);
  std::vector<Complex> buffer(grid.physical_size());
  const double scale = 1.0 / static_cast<double>(grid.physical_size());
  for (int c = 0; c < F.components; ++c) {
    if (grid.half_spectrum()) {
      expand_half(grid, F.component(c), buffer);
    } else {
      const auto src = F.component(c);
      std::copy(src.begin(), src.end(), buffer.begin());
    }
    fft::transform_nd(buffer, grid.dims(), grid.n(), true);
    auto dst = out.component(c);
    // imaginary residue of a Hermitian spectrum is rounding noise
    for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = buffer[i].real() * scale;
  }
  return out;
}

SpectralField to_full_spectrum(const SpectralField& F) {
  check_shapes(F);
  if (!F.grid.half_spectrum()) return F;
  SpectralField out = SpectralField::zeros(F.grid.as_full(), F.components);
  for (int c = 0; c < F.components; ++c) expand_half(F.grid, F.component(c), out.component(c));
  return out;
}

SpectralField to_half_spectrum(const SpectralField& F) {
  check_shapes(F);
  if (F.grid.half_spectrum()) return F;
  SpectralField out = SpectralField::zeros(F.grid.as_half(), F.components);
  for (int c = 0; c < F.components; ++c) truncate_to_half(F.grid, F.component(c), out.component(c));
  return out;
}

Complex derivative_symbol(int k, int order, int n) {
  if (order < 0) throw ContractViolation("derivative order must be nonnegative");
  if (order % 2 == 1 && (k == n / 2 || k == -n / 2)) return {0.0, 0.0};
  double magnitude = 1.0;
  for (int i = 0; i < order; ++i) magnitude *= static_cast<double>(k);
  switch (order % 4) {
    case 0: return {magnitude, 0.0};
    case 1: return {0.0, magnitude};
    case 2: return {-magnitude, 0.0};
    default: return {0.0, -magnitude};
  }
}

SpectralField spectral_derivative(const SpectralField& F, int axis, int order) {
  check_shapes(F);
  if (axis < 0 || axis >= F.grid.dims()) throw ContractViolation("derivative axis out of range");
  if (order < 1) throw ContractViolation("derivative order must be >= 1");
  SpectralField out = F;
  std::vector<Complex> factor(F.grid.size());
  for (std::size_t i = 0; i < factor.size(); ++i) {
    factor[i] = derivative_symbol(F.grid.wavevector(i)[static_cast<std::size_t>(axis)], order,
                                  F.grid.n());
  }
  for (int c = 0; c < F.components; ++c) {
    auto comp = out.component(c);
    simd::kernels().multiply_complex(factor.data(), comp.data(), comp.size());
  }
  return out;
}

SpectralField dealias_two_thirds(const SpectralField& F) {
  const int cutoff = F.grid.n() / 3;
  const int dims = F.grid.dims();
  return apply_real_diagonal(F, [&](const Wavevector& k) {
    for (int a = 0; a < dims; ++a) {
      if (std::abs(k[static_cast<std::size_t>(a)]) > cutoff) return 0.0;
    }
    return 1.0;
  });
}

double smoothing_factor(double rho) { return std::exp(-36.0 * std::pow(rho, 36)); }

SpectralField dealias_smoothing(const SpectralField& F) {
  const double k_max = F.grid.n() / 2.0;
  const int dims = F.grid.dims();
  return apply_real_diagonal(
      F, [&](const Wavevector& k) { return smoothing_factor(euclidean_norm(k, dims) / k_max); });
}

SpectralField dealias(const SpectralField& F, Dealias kind) {
  switch (kind) {
    case Dealias::smoothing: return dealias_smoothing(F);
    case Dealias::two_thirds: return dealias_two_thirds(F);
    case Dealias::none: return F;
  }
  return F;
}

SpectralField leray_project(const SpectralField& U) {
  check_shapes(U);
  const int dims = U.grid.dims();
  if (U.components != dims) throw ShapeError("leray projection needs one component per axis");
  SpectralField out = U;
  const std::size_t size = U.grid.size();
  for (std::size_t i = 0; i < size; ++i) {
    const Wavevector k = U.grid.wavevector(i);
    double k2 = 0.0;
    Complex k_dot_u(0.0, 0.0);
    for (int a = 0; a < dims; ++a) {
      const double ka = k[static_cast<std::size_t>(a)];
      k2 += ka * ka;
      k_dot_u += ka * U.coeffs[static_cast<std::size_t>(a) * size + i];
    }
    if (k2 == 0.0) continue;
    const Complex scale = k_dot_u / k2;
    for (int a = 0; a < dims; ++a) {
      out.coeffs[static_cast<std::size_t>(a) * size + i] -=
          static_cast<double>(k[static_cast<std::size_t>(a)]) * scale;
    }
  }
  return out;
}

double max_divergence(const SpectralField& U) {
  check_shapes(U);
  const int dims = U.grid.dims();
  if (U.components != dims) throw ShapeError("divergence needs one component per axis");
  const std::size_t size = U.grid.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const Wavevector k = U.grid.wavevector(i);
    Complex k_dot_u(0.0, 0.0);
    for (int a = 0; a < dims; ++a) {
      k_dot_u += static_cast<double>(k[static_cast<std::size_t>(a)]) *
                 U.coeffs[static_cast<std::size_t>(a) * size + i];
    }
    worst = std::max(worst, std::abs(k_dot_u));
  }
  return worst;
}

SpectralField nonlinear_term_ns(const SpectralField& U_hat, Dealias kind) {
  check_shapes(U_hat);
  if (U_hat.grid.dims() != 2) throw UnsupportedDimensionError("nonlinear term is 2-D only");
  if (U_hat.components != 2) throw ShapeError("velocity field needs two components");

  const FrequencyGrid& grid = U_hat.grid;
  const int n = grid.n();
  SpectralField vorticity = SpectralField::zeros(grid, 1);
  const auto u_hat = U_hat.component(0);
  const auto v_hat = U_hat.component(1);
  auto w_hat = vorticity.component(0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    w_hat[i] = derivative_symbol(k[0], 1, n) * v_hat[i] - derivative_symbol(k[1], 1, n) * u_hat[i];
  }
  const PhysicalField w = inverse_transform(vorticity);
  const PhysicalField vel = inverse_transform(U_hat);

  PhysicalField product = PhysicalField::zeros(2, n, 2);
  const auto u = vel.component(0);
  const auto v = vel.component(1);
  const auto wz = w.component(0);
  auto px = product.component(0);
  auto py = product.component(1);
  for (std::size_t j = 0; j < product.points(); ++j) {
    px[j] = -wz[j] * v[j];
    py[j] = wz[j] * u[j];
  }
  return dealias(forward_transform(product, grid.half_spectrum()), kind);
}

HermitianLayout::HermitianLayout(int dims, int n) : full_(dims, n, false) {
  const FrequencyGrid half(dims, n, true);
  const std::size_t full_size = full_.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  rep_of_.assign(full_size, unset);
  conjugated_.assign(full_size, 0);

  auto full_index = [&](const Wavevector& k) { return full_.index_of(k); };
  auto mirror = [&](const Wavevector& k) {
    Wavevector m{0, 0, 0};
    for (int a = 0; a < dims; ++a) {
      int w = -k[static_cast<std::size_t>(a)];
      if (w >= n / 2) w -= n;  // keep in [-N/2, N/2-1]
      m[static_cast<std::size_t>(a)] = w;
    }
    return m;
  };

  for (std::size_t h = 0; h < half.size(); ++h) {
    const Wavevector k = half.wavevector(h);
    const std::size_t f = full_index(k);
    if (rep_of_[f] != unset) continue;
    const std::size_t m = full_index(mirror(k));
    const std::size_t rep = reps_.size();
    reps_.push_back(k);
    full_of_rep_.push_back(f);
    self_conj_.push_back(m == f ? 1 : 0);
    rep_of_[f] = rep;
    if (m != f) {
      rep_of_[m] = rep;
      conjugated_[m] = 1;
    }
  }
}

void HermitianLayout::expand(std::span<const Complex> rep_values, std::span<Complex> full) const {
  if (rep_values.size() != reps_.size() || full.size() != rep_of_.size()) {
    throw ShapeError("hermitian expand size mismatch");
  }
  for (std::size_t f = 0; f < full.size(); ++f) {
    const std::size_t r = rep_of_[f];
    const Complex v = rep_values[r];
    if (self_conj_[r]) {
      full[f] = Complex(v.real(), 0.0);
    } else {
      full[f] = conjugated_[f] ? std::conj(v) : v;
    }
  }
}

void HermitianLayout::reduce_gradient(std::span<const Complex> full_grad,
                                      std::span<Complex> rep_grad) const {
  if (rep_grad.size() != reps_.size() || full_grad.size() != rep_of_.size()) {
    throw ShapeError("hermitian reduce size mismatch");
  }
  for (std::size_t f = 0; f < full_grad.size(); ++f) {
    const std::size_t r = rep_of_[f];
    const Complex g = full_grad[f];
    if (self_conj_[r]) {
      rep_grad[r] += Complex(g.real(), 0.0);
    } else {
      rep_grad[r] += conjugated_[f] ? std::conj(g) : g;
    }
  }
}

void HermitianLayout::gather(std::span<const Complex> full, std::span<Complex> rep_values) const {
  if (rep_values.size() != reps_.size() || full.size() != rep_of_.size()) {
    throw ShapeError("hermitian gather size mismatch");
  }
  for (std::size_t r = 0; r < reps_.size(); ++r) rep_values[r] = full[full_of_rep_[r]];
}

double euclidean_norm(const Wavevector& k, int dims) {
  double s = 0.0;
  for (int a = 0; a < dims; ++a) {
    s += static_cast<double>(k[static_cast<std::size_t>(a)]) * k[static_cast<std::size_t>(a)];
  }
  return std::sqrt(s);
}

int l1_norm(const Wavevector& k, int dims) {
  int s = 0;
  for (int a = 0; a < dims; ++a) s += std::abs(k[static_cast<std::size_t>(a)]);
  return s;
}

}  // namespace sinn::spectral
