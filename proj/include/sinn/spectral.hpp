#pragma once
// Fourier machinery on uniform periodic grids over [0, 2*pi]^d.
//
// Conventions used throughout the library:
//   forward:  U(k) = sum_j u(x_j) exp(-i k.x_j)           (unnormalized)
//   inverse:  u(x_j) = N^-d sum_k U(k) exp(+i k.x_j)
// with x_j = 2*pi*j/N and integer wavenumbers in [-N/2, N/2-1] per axis.
// A half-spectrum stores the last axis as the N/2+1 nonnegative wavenumbers
// 0..N/2; the remaining entries follow from U(-k) = conj(U(k)).

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sinn::spectral {

using Complex = std::complex<double>;
using Wavevector = std::array<int, 3>;

class FrequencyGrid {
 public:
  FrequencyGrid(int dims, int n_per_axis, bool half_spectrum = false);

  int dims() const { return dims_; }
  int n() const { return n_; }
  bool half_spectrum() const { return half_; }

  // Stored entries along `axis`.
  int axis_length(int axis) const;
  int wavenumber(int axis, int index) const;
  std::vector<int> wavenumbers(int axis) const;

  // Stored coefficients per component.
  std::size_t size() const;
  std::size_t physical_size() const;

  // Unused trailing entries are zero.
  Wavevector wavevector(std::size_t index) const;
  std::size_t index_of(const Wavevector& k) const;

  bool is_nyquist(int k) const { return k == n_ / 2 || k == -n_ / 2; }

  FrequencyGrid as_full() const { return {dims_, n_, false}; }
  FrequencyGrid as_half() const { return {dims_, n_, true}; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  int dims_;
  int n_;
  bool half_;
};

// Throws InvalidGridError unless n is even and >= 4.
void validate_grid_size(int n);

struct PhysicalField {
  int dims = 1;
  int n = 0;
  int components = 1;
  std::vector<double> samples;  // component-major, each n^dims row-major

  static PhysicalField zeros(int dims, int n, int components = 1);
  std::size_t points() const;
  std::span<double> component(int c);
  std::span<const double> component(int c) const;
};

struct SpectralField {
  FrequencyGrid grid{1, 4, false};
  int components = 1;
  std::vector<Complex> coeffs;  // component-major

  static SpectralField zeros(const FrequencyGrid& grid, int components = 1);
  std::span<Complex> component(int c);
  std::span<const Complex> component(int c) const;
};

// Physical coordinate x_j = 2*pi*j/n.
double grid_point(int j, int n);

SpectralField forward_transform(const PhysicalField& f, bool half_spectrum = true);
PhysicalField inverse_transform(const SpectralField& F);

SpectralField to_full_spectrum(const SpectralField& F);
SpectralField to_half_spectrum(const SpectralField& F);

// (i k)^p, zero at the Nyquist wavenumber for odd p.
Complex derivative_symbol(int k, int order, int n);

SpectralField spectral_derivative(const SpectralField& F, int axis, int order);

SpectralField dealias_two_thirds(const SpectralField& F);

// exp(-36 rho^36) with rho = |k| / (N/2).
double smoothing_factor(double rho);
SpectralField dealias_smoothing(const SpectralField& F);

enum class Dealias { smoothing, two_thirds, none };
SpectralField dealias(const SpectralField& F, Dealias kind);

// Removes the compressive part of a velocity spectrum: u -= k (k.u) / |k|^2
// for every k != 0.
SpectralField leray_project(const SpectralField& U);

// Max over k != 0 of |k.u(k)|.
double max_divergence(const SpectralField& U);

// Rotational nonlinear term of the 2-D Navier-Stokes equations,
// N = F[D[(curl u) x u]] with (w x u) = (-w v, w u) in 2-D. The Nyquist
// wavenumbers are excluded from the vorticity derivative.
SpectralField nonlinear_term_ns(const SpectralField& U_hat, Dealias kind = Dealias::smoothing);

// Bookkeeping for real fields whose spectrum is sampled only on one member
// of each conjugate pair {k, -k}. Representatives are taken from the
// half-spectrum layout (last axis 0..N/2); self-conjugate modes (k == -k
// modulo N) keep only their real part.
class HermitianLayout {
 public:
  HermitianLayout(int dims, int n);

  const FrequencyGrid& full_grid() const { return full_; }
  const std::vector<Wavevector>& representatives() const { return reps_; }
  bool self_conjugate(std::size_t rep) const { return self_conj_[rep] != 0; }
  std::size_t size() const { return reps_.size(); }

  // Fills a full-grid spectrum from values at the representatives.
  void expand(std::span<const Complex> rep_values, std::span<Complex> full) const;

  // Adjoint of expand for a real loss: maps d loss / d full (as
  // dRe + i dIm) onto the representatives, accumulating.
  void reduce_gradient(std::span<const Complex> full_grad, std::span<Complex> rep_grad) const;

  // Values of a full-grid spectrum at the representatives.
  void gather(std::span<const Complex> full, std::span<Complex> rep_values) const;

 private:
  FrequencyGrid full_;
  std::vector<Wavevector> reps_;
  std::vector<char> self_conj_;
  std::vector<std::size_t> rep_of_;   // per full index
  std::vector<char> conjugated_;      // per full index
  std::vector<std::size_t> full_of_rep_;
};

// Euclidean |k| and taxicab ||k||_1 of a wavevector in `dims` dimensions.
double euclidean_norm(const Wavevector& k, int dims);
int l1_norm(const Wavevector& k, int dims);

}  // namespace sinn::spectral
