#pragma once
// PDE descriptions and the spectral-domain losses that train a network
// u(t, k) -> Fourier coefficients.
//
// The network predicts Fourier-series coefficients c(k), u(x) = sum_k c(k)
// exp(i k.x); the unnormalized transform used elsewhere is U(k) = N^d c(k).
// Linear equations are residuals per (t, k) point. Nonlinear equations are
// residuals over the physical grid for whole time slices, with the spectrum
// rebuilt from its Hermitian representatives.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sinn/nn.hpp"
#include "sinn/spectral.hpp"
#include "sinn/strategies.hpp"

namespace sinn::pde {

using spectral::Complex;
using spectral::HermitianLayout;
using spectral::PhysicalField;
using spectral::SpectralField;
using spectral::Wavevector;

enum class Variant {
  hyper_diffusion_1d,
  convection_diffusion_1d,
  diffusion_1d,
  heat_2d,
  heat_3d,
  burgers_1d,
  navier_stokes_2d,
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct InitialCondition {
  enum class Kind { sine_sum, shell_random, taylor_green };
  Kind kind = Kind::sine_sum;
  // sine sum: sum_{k=k_min}^{k_max} sin(k x) (per axis, summed, for d > 1)
  int k_min = 0;
  int k_max = 4;
  // shell_random
  std::uint64_t seed = 0;
  double amplitude_scale = 0.0;  // <= 0: number of grid points N^d
};

const char* ic_kind_name(InitialCondition::Kind k);
InitialCondition::Kind parse_ic_kind(const std::string& name);

struct PdeSpec {
  Variant variant = Variant::diffusion_1d;
  int order = 2;            // hyper-diffusion derivative order p
  double epsilon = 1.0;     // diffusivity
  double advection = 0.0;   // convection speed a
  double nu = 0.0;          // viscosity (Burgers, Navier-Stokes)
  double final_time = 0.1;  // T
  InitialCondition ic;
  bool cubic_decay_3d = false;  // 3-D heat analytic with exp(-eps k^3 t)

  int dims() const;
  int components() const;
  bool is_linear() const;
  // Throws ConfigError.
  void validate() const;
};

// Experiment families at their published parameters.
PdeSpec hyper_diffusion(int order, int modes = 5);
PdeSpec convection_diffusion(int modes = 6);
PdeSpec diffusion(int modes = 5);
PdeSpec heat_2d(int modes = 10);
PdeSpec heat_2d_random(std::uint64_t seed);
PdeSpec heat_3d(int modes = 5);
PdeSpec burgers(int modes = 3);
PdeSpec navier_stokes_taylor_green();
PdeSpec navier_stokes_random(std::uint64_t seed);

// Symbol D(k) of the spatial operator, u_t = D u, for linear variants. Odd
// derivative terms vanish at the Nyquist wavenumber.
Complex linear_symbol(const PdeSpec& spec, const Wavevector& k, int n);

// ---------------------------------------------------------------------------
// Network wrapper

struct InputScaling {
  double time_scale = 1.0;  // network sees t * time_scale
  double freq_scale = 1.0;  // and k * freq_scale
};

// 1/T and 2/N when normalize is set, identity otherwise.
InputScaling make_scaling(const PdeSpec& spec, int n, bool normalize);

class SpectralModel {
 public:
  // The network must take 1 + dims inputs and emit 2 * components outputs;
  // channel 2m is Re and 2m+1 is Im of component m.
  SpectralModel(const nn::MlpNetwork& net, int dims, int components, InputScaling scaling);

  struct Evaluation {
    nn::ForwardCache cache;
    std::size_t points = 0;
    std::vector<Complex> value;  // points x components, series coefficients
    std::vector<Complex> dt;     // d value / dt
  };

  int dims() const { return dims_; }
  int components() const { return components_; }
  const nn::MlpNetwork& net() const { return *net_; }

  void evaluate(std::span<const double> times, std::span<const Wavevector> freqs,
                Evaluation& out) const;

  // Gradients use the complex convention dL/dRe + i dL/dIm. Accumulates
  // into grads.
  void backward(const Evaluation& eval, std::span<const Complex> grad_value,
                std::span<const Complex> grad_dt, std::span<double> grads) const;

 private:
  const nn::MlpNetwork* net_;
  int dims_;
  int components_;
  InputScaling scaling_;
};

// ---------------------------------------------------------------------------
// Residuals

// r = dt - D(k) value, in any consistent normalization.
Complex residual_linear(const PdeSpec& spec, const Wavevector& k, int n, Complex value, Complex dt);
Complex residual_linear(const SpectralModel& model, const PdeSpec& spec, double t,
                        const Wavevector& k, int n);

struct ResidualOptions {
  spectral::Dealias dealias = spectral::Dealias::smoothing;
  bool include_nonlinear = true;
  bool project_velocity = true;   // hard Leray projection of the predicted velocity
  bool project_nonlinear = true;  // (1 - kk./|k|^2) applied to the nonlinear term
};

// Physical residual fields from unnormalized spectra (full or half) of the
// solution and of its time derivative.
//   Burgers:  F^-1[dt U + nu k^2 U] + D(u u_x)
//   NS:       F^-1[dt U] + F^-1[P N] + nu F^-1[|k|^2 U]
PhysicalField burgers_residual(const SpectralField& u_hat, const SpectralField& dt_hat, double nu,
                               const ResidualOptions& opts = {});
PhysicalField ns_residual(const SpectralField& u_hat, const SpectralField& dt_hat, double nu,
                          const ResidualOptions& opts = {});

// weight * sum_x |R(x)|^2 and, when the outputs are non-null, its gradient
// with respect to the full unnormalized spectra (complex convention).
double burgers_residual_loss(std::span<const Complex> u_hat, std::span<const Complex> dt_hat,
                             int n, double nu, const ResidualOptions& opts, double weight,
                             std::span<Complex> grad_u, std::span<Complex> grad_dt);
double ns_residual_loss(std::span<const Complex> u_hat, std::span<const Complex> dt_hat, int n,
                        double nu, const ResidualOptions& opts, double weight,
                        std::span<Complex> grad_u, std::span<Complex> grad_dt);

struct PredictedSpectra {
  SpectralField value;  // full grid, unnormalized
  SpectralField dt;
};

PredictedSpectra predict_spectra(const SpectralModel& model, const HermitianLayout& layout, double t);
PhysicalField predict_field(const SpectralModel& model, const HermitianLayout& layout, double t);

PhysicalField residual_burgers(const SpectralModel& model, const PdeSpec& spec, double t,
                               const HermitianLayout& layout, const ResidualOptions& opts = {});
PhysicalField residual_ns(const SpectralModel& model, const PdeSpec& spec, double t,
                          const HermitianLayout& layout, const ResidualOptions& opts = {});

// ---------------------------------------------------------------------------
// Losses

struct CollocationSet {
  // Linear: one time per residual point, paired with freqs.
  // Nonlinear: the sampled time slices; freqs unused.
  std::vector<double> times;
  std::vector<Wavevector> freqs;
  std::vector<Wavevector> ic_freqs;
  std::vector<Complex> ic_targets;  // ic_freqs.size() x components
  // WL shell sums are scaled by (#representatives / #residual points) so a
  // full-grid batch over n_t times averages over time.
  double shell_scale = 1.0;
  double ic_weight = 1.0;  // multiplies L_ic in the total
};

struct LossBreakdown {
  double total = 0.0;
  double residual_term = 0.0;
  double ic_term = 0.0;
  std::vector<double> shell_residuals;  // per ||k||_1 shell, linear variants only
  // WL only. The exponent uses shell sums of the unnormalized spectrum
  // U = N^d c over the full grid (conjugate partners counted), so eps_wl
  // keeps its meaning independent of the output scaling.
  std::vector<double> shell_weights;
};

// Mean squared complex misfit of the t = 0 prediction. Accumulates the
// gradient of weight * L_ic when grads is non-empty; the unweighted loss is
// returned.
double ic_loss(const SpectralModel& model, std::span<const Wavevector> freqs,
               std::span<const Complex> targets, std::span<double> grads = {}, double weight = 1.0);

// L = ic_weight * L_ic + L_r. WL requires a linear variant.
LossBreakdown total_loss(const SpectralModel& model, const PdeSpec& spec,
                         const HermitianLayout& layout, const CollocationSet& colloc,
                         const strategy::StrategyConfig& strategy,
                         const ResidualOptions& opts = {}, std::span<double> grads = {});

}  // namespace sinn::pde
