#pragma once
// Ground truth for training runs: closed-form solutions, shell-band random
// initial conditions and pseudo-spectral time steppers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sinn/pde.hpp"
#include "sinn/spectral.hpp"

namespace sinn::reference {

using spectral::Complex;
using spectral::PhysicalField;
using spectral::SpectralField;

// sum_{k=0}^{modes-1} sin(kx - kat) exp(-eps k^2 t)
PhysicalField analytic_convdiff(double t, int n, double a, double eps, int modes);
// sum_{k=0}^{modes-1} sin(kx) exp(-eps k^2 t)
PhysicalField analytic_diffusion(double t, int n, double eps, int modes);
// sum_k [sin(kx) + sin(ky)] exp(-eps k^2 t)
PhysicalField analytic_heat2d(double t, int n, double eps, int modes);
// sum_k [sin(kx) + sin(ky) + sin(kz)] exp(-eps k^q t), q = 3 if cubic else 2
PhysicalField analytic_heat3d(double t, int n, double eps, int modes, bool cubic = false);
// (-cos x sin y, sin x cos y) exp(-2 nu t)
PhysicalField taylor_green(double t, int n, double nu);

struct ShellSpectrumSpec {
  std::vector<double> energies;  // E_1..E_M
  double amplitude_scale = 0.0;  // S; <= 0 means N^d
  std::uint64_t seed = 0;

  static ShellSpectrumSpec heat(std::uint64_t seed);
  static ShellSpectrumSpec navier_stokes(std::uint64_t seed);
};

// Full-grid unnormalized spectrum with sum_{n-1/2 <= |k| < n+1/2} |g|^2 =
// S^2 E_n exactly and zeros outside the listed shells. The solenoidal
// variant projects h before the shell sums are taken, so the identity holds
// for the projected field. A shell whose draws sum to zero is redrawn.
SpectralField generate_shell_spectrum(const ShellSpectrumSpec& spec, int dims, int n,
                                      bool solenoidal = false);

// Initial condition of a PDE as a full-grid unnormalized spectrum.
SpectralField initial_spectrum(const pde::PdeSpec& spec, int n);

// Exact solution spectrum of a linear PDE, U(t) = exp(D t) U(0).
SpectralField linear_solution_spectrum(const pde::PdeSpec& spec, int n, double t);

// ---------------------------------------------------------------------------
// Time stepping

struct StepperOptions {
  spectral::Dealias dealias = spectral::Dealias::smoothing;
  bool nonlinear = true;
};

struct SolverState {
  int dims = 1;
  int n = 0;
  int components = 1;
  std::vector<Complex> u_hat;           // full grid, component-major, unnormalized
  std::vector<Complex> prev_nonlinear;  // AB2: projected N at the previous step
  bool has_prev = false;
  double time = 0.0;
  double dt = 0.0;
  double initial_norm = 0.0;
};

SolverState make_state(const SpectralField& initial, double dt);
SpectralField state_spectrum(const SolverState& state);
PhysicalField state_field(const SolverState& state);

// Right-hand sides d U / dt.
//   Burgers: -nu k^2 U - F[D(u u_x)]
//   NS:      -P N - nu |k|^2 U
SpectralField burgers_rhs(const SpectralField& u_hat, double nu, const StepperOptions& opts = {});
SpectralField ns_rhs(const SpectralField& u_hat, double nu, const StepperOptions& opts = {});

// Steps throw InstabilityError once |U| exceeds 1e10 times its initial value
// or turns non-finite.
void burgers_rk3_step(SolverState& state, double nu, const StepperOptions& opts = {});
// Diagonal TVD-RK3 for u_t = eps Laplacian u in any dimension.
void heat_rk3_step(SolverState& state, double eps);
// Integrating-factor AB2; the first step is an integrating-factor Euler step.
void ns_ab2_step(SolverState& state, double nu, const StepperOptions& opts = {});

// Snapshots at `times` (each a multiple of dt). Linear PDEs are evaluated
// exactly, Burgers by RK3 and Navier-Stokes by AB2.
std::vector<PhysicalField> solve_reference(const pde::PdeSpec& spec, int n, double dt,
                                           const std::vector<double>& times);

// <stem>.bin holds float64 little-endian samples ordered (time, component,
// grid row-major); <stem>.json describes the layout.
void write_snapshots(const std::filesystem::path& stem, const std::vector<PhysicalField>& fields,
                     const std::vector<double>& times, const std::string& label);

struct Snapshots {
  std::vector<PhysicalField> fields;
  std::vector<double> times;
  std::string label;
};
Snapshots read_snapshots(const std::filesystem::path& stem);

}  // namespace sinn::reference
