#include "sinn/reference.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <cstring>

#include "json.hpp"

#include "grid_ops.hpp"
#include "sinn/errors.hpp"

namespace sinn::reference {

namespace {

using detail::Operators;
using spectral::FrequencyGrid;
using spectral::grid_point;
using spectral::Wavevector;

PhysicalField sample(int dims, int n, int components, auto&& f) {
  PhysicalField out = PhysicalField::zeros(dims, n, components);
  const std::size_t points = out.points();
  for (std::size_t j = 0; j < points; ++j) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::size_t rest = j;
    for (int a = dims - 1; a >= 0; --a) {
      x[static_cast<std::size_t>(a)] = grid_point(static_cast<int>(rest % static_cast<std::size_t>(n)), n);
      rest /= static_cast<std::size_t>(n);
    }
    for (int c = 0; c < components; ++c) out.samples[static_cast<std::size_t>(c) * points + j] = f(x, c);
  }
  return out;
}

double sine_sum_decay(double x, double eps, int modes, double t, double power) {
  double s = 0.0;
  for (int k = 0; k < modes; ++k) s += std::sin(k * x) * std::exp(-eps * std::pow(k, power) * t);
  return s;
}

double norm_of(std::span<const Complex> u) {
  double s = 0.0;
  for (const auto& c : u) s += std::norm(c);
  return std::sqrt(s);
}

void check_stability(const SolverState& state) {
  const double norm = norm_of(state.u_hat);
  if (!std::isfinite(norm) || (state.initial_norm > 0.0 && norm > 1e10 * state.initial_norm)) {
    throw InstabilityError("solver state blew up at t = " + std::to_string(state.time));
  }
}

std::vector<Complex> burgers_rhs_raw(const Operators& ops, std::span<const Complex> U, double nu,
                                     const StepperOptions& opts) {
  std::vector<Complex> out(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) out[i] = -nu * ops.k2[i] * U[i];
  if (!opts.nonlinear) return out;
  const auto u = ops.to_physical(std::vector<Complex>(U.begin(), U.end()));
  std::vector<Complex> dU(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) dU[i] = ops.d1[0][i] * U[i];
  const auto ux = ops.to_physical(std::move(dU));
  std::vector<double> prod(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) prod[i] = u[i] * ux[i];
  const auto P = ops.to_spectral(prod);
  for (std::size_t i = 0; i < ops.size; ++i) out[i] -= ops.filter[i] * P[i];
  return out;
}

// Projected, filtered rotational nonlinear term for a 2-D velocity.
std::vector<Complex> ns_nonlinear_raw(const Operators& ops, std::span<const Complex> U,
                                      const StepperOptions& opts) {
  const std::size_t m = ops.size;
  std::vector<Complex> out(2 * m, Complex(0.0, 0.0));
  if (!opts.nonlinear) return out;
  const auto Uu = U.subspan(0, m);
  const auto Uv = U.subspan(m, m);
  std::vector<Complex> W(m);
  for (std::size_t i = 0; i < m; ++i) W[i] = ops.d1[0][i] * Uv[i] - ops.d1[1][i] * Uu[i];
  const auto w = ops.to_physical(std::move(W));
  const auto u = ops.to_physical(std::vector<Complex>(Uu.begin(), Uu.end()));
  const auto v = ops.to_physical(std::vector<Complex>(Uv.begin(), Uv.end()));
  std::vector<double> nx(m), ny(m);
  for (std::size_t i = 0; i < m; ++i) {
    nx[i] = -w[i] * v[i];
    ny[i] = w[i] * u[i];
  }
  auto NX = ops.to_spectral(nx);
  auto NY = ops.to_spectral(ny);
  for (std::size_t i = 0; i < m; ++i) {
    NX[i] *= ops.filter[i];
    NY[i] *= ops.filter[i];
  }
  ops.project(NX, NY);
  std::copy(NX.begin(), NX.end(), out.begin());
  std::copy(NY.begin(), NY.end(), out.begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

SpectralField full_of(const SpectralField& F) {
  return F.grid.half_spectrum() ? spectral::to_full_spectrum(F) : F;
}

}  // namespace

PhysicalField analytic_convdiff(double t, int n, double a, double eps, int modes) {
  return sample(1, n, 1, [&](const std::array<double, 3>& x, int) {
    double s = 0.0;
    for (int k = 0; k < modes; ++k) s += std::sin(k * x[0] - k * a * t) * std::exp(-eps * k * k * t);
    return s;
  });
}

PhysicalField analytic_diffusion(double t, int n, double eps, int modes) {
  return sample(1, n, 1, [&](const std::array<double, 3>& x, int) {
    return sine_sum_decay(x[0], eps, modes, t, 2.0);
  });
}

PhysicalField analytic_heat2d(double t, int n, double eps, int modes) {
  return sample(2, n, 1, [&](const std::array<double, 3>& x, int) {
    return sine_sum_decay(x[0], eps, modes, t, 2.0) + sine_sum_decay(x[1], eps, modes, t, 2.0);
  });
}

PhysicalField analytic_heat3d(double t, int n, double eps, int modes, bool cubic) {
  const double q = cubic ? 3.0 : 2.0;
  return sample(3, n, 1, [&](const std::array<double, 3>& x, int) {
    return sine_sum_decay(x[0], eps, modes, t, q) + sine_sum_decay(x[1], eps, modes, t, q) +
           sine_sum_decay(x[2], eps, modes, t, q);
  });
}

PhysicalField taylor_green(double t, int n, double nu) {
  const double decay = std::exp(-2.0 * nu * t);
  return sample(2, n, 2, [&](const std::array<double, 3>& x, int c) {
    return c == 0 ? -std::cos(x[0]) * std::sin(x[1]) * decay : std::sin(x[0]) * std::cos(x[1]) * decay;
  });
}

ShellSpectrumSpec ShellSpectrumSpec::heat(std::uint64_t seed) {
  return {{0.123456, 0.654321, 0.345612, 0.216543, 0.561234, 0.432165}, 0.0, seed};
}

ShellSpectrumSpec ShellSpectrumSpec::navier_stokes(std::uint64_t seed) {
  return {{0.123456, 0.654321, 0.345612}, 0.0, seed};
}

SpectralField generate_shell_spectrum(const ShellSpectrumSpec& spec, int dims, int n, bool solenoidal) {
  spectral::validate_grid_size(n);
  const int shells = static_cast<int>(spec.energies.size());
  if (shells == 0) throw ConfigError("shell spectrum needs at least one energy");
  for (double e : spec.energies) {
    if (!(e >= 0.0)) throw ConfigError("shell energies must be nonnegative");
  }
  if (shells >= n / 2) throw ConfigError("grid too small for the requested shells");
  if (solenoidal && dims != 2) throw ConfigError("solenoidal shell spectra are 2-D only");

  const int components = solenoidal ? dims : 1;
  const spectral::HermitianLayout layout(dims, n);
  const FrequencyGrid& grid = layout.full_grid();
  const std::size_t size = grid.size();
  const double scale = spec.amplitude_scale > 0.0 ? spec.amplitude_scale : static_cast<double>(size);

  // Shell index per full-grid entry, 0 meaning outside every listed shell.
  std::vector<int> shell_of(size, 0);
  for (std::size_t i = 0; i < size; ++i) {
    const Wavevector k = grid.wavevector(i);
    long k2 = 0;
    for (int a = 0; a < dims; ++a) k2 += static_cast<long>(k[static_cast<std::size_t>(a)]) * k[static_cast<std::size_t>(a)];
    for (int s = 1; s <= shells; ++s) {
      const long lo = (2L * s - 1) * (2L * s - 1);
      const long hi = (2L * s + 1) * (2L * s + 1);
      if (4 * k2 >= lo && 4 * k2 < hi) shell_of[i] = s;
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField out = SpectralField::zeros(grid, components);
  std::vector<Complex> reps(layout.size());
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (int c = 0; c < components; ++c) {
      for (auto& h : reps) {
        const double re = normal(rng);
        const double im = normal(rng);
        h = Complex(re, im);
      }
      layout.expand(reps, out.component(c));
    }
    if (solenoidal) out = spectral::leray_project(out);

    std::vector<double> energy(static_cast<std::size_t>(shells) + 1, 0.0);
    for (int c = 0; c < components; ++c) {
      const auto h = out.component(c);
      for (std::size_t i = 0; i < size; ++i) energy[static_cast<std::size_t>(shell_of[i])] += std::norm(h[i]);
    }
    bool degenerate = false;
    for (int s = 1; s <= shells; ++s) degenerate = degenerate || energy[static_cast<std::size_t>(s)] == 0.0;
    if (degenerate) continue;

    for (int c = 0; c < components; ++c) {
      auto h = out.component(c);
      for (std::size_t i = 0; i < size; ++i) {
        const int s = shell_of[i];
        h[i] = s == 0 ? Complex(0.0, 0.0)
                      : h[i] * (scale * std::sqrt(spec.energies[static_cast<std::size_t>(s - 1)] /
                                                  energy[static_cast<std::size_t>(s)]));
      }
    }
    return out;
  }
  throw DegenerateGridError("shell spectrum draws kept producing an empty shell");
}

SpectralField initial_spectrum(const pde::PdeSpec& spec, int n) {
  using Kind = pde::InitialCondition::Kind;
  spec.validate();
  spectral::validate_grid_size(n);
  const int dims = spec.dims();
  const FrequencyGrid grid(dims, n, false);
  switch (spec.ic.kind) {
    case Kind::sine_sum: {
      if (spec.ic.k_max >= n / 2) throw ConfigError("sine-sum modes must stay below N/2");
      SpectralField out = SpectralField::zeros(grid, 1);
      const double half = static_cast<double>(grid.size()) / 2.0;
      for (int a = 0; a < dims; ++a) {
        for (int k = std::max(spec.ic.k_min, 1); k <= spec.ic.k_max; ++k) {
          Wavevector kp{0, 0, 0};
          Wavevector km{0, 0, 0};
          kp[static_cast<std::size_t>(a)] = k;
          km[static_cast<std::size_t>(a)] = -k;
          out.coeffs[grid.index_of(kp)] += Complex(0.0, -half);
          out.coeffs[grid.index_of(km)] += Complex(0.0, half);
        }
      }
      return out;
    }
    case Kind::shell_random: {
      const bool ns = spec.variant == pde::Variant::navier_stokes_2d;
      ShellSpectrumSpec s = ns ? ShellSpectrumSpec::navier_stokes(spec.ic.seed) : ShellSpectrumSpec::heat(spec.ic.seed);
      s.amplitude_scale = spec.ic.amplitude_scale;
      return generate_shell_spectrum(s, dims, n, ns);
    }
    case Kind::taylor_green:
      return spectral::forward_transform(taylor_green(0.0, n, spec.nu), false);
  }
  throw ConfigError("unsupported initial condition");
}

SpectralField linear_solution_spectrum(const pde::PdeSpec& spec, int n, double t) {
  if (!spec.is_linear()) throw ConfigError("closed-form propagation needs a linear PDE");
  SpectralField out = initial_spectrum(spec, n);
  const bool cubic = spec.variant == pde::Variant::heat_3d && spec.cubic_decay_3d;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    // Unexcited modes stay zero; skipping them also avoids 0 * inf when the
    // symbol has a positive real part (hyper-diffusion with p = 0 mod 4).
    if (out.coeffs[i] == Complex(0.0)) continue;
    const Wavevector k = out.grid.wavevector(i);
    Complex d;
    if (cubic) {
      const double r = spectral::euclidean_norm(k, 3);
      d = -spec.epsilon * r * r * r;
    } else {
      d = pde::linear_symbol(spec, k, n);
    }
    out.coeffs[i] *= std::exp(d * t);
  }
  return out;
}

// ---------------------------------------------------------------------------

SolverState make_state(const SpectralField& initial, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const SpectralField full = full_of(initial);
  SolverState s;
  s.dims = full.grid.dims();
  s.n = full.grid.n();
  s.components = full.components;
  s.u_hat = full.coeffs;
  s.dt = dt;
  s.initial_norm = norm_of(s.u_hat);
  return s;
}

SpectralField state_spectrum(const SolverState& state) {
  SpectralField out = SpectralField::zeros(FrequencyGrid(state.dims, state.n, false), state.components);
  out.coeffs = state.u_hat;
  return out;
}

PhysicalField state_field(const SolverState& state) { return spectral::inverse_transform(state_spectrum(state)); }

SpectralField burgers_rhs(const SpectralField& u_hat, double nu, const StepperOptions& opts) {
  const SpectralField full = full_of(u_hat);
  if (full.grid.dims() != 1 || full.components != 1) throw ShapeError("Burgers needs a 1-D scalar field");
  const Operators ops(1, full.grid.n(), opts.dealias);
  SpectralField out = SpectralField::zeros(full.grid, 1);
  out.coeffs = burgers_rhs_raw(ops, full.coeffs, nu, opts);
  return out;
}

SpectralField ns_rhs(const SpectralField& u_hat, double nu, const StepperOptions& opts) {
  const SpectralField full = full_of(u_hat);
  if (full.grid.dims() != 2 || full.components != 2) throw ShapeError("Navier-Stokes needs a 2-D velocity");
  const Operators ops(2, full.grid.n(), opts.dealias);
  SpectralField out = SpectralField::zeros(full.grid, 2);
  out.coeffs = ns_nonlinear_raw(ops, full.coeffs, opts);
  const std::size_t m = ops.size;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(c) * m + i;
      out.coeffs[j] = -out.coeffs[j] - nu * ops.k2[i] * full.coeffs[j];
    }
  }
  return out;
}

void burgers_rk3_step(SolverState& state, double nu, const StepperOptions& opts) {
  if (state.dims != 1 || state.components != 1) throw ShapeError("Burgers needs a 1-D scalar state");
  const Operators ops(1, state.n, opts.dealias);
  const double dt = state.dt;
  const auto& u = state.u_hat;
  const std::size_t m = ops.size;

  const auto l0 = burgers_rhs_raw(ops, u, nu, opts);
  std::vector<Complex> u1(m);
  for (std::size_t i = 0; i < m; ++i) u1[i] = u[i] + dt * l0[i];
  const auto l1 = burgers_rhs_raw(ops, u1, nu, opts);
  std::vector<Complex> u2(m);
  for (std::size_t i = 0; i < m; ++i) u2[i] = 0.75 * u[i] + 0.25 * u1[i] + 0.25 * dt * l1[i];
  const auto l2 = burgers_rhs_raw(ops, u2, nu, opts);
  std::vector<Complex> next(m);
  for (std::size_t i = 0; i < m; ++i) next[i] = u[i] / 3.0 + 2.0 / 3.0 * u2[i] + 2.0 / 3.0 * dt * l2[i];

  state.u_hat = std::move(next);
  state.time += dt;
  check_stability(state);
}

void heat_rk3_step(SolverState& state, double eps) {
  const Operators ops(state.dims, state.n, spectral::Dealias::none);
  const double dt = state.dt;
  const std::size_t m = ops.size;
  for (int c = 0; c < state.components; ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      Complex& u = state.u_hat[static_cast<std::size_t>(c) * m + i];
      const double a = eps * dt * ops.k2[i];
      const Complex u1 = u - a * u;
      const Complex u2 = 0.75 * u + 0.25 * u1 - 0.25 * a * u1;
      u = u / 3.0 + 2.0 / 3.0 * u2 - 2.0 / 3.0 * a * u2;
    }
  }
  state.time += dt;
  check_stability(state);
}

void ns_ab2_step(SolverState& state, double nu, const StepperOptions& opts) {
  if (state.dims != 2 || state.components != 2) throw ShapeError("Navier-Stokes needs a 2-D velocity state");
  const Operators ops(2, state.n, opts.dealias);
  const double dt = state.dt;
  const std::size_t m = ops.size;
  const auto N = ns_nonlinear_raw(ops, state.u_hat, opts);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(c) * m + i;
      const double decay = std::exp(-nu * ops.k2[i] * dt);
      Complex forcing = state.has_prev ? 1.5 * dt * N[j] - 0.5 * dt * decay * state.prev_nonlinear[j]
                                       : dt * N[j];
      state.u_hat[j] = decay * (state.u_hat[j] - forcing);
    }
  }
  state.prev_nonlinear = N;
  state.has_prev = true;
  state.time += dt;
  check_stability(state);
}

std::vector<PhysicalField> solve_reference(const pde::PdeSpec& spec, int n, double dt,
                                           const std::vector<double>& times) {
  spec.validate();
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  std::vector<long> steps;
  long previous = 0;
  for (double t : times) {
    if (t < 0.0) throw ConfigError("output times must be nonnegative");
    const double r = t / dt;
    const long s = std::lround(r);
    if (std::abs(r - static_cast<double>(s)) > 1e-9 * std::max(1.0, r)) {
      throw ConfigError("time step does not divide output time " + std::to_string(t));
    }
    if (s < previous) throw ConfigError("output times must be nondecreasing");
    previous = s;
    steps.push_back(s);
  }

  std::vector<PhysicalField> out;
  out.reserve(times.size());
  if (spec.is_linear()) {
    for (double t : times) out.push_back(spectral::inverse_transform(linear_solution_spectrum(spec, n, t)));
    return out;
  }

  SolverState state = make_state(initial_spectrum(spec, n), dt);
  long done = 0;
  for (long target : steps) {
    for (; done < target; ++done) {
      switch (spec.variant) {
        case pde::Variant::burgers_1d: burgers_rk3_step(state, spec.nu); break;
        case pde::Variant::navier_stokes_2d: ns_ab2_step(state, spec.nu); break;
        default: throw ConfigError("no time stepper for this PDE");
      }
    }
    out.push_back(state_field(state));
  }
  return out;
}

void write_snapshots(const std::filesystem::path& stem, const std::vector<PhysicalField>& fields,
                     const std::vector<double>& times, const std::string& label) {
  if (fields.size() != times.size()) throw ShapeError("one time per snapshot is required");
  if (fields.empty()) throw ShapeError("no snapshots to write");
  const auto& first = fields.front();
  for (const auto& f : fields) {
    if (f.dims != first.dims || f.n != first.n || f.components != first.components) {
      throw ShapeError("snapshots differ in shape");
    }
  }
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());

  auto bin_path = stem;
  bin_path += ".bin";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot open " + bin_path.string());
  for (const auto& f : fields) {
    for (double v : f.samples) {
      unsigned char bytes[8];
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
      bin.write(reinterpret_cast<const char*>(bytes), 8);
    }
  }
  if (!bin) throw IoError("failed writing " + bin_path.string());

  nlohmann::json meta;
  meta["label"] = label;
  meta["dtype"] = "float64";
  meta["byte_order"] = "little";
  meta["order"] = "time, component, grid (row-major, axis 0 slowest)";
  meta["dims"] = first.dims;
  meta["n"] = first.n;
  meta["components"] = first.components;
  meta["times"] = times;
  meta["domain"] = "[0, 2pi)^dims, x_j = 2 pi j / n";
  meta["data"] = bin_path.filename().string();
  auto json_path = stem;
  json_path += ".json";
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot open " + json_path.string());
  js << meta.dump(2) << '\n';
}

Snapshots read_snapshots(const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot open " + json_path.string());
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed snapshot sidecar: " + std::string(e.what()));
  }
  Snapshots out;
  out.label = meta.value("label", "");
  out.times = meta.at("times").get<std::vector<double>>();
  const int dims = meta.at("dims");
  const int n = meta.at("n");
  const int comps = meta.at("components");

  auto bin_path = stem;
  bin_path += ".bin";
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot open " + bin_path.string());
  for (std::size_t t = 0; t < out.times.size(); ++t) {
    PhysicalField f = PhysicalField::zeros(dims, n, comps);
    for (double& v : f.samples) {
      unsigned char bytes[8];
      bin.read(reinterpret_cast<char*>(bytes), 8);
      if (!bin) throw IoError("snapshot data truncated");
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      std::memcpy(&v, &bits, 8);
    }
    out.fields.push_back(std::move(f));
  }
  return out;
}

}  // namespace sinn::reference
