#include "sinn/pde.hpp"

#include <cmath>
#include <numbers>

#include "sinn/errors.hpp"
#include "sinn/fft.hpp"
#include "grid_ops.hpp"

namespace sinn::pde {

namespace {

using detail::Operators;

std::vector<Complex> full_coefficients(const SpectralField& F, int component) {
  if (F.grid.half_spectrum()) {
    const SpectralField full = spectral::to_full_spectrum(F);
    const auto c = full.component(component);
    return {c.begin(), c.end()};
  }
  const auto c = F.component(component);
  return {c.begin(), c.end()};
}

void check_pair(const SpectralField& u, const SpectralField& dt, int dims, int components) {
  if (u.grid.dims() != dims || u.components != components) throw ShapeError("unexpected spectrum shape");
  if (!(u.grid.as_full() == dt.grid.as_full()) || u.components != dt.components) {
    throw ShapeError("solution and time-derivative spectra differ in shape");
  }
}

void check_burgers_grid(int n) {
  if (n < 8) throw ConfigError("Burgers residual needs N >= 8 for dealiasing");
}

struct BurgersState {
  std::vector<double> u, ux, residual;
};

BurgersState burgers_forward(const Operators& ops, std::span<const Complex> U,
                             std::span<const Complex> Ut, double nu, const ResidualOptions& opts) {
  BurgersState s;
  std::vector<Complex> lin(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) lin[i] = Ut[i] + nu * ops.k2[i] * U[i];
  s.residual = ops.to_physical(std::move(lin));
  if (!opts.include_nonlinear) return s;

  s.u = ops.to_physical(std::vector<Complex>(U.begin(), U.end()));
  std::vector<Complex> dU(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) dU[i] = ops.d1[0][i] * U[i];
  s.ux = ops.to_physical(std::move(dU));

  std::vector<double> prod(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) prod[i] = s.u[i] * s.ux[i];
  auto P = ops.to_spectral(prod);
  for (std::size_t i = 0; i < ops.size; ++i) P[i] *= ops.filter[i];
  const auto smoothed = ops.to_physical(std::move(P));
  for (std::size_t i = 0; i < ops.size; ++i) s.residual[i] += smoothed[i];
  return s;
}

struct NsState {
  std::vector<double> u, v, w;
  std::vector<double> rx, ry;
  std::vector<Complex> pu, pv;
};

NsState ns_forward(const Operators& ops, std::span<const Complex> U, std::span<const Complex> Ut,
                   double nu, const ResidualOptions& opts) {
  const std::size_t m = ops.size;
  NsState s;
  s.pu.assign(U.begin(), U.begin() + static_cast<std::ptrdiff_t>(m));
  s.pv.assign(U.begin() + static_cast<std::ptrdiff_t>(m), U.end());
  std::vector<Complex> ptx(Ut.begin(), Ut.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<Complex> pty(Ut.begin() + static_cast<std::ptrdiff_t>(m), Ut.end());
  if (opts.project_velocity) {
    ops.project(s.pu, s.pv);
    ops.project(ptx, pty);
  }

  std::vector<Complex> rx(m), ry(m);
  for (std::size_t i = 0; i < m; ++i) {
    rx[i] = ptx[i] + nu * ops.k2[i] * s.pu[i];
    ry[i] = pty[i] + nu * ops.k2[i] * s.pv[i];
  }

  if (opts.include_nonlinear) {
    std::vector<Complex> W(m);
    for (std::size_t i = 0; i < m; ++i) W[i] = ops.d1[0][i] * s.pv[i] - ops.d1[1][i] * s.pu[i];
    s.w = ops.to_physical(std::move(W));
    s.u = ops.to_physical(s.pu);
    s.v = ops.to_physical(s.pv);
    std::vector<double> nx(m), ny(m);
    for (std::size_t i = 0; i < m; ++i) {
      nx[i] = -s.w[i] * s.v[i];
      ny[i] = s.w[i] * s.u[i];
    }
    auto NX = ops.to_spectral(nx);
    auto NY = ops.to_spectral(ny);
    for (std::size_t i = 0; i < m; ++i) {
      NX[i] *= ops.filter[i];
      NY[i] *= ops.filter[i];
    }
    if (opts.project_nonlinear) ops.project(NX, NY);
    for (std::size_t i = 0; i < m; ++i) {
      rx[i] += NX[i];
      ry[i] += NY[i];
    }
  }
  s.rx = ops.to_physical(std::move(rx));
  s.ry = ops.to_physical(std::move(ry));
  return s;
}

void require_size(std::span<const Complex> s, std::size_t expected, const char* what) {
  if (s.size() != expected) throw ShapeError(std::string(what) + " has the wrong size");
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::hyper_diffusion_1d: return "hyper_diffusion_1d";
    case Variant::convection_diffusion_1d: return "convection_diffusion_1d";
    case Variant::diffusion_1d: return "diffusion_1d";
    case Variant::heat_2d: return "heat_2d";
    case Variant::heat_3d: return "heat_3d";
    case Variant::burgers_1d: return "burgers_1d";
    case Variant::navier_stokes_2d: return "navier_stokes_2d";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::hyper_diffusion_1d, Variant::convection_diffusion_1d,
                    Variant::diffusion_1d, Variant::heat_2d, Variant::heat_3d, Variant::burgers_1d,
                    Variant::navier_stokes_2d}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown PDE variant: " + name);
}

const char* ic_kind_name(InitialCondition::Kind k) {
  switch (k) {
    case InitialCondition::Kind::sine_sum: return "sine_sum";
    case InitialCondition::Kind::shell_random: return "shell_random";
    case InitialCondition::Kind::taylor_green: return "taylor_green";
  }
  return "?";
}

InitialCondition::Kind parse_ic_kind(const std::string& name) {
  if (name == "sine_sum") return InitialCondition::Kind::sine_sum;
  if (name == "shell_random") return InitialCondition::Kind::shell_random;
  if (name == "taylor_green") return InitialCondition::Kind::taylor_green;
  throw ConfigError("unknown initial condition: " + name);
}

int PdeSpec::dims() const {
  switch (variant) {
    case Variant::heat_2d:
    case Variant::navier_stokes_2d: return 2;
    case Variant::heat_3d: return 3;
    default: return 1;
  }
}

int PdeSpec::components() const { return variant == Variant::navier_stokes_2d ? 2 : 1; }

bool PdeSpec::is_linear() const {
  return variant != Variant::burgers_1d && variant != Variant::navier_stokes_2d;
}

void PdeSpec::validate() const {
  if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
  switch (variant) {
    case Variant::hyper_diffusion_1d:
      if (order < 1) throw ConfigError("hyper-diffusion order must be >= 1");
      if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
      break;
    case Variant::convection_diffusion_1d:
    case Variant::diffusion_1d:
    case Variant::heat_2d:
    case Variant::heat_3d:
      if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
      break;
    case Variant::burgers_1d:
    case Variant::navier_stokes_2d:
      if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
      break;
  }
  if (ic.kind == InitialCondition::Kind::sine_sum && (ic.k_min < 0 || ic.k_max < ic.k_min)) {
    throw ConfigError("sine-sum modes must satisfy 0 <= k_min <= k_max");
  }
  if (ic.kind == InitialCondition::Kind::taylor_green && variant != Variant::navier_stokes_2d) {
    throw ConfigError("Taylor-Green initial condition is for Navier-Stokes only");
  }
  if (variant == Variant::navier_stokes_2d && ic.kind == InitialCondition::Kind::sine_sum) {
    throw ConfigError("Navier-Stokes needs a Taylor-Green or random initial condition");
  }
}

PdeSpec hyper_diffusion(int order, int modes) {
  PdeSpec s;
  s.variant = Variant::hyper_diffusion_1d;
  s.order = order;
  s.epsilon = std::pow(0.2, order);
  s.final_time = 0.1;
  s.ic.k_min = 0;
  s.ic.k_max = modes - 1;
  return s;
}

PdeSpec convection_diffusion(int modes) {
  PdeSpec s;
  s.variant = Variant::convection_diffusion_1d;
  s.advection = 0.1;
  s.epsilon = 0.01;
  s.final_time = 0.1;
  s.ic.k_min = 0;
  s.ic.k_max = modes - 1;
  return s;
}

PdeSpec diffusion(int modes) {
  PdeSpec s;
  s.variant = Variant::diffusion_1d;
  s.epsilon = 1.0;
  s.final_time = 0.1;
  s.ic.k_min = 0;
  s.ic.k_max = modes - 1;
  return s;
}

PdeSpec heat_2d(int modes) {
  PdeSpec s;
  s.variant = Variant::heat_2d;
  s.epsilon = 1.0;
  s.final_time = 0.01;
  s.ic.k_min = 0;
  s.ic.k_max = modes - 1;
  return s;
}

PdeSpec heat_2d_random(std::uint64_t seed) {
  PdeSpec s = heat_2d();
  s.ic.kind = InitialCondition::Kind::shell_random;
  s.ic.seed = seed;
  return s;
}

PdeSpec heat_3d(int modes) {
  PdeSpec s;
  s.variant = Variant::heat_3d;
  s.epsilon = 1.0;
  s.final_time = 0.01;
  s.ic.k_min = 0;
  s.ic.k_max = modes - 1;
  return s;
}

PdeSpec burgers(int modes) {
  PdeSpec s;
  s.variant = Variant::burgers_1d;
  s.nu = std::numbers::pi / 150.0;
  s.final_time = 0.1;
  s.ic.k_min = 1;
  s.ic.k_max = modes;
  return s;
}

PdeSpec navier_stokes_taylor_green() {
  PdeSpec s;
  s.variant = Variant::navier_stokes_2d;
  s.nu = 2.0 * std::numbers::pi / 100.0;
  s.final_time = 2.0;
  s.ic.kind = InitialCondition::Kind::taylor_green;
  return s;
}

PdeSpec navier_stokes_random(std::uint64_t seed) {
  PdeSpec s = navier_stokes_taylor_green();
  s.ic.kind = InitialCondition::Kind::shell_random;
  s.ic.seed = seed;
  return s;
}

Complex linear_symbol(const PdeSpec& spec, const Wavevector& k, int n) {
  const int dims = spec.dims();
  switch (spec.variant) {
    case Variant::hyper_diffusion_1d:
      return spec.epsilon * spectral::derivative_symbol(k[0], spec.order, n);
    case Variant::convection_diffusion_1d:
      return -spec.advection * spectral::derivative_symbol(k[0], 1, n) +
             spec.epsilon * spectral::derivative_symbol(k[0], 2, n);
    case Variant::diffusion_1d:
      return spec.epsilon * spectral::derivative_symbol(k[0], 2, n);
    case Variant::heat_2d:
    case Variant::heat_3d: {
      Complex d(0.0, 0.0);
      for (int a = 0; a < dims; ++a) d += spectral::derivative_symbol(k[static_cast<std::size_t>(a)], 2, n);
      return spec.epsilon * d;
    }
    case Variant::burgers_1d:
    case Variant::navier_stokes_2d: break;
  }
  throw WrongEntryPointError(std::string("no linear symbol for ") + variant_name(spec.variant));
}

InputScaling make_scaling(const PdeSpec& spec, int n, bool normalize) {
  if (!normalize) return {};
  return {1.0 / spec.final_time, 2.0 / n};
}

// ---------------------------------------------------------------------------

SpectralModel::SpectralModel(const nn::MlpNetwork& net, int dims, int components, InputScaling scaling)
    : net_(&net), dims_(dims), components_(components), scaling_(scaling) {
  if (net.input_dim() != 1 + dims) throw ShapeError("network input must be (t, k) with 1 + dims entries");
  if (net.output_dim() != 2 * components) throw ShapeError("network output must be 2 x components");
}

void SpectralModel::evaluate(std::span<const double> times, std::span<const Wavevector> freqs,
                             Evaluation& out) const {
  if (times.size() != freqs.size()) throw ShapeError("times and frequencies differ in length");
  const std::size_t batch = times.size();
  const int in = 1 + dims_;
  std::vector<double> inputs(batch * static_cast<std::size_t>(in));
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = inputs.data() + b * static_cast<std::size_t>(in);
    row[0] = times[b] * scaling_.time_scale;
    for (int a = 0; a < dims_; ++a) row[1 + a] = freqs[b][static_cast<std::size_t>(a)] * scaling_.freq_scale;
  }
  nn::forward_batch(*net_, inputs, batch, 0, out.cache);
  out.points = batch;
  const auto vals = out.cache.values();
  const auto tans = out.cache.tangents();
  const std::size_t comps = static_cast<std::size_t>(components_);
  out.value.resize(batch * comps);
  out.dt.resize(batch * comps);
  const double ts = scaling_.time_scale;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < comps; ++c) {
      const std::size_t o = b * 2 * comps + 2 * c;
      out.value[b * comps + c] = Complex(vals[o], vals[o + 1]);
      out.dt[b * comps + c] = Complex(tans[o], tans[o + 1]) * ts;
    }
  }
}

void SpectralModel::backward(const Evaluation& eval, std::span<const Complex> grad_value,
                             std::span<const Complex> grad_dt, std::span<double> grads) const {
  const std::size_t comps = static_cast<std::size_t>(components_);
  const std::size_t n_out = eval.points * comps;
  if (grad_value.size() != n_out) throw ShapeError("value gradient has the wrong size");
  if (!grad_dt.empty() && grad_dt.size() != n_out) throw ShapeError("tangent gradient has the wrong size");
  std::vector<double> gv(2 * n_out);
  std::vector<double> gt;
  for (std::size_t i = 0; i < n_out; ++i) {
    gv[2 * i] = grad_value[i].real();
    gv[2 * i + 1] = grad_value[i].imag();
  }
  if (!grad_dt.empty()) {
    gt.resize(2 * n_out);
    const double ts = scaling_.time_scale;
    for (std::size_t i = 0; i < n_out; ++i) {
      gt[2 * i] = grad_dt[i].real() * ts;
      gt[2 * i + 1] = grad_dt[i].imag() * ts;
    }
  }
  nn::backward(*net_, eval.cache, gv, gt, grads);
}

// ---------------------------------------------------------------------------

Complex residual_linear(const PdeSpec& spec, const Wavevector& k, int n, Complex value, Complex dt) {
  if (!spec.is_linear()) throw WrongEntryPointError("residual_linear called for a nonlinear PDE");
  return dt - linear_symbol(spec, k, n) * value;
}

Complex residual_linear(const SpectralModel& model, const PdeSpec& spec, double t,
                        const Wavevector& k, int n) {
  if (!spec.is_linear()) throw WrongEntryPointError("residual_linear called for a nonlinear PDE");
  SpectralModel::Evaluation eval;
  const double times[1] = {t};
  const Wavevector freqs[1] = {k};
  model.evaluate(times, freqs, eval);
  return residual_linear(spec, k, n, eval.value[0], eval.dt[0]);
}

PhysicalField burgers_residual(const SpectralField& u_hat, const SpectralField& dt_hat, double nu,
                               const ResidualOptions& opts) {
  check_pair(u_hat, dt_hat, 1, 1);
  const int n = u_hat.grid.n();
  check_burgers_grid(n);
  const Operators ops(1, n, opts.dealias);
  const auto U = full_coefficients(u_hat, 0);
  const auto Ut = full_coefficients(dt_hat, 0);
  auto s = burgers_forward(ops, U, Ut, nu, opts);
  PhysicalField out = PhysicalField::zeros(1, n, 1);
  out.samples = std::move(s.residual);
  return out;
}

PhysicalField ns_residual(const SpectralField& u_hat, const SpectralField& dt_hat, double nu,
                          const ResidualOptions& opts) {
  check_pair(u_hat, dt_hat, 2, 2);
  const int n = u_hat.grid.n();
  const Operators ops(2, n, opts.dealias);
  std::vector<Complex> U = full_coefficients(u_hat, 0);
  std::vector<Complex> Ut = full_coefficients(dt_hat, 0);
  const auto v = full_coefficients(u_hat, 1);
  const auto vt = full_coefficients(dt_hat, 1);
  U.insert(U.end(), v.begin(), v.end());
  Ut.insert(Ut.end(), vt.begin(), vt.end());
  auto s = ns_forward(ops, U, Ut, nu, opts);
  PhysicalField out = PhysicalField::zeros(2, n, 2);
  std::copy(s.rx.begin(), s.rx.end(), out.component(0).begin());
  std::copy(s.ry.begin(), s.ry.end(), out.component(1).begin());
  return out;
}

double burgers_residual_loss(std::span<const Complex> u_hat, std::span<const Complex> dt_hat,
                             int n, double nu, const ResidualOptions& opts, double weight,
                             std::span<Complex> grad_u, std::span<Complex> grad_dt) {
  check_burgers_grid(n);
  const Operators ops(1, n, opts.dealias);
  require_size(u_hat, ops.size, "solution spectrum");
  require_size(dt_hat, ops.size, "time-derivative spectrum");
  const auto s = burgers_forward(ops, u_hat, dt_hat, nu, opts);

  double loss = 0.0;
  for (double r : s.residual) loss += r * r;
  loss *= weight;
  if (grad_u.empty() && grad_dt.empty()) return loss;
  require_size(grad_u, ops.size, "solution gradient");
  require_size(grad_dt, ops.size, "time-derivative gradient");

  const double inv = 1.0 / static_cast<double>(ops.size);
  std::vector<double> g(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) g[i] = 2.0 * weight * s.residual[i];
  const auto G = ops.to_spectral(g, inv);
  for (std::size_t i = 0; i < ops.size; ++i) {
    grad_dt[i] += G[i];
    grad_u[i] += nu * ops.k2[i] * G[i];
  }
  if (!opts.include_nonlinear) return loss;

  // Through the filtered product D(u u_x): the filter is real and even, so
  // its adjoint in physical space is itself.
  std::vector<Complex> Gp(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) Gp[i] = ops.filter[i] * G[i];
  const auto gp = ops.to_physical_unnormalized(std::move(Gp));
  std::vector<double> a(ops.size), b(ops.size);
  for (std::size_t i = 0; i < ops.size; ++i) {
    a[i] = gp[i] * s.ux[i];
    b[i] = gp[i] * s.u[i];
  }
  const auto A = ops.to_spectral(a, inv);
  const auto B = ops.to_spectral(b, inv);
  for (std::size_t i = 0; i < ops.size; ++i) grad_u[i] += A[i] + std::conj(ops.d1[0][i]) * B[i];
  return loss;
}

double ns_residual_loss(std::span<const Complex> u_hat, std::span<const Complex> dt_hat, int n,
                        double nu, const ResidualOptions& opts, double weight,
                        std::span<Complex> grad_u, std::span<Complex> grad_dt) {
  const Operators ops(2, n, opts.dealias);
  const std::size_t m = ops.size;
  require_size(u_hat, 2 * m, "velocity spectrum");
  require_size(dt_hat, 2 * m, "time-derivative spectrum");
  const auto s = ns_forward(ops, u_hat, dt_hat, nu, opts);

  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) loss += s.rx[i] * s.rx[i] + s.ry[i] * s.ry[i];
  loss *= weight;
  if (grad_u.empty() && grad_dt.empty()) return loss;
  require_size(grad_u, 2 * m, "velocity gradient");
  require_size(grad_dt, 2 * m, "time-derivative gradient");

  const double inv = 1.0 / static_cast<double>(m);
  std::vector<double> gx(m), gy(m);
  for (std::size_t i = 0; i < m; ++i) {
    gx[i] = 2.0 * weight * s.rx[i];
    gy[i] = 2.0 * weight * s.ry[i];
  }
  const auto GX = ops.to_spectral(gx, inv);
  const auto GY = ops.to_spectral(gy, inv);

  std::vector<Complex> gpu(m), gpv(m);
  std::vector<Complex> gtx = GX, gty = GY;
  for (std::size_t i = 0; i < m; ++i) {
    gpu[i] = nu * ops.k2[i] * GX[i];
    gpv[i] = nu * ops.k2[i] * GY[i];
  }

  if (opts.include_nonlinear) {
    std::vector<Complex> gnx = GX, gny = GY;
    if (opts.project_nonlinear) ops.project(gnx, gny);
    for (std::size_t i = 0; i < m; ++i) {
      gnx[i] *= ops.filter[i];
      gny[i] *= ops.filter[i];
    }
    const auto pnx = ops.to_physical_unnormalized(std::move(gnx));
    const auto pny = ops.to_physical_unnormalized(std::move(gny));
    std::vector<double> gw(m), gu(m), gv(m);
    for (std::size_t i = 0; i < m; ++i) {
      gw[i] = -pnx[i] * s.v[i] + pny[i] * s.u[i];
      gu[i] = pny[i] * s.w[i];
      gv[i] = -pnx[i] * s.w[i];
    }
    const auto GW = ops.to_spectral(gw, inv);
    const auto GU = ops.to_spectral(gu, inv);
    const auto GV = ops.to_spectral(gv, inv);
    for (std::size_t i = 0; i < m; ++i) {
      gpu[i] += GU[i] - std::conj(ops.d1[1][i]) * GW[i];
      gpv[i] += GV[i] + std::conj(ops.d1[0][i]) * GW[i];
    }
  }

  if (opts.project_velocity) {
    ops.project(gpu, gpv);
    ops.project(gtx, gty);
  }
  for (std::size_t i = 0; i < m; ++i) {
    grad_u[i] += gpu[i];
    grad_u[m + i] += gpv[i];
    grad_dt[i] += gtx[i];
    grad_dt[m + i] += gty[i];
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

// k and -k coincide modulo n.
bool self_conjugate(const Wavevector& k, int dims, int n) {
  for (int a = 0; a < dims; ++a) {
    const int c = k[static_cast<std::size_t>(a)];
    if (c != 0 && 2 * std::abs(c) != n) return false;
  }
  return true;
}

// Evaluates the model on every representative at each time, in order.
void evaluate_slices(const SpectralModel& model, const HermitianLayout& layout,
                     std::span<const double> times, SpectralModel::Evaluation& eval) {
  const auto& reps = layout.representatives();
  std::vector<double> t(times.size() * reps.size());
  std::vector<Wavevector> k(t.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      t[s * reps.size() + r] = times[s];
      k[s * reps.size() + r] = reps[r];
    }
  }
  model.evaluate(t, k, eval);
}

// Full unnormalized spectra of slice s, component-major.
void slice_spectra(const SpectralModel::Evaluation& eval, const HermitianLayout& layout,
                   std::size_t slice, int components, std::vector<Complex>& value,
                   std::vector<Complex>& dt) {
  const std::size_t reps = layout.size();
  const std::size_t full = layout.full_grid().size();
  const auto comps = static_cast<std::size_t>(components);
  const double scale = static_cast<double>(full);
  value.resize(full * comps);
  dt.resize(full * comps);
  std::vector<Complex> rv(reps), rd(reps);
  for (std::size_t c = 0; c < comps; ++c) {
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t o = (slice * reps + r) * comps + c;
      rv[r] = eval.value[o] * scale;
      rd[r] = eval.dt[o] * scale;
    }
    layout.expand(rv, std::span<Complex>(value).subspan(c * full, full));
    layout.expand(rd, std::span<Complex>(dt).subspan(c * full, full));
  }
}

void check_model_for(const SpectralModel& model, const PdeSpec& spec, const HermitianLayout& layout) {
  if (model.dims() != spec.dims() || model.components() != spec.components()) {
    throw ShapeError("model shape does not match the PDE");
  }
  if (layout.full_grid().dims() != spec.dims()) throw ShapeError("layout dimension does not match the PDE");
}

}  // namespace

PredictedSpectra predict_spectra(const SpectralModel& model, const HermitianLayout& layout, double t) {
  SpectralModel::Evaluation eval;
  const double times[1] = {t};
  evaluate_slices(model, layout, times, eval);
  PredictedSpectra out{SpectralField::zeros(layout.full_grid(), model.components()),
                       SpectralField::zeros(layout.full_grid(), model.components())};
  slice_spectra(eval, layout, 0, model.components(), out.value.coeffs, out.dt.coeffs);
  return out;
}

PhysicalField predict_field(const SpectralModel& model, const HermitianLayout& layout, double t) {
  return spectral::inverse_transform(predict_spectra(model, layout, t).value);
}

PhysicalField residual_burgers(const SpectralModel& model, const PdeSpec& spec, double t,
                               const HermitianLayout& layout, const ResidualOptions& opts) {
  if (spec.variant != Variant::burgers_1d) throw WrongEntryPointError("not a Burgers spec");
  check_model_for(model, spec, layout);
  const auto p = predict_spectra(model, layout, t);
  return burgers_residual(p.value, p.dt, spec.nu, opts);
}

PhysicalField residual_ns(const SpectralModel& model, const PdeSpec& spec, double t,
                          const HermitianLayout& layout, const ResidualOptions& opts) {
  if (spec.variant != Variant::navier_stokes_2d) throw WrongEntryPointError("not a Navier-Stokes spec");
  check_model_for(model, spec, layout);
  const auto p = predict_spectra(model, layout, t);
  return ns_residual(p.value, p.dt, spec.nu, opts);
}

double ic_loss(const SpectralModel& model, std::span<const Wavevector> freqs,
               std::span<const Complex> targets, std::span<double> grads, double weight) {
  const auto comps = static_cast<std::size_t>(model.components());
  if (targets.size() != freqs.size() * comps) throw ShapeError("IC targets do not match the IC points");
  if (freqs.empty()) return 0.0;
  SpectralModel::Evaluation eval;
  const std::vector<double> zeros(freqs.size(), 0.0);
  model.evaluate(zeros, freqs, eval);
  const double inv = 1.0 / static_cast<double>(freqs.size());
  double loss = 0.0;
  std::vector<Complex> g(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Complex d = eval.value[i] - targets[i];
    loss += std::norm(d);
    g[i] = 2.0 * weight * inv * d;
  }
  if (!grads.empty()) model.backward(eval, g, {}, grads);
  return loss * inv;
}

LossBreakdown total_loss(const SpectralModel& model, const PdeSpec& spec,
                         const HermitianLayout& layout, const CollocationSet& colloc,
                         const strategy::StrategyConfig& strategy, const ResidualOptions& opts,
                         std::span<double> grads) {
  using strategy::Kind;
  check_model_for(model, spec, layout);
  const bool wl = strategy.kind == Kind::wl;
  if (wl && !spec.is_linear()) {
    throw InvalidStrategyError("WL weighting cannot be applied to a nonlinear PDE");
  }
  const bool want_grad = !grads.empty();
  const int n = layout.full_grid().n();
  const int dims = spec.dims();
  LossBreakdown out;

  if (spec.is_linear()) {
    const std::size_t count = colloc.freqs.size();
    if (colloc.times.size() != count) throw ShapeError("linear collocation needs one time per frequency");
    if (count > 0) {
      SpectralModel::Evaluation eval;
      model.evaluate(colloc.times, colloc.freqs, eval);
      std::vector<Complex> r(count), sym(count);
      for (std::size_t i = 0; i < count; ++i) {
        sym[i] = linear_symbol(spec, colloc.freqs[i], n);
        r[i] = eval.dt[i] - sym[i] * eval.value[i];
      }
      std::vector<double> point_weight(count, 1.0 / static_cast<double>(count));
      if (wl) {
        const int max_l1 = strategy::max_l1_norm(colloc.freqs, dims);
        if (max_l1 <= 0) throw DegenerateGridError("WL needs at least two shells (M > 0)");
        const double full = static_cast<double>(layout.full_grid().size());
        strategy::ShellLosses shells(static_cast<std::size_t>(max_l1) + 1, 0.0);
        strategy::ShellLosses spectrum_shells(shells.size(), 0.0);
        for (std::size_t i = 0; i < count; ++i) {
          const auto l = static_cast<std::size_t>(spectral::l1_norm(colloc.freqs[i], dims));
          const double v = colloc.shell_scale * std::norm(r[i]);
          shells[l] += v;
          const double partners = self_conjugate(colloc.freqs[i], dims, n) ? 1.0 : 2.0;
          spectrum_shells[l] += partners * full * full * v;
        }
        const auto w = strategy::wl_weights(spectrum_shells, strategy.wl.epsilon);
        double acc = 0.0;
        for (std::size_t l = 0; l < shells.size(); ++l) acc += w[l] * shells[l];
        out.residual_term = acc / max_l1;
        for (std::size_t i = 0; i < count; ++i) {
          point_weight[i] = w[static_cast<std::size_t>(spectral::l1_norm(colloc.freqs[i], dims))] *
                            colloc.shell_scale / max_l1;
        }
        out.shell_residuals = std::move(shells);
        out.shell_weights = w;
      } else {
        double acc = 0.0;
        for (const auto& v : r) acc += std::norm(v);
        out.residual_term = acc / static_cast<double>(count);
      }
      if (want_grad) {
        std::vector<Complex> g_dt(count), g_val(count);
        for (std::size_t i = 0; i < count; ++i) {
          g_dt[i] = 2.0 * point_weight[i] * r[i];
          g_val[i] = -std::conj(sym[i]) * g_dt[i];
        }
        model.backward(eval, g_val, g_dt, grads);
      }
    }
  } else {
    const std::size_t slices = colloc.times.size();
    if (slices > 0) {
      SpectralModel::Evaluation eval;
      evaluate_slices(model, layout, colloc.times, eval);
      const std::size_t full = layout.full_grid().size();
      const std::size_t reps = layout.size();
      const auto comps = static_cast<std::size_t>(spec.components());
      const double weight = 1.0 / (static_cast<double>(slices) * static_cast<double>(full));
      std::vector<Complex> g_val(eval.value.size()), g_dt(eval.dt.size());
      std::vector<Complex> value, dt, gu(full * comps), gd(full * comps), rep_g(reps);
      double acc = 0.0;
      for (std::size_t s = 0; s < slices; ++s) {
        slice_spectra(eval, layout, s, spec.components(), value, dt);
        std::span<Complex> gu_span, gd_span;
        if (want_grad) {
          std::fill(gu.begin(), gu.end(), Complex(0.0, 0.0));
          std::fill(gd.begin(), gd.end(), Complex(0.0, 0.0));
          gu_span = gu;
          gd_span = gd;
        }
        if (spec.variant == Variant::burgers_1d) {
          acc += burgers_residual_loss(value, dt, n, spec.nu, opts, weight, gu_span, gd_span);
        } else {
          acc += ns_residual_loss(value, dt, n, spec.nu, opts, weight, gu_span, gd_span);
        }
        if (!want_grad) continue;
        // Chain through U = N^d * expand(c).
        const double scale = static_cast<double>(full);
        for (std::size_t c = 0; c < comps; ++c) {
          for (auto [src, dst] : {std::pair{&gu, &g_val}, std::pair{&gd, &g_dt}}) {
            std::fill(rep_g.begin(), rep_g.end(), Complex(0.0, 0.0));
            layout.reduce_gradient(std::span<const Complex>(*src).subspan(c * full, full), rep_g);
            for (std::size_t r = 0; r < reps; ++r) (*dst)[(s * reps + r) * comps + c] = rep_g[r] * scale;
          }
        }
      }
      out.residual_term = acc;
      if (want_grad) model.backward(eval, g_val, g_dt, grads);
    }
  }

  out.ic_term = ic_loss(model, colloc.ic_freqs, colloc.ic_targets, grads, colloc.ic_weight);
  out.total = out.residual_term + colloc.ic_weight * out.ic_term;
  return out;
}

}  // namespace sinn::pde
