#include "sinn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "sinn/errors.hpp"
#include "sinn/reference.hpp"

namespace sinn::harness {

using nlohmann::json;
using spectral::Complex;
using spectral::HermitianLayout;
using spectral::PhysicalField;
using spectral::Wavevector;

// ---------------------------------------------------------------------------
// Configuration

std::vector<int> ExperimentConfig::layer_sizes() const {
  std::vector<int> sizes{1 + pde.dims()};
  sizes.insert(sizes.end(), network.hidden.begin(), network.hidden.end());
  sizes.push_back(2 * pde.components());
  return sizes;
}

pde::InputScaling input_scaling(const ExperimentConfig& cfg) {
  auto s = pde::make_scaling(cfg.pde, cfg.grid.n, cfg.network.normalize_inputs);
  if (cfg.network.frequency_scale > 0.0) s.freq_scale = cfg.network.frequency_scale;
  return s;
}

std::vector<double> ExperimentConfig::resolved_eval_times() const {
  if (eval_times.empty()) return {pde.final_time};
  return eval_times;
}

void ExperimentConfig::validate() const {
  pde.validate();
  spectral::validate_grid_size(grid.n);
  if (grid.time_points < 2) throw ConfigError("time_points must be >= 2");
  for (int h : network.hidden) {
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
  if (training.residual_batch < 1) throw ConfigError("residual_batch must be >= 1");
  if (training.time_slices < 1) throw ConfigError("time_slices must be >= 1");
  if (!(training.ic_weight > 0.0) || !std::isfinite(training.ic_weight)) throw ConfigError("ic_weight must be positive");
  if (!(network.frequency_scale >= 0.0) || !std::isfinite(network.frequency_scale)) {
    throw ConfigError("frequency_scale must be >= 0");
  }
  if (training.history_every < 1) throw ConfigError("history_every must be >= 1");
  if (!(optimizer.initial_lr > 0.0)) throw ConfigError("initial learning rate must be positive");
  if (!(reference_dt > 0.0)) throw ConfigError("reference_dt must be positive");
  for (double t : resolved_eval_times()) {
    if (t < 0.0 || t > pde.final_time * (1.0 + 1e-12)) throw ConfigError("evaluation times must lie in [0, T]");
  }
  if (strategy.kind == strategy::Kind::wl && !pde.is_linear()) {
    throw InvalidStrategyError("WL weighting cannot be applied to a nonlinear PDE");
  }
  if (strategy.si.alpha < 0.0 || strategy.si.beta < 0.0) throw ConfigError("SI alpha and beta must be >= 0");
  if (strategy.wl.epsilon < 0.0) throw ConfigError("eps_wl must be >= 0");
}

namespace {

const char* dealias_name(spectral::Dealias d) {
  switch (d) {
    case spectral::Dealias::smoothing: return "smoothing";
    case spectral::Dealias::two_thirds: return "two_thirds";
    case spectral::Dealias::none: return "none";
  }
  return "?";
}

spectral::Dealias parse_dealias(const std::string& s) {
  if (s == "smoothing") return spectral::Dealias::smoothing;
  if (s == "two_thirds") return spectral::Dealias::two_thirds;
  if (s == "none") return spectral::Dealias::none;
  throw ConfigError("unknown dealias kind: " + s);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["pde"] = {
      {"variant", pde::variant_name(c.pde.variant)},
      {"order", c.pde.order},
      {"epsilon", c.pde.epsilon},
      {"advection", c.pde.advection},
      {"nu", c.pde.nu},
      {"final_time", c.pde.final_time},
      {"cubic_decay_3d", c.pde.cubic_decay_3d},
      {"ic",
       {{"kind", pde::ic_kind_name(c.pde.ic.kind)},
        {"k_min", c.pde.ic.k_min},
        {"k_max", c.pde.ic.k_max},
        {"seed", c.pde.ic.seed},
        {"amplitude_scale", c.pde.ic.amplitude_scale}}},
  };
  j["grid"] = {{"n", c.grid.n}, {"time_points", c.grid.time_points}};
  j["network"] = {{"hidden", c.network.hidden},
                  {"normalize_inputs", c.network.normalize_inputs},
                  {"frequency_scale", c.network.frequency_scale}};
  j["optimizer"] = {{"initial_lr", c.optimizer.initial_lr},
                    {"decay_rate", c.optimizer.decay_rate},
                    {"transition_steps", c.optimizer.transition_steps},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps}};
  j["strategy"] = {{"kind", strategy::kind_name(c.strategy.kind)},
                   {"alpha", c.strategy.si.alpha},
                   {"beta", c.strategy.si.beta},
                   {"eps_wl", c.strategy.wl.epsilon},
                   {"combine_si_wl", c.strategy.combine_si_wl}};
  j["residual"] = {{"dealias", dealias_name(c.residual.dealias)},
                   {"include_nonlinear", c.residual.include_nonlinear},
                   {"project_velocity", c.residual.project_velocity},
                   {"project_nonlinear", c.residual.project_nonlinear}};
  j["training"] = {{"iterations", c.training.iterations},
                   {"residual_batch", c.training.residual_batch},
                   {"ic_batch", c.training.ic_batch},
                   {"time_slices", c.training.time_slices},
                   {"ic_weight", c.training.ic_weight},
                   {"seed", c.training.seed},
                   {"history_every", c.training.history_every}};
  j["evaluation"] = {{"times", c.eval_times}, {"reference_dt", c.reference_dt}};
  j["output_dir"] = c.output_dir.string();
  return j;
}

ExperimentConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known = {"name", "pde", "grid", "network", "optimizer", "strategy",
                                                 "residual", "training", "evaluation", "output_dir"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown configuration key: " + item.key());
    }
  }
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name);

  const json& p = section(j, "pde");
  c.pde.variant = pde::parse_variant(get_or<std::string>(p, "variant", pde::variant_name(c.pde.variant)));
  c.pde.order = get_or(p, "order", c.pde.order);
  c.pde.epsilon = get_or(p, "epsilon", c.pde.epsilon);
  c.pde.advection = get_or(p, "advection", c.pde.advection);
  c.pde.nu = get_or(p, "nu", c.pde.nu);
  c.pde.final_time = get_or(p, "final_time", c.pde.final_time);
  c.pde.cubic_decay_3d = get_or(p, "cubic_decay_3d", c.pde.cubic_decay_3d);
  const json& ic = section(p, "ic");
  c.pde.ic.kind = pde::parse_ic_kind(get_or<std::string>(ic, "kind", pde::ic_kind_name(c.pde.ic.kind)));
  c.pde.ic.k_min = get_or(ic, "k_min", c.pde.ic.k_min);
  c.pde.ic.k_max = get_or(ic, "k_max", c.pde.ic.k_max);
  c.pde.ic.seed = get_or(ic, "seed", c.pde.ic.seed);
  c.pde.ic.amplitude_scale = get_or(ic, "amplitude_scale", c.pde.ic.amplitude_scale);

  const json& g = section(j, "grid");
  c.grid.n = get_or(g, "n", c.grid.n);
  c.grid.time_points = get_or(g, "time_points", c.grid.time_points);

  const json& nw = section(j, "network");
  c.network.hidden = get_or(nw, "hidden", c.network.hidden);
  c.network.normalize_inputs = get_or(nw, "normalize_inputs", c.network.normalize_inputs);
  c.network.frequency_scale = get_or(nw, "frequency_scale", c.network.frequency_scale);

  const json& o = section(j, "optimizer");
  c.optimizer.initial_lr = get_or(o, "initial_lr", c.optimizer.initial_lr);
  c.optimizer.decay_rate = get_or(o, "decay_rate", c.optimizer.decay_rate);
  c.optimizer.transition_steps = get_or(o, "transition_steps", c.optimizer.transition_steps);
  c.optimizer.beta1 = get_or(o, "beta1", c.optimizer.beta1);
  c.optimizer.beta2 = get_or(o, "beta2", c.optimizer.beta2);
  c.optimizer.eps = get_or(o, "eps", c.optimizer.eps);

  const json& s = section(j, "strategy");
  c.strategy.kind = strategy::parse_kind(get_or<std::string>(s, "kind", strategy::kind_name(c.strategy.kind)));
  c.strategy.si.alpha = get_or(s, "alpha", c.strategy.si.alpha);
  c.strategy.si.beta = get_or(s, "beta", c.strategy.si.beta);
  c.strategy.wl.epsilon = get_or(s, "eps_wl", c.strategy.wl.epsilon);
  c.strategy.combine_si_wl = get_or(s, "combine_si_wl", c.strategy.combine_si_wl);

  const json& r = section(j, "residual");
  c.residual.dealias = parse_dealias(get_or<std::string>(r, "dealias", dealias_name(c.residual.dealias)));
  c.residual.include_nonlinear = get_or(r, "include_nonlinear", c.residual.include_nonlinear);
  c.residual.project_velocity = get_or(r, "project_velocity", c.residual.project_velocity);
  c.residual.project_nonlinear = get_or(r, "project_nonlinear", c.residual.project_nonlinear);

  const json& t = section(j, "training");
  c.training.iterations = get_or(t, "iterations", c.training.iterations);
  c.training.residual_batch = get_or(t, "residual_batch", c.training.residual_batch);
  c.training.ic_batch = get_or(t, "ic_batch", c.training.ic_batch);
  c.training.time_slices = get_or(t, "time_slices", c.training.time_slices);
  c.training.ic_weight = get_or(t, "ic_weight", c.training.ic_weight);
  c.training.seed = get_or(t, "seed", c.training.seed);
  c.training.history_every = get_or(t, "history_every", c.training.history_every);

  const json& e = section(j, "evaluation");
  c.eval_times = get_or(e, "times", c.eval_times);
  c.reference_dt = get_or(e, "reference_dt", c.reference_dt);
  c.output_dir = get_or<std::string>(j, "output_dir", "");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() {
  return {"diffusion", "convection_diffusion", "hyper_diffusion", "heat_2d", "heat_2d_random",
          "heat_3d", "burgers", "ns_taylor_green", "ns_random"};
}

ExperimentConfig desk_preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "diffusion" || name == "convection_diffusion" || name == "hyper_diffusion") {
    if (name == "diffusion") c.pde = pde::diffusion(5);
    if (name == "convection_diffusion") c.pde = pde::convection_diffusion(6);
    if (name == "hyper_diffusion") c.pde = pde::hyper_diffusion(2, 5);
    // Integer wavenumbers as inputs and a heavier IC term; with 2/N scaling
    // the stiff high modes pull the net onto the zero solution.
    c.grid.n = 32;
    c.network.frequency_scale = 1.0;
    c.training.ic_weight = 100.0;
  } else if (name == "heat_2d") {
    c.pde = pde::heat_2d(10);
    c.grid = {32, 10};
    c.training.residual_batch = 256;
  } else if (name == "heat_2d_random") {
    c.pde = pde::heat_2d_random(0);
    c.grid = {32, 6};
    c.training.residual_batch = 256;
  } else if (name == "heat_3d") {
    c.pde = pde::heat_3d(5);
    c.grid = {16, 10};
    c.training.residual_batch = 256;
  } else if (name == "burgers") {
    c.pde = pde::burgers(3);
    // The IC term is in coefficient units and the residual in physical
    // units, hence the large IC weight.
    c.grid = {32, 11};
    c.training.iterations = 60000;
    c.training.ic_weight = 1000.0;
    c.training.time_slices = 2;
    c.reference_dt = 1e-4;
  } else if (name == "ns_taylor_green") {
    c.pde = pde::navier_stokes_taylor_green();
    c.grid = {32, 11};
    c.training.iterations = 5000;
    c.training.time_slices = 1;
    c.reference_dt = 1e-3;
  } else if (name == "ns_random") {
    c.pde = pde::navier_stokes_random(0);
    c.grid = {32, 11};
    c.training.iterations = 5000;
    c.training.time_slices = 1;
    c.reference_dt = 1e-3;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  const double T = c.pde.final_time;
  c.eval_times = {0.5 * T, T};
  return c;
}

ExperimentConfig paper_preset(const std::string& name) {
  ExperimentConfig c = desk_preset(name);
  c.network.hidden.assign(10, 100);
  c.network.frequency_scale = 0.0;
  c.training.ic_weight = 1.0;
  c.training.residual_batch = 1000;
  if (c.pde.dims() == 1) {
    c.grid.n = 100;
    c.training.iterations = 500000;
  } else {
    c.grid.n = 100;
    c.training.iterations = 1000000;
  }
  if (name == "diffusion") c.pde = pde::diffusion(23);
  if (name == "heat_3d") c.training.residual_batch = 2000;
  return c;
}

// ---------------------------------------------------------------------------
// Metrics and references

double relative_l2(const PhysicalField& pred, const PhysicalField& target) {
  if (pred.samples.size() != target.samples.size() || pred.dims != target.dims || pred.n != target.n) {
    throw ShapeError("relative_l2 needs matching shapes");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.samples.size(); ++i) {
    const double d = pred.samples[i] - target.samples[i];
    num += d * d;
    den += target.samples[i] * target.samples[i];
  }
  if (den == 0.0) throw UndefinedMetricError("relative error of a zero target is undefined");
  return std::sqrt(num / den);
}

std::vector<PhysicalField> reference_fields(const ExperimentConfig& cfg) {
  const auto times = cfg.resolved_eval_times();
  if (cfg.pde.ic.kind == pde::InitialCondition::Kind::taylor_green) {
    std::vector<PhysicalField> out;
    for (double t : times) out.push_back(reference::taylor_green(t, cfg.grid.n, cfg.pde.nu));
    return out;
  }
  return reference::solve_reference(cfg.pde, cfg.grid.n, cfg.reference_dt, times);
}

std::vector<double> evaluate_errors(const ExperimentConfig& cfg, const nn::MlpNetwork& net,
                                    const std::vector<PhysicalField>& targets) {
  const HermitianLayout layout(cfg.pde.dims(), cfg.grid.n);
  const pde::SpectralModel model(net, cfg.pde.dims(), cfg.pde.components(),
                                 input_scaling(cfg));
  const auto times = cfg.resolved_eval_times();
  if (targets.size() != times.size()) throw ShapeError("one target per evaluation time is required");
  std::vector<double> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.push_back(relative_l2(pde::predict_field(model, layout, times[i]), targets[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

class Sampler {
 public:
  Sampler(const ExperimentConfig& cfg, const HermitianLayout& layout)
      : cfg_(cfg), layout_(layout), rng_(derive_seed(cfg.training.seed)) {
    const int nt = cfg.grid.time_points;
    for (int i = 0; i < nt; ++i) times_.push_back(cfg.pde.final_time * i / (nt - 1));
    const auto& reps = layout.representatives();
    const bool si = cfg.strategy.kind == strategy::Kind::si ||
                    (cfg.strategy.kind == strategy::Kind::wl && cfg.strategy.combine_si_wl);
    const auto pdf = si ? strategy::si_pdf(reps, cfg.pde.dims(), cfg.strategy.si)
                        : strategy::uniform_pdf(reps.size());
    freq_dist_ = std::discrete_distribution<std::size_t>(pdf.begin(), pdf.end());
    time_dist_ = std::uniform_int_distribution<std::size_t>(0, times_.size() - 1);
  }

  std::size_t draw_frequency() { return freq_dist_(rng_); }
  double draw_time() { return times_[time_dist_(rng_)]; }

  void linear_batch(pde::CollocationSet& c) {
    const auto& reps = layout_.representatives();
    const std::size_t batch = cfg_.training.residual_batch;
    c.times.clear();
    c.freqs.clear();
    if (cfg_.strategy.kind == strategy::Kind::wl && !cfg_.strategy.combine_si_wl) {
      // Every shell is complete; each point still gets its own time so the
      // time coverage matches the sampled strategies.
      const std::size_t copies = std::max<std::size_t>(1, batch / reps.size());
      for (std::size_t s = 0; s < copies; ++s) {
        for (const auto& k : reps) {
          c.times.push_back(draw_time());
          c.freqs.push_back(k);
        }
      }
    } else {
      for (std::size_t i = 0; i < batch; ++i) {
        c.times.push_back(draw_time());
        c.freqs.push_back(reps[draw_frequency()]);
      }
    }
    c.shell_scale = static_cast<double>(reps.size()) / static_cast<double>(c.freqs.size());
  }

  void time_slices(pde::CollocationSet& c) {
    c.times.clear();
    c.freqs.clear();
    for (std::size_t i = 0; i < cfg_.training.time_slices; ++i) c.times.push_back(draw_time());
  }

  std::vector<std::size_t> ic_indices() {
    const std::size_t count = cfg_.training.ic_batch;
    std::vector<std::size_t> out;
    if (count == 0) {
      out.resize(layout_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    } else {
      for (std::size_t i = 0; i < count; ++i) out.push_back(draw_frequency());
    }
    return out;
  }

 private:
  static std::uint64_t derive_seed(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  }

  const ExperimentConfig& cfg_;
  const HermitianLayout& layout_;
  std::mt19937_64 rng_;
  std::vector<double> times_;
  std::discrete_distribution<std::size_t> freq_dist_;
  std::uniform_int_distribution<std::size_t> time_dist_;
};

// Series coefficients of the initial condition at every representative.
std::vector<Complex> ic_table(const ExperimentConfig& cfg, const HermitianLayout& layout) {
  const auto full = reference::initial_spectrum(cfg.pde, cfg.grid.n);
  const std::size_t reps = layout.size();
  const std::size_t size = full.grid.size();
  const auto comps = static_cast<std::size_t>(full.components);
  std::vector<Complex> table(reps * comps);
  std::vector<Complex> rep(reps);
  for (std::size_t c = 0; c < comps; ++c) {
    layout.gather(full.component(static_cast<int>(c)), rep);
    for (std::size_t r = 0; r < reps; ++r) {
      Complex v = rep[r] / static_cast<double>(size);
      if (layout.self_conjugate(r)) v = Complex(v.real(), 0.0);
      table[r * comps + c] = v;
    }
  }
  return table;
}

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,total_loss,ic_loss,residual_loss,lr\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.total << ',' << r.ic << ',' << r.residual << ',' << r.lr << '\n';
  }
}

void write_errors(const std::filesystem::path& path, const std::vector<double>& times,
                  const std::vector<double>& errors) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  json j{{"times", times}, {"relative_l2", errors}};
  out << j.dump(2) << '\n';
}

void write_diagnostic(const ExperimentConfig& cfg, std::uint64_t iteration, const pde::LossBreakdown& loss,
                      const std::vector<HistoryRow>& history, const std::string& message) {
  if (cfg.output_dir.empty()) return;
  std::filesystem::create_directories(cfg.output_dir);
  json j;
  j["message"] = message;
  j["iteration"] = iteration;
  j["loss"] = {{"total", loss.total}, {"ic", loss.ic_term}, {"residual", loss.residual_term}};
  j["shell_residuals"] = loss.shell_residuals;
  json rows = json::array();
  const std::size_t first = history.size() > 10 ? history.size() - 10 : 0;
  for (std::size_t i = first; i < history.size(); ++i) {
    rows.push_back({history[i].iteration, history[i].total, history[i].ic, history[i].residual, history[i].lr});
  }
  j["recent_history"] = rows;
  j["config"] = to_json(cfg);
  std::ofstream out(cfg.output_dir / "diagnostic.json");
  out << j.dump(2) << '\n';
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const int dims = cfg.pde.dims();
  const int comps = cfg.pde.components();
  const HermitianLayout layout(dims, cfg.grid.n);

  ExperimentResult result;
  result.net = nn::init_xavier(cfg.layer_sizes(), cfg.training.seed);
  nn::MlpNetwork& net = result.net;
  nn::OptimizerState opt = nn::make_optimizer(net, cfg.optimizer);
  const pde::SpectralModel model(net, dims, comps, input_scaling(cfg));

  Sampler sampler(cfg, layout);
  const auto targets_by_rep = ic_table(cfg, layout);
  const auto& reps = layout.representatives();
  const bool fixed_ic = cfg.training.ic_batch == 0;

  pde::CollocationSet colloc;
  colloc.ic_weight = cfg.training.ic_weight;
  auto fill_ic = [&] {
    const auto idx = sampler.ic_indices();
    colloc.ic_freqs.clear();
    colloc.ic_targets.clear();
    for (std::size_t r : idx) {
      colloc.ic_freqs.push_back(reps[r]);
      for (int c = 0; c < comps; ++c) colloc.ic_targets.push_back(targets_by_rep[r * static_cast<std::size_t>(comps) + static_cast<std::size_t>(c)]);
    }
  };
  auto fill_residual = [&] {
    if (cfg.pde.is_linear()) {
      sampler.linear_batch(colloc);
    } else {
      sampler.time_slices(colloc);
    }
  };
  if (fixed_ic) fill_ic();

  std::vector<double> grads(net.params.size());
  const std::uint64_t iterations = cfg.training.iterations;
  pde::LossBreakdown loss;
  for (std::uint64_t it = 0; it <= iterations; ++it) {
    if (!fixed_ic) fill_ic();
    fill_residual();
    const bool train = it < iterations;
    std::fill(grads.begin(), grads.end(), 0.0);
    loss = pde::total_loss(model, cfg.pde, layout, colloc, cfg.strategy, cfg.residual,
                           train ? std::span<double>(grads) : std::span<double>());
    if (!std::isfinite(loss.total)) {
      const std::string msg = "non-finite loss at iteration " + std::to_string(it);
      write_diagnostic(cfg, it, loss, result.history, msg);
      throw TrainingDivergedError(msg);
    }
    if (it % cfg.training.history_every == 0 || it == iterations) {
      result.history.push_back({it, loss.total, loss.ic_term, loss.residual_term,
                                nn::learning_rate(cfg.optimizer, opt.step)});
    }
    if (!train) break;
    try {
      nn::adam_step(net, grads, opt);
    } catch (const TrainingDivergedError& e) {
      write_diagnostic(cfg, it, loss, result.history, e.what());
      throw;
    }
  }

  const auto targets = reference_fields(cfg);
  result.eval_times = cfg.resolved_eval_times();
  result.errors = evaluate_errors(cfg, net, targets);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    save_config(cfg, cfg.output_dir / "config.json");
    write_history(cfg.output_dir / "history.csv", result.history);
    write_errors(cfg.output_dir / "errors.json", result.eval_times, result.errors);
    result.checkpoint = cfg.output_dir / "checkpoint.bin";
    nn::save_checkpoint(result.checkpoint, net, opt.step);
    std::vector<PhysicalField> predictions;
    for (double t : result.eval_times) predictions.push_back(pde::predict_field(model, layout, t));
    reference::write_snapshots(cfg.output_dir / "prediction", predictions, result.eval_times, cfg.name + " prediction");
    reference::write_snapshots(cfg.output_dir / "reference", targets, result.eval_times, cfg.name + " reference");
  }
  return result;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw ContractViolation("cannot summarize an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  Summary s;
  s.min = values.front();
  s.max = values.back();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

RepeatResult run_repeats(const ExperimentConfig& cfg, int repeats) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  RepeatResult out;
  for (int r = 0; r < repeats; ++r) {
    ExperimentConfig c = cfg;
    c.training.seed = cfg.training.seed + static_cast<std::uint64_t>(r);
    if (!cfg.output_dir.empty()) c.output_dir = cfg.output_dir / ("seed_" + std::to_string(c.training.seed));
    out.runs.push_back(run_experiment(c));
    out.last_errors.push_back(out.runs.back().errors.back());
  }
  out.summary = summarize(out.last_errors);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

void check_axis(const ExperimentConfig& base, const std::string& axis) {
  if (axis == "p") {
    if (base.pde.variant != pde::Variant::hyper_diffusion_1d) throw ConfigError("axis p needs a hyper-diffusion PDE");
  } else if (axis == "N") {
    if (base.pde.ic.kind != pde::InitialCondition::Kind::sine_sum) throw ConfigError("axis N needs a sine-sum initial condition");
  } else if (axis == "alpha" || axis == "beta") {
    if (base.strategy.kind != strategy::Kind::si) throw ConfigError("axis " + axis + " needs the SI strategy");
  } else if (axis == "eps_wl") {
    if (base.strategy.kind != strategy::Kind::wl) throw ConfigError("axis eps_wl needs the WL strategy");
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
}

int positive_integer(double value, const std::string& axis) {
  const long v = std::lround(value);
  if (v < 1 || std::abs(value - static_cast<double>(v)) > 1e-12) throw ConfigError(axis + " must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis, double value) {
  check_axis(base, axis);
  ExperimentConfig c = base;
  if (axis == "p") {
    c.pde.order = positive_integer(value, axis);
    c.pde.epsilon = std::pow(0.2, c.pde.order);
  } else if (axis == "N") {
    c.pde.ic.k_max = c.pde.ic.k_min + positive_integer(value, axis) - 1;
  } else if (axis == "alpha") {
    c.strategy.si.alpha = value;
  } else if (axis == "beta") {
    c.strategy.si.beta = value;
  } else {
    c.strategy.wl.epsilon = value;
  }
  std::ostringstream tag;
  tag << axis << '_' << value;
  c.name = base.name + "_" + tag.str();
  if (!base.output_dir.empty()) c.output_dir = base.output_dir / tag.str();
  return c;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                const std::vector<double>& values) {
  check_axis(base, axis);
  std::vector<SweepRow> rows;
  for (double v : values) rows.push_back({axis, v, run_experiment(apply_axis(base, axis, v))});
  return rows;
}

void write_sweep_table(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "axis,value,final_time_error,wall_seconds\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.axis << ',' << r.value << ',' << r.result.errors.back() << ',' << r.result.wall_seconds << '\n';
  }
}

// ---------------------------------------------------------------------------
// Cost

std::vector<CostRow> measure_residual_cost(const ExperimentConfig& cfg, const std::vector<int>& orders,
                                           int repetitions) {
  if (cfg.pde.variant != pde::Variant::hyper_diffusion_1d) throw ConfigError("cost measurement needs a hyper-diffusion PDE");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  cfg.validate();
  const HermitianLayout layout(1, cfg.grid.n);
  const nn::MlpNetwork net = nn::init_xavier(cfg.layer_sizes(), cfg.training.seed);
  Sampler sampler(cfg, layout);
  pde::CollocationSet colloc;
  sampler.linear_batch(colloc);
  const auto targets = ic_table(cfg, layout);
  colloc.ic_freqs = layout.representatives();
  colloc.ic_targets = targets;

  std::vector<double> grads(net.params.size());
  auto evaluate = [&](int p) {
    pde::PdeSpec spec = cfg.pde;
    spec.order = p;
    spec.epsilon = std::pow(0.2, p);
    const pde::SpectralModel model(net, 1, 1, input_scaling(cfg));
    std::fill(grads.begin(), grads.end(), 0.0);
    return pde::total_loss(model, spec, layout, colloc, cfg.strategy, cfg.residual, grads).total;
  };
  using clock = std::chrono::steady_clock;

  // Calibrate the number of evaluations per timing so one sample takes
  // roughly 20 ms.
  int per_sample = 1;
  for (;;) {
    const auto t0 = clock::now();
    for (int i = 0; i < per_sample; ++i) evaluate(orders.empty() ? 2 : orders.front());
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    if (dt > 0.02 || per_sample >= (1 << 16)) break;
    per_sample *= 2;
  }

  std::vector<std::vector<double>> samples(orders.size());
  volatile double sink = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    for (std::size_t o = 0; o < orders.size(); ++o) {
      const auto t0 = clock::now();
      for (int i = 0; i < per_sample; ++i) sink = sink + evaluate(orders[o]);
      samples[o].push_back(std::chrono::duration<double>(clock::now() - t0).count() / per_sample);
    }
  }
  std::vector<CostRow> rows;
  for (std::size_t o = 0; o < orders.size(); ++o) rows.push_back({orders[o], summarize(samples[o]).median});
  return rows;
}

}  // namespace sinn::harness
