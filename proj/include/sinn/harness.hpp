#pragma once
// Experiment configuration, the training loop and its artifacts.
//
// Artifacts written to ExperimentConfig::output_dir when it is set:
//   config.json       the resolved configuration
//   history.csv       iteration,total_loss,ic_loss,residual_loss,lr
//   errors.json       {"times": [...], "relative_l2": [...]}
//   checkpoint.bin    network parameters (see nn::save_checkpoint)
//   prediction.{bin,json}, reference.{bin,json}   physical snapshots
//   diagnostic.json   only when training diverges

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sinn/nn.hpp"
#include "sinn/pde.hpp"
#include "sinn/strategies.hpp"

namespace sinn::harness {

struct GridConfig {
  int n = 100;            // spatial points per axis
  int time_points = 100;  // uniform samples over [0, T]
};

struct NetworkConfig {
  std::vector<int> hidden = {64, 64, 64, 64};
  bool normalize_inputs = true;
  double frequency_scale = 0.0;  // > 0 overrides the 2/N frequency factor
};

struct TrainingConfig {
  std::uint64_t iterations = 30000;
  std::size_t residual_batch = 128;  // (t, k) points for linear PDEs
  std::size_t ic_batch = 0;          // 0: every representative frequency
  std::size_t time_slices = 2;       // per iteration for nonlinear PDEs
  double ic_weight = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t history_every = 100;
};

struct ExperimentConfig {
  std::string name = "experiment";
  pde::PdeSpec pde;
  GridConfig grid;
  NetworkConfig network;
  nn::AdamConfig optimizer;
  strategy::StrategyConfig strategy;
  pde::ResidualOptions residual;
  TrainingConfig training;
  std::vector<double> eval_times;  // empty: {T}
  double reference_dt = 1e-4;      // time step of nonlinear reference solves
  std::filesystem::path output_dir;

  std::vector<int> layer_sizes() const;
  std::vector<double> resolved_eval_times() const;
  // Throws ConfigError.
  void validate() const;
};

// Input scaling of the configured network (see pde::make_scaling).
pde::InputScaling input_scaling(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

// Named presets: diffusion, convection_diffusion, hyper_diffusion, heat_2d,
// heat_2d_random, heat_3d, burgers, ns_taylor_green, ns_random.
ExperimentConfig desk_preset(const std::string& name);
ExperimentConfig paper_preset(const std::string& name);
std::vector<std::string> preset_names();

struct HistoryRow {
  std::uint64_t iteration = 0;
  double total = 0.0;
  double ic = 0.0;
  double residual = 0.0;
  double lr = 0.0;
};

struct ExperimentResult {
  std::vector<double> eval_times;
  std::vector<double> errors;  // relative L2 per evaluation time
  std::vector<HistoryRow> history;
  double wall_seconds = 0.0;
  std::filesystem::path checkpoint;
  nn::MlpNetwork net;
};

// ||pred - target|| / ||target|| over all samples and components.
double relative_l2(const spectral::PhysicalField& pred, const spectral::PhysicalField& target);

// Ground truth at the configured evaluation times.
std::vector<spectral::PhysicalField> reference_fields(const ExperimentConfig& cfg);

// Relative L2 of a network against `targets` at the evaluation times.
std::vector<double> evaluate_errors(const ExperimentConfig& cfg, const nn::MlpNetwork& net,
                                    const std::vector<spectral::PhysicalField>& targets);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct Summary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(std::vector<double> values);

// Runs with seeds seed, seed + 1, ...; `last_error` of each run is the error
// at the final evaluation time.
struct RepeatResult {
  std::vector<double> last_errors;
  Summary summary;
  std::vector<ExperimentResult> runs;
};
RepeatResult run_repeats(const ExperimentConfig& cfg, int repeats);

struct SweepRow {
  std::string axis;
  double value = 0.0;
  ExperimentResult result;
};

// Axis is one of p, N, alpha, beta, eps_wl.
ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis, double value);
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                const std::vector<double>& values);
void write_sweep_table(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct CostRow {
  int order = 0;
  double seconds = 0.0;  // median wall time of one loss + gradient evaluation
};

// Hyper-diffusion only. Each order is timed over `repetitions` batches.
std::vector<CostRow> measure_residual_cost(const ExperimentConfig& cfg, const std::vector<int>& orders,
                                           int repetitions = 5);

}  // namespace sinn::harness
