// Command-line front end for training runs, sweeps and reference solves.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sinn/errors.hpp"
#include "sinn/harness.hpp"
#include "sinn/reference.hpp"

namespace {

using namespace sinn;

harness::ExperimentConfig load(const std::string& path, const std::string& output) {
  auto cfg = harness::load_config(path);
  if (!output.empty()) cfg.output_dir = output;
  return cfg;
}

void print_errors(const std::vector<double>& times, const std::vector<double>& errors) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::printf("t = %-10.6g relative_l2 = %.6e\n", times[i], errors[i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-domain neural PDE training lab"};
  app.require_subcommand(1);

  std::string config_path, output, checkpoint, axis, preset_name;
  std::vector<double> values;
  std::vector<int> orders;
  int repetitions = 5;
  bool paper_scale = false;

  auto* run = app.add_subcommand("run", "Train one experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "Override the output directory");

  auto* sweep = app.add_subcommand("sweep", "Train one run per axis value");
  sweep->add_option("--config", config_path, "Base config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "p | N | alpha | beta | eps_wl")->required();
  sweep->add_option("--values", values, "Axis values")->delimiter(',');
  sweep->add_option("--output", output, "Override the output directory");

  auto* solve = app.add_subcommand("solve-reference", "Write reference snapshots at the evaluation times");
  solve->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--output", output, "Override the output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against the reference");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* cost = app.add_subcommand("cost", "Time one loss + gradient evaluation per derivative order");
  cost->add_option("--config", config_path, "Hyper-diffusion config (JSON)")->required()->check(CLI::ExistingFile);
  cost->add_option("--orders", orders, "Derivative orders")->required()->delimiter(',');
  cost->add_option("--repetitions", repetitions, "Timed repetitions per order")->check(CLI::PositiveNumber);

  auto* preset = app.add_subcommand("preset", "Print a named preset config");
  preset->add_option("--name", preset_name, "Preset name")->required();
  preset->add_flag("--paper", paper_scale, "Paper-scale network and iteration count");
  preset->add_option("--output", output, "Output directory stored in the config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load(config_path, output);
      const auto result = harness::run_experiment(cfg);
      print_errors(result.eval_times, result.errors);
      std::printf("wall time %.2f s\n", result.wall_seconds);
      if (!result.checkpoint.empty()) std::printf("checkpoint %s\n", result.checkpoint.string().c_str());
    } else if (*sweep) {
      const auto cfg = load(config_path, output);
      const auto rows = harness::run_sweep(cfg, axis, values);
      std::printf("%-8s %-14s %-14s\n", "axis", "value", "error(T)");
      for (const auto& r : rows) std::printf("%-8s %-14.6g %-14.6e\n", r.axis.c_str(), r.value, r.result.errors.back());
      if (!cfg.output_dir.empty()) harness::write_sweep_table(cfg.output_dir / "sweep.csv", rows);
    } else if (*solve) {
      const auto cfg = load(config_path, output);
      if (cfg.output_dir.empty()) throw ConfigError("solve-reference needs an output directory");
      const auto fields = harness::reference_fields(cfg);
      reference::write_snapshots(cfg.output_dir / "reference", fields, cfg.resolved_eval_times(), cfg.name + " reference");
      std::printf("wrote %zu snapshots to %s\n", fields.size(), (cfg.output_dir / "reference.bin").string().c_str());
    } else if (*eval) {
      const auto cfg = load(config_path, "");
      const auto ckpt = nn::load_checkpoint(checkpoint);
      if (ckpt.net.layer_sizes != cfg.layer_sizes()) throw ShapeError("checkpoint network does not match the config");
      const auto errors = harness::evaluate_errors(cfg, ckpt.net, harness::reference_fields(cfg));
      print_errors(cfg.resolved_eval_times(), errors);
    } else if (*cost) {
      const auto cfg = load(config_path, "");
      const auto rows = harness::measure_residual_cost(cfg, orders, repetitions);
      std::printf("%-6s %-16s %-10s\n", "p", "seconds", "ratio");
      for (const auto& r : rows) std::printf("%-6d %-16.6e %-10.4f\n", r.order, r.seconds, r.seconds / rows.front().seconds);
    } else if (*preset) {
      auto cfg = paper_scale ? harness::paper_preset(preset_name) : harness::desk_preset(preset_name);
      if (!output.empty()) cfg.output_dir = output;
      std::cout << harness::to_json(cfg).dump(2) << '\n';
    }
  } catch (const sinn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
