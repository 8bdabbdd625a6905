#pragma once
// Dense SiLU network u(t, k) -> (Re, Im) channels with:
//   * a forward tangent seeded on the time input (exact d output / dt),
//   * reverse-mode gradients that also flow through that tangent,
//   * Adam with a continuous exponential learning-rate decay.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sinn::nn {

struct MlpNetwork {
  std::vector<int> layer_sizes;
  // Per layer l: W_l (out x in, row-major) followed by b_l (out).
  std::vector<double> params;
  std::uint64_t seed = 0;

  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
};

// Throws ConfigError for an empty or degenerate list.
void validate_layer_sizes(const std::vector<int>& layer_sizes);
std::size_t parameter_count(const std::vector<int>& layer_sizes);

// Xavier-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpNetwork init_xavier(const std::vector<int>& layer_sizes, std::uint64_t seed);

double silu(double x);
double silu_prime(double x);
double silu_second(double x);

std::vector<double> forward(const MlpNetwork& net, std::span<const double> input);

struct TangentOutput {
  std::vector<double> value;
  std::vector<double> t_tangent;
};

TangentOutput forward_with_t_tangent(const MlpNetwork& net, std::span<const double> input,
                                     int t_index);

// Activations kept for the reverse pass of one batch.
struct ForwardCache {
  std::size_t batch = 0;
  int t_index = -1;  // negative: no tangent propagated
  std::vector<std::vector<double>> z, z_dot;  // pre-activations per layer
  std::vector<std::vector<double>> a, a_dot;  // a[0] = inputs

  std::span<const double> values() const { return a.back(); }
  std::span<const double> tangents() const { return a_dot.back(); }
};

// inputs is batch x input_dim, row-major.
void forward_batch(const MlpNetwork& net, std::span<const double> inputs, std::size_t batch,
                   int t_index, ForwardCache& cache);

// Accumulates d loss / d params into `grads` (same layout as params) given
// d loss / d values and d loss / d tangents (batch x output_dim each).
// grad_tangents may be empty when the cache carries no tangent.
void backward(const MlpNetwork& net, const ForwardCache& cache, std::span<const double> grad_values,
              std::span<const double> grad_tangents, std::span<double> grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double initial_lr = 1e-3;
  double decay_rate = 0.95;
  double transition_steps = 10000.0;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

OptimizerState make_optimizer(const MlpNetwork& net, const AdamConfig& config = {});

// initial_lr * decay_rate^(step / transition_steps)
double learning_rate(const AdamConfig& config, std::uint64_t step);

// Throws TrainingDivergedError on a non-finite gradient (parameters untouched).
void adam_step(MlpNetwork& net, std::span<const double> grads, OptimizerState& state);

struct Checkpoint {
  MlpNetwork net;
  std::uint64_t step = 0;
};

// Layout (all little-endian):
//   char[8] "SINNCKPT" | u32 version (1) | u32 activation (1 = SiLU)
//   u64 seed | u64 step | u32 layer count L | u32 sizes[L]
//   u64 parameter count P | f64 params[P]
void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net, std::uint64_t step);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sinn::nn
