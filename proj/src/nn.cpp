#include "sinn/nn.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "sinn/errors.hpp"
#include "sinn/kernels.hpp"

namespace sinn::nn {

void validate_layer_sizes(const std::vector<int>& sizes) {
  if (sizes.empty()) throw ConfigError("layer size list is empty");
  if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("layer sizes must be positive");
  }
}

std::size_t parameter_count(const std::vector<int>& sizes) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    count += static_cast<std::size_t>(sizes[l + 1]) * static_cast<std::size_t>(sizes[l] + 1);
  }
  return count;
}

std::size_t MlpNetwork::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(layer_sizes[l + 1]) * static_cast<std::size_t>(layer_sizes[l] + 1);
  }
  return off;
}

std::size_t MlpNetwork::bias_offset(std::size_t layer) const {
  return weight_offset(layer) +
         static_cast<std::size_t>(layer_sizes[layer + 1]) * static_cast<std::size_t>(layer_sizes[layer]);
}

MlpNetwork init_xavier(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  validate_layer_sizes(layer_sizes);
  MlpNetwork net;
  net.layer_sizes = layer_sizes;
  net.seed = seed;
  net.params.assign(parameter_count(layer_sizes), 0.0);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    double* w = net.params.data() + net.weight_offset(l);
    for (std::size_t i = 0; i < static_cast<std::size_t>(fan_in) * fan_out; ++i) w[i] = dist(rng);
  }
  return net;
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_prime(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

double silu_second(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
}

void forward_batch(const MlpNetwork& net, std::span<const double> inputs, std::size_t batch,
                   int t_index, ForwardCache& cache) {
  const std::size_t in_dim = static_cast<std::size_t>(net.input_dim());
  if (inputs.size() != batch * in_dim) throw ShapeError("input batch does not match input layer");
  if (t_index >= net.input_dim()) throw ShapeError("time index outside input layer");
  const auto& k = simd::kernels();
  const std::size_t layers = net.num_layers();
  const bool tangent = t_index >= 0;

  cache.batch = batch;
  cache.t_index = t_index;
  cache.z.resize(layers);
  cache.z_dot.resize(layers);
  cache.a.resize(layers + 1);
  cache.a_dot.resize(layers + 1);
  cache.a[0].assign(inputs.begin(), inputs.end());
  if (tangent) {
    cache.a_dot[0].assign(batch * in_dim, 0.0);
    for (std::size_t s = 0; s < batch; ++s) cache.a_dot[0][s * in_dim + static_cast<std::size_t>(t_index)] = 1.0;
  }

  for (std::size_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
    const double* w = net.params.data() + net.weight_offset(l);
    const double* b = net.params.data() + net.bias_offset(l);
    auto& z = cache.z[l];
    z.resize(batch * rows);
    k.dense_forward(w, b, cache.a[l].data(), z.data(), rows, cols, batch);
    auto& a = cache.a[l + 1];
    const bool hidden = l + 1 < layers;
    if (hidden) {
      a.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = silu(z[i]);
    } else {
      a = z;
    }
    if (tangent) {
      auto& zd = cache.z_dot[l];
      zd.resize(batch * rows);
      k.dense_forward(w, nullptr, cache.a_dot[l].data(), zd.data(), rows, cols, batch);
      auto& ad = cache.a_dot[l + 1];
      if (hidden) {
        ad.resize(zd.size());
        for (std::size_t i = 0; i < zd.size(); ++i) ad[i] = silu_prime(z[i]) * zd[i];
      } else {
        ad = zd;
      }
    }
  }
}

std::vector<double> forward(const MlpNetwork& net, std::span<const double> input) {
  ForwardCache cache;
  forward_batch(net, input, 1, -1, cache);
  return cache.a.back();
}

TangentOutput forward_with_t_tangent(const MlpNetwork& net, std::span<const double> input,
                                     int t_index) {
  if (t_index < 0) throw ShapeError("time index must be nonnegative");
  ForwardCache cache;
  forward_batch(net, input, 1, t_index, cache);
  return {cache.a.back(), cache.a_dot.back()};
}

void backward(const MlpNetwork& net, const ForwardCache& cache, std::span<const double> grad_values,
              std::span<const double> grad_tangents, std::span<double> grads) {
  const std::size_t batch = cache.batch;
  const std::size_t layers = net.num_layers();
  const auto out_dim = static_cast<std::size_t>(net.output_dim());
  const bool tangent = cache.t_index >= 0 && !grad_tangents.empty();
  if (grad_values.size() != batch * out_dim) throw ShapeError("value gradient shape mismatch");
  if (tangent && grad_tangents.size() != batch * out_dim) {
    throw ShapeError("tangent gradient shape mismatch");
  }
  if (grads.size() != net.params.size()) throw ShapeError("gradient buffer shape mismatch");
  if (cache.a.size() != layers + 1) throw ShapeError("forward cache does not match network");
  const auto& k = simd::kernels();

  std::vector<double> g_a(grad_values.begin(), grad_values.end());
  std::vector<double> g_ad;
  if (tangent) g_ad.assign(grad_tangents.begin(), grad_tangents.end());
  std::vector<double> g_z, g_zd;

  for (std::size_t l = layers; l-- > 0;) {
    const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
    const auto& z = cache.z[l];
    g_z.resize(batch * rows);
    if (tangent) g_zd.resize(batch * rows);

    if (l + 1 < layers) {
      for (std::size_t i = 0; i < g_z.size(); ++i) {
        const double d1 = silu_prime(z[i]);
        g_z[i] = g_a[i] * d1;
        if (tangent) {
          g_z[i] += g_ad[i] * silu_second(z[i]) * cache.z_dot[l][i];
          g_zd[i] = g_ad[i] * d1;
        }
      }
    } else {
      g_z = g_a;
      if (tangent) g_zd = g_ad;
    }

    double* gw = grads.data() + net.weight_offset(l);
    double* gb = grads.data() + net.bias_offset(l);
    k.outer_accumulate(g_z.data(), cache.a[l].data(), gw, rows, cols, batch);
    if (tangent) k.outer_accumulate(g_zd.data(), cache.a_dot[l].data(), gw, rows, cols, batch);
    for (std::size_t s = 0; s < batch; ++s) {
      for (std::size_t o = 0; o < rows; ++o) gb[o] += g_z[s * rows + o];
    }

    if (l > 0) {
      const double* w = net.params.data() + net.weight_offset(l);
      g_a.resize(batch * cols);
      k.dense_transpose(w, g_z.data(), g_a.data(), rows, cols, batch);
      if (tangent) {
        g_ad.resize(batch * cols);
        k.dense_transpose(w, g_zd.data(), g_ad.data(), rows, cols, batch);
      }
    }
  }
}

OptimizerState make_optimizer(const MlpNetwork& net, const AdamConfig& config) {
  OptimizerState state;
  state.config = config;
  state.m.assign(net.params.size(), 0.0);
  state.v.assign(net.params.size(), 0.0);
  return state;
}

double learning_rate(const AdamConfig& c, std::uint64_t step) {
  if (step == 0) return c.initial_lr;
  return c.initial_lr * std::pow(c.decay_rate, static_cast<double>(step) / c.transition_steps);
}

void adam_step(MlpNetwork& net, std::span<const double> grads, OptimizerState& state) {
  if (grads.size() != net.params.size() || state.m.size() != net.params.size()) {
    throw ShapeError("gradient / optimizer state shape mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw TrainingDivergedError("non-finite gradient");
  }
  const AdamConfig& c = state.config;
  const double lr = learning_rate(c, state.step);
  const double t = static_cast<double>(state.step + 1);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  simd::kernels().adam_update(net.params.data(), grads.data(), state.m.data(), state.v.data(),
                              net.params.size(), lr, c.beta1, c.beta2, c.eps, bc1, bc2);
  ++state.step;
}

namespace {

constexpr std::array<char, 8> kMagic{'S', 'I', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kActivationSilu = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = is.get();
    if (c == EOF) throw IoError("truncated checkpoint");
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net, std::uint64_t step) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, kActivationSilu);
  put_le<std::uint64_t>(os, net.seed);
  put_le<std::uint64_t>(os, step);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.layer_sizes.size()));
  for (int s : net.layer_sizes) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s));
  put_le<std::uint64_t>(os, net.params.size());
  for (double p : net.params) put_le<double>(os, p);
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw IoError("not a checkpoint file: " + path.string());
  if (get_le<std::uint32_t>(is) != kVersion) throw IoError("unsupported checkpoint version");
  if (get_le<std::uint32_t>(is) != kActivationSilu) throw IoError("unsupported activation tag");
  Checkpoint ck;
  ck.net.seed = get_le<std::uint64_t>(is);
  ck.step = get_le<std::uint64_t>(is);
  const auto layers = get_le<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < layers; ++i) {
    ck.net.layer_sizes.push_back(static_cast<int>(get_le<std::uint32_t>(is)));
  }
  validate_layer_sizes(ck.net.layer_sizes);
  const auto count = get_le<std::uint64_t>(is);
  if (count != parameter_count(ck.net.layer_sizes)) throw IoError("parameter count mismatch");
  ck.net.params.resize(count);
  for (auto& p : ck.net.params) p = get_le<double>(is);
  return ck;
}

}  // namespace sinn::nn
