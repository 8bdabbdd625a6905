#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sinn/errors.hpp"
#include "sinn/nn.hpp"

using namespace sinn;
using namespace sinn::nn;

namespace {

std::vector<int> random_sizes(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(1, 3), width(1, 8), in(2, 4), out(1, 3);
  std::vector<int> sizes{in(rng)};
  const int hidden = depth(rng) - 1;
  for (int i = 0; i < hidden; ++i) sizes.push_back(width(rng));
  sizes.push_back(2 * out(rng));
  return sizes;
}

// Random quadratic loss in the outputs and the time tangents:
//   L = sum a.v + 0.5 b v^2 + c.tau + 0.5 d tau^2
struct Quadratic {
  std::vector<double> a, b, c, d;

  Quadratic(std::size_t n, std::mt19937_64& rng) : a(n), b(n), c(n), d(n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      c[i] = u(rng);
      d[i] = u(rng);
    }
  }

  double operator()(const MlpNetwork& net, const std::vector<double>& x, std::size_t batch, int t) const {
    ForwardCache cache;
    forward_batch(net, x, batch, t, cache);
    const auto v = cache.values();
    const auto tau = cache.tangents();
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += a[i] * v[i] + 0.5 * b[i] * v[i] * v[i] + c[i] * tau[i] + 0.5 * d[i] * tau[i] * tau[i];
    return s;
  }
};

}  // namespace

TEST_CASE("layer size validation and parameter layout") {
  CHECK_THROWS_AS(validate_layer_sizes({}), ConfigError);
  CHECK_THROWS_AS(validate_layer_sizes({3}), ConfigError);
  CHECK_THROWS_AS(validate_layer_sizes({2, 0, 2}), ConfigError);
  CHECK_THROWS_AS(init_xavier({}, 0), ConfigError);
  CHECK(parameter_count({2, 3, 2}) == 2 * 3 + 3 + 3 * 2 + 2);
  const auto net = init_xavier({2, 3, 2}, 1);
  CHECK(net.weight_offset(0) == 0);
  CHECK(net.bias_offset(0) == 6);
  CHECK(net.weight_offset(1) == 9);
  CHECK(net.bias_offset(1) == 15);
}

TEST_CASE("Xavier initialization") {
  const auto a = init_xavier({2, 64, 64, 2}, 42);
  const auto b = init_xavier({2, 64, 64, 2}, 42);
  CHECK(a.params == b.params);
  CHECK(init_xavier({2, 64, 64, 2}, 43).params != a.params);
  const double bound = std::sqrt(6.0 / 128.0);
  CHECK(bound == doctest::Approx(0.2165).epsilon(1e-3));
  double largest = 0.0;
  for (int i = 0; i < 64 * 64; ++i) largest = std::max(largest, std::abs(a.params[a.weight_offset(1) + static_cast<std::size_t>(i)]));
  CHECK(largest <= bound);
  CHECK(largest > 0.9 * bound);
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    const auto rows = static_cast<std::size_t>(a.layer_sizes[l + 1]);
    for (std::size_t i = 0; i < rows; ++i) CHECK(a.params[a.bias_offset(l) + i] == 0.0);
  }
}

TEST_CASE("SiLU and its derivatives") {
  CHECK(silu(0.0) == 0.0);
  CHECK(silu(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  for (double x : {-30.0, -3.0, -0.4, 0.0, 0.7, 5.0, 40.0}) {
    CHECK(oracle::rel_diff(silu_prime(x), oracle::central_difference(silu, x, 1e-5)) < 1e-8);
    CHECK(oracle::rel_diff(silu_second(x), oracle::central_difference(silu_prime, x, 1e-5)) < 1e-7);
  }
}

TEST_CASE("forward pass on hand-built networks") {
  MlpNetwork zero = init_xavier({3, 5, 2}, 0);
  std::fill(zero.params.begin(), zero.params.end(), 0.0);
  for (double v : forward(zero, std::vector<double>{0.3, -1.0, 2.0})) CHECK(v == 0.0);

  MlpNetwork lin = init_xavier({1, 1}, 0);
  lin.params = {2.5, -0.75};
  CHECK(forward(lin, std::vector<double>{3.0})[0] == doctest::Approx(6.75));
  CHECK_THROWS_AS(forward(lin, std::vector<double>{1.0, 2.0}), ShapeError);

  MlpNetwork deep = init_xavier({1, 1, 1}, 0);
  deep.params = {1.0, 0.0, 1.0, 0.0};
  CHECK(forward(deep, std::vector<double>{1.0})[0] == doctest::Approx(0.7310585786300049));
}

TEST_CASE("time tangent of hand-built networks") {
  MlpNetwork lin = init_xavier({2, 2}, 0);
  lin.params = {1.0, 2.0, 3.0, 4.0, 0.0, 0.0};
  const auto t = forward_with_t_tangent(lin, std::vector<double>{0.5, 0.25}, 1);
  CHECK(t.value.size() == t.t_tangent.size());
  CHECK(t.t_tangent[0] == 2.0);
  CHECK(t.t_tangent[1] == 4.0);

  auto net = init_xavier({2, 6, 6, 2}, 9);
  // Only the first layer sees t directly; zeroing its t column is enough.
  for (int r = 0; r < 6; ++r) net.params[net.weight_offset(0) + static_cast<std::size_t>(r * 2)] = 0.0;
  const auto c = forward_with_t_tangent(net, std::vector<double>{0.8, -0.1}, 0);
  for (double v : c.t_tangent) CHECK(v == 0.0);
}

TEST_CASE("time tangents match finite differences on random networks") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int trials = 0;
  double worst = 0.0;
  for (; trials < 250; ++trials) {
    const auto sizes = random_sizes(rng);
    const auto net = init_xavier(sizes, rng());
    std::vector<double> x(static_cast<std::size_t>(sizes[0]));
    for (auto& v : x) v = u(rng);
    const int ti = static_cast<int>(rng() % x.size());
    const auto out = forward_with_t_tangent(net, x, ti);
    for (std::size_t o = 0; o < out.value.size(); ++o) {
      const auto g = [&](double s) {
        auto y = x;
        y[static_cast<std::size_t>(ti)] = s;
        return forward(net, y)[o];
      };
      worst = std::max(worst, oracle::rel_diff(out.t_tangent[o], oracle::central_difference(g, x[static_cast<std::size_t>(ti)], 1e-5), 1e-6));
    }
  }
  CHECK(trials >= 200);
  CHECK(worst <= 1e-6);
}

TEST_CASE("parameter gradients through values and tangents match finite differences") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int trials = 0;
  for (; trials < 220; ++trials) {
    const auto sizes = random_sizes(rng);
    auto net = init_xavier(sizes, rng());
    for (auto& p : net.params) p += 0.1 * u(rng);  // nonzero biases too
    const std::size_t batch = 1 + rng() % 4;
    const int ti = static_cast<int>(rng() % static_cast<std::uint64_t>(sizes[0]));
    std::vector<double> x(batch * static_cast<std::size_t>(sizes[0]));
    for (auto& v : x) v = u(rng);
    const Quadratic loss(batch * static_cast<std::size_t>(sizes.back()), rng);

    ForwardCache cache;
    forward_batch(net, x, batch, ti, cache);
    const auto v = cache.values();
    const auto tau = cache.tangents();
    std::vector<double> gv(v.size()), gt(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      gv[i] = loss.a[i] + loss.b[i] * v[i];
      gt[i] = loss.c[i] + loss.d[i] * tau[i];
    }
    std::vector<double> grads(net.params.size(), 0.0);
    backward(net, cache, gv, gt, grads);

    for (std::size_t p = 0; p < net.params.size(); ++p) {
      const double saved = net.params[p];
      const auto g = [&](double s) {
        net.params[p] = s;
        return loss(net, x, batch, ti);
      };
      const double fd = oracle::central_difference(g, saved, 1e-4);
      net.params[p] = saved;
      worst = std::max(worst, oracle::rel_diff(grads[p], fd, 1e-6));
    }
  }
  CHECK(trials >= 200);
  CHECK(worst <= 1e-5);
}

TEST_CASE("backward on degenerate and scaled losses") {
  MlpNetwork zero = init_xavier({2, 4, 2}, 0);
  std::fill(zero.params.begin(), zero.params.end(), 0.0);
  const std::vector<double> x{0.3, 0.6};
  ForwardCache cache;
  forward_batch(zero, x, 1, -1, cache);
  // 0.5 |output|^2 has zero upstream gradient at a zero output.
  std::vector<double> gv(cache.values().begin(), cache.values().end());
  std::vector<double> grads(zero.params.size(), 0.0);
  backward(zero, cache, gv, {}, grads);
  for (double g : grads) CHECK(g == 0.0);
  // Unit upstream gradient reaches only the output bias of a zero network.
  std::fill(grads.begin(), grads.end(), 0.0);
  backward(zero, cache, std::vector<double>{1.0, 1.0}, {}, grads);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const bool out_bias = i >= zero.bias_offset(1);
    CHECK(grads[i] == (out_bias ? 1.0 : 0.0));
  }

  auto net = init_xavier({2, 5, 2}, 3);
  forward_batch(net, x, 1, 0, cache);
  std::vector<double> g1(net.params.size(), 0.0), g2(net.params.size(), 0.0);
  backward(net, cache, std::vector<double>{0.4, -0.2}, std::vector<double>{1.0, 0.5}, g1);
  backward(net, cache, std::vector<double>{0.8, -0.4}, std::vector<double>{2.0, 1.0}, g2);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(2.0 * g1[i]));

  CHECK_THROWS_AS(backward(net, cache, std::vector<double>{1.0}, {}, g1), ShapeError);
}

TEST_CASE("learning rate schedule") {
  AdamConfig cfg;
  CHECK(learning_rate(cfg, 0) == 1e-3);
  CHECK(learning_rate(cfg, 10000) == doctest::Approx(9.5e-4).epsilon(1e-12));
  CHECK(learning_rate(cfg, 5000) == doctest::Approx(1e-3 * std::sqrt(0.95)).epsilon(1e-12));
  double prev = learning_rate(cfg, 0);
  for (std::uint64_t s = 1; s < 100000; s += 997) {
    const double lr = learning_rate(cfg, s);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("Adam steps") {
  auto net = init_xavier({2, 3, 2}, 5);
  const auto before = net.params;
  auto state = make_optimizer(net);
  CHECK(state.m.size() == net.params.size());
  CHECK(state.step == 0);

  std::vector<double> g(net.params.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 2 ? -1.0 : 1.0) * (0.1 + static_cast<double>(i));
  adam_step(net, g, state);
  CHECK(state.step == 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double delta = net.params[i] - before[i];
    CHECK(std::abs(delta) == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(delta * g[i] < 0.0);
  }

  auto still = init_xavier({2, 3, 2}, 5);
  auto s2 = make_optimizer(still);
  adam_step(still, std::vector<double>(still.params.size(), 0.0), s2);
  CHECK(still.params == before);

  auto bad = g;
  bad[3] = std::nan("");
  const auto snapshot = net.params;
  CHECK_THROWS_AS(adam_step(net, bad, state), TrainingDivergedError);
  CHECK(net.params == snapshot);
}

TEST_CASE("fixed seed and data order give bit-identical training") {
  auto run = [] {
    auto net = init_xavier({2, 8, 2}, 11);
    auto st = make_optimizer(net);
    std::vector<double> x{0.1, 0.5, -0.3, 0.2};
    for (int it = 0; it < 25; ++it) {
      ForwardCache cache;
      forward_batch(net, x, 2, 0, cache);
      std::vector<double> gv(cache.values().begin(), cache.values().end());
      std::vector<double> gt(cache.tangents().begin(), cache.tangents().end());
      std::vector<double> grads(net.params.size(), 0.0);
      backward(net, cache, gv, gt, grads);
      adam_step(net, grads, st);
    }
    return net.params;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "sinn_test_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = dir / "net.bin";
  const auto net = init_xavier({3, 7, 4}, 99);
  save_checkpoint(path, net, 1234);
  const auto ck = load_checkpoint(path);
  CHECK(ck.step == 1234);
  CHECK(ck.net.layer_sizes == net.layer_sizes);
  CHECK(ck.net.params == net.params);
  CHECK(ck.net.seed == 99);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}
