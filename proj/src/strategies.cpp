#include "sinn/strategies.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sinn/errors.hpp"

namespace sinn::strategy {

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::uniform: return "uniform";
    case Kind::si: return "si";
    case Kind::wl: return "wl";
  }
  return "?";
}

Kind parse_kind(const std::string& name) {
  if (name == "uniform") return Kind::uniform;
  if (name == "si") return Kind::si;
  if (name == "wl") return Kind::wl;
  throw ConfigError("unknown strategy: " + name);
}

double si_weight(int l1, const SiConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0) throw ConfigError("SI alpha and beta must be >= 0");
  const double denom = static_cast<double>(l1) + cfg.beta;
  if (denom == 0.0) {
    if (cfg.alpha == 0.0) throw UndefinedDensityError("SI density undefined at k = 0 with alpha = beta = 0");
    return 1.0 + cfg.alpha;
  }
  return 1.0 / denom + cfg.alpha;
}

std::vector<double> si_pdf(std::span<const spectral::Wavevector> freqs, int dims, const SiConfig& cfg) {
  if (freqs.empty()) throw DegenerateGridError("no frequencies to sample");
  std::vector<double> p(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) p[i] = si_weight(spectral::l1_norm(freqs[i], dims), cfg);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> uniform_pdf(std::size_t count) {
  if (count == 0) throw DegenerateGridError("no frequencies to sample");
  return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

std::vector<std::size_t> sample_indices(std::span<const double> pdf, std::size_t count,
                                        std::mt19937_64& rng) {
  if (count < 1) throw ContractViolation("sample count must be >= 1");
  std::discrete_distribution<std::size_t> dist(pdf.begin(), pdf.end());
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = dist(rng);
  return out;
}

std::vector<spectral::Wavevector> sample_frequencies(std::span<const spectral::Wavevector> freqs,
                                                     int dims, const SiConfig& cfg,
                                                     std::size_t count, std::mt19937_64& rng) {
  const auto pdf = si_pdf(freqs, dims, cfg);
  const auto idx = sample_indices(pdf, count, rng);
  std::vector<spectral::Wavevector> out;
  out.reserve(count);
  for (std::size_t i : idx) out.push_back(freqs[i]);
  return out;
}

std::vector<double> wl_weights(const ShellLosses& shells, double epsilon) {
  std::vector<double> w(shells.size());
  double prefix = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    if (shells[i] < 0.0) throw ContractViolation("shell loss must be nonnegative");
    w[i] = std::exp(-epsilon * prefix);
    prefix += shells[i];
  }
  return w;
}

double wl_loss(const ShellLosses& shells, double epsilon, int max_l1) {
  if (max_l1 <= 0) throw DegenerateGridError("WL needs at least two shells (M > 0)");
  const auto w = wl_weights(shells, epsilon);
  double acc = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) acc += w[i] * shells[i];
  return acc / static_cast<double>(max_l1);
}

int max_l1_norm(std::span<const spectral::Wavevector> freqs, int dims) {
  int m = 0;
  for (const auto& k : freqs) m = std::max(m, spectral::l1_norm(k, dims));
  return m;
}

}  // namespace sinn::strategy
