#pragma once
// Frequency-importance mechanisms: sampling residual frequencies by
// importance (SI) and the shell-weighted residual loss (WL).

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sinn/spectral.hpp"

namespace sinn::strategy {

struct SiConfig {
  double alpha = 3.0;
  double beta = 0.0;
};

struct WlConfig {
  double epsilon = 1e-5;
};

enum class Kind { uniform, si, wl };

struct StrategyConfig {
  Kind kind = Kind::si;
  SiConfig si;
  WlConfig wl;
  // WL weighting over SI-sampled points instead of full shells.
  bool combine_si_wl = false;
};

const char* kind_name(Kind kind);
Kind parse_kind(const std::string& name);

// Unnormalized SI weight 1/(||k||_1 + beta) + alpha. When ||k||_1 + beta is
// zero (alpha > 0) the reciprocal is capped at 1, the value it takes at
// ||k||_1 = 1 with beta = 0, so the density stays nonincreasing.
double si_weight(int l1, const SiConfig& cfg);

// Normalized SI probabilities over `freqs`.
std::vector<double> si_pdf(std::span<const spectral::Wavevector> freqs, int dims, const SiConfig& cfg);

// Uniform probabilities over `count` frequencies.
std::vector<double> uniform_pdf(std::size_t count);

// I.i.d. categorical draws (with replacement); returns indices into pdf.
std::vector<std::size_t> sample_indices(std::span<const double> pdf, std::size_t count,
                                        std::mt19937_64& rng);

std::vector<spectral::Wavevector> sample_frequencies(std::span<const spectral::Wavevector> freqs,
                                                     int dims, const SiConfig& cfg,
                                                     std::size_t count, std::mt19937_64& rng);

// L^0..L^M, the residual mass on each ||k||_1 shell.
using ShellLosses = std::vector<double>;

// w^i = exp(-eps * sum_{j<i} L^j); w^0 = 1.
std::vector<double> wl_weights(const ShellLosses& shells, double epsilon);

// (1/M) sum_i w^i L^i
double wl_loss(const ShellLosses& shells, double epsilon, int max_l1);

// Largest ||k||_1 over `freqs`.
int max_l1_norm(std::span<const spectral::Wavevector> freqs, int dims);

}  // namespace sinn::strategy
