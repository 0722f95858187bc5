#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "arsep/kernels.hpp"
#include "arsep/signal.hpp"

namespace arsep {

enum class WindowKind { Hann };

/// Magnitude/phase STFT, bins x frames, row-major by bin.
struct Spectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> magnitudes;
  std::vector<double> phases;
  std::size_t frame_size = 0;
  std::size_t hop_size = 0;
  WindowKind window = WindowKind::Hann;
  std::size_t signal_length = 0;
  int sample_rate = 1;

  double magnitude(std::size_t bin, std::size_t frame) const {
    return magnitudes[bin * frames + frame];
  }
  std::complex<double> value(std::size_t bin, std::size_t frame) const {
    return std::polar(magnitudes[bin * frames + frame], phases[bin * frames + frame]);
  }
};

/// Periodic-Hann STFT. frame_size must be a power of two and hop at most
/// frame_size / 2. Frame t starts at t * hop - (frame - hop) with zeros outside
/// the signal, so every sample lies under frame / hop full windows.
Spectrogram stft(const Waveform& wave, std::size_t frame_size, std::size_t hop_size);

/// Weighted overlap-add inverse; exact wherever the summed squared window is
/// nonzero.
Waveform istft(const Spectrogram& spec);

/// Nonnegative factorization V ~= W H; W is rows x rank, H is rank x cols.
struct NmfModel {
  std::size_t rows = 0, cols = 0, rank = 0;
  std::vector<double> W;
  std::vector<double> H;
  std::vector<std::size_t> source_of_component;
};

inline constexpr double kNmfEpsilon = 1e-12;

/// Generalized KL divergence sum V log(V / WH) - V + WH with 0 log 0 = 0.
double kl_divergence(std::span<const double> V, std::span<const double> W,
                     std::span<const double> H, std::size_t rows, std::size_t cols,
                     std::size_t rank);

struct NmfFitOptions {
  std::optional<std::vector<double>> init_W;
  std::optional<std::vector<double>> init_H;
  kernels::Backend backend = kernels::Backend::Parallel;
  /// When set, receives KL(V || WH) before the first and after every update.
  std::vector<double>* kl_trace = nullptr;
};

/// KL multiplicative updates. Throws DomainError for negative entries in V.
NmfModel nmf_fit(std::span<const double> V, std::size_t rows, std::size_t cols,
                 std::size_t rank, std::size_t iterations, std::uint64_t seed,
                 const NmfFitOptions& options = {});

/// Up to two f0 candidates (Hz) per analysis frame, strongest first, from
/// peaks of a subharmonic-suppressed autocorrelation; the second candidate
/// comes from the residual after cancelling the first period. Frames follow
/// the stft() layout for the same frame and hop sizes.
std::vector<std::vector<double>> pitch_candidates(const Waveform& wave, double fmin, double fmax,
                                                  std::size_t frame_size = 2048,
                                                  std::size_t hop_size = 512);

struct NmfOptions {
  std::size_t frame_size = 2048;
  std::size_t hop_size = 512;
  double fmin = 80.0;
  double fmax = 1000.0;
  kernels::Backend backend = kernels::Backend::Parallel;
};

struct NmfSeparation {
  std::vector<Waveform> sources;
  NmfModel model;
  bool used_random_init = false;
};

/// Pitch-informed KL-NMF separation with Wiener-mask reconstruction.
NmfSeparation separate_nmf(const MixtureProblem& problem, std::size_t n_sources,
                           std::size_t components_per_source, std::size_t iterations,
                           std::uint64_t seed, const NmfOptions& options = {});

/// Builds the pitch-informed initial W and H used by separate_nmf. Exposed
/// for tests; returns false when no pitch candidates were found.
bool harmonic_initialization(const Spectrogram& spec,
                             std::span<const std::vector<double>> candidates,
                             std::size_t n_sources, std::size_t components_per_source,
                             std::vector<double>& W, std::vector<double>& H,
                             std::vector<std::size_t>& source_of_component);

/// Wiener masks per source: (W_s H_s + eps / n) / (W H + eps), bins x frames;
/// they sum to one in every cell.
std::vector<std::vector<double>> wiener_masks(const NmfModel& model, std::size_t n_sources);

}  // namespace arsep
