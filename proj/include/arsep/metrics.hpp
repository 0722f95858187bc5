#pragma once

#include <optional>
#include <span>
#include <vector>

#include "arsep/signal.hpp"

namespace arsep {

/// Ratios whose residual is numerically zero report this value (dB).
inline constexpr double kMetricCapDb = 100.0;

double si_sdr(std::span<const double> estimate, std::span<const double> reference);
double sdr(std::span<const double> estimate, std::span<const double> reference);
inline double si_sdr(const Waveform& est, const Waveform& ref) {
  return si_sdr(est.samples(), ref.samples());
}
inline double sdr(const Waveform& est, const Waveform& ref) {
  return sdr(est.samples(), ref.samples());
}

struct SourceMetrics {
  double si_sdr = 0.0;
  double sdr = 0.0;
  double si_sdri = 0.0;
  double sdri = 0.0;
};

struct EvalReport {
  std::vector<SourceMetrics> per_source;   // indexed by reference
  std::vector<std::size_t> permutation;    // estimate index for each reference
  std::optional<double> identity_switch_rate;

  double mean_si_sdri() const;
  double mean_sdri() const;
};

/// Permutation-invariant evaluation: keeps the estimate-to-reference
/// assignment with the highest mean SI-SDR and reports improvements over
/// using the mixture as every estimate.
EvalReport evaluate(std::span<const Waveform> estimates, std::span<const Waveform> references,
                    const Waveform& mixture);

/// All permutations of 0..n-1 in lexicographic order.
std::vector<std::vector<std::size_t>> all_permutations(std::size_t n);

// ---------------------------------------------------------------------------
// Spectral-envelope identity features.

inline constexpr std::size_t kEnvelopeFftSize = 1024;
inline constexpr std::size_t kEnvelopeBands = 24;

/// Level-normalized log energies of a 24-band mel triangular filter bank over
/// the power spectrum of one Hann-windowed frame (zero-padded to 1024); bands
/// are floored 40 dB below the strongest one.
std::vector<double> spectral_envelope(std::span<const double> frame, int sample_rate);

/// Envelope of consecutive non-overlapping frames. Frames whose energy is
/// more than 40 dB below the loudest frame are returned as empty vectors.
std::vector<std::vector<double>> frame_envelopes(const Waveform& wave, std::size_t frame);

/// Mean of the non-silent frame envelopes of the given signals.
std::vector<double> envelope_centroid(std::span<const Waveform> waves, std::size_t frame);

/// Index of the nearest prototype by Euclidean distance.
std::size_t nearest_prototype(std::span<const double> feature,
                              std::span<const std::vector<double>> prototypes);

/// Envelope centroids labelled with the identity they stand for; an identity
/// may own several (for example one per pitch range).
struct IdentityPrototypes {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> identity;

  /// Identity of the nearest centroid.
  std::size_t classify(std::span<const double> feature) const;
};

/// Each frame of each estimate is labelled with the identity of its nearest
/// prototype; the result is the fraction of adjacent (non-silent) frame pairs
/// whose label changes, averaged over estimates.
double identity_switch_rate(std::span<const Waveform> estimates,
                            const IdentityPrototypes& prototypes, std::size_t frame);
/// Same, with one identity per prototype.
double identity_switch_rate(std::span<const Waveform> estimates,
                            std::span<const std::vector<double>> prototypes, std::size_t frame);

}  // namespace arsep
