#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arsep/metrics.hpp"
#include "arsep/signal.hpp"

namespace arsep {

struct SingerSpec {
  std::string name;
  std::vector<double> partial_amplitudes;  // partial k+1 at (k+1) * f0
  double vibrato_rate = 5.0;               // Hz
  double vibrato_depth = 30.0;             // cents
  double base_gain = 1.0;

  void validate() const;
};

/// Odd-partial-heavy preset.
SingerSpec bright_singer();
/// Low-partial-heavy preset.
SingerSpec dark_singer();
SingerSpec singer_preset(const std::string& name);

/// Piecewise-linear f0 track in Hz; constant beyond its first and last knot.
struct Contour {
  std::vector<double> times;  // seconds, strictly increasing
  std::vector<double> hz;

  double at(double t) const;
  double min_hz() const;
  double max_hz() const;
  void validate() const;
  /// Copy whose last value is held for `seconds` more.
  Contour extended(double seconds) const;
};

/// Per-render expression: vibrato and slow gain-wobble phases (radians).
struct Performance {
  double vibrato_phase = 0.0;
  double wobble_phase = 0.0;
};

Performance random_performance(std::uint64_t seed);

enum class ScenarioKind { Crossing, Parallel, SameSinger };
std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario(const std::string& name);

struct DuetScenario {
  ScenarioKind kind = ScenarioKind::Crossing;
  std::array<SingerSpec, 2> singers;
  std::array<Contour, 2> contours;
  std::array<Performance, 2> performances;
  double duration = 0.0;
  std::vector<double> crossing_times;
  std::uint64_t seed = 0;
};

inline constexpr double kContourMinHz = 80.0;
inline constexpr double kContourMaxHz = 1000.0;

/// Additive harmonic voice: vibrato-modulated f0, short fades and a slow gain
/// wobble, peak-normalized to 0.5. Throws ConfigError when the highest
/// partial can exceed Nyquist or the contour does not cover the duration.
Waveform render_voice(const SingerSpec& spec, const Contour& contour, int sample_rate,
                      double duration, const Performance& performance);
/// Same, with random_performance(seed).
Waveform render_voice(const SingerSpec& spec, const Contour& contour, int sample_rate,
                      double duration, std::uint64_t seed);

/// Crossing: one voice rises while the other falls. Parallel: a major third
/// apart throughout. SameSinger: crossing contours, both sung by singer 0.
DuetScenario make_scenario(ScenarioKind kind, double duration, std::uint64_t seed);

/// Random phrase-like contour used for exemplar banks.
Contour random_phrase(double duration, std::uint64_t seed);

struct DuetRender {
  std::vector<Waveform> voices;
  Waveform mixture;
};

/// Renders both voices (scaled by base_gain) and their sum. With
/// `rms_target`, each voice is rescaled to that RMS before mixing.
DuetRender render_scenario(const DuetScenario& scenario, int sample_rate,
                           std::optional<double> rms_target = std::nullopt);

/// A melody for exemplar rendering; the vibrato phase is drawn per render
/// unless pinned.
struct Phrase {
  Contour contour;
  std::optional<double> vibrato_phase;
};

struct BankOptions {
  int sample_rate = 8000;
  double phrase_seconds = 2.0;
  /// Phrases cycle through this pool when set, else random phrases are drawn.
  std::vector<Phrase> phrase_pool;
  /// 0: one window per phrase at a random offset; otherwise windows every
  /// `window_hop` samples across each phrase.
  std::size_t window_hop = 0;
};

/// count_per_singer RMS-normalized windows of segment_length per singer,
/// pooled singer by singer.
std::vector<std::vector<double>> build_exemplar_bank(const std::vector<SingerSpec>& specs,
                                                     std::size_t segment_length,
                                                     std::size_t count_per_singer,
                                                     std::uint64_t seed,
                                                     const BankOptions& options = {});

/// Identity prototypes for the singers: one envelope centroid per singer and
/// pitch band (160-340 Hz in 30 Hz bands), from glides rendered inside the
/// band. Identity i is specs[i].
IdentityPrototypes singer_prototypes(const std::vector<SingerSpec>& specs, int sample_rate,
                                     std::size_t frame, std::uint64_t seed);

}  // namespace arsep
