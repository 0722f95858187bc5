#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace arsep {

/// Mono sampled signal. Samples are double precision; files may be narrower.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int sample_rate);

  static Waveform zeros(std::size_t length, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  /// Copy of [offset, offset + length); positions past the end read as zero.
  Waveform slice(std::size_t offset, std::size_t length) const;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

enum class MixingKind { InstantaneousSum };

struct MixingModel {
  MixingKind kind = MixingKind::InstantaneousSum;
  int channels = 1;
  int sources = 2;
  double noise_variance = 0.0;

  /// Throws ConfigError when the model is not internally consistent.
  void validate() const;
};

struct MixtureProblem {
  Waveform mixture;
  MixingModel mixing;

  MixtureProblem(Waveform mixture, MixingModel mixing);
};

/// x[n] = sum_i s_i[n] + z[n], z ~ N(0, noise_variance) drawn from noise_seed.
Waveform mix(std::span<const Waveform> sources, const MixingModel& mixing,
             std::optional<std::uint64_t> noise_seed = std::nullopt);

enum class WavEncoding { Pcm16, Float32 };

Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::Float32);

// Vector helpers shared by the numeric modules.
double dot(std::span<const double> a, std::span<const double> b);
double energy(std::span<const double> a);
double rms(std::span<const double> a);
bool all_finite(std::span<const double> a);

}  // namespace arsep
