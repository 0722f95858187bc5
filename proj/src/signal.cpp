#include "arsep/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "arsep/errors.hpp"
#include "arsep/random.hpp"

namespace arsep {

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) throw ConfigError("sample rate must be positive");
  if (!all_finite(samples_)) throw DomainError("waveform contains NaN or Inf");
}

Waveform Waveform::zeros(std::size_t length, int sample_rate) {
  return Waveform(std::vector<double>(length, 0.0), sample_rate);
}

Waveform Waveform::slice(std::size_t offset, std::size_t length) const {
  std::vector<double> out(length, 0.0);
  if (offset < samples_.size()) {
    const std::size_t n = std::min(length, samples_.size() - offset);
    std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(offset), n, out.begin());
  }
  return Waveform(std::move(out), sample_rate_);
}

void MixingModel::validate() const {
  if (channels < 1 || sources < 1) throw ConfigError("mixing model needs M >= 1 and N >= 1");
  if (kind == MixingKind::InstantaneousSum && channels != 1)
    throw ConfigError("instantaneous sum mixing requires a single channel");
  if (!(noise_variance >= 0.0)) throw ConfigError("noise variance must be nonnegative");
}

MixtureProblem::MixtureProblem(Waveform mix_wave, MixingModel mixing_model)
    : mixture(std::move(mix_wave)), mixing(mixing_model) {
  mixing.validate();
  if (mixture.empty()) throw ShapeError("mixture must be nonempty");
}

Waveform mix(std::span<const Waveform> sources, const MixingModel& mixing,
             std::optional<std::uint64_t> noise_seed) {
  mixing.validate();
  if (static_cast<int>(sources.size()) != mixing.sources)
    throw ConfigError("expected " + std::to_string(mixing.sources) + " sources, got " +
                      std::to_string(sources.size()));
  if (sources.empty()) throw ConfigError("no sources to mix");
  const std::size_t n = sources.front().size();
  const int rate = sources.front().sample_rate();
  for (const auto& s : sources) {
    if (s.size() != n) throw ShapeError("sources differ in length");
    if (s.sample_rate() != rate) throw ShapeError("sources differ in sample rate");
  }

  std::vector<double> out(n, 0.0);
  for (const auto& s : sources)
    for (std::size_t i = 0; i < n; ++i) out[i] += s[i];

  if (mixing.noise_variance > 0.0) {
    Rng rng(noise_seed.value_or(0));
    std::vector<double> z(n);
    fill_normal(rng, z, std::sqrt(mixing.noise_variance));
    for (std::size_t i = 0; i < n; ++i) out[i] += z[i];
  }
  return Waveform(std::move(out), rate);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double energy(std::span<const double> a) { return dot(a, a); }

double rms(std::span<const double> a) {
  return a.empty() ? 0.0 : std::sqrt(energy(a) / static_cast<double>(a.size()));
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// RIFF/WAVE

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ParseError(path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const auto size = read_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a streaming placeholder size on the data chunk.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;
        data_size = bytes.size() - body;
        break;
      }
      throw ParseError(path.string() + ": truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError(path.string() + ": fmt chunk too short");
      format = read_le<std::uint16_t>(chunk + 8);
      channels = read_le<std::uint16_t>(chunk + 10);
      rate = read_le<std::uint32_t>(chunk + 12);
      bits = read_le<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw ParseError(path.string() + ": extensible fmt chunk too short");
        format = read_le<std::uint16_t>(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw ParseError(path.string() + ": missing fmt chunk");
  if (data == nullptr) throw ParseError(path.string() + ": missing data chunk");
  if (channels != 1)
    throw UnsupportedFormatError(path.string() + ": only mono files are supported, got " +
                                 std::to_string(channels) + " channels");
  if (rate == 0) throw ParseError(path.string() + ": zero sample rate");

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    samples.resize(data_size / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = read_le<std::int16_t>(data + 2 * i) / 32768.0;
  } else if (format == kFormatPcm && bits == 24) {
    samples.resize(data_size / 3);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const unsigned char* p = data + 3 * i;
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      samples[i] = v / 8388608.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    samples.resize(data_size / 4);
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = read_le<float>(data + 4 * i);
  } else if (format == kFormatFloat && bits == 64) {
    samples.resize(data_size / 8);
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = read_le<double>(data + 8 * i);
  } else {
    throw UnsupportedFormatError(path.string() + ": unsupported encoding (format " +
                                 std::to_string(format) + ", " + std::to_string(bits) +
                                 " bits)");
  }
  return Waveform(std::move(samples), static_cast<int>(rate));
}

void write_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::Pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(wave.size() * block_align);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_le<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate()) * block_align);
  put_le<std::uint16_t>(out, block_align);
  put_le<std::uint16_t>(out, bits);
  out += "data";
  put_le<std::uint32_t>(out, data_size);
  for (double v : wave.samples()) {
    if (pcm) {
      const double q = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
      put_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0)));
    } else {
      put_le<float>(out, static_cast<float>(v));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed: " + path.string());
}

}  // namespace arsep
