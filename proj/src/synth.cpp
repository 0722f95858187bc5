#include "arsep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "arsep/errors.hpp"
#include "arsep/random.hpp"

namespace arsep {

void SingerSpec::validate() const {
  if (std::none_of(partial_amplitudes.begin(), partial_amplitudes.end(),
                   [](double a) { return a > 0.0; }))
    throw ConfigError("singer '" + name + "' has no nonzero partial");
  for (double a : partial_amplitudes)
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("partial amplitudes must be >= 0");
  if (!(vibrato_depth >= 0.0)) throw ConfigError("vibrato depth must be >= 0");
  if (!(vibrato_rate >= 0.0)) throw ConfigError("vibrato rate must be >= 0");
  if (!(base_gain > 0.0)) throw ConfigError("base gain must be positive");
}

SingerSpec bright_singer() {
  SingerSpec s;
  s.name = "bright";
  for (int k = 1; k <= 10; ++k)
    s.partial_amplitudes.push_back(k % 2 == 1 ? 1.0 / std::sqrt(k) : 0.1 / k);
  s.vibrato_rate = 5.5;
  s.vibrato_depth = 25.0;
  return s;
}

SingerSpec dark_singer() {
  SingerSpec s;
  s.name = "dark";
  for (int k = 1; k <= 10; ++k) s.partial_amplitudes.push_back(1.0 / std::pow(k, 2.5));
  s.vibrato_rate = 4.5;
  s.vibrato_depth = 40.0;
  return s;
}

SingerSpec singer_preset(const std::string& name) {
  if (name == "bright") return bright_singer();
  if (name == "dark") return dark_singer();
  throw ConfigError("unknown singer preset '" + name + "'");
}

// ---------------------------------------------------------------------------

double Contour::at(double t) const {
  if (t <= times.front()) return hz.front();
  if (t >= times.back()) return hz.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double u = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - u) * hz[i - 1] + u * hz[i];
}

double Contour::min_hz() const { return *std::min_element(hz.begin(), hz.end()); }
double Contour::max_hz() const { return *std::max_element(hz.begin(), hz.end()); }

void Contour::validate() const {
  if (times.empty() || times.size() != hz.size())
    throw ConfigError("contour needs matching, nonempty time and frequency lists");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ConfigError("contour times must increase");
  for (double f : hz)
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("contour frequencies must be positive");
}

Contour Contour::extended(double seconds) const {
  Contour c = *this;
  if (seconds > 0.0) {
    c.times.push_back(times.back() + seconds);
    c.hz.push_back(hz.back());
  }
  return c;
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Crossing: return "crossing";
    case ScenarioKind::Parallel: return "parallel";
    case ScenarioKind::SameSinger: return "same-singer";
  }
  return "?";
}

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "crossing") return ScenarioKind::Crossing;
  if (name == "parallel") return ScenarioKind::Parallel;
  if (name == "same-singer" || name == "same_singer" || name == "samesinger")
    return ScenarioKind::SameSinger;
  throw ConfigError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------

Performance random_performance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Performance p;
  p.vibrato_phase = phase(rng);
  p.wobble_phase = phase(rng);
  return p;
}

Waveform render_voice(const SingerSpec& spec, const Contour& contour, int sample_rate,
                      double duration, std::uint64_t seed) {
  return render_voice(spec, contour, sample_rate, duration, random_performance(seed));
}

Waveform render_voice(const SingerSpec& spec, const Contour& contour, int sample_rate,
                      double duration, const Performance& performance) {
  spec.validate();
  contour.validate();
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  if (!(duration > 0.0) || n == 0) throw ConfigError("render_voice: duration yields no samples");
  const double nyquist = sample_rate / 2.0;
  const double vib = std::exp2(spec.vibrato_depth / 1200.0);
  const std::size_t partials = spec.partial_amplitudes.size();
  if (contour.max_hz() * vib * static_cast<double>(partials) >= nyquist)
    throw ConfigError("render_voice: highest partial would exceed Nyquist");

  const double vib_phase = performance.vibrato_phase;
  const double wobble_phase = performance.wobble_phase;

  const double fade = std::min(0.02, duration / 4.0);
  std::vector<double> out(n, 0.0);
  double theta = 0.0;  // fundamental phase
  const double dt = 1.0 / sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double f0 = contour.at(t) *
        std::exp2(spec.vibrato_depth / 1200.0 *
                  std::sin(2.0 * std::numbers::pi * spec.vibrato_rate * t + vib_phase));
    double v = 0.0;
    for (std::size_t k = 0; k < partials; ++k)
      if (spec.partial_amplitudes[k] > 0.0)
        v += spec.partial_amplitudes[k] * std::sin(static_cast<double>(k + 1) * theta);
    double gain = 1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * 0.7 * t + wobble_phase);
    const double edge = std::min(t, duration - t);
    if (edge < fade) gain *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(edge, 0.0) / fade);
    out[i] = gain * v;
    theta += 2.0 * std::numbers::pi * f0 * dt;
    if (theta > 2.0 * std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : out) v *= 0.5 / peak;
  return Waveform(std::move(out), sample_rate);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kKnotSpacing = 0.25;  // seconds

std::vector<double> knot_times(double duration) {
  std::vector<double> t;
  const auto count = static_cast<std::size_t>(std::ceil(duration / kKnotSpacing));
  for (std::size_t i = 0; i <= count; ++i) t.push_back(std::min(duration, i * kKnotSpacing));
  if (t.size() >= 2 && t[t.size() - 1] <= t[t.size() - 2]) t.pop_back();
  return t;
}

// Straight glide from a to b in log frequency with per-knot jitter.
Contour glide(double a, double b, double duration, double jitter_semitones, Rng& rng) {
  std::uniform_real_distribution<double> jitter(-jitter_semitones, jitter_semitones);
  Contour c;
  c.times = knot_times(duration);
  for (double t : c.times) {
    const double u = t / duration;
    const double base = std::log2(a) * (1.0 - u) + std::log2(b) * u;
    c.hz.push_back(std::exp2(base + jitter(rng) / 12.0));
  }
  return c;
}

std::vector<double> crossings(const Contour& a, const Contour& b) {
  // Both contours share knots, so their difference is linear between knots.
  std::vector<double> out;
  for (std::size_t i = 1; i < a.times.size(); ++i) {
    const double d0 = a.hz[i - 1] - b.hz[i - 1];
    const double d1 = a.hz[i] - b.hz[i];
    if ((d0 < 0.0) != (d1 < 0.0) && d0 != d1) {
      const double u = d0 / (d0 - d1);
      out.push_back(a.times[i - 1] + u * (a.times[i] - a.times[i - 1]));
    }
  }
  return out;
}

}  // namespace

DuetScenario make_scenario(ScenarioKind kind, double duration, std::uint64_t seed) {
  if (!(duration >= 2.0)) throw ConfigError("scenarios need at least 2 s");
  Rng rng(derive_seed(seed, 0x5ce7a510));
  std::uniform_real_distribution<double> low(170.0, 200.0), high(290.0, 320.0);
  DuetScenario s;
  s.kind = kind;
  s.duration = duration;
  s.seed = seed;
  s.singers = {bright_singer(), dark_singer()};
  switch (kind) {
    case ScenarioKind::Crossing:
    case ScenarioKind::SameSinger: {
      const double a0 = low(rng), a1 = high(rng), b0 = high(rng), b1 = low(rng);
      s.contours[0] = glide(a0, a1, duration, 0.3, rng);
      s.contours[1] = glide(b0, b1, duration, 0.3, rng);
      if (kind == ScenarioKind::SameSinger) s.singers[1] = s.singers[0];
      break;
    }
    case ScenarioKind::Parallel: {
      const double a0 = low(rng), a1 = std::uniform_real_distribution<double>(200.0, 240.0)(rng);
      s.contours[0] = glide(a0, a1, duration, 0.3, rng);
      s.contours[1] = s.contours[0];
      for (double& f : s.contours[1].hz) f *= std::exp2(4.0 / 12.0);
      break;
    }
  }
  for (std::size_t v = 0; v < 2; ++v) s.performances[v] = random_performance(derive_seed(seed, 0x701ce, v));
  s.crossing_times = crossings(s.contours[0], s.contours[1]);
  for (const auto& c : s.contours)
    if (c.min_hz() < kContourMinHz || c.max_hz() > kContourMaxHz)
      throw DomainError("scenario contour left the vocal range");
  return s;
}

Contour random_phrase(double duration, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x9a7a5e));
  std::uniform_real_distribution<double> start(170.0, 320.0), step(-2.0, 2.0);
  Contour c;
  c.times = knot_times(duration);
  double f = start(rng);
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    c.hz.push_back(f);
    f = std::clamp(f * std::exp2(step(rng) / 12.0), 160.0, 330.0);
  }
  return c;
}

DuetRender render_scenario(const DuetScenario& scenario, int sample_rate,
                           std::optional<double> rms_target) {
  DuetRender r;
  for (std::size_t v = 0; v < 2; ++v) {
    auto wave = render_voice(scenario.singers[v], scenario.contours[v], sample_rate,
                             scenario.duration, scenario.performances[v]);
    std::vector<double> samples = wave.data();
    double scale = scenario.singers[v].base_gain;
    if (rms_target) {
      const double level = rms(samples);
      if (level > 0.0) scale = *rms_target / level;
    }
    for (double& x : samples) x *= scale;
    r.voices.emplace_back(std::move(samples), sample_rate);
  }
  MixingModel mixing;
  r.mixture = mix(r.voices, mixing);
  return r;
}

std::vector<std::vector<double>> build_exemplar_bank(const std::vector<SingerSpec>& specs,
                                                     std::size_t segment_length,
                                                     std::size_t count_per_singer,
                                                     std::uint64_t seed,
                                                     const BankOptions& options) {
  if (count_per_singer == 0) throw ConfigError("count_per_singer must be at least 1");
  if (specs.empty()) throw ConfigError("exemplar bank needs at least one singer");
  if (segment_length == 0) throw ConfigError("segment length must be positive");

  std::vector<std::vector<double>> bank;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    Rng rng(derive_seed(seed, 0xba4c, s));
    std::size_t taken = 0;
    for (std::size_t p = 0; taken < count_per_singer; ++p) {
      const std::uint64_t phrase_seed = derive_seed(seed, s, p);
      Contour contour;
      double seconds = options.phrase_seconds;
      auto performance = random_performance(derive_seed(phrase_seed, 0x7e4d));
      if (!options.phrase_pool.empty()) {
        const auto& phrase = options.phrase_pool[p % options.phrase_pool.size()];
        contour = phrase.contour;
        seconds = contour.times.back();
        if (phrase.vibrato_phase) performance.vibrato_phase = *phrase.vibrato_phase;
      } else {
        contour = random_phrase(seconds, phrase_seed);
      }
      const auto phrase_len = static_cast<std::size_t>(std::llround(seconds * options.sample_rate));
      if (segment_length > phrase_len)
        throw ConfigError("segment length exceeds the rendered phrase length");
      const auto wave = render_voice(specs[s], contour, options.sample_rate, seconds, performance);

      std::vector<std::size_t> offsets;
      if (options.window_hop == 0) {
        offsets.push_back(std::uniform_int_distribution<std::size_t>(0, phrase_len - segment_length)(rng));
      } else {
        for (std::size_t o = 0; o + segment_length <= phrase_len; o += options.window_hop)
          offsets.push_back(o);
      }
      for (std::size_t o : offsets) {
        if (taken == count_per_singer) break;
        std::vector<double> window(wave.data().begin() + static_cast<std::ptrdiff_t>(o),
                                   wave.data().begin() + static_cast<std::ptrdiff_t>(o + segment_length));
        const double level = rms(window);
        if (level <= 0.0) continue;
        for (double& v : window) v /= level;
        bank.push_back(std::move(window));
        ++taken;
      }
    }
  }
  return bank;
}

IdentityPrototypes singer_prototypes(const std::vector<SingerSpec>& specs, int sample_rate,
                                     std::size_t frame, std::uint64_t seed) {
  IdentityPrototypes out;
  constexpr double kSeconds = 1.0;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (double lo = 160.0; lo < 340.0; lo += 30.0) {
      const double hi = lo + 30.0;
      std::vector<Waveform> waves;
      for (std::size_t dir = 0; dir < 2; ++dir) {
        Contour c{{0.0, kSeconds}, dir == 0 ? std::vector<double>{lo, hi} : std::vector<double>{hi, lo}};
        waves.push_back(render_voice(specs[s], c, sample_rate, kSeconds,
                                     derive_seed(seed, s, static_cast<std::uint64_t>(lo) * 2 + dir)));
      }
      out.centroids.push_back(envelope_centroid(waves, frame));
      out.identity.push_back(s);
    }
  return out;
}

}  // namespace arsep
