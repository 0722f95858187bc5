#include "arsep/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "arsep/errors.hpp"
#include "arsep/fft.hpp"

namespace arsep {

namespace {

void check_pair(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) throw ShapeError("metric: length mismatch");
  if (reference.empty()) throw ShapeError("metric: empty signals");
}

double ratio_db(double signal, double noise) {
  if (noise <= 0.0) return kMetricCapDb;
  return std::min(kMetricCapDb, 10.0 * std::log10(signal / noise));
}

}  // namespace

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  check_pair(estimate, reference);
  const double ref_energy = energy(reference);
  if (ref_energy == 0.0) throw DomainError("si_sdr: reference is identically zero");
  const double alpha = dot(estimate, reference) / ref_energy;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    target += t * t;
    noise += (t - estimate[i]) * (t - estimate[i]);
  }
  if (target == 0.0) return -kMetricCapDb;  // estimate orthogonal to the reference
  // Residuals below double round-off of the target count as zero.
  if (noise <= 1e-20 * target) return kMetricCapDb;
  return ratio_db(target, noise);
}

double sdr(std::span<const double> estimate, std::span<const double> reference) {
  check_pair(estimate, reference);
  const double ref_energy = energy(reference);
  if (ref_energy == 0.0) throw DomainError("sdr: reference is identically zero");
  double noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    noise += (reference[i] - estimate[i]) * (reference[i] - estimate[i]);
  if (noise <= 1e-20 * ref_energy) return kMetricCapDb;
  return ratio_db(ref_energy, noise);
}

double EvalReport::mean_si_sdri() const {
  if (per_source.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : per_source) s += m.si_sdri;
  return s / static_cast<double>(per_source.size());
}

double EvalReport::mean_sdri() const {
  if (per_source.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : per_source) s += m.sdri;
  return s / static_cast<double>(per_source.size());
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

EvalReport evaluate(std::span<const Waveform> estimates, std::span<const Waveform> references,
                    const Waveform& mixture) {
  const std::size_t n = references.size();
  if (estimates.size() != n) throw ShapeError("evaluate: estimate/reference count mismatch");
  if (n == 0) throw ShapeError("evaluate: no sources");
  for (std::size_t i = 0; i < n; ++i)
    if (estimates[i].size() != mixture.size() || references[i].size() != mixture.size())
      throw ShapeError("evaluate: signals differ in length");

  // si[e][r]: SI-SDR of estimate e against reference r.
  std::vector<std::vector<double>> si(n, std::vector<double>(n));
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t r = 0; r < n; ++r) si[e][r] = si_sdr(estimates[e], references[r]);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_perm;
  for (const auto& perm : all_permutations(n)) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) total += si[perm[r]][r];
    if (total > best) {
      best = total;
      best_perm = perm;
    }
  }

  EvalReport report;
  report.permutation = best_perm;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& est = estimates[best_perm[r]];
    SourceMetrics m;
    m.si_sdr = si[best_perm[r]][r];
    m.sdr = sdr(est, references[r]);
    m.si_sdri = m.si_sdr - si_sdr(mixture, references[r]);
    m.sdri = m.sdr - sdr(mixture, references[r]);
    report.per_source.push_back(m);
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

constexpr double kFloor = 1e-12;

}  // namespace

std::vector<double> spectral_envelope(std::span<const double> frame, int sample_rate) {
  if (frame.empty()) throw ShapeError("spectral_envelope: empty frame");
  if (sample_rate <= 0) throw ConfigError("spectral_envelope: bad sample rate");
  const std::size_t nfft = std::max(kEnvelopeFftSize, std::bit_ceil(frame.size()));
  std::vector<double> buf(nfft, 0.0);
  const std::size_t m = frame.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(m));
    buf[i] = w * frame[i];
  }
  const auto spec = rfft(buf);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(nfft);

  const double mel_top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(kEnvelopeBands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_top * static_cast<double>(i) / static_cast<double>(kEnvelopeBands + 1));

  std::vector<double> bands(kEnvelopeBands, 0.0);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    const double p = std::norm(spec[k]);
    for (std::size_t b = 0; b < kEnvelopeBands; ++b) {
      const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
      if (f <= lo || f >= hi) continue;
      const double w = f < mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      bands[b] += w * p;
    }
  }
  // Bands between sparse low harmonics would otherwise dominate the feature
  // with pitch-dependent gaps; floor them 40 dB below the strongest band.
  const double top = *std::max_element(bands.begin(), bands.end());
  double mean = 0.0;
  for (double& v : bands) {
    v = std::log(std::max(v, 1e-4 * top) + kFloor);
    mean += v;
  }
  mean /= static_cast<double>(kEnvelopeBands);
  for (double& v : bands) v -= mean;
  return bands;
}

std::vector<std::vector<double>> frame_envelopes(const Waveform& wave, std::size_t frame) {
  if (frame == 0) throw ConfigError("frame length must be positive");
  const std::size_t count = wave.size() / frame;
  std::vector<double> energies(count);
  for (std::size_t f = 0; f < count; ++f)
    energies[f] = energy(wave.samples().subspan(f * frame, frame));
  const double loudest = count ? *std::max_element(energies.begin(), energies.end()) : 0.0;

  std::vector<std::vector<double>> out(count);
  for (std::size_t f = 0; f < count; ++f) {
    if (loudest == 0.0 || energies[f] < 1e-4 * loudest) continue;
    out[f] = spectral_envelope(wave.samples().subspan(f * frame, frame), wave.sample_rate());
  }
  return out;
}

std::vector<double> envelope_centroid(std::span<const Waveform> waves, std::size_t frame) {
  std::vector<double> sum(kEnvelopeBands, 0.0);
  std::size_t n = 0;
  for (const auto& w : waves)
    for (const auto& env : frame_envelopes(w, frame)) {
      if (env.empty()) continue;
      for (std::size_t b = 0; b < kEnvelopeBands; ++b) sum[b] += env[b];
      ++n;
    }
  if (n == 0) throw DomainError("envelope_centroid: no voiced frames");
  for (double& v : sum) v /= static_cast<double>(n);
  return sum;
}

std::size_t nearest_prototype(std::span<const double> feature,
                              std::span<const std::vector<double>> prototypes) {
  if (prototypes.empty()) throw ConfigError("no identity prototypes");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < prototypes.size(); ++p) {
    if (prototypes[p].size() != feature.size()) throw ShapeError("prototype size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < feature.size(); ++i)
      d += (feature[i] - prototypes[p][i]) * (feature[i] - prototypes[p][i]);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

std::size_t IdentityPrototypes::classify(std::span<const double> feature) const {
  if (identity.size() != centroids.size()) throw ShapeError("one identity per centroid expected");
  return identity[nearest_prototype(feature, centroids)];
}

double identity_switch_rate(std::span<const Waveform> estimates,
                            const IdentityPrototypes& prototypes, std::size_t frame) {
  if (estimates.empty()) throw ShapeError("identity_switch_rate: no estimates");
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& est : estimates) {
    if (est.size() / std::max<std::size_t>(frame, 1) < 2)
      throw DomainError("identity_switch_rate: fewer than two frames");
    const auto envs = frame_envelopes(est, frame);
    std::size_t pairs = 0, flips = 0;
    for (std::size_t f = 1; f < envs.size(); ++f) {
      if (envs[f].empty() || envs[f - 1].empty()) continue;
      ++pairs;
      if (prototypes.classify(envs[f]) != prototypes.classify(envs[f - 1])) ++flips;
    }
    if (pairs == 0) continue;
    total += static_cast<double>(flips) / static_cast<double>(pairs);
    ++counted;
  }
  return counted ? total / static_cast<double>(counted) : 0.0;
}

double identity_switch_rate(std::span<const Waveform> estimates,
                            std::span<const std::vector<double>> prototypes, std::size_t frame) {
  IdentityPrototypes labelled;
  labelled.centroids.assign(prototypes.begin(), prototypes.end());
  for (std::size_t p = 0; p < prototypes.size(); ++p) labelled.identity.push_back(p);
  return identity_switch_rate(estimates, labelled, frame);
}

}  // namespace arsep
