#include "arsep/nmf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "arsep/errors.hpp"
#include "arsep/fft.hpp"
#include "arsep/metrics.hpp"
#include "arsep/random.hpp"

namespace arsep {

namespace {

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

// Frames start at t * hop - (frame - hop), so every sample of the signal is
// covered by the full frame / hop windows and overlap-add is well conditioned
// at the edges too.
std::size_t frame_lead(std::size_t frame, std::size_t hop) { return frame - hop; }

std::size_t frame_count(std::size_t n, std::size_t frame, std::size_t hop) {
  return (n + frame_lead(frame, hop) + hop - 1) / hop;
}

std::vector<double> read_frame(std::span<const double> x, std::size_t t, std::size_t frame,
                               std::size_t hop) {
  std::vector<double> buf(frame, 0.0);
  const auto start = static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(frame_lead(frame, hop));
  for (std::size_t i = 0; i < frame; ++i) {
    const std::ptrdiff_t p = start + static_cast<std::ptrdiff_t>(i);
    if (p >= 0 && p < static_cast<std::ptrdiff_t>(x.size())) buf[i] = x[static_cast<std::size_t>(p)];
  }
  return buf;
}

}  // namespace

Spectrogram stft(const Waveform& wave, std::size_t frame_size, std::size_t hop_size) {
  if (frame_size < 2 || !std::has_single_bit(frame_size))
    throw ConfigError("stft: frame size must be a power of two");
  if (hop_size == 0 || hop_size > frame_size / 2)
    throw ConfigError("stft: hop must be in [1, frame/2] for Hann overlap-add");
  if (wave.empty()) throw ShapeError("stft: empty signal");

  Spectrogram spec;
  spec.frame_size = frame_size;
  spec.hop_size = hop_size;
  spec.signal_length = wave.size();
  spec.sample_rate = wave.sample_rate();
  spec.bins = frame_size / 2 + 1;
  spec.frames = frame_count(wave.size(), frame_size, hop_size);
  spec.magnitudes.assign(spec.bins * spec.frames, 0.0);
  spec.phases.assign(spec.bins * spec.frames, 0.0);

  const auto window = periodic_hann(frame_size);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    auto buf = read_frame(wave.samples(), t, frame_size, hop_size);
    for (std::size_t i = 0; i < frame_size; ++i) buf[i] *= window[i];
    const auto bins = rfft(buf);
    for (std::size_t k = 0; k < spec.bins; ++k) {
      spec.magnitudes[k * spec.frames + t] = std::abs(bins[k]);
      spec.phases[k * spec.frames + t] = std::arg(bins[k]);
    }
  }
  return spec;
}

Waveform istft(const Spectrogram& spec) {
  const std::size_t F = spec.frame_size;
  if (spec.bins != F / 2 + 1 || spec.magnitudes.size() != spec.bins * spec.frames ||
      spec.phases.size() != spec.magnitudes.size())
    throw ShapeError("istft: inconsistent spectrogram");
  const std::size_t lead = frame_lead(F, spec.hop_size);
  const std::size_t total = (spec.frames - 1) * spec.hop_size + F;
  std::vector<double> out(total, 0.0), norm(total, 0.0);
  const auto window = periodic_hann(F);
  std::vector<std::complex<double>> bins(spec.bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < spec.bins; ++k) bins[k] = spec.value(k, t);
    const auto frame = irfft(bins, F);
    const std::size_t start = t * spec.hop_size;
    for (std::size_t i = 0; i < F; ++i) {
      out[start + i] += window[i] * frame[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> signal(spec.signal_length, 0.0);
  for (std::size_t i = 0; i < signal.size() && lead + i < total; ++i)
    signal[i] = norm[lead + i] > 1e-8 ? out[lead + i] / norm[lead + i] : 0.0;
  return Waveform(std::move(signal), spec.sample_rate);
}

// ---------------------------------------------------------------------------

double kl_divergence(std::span<const double> V, std::span<const double> W,
                     std::span<const double> H, std::size_t rows, std::size_t cols,
                     std::size_t rank) {
  double kl = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double wh = 0.0;
      for (std::size_t a = 0; a < rank; ++a) wh += W[r * rank + a] * H[a * cols + c];
      const double v = V[r * cols + c];
      kl += (v > 0.0 ? v * std::log(v / std::max(wh, kNmfEpsilon)) : 0.0) - v + wh;
    }
  return kl;
}

NmfModel nmf_fit(std::span<const double> V, std::size_t rows, std::size_t cols,
                 std::size_t rank, std::size_t iterations, std::uint64_t seed,
                 const NmfFitOptions& options) {
  if (rank == 0) throw ConfigError("nmf_fit: rank must be at least 1");
  if (V.size() != rows * cols) throw ShapeError("nmf_fit: V size mismatch");
  for (double v : V)
    if (!(v >= 0.0)) throw DomainError("nmf_fit: V must be nonnegative");

  NmfModel model;
  model.rows = rows;
  model.cols = cols;
  model.rank = rank;
  model.source_of_component.assign(rank, 0);

  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.1, 1.0);
  if (options.init_W) {
    if (options.init_W->size() != rows * rank) throw ShapeError("nmf_fit: init_W size");
    model.W = *options.init_W;
  } else {
    model.W.resize(rows * rank);
    for (double& w : model.W) w = uniform(rng);
  }
  if (options.init_H) {
    if (options.init_H->size() != rank * cols) throw ShapeError("nmf_fit: init_H size");
    model.H = *options.init_H;
  } else {
    model.H.resize(rank * cols);
    for (double& h : model.H) h = uniform(rng);
    // Match the overall level of V.
    const double v_sum = std::accumulate(V.begin(), V.end(), 0.0);
    double wh_sum = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
      double ws = 0.0, hs = 0.0;
      for (std::size_t r = 0; r < rows; ++r) ws += model.W[r * rank + a];
      for (std::size_t c = 0; c < cols; ++c) hs += model.H[a * cols + c];
      wh_sum += ws * hs;
    }
    if (v_sum > 0.0 && wh_sum > 0.0)
      for (double& h : model.H) h *= v_sum / wh_sum;
  }
  for (double w : model.W)
    if (!(w >= 0.0)) throw DomainError("nmf_fit: init_W must be nonnegative");
  for (double h : model.H)
    if (!(h >= 0.0)) throw DomainError("nmf_fit: init_H must be nonnegative");

  auto trace = [&] {
    if (options.kl_trace)
      options.kl_trace->push_back(kl_divergence(V, model.W, model.H, rows, cols, rank));
  };
  trace();
  for (std::size_t it = 0; it < iterations; ++it) {
    kernels::kl_nmf_update(options.backend, V, model.W, model.H, rows, cols, rank, kNmfEpsilon);
    trace();
  }
  return model;
}

// ---------------------------------------------------------------------------

namespace {

// Normalized autocorrelation r[tau] for tau in [0, max_lag], unbiased.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const std::size_t nfft = std::bit_ceil(2 * n);
  std::vector<double> buf(nfft, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  auto spec = rfft(buf);
  for (auto& b : spec) b = std::norm(b);
  const auto acf = irfft(spec, nfft);
  std::vector<double> r(max_lag + 1, 0.0);
  if (acf[0] <= 0.0) return r;
  for (std::size_t tau = 0; tau <= max_lag && tau < n; ++tau)
    r[tau] = (acf[tau] / static_cast<double>(n - tau)) / (acf[0] / static_cast<double>(n));
  return r;
}

double interp(std::span<const double> v, double pos) {
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * v[i] + f * v[i + 1];
}

// Clipped autocorrelation minus its copy stretched by two; suppresses peaks
// at multiples of the true period.
std::vector<double> enhanced(std::span<const double> r) {
  std::vector<double> e(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) e[i] = std::max(0.0, r[i]);
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    out[i] = std::max(0.0, e[i] - interp(e, 0.5 * static_cast<double>(i)));
  return out;
}

struct Peak {
  double lag = 0.0;
  double height = 0.0;
};

std::optional<Peak> best_peak(std::span<const double> r, std::size_t lo, std::size_t hi) {
  const auto e = enhanced(r);
  std::optional<Peak> best;
  for (std::size_t t = std::max<std::size_t>(lo, 1); t <= hi && t + 1 < e.size(); ++t) {
    if (!(e[t] > e[t - 1] && e[t] >= e[t + 1])) continue;
    if (best && e[t] <= best->height) continue;
    // Parabolic refinement on the raw autocorrelation.
    const double a = r[t - 1], b = r[t], c = r[t + 1];
    const double denom = a - 2.0 * b + c;
    double shift = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    best = Peak{static_cast<double>(t) + shift, e[t]};
  }
  return best;
}

constexpr double kVoicingThreshold = 0.3;

// Normalized energy left after cascading the period cancellers 1 - z^-a and
// 1 - z^-b, written in terms of the autocorrelation.
double joint_residual(std::span<const double> r, double a, double b) {
  return 4.0 - 4.0 * interp(r, a) - 4.0 * interp(r, b) + 2.0 * interp(r, a + b) +
         2.0 * interp(r, std::abs(a - b));
}

struct LagPair {
  double a = 0.0, b = 0.0;
  double residual = 0.0;
};

// Two-period cancellation: the lag pair (at least 3% apart) that best
// removes the frame's energy. A slight preference for short lags stops
// multiples of a true period from winning ties.
std::optional<LagPair> best_pair(std::span<const double> r, std::size_t lo, std::size_t hi) {
  constexpr double kLagPenalty = 0.05;
  std::optional<LagPair> best;
  double best_cost = std::numeric_limits<double>::infinity();
  lo = std::max<std::size_t>(lo, 2);
  for (std::size_t a = lo; a <= hi; ++a)
    for (std::size_t b = a + 1; b <= hi; ++b) {
      if (static_cast<double>(b) < 1.03 * static_cast<double>(a)) continue;
      const double e = joint_residual(r, static_cast<double>(a), static_cast<double>(b));
      const double cost = e + kLagPenalty * static_cast<double>(a + b) / static_cast<double>(2 * hi);
      if (cost < best_cost) {
        best_cost = cost;
        best = LagPair{static_cast<double>(a), static_cast<double>(b), e};
      }
    }
  if (!best) return best;
  // Parabolic refinement along each lag.
  auto refine = [&](double& lag, auto&& eval) {
    const double em = eval(lag - 1.0), e0 = eval(lag), ep = eval(lag + 1.0);
    const double denom = em - 2.0 * e0 + ep;
    if (denom > 0.0) lag += std::clamp(0.5 * (em - ep) / denom, -0.5, 0.5);
  };
  refine(best->a, [&](double x) { return joint_residual(r, x, best->b); });
  refine(best->b, [&](double x) { return joint_residual(r, best->a, x); });
  best->residual = joint_residual(r, best->a, best->b);

  // A multiple of a true period cancels it as well, and on the integer grid
  // often better. Fall back to the shortest divisor that does about as well.
  auto shorten = [&](double& lag, double other) {
    for (int k = 4; k >= 2; --k) {
      double cand = lag / k;
      if (cand < static_cast<double>(lo) || cand + 1.0 >= static_cast<double>(r.size())) continue;
      if (std::abs(cand - other) < 0.03 * std::max(cand, other)) continue;
      refine(cand, [&](double x) { return joint_residual(r, x, other); });
      const double e = joint_residual(r, cand, other);
      if (e <= std::max(1.5 * best->residual, best->residual + 0.1)) {
        lag = cand;
        best->residual = e;
        return;
      }
    }
  };
  for (int pass = 0; pass < 2; ++pass) {
    shorten(best->a, best->b);
    shorten(best->b, best->a);
    refine(best->a, [&](double x) { return joint_residual(r, x, best->b); });
    refine(best->b, [&](double x) { return joint_residual(r, best->a, x); });
    best->residual = joint_residual(r, best->a, best->b);
  }
  return best;
}

}  // namespace

std::vector<std::vector<double>> pitch_candidates(const Waveform& wave, double fmin, double fmax,
                                                  std::size_t frame_size, std::size_t hop_size) {
  const double sr = wave.sample_rate();
  if (!(fmin > 0.0 && fmin < fmax && fmax < sr / 2.0))
    throw ConfigError("pitch_candidates: need 0 < fmin < fmax < Nyquist");
  if (hop_size == 0 || hop_size > frame_size) throw ConfigError("pitch_candidates: bad framing");
  const auto lag_lo = static_cast<std::size_t>(std::floor(sr / fmax));
  const auto lag_hi = static_cast<std::size_t>(std::ceil(sr / fmin));
  if (wave.size() < 2 * lag_hi || frame_size < 4 * lag_hi)
    throw DomainError("pitch_candidates: signal or frame too short for fmin");

  const std::size_t T = frame_count(wave.size(), frame_size, hop_size);
  std::vector<std::vector<double>> frames(T);
  std::vector<double> energies(T);
  for (std::size_t t = 0; t < T; ++t) {
    frames[t] = read_frame(wave.samples(), t, frame_size, hop_size);
    const double mean = std::accumulate(frames[t].begin(), frames[t].end(), 0.0) /
                        static_cast<double>(frame_size);
    for (double& v : frames[t]) v -= mean;
    energies[t] = energy(frames[t]);
  }
  const double loudest = *std::max_element(energies.begin(), energies.end());

  std::vector<std::vector<double>> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (loudest <= 0.0 || energies[t] < 1e-4 * loudest) continue;
    const auto r = autocorrelation(frames[t], 2 * lag_hi + 2);
    const auto single = best_peak(r, lag_lo, lag_hi);
    const double single_residual = single ? 2.0 * (1.0 - interp(r, single->lag)) : 2.0;
    const auto pair = best_pair(r, lag_lo, lag_hi);
    if (pair && pair->residual < 0.5 && pair->residual < 0.5 * single_residual) {
      // Stronger periodicity first.
      double a = pair->a, b = pair->b;
      if (interp(r, b) > interp(r, a)) std::swap(a, b);
      out[t] = {sr / a, sr / b};
    } else if (single && single->height >= kVoicingThreshold) {
      out[t] = {sr / single->lag};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Continuity tracking: each frame's candidates go to the tracks whose
// extrapolated pitch (a line through the track's recent log-frequencies) they
// are nearest to, so crossing voices keep their identity.
std::vector<std::vector<double>> build_tracks(std::span<const std::vector<double>> candidates,
                                              std::size_t n_tracks) {
  constexpr std::size_t kHistory = 24;
  const std::size_t T = candidates.size();
  std::vector<std::vector<double>> tracks(n_tracks, std::vector<double>(T, 0.0));
  std::vector<std::vector<std::pair<double, double>>> history(n_tracks);  // (frame, log2 f)

  auto predict = [&](std::size_t k, double t) -> std::optional<double> {
    const auto& h = history[k];
    if (h.empty()) return std::nullopt;
    if (h.size() < 3) return h.back().second;
    double mt = 0.0, mf = 0.0;
    for (const auto& [x, y] : h) {
      mt += x;
      mf += y;
    }
    mt /= static_cast<double>(h.size());
    mf /= static_cast<double>(h.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : h) {
      sxy += (x - mt) * (y - mf);
      sxx += (x - mt) * (x - mt);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return h.back().second + slope * (t - h.back().first);
  };

  std::vector<std::size_t> order(n_tracks);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> cands = candidates[t];
    if (cands.empty()) continue;
    if (cands.size() > n_tracks) cands.resize(n_tracks);
    if (std::all_of(history.begin(), history.end(), [](const auto& h) { return h.empty(); }))
      std::sort(cands.begin(), cands.end(), std::greater<>());  // higher voice first

    std::vector<std::optional<double>> guess(n_tracks);
    for (std::size_t k = 0; k < n_tracks; ++k) guess[k] = predict(k, static_cast<double>(t));
    std::iota(order.begin(), order.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best;
    do {
      double cost = 0.0;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const auto& g = guess[order[c]];
        cost += g ? std::abs(std::log2(cands[c]) - *g) : 0.5;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    for (std::size_t c = 0; c < cands.size(); ++c) {
      tracks[best[c]][t] = cands[c];
      auto& h = history[best[c]];
      h.emplace_back(static_cast<double>(t), std::log2(cands[c]));
      if (h.size() > kHistory) h.erase(h.begin());
    }
  }
  return tracks;
}

void harmonic_template(std::span<double> column, double f0, double bin_hz, double nyquist) {
  std::fill(column.begin(), column.end(), 0.0);
  for (int k = 1; k * f0 < nyquist; ++k) {
    const double centre = k * f0;
    const double half = std::max(2.0 * bin_hz, 0.02 * centre);
    const double amp = 1.0 / k;
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil((centre - half) / bin_hz)));
    for (std::size_t b = lo; b < column.size(); ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      if (f >= centre + half) break;
      const double u = (f - centre) / half;
      column[b] += amp * (0.5 + 0.5 * std::cos(std::numbers::pi * u));
    }
  }
  const double peak = *std::max_element(column.begin(), column.end());
  if (peak <= 0.0) return;
  const double sum = std::accumulate(column.begin(), column.end(), 0.0);
  for (double& v : column) v /= sum;
}

}  // namespace

bool harmonic_initialization(const Spectrogram& spec,
                             std::span<const std::vector<double>> candidates,
                             std::size_t n_sources, std::size_t components_per_source,
                             std::vector<double>& W, std::vector<double>& H,
                             std::vector<std::size_t>& source_of_component) {
  const std::size_t rows = spec.bins, cols = spec.frames;
  const std::size_t rank = n_sources * components_per_source;
  if (candidates.size() != cols) throw ShapeError("pitch candidates do not match the frames");
  const bool any = std::any_of(candidates.begin(), candidates.end(),
                               [](const auto& c) { return !c.empty(); });
  if (!any) return false;

  const auto tracks = build_tracks(candidates, n_sources);
  const double bin_hz = static_cast<double>(spec.sample_rate) / static_cast<double>(spec.frame_size);
  const double nyquist = spec.sample_rate / 2.0;

  W.assign(rows * rank, 0.0);
  H.assign(rank * cols, 0.0);
  source_of_component.resize(rank);
  std::vector<double> column(rows);
  std::vector<std::vector<double>> pitches(n_sources);

  for (std::size_t s = 0; s < n_sources; ++s) {
    std::vector<double> voiced;
    for (double f : tracks[s])
      if (f > 0.0) voiced.push_back(f);
    std::sort(voiced.begin(), voiced.end());
    for (std::size_t c = 0; c < components_per_source; ++c) {
      const std::size_t a = s * components_per_source + c;
      source_of_component[a] = s;
      double f0;
      if (!voiced.empty()) {
        const double q = (static_cast<double>(c) + 0.5) / static_cast<double>(components_per_source);
        f0 = voiced[std::min(voiced.size() - 1, static_cast<std::size_t>(q * static_cast<double>(voiced.size())))];
      } else {
        // No track for this source: spread templates over a vocal range.
        f0 = 110.0 * std::pow(2.0, 2.0 * static_cast<double>(c + s) / static_cast<double>(components_per_source + 1));
      }
      pitches[s].push_back(f0);
      harmonic_template(column, f0, bin_hz, nyquist);
      for (std::size_t r = 0; r < rows; ++r) W[r * rank + a] = column[r];
    }
  }

  std::vector<std::size_t> per_frame(cols, 0);
  std::vector<std::uint8_t> active(rank * cols, 0);
  for (std::size_t t = 0; t < cols; ++t)
    for (std::size_t s = 0; s < n_sources; ++s) {
      const double f = tracks[s][t];
      if (f <= 0.0) continue;
      std::size_t nearest = 0;
      for (std::size_t c = 1; c < components_per_source; ++c)
        if (std::abs(std::log(pitches[s][c] / f)) < std::abs(std::log(pitches[s][nearest] / f)))
          nearest = c;
      active[(s * components_per_source + nearest) * cols + t] = 1;
      ++per_frame[t];
    }
  for (std::size_t t = 0; t < cols; ++t) {
    if (per_frame[t] == 0) continue;
    double col_sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) col_sum += spec.magnitude(r, t);
    const double value = col_sum / static_cast<double>(per_frame[t]);
    for (std::size_t a = 0; a < rank; ++a)
      if (active[a * cols + t]) H[a * cols + t] = value;
  }
  return true;
}

std::vector<std::vector<double>> wiener_masks(const NmfModel& model, std::size_t n_sources) {
  const std::size_t rows = model.rows, cols = model.cols, rank = model.rank;
  std::vector<std::vector<double>> masks(n_sources, std::vector<double>(rows * cols, 0.0));
  std::vector<double> total(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t a = 0; a < rank; ++a) {
      const double w = model.W[r * rank + a];
      auto& m = masks[model.source_of_component[a]];
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = w * model.H[a * cols + c];
        m[r * cols + c] += v;
        total[r * cols + c] += v;
      }
    }
  // Cells the model leaves empty are shared equally so the masks always sum
  // to one and the reconstructions add back up to the mixture.
  const double share = kNmfEpsilon / static_cast<double>(n_sources);
  for (auto& m : masks)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = (m[i] + share) / (total[i] + kNmfEpsilon);
  return masks;
}

NmfSeparation separate_nmf(const MixtureProblem& problem, std::size_t n_sources,
                           std::size_t components_per_source, std::size_t iterations,
                           std::uint64_t seed, const NmfOptions& options) {
  if (n_sources < 2) throw ConfigError("separate_nmf needs at least two sources");
  if (components_per_source == 0) throw ConfigError("separate_nmf needs components per source");
  const auto spec = stft(problem.mixture, options.frame_size, options.hop_size);
  const auto candidates = pitch_candidates(problem.mixture, options.fmin, options.fmax,
                                           options.frame_size, options.hop_size);
  const std::size_t rank = n_sources * components_per_source;

  NmfSeparation out;
  NmfFitOptions fit;
  fit.backend = options.backend;
  std::vector<double> W, H;
  std::vector<std::size_t> owner;
  if (harmonic_initialization(spec, candidates, n_sources, components_per_source, W, H, owner)) {
    fit.init_W = std::move(W);
    fit.init_H = std::move(H);
  } else {
    out.used_random_init = true;
    owner.resize(rank);
    for (std::size_t a = 0; a < rank; ++a) owner[a] = a / components_per_source;
  }
  out.model = nmf_fit(spec.magnitudes, spec.bins, spec.frames, rank, iterations, seed, fit);
  out.model.source_of_component = owner;

  const auto masks = wiener_masks(out.model, n_sources);
  for (std::size_t s = 0; s < n_sources; ++s) {
    Spectrogram masked = spec;
    for (std::size_t i = 0; i < masked.magnitudes.size(); ++i) masked.magnitudes[i] *= masks[s][i];
    out.sources.push_back(istft(masked));
  }
  return out;
}

}  // namespace arsep
