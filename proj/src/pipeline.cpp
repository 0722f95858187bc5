#include "arsep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arsep/errors.hpp"
#include "arsep/metrics.hpp"
#include "arsep/random.hpp"

namespace arsep {

SegmentPlan plan_segments(std::size_t signal_length, std::size_t segment_length,
                          double overlap_ratio) {
  if (segment_length == 0) throw ConfigError("segment length must be positive");
  if (!(overlap_ratio >= 0.0 && overlap_ratio < 1.0))
    throw ConfigError("overlap ratio must lie in [0, 1)");
  SegmentPlan plan;
  plan.signal_length = signal_length;
  plan.segment_length = segment_length;
  plan.overlap_ratio = overlap_ratio;
  const double hop = std::round(static_cast<double>(segment_length) * (1.0 - overlap_ratio));
  plan.hop = std::max<std::size_t>(1, static_cast<std::size_t>(hop));
  plan.hop = std::min(plan.hop, segment_length);

  std::size_t count = 1;
  if (signal_length > segment_length)
    count = (signal_length - segment_length + plan.hop - 1) / plan.hop + 1;
  for (std::size_t j = 0; j < count; ++j) plan.offsets.push_back(j * plan.hop);
  plan.padded_length = plan.offsets.back() + segment_length;
  return plan;
}

std::string to_string(SeparationMode mode) {
  switch (mode) {
    case SeparationMode::Naive: return "naive";
    case SeparationMode::Segmented: return "segmented";
    case SeparationMode::AutoRegressive: return "ar";
    case SeparationMode::AutoRegressiveTeacherForcing: return "ar-tf";
  }
  return "?";
}

SeparationMode parse_mode(const std::string& name) {
  if (name == "naive") return SeparationMode::Naive;
  if (name == "segmented") return SeparationMode::Segmented;
  if (name == "ar") return SeparationMode::AutoRegressive;
  if (name == "ar-tf" || name == "ar_tf") return SeparationMode::AutoRegressiveTeacherForcing;
  throw ConfigError("unknown separation mode '" + name + "'");
}

std::string to_string(Selection selection) {
  return selection == Selection::OracleSiSdr ? "oracle-sisdr" : "mixture-residual";
}

Selection parse_selection(const std::string& name) {
  if (name == "oracle-sisdr" || name == "oracle") return Selection::OracleSiSdr;
  if (name == "mixture-residual" || name == "residual") return Selection::MixtureResidual;
  throw ConfigError("unknown selection rule '" + name + "'");
}

std::uint64_t candidate_seed(std::uint64_t base, std::size_t segment, std::size_t candidate) {
  return derive_seed(base, segment, candidate);
}

Choice select_best_of_k(std::span<const std::vector<Waveform>> candidates, Selection selection,
                        std::span<const Waveform> references, const Waveform& mixture) {
  if (candidates.empty()) throw ConfigError("select_best_of_k: no candidates");
  const std::size_t N = candidates.front().size();
  for (const auto& c : candidates)
    if (c.size() != N) throw ShapeError("select_best_of_k: candidates differ in source count");

  Choice best;
  best.score = -std::numeric_limits<double>::infinity();

  if (selection == Selection::MixtureResidual) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<double> r(mixture.data());
      for (const auto& s : candidates[c]) {
        if (s.size() != r.size()) throw ShapeError("select_best_of_k: length mismatch");
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= s[i];
      }
      const double score = -std::sqrt(energy(r));
      if (score > best.score) {
        best.index = c;
        best.score = score;
      }
    }
    best.permutation.resize(N);
    std::iota(best.permutation.begin(), best.permutation.end(), 0);
    return best;
  }

  if (references.size() != N)
    throw ConfigError("oracle selection needs one reference per source");
  std::vector<std::size_t> active;
  for (std::size_t r = 0; r < N; ++r)
    if (energy(references[r].samples()) > 0.0) active.push_back(r);

  const auto perms = all_permutations(N);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    // si[e][r] cached per candidate.
    std::vector<std::vector<double>> si(N, std::vector<double>(N, 0.0));
    for (std::size_t e = 0; e < N; ++e)
      for (std::size_t r : active) si[e][r] = si_sdr(candidates[c][e], references[r]);
    for (const auto& p : perms) {
      double total = 0.0;
      for (std::size_t r : active) total += si[p[r]][r];
      const double score = active.empty() ? 0.0 : total / static_cast<double>(active.size());
      if (score > best.score) {
        best.index = c;
        best.permutation = p;
        best.score = score;
      }
    }
  }
  return best;
}

std::vector<Waveform> stitch(std::span<const std::vector<Waveform>> segments,
                             const SegmentPlan& plan) {
  if (segments.size() != plan.offsets.size() || segments.empty())
    throw ShapeError("stitch: segment count differs from the plan");
  const std::size_t N = segments.front().size();
  const std::size_t L = plan.segment_length;
  const int rate = segments.front().empty() ? 1 : segments.front().front().sample_rate();
  for (const auto& seg : segments) {
    if (seg.size() != N) throw ShapeError("stitch: segments differ in source count");
    for (const auto& w : seg)
      if (w.size() != L) throw ShapeError("stitch: segment length differs from the plan");
  }

  const std::size_t ov = plan.overlap();
  const std::size_t width = std::min<std::size_t>(256, ov / 4);
  std::vector<Waveform> out;
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> track(plan.padded_length, 0.0);
    for (std::size_t j = 0; j < segments.size(); ++j) {
      const std::size_t o = plan.offsets[j];
      const auto seg = segments[j][i].samples();
      // Positions before `take` keep the earlier segment's samples.
      std::size_t fade_begin = o, fade_end = o;
      if (j > 0 && ov > 0) {
        const std::size_t mid = o + ov / 2;
        fade_begin = mid - width / 2;
        fade_end = fade_begin + width;
      }
      for (std::size_t p = fade_begin; p < o + L; ++p) {
        const double v = seg[p - o];
        if (p < fade_end) {
          const double lambda = (static_cast<double>(p - fade_begin) + 0.5) / static_cast<double>(width);
          track[p] = (1.0 - lambda) * track[p] + lambda * v;
        } else {
          track[p] = v;
        }
      }
    }
    out.emplace_back(std::move(track), rate);
  }
  return out;
}

namespace {

std::vector<Waveform> slice_all(std::span<const Waveform> waves, std::size_t offset,
                                std::size_t length) {
  std::vector<Waveform> out;
  for (const auto& w : waves) out.push_back(w.slice(offset, length));
  return out;
}

}  // namespace

SeparationResult separate(const MixtureProblem& problem,
                          std::span<const ScoreModel* const> models,
                          const SeparationConfig& config, std::span<const Waveform> references) {
  const std::size_t n = problem.mixture.size();
  const std::size_t N = models.size();
  const int rate = problem.mixture.sample_rate();
  if (N < 2) throw ConfigError("separation needs at least two source models");
  if (static_cast<std::size_t>(problem.mixing.sources) != N)
    throw ConfigError("model count differs from the mixing model's source count");
  if (config.best_of_k == 0) throw ConfigError("best_of_k must be at least 1");
  const bool teacher = config.mode == SeparationMode::AutoRegressiveTeacherForcing;
  const bool needs_refs = teacher || config.selection == Selection::OracleSiSdr;
  if (needs_refs && references.size() != N)
    throw ConfigError("this configuration needs one reference waveform per source");
  for (const auto& r : references)
    if (r.size() != n) throw ShapeError("reference length differs from the mixture");

  const std::size_t L = config.segment_length;
  SegmentPlan plan;
  switch (config.mode) {
    case SeparationMode::Naive: {
      const std::size_t padded = ((std::max<std::size_t>(n, 1) + L - 1) / L) * L;
      plan = plan_segments(n, padded, 0.0);
      break;
    }
    case SeparationMode::Segmented: {
      // Disjoint segments of the AR hop length.
      const auto seg = plan_segments(L, L, config.overlap_ratio).hop;
      plan = plan_segments(n, seg, 0.0);
      break;
    }
    default:
      plan = plan_segments(n, L, config.overlap_ratio);
  }
  const bool auto_regressive = config.mode == SeparationMode::AutoRegressive || teacher;

  const Waveform padded_mix = problem.mixture.slice(0, plan.padded_length);
  const auto padded_refs = slice_all(references, 0, plan.padded_length);
  const std::size_t Ls = plan.segment_length;
  const std::size_t ov = plan.overlap();

  SeparationResult result;
  result.config = config;
  result.plan = plan;
  std::vector<std::vector<Waveform>> chosen;

  for (std::size_t j = 0; j < plan.offsets.size(); ++j) {
    const std::size_t offset = plan.offsets[j];
    MixtureProblem segment(padded_mix.slice(offset, Ls), problem.mixing);
    const auto seg_refs = slice_all(padded_refs, offset, Ls);

    SourceConditions conditions;
    if (auto_regressive && j > 0 && ov > 0) {
      for (std::size_t i = 1; i < N; ++i) {
        InpaintCondition cond;
        cond.mask.assign(Ls, 0);
        std::fill_n(cond.mask.begin(), ov, 1);
        cond.values.assign(Ls, 0.0);
        cond.mode = teacher ? ConditionMode::TeacherForcing : ConditionMode::PreviousEstimate;
        const auto& src = teacher ? seg_refs[i].data() : chosen[j - 1][i].data();
        const std::size_t from = teacher ? 0 : plan.hop;
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), ov, cond.values.begin());
        conditions.emplace_back(std::move(cond));
      }
    }

    std::vector<std::uint64_t> seeds(config.best_of_k);
    for (std::size_t c = 0; c < seeds.size(); ++c)
      seeds[c] = candidate_seed(config.sampler.seed, j, c);
    auto samples = sample_posterior_batch(segment, models, config.sampler, conditions, seeds);

    std::vector<std::vector<Waveform>> candidates;
    for (auto& cand : samples) {
      std::vector<Waveform> waves;
      for (auto& s : cand) waves.emplace_back(std::move(s), rate);
      candidates.push_back(std::move(waves));
    }
    const auto choice = select_best_of_k(candidates, config.selection, seg_refs, segment.mixture);

    std::vector<Waveform> picked;
    for (std::size_t r = 0; r < N; ++r) picked.push_back(candidates[choice.index][choice.permutation[r]]);
    chosen.push_back(std::move(picked));

    SegmentRecord rec;
    rec.index = j;
    rec.offset = offset;
    rec.length = Ls;
    rec.chosen = choice.index;
    rec.score = choice.score;
    rec.permutation = choice.permutation;
    rec.seeds = seeds;
    result.per_segment.push_back(std::move(rec));
  }

  for (auto& track : stitch(chosen, plan)) result.sources.push_back(track.slice(0, n));
  return result;
}

}  // namespace arsep
