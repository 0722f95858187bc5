#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arsep/sampler.hpp"
#include "arsep/signal.hpp"

namespace arsep {

/// Segment layout over a signal: segments of `segment_length` starting every
/// `hop` samples until the signal end is covered; the tail is zero-padded.
struct SegmentPlan {
  std::size_t signal_length = 0;
  std::size_t segment_length = 0;
  double overlap_ratio = 0.0;
  std::size_t hop = 0;
  std::vector<std::size_t> offsets;
  std::size_t padded_length = 0;

  std::size_t overlap() const { return segment_length - hop; }
  std::size_t padding() const { return padded_length - signal_length; }
};

SegmentPlan plan_segments(std::size_t signal_length, std::size_t segment_length,
                          double overlap_ratio);

enum class SeparationMode { Naive, Segmented, AutoRegressive, AutoRegressiveTeacherForcing };
enum class Selection { OracleSiSdr, MixtureResidual };

std::string to_string(SeparationMode mode);
SeparationMode parse_mode(const std::string& name);
std::string to_string(Selection selection);
Selection parse_selection(const std::string& name);

struct SeparationConfig {
  SeparationMode mode = SeparationMode::AutoRegressive;
  std::size_t segment_length = 131072;
  double overlap_ratio = 0.75;
  SamplerConfig sampler;
  std::size_t best_of_k = 3;
  Selection selection = Selection::OracleSiSdr;
};

struct SegmentRecord {
  std::size_t index = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t chosen = 0;
  double score = 0.0;
  std::vector<std::size_t> permutation;
  std::vector<std::uint64_t> seeds;
};

struct SeparationResult {
  std::vector<Waveform> sources;
  std::vector<SegmentRecord> per_segment;
  SeparationConfig config;
  SegmentPlan plan;
};

struct Choice {
  std::size_t index = 0;
  std::vector<std::size_t> permutation;  // candidate source for each reference slot
  double score = 0.0;
};

/// OracleSiSdr: candidate and source permutation maximizing mean SI-SDR
/// against the references (references with no energy are skipped).
/// MixtureResidual: candidate minimizing ||mixture - sum of sources||.
Choice select_best_of_k(std::span<const std::vector<Waveform>> candidates, Selection selection,
                        std::span<const Waveform> references, const Waveform& mixture);

/// Merges per-segment sources into full padded-length tracks. Each overlap
/// switches from the earlier to the later segment at its midpoint through a
/// linear crossfade of min(256, overlap / 4) samples.
std::vector<Waveform> stitch(std::span<const std::vector<Waveform>> segments,
                             const SegmentPlan& plan);

/// Runs one of the four posterior-sampling strategies; `references` are the
/// ground-truth sources, required for oracle selection and teacher forcing.
SeparationResult separate(const MixtureProblem& problem,
                          std::span<const ScoreModel* const> models,
                          const SeparationConfig& config,
                          std::span<const Waveform> references = {});

/// Seed of candidate `candidate` in segment `segment`.
std::uint64_t candidate_seed(std::uint64_t base, std::size_t segment, std::size_t candidate);

}  // namespace arsep
