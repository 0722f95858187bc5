#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "arsep/random.hpp"
#include "arsep/schedule.hpp"
#include "arsep/score.hpp"
#include "arsep/signal.hpp"

namespace arsep {

enum class Integrator { Euler, Heun };

struct SamplerConfig {
  Integrator integrator = Integrator::Heun;
  TimeGrid grid;
  std::uint64_t seed = 0;
};

enum class ConditionMode { PreviousEstimate, TeacherForcing };

/// Known values for part of one source; masked positions are overwritten with
/// the target plus noise at the current level after every integrator step.
struct InpaintCondition {
  std::vector<std::uint8_t> mask;  // 1 = conditioned position
  std::vector<double> values;
  ConditionMode mode = ConditionMode::PreviousEstimate;

  std::size_t size() const { return mask.size(); }
};

/// Masked positions become values + sigma * eps; others are unchanged.
std::vector<double> apply_inpaint(std::span<const double> state,
                                  const InpaintCondition& condition, double sigma, Rng& rng);
std::vector<double> apply_inpaint(std::span<const double> state,
                                  const InpaintCondition& condition, double sigma,
                                  std::uint64_t rng_seed);

/// Integrates the probability-flow ODE ds/dsigma = -sigma * score(s, sigma)
/// from sigma_max to sigma_min, starting from N(0, sigma_max^2 I).
/// `length` defaults to the model's native length.
std::vector<double> sample_prior(const ScoreModel& model, const SamplerConfig& config,
                                 std::optional<std::size_t> length = std::nullopt);

/// Weakly-supervised posterior score for the free sources s_2..s_N with s_1
/// constrained to x - sum of the free sources:
///   score_i(s_i) - score_1(x - sum_j s_j).
/// models[0] is the constrained source's prior; states holds N-1 vectors.
std::vector<std::vector<double>> posterior_score(std::span<const ScoreModel* const> models,
                                                 std::span<const std::vector<double>> states,
                                                 std::span<const double> mixture,
                                                 double sigma);

/// Per-free-source conditions: empty, or one optional entry per free source.
using SourceConditions = std::vector<std::optional<InpaintCondition>>;

/// Posterior sample of all N sources; element 0 is the constrained source,
/// so the outputs sum to the mixture up to round-off.
std::vector<std::vector<double>> sample_posterior(const MixtureProblem& problem,
                                                  std::span<const ScoreModel* const> models,
                                                  const SamplerConfig& config,
                                                  const SourceConditions& conditions = {});

/// Independent posterior samples, one per seed, integrated in lockstep so the
/// score models see batched inputs. Result c equals
/// sample_posterior(..., config with seed = seeds[c], ...) bit for bit.
std::vector<std::vector<std::vector<double>>> sample_posterior_batch(
    const MixtureProblem& problem, std::span<const ScoreModel* const> models,
    const SamplerConfig& config, const SourceConditions& conditions,
    std::span<const std::uint64_t> seeds);

}  // namespace arsep
