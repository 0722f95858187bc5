#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arsep/metrics.hpp"
#include "arsep/pipeline.hpp"
#include "arsep/score.hpp"
#include "arsep/synth.hpp"

namespace arsep {

/// Everything needed to rebuild one benchmark run from scratch.
struct BenchmarkConfig {
  ScenarioKind scenario = ScenarioKind::Crossing;
  int sample_rate = 8000;
  double duration = 4.096;
  std::size_t segment_length = 8192;
  // Exemplar bank: every singer renders the scenario contours plus
  // `distractor_phrases` random phrases; windows every `bank_hop` samples.
  std::size_t distractor_phrases = 4;
  std::size_t bank_hop = 2048;
  double bandwidth_scale = 0.1;  // KDE bandwidth as a fraction of bank RMS
  // Posterior sampler.
  Integrator integrator = Integrator::Heun;
  std::size_t steps = 50;
  double sigma_min = 0.01;
  double sigma_max = 80.0;
  std::size_t best_of_k = 3;
  Selection selection = Selection::OracleSiSdr;
  std::uint64_t sampler_seed = 0;  // mixed into every per-run sampler seed
  // NMF baseline.
  std::size_t nmf_components = 8;
  std::size_t nmf_iterations = 300;
  std::size_t nmf_frame = 1024;
  std::size_t nmf_hop = 256;
  double nmf_fmin = 150.0;
  double nmf_fmax = 400.0;
  // Identity diagnostics.
  std::size_t identity_frame = 1024;

  void validate() const;
};

/// Rendered scenario, its exemplar-bank prior and identity prototypes.
struct BenchmarkInstance {
  std::uint64_t seed = 0;
  DuetScenario scenario;
  DuetRender render;
  std::shared_ptr<const MixturePrior> prior;
  IdentityPrototypes prototypes;
};

/// Exemplar bank for a scenario: every singer renders both scenario melodies
/// and the distractor phrases; RMS-normalized windows every bank_hop samples.
std::vector<std::vector<double>> benchmark_bank(const BenchmarkConfig& config,
                                                const DuetScenario& scenario);
/// bandwidth_scale x RMS of the bank.
double benchmark_bandwidth(const BenchmarkConfig& config,
                           std::span<const std::vector<double>> bank);

BenchmarkInstance make_instance(const BenchmarkConfig& config, std::uint64_t seed);

/// Modes accepted by run_mode: the four separation modes plus "nmf".
const std::vector<std::string>& benchmark_modes();

struct RunRow {
  std::string mode;
  double overlap = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> si_sdri;
  std::optional<double> sdri;
  std::optional<double> identity_switch_rate;
  std::optional<std::string> error;
  double seconds = 0.0;
};

struct RunOutput {
  RunRow row;
  std::vector<Waveform> estimates;
  std::optional<EvalReport> report;
};

/// Separates the instance mixture with one mode and evaluates it.
RunOutput run_mode(const BenchmarkInstance& instance, const BenchmarkConfig& config,
                   const std::string& mode, double overlap);

}  // namespace arsep
