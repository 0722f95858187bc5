#include "arsep/experiment.hpp"

#include <chrono>

#include "arsep/errors.hpp"
#include "arsep/nmf.hpp"
#include "arsep/random.hpp"

namespace arsep {

void BenchmarkConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (!(duration >= 2.0)) throw ConfigError("duration must be at least 2 s");
  if (segment_length == 0) throw ConfigError("segment_length must be positive");
  if (bank_hop == 0 || bank_hop > segment_length)
    throw ConfigError("bank_hop must lie in [1, segment_length]");
  if (!(bandwidth_scale > 0.0)) throw ConfigError("bandwidth_scale must be positive");
  if (steps == 0) throw ConfigError("steps must be positive");
  NoiseSchedule{sigma_min, sigma_max}.validate();
  if (best_of_k == 0) throw ConfigError("best_of_k must be at least 1");
  if (nmf_components == 0) throw ConfigError("nmf_components must be positive");
  if (identity_frame == 0) throw ConfigError("identity_frame must be positive");
  if (nmf_iterations == 0) throw ConfigError("nmf_iterations must be positive");
}

std::vector<std::vector<double>> benchmark_bank(const BenchmarkConfig& config,
                                                const DuetScenario& scenario) {
  const std::uint64_t seed = scenario.seed;
  // Phrase pool: the scenario melodies with their vibrato (each singer sings
  // both, with its own gain wobble) plus unrelated phrases. The hold at the
  // end lets windows start anywhere inside the scenario.
  const double hold = static_cast<double>(config.segment_length - config.bank_hop) /
                      config.sample_rate;
  BankOptions bank_options;
  bank_options.sample_rate = config.sample_rate;
  bank_options.window_hop = config.bank_hop;
  for (std::size_t v = 0; v < 2; ++v)
    bank_options.phrase_pool.push_back(
        {scenario.contours[v].extended(hold), scenario.performances[v].vibrato_phase});
  for (std::size_t d = 0; d < config.distractor_phrases; ++d)
    bank_options.phrase_pool.push_back(
        {random_phrase(scenario.duration, derive_seed(seed, 0xd157, d)).extended(hold), std::nullopt});

  std::vector<SingerSpec> singers{scenario.singers[0]};
  if (scenario.singers[1].name != scenario.singers[0].name)
    singers.push_back(scenario.singers[1]);
  const std::size_t phrase_len =
      static_cast<std::size_t>(std::llround((scenario.duration + hold) * config.sample_rate));
  const std::size_t per_phrase =
      phrase_len >= config.segment_length ? (phrase_len - config.segment_length) / config.bank_hop + 1 : 0;
  return build_exemplar_bank(singers, config.segment_length,
                             per_phrase * bank_options.phrase_pool.size(),
                             derive_seed(seed, 0xba4c), bank_options);
}

double benchmark_bandwidth(const BenchmarkConfig& config,
                           std::span<const std::vector<double>> bank) {
  // default_kde_bandwidth is 0.1 x bank RMS.
  return default_kde_bandwidth(bank) * config.bandwidth_scale / 0.1;
}

BenchmarkInstance make_instance(const BenchmarkConfig& config, std::uint64_t seed) {
  config.validate();
  BenchmarkInstance inst;
  inst.seed = seed;
  inst.scenario = make_scenario(config.scenario, config.duration, seed);
  inst.render = render_scenario(inst.scenario, config.sample_rate, 1.0);

  const auto bank = benchmark_bank(config, inst.scenario);
  inst.prior = std::make_shared<MixturePrior>(
      kde_prior_from_exemplars(bank, benchmark_bandwidth(config, bank)));

  inst.prototypes = singer_prototypes({bright_singer(), dark_singer()}, config.sample_rate,
                                      config.identity_frame, derive_seed(seed, 0x9407));
  return inst;
}

const std::vector<std::string>& benchmark_modes() {
  static const std::vector<std::string> modes{"naive", "segmented", "ar", "ar-tf", "nmf"};
  return modes;
}

RunOutput run_mode(const BenchmarkInstance& instance, const BenchmarkConfig& config,
                   const std::string& mode, double overlap) {
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  out.row.mode = mode;
  out.row.overlap = overlap;
  out.row.seed = instance.seed;
  const auto& refs = instance.render.voices;
  MixtureProblem problem(instance.render.mixture, MixingModel{});

  if (mode == "nmf") {
    NmfOptions options;
    options.frame_size = config.nmf_frame;
    options.hop_size = config.nmf_hop;
    options.fmin = config.nmf_fmin;
    options.fmax = config.nmf_fmax;
    out.estimates = separate_nmf(problem, refs.size(), config.nmf_components,
                                 config.nmf_iterations, derive_seed(instance.seed, 0x4e4d), options)
                        .sources;
  } else {
    SeparationConfig sc;
    sc.mode = parse_mode(mode);
    sc.segment_length = config.segment_length;
    sc.overlap_ratio = overlap;
    sc.best_of_k = config.best_of_k;
    sc.selection = config.selection;
    sc.sampler.grid = make_grid(NoiseSchedule{config.sigma_min, config.sigma_max}, config.steps);
    sc.sampler.integrator = config.integrator;
    sc.sampler.seed = derive_seed(instance.seed, 0x5a3d, config.sampler_seed);
    const MixtureScoreModel model(instance.prior);
    const std::vector<const ScoreModel*> models(refs.size(), &model);
    out.estimates = separate(problem, models, sc, refs).sources;
  }

  const auto report = evaluate(out.estimates, refs, instance.render.mixture);
  std::vector<Waveform> ordered;
  for (std::size_t r = 0; r < refs.size(); ++r) ordered.push_back(out.estimates[report.permutation[r]]);
  out.report = report;
  out.report->identity_switch_rate =
      identity_switch_rate(ordered, instance.prototypes, config.identity_frame);
  out.row.si_sdri = report.mean_si_sdri();
  out.row.sdri = report.mean_sdri();
  out.row.identity_switch_rate = out.report->identity_switch_rate;
  out.row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace arsep
