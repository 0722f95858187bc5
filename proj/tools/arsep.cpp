// arsep: synth / separate / nmf / eval / sweep.
// Exit codes: 0 success, 2 configuration error, 3 runtime or numerical error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsep/bank.hpp"
#include "arsep/errors.hpp"
#include "arsep/experiment.hpp"
#include "arsep/metrics.hpp"
#include "arsep/nmf.hpp"
#include "arsep/pipeline.hpp"
#include "arsep/random.hpp"
#include "arsep/runconfig.hpp"
#include "arsep/sweep.hpp"
#include "arsep/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace arsep;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<fs::path> wavs_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .wav files in " + dir.string());
  return files;
}

std::vector<Waveform> read_all(const std::vector<fs::path>& files) {
  std::vector<Waveform> out;
  for (const auto& f : files) out.push_back(read_wav(f));
  return out;
}

void write_sources(const fs::path& dir, const std::vector<Waveform>& sources) {
  ensure_dir(dir);
  for (std::size_t i = 0; i < sources.size(); ++i)
    write_wav(dir / ("source_" + std::to_string(i) + ".wav"), sources[i]);
}

json report_json(const EvalReport& report) {
  json per = json::array();
  for (const auto& m : report.per_source)
    per.push_back({{"si_sdr", m.si_sdr}, {"sdr", m.sdr}, {"si_sdri", m.si_sdri}, {"sdri", m.sdri}});
  return {{"per_source", per},
          {"permutation", report.permutation},
          {"mean_si_sdri", report.mean_si_sdri()},
          {"mean_sdri", report.mean_sdri()},
          {"identity_switch_rate", report.identity_switch_rate
                                       ? json(*report.identity_switch_rate)
                                       : json(nullptr)}};
}

json contour_json(const Contour& c) { return {{"times", c.times}, {"hz", c.hz}}; }

json singer_json(const SingerSpec& s) {
  return {{"name", s.name},
          {"partial_amplitudes", s.partial_amplitudes},
          {"vibrato_rate", s.vibrato_rate},
          {"vibrato_depth", s.vibrato_depth},
          {"base_gain", s.base_gain}};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string scenario = "crossing";
  double duration = 8.0;
  std::uint64_t seed = 0;
  int rate = 8000;
  std::size_t segment = 8192;
  std::size_t bank_hop = 0;
  bool bank = true;
  fs::path out;
};

int run_synth(const SynthArgs& a) {
  BenchmarkConfig config;
  config.scenario = parse_scenario(a.scenario);
  config.duration = a.duration;
  config.sample_rate = a.rate;
  config.segment_length = a.segment;
  config.bank_hop = a.bank_hop ? a.bank_hop : std::max<std::size_t>(1, a.segment / 4);
  config.validate();

  const auto scenario = make_scenario(config.scenario, a.duration, a.seed);
  const auto render = render_scenario(scenario, a.rate, 1.0);
  ensure_dir(a.out);
  for (std::size_t v = 0; v < render.voices.size(); ++v)
    write_wav(a.out / ("voice_" + std::to_string(v) + ".wav"), render.voices[v]);
  write_wav(a.out / "mixture.wav", render.mixture);

  std::string csv = "time,f0_0,f0_1\n";
  for (double t = 0.0; t <= a.duration + 1e-9; t += 0.01)
    csv += std::to_string(t) + "," + std::to_string(scenario.contours[0].at(t)) + "," +
           std::to_string(scenario.contours[1].at(t)) + "\n";
  write_text(a.out / "contours.csv", csv);

  json j = {{"kind", to_string(scenario.kind)},
            {"duration", scenario.duration},
            {"seed", scenario.seed},
            {"sample_rate", a.rate},
            {"crossing_times", scenario.crossing_times},
            {"singers", {singer_json(scenario.singers[0]), singer_json(scenario.singers[1])}},
            {"contours", {contour_json(scenario.contours[0]), contour_json(scenario.contours[1])}},
            {"performances",
             {{{"vibrato_phase", scenario.performances[0].vibrato_phase},
               {"wobble_phase", scenario.performances[0].wobble_phase}},
              {{"vibrato_phase", scenario.performances[1].vibrato_phase},
               {"wobble_phase", scenario.performances[1].wobble_phase}}}},
            {"voice_rms", 1.0}};
  if (a.bank) {
    const auto bank = benchmark_bank(config, scenario);
    save_bank(a.out / "bank.bin", bank);
    j["bank"] = {{"file", "bank.bin"}, {"count", bank.size()}, {"length", a.segment}};
  }
  write_text(a.out / "scenario.json", j.dump(2) + "\n");
  std::cout << "wrote " << a.out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SeparateArgs {
  std::string mode = "ar";
  fs::path mixture;
  std::vector<fs::path> refs;
  fs::path bank;
  fs::path config;
  std::optional<double> overlap;
  std::optional<std::size_t> segment;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> best_of;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_min, sigma_max, bandwidth_scale;
  std::optional<std::string> integrator, selection;
  fs::path out;
};

int run_separate(const SeparateArgs& a) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (a.steps) rc.bench.steps = *a.steps;
  if (a.best_of) rc.bench.best_of_k = *a.best_of;
  if (a.seed) rc.bench.sampler_seed = *a.seed;
  if (a.sigma_min) rc.bench.sigma_min = *a.sigma_min;
  if (a.sigma_max) rc.bench.sigma_max = *a.sigma_max;
  if (a.bandwidth_scale) rc.bench.bandwidth_scale = *a.bandwidth_scale;
  if (a.integrator) rc.set("sampler.integrator", *a.integrator);
  const bool have_refs = !a.refs.empty();
  if (a.selection) rc.set("pipeline.selection", *a.selection);
  else if (!have_refs) rc.bench.selection = Selection::MixtureResidual;
  const double overlap = a.overlap.value_or(rc.overlaps.front());

  const auto mixture = read_wav(a.mixture);
  const auto refs = read_all(a.refs);
  if (have_refs && refs.size() < 2) throw ConfigError("--refs needs one file per source");
  const auto bank = load_exemplars(a.bank);
  rc.bench.segment_length = a.segment.value_or(bank.front().size());
  rc.bench.validate();

  auto prior = std::make_shared<const MixturePrior>(
      kde_prior_from_exemplars(bank, benchmark_bandwidth(rc.bench, bank)));
  const MixtureScoreModel model(prior);
  const std::size_t n = have_refs ? refs.size() : 2;
  const std::vector<const ScoreModel*> models(n, &model);
  MixingModel mixing;
  mixing.sources = static_cast<int>(n);
  const MixtureProblem problem(mixture, mixing);

  SeparationConfig sc;
  sc.mode = parse_mode(a.mode);
  sc.segment_length = rc.bench.segment_length;
  sc.overlap_ratio = overlap;
  sc.best_of_k = rc.bench.best_of_k;
  sc.selection = rc.bench.selection;
  sc.sampler.integrator = rc.bench.integrator;
  sc.sampler.grid = make_grid(NoiseSchedule{rc.bench.sigma_min, rc.bench.sigma_max}, rc.bench.steps);
  sc.sampler.seed = rc.bench.sampler_seed;
  const auto result = separate(problem, models, sc, refs);

  write_sources(a.out, result.sources);
  json segments = json::array();
  for (const auto& s : result.per_segment)
    segments.push_back({{"index", s.index},
                        {"offset", s.offset},
                        {"length", s.length},
                        {"chosen", s.chosen},
                        {"score", s.score},
                        {"permutation", s.permutation},
                        {"seeds", s.seeds}});
  json diag = {{"mode", to_string(sc.mode)},
               {"mixture", a.mixture.string()},
               {"bank", a.bank.string()},
               {"overlap", overlap},
               {"hop", result.plan.hop},
               {"offsets", result.plan.offsets},
               {"padded_length", result.plan.padded_length},
               {"selection", to_string(sc.selection)},
               {"sampler_seed", sc.sampler.seed},
               {"config", to_text(rc)},
               {"segments", segments}};
  if (have_refs) diag["eval"] = report_json(evaluate(result.sources, refs, mixture));
  write_text(a.out / "diagnostics.json", diag.dump(2) + "\n");
  std::cout << "wrote " << result.sources.size() << " sources to " << a.out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct NmfArgs {
  fs::path mixture;
  std::size_t sources = 2;
  std::size_t components = 8;
  std::size_t iters = 300;
  std::uint64_t seed = 0;
  NmfOptions options;
  fs::path out;
};

int run_nmf(const NmfArgs& a) {
  const auto mixture = read_wav(a.mixture);
  MixingModel mixing;
  mixing.sources = static_cast<int>(a.sources);
  const auto sep = separate_nmf(MixtureProblem(mixture, mixing), a.sources, a.components, a.iters,
                                a.seed, a.options);
  write_sources(a.out, sep.sources);
  json j = {{"sources", a.sources},
            {"components_per_source", a.components},
            {"iterations", a.iters},
            {"seed", a.seed},
            {"frame", a.options.frame_size},
            {"hop", a.options.hop_size},
            {"fmin", a.options.fmin},
            {"fmax", a.options.fmax},
            {"used_random_init", sep.used_random_init}};
  write_text(a.out / "nmf.json", j.dump(2) + "\n");
  if (sep.used_random_init) std::cerr << "warning: no pitch candidates; used random init\n";
  std::cout << "wrote " << sep.sources.size() << " sources to " << a.out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  fs::path est, refs, mixture, out, csv;
  bool identity = false;
  std::size_t identity_frame = 1024;
};

int run_eval(const EvalArgs& a) {
  const auto est = read_all(wavs_in(a.est));
  const auto refs = read_all(wavs_in(a.refs));
  const auto mixture = read_wav(a.mixture);
  auto report = evaluate(est, refs, mixture);
  if (a.identity) {
    const auto protos = singer_prototypes({bright_singer(), dark_singer()}, mixture.sample_rate(),
                                          a.identity_frame, 0);
    std::vector<Waveform> ordered;
    for (std::size_t r = 0; r < refs.size(); ++r) ordered.push_back(est[report.permutation[r]]);
    report.identity_switch_rate = identity_switch_rate(ordered, protos, a.identity_frame);
  }
  const auto j = report_json(report);
  if (a.out.empty()) std::cout << j.dump(2) << "\n";
  else write_text(a.out, j.dump(2) + "\n");
  if (!a.csv.empty()) {
    const bool fresh = !fs::exists(a.csv);
    std::ofstream csv(a.csv, std::ios::app);
    if (!csv) throw Error("cannot write " + a.csv.string());
    if (fresh) csv << "est,si_sdri,sdri,identity_switch_rate\n";
    csv << a.est.string() << ',' << report.mean_si_sdri() << ',' << report.mean_sdri() << ','
        << (report.identity_switch_rate ? std::to_string(*report.identity_switch_rate) : "") << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  fs::path config;
  std::vector<std::string> sets;
  std::optional<std::string> modes, overlaps, seeds;
  std::optional<std::size_t> workers;
  fs::path out = "sweep_out";
};

int run_sweep(const SweepArgs& a) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (a.modes) rc.set("grid.modes", *a.modes);
  if (a.overlaps) rc.set("grid.overlaps", *a.overlaps);
  if (a.seeds) rc.set("grid.seeds", *a.seeds);
  if (a.workers) rc.workers = *a.workers;
  rc.validate();

  ensure_dir(a.out);
  write_text(a.out / "resolved.conf", to_text(rc));
  const auto report = sweep(rc, {}, [](const RunRow& r) {
    std::cerr << r.mode << " r=" << r.overlap << " seed=" << r.seed;
    if (r.error) std::cerr << " error: " << *r.error << "\n";
    else std::cerr << " si_sdri=" << *r.si_sdri << " (" << r.seconds << " s)\n";
  });
  write_text(a.out / "rows.csv", rows_csv(report));
  write_text(a.out / "cells.csv", cells_csv(report));
  write_text(a.out / "report.json", to_json(report).dump(2) + "\n");
  write_text(a.out / "plot.dat", plot_data(report));
  std::cout << cells_csv(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auto-regressive diffusion source separation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render a synthetic duet, its contours and an exemplar bank");
  s->add_option("--scenario", synth.scenario, "crossing | parallel | same-singer")->capture_default_str();
  s->add_option("--duration", synth.duration, "Seconds")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--rate", synth.rate, "Sample rate (Hz)")->capture_default_str();
  s->add_option("--segment", synth.segment, "Exemplar length (samples)")->capture_default_str();
  s->add_option("--bank-hop", synth.bank_hop, "Exemplar window hop (default: segment / 4)");
  s->add_flag("!--no-bank", synth.bank, "Skip writing bank.bin");
  s->add_option("--out", synth.out)->required();

  SeparateArgs sep;
  auto* p = app.add_subcommand("separate", "Posterior-sampling separation with a KDE exemplar prior");
  p->add_option("--mode", sep.mode, "naive | segmented | ar | ar-tf")->capture_default_str();
  p->add_option("--mixture", sep.mixture)->required()->check(CLI::ExistingFile);
  p->add_option("--refs", sep.refs, "Ground-truth sources")->check(CLI::ExistingFile);
  p->add_option("--bank", sep.bank, "Exemplar bank file or directory of WAVs")->required()->check(CLI::ExistingPath);
  p->add_option("--config", sep.config, "Config file; flags override it")->check(CLI::ExistingFile);
  p->add_option("--overlap", sep.overlap);
  p->add_option("--segment", sep.segment, "Segment length (default: exemplar length)");
  p->add_option("--steps", sep.steps);
  p->add_option("--best-of", sep.best_of);
  p->add_option("--seed", sep.seed);
  p->add_option("--sigma-min", sep.sigma_min);
  p->add_option("--sigma-max", sep.sigma_max);
  p->add_option("--bandwidth-scale", sep.bandwidth_scale, "KDE bandwidth as a fraction of bank RMS");
  p->add_option("--integrator", sep.integrator, "heun | euler");
  p->add_option("--selection", sep.selection, "oracle-sisdr | mixture-residual");
  p->add_option("--out", sep.out)->required();

  NmfArgs nmf;
  auto* n = app.add_subcommand("nmf", "Pitch-informed KL-NMF separation");
  n->add_option("--mixture", nmf.mixture)->required()->check(CLI::ExistingFile);
  n->add_option("--sources", nmf.sources)->capture_default_str();
  n->add_option("--components", nmf.components, "Components per source")->capture_default_str();
  n->add_option("--iters", nmf.iters)->capture_default_str();
  n->add_option("--seed", nmf.seed)->capture_default_str();
  n->add_option("--frame", nmf.options.frame_size)->capture_default_str();
  n->add_option("--hop", nmf.options.hop_size)->capture_default_str();
  n->add_option("--fmin", nmf.options.fmin)->capture_default_str();
  n->add_option("--fmax", nmf.options.fmax)->capture_default_str();
  n->add_option("--out", nmf.out)->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "SI-SDR / SDR report with permutation-invariant alignment");
  e->add_option("--est", ev.est, "Directory of estimate WAVs")->required();
  e->add_option("--refs", ev.refs, "Directory of reference WAVs")->required();
  e->add_option("--mixture", ev.mixture)->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "report.json (default: stdout)");
  e->add_option("--csv", ev.csv, "Append a summary row to this CSV");
  e->add_flag("--identity", ev.identity, "Also report the identity switch rate against the preset singers");
  e->add_option("--identity-frame", ev.identity_frame)->capture_default_str();

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Mode x overlap x seed benchmark grid");
  w->add_option("--config", sw.config)->check(CLI::ExistingFile);
  w->add_option("--set", sw.sets, "key=value override (repeatable)");
  w->add_option("--modes", sw.modes, "Comma list");
  w->add_option("--overlaps", sw.overlaps, "Comma list");
  w->add_option("--seeds", sw.seeds, "Comma list; a..b ranges allowed");
  w->add_option("--workers", sw.workers, "Default: ARSEP_WORKERS or hardware threads");
  w->add_option("--out", sw.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*s) return run_synth(synth);
    if (*p) return run_separate(sep);
    if (*n) return run_nmf(nmf);
    if (*e) return run_eval(ev);
    if (*w) return run_sweep(sw);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
