#include <doctest.h>

#include <cmath>

#include "arsep/errors.hpp"
#include "arsep/metrics.hpp"
#include "arsep/pipeline.hpp"

using namespace arsep;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  fill_normal(rng, v, scale);
  return v;
}

SeparationConfig sep_config(SeparationMode mode, std::size_t L, double r, std::size_t k,
                            Selection sel = Selection::OracleSiSdr) {
  SeparationConfig c;
  c.mode = mode;
  c.segment_length = L;
  c.overlap_ratio = r;
  c.best_of_k = k;
  c.selection = sel;
  c.sampler.grid = make_grid(NoiseSchedule{}, 12);
  c.sampler.seed = 77;
  return c;
}

// Two sources with correlated-in-time structure and a KDE-free Gaussian prior
// defined over every segment length used below.
struct Toy {
  std::vector<Waveform> refs;
  Waveform mixture;
};

Toy make_toy(std::size_t n) {
  Toy t;
  auto a = noise(n, 1, 0.8), b = noise(n, 2, 0.8);
  t.refs = {Waveform(a, 8000), Waveform(b, 8000)};
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i] + b[i];
  t.mixture = Waveform(x, 8000);
  return t;
}

class AnyLengthGaussian final : public ScoreModel {
 public:
  explicit AnyLengthGaussian(double variance) : v_(variance) {}
  void score(std::span<const double> x, double sigma, std::span<double> out) const override {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i] / (v_ + sigma * sigma);
  }
  double log_density(std::span<const double> x, double sigma) const override {
    const double v = v_ + sigma * sigma;
    double e = 0.0;
    for (double xi : x) e += xi * xi;
    return -0.5 * e / v - 0.5 * static_cast<double>(x.size()) * std::log(2 * M_PI * v);
  }

 private:
  double v_;
};

}  // namespace

TEST_CASE("segment plans") {
  const auto p = plan_segments(200, 100, 0.0);
  CHECK(p.offsets == std::vector<std::size_t>{0, 100});
  CHECK(p.padding() == 0);

  CHECK(plan_segments(1 << 20, 131072, 0.75).hop == 32768);

  const auto s = plan_segments(30, 100, 0.5);
  CHECK(s.offsets == std::vector<std::size_t>{0});
  CHECK(s.padded_length == 100);
  CHECK(s.padding() == 70);

  const auto q = plan_segments(1000, 256, 0.75);
  CHECK(q.hop == 64);
  for (std::size_t j = 1; j < q.offsets.size(); ++j) CHECK(q.offsets[j] - q.offsets[j - 1] == 64);
  CHECK(q.offsets.back() + 256 >= 1000);
  CHECK(q.offsets.back() < 1000 - 256 + 64);

  CHECK_THROWS_AS(plan_segments(10, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(plan_segments(10, 4, -0.1), ConfigError);
  CHECK(plan_segments(10, 4, 0.99).hop == 1);
}

TEST_CASE("naive best-of-1 reduces to one posterior sample") {
  const auto toy = make_toy(64);
  const GaussianScoreModel g(GaussianPrior{std::vector<double>(64, 0.0), 0.64});
  const std::vector<const ScoreModel*> models{&g, &g};
  const MixtureProblem problem(toy.mixture, MixingModel{});
  const auto cfg = sep_config(SeparationMode::Naive, 64, 0.75, 1, Selection::MixtureResidual);
  const auto res = separate(problem, models, cfg);

  auto sc = cfg.sampler;
  sc.seed = candidate_seed(cfg.sampler.seed, 0, 0);
  const auto direct = sample_posterior(problem, models, sc);
  REQUIRE(res.sources.size() == 2);
  CHECK(res.sources[0].data() == direct[0]);
  CHECK(res.sources[1].data() == direct[1]);
}

TEST_CASE("AR with zero overlap is bit-identical to Segmented") {
  const auto toy = make_toy(1000);
  const AnyLengthGaussian g(0.64);
  const std::vector<const ScoreModel*> models{&g, &g};
  const MixtureProblem problem(toy.mixture, MixingModel{});
  const auto ar = separate(problem, models, sep_config(SeparationMode::AutoRegressive, 256, 0.0, 2), toy.refs);
  const auto seg = separate(problem, models, sep_config(SeparationMode::Segmented, 256, 0.0, 2), toy.refs);
  for (std::size_t i = 0; i < 2; ++i) CHECK(ar.sources[i].data() == seg.sources[i].data());
}

TEST_CASE("segmented mode uses disjoint hop-length segments") {
  const auto toy = make_toy(1000);
  const AnyLengthGaussian g(0.64);
  const std::vector<const ScoreModel*> models{&g, &g};
  const auto res = separate(MixtureProblem(toy.mixture, MixingModel{}), models,
                            sep_config(SeparationMode::Segmented, 256, 0.75, 1), toy.refs);
  CHECK(res.plan.segment_length == 64);
  CHECK(res.plan.hop == 64);
  CHECK(res.per_segment.size() == 16);
}

TEST_CASE("every mode emits sources that sum to the mixture") {
  const auto toy = make_toy(777);
  const AnyLengthGaussian g(0.64);
  const std::vector<const ScoreModel*> models{&g, &g};
  const MixtureProblem problem(toy.mixture, MixingModel{});
  for (auto mode : {SeparationMode::Naive, SeparationMode::Segmented, SeparationMode::AutoRegressive,
                    SeparationMode::AutoRegressiveTeacherForcing}) {
    const auto res = separate(problem, models, sep_config(mode, 128, 0.5, 2), toy.refs);
    REQUIRE(res.sources.size() == 2);
    CHECK(res.sources[0].size() == 777);
    double m = 0.0;
    for (std::size_t j = 0; j < 777; ++j)
      m = std::max(m, std::abs(res.sources[0][j] + res.sources[1][j] - toy.mixture[j]));
    CHECK(m < 1e-9);
  }
}

TEST_CASE("teacher forcing clamps the overlap of every later segment") {
  const auto toy = make_toy(512);
  const AnyLengthGaussian g(0.64);
  const std::vector<const ScoreModel*> models{&g, &g};
  const auto cfg = sep_config(SeparationMode::AutoRegressiveTeacherForcing, 128, 0.5, 1);
  const auto res = separate(MixtureProblem(toy.mixture, MixingModel{}), models, cfg, toy.refs);
  const double smin = cfg.sampler.grid.sigmas.back();
  const std::size_t ov = res.plan.overlap(), width = std::min<std::size_t>(256, ov / 4);
  // After the crossfade the stitched free source comes from the clamped segment.
  for (std::size_t j = 1; j < res.plan.offsets.size(); ++j) {
    const std::size_t o = res.plan.offsets[j];
    const std::size_t perm = res.per_segment[j].permutation[1];
    CHECK(perm == 1);
    for (std::size_t p = o + ov / 2 + width; p < std::min<std::size_t>(o + ov, 512); ++p)
      CHECK(std::abs(res.sources[1][p] - toy.refs[1][p]) < 5 * smin);
  }
}

TEST_CASE("separation is deterministic and best-of-k never lowers the oracle score") {
  const auto toy = make_toy(256);
  const AnyLengthGaussian g(0.64);
  const std::vector<const ScoreModel*> models{&g, &g};
  const MixtureProblem problem(toy.mixture, MixingModel{});
  const auto one = separate(problem, models, sep_config(SeparationMode::Naive, 256, 0.0, 1), toy.refs);
  const auto again = separate(problem, models, sep_config(SeparationMode::Naive, 256, 0.0, 1), toy.refs);
  CHECK(one.sources[0].data() == again.sources[0].data());
  const auto four = separate(problem, models, sep_config(SeparationMode::Naive, 256, 0.0, 4), toy.refs);
  CHECK(four.per_segment[0].score >= one.per_segment[0].score);
}

TEST_CASE("missing references are a configuration error") {
  const auto toy = make_toy(64);
  const AnyLengthGaussian g(1.0);
  const std::vector<const ScoreModel*> models{&g, &g};
  const MixtureProblem problem(toy.mixture, MixingModel{});
  CHECK_THROWS_AS(separate(problem, models, sep_config(SeparationMode::AutoRegressiveTeacherForcing, 32, 0.5, 1,
                                                       Selection::MixtureResidual)),
                  ConfigError);
  CHECK_THROWS_AS(separate(problem, models, sep_config(SeparationMode::Naive, 32, 0.5, 1)), ConfigError);
}

TEST_CASE("best-of-k selection") {
  const auto toy = make_toy(300);
  std::vector<std::vector<Waveform>> one{toy.refs};
  CHECK(select_best_of_k(one, Selection::OracleSiSdr, toy.refs, toy.mixture).index == 0);

  std::vector<Waveform> noisy;
  for (std::size_t i = 0; i < 2; ++i) {
    auto v = toy.refs[i].data();
    const auto e = noise(v.size(), 10 + i, 5.0);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += e[j];
    noisy.emplace_back(v, 8000);
  }
  std::vector<std::vector<Waveform>> two{noisy, {toy.refs[1], toy.refs[0]}};
  const auto c = select_best_of_k(two, Selection::OracleSiSdr, toy.refs, toy.mixture);
  CHECK(c.index == 1);
  CHECK(c.permutation == std::vector<std::size_t>{1, 0});
  CHECK_THROWS_AS(select_best_of_k(two, Selection::OracleSiSdr, {}, toy.mixture), ConfigError);

  // Residual selection prefers the candidate that explains the mixture.
  std::vector<std::vector<Waveform>> res{noisy, toy.refs};
  CHECK(select_best_of_k(res, Selection::MixtureResidual, {}, toy.mixture).index == 1);
}

TEST_CASE("oracle selection matches brute force over candidates and permutations") {
  const std::size_t N = 3, k = 5, n = 200;
  std::vector<Waveform> refs;
  for (std::size_t i = 0; i < N; ++i) refs.emplace_back(noise(n, 100 + i), 8000);
  std::vector<std::vector<Waveform>> cands(k);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = 0; i < N; ++i) {
      auto v = refs[(i + c) % N].data();
      const auto e = noise(n, 200 + c * N + i, 0.3 + 0.2 * c);
      for (std::size_t j = 0; j < n; ++j) v[j] += e[j];
      cands[c].emplace_back(v, 8000);
    }
  double best = -1e300;
  std::size_t best_c = 0;
  std::vector<std::size_t> best_p;
  for (std::size_t c = 0; c < k; ++c)
    for (const auto& p : all_permutations(N)) {
      double s = 0.0;
      for (std::size_t r = 0; r < N; ++r) s += si_sdr(cands[c][p[r]], refs[r]);
      if (s / N > best) best = s / N, best_c = c, best_p = p;
    }
  const Waveform mix = Waveform::zeros(n, 8000);
  const auto choice = select_best_of_k(cands, Selection::OracleSiSdr, refs, mix);
  CHECK(choice.index == best_c);
  CHECK(choice.permutation == best_p);
  CHECK(choice.score == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("stitch with zero overlap concatenates") {
  const auto plan = plan_segments(8, 4, 0.0);
  std::vector<std::vector<Waveform>> segs{{Waveform({1, 2, 3, 4}, 8000)}, {Waveform({5, 6, 7, 8}, 8000)}};
  CHECK(stitch(segs, plan)[0].data() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("stitch of identical overlapping content reproduces it") {
  const auto signal = noise(4000, 5);
  const auto plan = plan_segments(4000, 1024, 0.75);
  std::vector<std::vector<Waveform>> segs;
  const Waveform full(signal, 8000);
  for (auto o : plan.offsets) segs.push_back({full.slice(o, 1024)});
  const auto out = stitch(segs, plan);
  for (std::size_t j = 0; j < 4000; ++j) CHECK(out[0][j] == doctest::Approx(signal[j]).epsilon(1e-12));
}

TEST_CASE("stitch crossfade bounds the seam slope") {
  const auto plan = plan_segments(4096, 2048, 0.5);
  REQUIRE(plan.offsets.size() == 3);
  std::vector<std::vector<Waveform>> segs;
  for (std::size_t j = 0; j < 3; ++j) segs.push_back({Waveform(std::vector<double>(2048, static_cast<double>(j)), 8000)});
  const auto out = stitch(segs, plan)[0];
  const double width = std::min<std::size_t>(256, plan.overlap() / 4);
  double max_jump = 0.0;
  for (std::size_t j = 1; j < out.size(); ++j) max_jump = std::max(max_jump, std::abs(out[j] - out[j - 1]));
  CHECK(max_jump <= 1.0 / width + 1e-12);
  // Earlier segment up to the overlap midpoint, later segment after it.
  CHECK(out[1024 + 512 - 200] == 0.0);
  CHECK(out[1024 + 512 + 200] == 1.0);
  CHECK_THROWS_AS(stitch(std::vector<std::vector<Waveform>>{segs[0]}, plan), ShapeError);
}
