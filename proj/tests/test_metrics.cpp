#include <doctest.h>

#include <cmath>

#include "arsep/errors.hpp"
#include "arsep/metrics.hpp"
#include "arsep/random.hpp"
#include "arsep/synth.hpp"

using namespace arsep;

namespace {

std::vector<double> noise(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  fill_normal(rng, v, scale);
  return v;
}

std::vector<double> scaled(std::vector<double> v, double a) {
  for (double& x : v) x *= a;
  return v;
}

// Orthogonal to `ref` with the same energy.
std::vector<double> orthogonal(const std::vector<double>& ref, Rng& rng) {
  auto v = noise(ref.size(), rng);
  const double p = dot(v, ref) / energy(ref);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * ref[i];
  return scaled(v, std::sqrt(energy(ref) / energy(v)));
}

double direct_si_sdr(const std::vector<double>& est, const std::vector<double>& ref) {
  double er = 0, rr = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) er += est[i] * ref[i], rr += ref[i] * ref[i];
  const double a = er / rr;
  double t = 0, e = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    t += a * ref[i] * a * ref[i];
    e += (a * ref[i] - est[i]) * (a * ref[i] - est[i]);
  }
  return 10 * std::log10(t / e);
}

double direct_sdr(const std::vector<double>& est, const std::vector<double>& ref) {
  double s = 0, e = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) s += ref[i] * ref[i], e += (ref[i] - est[i]) * (ref[i] - est[i]);
  return 10 * std::log10(s / e);
}

}  // namespace

TEST_CASE("si_sdr examples") {
  Rng rng(1);
  const auto ref = noise(1000, rng);
  CHECK(si_sdr(ref, ref) == kMetricCapDb);
  CHECK(si_sdr(scaled(ref, 3.0), ref) == kMetricCapDb);
  auto est = ref;
  const auto o = orthogonal(ref, rng);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] += o[i];
  CHECK(std::abs(si_sdr(est, ref)) < 1e-9);
}

TEST_CASE("sdr examples") {
  Rng rng(2);
  const auto ref = noise(500, rng);
  CHECK(sdr(ref, ref) == kMetricCapDb);
  CHECK(std::abs(sdr(scaled(ref, 2.0), ref)) < 1e-12);
}

TEST_CASE("metric errors") {
  const std::vector<double> z(4, 0.0), a{1, 2, 3, 4};
  CHECK_THROWS_AS(si_sdr(a, z), DomainError);
  CHECK_THROWS_AS(sdr(a, z), DomainError);
  CHECK_THROWS_AS(si_sdr(a, std::vector<double>{1, 2}), ShapeError);
}

TEST_CASE("metrics match direct recomputation and si_sdr is scale invariant") {
  Rng rng(3);
  std::uniform_real_distribution<double> alpha(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = noise(256, rng);
    auto est = ref;
    const auto e = noise(256, rng, 0.1 + 0.05 * (trial % 20));
    for (std::size_t i = 0; i < est.size(); ++i) est[i] = 0.8 * est[i] + e[i];
    CHECK(std::abs(si_sdr(est, ref) - direct_si_sdr(est, ref)) < 1e-9);
    CHECK(std::abs(sdr(est, ref) - direct_sdr(est, ref)) < 1e-9);
    double a = 0.0;
    while (a == 0.0) a = alpha(rng);
    CHECK(std::abs(si_sdr(scaled(est, a), ref) - si_sdr(est, ref)) < 1e-9);
    CHECK(sdr(est, ref) <= kMetricCapDb);
  }
}

TEST_CASE("projection removes scale error") {
  Rng rng(4);
  const auto ref = noise(400, rng);
  const auto o = orthogonal(ref, rng);
  for (double beta : {0.3, 0.9, 1.7}) {
    std::vector<double> est(ref.size());
    for (std::size_t i = 0; i < est.size(); ++i) est[i] = beta * ref[i] + 0.2 * o[i];
    CHECK(si_sdr(est, ref) >= sdr(est, ref));
  }
}

TEST_CASE("evaluate with perfect estimates") {
  Rng rng(5);
  std::vector<Waveform> refs{Waveform(noise(300, rng), 8000), Waveform(noise(300, rng), 8000)};
  std::vector<double> x(300);
  for (std::size_t i = 0; i < 300; ++i) x[i] = refs[0][i] + refs[1][i];
  const Waveform mixture(x, 8000);
  const auto rep = evaluate(refs, refs, mixture);
  CHECK(rep.permutation == std::vector<std::size_t>{0, 1});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(rep.per_source[r].si_sdr == kMetricCapDb);
    CHECK(rep.per_source[r].si_sdri == doctest::Approx(kMetricCapDb - si_sdr(mixture, refs[r])));
    CHECK(rep.per_source[r].sdri == doctest::Approx(kMetricCapDb - sdr(mixture, refs[r])));
  }

  std::vector<Waveform> swapped{refs[1], refs[0]};
  const auto sw = evaluate(swapped, refs, mixture);
  CHECK(sw.permutation == std::vector<std::size_t>{1, 0});
  CHECK(sw.per_source[0].si_sdri == rep.per_source[0].si_sdri);
  CHECK(sw.mean_sdri() == rep.mean_sdri());

  CHECK_THROWS_AS(evaluate(std::vector<Waveform>{refs[0]}, refs, mixture), ShapeError);
}

TEST_CASE("evaluate permutation matches exhaustive search") {
  Rng rng(6);
  for (std::size_t N : {2u, 3u, 4u}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Waveform> refs, est;
      for (std::size_t i = 0; i < N; ++i) refs.emplace_back(noise(200, rng), 8000);
      for (std::size_t i = 0; i < N; ++i) {
        auto v = refs[(i + trial) % N].data();
        const auto e = noise(200, rng, 0.5 + 0.3 * i);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += e[j];
        est.emplace_back(v, 8000);
      }
      const Waveform mixture(noise(200, rng), 8000);
      double best = -1e300;
      std::vector<std::size_t> best_p;
      for (const auto& p : all_permutations(N)) {
        double s = 0;
        for (std::size_t r = 0; r < N; ++r) s += si_sdr(est[p[r]], refs[r]);
        if (s > best) best = s, best_p = p;
      }
      CHECK(evaluate(est, refs, mixture).permutation == best_p);
    }
  }
}

TEST_CASE("evaluate is invariant to consistent permutation") {
  Rng rng(7);
  std::vector<Waveform> refs, est;
  for (int i = 0; i < 3; ++i) refs.emplace_back(noise(100, rng), 8000);
  for (int i = 0; i < 3; ++i) {
    auto v = refs[i].data();
    const auto e = noise(100, rng, 0.4);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += e[j];
    est.emplace_back(v, 8000);
  }
  const Waveform mixture(noise(100, rng), 8000);
  const auto a = evaluate(est, refs, mixture);
  std::vector<Waveform> est2{est[2], est[0], est[1]}, refs2{refs[2], refs[0], refs[1]};
  const auto b = evaluate(est2, refs2, mixture);
  CHECK(a.mean_si_sdri() == doctest::Approx(b.mean_si_sdri()).epsilon(1e-12));
  CHECK(a.mean_sdri() == doctest::Approx(b.mean_sdri()).epsilon(1e-12));
}

TEST_CASE("identity switch rate") {
  const int rate = 8000;
  const std::size_t frame = 1024;
  const auto protos = singer_prototypes({bright_singer(), dark_singer()}, rate, frame, 3);
  const Contour flat{{0.0, 3.0}, {220.0, 220.0}};
  const auto bright = render_voice(bright_singer(), flat, rate, 2.0, std::uint64_t{1});
  const auto dark = render_voice(dark_singer(), flat, rate, 2.0, std::uint64_t{2});

  CHECK(identity_switch_rate(std::vector<Waveform>{bright}, protos, frame) == 0.0);
  CHECK(identity_switch_rate(std::vector<Waveform>{dark}, protos, frame) == 0.0);

  // Alternate whole frames between the two singers.
  std::vector<double> alt(bright.size());
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i / frame) % 2 ? dark[i] : bright[i];
  CHECK(identity_switch_rate(std::vector<Waveform>{Waveform(alt, rate)}, protos, frame) == 1.0);

  CHECK_THROWS_AS(identity_switch_rate(std::vector<Waveform>{bright.slice(0, 1500)}, protos, frame), DomainError);
}

TEST_CASE("spectral envelope is level invariant with a 40 dB floor") {
  const auto v = render_voice(bright_singer(), Contour{{0.0, 1.0}, {250.0, 250.0}}, 8000, 0.5, std::uint64_t{4});
  const auto frame = v.samples().subspan(1000, 1024);
  const auto a = spectral_envelope(frame, 8000);
  std::vector<double> loud(frame.begin(), frame.end());
  for (double& x : loud) x *= 7.0;
  const auto b = spectral_envelope(loud, 8000);
  REQUIRE(a.size() == kEnvelopeBands);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  const double top = *std::max_element(a.begin(), a.end());
  const double bottom = *std::min_element(a.begin(), a.end());
  CHECK(top - bottom <= std::log(1e4) + 1e-9);
}
