// Times the OpenMP kernels against their serial references on problem sizes
// taken from the duet benchmark and reports the largest output difference.
//
//   bench_kernels [repeats]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "arsep/kernels.hpp"
#include "arsep/random.hpp"

using namespace arsep;

namespace {

double best_ms(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void row(const char* name, double serial, double omp, double diff) {
  std::printf("%-34s %10.2f %10.2f %8.2fx %12.3g\n", name, serial, omp, serial / omp, diff);
}

void bench_mixture(int repeats, std::size_t components, std::size_t dim, std::size_t batch) {
  Rng rng(1);
  std::vector<double> means(components * dim), xs(batch * dim);
  fill_normal(rng, means);
  fill_normal(rng, xs, 2.0);
  std::vector<double> logw(components, -std::log(static_cast<double>(components)));
  std::vector<double> var(components, 0.01);
  kernels::MixtureView view{means, dim, logw, var};
  std::vector<double> a(batch * dim), b(batch * dim), la(batch), lb(batch);

  const double s = best_ms(repeats, [&] { kernels::mixture_score_serial(view, xs, batch, dim, 0.5, a, la); });
  const double p = best_ms(repeats, [&] { kernels::mixture_score_omp(view, xs, batch, dim, 0.5, b, lb); });
  char name[64];
  std::snprintf(name, sizeof name, "mixture_score K=%zu d=%zu b=%zu", components, dim, batch);
  row(name, s, p, std::max(max_diff(a, b), max_diff(la, lb)));
}

void bench_nmf(int repeats, std::size_t rows, std::size_t cols, std::size_t rank) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> V(rows * cols), W0(rows * rank), H0(rank * cols);
  for (auto* m : {&V, &W0, &H0})
    for (double& v : *m) v = u(rng);
  auto Ws = W0, Hs = H0, Wp = W0, Hp = H0;

  const double s = best_ms(repeats, [&] {
    Ws = W0, Hs = H0;
    kernels::kl_nmf_update_serial(V, Ws, Hs, rows, cols, rank, 1e-12, true);
  });
  const double p = best_ms(repeats, [&] {
    Wp = W0, Hp = H0;
    kernels::kl_nmf_update_omp(V, Wp, Hp, rows, cols, rank, 1e-12, true);
  });
  char name[64];
  std::snprintf(name, sizeof name, "kl_nmf_update %zux%zu r=%zu", rows, cols, rank);
  row(name, s, p, std::max(max_diff(Ws, Wp), max_diff(Hs, Hp)));
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::printf("threads: %d\n", kernels::max_threads());
  std::printf("%-34s %10s %10s %9s %12s\n", "kernel", "serial ms", "omp ms", "speedup", "max |diff|");
  bench_mixture(repeats, 192, 8192, 1);
  bench_mixture(repeats, 192, 8192, 3);
  bench_mixture(repeats, 192, 2048, 6);
  bench_mixture(repeats, 1000, 64, 64);
  bench_nmf(repeats, 513, 130, 16);
  bench_nmf(repeats, 1025, 400, 16);
  return 0;
}
