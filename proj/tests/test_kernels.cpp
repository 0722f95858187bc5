#include <doctest.h>

#include <cmath>
#include <vector>

#include "arsep/kernels.hpp"
#include "arsep/random.hpp"

using namespace arsep;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("parallel mixture kernel matches the serial reference") {
  Rng rng(1);
  for (auto [K, stride, len, batch] : {std::array<std::size_t, 4>{1, 8, 8, 1},
                                       std::array<std::size_t, 4>{37, 64, 64, 3},
                                       std::array<std::size_t, 4>{200, 1000, 600, 2},
                                       std::array<std::size_t, 4>{5, 2048, 2048, 4}}) {
    std::vector<double> means(K * stride), xs(batch * len), logw(K), var(K);
    fill_normal(rng, means);
    fill_normal(rng, xs, 1.5);
    std::uniform_real_distribution<double> u(0.01, 0.5);
    double total = 0.0;
    for (auto& w : logw) total += (w = u(rng));
    for (auto& w : logw) w = std::log(w / total);
    for (auto& v : var) v = u(rng);
    const kernels::MixtureView view{means, stride, logw, var};
    for (double sigma : {0.0, 0.3, 20.0}) {
      std::vector<double> a(batch * len), b(batch * len), la(batch), lb(batch);
      kernels::mixture_score_serial(view, xs, batch, len, sigma, a, la);
      kernels::mixture_score_omp(view, xs, batch, len, sigma, b, lb);
      CHECK(max_diff(a, b) <= 1e-12 * (1 + max_diff(a, std::vector<double>(a.size()))));
      CHECK(max_diff(la, lb) <= 1e-9 * (1 + std::abs(la[0])));
    }
  }
}

TEST_CASE("parallel mixture kernel is independent of the thread count") {
  Rng rng(2);
  const std::size_t K = 64, len = 256, batch = 2;
  std::vector<double> means(K * len), xs(batch * len), logw(K, -std::log(64.0)), var(K, 0.05);
  fill_normal(rng, means);
  fill_normal(rng, xs);
  const kernels::MixtureView view{means, len, logw, var};
  std::vector<double> one(batch * len), many(batch * len);
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  kernels::mixture_score_omp(view, xs, batch, len, 0.2, one, {});
  kernels::set_threads(4);
  kernels::mixture_score_omp(view, xs, batch, len, 0.2, many, {});
  kernels::set_threads(saved);
  CHECK(one == many);
}

TEST_CASE("parallel NMF update matches the serial reference") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [rows, cols, rank] : {std::array<std::size_t, 3>{5, 7, 1},
                                  std::array<std::size_t, 3>{129, 40, 6},
                                  std::array<std::size_t, 3>{513, 90, 16}}) {
    std::vector<double> V(rows * cols), W(rows * rank), H(rank * cols);
    for (auto* m : {&V, &W, &H})
      for (double& x : *m) x = u(rng);
    for (bool update_w : {true, false}) {
      auto Ws = W, Hs = H, Wp = W, Hp = H;
      for (int it = 0; it < 5; ++it) {
        kernels::kl_nmf_update_serial(V, Ws, Hs, rows, cols, rank, 1e-12, update_w);
        kernels::kl_nmf_update_omp(V, Wp, Hp, rows, cols, rank, 1e-12, update_w);
      }
      CHECK(max_diff(Ws, Wp) < 1e-12);
      CHECK(max_diff(Hs, Hp) < 1e-12);
      if (!update_w) CHECK(Ws == W);
    }
  }
}

TEST_CASE("backend dispatch") {
  Rng rng(4);
  std::vector<double> means(3 * 4), xs(4), logw(3, -std::log(3.0)), var(3, 0.5);
  fill_normal(rng, means);
  fill_normal(rng, xs);
  const kernels::MixtureView view{means, 4, logw, var};
  std::vector<double> a(4), b(4), c(4);
  kernels::mixture_score(kernels::Backend::Serial, view, xs, 1, 4, 0.1, a);
  kernels::mixture_score_serial(view, xs, 1, 4, 0.1, b, {});
  kernels::mixture_score(kernels::Backend::Parallel, view, xs, 1, 4, 0.1, c);
  CHECK(a == b);
  CHECK(max_diff(a, c) < 1e-14);
}
