#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "arsep/errors.hpp"
#include "arsep/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace arsep::kernels {

namespace {

// Four interleaved partial sums; the fixed order keeps results independent of
// the thread count while letting the compiler vectorize.
inline double squared_distance(const double* x, const double* mu, std::size_t len) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    const double d0 = x[j] - mu[j];
    const double d1 = x[j + 1] - mu[j + 1];
    const double d2 = x[j + 2] - mu[j + 2];
    const double d3 = x[j + 3] - mu[j + 3];
    a0 += d0 * d0;
    a1 += d1 * d1;
    a2 += d2 * d2;
    a3 += d3 * d3;
  }
  for (; j < len; ++j) a0 += (x[j] - mu[j]) * (x[j] - mu[j]);
  return (a0 + a1) + (a2 + a3);
}

constexpr std::size_t kColumnBlock = 512;

}  // namespace

void mixture_score_omp(const MixtureView& mixture, std::span<const double> xs,
                       std::size_t batch, std::size_t len, double sigma,
                       std::span<double> out, std::span<double> log_density) {
  const std::size_t K = mixture.components();
  const double s2 = sigma * sigma;
  const auto Kl = static_cast<long>(K);
  std::vector<double> logp(batch * K);  // batch-major

#pragma omp parallel for schedule(static)
  for (long kk = 0; kk < Kl; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const double v = mixture.variances[k] + s2;
    const double norm = mixture.log_weights[k] -
                        0.5 * static_cast<double>(len) * std::log(2.0 * std::numbers::pi * v);
    const double* mu = mixture.means.data() + k * mixture.stride;
    for (std::size_t b = 0; b < batch; ++b)
      logp[b * K + k] = norm - squared_distance(xs.data() + b * len, mu, len) / (2.0 * v);
  }

  // coef[b * K + k] = responsibility / smoothed variance
  std::vector<double> coef(batch * K);
  std::vector<double> precision(batch, 0.0);
  std::vector<std::vector<std::size_t>> active(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* lp = logp.data() + b * K;
    const double top = *std::max_element(lp, lp + K);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += std::exp(lp[k] - top);
    const double lse = top + std::log(total);
    if (!log_density.empty()) log_density[b] = lse;
    for (std::size_t k = 0; k < K; ++k) {
      const double r = std::exp(lp[k] - lse);
      if (r == 0.0) continue;
      const double c = r / (mixture.variances[k] + s2);
      coef[b * K + k] = c;
      precision[b] += c;
      active[b].push_back(k);
    }
  }

  const auto blocks = static_cast<long>((len + kColumnBlock - 1) / kColumnBlock);
#pragma omp parallel for schedule(static)
  for (long blk = 0; blk < blocks; ++blk) {
    const std::size_t j0 = static_cast<std::size_t>(blk) * kColumnBlock;
    const std::size_t j1 = std::min(len, j0 + kColumnBlock);
    for (std::size_t b = 0; b < batch; ++b) {
      double* y = out.data() + b * len;
      const double* x = xs.data() + b * len;
      std::fill(y + j0, y + j1, 0.0);
      for (std::size_t k : active[b]) {
        const double c = coef[b * K + k];
        const double* mu = mixture.means.data() + k * mixture.stride;
        for (std::size_t j = j0; j < j1; ++j) y[j] += c * mu[j];
      }
      for (std::size_t j = j0; j < j1; ++j) y[j] -= precision[b] * x[j];
    }
  }
}

void kl_nmf_update_omp(std::span<const double> V, std::span<double> W, std::span<double> H,
                       std::size_t rows, std::size_t cols, std::size_t rank, double eps,
                       bool update_w) {
  std::vector<double> Q(rows * cols);
  const auto R = static_cast<long>(rows);
  const auto A = static_cast<long>(rank);
  auto ratio = [&] {
#pragma omp parallel for schedule(static)
    for (long rr = 0; rr < R; ++rr) {
      const auto r = static_cast<std::size_t>(rr);
      for (std::size_t c = 0; c < cols; ++c) {
        double wh = 0.0;
        for (std::size_t a = 0; a < rank; ++a) wh += W[r * rank + a] * H[a * cols + c];
        Q[r * cols + c] = V[r * cols + c] / std::max(wh, eps);
      }
    }
  };

  ratio();
#pragma omp parallel for schedule(static)
  for (long aa = 0; aa < A; ++aa) {
    const auto a = static_cast<std::size_t>(aa);
    double wsum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) wsum += W[r * rank + a];
    std::vector<double> num(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = W[r * rank + a];
      const double* q = Q.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) num[c] += w * q[c];
    }
    const double denom = std::max(wsum, eps);
    for (std::size_t c = 0; c < cols; ++c) H[a * cols + c] *= num[c] / denom;
  }
  if (!update_w) return;

  ratio();
  std::vector<double> hsum(rank, 0.0);
  for (std::size_t a = 0; a < rank; ++a)
    for (std::size_t c = 0; c < cols; ++c) hsum[a] += H[a * cols + c];
#pragma omp parallel for schedule(static)
  for (long rr = 0; rr < R; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double* q = Q.data() + r * cols;
    for (std::size_t a = 0; a < rank; ++a) {
      const double* h = H.data() + a * cols;
      double num = 0.0;
      for (std::size_t c = 0; c < cols; ++c) num += q[c] * h[c];
      W[r * rank + a] *= num / std::max(hsum[a], eps);
    }
  }
}

void mixture_score(Backend backend, const MixtureView& mixture, std::span<const double> xs,
                   std::size_t batch, std::size_t len, double sigma, std::span<double> out,
                   std::span<double> log_density) {
  if (mixture.components() == 0) throw ConfigError("mixture has no components");
  if (len > mixture.stride) throw ShapeError("input longer than mixture dimension");
  if (xs.size() != batch * len || out.size() != batch * len)
    throw ShapeError("mixture_score: batch buffer size mismatch");
  if (!log_density.empty() && log_density.size() != batch)
    throw ShapeError("mixture_score: log-density buffer size mismatch");
  if (backend == Backend::Serial)
    mixture_score_serial(mixture, xs, batch, len, sigma, out, log_density);
  else
    mixture_score_omp(mixture, xs, batch, len, sigma, out, log_density);
}

void kl_nmf_update(Backend backend, std::span<const double> V, std::span<double> W,
                   std::span<double> H, std::size_t rows, std::size_t cols, std::size_t rank,
                   double eps, bool update_w) {
  if (V.size() != rows * cols || W.size() != rows * rank || H.size() != rank * cols)
    throw ShapeError("kl_nmf_update: matrix size mismatch");
  if (backend == Backend::Serial)
    kl_nmf_update_serial(V, W, H, rows, cols, rank, eps, update_w);
  else
    kl_nmf_update_omp(V, W, H, rows, cols, rank, eps, update_w);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace arsep::kernels
