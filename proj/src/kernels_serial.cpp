#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "arsep/kernels.hpp"

namespace arsep::kernels {

void mixture_score_serial(const MixtureView& mixture, std::span<const double> xs,
                          std::size_t batch, std::size_t len, double sigma,
                          std::span<double> out, std::span<double> log_density) {
  const std::size_t K = mixture.components();
  const double s2 = sigma * sigma;
  std::vector<double> logp(K);

  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = xs.data() + b * len;
    double* y = out.data() + b * len;

    for (std::size_t k = 0; k < K; ++k) {
      const double v = mixture.variances[k] + s2;
      const double* mu = mixture.means.data() + k * mixture.stride;
      double d = 0.0;
      for (std::size_t j = 0; j < len; ++j) d += (x[j] - mu[j]) * (x[j] - mu[j]);
      logp[k] = mixture.log_weights[k] - 0.5 * static_cast<double>(len) *
                                             std::log(2.0 * std::numbers::pi * v) -
                d / (2.0 * v);
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    for (double lp : logp) total += std::exp(lp - top);
    const double lse = top + std::log(total);
    if (!log_density.empty()) log_density[b] = lse;

    std::fill(y, y + len, 0.0);
    double precision = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double r = std::exp(logp[k] - lse);
      if (r == 0.0) continue;
      const double c = r / (mixture.variances[k] + s2);
      precision += c;
      const double* mu = mixture.means.data() + k * mixture.stride;
      for (std::size_t j = 0; j < len; ++j) y[j] += c * mu[j];
    }
    for (std::size_t j = 0; j < len; ++j) y[j] -= precision * x[j];
  }
}

void kl_nmf_update_serial(std::span<const double> V, std::span<double> W, std::span<double> H,
                          std::size_t rows, std::size_t cols, std::size_t rank, double eps,
                          bool update_w) {
  std::vector<double> Q(rows * cols);
  auto ratio = [&] {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        double wh = 0.0;
        for (std::size_t a = 0; a < rank; ++a) wh += W[r * rank + a] * H[a * cols + c];
        Q[r * cols + c] = V[r * cols + c] / std::max(wh, eps);
      }
  };

  ratio();
  for (std::size_t a = 0; a < rank; ++a) {
    double wsum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) wsum += W[r * rank + a];
    for (std::size_t c = 0; c < cols; ++c) {
      double num = 0.0;
      for (std::size_t r = 0; r < rows; ++r) num += W[r * rank + a] * Q[r * cols + c];
      H[a * cols + c] *= num / std::max(wsum, eps);
    }
  }
  if (!update_w) return;

  ratio();
  for (std::size_t a = 0; a < rank; ++a) {
    double hsum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) hsum += H[a * cols + c];
    for (std::size_t r = 0; r < rows; ++r) {
      double num = 0.0;
      for (std::size_t c = 0; c < cols; ++c) num += Q[r * cols + c] * H[a * cols + c];
      W[r * rank + a] *= num / std::max(hsum, eps);
    }
  }
}

}  // namespace arsep::kernels
