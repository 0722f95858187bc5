#include "arsep/score.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "arsep/errors.hpp"
#include "arsep/signal.hpp"

namespace arsep {

void ScoreModel::score_batch(std::span<const double> xs, std::size_t count, double sigma,
                             std::span<double> out) const {
  if (count == 0) return;
  if (xs.size() % count != 0 || out.size() != xs.size())
    throw ShapeError("score_batch: buffer size mismatch");
  const std::size_t n = xs.size() / count;
  for (std::size_t b = 0; b < count; ++b)
    score(xs.subspan(b * n, n), sigma, out.subspan(b * n, n));
}

std::vector<double> ScoreModel::score(std::span<const double> x, double sigma) const {
  std::vector<double> out(x.size());
  score(x, sigma, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be >= 0");
}

}  // namespace

std::vector<double> gaussian_score(const GaussianPrior& prior, std::span<const double> x,
                                   double sigma) {
  check_sigma(sigma);
  if (x.size() != prior.mean.size()) throw ShapeError("gaussian_score: shape mismatch");
  const double v = prior.variance + sigma * sigma;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - prior.mean[i]) / v;
  return out;
}

double gaussian_log_density(const GaussianPrior& prior, std::span<const double> x,
                            double sigma) {
  check_sigma(sigma);
  if (x.size() != prior.mean.size()) throw ShapeError("gaussian_log_density: shape mismatch");
  const double v = prior.variance + sigma * sigma;
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - prior.mean[i]) * (x[i] - prior.mean[i]);
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * v) -
         d / (2.0 * v);
}

GaussianScoreModel::GaussianScoreModel(GaussianPrior prior) : prior_(std::move(prior)) {
  if (!(prior_.variance > 0.0)) throw ConfigError("Gaussian prior variance must be positive");
  if (prior_.mean.empty()) throw ConfigError("Gaussian prior mean must be nonempty");
}

void GaussianScoreModel::score(std::span<const double> x, double sigma,
                               std::span<double> out) const {
  const auto s = gaussian_score(prior_, x, sigma);
  if (out.size() != s.size()) throw ShapeError("score: output size mismatch");
  std::copy(s.begin(), s.end(), out.begin());
}

double GaussianScoreModel::log_density(std::span<const double> x, double sigma) const {
  return gaussian_log_density(prior_, x, sigma);
}

std::vector<double> GaussianScoreModel::denoise(std::span<const double> x, double sigma) const {
  if (x.size() != prior_.mean.size()) throw ShapeError("denoise: shape mismatch");
  const double gain = prior_.variance / (prior_.variance + sigma * sigma);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = prior_.mean[i] + gain * (x[i] - prior_.mean[i]);
  return out;
}

// ---------------------------------------------------------------------------

MixturePrior::MixturePrior(std::span<const MixtureComponent> components) {
  if (components.empty()) throw ConfigError("mixture prior needs at least one component");
  dim_ = components.front().mean.size();
  if (dim_ == 0) throw ConfigError("mixture component means must be nonempty");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.mean.size() != dim_) throw ConfigError("mixture component means differ in length");
    if (!(c.weight > 0.0)) throw ConfigError("mixture weights must be positive");
    if (!(c.variance > 0.0)) throw ConfigError("mixture variances must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");

  means_.reserve(components.size() * dim_);
  for (const auto& c : components) {
    means_.insert(means_.end(), c.mean.begin(), c.mean.end());
    weights_.push_back(c.weight);
    log_weights_.push_back(std::log(c.weight));
    variances_.push_back(c.variance);
  }
}

kernels::MixtureView MixturePrior::view() const {
  return kernels::MixtureView{means_, dim_, log_weights_, variances_};
}

std::vector<double> mixture_score(const MixturePrior& prior, std::span<const double> x,
                                  double sigma, kernels::Backend backend) {
  check_sigma(sigma);
  if (x.size() != prior.dim()) throw ShapeError("mixture_score: shape mismatch");
  std::vector<double> out(x.size());
  kernels::mixture_score(backend, prior.view(), x, 1, x.size(), sigma, out);
  return out;
}

double mixture_log_density(const MixturePrior& prior, std::span<const double> x, double sigma) {
  check_sigma(sigma);
  if (x.size() != prior.dim()) throw ShapeError("mixture_log_density: shape mismatch");
  std::vector<double> out(x.size());
  double lp = 0.0;
  kernels::mixture_score(kernels::Backend::Serial, prior.view(), x, 1, x.size(), sigma, out,
                         std::span<double>(&lp, 1));
  return lp;
}

MixturePrior kde_prior_from_exemplars(std::span<const std::vector<double>> exemplars,
                                      double bandwidth) {
  if (exemplars.empty()) throw ConfigError("exemplar bank is empty");
  if (!(bandwidth > 0.0)) throw ConfigError("KDE bandwidth must be positive");
  const double w = 1.0 / static_cast<double>(exemplars.size());
  std::vector<MixtureComponent> comps;
  comps.reserve(exemplars.size());
  for (const auto& e : exemplars) comps.push_back({w, e, bandwidth * bandwidth});
  // Renormalize so rounding in 1/K never trips the weight check.
  const double total = w * static_cast<double>(exemplars.size());
  for (auto& c : comps) c.weight /= total;
  return MixturePrior(comps);
}

double default_kde_bandwidth(std::span<const std::vector<double>> exemplars) {
  if (exemplars.empty()) throw ConfigError("exemplar bank is empty");
  double e = 0.0;
  std::size_t n = 0;
  for (const auto& x : exemplars) {
    e += energy(x);
    n += x.size();
  }
  if (n == 0 || e == 0.0) throw ConfigError("exemplar bank has no energy");
  return 0.1 * std::sqrt(e / static_cast<double>(n));
}

// ---------------------------------------------------------------------------

MixtureScoreModel::MixtureScoreModel(std::shared_ptr<const MixturePrior> prior,
                                     kernels::Backend backend)
    : prior_(std::move(prior)), backend_(backend) {
  if (!prior_) throw ConfigError("MixtureScoreModel needs a prior");
}

void MixtureScoreModel::score(std::span<const double> x, double sigma,
                              std::span<double> out) const {
  score_batch(x, 1, sigma, out);
}

namespace {

// Splits rows of length n into tiles of length dim and runs the kernel once
// per distinct tile length.
void tiled_mixture(const MixturePrior& prior, kernels::Backend backend,
                   std::span<const double> xs, std::size_t count, std::size_t n, double sigma,
                   std::span<double> out, std::span<double> log_density) {
  const std::size_t D = prior.dim();
  const std::size_t full = n / D;
  const std::size_t rem = n % D;
  const auto view = prior.view();
  if (!log_density.empty()) std::fill(log_density.begin(), log_density.end(), 0.0);

  if (full == 1 && rem == 0) {
    kernels::mixture_score(backend, view, xs, count, D, sigma, out, log_density);
    return;
  }

  auto run = [&](std::size_t tiles, std::size_t len, std::size_t first_offset) {
    const std::size_t rows = count * tiles;
    std::vector<double> in(rows * len), res(rows * len), lp(rows);
    for (std::size_t b = 0; b < count; ++b)
      for (std::size_t t = 0; t < tiles; ++t)
        std::copy_n(xs.data() + b * n + first_offset + t * D, len,
                    in.data() + (b * tiles + t) * len);
    kernels::mixture_score(backend, view, in, rows, len, sigma, res,
                           log_density.empty() ? std::span<double>() : std::span<double>(lp));
    for (std::size_t b = 0; b < count; ++b)
      for (std::size_t t = 0; t < tiles; ++t) {
        std::copy_n(res.data() + (b * tiles + t) * len, len,
                    out.data() + b * n + first_offset + t * D);
        if (!log_density.empty()) log_density[b] += lp[b * tiles + t];
      }
  };
  if (full > 0) run(full, D, 0);
  if (rem > 0) run(1, rem, full * D);
}

}  // namespace

void MixtureScoreModel::score_batch(std::span<const double> xs, std::size_t count,
                                    double sigma, std::span<double> out) const {
  check_sigma(sigma);
  if (count == 0) return;
  if (xs.size() % count != 0 || out.size() != xs.size() || xs.empty())
    throw ShapeError("score_batch: buffer size mismatch");
  tiled_mixture(*prior_, backend_, xs, count, xs.size() / count, sigma, out, {});
}

double MixtureScoreModel::log_density(std::span<const double> x, double sigma) const {
  check_sigma(sigma);
  if (x.empty()) throw ShapeError("log_density: empty input");
  std::vector<double> out(x.size());
  double lp = 0.0;
  tiled_mixture(*prior_, kernels::Backend::Serial, x, 1, x.size(), sigma, out,
                std::span<double>(&lp, 1));
  return lp;
}

// ---------------------------------------------------------------------------

std::vector<double> denoiser_to_score(std::span<const double> denoised,
                                      std::span<const double> x, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("denoiser_to_score: sigma must be positive");
  if (denoised.size() != x.size()) throw ShapeError("denoiser_to_score: shape mismatch");
  const double inv = 1.0 / (sigma * sigma);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (denoised[i] - x[i]) * inv;
  return out;
}

}  // namespace arsep
