#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "arsep/kernels.hpp"

namespace arsep {

/// Gradient of the log-density of a prior smoothed by Gaussian noise of
/// scale sigma. Implementations are immutable and safe to share.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  /// Segment length the model is defined over, if it has one.
  virtual std::optional<std::size_t> native_length() const { return std::nullopt; }
  virtual bool supports_length(std::size_t n) const { return n > 0; }

  virtual void score(std::span<const double> x, double sigma, std::span<double> out) const = 0;

  /// Scores `count` row-major inputs of equal length. Row results must not
  /// depend on which other rows share the batch.
  virtual void score_batch(std::span<const double> xs, std::size_t count, double sigma,
                           std::span<double> out) const;

  /// Closed-form log-density of the smoothed prior (up to nothing: normalized).
  virtual double log_density(std::span<const double> x, double sigma) const = 0;

  std::vector<double> score(std::span<const double> x, double sigma) const;
};

using ScoreModelPtr = std::shared_ptr<const ScoreModel>;

// ---------------------------------------------------------------------------

struct GaussianPrior {
  std::vector<double> mean;
  double variance = 1.0;
};

/// -(x - mean) / (variance + sigma^2)
std::vector<double> gaussian_score(const GaussianPrior& prior, std::span<const double> x,
                                   double sigma);
double gaussian_log_density(const GaussianPrior& prior, std::span<const double> x,
                            double sigma);

class GaussianScoreModel final : public ScoreModel {
 public:
  using ScoreModel::score;
  explicit GaussianScoreModel(GaussianPrior prior);

  std::optional<std::size_t> native_length() const override { return prior_.mean.size(); }
  bool supports_length(std::size_t n) const override { return n == prior_.mean.size(); }
  void score(std::span<const double> x, double sigma, std::span<double> out) const override;
  double log_density(std::span<const double> x, double sigma) const override;

  const GaussianPrior& prior() const { return prior_; }

  /// Posterior mean E[s | s + sigma * eps = x]; the ideal denoiser.
  std::vector<double> denoise(std::span<const double> x, double sigma) const;

 private:
  GaussianPrior prior_;
};

// ---------------------------------------------------------------------------

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  double variance = 1.0;
};

/// Isotropic Gaussian mixture with means stored contiguously for the kernels.
class MixturePrior {
 public:
  /// Throws ConfigError for an empty list, unnormalized weights (1e-12),
  /// nonpositive variances, or ragged means.
  explicit MixturePrior(std::span<const MixtureComponent> components);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  double weight(std::size_t k) const { return weights_[k]; }
  double variance(std::size_t k) const { return variances_[k]; }
  std::span<const double> mean(std::size_t k) const {
    return {means_.data() + k * dim_, dim_};
  }

  kernels::MixtureView view() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> means_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<double> variances_;
};

/// Exact score of sum_k w_k N(mu_k, (v_k + sigma^2) I), log-sum-exp weighted.
std::vector<double> mixture_score(const MixturePrior& prior, std::span<const double> x,
                                  double sigma,
                                  kernels::Backend backend = kernels::Backend::Parallel);
double mixture_log_density(const MixturePrior& prior, std::span<const double> x, double sigma);

/// Uniform-weight mixture centred on the exemplars with variance bandwidth^2.
MixturePrior kde_prior_from_exemplars(std::span<const std::vector<double>> exemplars,
                                      double bandwidth);

/// 0.1 x RMS over the pooled exemplar bank.
double default_kde_bandwidth(std::span<const std::vector<double>> exemplars);

/// Mixture prior as a ScoreModel of any length. Inputs shorter than the
/// prior's dimension use the exact marginal on the leading coordinates;
/// longer inputs are split into consecutive tiles scored independently, so
/// the prior carries no coherence across tile boundaries.
class MixtureScoreModel final : public ScoreModel {
 public:
  using ScoreModel::score;
  explicit MixtureScoreModel(std::shared_ptr<const MixturePrior> prior,
                             kernels::Backend backend = kernels::Backend::Parallel);

  std::optional<std::size_t> native_length() const override { return prior_->dim(); }
  void score(std::span<const double> x, double sigma, std::span<double> out) const override;
  void score_batch(std::span<const double> xs, std::size_t count, double sigma,
                   std::span<double> out) const override;
  double log_density(std::span<const double> x, double sigma) const override;

  const MixturePrior& prior() const { return *prior_; }

 private:
  std::shared_ptr<const MixturePrior> prior_;
  kernels::Backend backend_;
};

/// (denoised - x) / sigma^2; turns any denoiser into a score.
std::vector<double> denoiser_to_score(std::span<const double> denoised,
                                      std::span<const double> x, double sigma);

}  // namespace arsep
