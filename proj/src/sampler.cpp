#include "arsep/sampler.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "arsep/errors.hpp"

namespace arsep {

std::vector<double> apply_inpaint(std::span<const double> state,
                                  const InpaintCondition& condition, double sigma, Rng& rng) {
  if (condition.mask.size() != state.size() || condition.values.size() != state.size())
    throw ShapeError("inpaint condition does not match the state length");
  std::vector<double> out(state.begin(), state.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (condition.mask[i]) out[i] = condition.values[i] + sigma * normal(rng);
  return out;
}

std::vector<double> apply_inpaint(std::span<const double> state,
                                  const InpaintCondition& condition, double sigma,
                                  std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return apply_inpaint(state, condition, sigma, rng);
}

namespace {

void check_grid(const SamplerConfig& config) {
  const auto& g = config.grid;
  if (g.steps == 0 || g.sigmas.size() != g.steps + 1)
    throw ConfigError("sampler grid is empty or malformed");
}

void check_finite(std::span<const double> v, std::size_t step) {
  if (!all_finite(v)) throw NumericalDivergenceError("non-finite state during integration", step);
}

}  // namespace

std::vector<double> sample_prior(const ScoreModel& model, const SamplerConfig& config,
                                 std::optional<std::size_t> length) {
  check_grid(config);
  const std::size_t n = length ? *length : model.native_length().value_or(0);
  if (n == 0 || !model.supports_length(n))
    throw ShapeError("sample_prior: model is not defined at the requested length");

  const auto& sig = config.grid.sigmas;
  Rng rng(config.seed);
  std::vector<double> s(n), d(n), d2(n), trial(n);
  fill_normal(rng, s, sig.front());

  for (std::size_t k = 0; k < config.grid.steps; ++k) {
    const double h = sig[k + 1] - sig[k];
    model.score(s, sig[k], d);
    for (std::size_t i = 0; i < n; ++i) d[i] *= -sig[k];
    if (config.integrator == Integrator::Euler || sig[k + 1] == 0.0) {
      for (std::size_t i = 0; i < n; ++i) s[i] += h * d[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) trial[i] = s[i] + h * d[i];
      model.score(trial, sig[k + 1], d2);
      for (std::size_t i = 0; i < n; ++i) s[i] += 0.5 * h * (d[i] - sig[k + 1] * d2[i]);
    }
    check_finite(s, k);
  }
  return s;
}

namespace {

// Posterior drift for C candidates x F free sources. rows[c * F + i] holds
// free source i+1 of candidate c; results are -sigma * posterior score.
class PosteriorField {
 public:
  PosteriorField(std::span<const ScoreModel* const> models, std::span<const double> mixture,
                 std::size_t candidates)
      : models_(models), mixture_(mixture), C_(candidates), F_(models.size() - 1) {
    // Group every score request by model so each model is called once.
    for (std::size_t c = 0; c < C_; ++c) {
      groups_[models_[0]].push_back({c, kResidual});
      for (std::size_t i = 0; i < F_; ++i) groups_[models_[i + 1]].push_back({c, i});
    }
  }

  void drift(const std::vector<std::vector<double>>& rows, double sigma,
             std::vector<std::vector<double>>& out) const {
    const std::size_t n = mixture_.size();
    std::vector<std::vector<double>> residual(C_, std::vector<double>(mixture_.begin(), mixture_.end()));
    for (std::size_t c = 0; c < C_; ++c)
      for (std::size_t i = 0; i < F_; ++i) {
        const auto& s = rows[c * F_ + i];
        for (std::size_t j = 0; j < n; ++j) residual[c][j] -= s[j];
      }

    std::vector<std::vector<double>> own(C_ * F_), constrained(C_);
    std::vector<double> in, res;
    for (const auto& [model, reqs] : groups_) {
      in.resize(reqs.size() * n);
      res.resize(reqs.size() * n);
      for (std::size_t r = 0; r < reqs.size(); ++r) {
        const auto& src = reqs[r].free == kResidual ? residual[reqs[r].candidate]
                                                    : rows[reqs[r].candidate * F_ + reqs[r].free];
        std::copy(src.begin(), src.end(), in.begin() + static_cast<std::ptrdiff_t>(r * n));
      }
      model->score_batch(in, reqs.size(), sigma, res);
      for (std::size_t r = 0; r < reqs.size(); ++r) {
        auto first = res.begin() + static_cast<std::ptrdiff_t>(r * n);
        std::vector<double> v(first, first + static_cast<std::ptrdiff_t>(n));
        if (reqs[r].free == kResidual)
          constrained[reqs[r].candidate] = std::move(v);
        else
          own[reqs[r].candidate * F_ + reqs[r].free] = std::move(v);
      }
    }

    out.resize(C_ * F_);
    for (std::size_t c = 0; c < C_; ++c)
      for (std::size_t i = 0; i < F_; ++i) {
        auto& o = out[c * F_ + i];
        o.resize(n);
        const auto& a = own[c * F_ + i];
        const auto& b = constrained[c];
        for (std::size_t j = 0; j < n; ++j) o[j] = -sigma * (a[j] - b[j]);
      }
  }

 private:
  static constexpr std::size_t kResidual = static_cast<std::size_t>(-1);
  struct Request {
    std::size_t candidate;
    std::size_t free;
  };

  std::span<const ScoreModel* const> models_;
  std::span<const double> mixture_;
  std::size_t C_, F_;
  std::map<const ScoreModel*, std::vector<Request>> groups_;
};

void check_models(std::span<const ScoreModel* const> models, std::size_t n) {
  if (models.size() < 2) throw ConfigError("posterior sampling needs N >= 2 source models");
  for (const auto* m : models) {
    if (m == nullptr) throw ConfigError("null score model");
    if (!m->supports_length(n))
      throw ShapeError("score model is not defined at length " + std::to_string(n));
  }
}

}  // namespace

std::vector<std::vector<double>> posterior_score(std::span<const ScoreModel* const> models,
                                                 std::span<const std::vector<double>> states,
                                                 std::span<const double> mixture,
                                                 double sigma) {
  check_models(models, mixture.size());
  if (states.size() != models.size() - 1)
    throw ConfigError("posterior_score expects one state per free source");
  for (const auto& s : states)
    if (s.size() != mixture.size()) throw ShapeError("state length differs from mixture");

  PosteriorField field(models, mixture, 1);
  std::vector<std::vector<double>> rows(states.begin(), states.end()), drift;
  field.drift(rows, sigma, drift);
  if (sigma != 0.0) {
    for (auto& d : drift)
      for (double& v : d) v /= -sigma;
    return drift;
  }
  // sigma = 0: evaluate directly since the drift carries a factor of sigma.
  std::vector<double> residual(mixture.begin(), mixture.end());
  for (const auto& s : states)
    for (std::size_t j = 0; j < residual.size(); ++j) residual[j] -= s[j];
  const auto constrained = models[0]->score(residual, 0.0);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto own = models[i + 1]->score(states[i], 0.0);
    for (std::size_t j = 0; j < own.size(); ++j) own[j] -= constrained[j];
    out.push_back(std::move(own));
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> sample_posterior_batch(
    const MixtureProblem& problem, std::span<const ScoreModel* const> models,
    const SamplerConfig& config, const SourceConditions& conditions,
    std::span<const std::uint64_t> seeds) {
  check_grid(config);
  const auto x = problem.mixture.samples();
  const std::size_t n = x.size();
  check_models(models, n);
  if (static_cast<std::size_t>(problem.mixing.sources) != models.size())
    throw ConfigError("model count differs from the mixing model's source count");
  const std::size_t F = models.size() - 1;
  const std::size_t C = seeds.size();
  if (!conditions.empty() && conditions.size() != F)
    throw ConfigError("expected one (optional) condition per free source");
  for (const auto& cond : conditions)
    if (cond && (cond->mask.size() != n || cond->values.size() != n))
      throw ShapeError("inpaint condition length differs from the mixture");

  const auto& sig = config.grid.sigmas;
  std::vector<Rng> rngs;
  std::vector<std::vector<double>> rows(C * F, std::vector<double>(n));
  for (std::size_t c = 0; c < C; ++c) {
    rngs.emplace_back(seeds[c]);
    for (std::size_t i = 0; i < F; ++i) fill_normal(rngs[c], rows[c * F + i], sig.front());
  }

  PosteriorField field(models, x, C);
  std::vector<std::vector<double>> d1, d2, trial(C * F);
  for (std::size_t k = 0; k < config.grid.steps; ++k) {
    const double h = sig[k + 1] - sig[k];
    field.drift(rows, sig[k], d1);
    if (config.integrator == Integrator::Euler || sig[k + 1] == 0.0) {
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < n; ++j) rows[r][j] += h * d1[r][j];
    } else {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        trial[r].resize(n);
        for (std::size_t j = 0; j < n; ++j) trial[r][j] = rows[r][j] + h * d1[r][j];
      }
      field.drift(trial, sig[k + 1], d2);
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < n; ++j) rows[r][j] += 0.5 * h * (d1[r][j] + d2[r][j]);
    }
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < F; ++i) {
        auto& s = rows[c * F + i];
        if (!conditions.empty() && conditions[i])
          s = apply_inpaint(s, *conditions[i], sig[k + 1], rngs[c]);
        check_finite(s, k);
      }
  }

  std::vector<std::vector<std::vector<double>>> out(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> constrained(x.begin(), x.end());
    for (std::size_t i = 0; i < F; ++i)
      for (std::size_t j = 0; j < n; ++j) constrained[j] -= rows[c * F + i][j];
    out[c].push_back(std::move(constrained));
    for (std::size_t i = 0; i < F; ++i) out[c].push_back(std::move(rows[c * F + i]));
  }
  return out;
}

std::vector<std::vector<double>> sample_posterior(const MixtureProblem& problem,
                                                  std::span<const ScoreModel* const> models,
                                                  const SamplerConfig& config,
                                                  const SourceConditions& conditions) {
  const std::uint64_t seed = config.seed;
  return std::move(
      sample_posterior_batch(problem, models, config, conditions, std::span(&seed, 1)).front());
}

}  // namespace arsep
