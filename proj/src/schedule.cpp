#include "arsep/schedule.hpp"

#include <cmath>

#include "arsep/errors.hpp"

namespace arsep {

void NoiseSchedule::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw ConfigError("noise schedule requires 0 < sigma_min < sigma_max");
}

double sigma_at(const NoiseSchedule& schedule, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("sigma_at: t must lie in [0, 1]");
  schedule.validate();
  // Endpoints are returned verbatim so grids hit sigma_min exactly.
  if (t == 0.0) return schedule.sigma_min;
  if (t == 1.0) return schedule.sigma_max;
  return std::exp((1.0 - t) * std::log(schedule.sigma_min) + t * std::log(schedule.sigma_max));
}

TimeGrid make_grid(const NoiseSchedule& schedule, std::size_t steps) {
  if (steps == 0) throw ConfigError("time grid needs at least one step");
  schedule.validate();
  TimeGrid grid;
  grid.steps = steps;
  grid.times.resize(steps + 1);
  grid.sigmas.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = 1.0 - static_cast<double>(k) / static_cast<double>(steps);
    grid.times[k] = k == steps ? 0.0 : t;
    grid.sigmas[k] = sigma_at(schedule, grid.times[k]);
  }
  return grid;
}

}  // namespace arsep
