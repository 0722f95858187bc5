#pragma once

#include <cstddef>
#include <vector>

namespace arsep {

enum class ScheduleKind { LogLinear };

/// Noise level as a function of normalized time t in [0, 1].
struct NoiseSchedule {
  double sigma_min = 0.01;
  double sigma_max = 80.0;
  ScheduleKind kind = ScheduleKind::LogLinear;

  void validate() const;
};

/// sigma_min^(1-t) * sigma_max^t. Throws DomainError for t outside [0, 1].
double sigma_at(const NoiseSchedule& schedule, double t);

/// Descending time nodes t_0 = 1 > ... > t_steps = 0 with paired noise levels.
struct TimeGrid {
  std::size_t steps = 0;
  std::vector<double> times;
  std::vector<double> sigmas;
};

TimeGrid make_grid(const NoiseSchedule& schedule, std::size_t steps);

}  // namespace arsep
