#include <doctest.h>

#include <cmath>

#include "arsep/errors.hpp"
#include "arsep/schedule.hpp"

using namespace arsep;

TEST_CASE("sigma_at endpoints and midpoint") {
  const NoiseSchedule s{0.01, 10.0};
  CHECK(sigma_at(s, 0.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(sigma_at(s, 1.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(sigma_at(s, 0.5) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
  CHECK(sigma_at(s, 0.5) == doctest::Approx(0.3162).epsilon(1e-4));
}

TEST_CASE("sigma_at is strictly increasing") {
  const NoiseSchedule s{0.01, 80.0};
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = sigma_at(s, i / 1000.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("sigma_at domain and schedule validation") {
  const NoiseSchedule s{0.01, 10.0};
  CHECK_THROWS_AS(sigma_at(s, -0.01), DomainError);
  CHECK_THROWS_AS(sigma_at(s, 1.01), DomainError);
  CHECK_THROWS_AS((NoiseSchedule{1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NoiseSchedule{0.0, 1.0}.validate()), ConfigError);
}

TEST_CASE("one-step grid has the two endpoints") {
  const auto g = make_grid(NoiseSchedule{0.01, 10.0}, 1);
  CHECK(g.steps == 1);
  CHECK(g.times == std::vector<double>{1.0, 0.0});
  CHECK(g.sigmas.back() == doctest::Approx(0.01));
}

TEST_CASE("100-step grid is uniform with 101 nodes") {
  const auto g = make_grid(NoiseSchedule{0.01, 10.0}, 100);
  REQUIRE(g.times.size() == 101);
  for (std::size_t i = 0; i + 1 < g.times.size(); ++i)
    CHECK(g.times[i] - g.times[i + 1] == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(g.times.front() == 1.0);
  CHECK(g.times.back() == 0.0);
}

TEST_CASE("grids are strictly descending in t and sigma") {
  for (std::size_t steps : {1u, 7u, 50u, 300u}) {
    const auto g = make_grid(NoiseSchedule{0.02, 40.0}, steps);
    for (std::size_t i = 0; i + 1 < g.times.size(); ++i) {
      CHECK(g.times[i] > g.times[i + 1]);
      CHECK(g.sigmas[i] > g.sigmas[i + 1]);
    }
  }
  CHECK_THROWS_AS(make_grid(NoiseSchedule{}, 0), ConfigError);
}
