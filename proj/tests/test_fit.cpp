#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fdlab/errors.hpp"
#include "fdlab/fit.hpp"

using namespace fdlab;

TEST_CASE("exact line is recovered with zero residual") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.5 * i);
    y.push_back(3.0 - 0.75 * x.back());
  }
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.rms < 1e-13);
  CHECK(f.count == 20);
}

TEST_CASE("least-squares slope agrees with the normal equations") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(i * 0.2);
    y.push_back(1.0 + 2.0 * x.back() + noise(rng));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(f.rms == doctest::Approx(0.1).epsilon(0.3));
}

TEST_CASE("degenerate inputs are rejected") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_line(one, one), PreconditionError);
  const std::vector<double> same{2.0, 2.0, 2.0}, y{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_line(same, y), PreconditionError);
  const std::vector<double> shorter{1.0, 2.0};
  CHECK_THROWS_AS(fit_line(y, shorter), PreconditionError);
}

TEST_CASE("spaced grids hit both endpoints") {
  const auto g = log_space(1e-2, 1e4, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == 1e-2);
  CHECK(g.back() == 1e4);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(10.0));
  const auto h = lin_space(4.1, 5.0, 10);
  CHECK(h.front() == 4.1);
  CHECK(h.back() == 5.0);
  CHECK(h[1] - h[0] == doctest::Approx(0.1));
}
