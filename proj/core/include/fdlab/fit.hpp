#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fdlab {

/// Ordinary least-squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  // root mean square of the residuals
  std::size_t count = 0;
};

/// Requires at least two samples with distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// `count` points log-uniformly spaced on [lo, hi] (both endpoints included).
std::vector<double> log_space(double lo, double hi, std::size_t count);
std::vector<double> lin_space(double lo, double hi, std::size_t count);

}  // namespace fdlab
