#include "fdlab/fit.hpp"

#include <cmath>

#include "fdlab/errors.hpp"

namespace fdlab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw PreconditionError("fit_line: need at least two samples");

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit_line: x samples are all equal");

  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.count = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw PreconditionError("log_space: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_space(double lo, double hi, std::size_t count) {
  if (!(hi > lo) || count < 2) throw PreconditionError("lin_space: need lo < hi and count >= 2");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = (static_cast<double>(count - 1 - i) * lo + static_cast<double>(i) * hi) / static_cast<double>(count - 1);
  }
  return out;
}

}  // namespace fdlab
