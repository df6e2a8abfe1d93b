#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fdlab {

/// Nodes 0 = r_0 < r_1 < ... < r_N = R_max with r_{i+1} - r_i = h_1 g^i.
struct RadialGrid {
  std::vector<double> r;
  double stretch = 1.0;
  double r_max = 0.0;

  std::size_t N() const { return r.size() - 1; }
  std::span<const double> nodes() const { return r; }
  std::string describe() const;

  /// Requires N >= 2, g in [1, 1.05], R_max > 0 and a resulting r_1 <= 1e-2.
  static RadialGrid geometric(std::size_t N, double g, double r_max);
};

}  // namespace fdlab
