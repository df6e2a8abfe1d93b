#include "fdlab/grid.hpp"

#include <cmath>
#include <sstream>

#include "fdlab/errors.hpp"

namespace fdlab {

RadialGrid RadialGrid::geometric(std::size_t N, double g, double r_max) {
  if (N < 2) throw PreconditionError("grid needs N >= 2");
  if (!(g >= 1.0 && g <= 1.05)) throw PreconditionError("stretch factor g must lie in [1, 1.05]");
  if (!(r_max > 0.0)) throw PreconditionError("R_max must be > 0");
  RadialGrid grid;
  grid.stretch = g;
  grid.r_max = r_max;
  grid.r.resize(N + 1);
  const double dn = static_cast<double>(N);
  if (g == 1.0) {
    for (std::size_t i = 0; i <= N; ++i) grid.r[i] = r_max * static_cast<double>(i) / dn;
  } else {
    const double lg = std::log(g);
    const double denom = std::expm1(dn * lg);
    for (std::size_t i = 0; i <= N; ++i) grid.r[i] = r_max * std::expm1(static_cast<double>(i) * lg) / denom;
  }
  grid.r[0] = 0.0;
  grid.r[N] = r_max;
  if (grid.r[1] > 1e-2) {
    std::ostringstream os;
    os.precision(12);
    os << "grid too coarse at the origin: r_1 = " << grid.r[1] << " > 1e-2";
    throw PreconditionError(os.str());
  }
  return grid;
}

std::string RadialGrid::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "geometric N=" << N() << " g=" << stretch << " R_max=" << r_max << " r_1=" << r[1];
  return os.str();
}

}  // namespace fdlab
