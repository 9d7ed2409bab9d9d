#include "aloft/grid.hpp"

#include <cmath>
#include <sstream>

#include "aloft/errors.hpp"

namespace aloft {

bool near_integer(double x) {
  if (!(x >= 0.5)) return false;
  double r = std::round(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x));
}

SmootherGrid build_grid(double h0, double a, int Jn, bool piecewise) {
  if (!(h0 > 0.0 && h0 < 1.0)) {
    std::ostringstream os;
    os << "grid: h0 must lie in (0,1), got " << h0;
    throw UsageError(os.str());
  }
  if (!(a > 1.0)) {
    std::ostringstream os;
    os << "grid: ratio a must exceed 1, got " << a;
    throw UsageError(os.str());
  }
  if (Jn < 1) {
    std::ostringstream os;
    os << "grid: refinement count Jn must be >= 1, got " << Jn;
    throw UsageError(os.str());
  }
  if (piecewise) {
    if (!near_integer(a))
      throw UsageError("grid: piecewise family requires an integer ratio a");
    if (!near_integer(1.0 / h0))
      throw UsageError("grid: piecewise family requires integer 1/h0");
  }

  SmootherGrid g;
  g.h0 = h0;
  g.ratio = a;
  g.refinements = Jn;
  g.values.resize(Jn + 1);
  for (int j = 0; j <= Jn; ++j) g.values[j] = h0 * std::pow(a, -j);
  return g;
}

}  // namespace aloft
