#ifndef ALOFT_GRID_HPP
#define ALOFT_GRID_HPP

#include <vector>

namespace aloft {

// Geometric bandwidth grid {h0 * a^-j, j = 0..Jn}. values[0] is the coarsest
// bandwidth h0; the grid is strictly decreasing.
struct SmootherGrid {
  double h0 = 0.25;
  double ratio = 2.0;  // a > 1
  int refinements = 5; // Jn
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double finest() const { return values.back(); }
};

// piecewise = true additionally requires integer a and integer 1/h0 so that
// each bin grid refines the previous one.
SmootherGrid build_grid(double h0, double a, int Jn, bool piecewise = false);

// True when x is within one part in 1e-9 of an integer >= 1.
bool near_integer(double x);

}  // namespace aloft

#endif
