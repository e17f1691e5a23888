#pragma once

#include <string>
#include <vector>

#include "kvflux/completion.hpp"

namespace kvflux {

struct LCurvePoint {
  double epsilon = 0.0;
  double J = 0.0;
  double R_D = 0.0;
};

// Points ordered by strictly decreasing epsilon. Grid values whose solve
// failed are listed in `dropped` and absent from `points`.
struct LCurve {
  std::vector<LCurvePoint> points;
  std::size_t corner_index = 0;
  std::vector<double> dropped;
  std::vector<std::string> drop_reasons;

  double corner_epsilon() const { return points.at(corner_index).epsilon; }
};

// n logarithmically spaced values from hi down to lo.
std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> default_epsilon_grid();  // 20 points in [1e-6, 1e-1]

// One solve_completion per epsilon; the interface operators are shared, only
// the small dense factorization is redone. Fills corner_index.
LCurve sweep(const KVSystem& system, const std::vector<double>& eps_grid);

// Index of maximum signed curvature of (log J, log R_D) parameterized by
// log epsilon, from centered non-uniform differences at interior points. Ties
// go to the larger epsilon. Throws NumericalError when the points are
// collinear in log-log space (within 1e-12).
std::size_t find_corner_index(const std::vector<LCurvePoint>& points);
double find_corner(const LCurve& curve);

}  // namespace kvflux
