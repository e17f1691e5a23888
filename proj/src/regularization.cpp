#include "kvflux/regularization.hpp"

#include <cmath>

#include "kvflux/errors.hpp"

namespace kvflux {

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw std::invalid_argument("log_grid needs 0 < lo < hi and n >= 2");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double a = std::log10(hi), b = std::log10(lo);
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  grid.front() = hi;
  grid.back() = lo;
  return grid;
}

std::vector<double> default_epsilon_grid() { return log_grid(1e-6, 1e-1, 20); }

LCurve sweep(const KVSystem& system, const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 5) throw std::invalid_argument("L-curve sweep needs at least 5 epsilon values");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0) || !std::isfinite(eps_grid[i])) throw std::invalid_argument("epsilon values must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw std::invalid_argument("epsilon grid must be strictly decreasing");
  }
  LCurve curve;
  for (double eps : eps_grid) {
    try {
      const CompletionResult res = solve_completion(system, eps);
      curve.points.push_back({eps, res.J, res.R_D});
    } catch (const NumericalError& e) {
      curve.dropped.push_back(eps);
      curve.drop_reasons.emplace_back(e.what());
    }
  }
  if (curve.points.size() < 5) throw NumericalError("fewer than 5 L-curve points survived the sweep");
  curve.corner_index = find_corner_index(curve.points);
  return curve;
}

std::size_t find_corner_index(const std::vector<LCurvePoint>& points) {
  const std::size_t n = points.size();
  if (n < 5) throw std::invalid_argument("corner detection needs at least 5 points");
  std::vector<double> t(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(points[i].J > 0.0) || !(points[i].R_D > 0.0) || !(points[i].epsilon > 0.0))
      throw NumericalError("L-curve values must be positive for the log-log corner search");
    t[i] = std::log(points[i].epsilon);
    x[i] = std::log(points[i].J);
    y[i] = std::log(points[i].R_D);
  }

  // Collinearity: largest distance from the chord through the end points,
  // relative to the chord length.
  const double dx = x[n - 1] - x[0], dy = y[n - 1] - y[0];
  const double chord = std::hypot(dx, dy);
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = chord > 0.0 ? std::fabs(dx * (y[i] - y[0]) - dy * (x[i] - x[0])) / chord
                                 : std::hypot(x[i] - x[0], y[i] - y[0]);
    spread = std::max(spread, d);
  }
  if (spread <= 1e-12 * std::max(1.0, chord)) throw NumericalError("degenerate L-curve: points are collinear in log-log space");

  std::size_t best = 1;
  double best_kappa = -INFINITY;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    auto d1 = [&](const std::vector<double>& f) {
      return (h0 * h0 * f[i + 1] + (h1 * h1 - h0 * h0) * f[i] - h1 * h1 * f[i - 1]) / (h0 * h1 * (h0 + h1));
    };
    auto d2 = [&](const std::vector<double>& f) {
      return 2.0 * (h0 * f[i + 1] - (h0 + h1) * f[i] + h1 * f[i - 1]) / (h0 * h1 * (h0 + h1));
    };
    const double x1 = d1(x), y1 = d1(y), x2 = d2(x), y2 = d2(y);
    const double speed2 = x1 * x1 + y1 * y1;
    const double kappa = speed2 > 0.0 ? (x1 * y2 - y1 * x2) / std::pow(speed2, 1.5) : 0.0;
    // Points run from large to small epsilon, so the first maximum wins ties
    // (equal up to rounding).
    if (i == 1 || kappa > best_kappa + 1e-12 * std::fabs(best_kappa)) {
      best_kappa = kappa;
      best = i;
    }
  }
  return best;
}

double find_corner(const LCurve& curve) { return curve.points.at(find_corner_index(curve.points)).epsilon; }

}  // namespace kvflux
