#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace kvtest {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::fabs(step) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

namespace {

// Duffy map of the unit square onto the triangle, Gauss-Legendre in both
// directions.
double tensor_rule(const std::function<double(Point)>& f, Point a, Point b, Point c, int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    it = cache.emplace(n, std::make_pair(x, w)).first;
  }
  const auto& [x, w] = it->second;
  const double jac = std::fabs(kvflux::cross(b - a, c - a));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double t = 0.5 * (x[j] + 1.0);
      const double l1 = s * (1.0 - t), l2 = s * t;
      const Point p = a + l1 * (b - a) + l2 * (c - a);
      sum += 0.25 * w[i] * w[j] * s * f(p);
    }
  }
  return sum * jac;
}

double adapt(const std::function<double(Point)>& f, Point a, Point b, Point c, double tol, int depth) {
  const double coarse = tensor_rule(f, a, b, c, 8);
  const double fine = tensor_rule(f, a, b, c, 16);
  if (std::fabs(fine - coarse) <= tol * std::max(1.0, std::fabs(fine)) || depth > 10) return fine;
  const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return adapt(f, a, ab, ca, tol, depth + 1) + adapt(f, ab, b, bc, tol, depth + 1) +
         adapt(f, ca, bc, c, tol, depth + 1) + adapt(f, ab, bc, ca, tol, depth + 1);
}

}  // namespace

double integrate_triangle(const std::function<double(Point)>& f, Point a, Point b, Point c, double rel_tol) {
  return adapt(f, a, b, c, rel_tol, 0);
}

std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += at(i, j) * at(i, j);
    if (off <= 1e-30 * diag) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (at(p, q) == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {
double d1(const std::function<double(double)>& g, double h) {
  return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
}
double d2(const std::function<double(double)>& g, double h) {
  return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h);
}
}  // namespace

double gs_operator_fd(const std::function<double(Point)>& psi, Point p, double h) {
  auto along_r = [&](double d) { return psi({p.r + d, p.z}); };
  auto along_z = [&](double d) { return psi({p.r, p.z + d}); };
  return -(d2(along_r, h) - d1(along_r, h) / p.r + d2(along_z, h)) / p.r;
}

Point gradient_fd(const std::function<double(Point)>& psi, Point p, double h) {
  auto along_r = [&](double d) { return psi({p.r + d, p.z}); };
  auto along_z = [&](double d) { return psi({p.r, p.z + d}); };
  return {d1(along_r, h), d1(along_z, h)};
}

kvflux::Mesh grid_mesh(const GridSpec& g) {
  using namespace kvflux;
  auto node = [&](int i, int j) { return j * (g.nr + 1) + i; };
  auto in_hole = [&](int i, int j) { return i >= g.hole_i0 && i < g.hole_i1 && j >= g.hole_j0 && j < g.hole_j1; };
  std::vector<Point> pts;
  for (int j = 0; j <= g.nz; ++j)
    for (int i = 0; i <= g.nr; ++i)
      pts.push_back({g.r0 + (g.r1 - g.r0) * i / g.nr, g.z0 + (g.z1 - g.z0) * j / g.nz});
  std::vector<Triangle> tris;
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      if (in_hole(i, j)) continue;
      const int a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1), d = node(i, j + 1);
      if (!g.alternate || (i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  }
  // Boundary edges are the ones owned by a single triangle.
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  std::vector<BoundaryEdge> edges;
  auto on_frame = [&](int n) {
    const int i = n % (g.nr + 1), j = n / (g.nr + 1);
    return i == 0 || j == 0 || i == g.nr || j == g.nz;
  };
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (count[std::minmax(a, b)] != 1) continue;
      const bool outer = on_frame(a) && on_frame(b);
      edges.push_back({a, b, outer ? BoundaryLabel::Outer : BoundaryLabel::Inner});
    }
  }
  // Drop nodes inside the hole that no triangle uses.
  std::vector<int> remap(pts.size(), -1);
  std::vector<Point> used;
  for (auto& t : tris)
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(pts[v]);
      }
      v = remap[v];
    }
  for (auto& e : edges) {
    e.a = remap[e.a];
    e.b = remap[e.b];
  }
  return Mesh(std::move(used), std::move(tris), std::move(edges));
}

GridSpec saddle_grid() {
  GridSpec g;
  g.r0 = 4.0;
  g.r1 = 8.0;
  g.z0 = -2.0;
  g.z1 = 2.0;
  g.nr = 40;
  g.nz = 40;
  g.hole_i0 = 26;
  g.hole_i1 = 34;
  g.hole_j0 = 17;
  g.hole_j1 = 23;
  return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace kvtest
