#include "kvflux/equilibria.hpp"

#include <cmath>
#include <stdexcept>

namespace kvflux {

std::vector<std::string> manufactured_names() { return {"one", "z", "r2", "r2z", "solovev", "xpoint"}; }

AnalyticFlux manufactured_flux(std::string_view name) {
  if (name == "one") return {"one", [](Point) { return 1.0; }, [](Point) { return Point{0.0, 0.0}; }};
  if (name == "z") return {"z", [](Point p) { return p.z; }, [](Point) { return Point{0.0, 1.0}; }};
  if (name == "r2") return {"r2", [](Point p) { return p.r * p.r; }, [](Point p) { return Point{2.0 * p.r, 0.0}; }};
  if (name == "r2z")
    return {"r2z", [](Point p) { return p.r * p.r * p.z; }, [](Point p) { return Point{2.0 * p.r * p.z, p.r * p.r}; }};
  if (name == "solovev") {
    return {"solovev",
            [](Point p) {
              const double r2 = p.r * p.r;
              return r2 * r2 - 4.0 * r2 * p.z * p.z;
            },
            [](Point p) {
              const double r2 = p.r * p.r;
              return Point{4.0 * r2 * p.r - 8.0 * p.r * p.z * p.z, -8.0 * r2 * p.z};
            }};
  }
  if (name == "xpoint") return xpoint_equilibrium();
  throw std::invalid_argument("unknown manufactured solution '" + std::string(name) + "'");
}

double loop_flux(const CurrentLoop& loop, Point p) {
  const double zeta = p.z - loop.z0;
  const double k2 = 4.0 * loop.a * p.r / ((p.r + loop.a) * (p.r + loop.a) + zeta * zeta);
  const double k = std::sqrt(k2);
  return loop.strength * std::sqrt(loop.a * p.r) * ((2.0 - k2) * std::comp_ellint_1(k) - 2.0 * std::comp_ellint_2(k)) / k;
}

// dpsi/dr = r B_z, dpsi/dz = -r B_r with the classical loop field.
Point loop_flux_gradient(const CurrentLoop& loop, Point p) {
  const double a = loop.a, r = p.r, zeta = p.z - loop.z0;
  const double plus = (a + r) * (a + r) + zeta * zeta;
  const double minus = (a - r) * (a - r) + zeta * zeta;
  const double k = std::sqrt(4.0 * a * r / plus);
  const double kk = std::comp_ellint_1(k), ee = std::comp_ellint_2(k);
  const double s = loop.strength / std::sqrt(plus);
  const double bz = s * (kk + (a * a - r * r - zeta * zeta) / minus * ee);
  const double br = s * zeta / r * (-kk + (a * a + r * r + zeta * zeta) / minus * ee);
  return {r * bz, -r * br};
}

AnalyticFlux loop_equilibrium(std::string name, std::vector<CurrentLoop> loops, double vertical) {
  auto psi = [loops, vertical](Point p) {
    double v = vertical * p.r * p.r;
    for (const auto& l : loops) v += loop_flux(l, p);
    return v;
  };
  auto grad = [loops, vertical](Point p) {
    Point g{2.0 * vertical * p.r, 0.0};
    for (const auto& l : loops) g = g + loop_flux_gradient(l, p);
    return g;
  };
  return {std::move(name), psi, grad};
}

AnalyticFlux xpoint_equilibrium() {
  return loop_equilibrium("xpoint", {{6.1, 0.9, 2.0}, {6.1, -0.3, 2.0}, {5.6, -5.4, 2.0}}, -0.44);
}

std::vector<double> weighted_normal_values(const AnalyticFlux& flux, const Mesh& mesh, const BoundaryLoop& loop) {
  std::vector<double> out(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point p = mesh.nodes()[loop.nodes[i]];
    const Point g = flux.grad(p);
    out[i] = (g.r * loop.normals[i].r + g.z * loop.normals[i].z) / p.r;
  }
  return out;
}

std::vector<double> boundary_values(const AnalyticFlux& flux, const Mesh& mesh, const BoundaryLoop& loop) {
  std::vector<double> out(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) out[i] = flux.psi(mesh.nodes()[loop.nodes[i]]);
  return out;
}

}  // namespace kvflux
