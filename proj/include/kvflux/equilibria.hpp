#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "kvflux/fem.hpp"
#include "kvflux/geometry.hpp"

namespace kvflux {

// Closed-form flux satisfying L psi = 0 away from its sources, with gradient
// (dpsi/dr, dpsi/dz) returned as a Point.
struct AnalyticFlux {
  std::string name;
  std::function<double(Point)> psi;
  std::function<Point(Point)> grad;
};

// Names accepted by manufactured_flux(): one, z, r2, r2z, solovev
// (r^4 - 4 r^2 z^2), xpoint (diverted current-loop equilibrium).
std::vector<std::string> manufactured_names();
AnalyticFlux manufactured_flux(std::string_view name);

// Circular filament of radius a at height z0. `strength` is mu0 I / (2 pi) so
// that psi = strength * sqrt(a r) ((2 - k^2) K(k) - 2 E(k)) / k.
struct CurrentLoop {
  double a = 1.0;
  double z0 = 0.0;
  double strength = 1.0;
};

double loop_flux(const CurrentLoop& loop, Point p);
Point loop_flux_gradient(const CurrentLoop& loop, Point p);

// Sum of loops plus a uniform vertical field term vertical * r^2.
AnalyticFlux loop_equilibrium(std::string name, std::vector<CurrentLoop> loops, double vertical);

// Lower single-null configuration for the ITER-like vessel: two plasma loops
// inside the 0.5-scaled inner contour, a divertor loop below the vessel and a
// vertical field. The X-point sits inside the vacuum region near the bottom
// of the vessel and the separatrix encloses the inner contour.
AnalyticFlux xpoint_equilibrium();

// Nodal values of (1/r) dpsi/dn on a boundary loop (outward normals).
std::vector<double> weighted_normal_values(const AnalyticFlux& flux, const Mesh& mesh, const BoundaryLoop& loop);
std::vector<double> boundary_values(const AnalyticFlux& flux, const Mesh& mesh, const BoundaryLoop& loop);

}  // namespace kvflux
