#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kvflux/errors.hpp"
#include "kvflux/fem.hpp"

namespace kvflux {

class EmptyIsolineError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoTransitionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Per-triangle constant poloidal field, B = (1/r_c)(-dpsi/dz, dpsi/dr) with
// r_c the centroid radius.
struct FieldSample {
  std::vector<double> br;
  std::vector<double> bz;
};

// Constant gradient (dpsi/dr, dpsi/dz) of the P1 field on triangle t.
Point triangle_gradient(const Mesh& mesh, const FluxField& field, std::size_t t);
FieldSample magnetic_field(const FemSystem& fem, const FluxField& field);

struct Isoline {
  double level = 0.0;  // the level actually traced (after tie-break)
  std::vector<std::array<Point, 2>> segments;
  std::vector<int> segment_triangle;  // generating triangle of each segment
  // Chained polylines; closed ones repeat their first point at the end.
  std::vector<Polyline> polylines;
  std::vector<char> polyline_closed;
  bool closed = false;         // every polyline is closed
  bool inside_domain = false;  // no polyline reaches a boundary loop
};

// Marching triangles. A level equal to a nodal value is shifted by
// +1e-12 * (flux range). Throws EmptyIsolineError when no triangle is crossed.
Isoline extract_isoline(const FemSystem& fem, const FluxField& field, double level);

// Point location by brute force; returns the P1 value or nullopt outside the mesh.
std::optional<double> evaluate_at(const FemSystem& fem, const FluxField& field, Point p);

enum class BoundaryMode { XPoint, Limiter };
std::string_view to_string(BoundaryMode mode);

struct PlasmaBoundary {
  BoundaryMode mode = BoundaryMode::XPoint;
  double psi_P = 0.0;
  Isoline isoline;
  // Index into isoline.polylines of the closed curve encircling INNER, or -1.
  int boundary_polyline = -1;

  bool closed() const { return boundary_polyline >= 0; }
};

// X-point mode (no limiter): the superlevel set of s*psi (s chosen so the
// INNER side is high) is tracked through a merge tree with INNER glued into
// one vertex. Above the transition level the component holding INNER owns a
// single local maximum; below it, it has merged with a second one through the
// discrete saddle. The level is bisected to 1e-9 * (flux range) and the
// monotonicity of the classifier is asserted on a sampled bracket.
// Limiter mode: psi_P is the extremal s*psi sampled along the limiter, whose
// isoline must be closed and encircle INNER.
PlasmaBoundary find_plasma_boundary(const FemSystem& fem, const FluxField& field,
                                    const std::optional<Polyline>& limiter = std::nullopt);

}  // namespace kvflux
