#pragma once

#include <functional>

#include "kvflux/mesh.hpp"

namespace kvflux {

// Triangulates the region between two closed polylines. Polyline vertices are
// kept and their edges subdivided to at most target_h; the interior is filled
// with a jittered triangular lattice and triangulated by a boundary-conforming
// Delaunay construction, then refined until no edge exceeds 1.5 * target_h.
// Throws GeometryError if the loops touch, are not simple, or inner is not
// strictly inside outer.
Mesh generate_annulus_mesh(const Polyline& outer, const Polyline& inner, double target_h);

// Copy of loop scaled by factor about its area centroid.
Polyline scale_toward_centroid(const Polyline& loop, double factor);

// n vertices, counter-clockwise, first vertex at the bottom of the circle.
Polyline circle_polyline(Point center, double radius, int n);

// Closed curve parameterized on [0, 1).
using ClosedCurve = std::function<Point(double)>;

// n points at equal arc-length spacing, counter-clockwise, starting at s = 0.
Polyline sample_curve(const ClosedCurve& curve, int n);

// Ring-by-ring mesh between a star-shaped closed curve and its copy scaled by
// inner_scale about the area centroid. Produces exactly the requested node
// counts; nodes are numbered inner loop first, outer loop last.
struct LayeredAnnulusSpec {
  ClosedCurve outer;
  double inner_scale = 0.5;
  int outer_nodes = 120;
  int inner_nodes = 30;
  int interior_nodes = 827;
};

Mesh generate_layered_annulus(const LayeredAnnulusSpec& spec);

// Splits every triangle into four through its edge midpoints.
Mesh refine_uniform(const Mesh& mesh);
// Same, with each new boundary midpoint moved by snap (typically onto the
// curve the boundary polygon approximates, so corner angles tend to pi).
using BoundarySnap = std::function<Point(Point, BoundaryLabel)>;
Mesh refine_uniform(const Mesh& mesh, const BoundarySnap& snap);

// D-shaped vessel contour (major radius 6.2 m, minor radius 2.3 m, elongation
// 1.8, triangularity 0.35).
ClosedCurve iter_like_vessel();
// Vessel contour with a 0.5-scaled inner contour: 977 nodes, 1804 triangles,
// 120 outer and 30 inner boundary nodes.
Mesh iter_like_mesh();
// Circular annulus centered at (6, 0), radii 3 and 1.5, same node counts as
// iter_like_mesh().
Mesh desk_annulus_mesh();
// Same annulus as a structured polar grid: n_rho rings of n_theta quads, each
// split along the same diagonal. Uniform refinement with desk_annulus_snap()
// keeps the pattern, which is what nodal L-infinity convergence studies need.
Mesh polar_annulus_mesh(int n_theta, int n_rho);
// Radial projection onto the two circles of desk_annulus_mesh().
BoundarySnap desk_annulus_snap();

}  // namespace kvflux
