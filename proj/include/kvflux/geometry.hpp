#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace kvflux {

// A point of the poloidal plane, meters.
struct Point {
  double r = 0.0;
  double z = 0.0;

  friend Point operator+(Point a, Point b) { return {a.r + b.r, a.z + b.z}; }
  friend Point operator-(Point a, Point b) { return {a.r - b.r, a.z - b.z}; }
  friend Point operator*(double s, Point a) { return {s * a.r, s * a.z}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double cross(Point a, Point b) { return a.r * b.z - a.z * b.r; }
inline double norm(Point a) { return std::hypot(a.r, a.z); }
inline double distance(Point a, Point b) { return norm(a - b); }

// Closed polyline; the closing edge back to the first vertex is implied.
using Polyline = std::vector<Point>;

// Positive for counter-clockwise loops (r to the right, z up).
double signed_area(std::span<const Point> loop);
Point area_centroid(std::span<const Point> loop);
double perimeter(std::span<const Point> loop);

// Even-odd rule; points on the boundary may go either way.
bool point_in_polygon(Point p, std::span<const Point> loop);
// Winding number of the closed loop around p.
int winding_number(Point p, std::span<const Point> loop);

// Proper or touching intersection of closed segments [a,b] and [c,d].
bool segments_intersect(Point a, Point b, Point c, Point d);
double point_segment_distance(Point p, Point a, Point b);

// Whether a closed polyline is simple (no two non-adjacent edges touch).
bool is_simple(std::span<const Point> loop);
// Whether any edge of loop a touches any edge of loop b.
bool loops_intersect(std::span<const Point> a, std::span<const Point> b);

}  // namespace kvflux
