#include "kvflux/geometry.hpp"

#include <algorithm>

namespace kvflux {

double signed_area(std::span<const Point> loop) {
  double twice = 0.0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) twice += cross(loop[i], loop[(i + 1) % n]);
  return 0.5 * twice;
}

Point area_centroid(std::span<const Point> loop) {
  double a = 0.0, cr = 0.0, cz = 0.0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
    const Point p = loop[i], q = loop[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    cr += (p.r + q.r) * w;
    cz += (p.z + q.z) * w;
  }
  return {cr / (3.0 * a), cz / (3.0 * a)};
}

double perimeter(std::span<const Point> loop) {
  double s = 0.0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) s += distance(loop[i], loop[(i + 1) % n]);
  return s;
}

bool point_in_polygon(Point p, std::span<const Point> loop) {
  bool inside = false;
  for (std::size_t i = 0, n = loop.size(), j = n - 1; i < n; j = i++) {
    const Point a = loop[i], b = loop[j];
    if ((a.z > p.z) != (b.z > p.z)) {
      const double r_cross = a.r + (p.z - a.z) * (b.r - a.r) / (b.z - a.z);
      if (p.r < r_cross) inside = !inside;
    }
  }
  return inside;
}

int winding_number(Point p, std::span<const Point> loop) {
  int wn = 0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
    const Point a = loop[i], b = loop[(i + 1) % n];
    const double side = cross(b - a, p - a);
    if (a.z <= p.z) {
      if (b.z > p.z && side > 0) ++wn;
    } else if (b.z <= p.z && side < 0) {
      --wn;
    }
  }
  return wn;
}

namespace {

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.r, b.r) <= p.r && p.r <= std::max(a.r, b.r) && std::min(a.z, b.z) <= p.z &&
         p.z <= std::max(a.z, b.z);
}

}  // namespace

bool segments_intersect(Point a, Point b, Point c, Point d) {
  // Disjoint boxes settle nearly collinear pairs that rounding would misjudge.
  if (std::max(a.r, b.r) < std::min(c.r, d.r) || std::max(c.r, d.r) < std::min(a.r, b.r) ||
      std::max(a.z, b.z) < std::min(c.z, d.z) || std::max(c.z, d.z) < std::min(a.z, b.z))
    return false;
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = ab.r * ab.r + ab.z * ab.z;
  double t = len2 > 0 ? ((p.r - a.r) * ab.r + (p.z - a.z) * ab.z) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool is_simple(std::span<const Point> loop) {
  const std::size_t n = loop.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        if (loop[i] == loop[j]) return false;
        continue;
      }
      if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool loops_intersect(std::span<const Point> a, std::span<const Point> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
  return false;
}

}  // namespace kvflux
