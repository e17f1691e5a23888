#include "kvflux/mesh_generation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "kvflux/errors.hpp"

namespace kvflux {

namespace {

struct Segment {
  int a;
  int b;
  BoundaryLabel label;
};

// Bowyer-Watson Delaunay triangulation. Returns counter-clockwise triangles
// over the input points (super-triangle removed).
std::vector<Triangle> delaunay(const std::vector<Point>& input) {
  std::vector<Point> pts = input;
  const int n = static_cast<int>(pts.size());
  Point lo = pts.front(), hi = pts.front();
  for (const Point& p : pts) {
    lo = {std::min(lo.r, p.r), std::min(lo.z, p.z)};
    hi = {std::max(hi.r, p.r), std::max(hi.z, p.z)};
  }
  const Point mid = 0.5 * (lo + hi);
  const double span = std::max(hi.r - lo.r, hi.z - lo.z) * 50.0;
  pts.push_back({mid.r - span, mid.z - span});
  pts.push_back({mid.r + span, mid.z - span});
  pts.push_back({mid.r, mid.z + span});

  struct Tri {
    Triangle v;
    Point center;
    double radius2;
  };
  auto make = [&](int a, int b, int c) {
    const Point pa = pts[a], pb = pts[b], pc = pts[c];
    const double d = 2.0 * cross(pb - pa, pc - pa);
    const Point ba = pb - pa, ca = pc - pa;
    const double b2 = ba.r * ba.r + ba.z * ba.z, c2 = ca.r * ca.r + ca.z * ca.z;
    const Point off{(ca.z * b2 - ba.z * c2) / d, (ba.r * c2 - ca.r * b2) / d};
    return Tri{{a, b, c}, pa + off, off.r * off.r + off.z * off.z};
  };

  std::vector<Tri> tris{make(n, n + 1, n + 2)};
  std::vector<char> in_cavity;
  std::vector<std::pair<int, int>> edges;
  std::map<std::pair<int, int>, std::size_t> owner;
  std::vector<Tri> kept;
  for (int i = 0; i < n; ++i) {
    const Point p = pts[i];
    in_cavity.assign(tris.size(), 0);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const double dr = p.r - tris[t].center.r, dz = p.z - tris[t].center.z;
      in_cavity[t] = dr * dr + dz * dz < tris[t].radius2;
    }
    // Cocircular points make the floating-point in-circle test inconsistent;
    // drop triangles behind invisible cavity edges until the cavity is
    // star-shaped around p. The triangle holding p never has such an edge.
    for (bool changed = true; changed;) {
      changed = false;
      owner.clear();
      for (std::size_t t = 0; t < tris.size(); ++t)
        if (in_cavity[t])
          for (int k = 0; k < 3; ++k) owner[{tris[t].v[k], tris[t].v[(k + 1) % 3]}] = t;
      for (const auto& [e, t] : owner) {
        if (owner.count({e.second, e.first})) continue;
        if (!(cross(pts[e.second] - pts[e.first], p - pts[e.first]) > 0.0)) {
          in_cavity[t] = 0;
          changed = true;
        }
      }
    }
    edges.clear();
    kept.clear();
    for (const auto& [e, t] : owner)
      if (!owner.count({e.second, e.first})) edges.push_back(e);
    if (edges.empty()) throw NumericalError("Delaunay insertion found no cavity (duplicate point?)");
    for (std::size_t t = 0; t < tris.size(); ++t)
      if (!in_cavity[t]) kept.push_back(tris[t]);
    for (const auto& [a, b] : edges) kept.push_back(make(a, b, i));
    tris.swap(kept);
  }
  std::vector<Triangle> out;
  out.reserve(tris.size());
  for (const Tri& t : tris)
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
  return out;
}

void check_loop(const Polyline& loop, const char* name) {
  if (loop.size() < 3) throw GeometryError(std::string(name) + " loop needs at least 3 vertices");
  for (const Point& p : loop) {
    if (!std::isfinite(p.r) || !std::isfinite(p.z)) throw GeometryError(std::string(name) + " loop is not finite");
    if (!(p.r > 0.0)) throw GeometryError(std::string(name) + " loop reaches r <= 0");
  }
  if (!is_simple(loop)) throw GeometryError(std::string(name) + " loop is not simple");
}

// Deterministic jitter in [-1, 1] used to break lattice cocircularity.
double jitter(std::uint64_t key) {
  key ^= key >> 33;
  key *= 0xff51afd7ed558ccdULL;
  key ^= key >> 33;
  key *= 0xc4ceb9fe1a85ec53ULL;
  key ^= key >> 33;
  return static_cast<double>(key >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

class AnnulusMesher {
 public:
  AnnulusMesher(const Polyline& outer, const Polyline& inner, double h) : outer_(outer), inner_(inner), h_(h) {}

  Mesh run() {
    add_loop(outer_, BoundaryLabel::Outer);
    add_loop(inner_, BoundaryLabel::Inner);
    add_lattice();
    for (int round = 0; round < 60; ++round) {
      resolve_encroachment();
      auto tris = triangulate();
      if (!insert_refinement_points(tris)) return assemble(tris);
    }
    throw GeometryError("mesh refinement did not converge");
  }

 private:
  bool inside_domain(Point p) const { return point_in_polygon(p, outer_) && !point_in_polygon(p, inner_); }

  void add_loop(const Polyline& loop, BoundaryLabel label) {
    const int first = static_cast<int>(points_.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Point p = loop[i], q = loop[(i + 1) % loop.size()];
      const int pieces = std::max(1, static_cast<int>(std::ceil(distance(p, q) / h_ - 1e-9)));
      for (int k = 0; k < pieces; ++k) {
        points_.push_back(p + (static_cast<double>(k) / pieces) * (q - p));
        kind_.push_back(Kind::Boundary);
      }
    }
    const int last = static_cast<int>(points_.size());
    for (int i = first; i < last; ++i) segments_.push_back({i, i + 1 < last ? i + 1 : first, label});
  }

  double boundary_distance(Point p) const {
    double d = INFINITY;
    for (const auto& s : segments_) d = std::min(d, point_segment_distance(p, points_[s.a], points_[s.b]));
    return d;
  }

  void add_lattice() {
    Point lo = outer_.front(), hi = outer_.front();
    for (const Point& p : outer_) {
      lo = {std::min(lo.r, p.r), std::min(lo.z, p.z)};
      hi = {std::max(hi.r, p.r), std::max(hi.z, p.z)};
    }
    const double dz = h_ * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(std::ceil((hi.z - lo.z) / dz)) + 1;
    const int cols = static_cast<int>(std::ceil((hi.r - lo.r) / h_)) + 2;
    for (int j = 0; j < rows; ++j) {
      for (int i = 0; i < cols; ++i) {
        const std::uint64_t key = static_cast<std::uint64_t>(j) * 1000003ULL + static_cast<std::uint64_t>(i);
        Point p{lo.r + (i + (j % 2 ? 0.5 : 0.0)) * h_, lo.z + j * dz};
        p = p + Point{1e-3 * h_ * jitter(2 * key), 1e-3 * h_ * jitter(2 * key + 1)};
        if (!inside_domain(p) || boundary_distance(p) < 0.55 * h_) continue;
        points_.push_back(p);
        kind_.push_back(Kind::Lattice);
      }
    }
  }

  // A point strictly inside the diametral circle of a boundary segment would
  // keep that segment out of the Delaunay triangulation. Lattice points are
  // dropped; boundary and refinement points force a split of the segment
  // (refinement points are dropped as well).
  void resolve_encroachment() {
    for (int pass = 0; pass < 200; ++pass) {
      bool changed = false;
      std::vector<char> drop(points_.size(), 0);
      std::vector<Segment> next;
      next.reserve(segments_.size());
      for (const auto& s : segments_) {
        const Point a = points_[s.a], b = points_[s.b];
        const Point m = 0.5 * (a + b);
        const double r2 = 0.25 * ((b.r - a.r) * (b.r - a.r) + (b.z - a.z) * (b.z - a.z)) * (1.0 + 1e-6);
        bool split = false;
        for (std::size_t i = 0; i < points_.size(); ++i) {
          if (static_cast<int>(i) == s.a || static_cast<int>(i) == s.b || drop[i]) continue;
          const Point d = points_[i] - m;
          if (d.r * d.r + d.z * d.z >= r2) continue;
          if (kind_[i] != Kind::Lattice) split = true;
          if (kind_[i] != Kind::Boundary) drop[i] = 1;
          changed = true;
        }
        if (split) {
          const int mid = static_cast<int>(points_.size());
          points_.push_back(m);
          kind_.push_back(Kind::Boundary);
          drop.push_back(0);
          next.push_back({s.a, mid, s.label});
          next.push_back({mid, s.b, s.label});
        } else {
          next.push_back(s);
        }
      }
      segments_ = std::move(next);
      if (!changed) return;
      compact(drop);
    }
    throw GeometryError("boundary segments could not be made conforming (loops too close?)");
  }

  void compact(const std::vector<char>& drop) {
    std::vector<int> remap(points_.size(), -1);
    std::vector<Point> points;
    std::vector<Kind> kind;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (drop[i]) continue;
      remap[i] = static_cast<int>(points.size());
      points.push_back(points_[i]);
      kind.push_back(kind_[i]);
    }
    points_ = std::move(points);
    kind_ = std::move(kind);
    for (auto& s : segments_) {
      s.a = remap[s.a];
      s.b = remap[s.b];
    }
  }

  std::vector<Triangle> triangulate() const {
    auto all = delaunay(points_);
    std::vector<Triangle> kept;
    for (const auto& t : all) {
      const Point c = (1.0 / 3.0) * (points_[t[0]] + points_[t[1]] + points_[t[2]]);
      if (inside_domain(c)) kept.push_back(t);
    }
    return kept;
  }

  // Adds circumcenters of triangles with an over-long edge. Returns false when
  // the mesh already meets the size bound.
  bool insert_refinement_points(const std::vector<Triangle>& tris) {
    const double limit = 1.4 * h_;
    std::vector<Point> added;
    for (const auto& t : tris) {
      double longest = 0.0;
      for (int k = 0; k < 3; ++k) longest = std::max(longest, distance(points_[t[k]], points_[t[(k + 1) % 3]]));
      if (longest <= limit) continue;
      const Point a = points_[t[0]], b = points_[t[1]], c = points_[t[2]];
      const double d = 2.0 * cross(b - a, c - a);
      const Point ba = b - a, ca = c - a;
      const double b2 = ba.r * ba.r + ba.z * ba.z, c2 = ca.r * ca.r + ca.z * ca.z;
      Point cc = a + Point{(ca.z * b2 - ba.z * c2) / d, (ba.r * c2 - ca.r * b2) / d};
      if (!inside_domain(cc)) cc = (1.0 / 3.0) * (a + b + c);
      bool near = false;
      for (const Point& q : added) near = near || distance(q, cc) < 0.5 * h_;
      if (!near) added.push_back(cc);
    }
    if (added.empty()) return false;
    points_.insert(points_.end(), added.begin(), added.end());
    kind_.insert(kind_.end(), added.size(), Kind::Refinement);
    return true;
  }

  Mesh assemble(const std::vector<Triangle>& tris) const {
    std::vector<int> used(points_.size(), -1);
    std::vector<Point> nodes;
    for (const auto& t : tris)
      for (int v : t)
        if (used[v] < 0) {
          used[v] = static_cast<int>(nodes.size());
          nodes.push_back(points_[v]);
        }
    std::vector<Triangle> out;
    out.reserve(tris.size());
    for (const auto& t : tris) out.push_back({used[t[0]], used[t[1]], used[t[2]]});
    std::vector<BoundaryEdge> edges;
    for (const auto& s : segments_) {
      if (used[s.a] < 0 || used[s.b] < 0) throw GeometryError("boundary segment lost during triangulation");
      edges.push_back({used[s.a], used[s.b], s.label});
    }
    try {
      return Mesh(std::move(nodes), std::move(out), std::move(edges));
    } catch (const ValidationError& e) {
      throw GeometryError(std::string("generated mesh is invalid: ") + e.what());
    }
  }

  Polyline outer_;
  Polyline inner_;
  double h_;
  std::vector<Point> points_;
  std::vector<Segment> segments_;
  enum class Kind : char { Boundary, Lattice, Refinement };
  std::vector<Kind> kind_;
};

Polyline counter_clockwise(Polyline loop) {
  if (signed_area(loop) < 0) std::reverse(loop.begin(), loop.end());
  return loop;
}

}  // namespace

Mesh generate_annulus_mesh(const Polyline& outer, const Polyline& inner, double target_h) {
  if (!(target_h > 0.0) || !std::isfinite(target_h)) throw GeometryError("target_h must be positive");
  check_loop(outer, "outer");
  check_loop(inner, "inner");
  if (loops_intersect(outer, inner)) throw GeometryError("inner and outer loops intersect");
  for (const Point& p : inner)
    if (!point_in_polygon(p, outer)) throw GeometryError("inner loop is not inside the outer loop");
  return AnnulusMesher(counter_clockwise(outer), counter_clockwise(inner), target_h).run();
}

Polyline scale_toward_centroid(const Polyline& loop, double factor) {
  const Point c = area_centroid(loop);
  Polyline out;
  out.reserve(loop.size());
  for (const Point& p : loop) out.push_back(c + factor * (p - c));
  return out;
}

Polyline circle_polyline(Point center, double radius, int n) {
  Polyline out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double theta = -std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / n;
    out.push_back({center.r + radius * std::cos(theta), center.z + radius * std::sin(theta)});
  }
  return out;
}

Polyline sample_curve(const ClosedCurve& curve, int n) {
  constexpr int dense = 20000;
  std::vector<double> cumulative(dense + 1, 0.0);
  Point prev = curve(0.0);
  for (int i = 1; i <= dense; ++i) {
    const Point p = curve(static_cast<double>(i) / dense);
    cumulative[i] = cumulative[i - 1] + distance(prev, p);
    prev = p;
  }
  const double total = cumulative.back();
  Polyline out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double target = total * k / n;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const int i = std::clamp(static_cast<int>(it - cumulative.begin()) - 1, 0, dense - 1);
    const double seg = cumulative[i + 1] - cumulative[i];
    const double frac = seg > 0 ? (target - cumulative[i]) / seg : 0.0;
    out.push_back(curve((i + frac) / dense));
  }
  return counter_clockwise(std::move(out));
}

Mesh generate_layered_annulus(const LayeredAnnulusSpec& spec) {
  if (spec.inner_nodes < 3 || spec.outer_nodes < spec.inner_nodes || spec.interior_nodes < 1)
    throw GeometryError("invalid layered annulus node counts");
  if (!(spec.inner_scale > 0.0 && spec.inner_scale < 1.0)) throw GeometryError("inner_scale must be in (0, 1)");

  const Polyline dense = sample_curve(spec.outer, 4000);
  const Point centroid = area_centroid(dense);

  const int layers = std::max(1, static_cast<int>(std::lround(2.0 * spec.interior_nodes /
                                                                  (spec.inner_nodes + spec.outer_nodes))));
  std::vector<int> counts(layers + 2);
  counts.front() = spec.inner_nodes;
  counts.back() = spec.outer_nodes;
  std::vector<double> ideal(layers);
  double ideal_sum = 0.0;
  for (int k = 1; k <= layers; ++k) {
    ideal[k - 1] = spec.inner_nodes + static_cast<double>(spec.outer_nodes - spec.inner_nodes) * k / (layers + 1);
    ideal_sum += ideal[k - 1];
  }
  // Scale to the requested total, then distribute rounding remainders.
  int assigned = 0;
  for (int k = 1; k <= layers; ++k) {
    ideal[k - 1] *= spec.interior_nodes / ideal_sum;
    counts[k] = static_cast<int>(std::floor(ideal[k - 1]));
    assigned += counts[k];
  }
  std::vector<int> order(layers);
  for (int k = 0; k < layers; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ideal[a] - std::floor(ideal[a]) > ideal[b] - std::floor(ideal[b]);
  });
  for (int k = 0; assigned < spec.interior_nodes; k = (k + 1) % layers, ++assigned) ++counts[order[k] + 1];
  for (int k = 1; k <= layers; ++k)
    if (counts[k] < 3) throw GeometryError("too few interior nodes for the layer structure");

  std::vector<Point> nodes;
  std::vector<int> first(layers + 2);
  for (int k = 0; k < layers + 2; ++k) {
    const double scale = spec.inner_scale + (1.0 - spec.inner_scale) * k / (layers + 1);
    first[k] = static_cast<int>(nodes.size());
    for (const Point& p : sample_curve(spec.outer, counts[k])) nodes.push_back(centroid + scale * (p - centroid));
  }

  std::vector<Triangle> tris;
  for (int k = 0; k + 1 < layers + 2; ++k) {
    const int na = counts[k], nb = counts[k + 1];
    const int a0 = first[k], b0 = first[k + 1];
    int i = 0, j = 0;
    while (i < na || j < nb) {
      // Advance along whichever ring is behind in normalized arc length.
      const bool advance_outer = j < nb && (i == na || static_cast<long>(j + 1) * na <= static_cast<long>(i + 1) * nb);
      if (advance_outer) {
        tris.push_back({b0 + j, b0 + (j + 1) % nb, a0 + i % na});
        ++j;
      } else {
        tris.push_back({a0 + i, b0 + j % nb, a0 + (i + 1) % na});
        ++i;
      }
    }
  }

  std::vector<BoundaryEdge> edges;
  for (int i = 0; i < spec.inner_nodes; ++i) edges.push_back({i, (i + 1) % spec.inner_nodes, BoundaryLabel::Inner});
  const int ob = first.back();
  for (int i = 0; i < spec.outer_nodes; ++i) edges.push_back({ob + i, ob + (i + 1) % spec.outer_nodes, BoundaryLabel::Outer});
  try {
    return Mesh(std::move(nodes), std::move(tris), std::move(edges));
  } catch (const ValidationError& e) {
    throw GeometryError(std::string("layered mesh is invalid (curve not star-shaped?): ") + e.what());
  }
}

Mesh refine_uniform(const Mesh& mesh) { return refine_uniform(mesh, nullptr); }

Mesh refine_uniform(const Mesh& mesh, const BoundarySnap& snap) {
  std::vector<Point> nodes = mesh.nodes();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(nodes.size()));
    if (inserted) nodes.push_back(0.5 * (mesh.nodes()[a] + mesh.nodes()[b]));
    return it->second;
  };
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangle_count());
  for (const auto& t : mesh.triangles()) {
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
    tris.push_back({t[0], m01, m20});
    tris.push_back({m01, t[1], m12});
    tris.push_back({m20, m12, t[2]});
    tris.push_back({m01, m12, m20});
  }
  std::vector<BoundaryEdge> edges;
  for (const auto& e : mesh.boundary_edges()) {
    const int m = mid(e.a, e.b);
    if (snap) nodes[m] = snap(nodes[m], e.label);
    edges.push_back({e.a, m, e.label});
    edges.push_back({m, e.b, e.label});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

ClosedCurve iter_like_vessel() {
  return [](double s) {
    constexpr double major = 6.2, minor = 2.3, elongation = 1.8, triangularity = 0.35;
    const double theta = 2.0 * std::numbers::pi * s - std::numbers::pi / 2;
    return Point{major + minor * std::cos(theta + triangularity * std::sin(theta)),
                 elongation * minor * std::sin(theta)};
  };
}

Mesh iter_like_mesh() { return generate_layered_annulus({iter_like_vessel(), 0.5, 120, 30, 827}); }

Mesh desk_annulus_mesh() {
  const ClosedCurve circle = [](double s) {
    const double theta = 2.0 * std::numbers::pi * s - std::numbers::pi / 2;
    return Point{6.0 + 3.0 * std::cos(theta), 3.0 * std::sin(theta)};
  };
  return generate_layered_annulus({circle, 0.5, 120, 30, 827});
}

Mesh polar_annulus_mesh(int n_theta, int n_rho) {
  if (n_theta < 3 || n_rho < 1) throw GeometryError("polar annulus needs n_theta >= 3 and n_rho >= 1");
  auto id = [&](int i, int j) { return j * n_theta + i % n_theta; };
  std::vector<Point> nodes;
  for (int j = 0; j <= n_rho; ++j) {
    const double rho = 1.5 + 1.5 * j / n_rho;
    for (int i = 0; i < n_theta; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / n_theta;
      nodes.push_back({6.0 + rho * std::cos(theta), rho * std::sin(theta)});
    }
  }
  std::vector<Triangle> tris;
  for (int j = 0; j < n_rho; ++j)
    for (int i = 0; i < n_theta; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      tris.push_back({a, c, b});
      tris.push_back({a, d, c});
    }
  std::vector<BoundaryEdge> edges;
  for (int i = 0; i < n_theta; ++i) {
    edges.push_back({id(i, n_rho), id(i + 1, n_rho), BoundaryLabel::Outer});
    edges.push_back({id(i + 1, 0), id(i, 0), BoundaryLabel::Inner});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

BoundarySnap desk_annulus_snap() {
  return [](Point p, BoundaryLabel label) {
    const Point c{6.0, 0.0};
    const double radius = label == BoundaryLabel::Outer ? 3.0 : 1.5;
    return c + (radius / distance(p, c)) * (p - c);
  };
}

}  // namespace kvflux
