#include "kvflux/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace kvflux {

Point triangle_gradient(const Mesh& mesh, const FluxField& field, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const Point p0 = mesh.nodes()[tri[0]], p1 = mesh.nodes()[tri[1]], p2 = mesh.nodes()[tri[2]];
  // Differences against vertex 0 keep constant fields at an exact zero gradient.
  const double d1 = field.values[tri[1]] - field.values[tri[0]], d2 = field.values[tri[2]] - field.values[tri[0]];
  const Point e1 = p1 - p0, e2 = p2 - p0;
  const double twice_area = cross(e1, e2);
  return {(d1 * e2.z - d2 * e1.z) / twice_area, (d2 * e1.r - d1 * e2.r) / twice_area};
}

FieldSample magnetic_field(const FemSystem& fem, const FluxField& field) {
  fem.check_field(field);
  const Mesh& mesh = fem.mesh();
  FieldSample out;
  out.br.resize(mesh.triangle_count());
  out.bz.resize(mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double rc = (mesh.nodes()[tri[0]].r + mesh.nodes()[tri[1]].r + mesh.nodes()[tri[2]].r) / 3.0;
    const Point g = triangle_gradient(mesh, field, t);
    out.br[t] = -g.z / rc;
    out.bz[t] = g.r / rc;
  }
  return out;
}

namespace {

double flux_range(const FluxField& field) {
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  return *hi - *lo;
}

using EdgeKey = std::pair<int, int>;
EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

Isoline extract_isoline(const FemSystem& fem, const FluxField& field, double level) {
  fem.check_field(field);
  const Mesh& mesh = fem.mesh();
  const auto& v = field.values;
  const double range = flux_range(field);
  if (std::find(v.begin(), v.end(), level) != v.end()) level += 1e-12 * range;

  Isoline iso;
  iso.level = level;
  // One crossing point per mesh edge, so neighbouring triangles share
  // endpoints bit for bit and chaining is exact.
  std::map<EdgeKey, int> vertex_of_edge;
  std::vector<Point> vertices;
  std::vector<EdgeKey> vertex_edge;
  auto crossing = [&](int a, int b) {
    const EdgeKey key = edge_key(a, b);
    auto [it, inserted] = vertex_of_edge.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) {
      const double t = (level - v[key.first]) / (v[key.second] - v[key.first]);
      const Point pa = mesh.nodes()[key.first], pb = mesh.nodes()[key.second];
      vertices.push_back(pa + t * (pb - pa));
      vertex_edge.push_back(key);
    }
    return it->second;
  };

  std::vector<std::array<int, 2>> links;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    int ends[2], count = 0;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if ((v[a] - level) * (v[b] - level) < 0.0) ends[count++] = crossing(a, b);
    }
    if (count != 2) continue;
    links.push_back({ends[0], ends[1]});
    iso.segments.push_back({vertices[ends[0]], vertices[ends[1]]});
    iso.segment_triangle.push_back(static_cast<int>(t));
  }
  if (links.empty()) throw EmptyIsolineError("level " + std::to_string(level) + " does not cross the mesh");

  const std::size_t nv = vertices.size();
  std::vector<std::vector<int>> adj(nv);
  for (std::size_t s = 0; s < links.size(); ++s) {
    adj[links[s][0]].push_back(static_cast<int>(s));
    adj[links[s][1]].push_back(static_cast<int>(s));
  }
  std::vector<char> used(links.size(), 0);
  auto walk = [&](int start) {
    Polyline line{vertices[start]};
    int at = start;
    for (;;) {
      int next_seg = -1;
      for (int s : adj[at])
        if (!used[s]) {
          next_seg = s;
          break;
        }
      if (next_seg < 0) break;
      used[next_seg] = 1;
      at = links[next_seg][0] == at ? links[next_seg][1] : links[next_seg][0];
      line.push_back(vertices[at]);
      if (at == start) break;
    }
    return line;
  };
  // Open arcs start at crossings of boundary edges (degree one).
  for (std::size_t i = 0; i < nv; ++i)
    if (adj[i].size() == 1 && !used[adj[i][0]]) iso.polylines.push_back(walk(static_cast<int>(i)));
  for (std::size_t s = 0; s < links.size(); ++s)
    if (!used[s]) iso.polylines.push_back(walk(links[s][0]));

  const double tol = 1e-12 * mesh.diameter();
  iso.closed = true;
  for (const auto& line : iso.polylines) {
    const bool closed = line.size() > 2 && distance(line.front(), line.back()) <= tol;
    iso.polyline_closed.push_back(closed);
    iso.closed = iso.closed && closed;
  }
  iso.inside_domain = iso.closed;
  return iso;
}

std::optional<double> evaluate_at(const FemSystem& fem, const FluxField& field, Point p) {
  fem.check_field(field);
  const Mesh& mesh = fem.mesh();
  const double tol = 1e-12;
  for (const auto& tri : mesh.triangles()) {
    const Point a = mesh.nodes()[tri[0]], b = mesh.nodes()[tri[1]], c = mesh.nodes()[tri[2]];
    const double area = cross(b - a, c - a);
    const double l1 = cross(c - b, p - b) / area, l2 = cross(a - c, p - c) / area, l3 = cross(b - a, p - a) / area;
    if (l1 >= -tol && l2 >= -tol && l3 >= -tol)
      return l1 * field.values[tri[0]] + l2 * field.values[tri[1]] + l3 * field.values[tri[2]];
  }
  return std::nullopt;
}

std::string_view to_string(BoundaryMode mode) { return mode == BoundaryMode::XPoint ? "xpoint" : "limiter"; }

namespace {

// Union-find over mesh nodes, with every INNER node merged into one class.
class MergeTree {
 public:
  MergeTree(const FemSystem& fem, std::vector<double> phi) : fem_(fem), phi_(std::move(phi)) {
    const Mesh& mesh = fem.mesh();
    neighbors_.resize(mesh.node_count());
    for (const auto& t : mesh.triangles())
      for (int k = 0; k < 3; ++k) {
        neighbors_[t[k]].push_back(t[(k + 1) % 3]);
        neighbors_[t[(k + 1) % 3]].push_back(t[k]);
      }
    // Births: local maxima of the node graph. INNER enters the filtration
    // with its highest node and is a birth when that node is a local maximum;
    // lower INNER nodes only glue onto it.
    const auto& inner = fem.boundary().inner_position;
    birth_.assign(mesh.node_count(), 0);
    int top = fem.boundary().inner.nodes.front();
    for (int node : fem.boundary().inner.nodes)
      if (higher(node, top)) top = node;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      const int node = static_cast<int>(i);
      if (inner[i] >= 0 && node != top) continue;
      bool is_max = true;
      for (int j : neighbors_[i])
        if (higher(j, node)) is_max = false;
      if (inner[i] >= 0)
        inner_birth_ = is_max;
      else
        birth_[i] = is_max;
    }
  }

  // True when the superlevel component holding INNER has at most one birth.
  bool isolated(double level) const {
    const std::size_t n = phi_.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    const auto& inner = fem_.boundary().inner.nodes;
    int anchor = -1;
    for (int node : inner)
      if (phi_[node] > level) {
        if (anchor < 0) anchor = node;
        parent[find(node)] = find(anchor);
      }
    if (anchor < 0) return true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(phi_[i] > level)) continue;
      for (int j : neighbors_[i])
        if (phi_[j] > level) parent[find(static_cast<int>(i))] = find(j);
    }
    const int root = find(anchor);
    int births = inner_birth_ ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i)
      if (birth_[i] && phi_[i] > level && find(static_cast<int>(i)) == root) ++births;
    return births <= 1;
  }

 private:
  // Total order on nodes: value, then index.
  bool higher(int a, int b) const { return phi_[a] > phi_[b] || (phi_[a] == phi_[b] && a > b); }

  const FemSystem& fem_;
  std::vector<double> phi_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<char> birth_;
  bool inner_birth_ = false;
};

int encircling_polyline(const FemSystem& fem, const Isoline& iso) {
  const Point probe = fem.mesh().nodes()[fem.boundary().inner.nodes.front()];
  int best = -1;
  double best_len = -1.0;
  for (std::size_t i = 0; i < iso.polylines.size(); ++i) {
    if (!iso.polyline_closed[i]) continue;
    const Polyline& line = iso.polylines[i];
    const Polyline loop(line.begin(), line.end() - 1);
    if (winding_number(probe, loop) == 0) continue;
    const double len = perimeter(loop);
    if (len > best_len) best_len = len, best = static_cast<int>(i);
  }
  return best;
}

double orientation_sign(const FemSystem& fem, const FluxField& field) {
  auto mean = [&](const BoundaryLoop& loop) {
    double s = 0.0;
    for (int node : loop.nodes) s += field.values[node];
    return s / static_cast<double>(loop.size());
  };
  return mean(fem.boundary().inner) >= mean(fem.boundary().outer) ? 1.0 : -1.0;
}

}  // namespace

PlasmaBoundary find_plasma_boundary(const FemSystem& fem, const FluxField& field, const std::optional<Polyline>& limiter) {
  fem.check_field(field);
  if (!fem.boundary().has_inner()) throw ValidationError("plasma boundary search needs an INNER loop");
  const double s = orientation_sign(fem, field);
  std::vector<double> phi(field.values);
  for (double& x : phi) x *= s;
  const double range = flux_range(field);
  PlasmaBoundary out;

  if (limiter) {
    out.mode = BoundaryMode::Limiter;
    const double h = fem.mesh().min_edge_length();
    double best = -INFINITY;
    const std::size_t m = limiter->size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point a = (*limiter)[i], b = (*limiter)[(i + 1) % m];
      const int pieces = std::max(1, static_cast<int>(std::ceil(4.0 * distance(a, b) / h)));
      for (int k = 0; k < pieces; ++k) {
        if (auto val = evaluate_at(fem, field, a + (static_cast<double>(k) / pieces) * (b - a)))
          best = std::max(best, s * *val);
      }
    }
    if (!std::isfinite(best)) throw ValidationError("limiter does not intersect the mesh");
    out.psi_P = s * best;
    out.isoline = extract_isoline(fem, field, out.psi_P);
    out.boundary_polyline = encircling_polyline(fem, out.isoline);
    if (out.boundary_polyline < 0)
      throw NoTransitionError("limiter level does not give a closed flux surface around INNER");
    return out;
  }

  out.mode = BoundaryMode::XPoint;
  const MergeTree tree(fem, phi);
  double hi = *std::max_element(phi.begin(), phi.end());
  double lo = *std::min_element(phi.begin(), phi.end()) - 1e-9 * range;
  if (!tree.isolated(hi)) throw NumericalError("merge-tree classifier inconsistent at the top level");
  if (tree.isolated(lo)) throw NoTransitionError("no X-point: nested flux contours never merge inside the domain");

  // The classifier must switch exactly once along the bracket.
  constexpr int samples = 64;
  int switches = 0;
  bool prev = true;
  for (int k = 1; k <= samples; ++k) {
    const bool now = tree.isolated(hi + (lo - hi) * k / samples);
    if (now != prev) ++switches;
    prev = now;
  }
  if (switches != 1) throw NumericalError("contour-topology classifier is not monotone on the bracket");

  while (hi - lo > 1e-9 * range) {
    const double mid = 0.5 * (hi + lo);
    if (tree.isolated(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.psi_P = s * hi;
  out.isoline = extract_isoline(fem, field, out.psi_P);
  out.boundary_polyline = encircling_polyline(fem, out.isoline);
  return out;
}

}  // namespace kvflux
