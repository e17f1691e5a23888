#include "kvflux/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kvflux/errors.hpp"
#include "kvflux/text.hpp"

namespace kvflux {

namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Chains the edges of one label into a single closed loop; throws TopologyError.
std::vector<int> chain_loop(const std::vector<BoundaryEdge>& edges, BoundaryLabel label, std::size_t node_count) {
  std::vector<std::vector<int>> adj(node_count);
  std::size_t edge_count = 0;
  int start = -1;
  for (const auto& e : edges) {
    if (e.label != label) continue;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
    ++edge_count;
    if (start < 0) start = e.a;
  }
  const std::string name{to_string(label)};
  if (edge_count == 0 && label == BoundaryLabel::Inner) return {};
  if (edge_count < 3) throw TopologyError("boundary '" + name + "' has fewer than 3 edges");
  for (std::size_t v = 0; v < node_count; ++v)
    if (!adj[v].empty() && adj[v].size() != 2)
      throw TopologyError("boundary '" + name + "' is not a simple closed loop at node " + std::to_string(v));
  std::vector<int> loop{start};
  int prev = start, cur = adj[start][0];
  while (cur != start) {
    loop.push_back(cur);
    const int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
    prev = cur;
    cur = next;
    if (loop.size() > edge_count) break;
  }
  if (loop.size() != edge_count)
    throw TopologyError("boundary '" + name + "' does not form exactly one connected loop");
  return loop;
}

std::vector<Point> loop_points(const std::vector<Point>& nodes, const std::vector<int>& loop) {
  std::vector<Point> pts;
  pts.reserve(loop.size());
  for (int v : loop) pts.push_back(nodes[v]);
  return pts;
}

}  // namespace

std::string_view to_string(BoundaryLabel label) { return label == BoundaryLabel::Outer ? "outer" : "inner"; }

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      id_(next_mesh_id()) {
  validate();
}

void Mesh::validate() const {
  const auto n = static_cast<int>(nodes_.size());
  if (n < 3) throw ValidationError("mesh needs at least 3 nodes");
  if (triangles_.empty()) throw ValidationError("mesh has no triangles");
  for (int i = 0; i < n; ++i) {
    const Point p = nodes_[i];
    if (!std::isfinite(p.r) || !std::isfinite(p.z)) throw ValidationError("node " + std::to_string(i) + " is not finite");
    if (!(p.r > 0.0)) throw ValidationError("node " + std::to_string(i) + " has r <= 0");
  }

  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= n) throw ValidationError("triangle " + std::to_string(t) + " has an out-of-range node index");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw ValidationError("triangle " + std::to_string(t) + " repeats a node");
    if (!(triangle_area(t) > 0.0))
      throw ValidationError("triangle " + std::to_string(t) + " is inverted or degenerate");
    for (int k = 0; k < 3; ++k) ++edge_use[edge_key(tri[k], tri[(k + 1) % 3])];
  }

  std::map<std::pair<int, int>, BoundaryLabel> declared;
  for (const auto& e : boundary_edges_) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.a == e.b)
      throw ValidationError("boundary edge has an invalid node index");
    if (!declared.emplace(edge_key(e.a, e.b), e.label).second) throw ValidationError("duplicate boundary edge");
  }
  for (const auto& [key, uses] : edge_use) {
    if (uses > 2) throw ValidationError("edge shared by more than two triangles (non-manifold)");
    const bool is_declared = declared.count(key) > 0;
    if (uses == 1 && !is_declared)
      throw TopologyError("open boundary: edge " + std::to_string(key.first) + "-" + std::to_string(key.second) +
                          " belongs to one triangle but is not a boundary edge");
    if (uses == 2 && is_declared) throw ValidationError("declared boundary edge is interior to the mesh");
  }
  for (const auto& [key, label] : declared)
    if (!edge_use.count(key)) throw ValidationError("declared boundary edge is not a triangle edge");

  const auto outer = chain_loop(boundary_edges_, BoundaryLabel::Outer, nodes_.size());
  const auto inner = chain_loop(boundary_edges_, BoundaryLabel::Inner, nodes_.size());
  std::vector<char> on_outer(nodes_.size(), 0);
  for (int v : outer) on_outer[v] = 1;
  for (int v : inner)
    if (on_outer[v]) throw TopologyError("node " + std::to_string(v) + " lies on both boundary loops");

  const auto outer_pts = loop_points(nodes_, outer);
  const auto inner_pts = loop_points(nodes_, inner);
  if (!is_simple(outer_pts)) throw TopologyError("outer loop self-intersects");
  if (!inner_pts.empty() && !is_simple(inner_pts)) throw TopologyError("inner loop self-intersects");
  for (const Point& p : inner_pts)
    if (!point_in_polygon(p, outer_pts)) throw ValidationError("inner loop is not inside the outer loop");
  const double expected = std::abs(signed_area(outer_pts)) - std::abs(signed_area(inner_pts));
  const double actual = total_area();
  if (std::abs(actual - expected) > 1e-9 * std::abs(expected))
    throw ValidationError("triangles do not cover the region between the loops");
}

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point a = nodes_[tri[0]], b = nodes_[tri[1]], c = nodes_[tri[2]];
  return 0.5 * cross(b - a, c - a);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) s += triangle_area(t);
  return s;
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& tri : triangles_)
    for (int k = 0; k < 3; ++k) m = std::max(m, distance(nodes_[tri[k]], nodes_[tri[(k + 1) % 3]]));
  return m;
}

double Mesh::min_edge_length() const {
  double m = INFINITY;
  for (const auto& tri : triangles_)
    for (int k = 0; k < 3; ++k) m = std::min(m, distance(nodes_[tri[k]], nodes_[tri[(k + 1) % 3]]));
  return m;
}

double Mesh::diameter() const {
  Point lo = nodes_.front(), hi = nodes_.front();
  for (const Point& p : nodes_) {
    lo = {std::min(lo.r, p.r), std::min(lo.z, p.z)};
    hi = {std::max(hi.r, p.r), std::max(hi.z, p.z)};
  }
  return distance(lo, hi);
}

double Mesh::min_r() const {
  double m = INFINITY;
  for (const Point& p : nodes_) m = std::min(m, p.r);
  return m;
}

std::vector<Point> BoundaryLoop::points(const Mesh& mesh) const { return loop_points(mesh.nodes(), nodes); }

BoundaryIndex build_boundary_index(const Mesh& mesh) {
  const auto& nodes = mesh.nodes();
  auto make_loop = [&](BoundaryLabel label) {
    auto chain = chain_loop(mesh.boundary_edges(), label, nodes.size());
    BoundaryLoop loop;
    if (chain.empty()) return loop;
    // Rotate to the minimum-z node (ties: minimum r).
    const auto start = std::min_element(chain.begin(), chain.end(), [&](int a, int b) {
      return nodes[a].z < nodes[b].z || (nodes[a].z == nodes[b].z && nodes[a].r < nodes[b].r);
    });
    std::rotate(chain.begin(), start, chain.end());
    const double area = signed_area(loop_points(nodes, chain));
    const bool want_ccw = label == BoundaryLabel::Outer;
    if ((area > 0) != want_ccw) std::reverse(chain.begin() + 1, chain.end());

    loop.nodes = std::move(chain);
    const std::size_t m = loop.nodes.size();
    loop.arc_lengths.resize(m);
    loop.normals.resize(m);
    std::vector<Point> edge_normal(m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      loop.arc_lengths[i] = s;
      const Point p = nodes[loop.nodes[i]], q = nodes[loop.nodes[(i + 1) % m]];
      const double len = distance(p, q);
      s += len;
      // Domain on the left, so the outward normal is the right-hand side.
      edge_normal[i] = {(q.z - p.z) / len, -(q.r - p.r) / len};
    }
    loop.length = s;
    for (std::size_t i = 0; i < m; ++i) {
      const Point n = edge_normal[(i + m - 1) % m] + edge_normal[i];
      loop.normals[i] = (1.0 / norm(n)) * n;
    }
    return loop;
  };

  BoundaryIndex index;
  index.outer = make_loop(BoundaryLabel::Outer);
  index.inner = make_loop(BoundaryLabel::Inner);
  index.outer_position.assign(nodes.size(), -1);
  index.inner_position.assign(nodes.size(), -1);
  for (std::size_t i = 0; i < index.outer.size(); ++i) index.outer_position[index.outer.nodes[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < index.inner.size(); ++i) index.inner_position[index.inner.nodes[i]] = static_cast<int>(i);
  return index;
}

Mesh parse_mesh(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  // Next non-empty, comment-stripped line split into tokens.
  auto next_tokens = [&](std::vector<std::string_view>& tokens) -> bool {
    while (std::getline(in, raw)) {
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      tokens = text::split_ws(raw);
      if (!tokens.empty()) return true;
    }
    return false;
  };
  auto read_header = [&](std::string_view keyword) {
    std::vector<std::string_view> tok;
    if (!next_tokens(tok)) throw ParseError("unexpected end of file, expected '" + std::string(keyword) + "'", line_no);
    long long count = 0;
    if (tok.size() != 2 || tok[0] != keyword || !text::parse_int(tok[1], count) || count < 0)
      throw ParseError("expected '" + std::string(keyword) + " <count>'", line_no);
    return static_cast<std::size_t>(count);
  };
  auto read_index = [&](std::string_view s, std::size_t limit) {
    long long v = 0;
    if (!text::parse_int(s, v)) throw ParseError("malformed index '" + std::string(s) + "'", line_no);
    if (v < 0 || static_cast<std::size_t>(v) >= limit) throw ParseError("node index out of range", line_no);
    return static_cast<int>(v);
  };

  std::vector<std::string_view> tok;
  const std::size_t n = read_header("nodes");
  std::vector<Point> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_tokens(tok) || tok.size() != 2 || !text::parse_double(tok[0], nodes[i].r) ||
        !text::parse_double(tok[1], nodes[i].z))
      throw ParseError("malformed node line, expected 'r z'", line_no);
  }
  const std::size_t m = read_header("triangles");
  std::vector<Triangle> tris(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_tokens(tok) || tok.size() != 3) throw ParseError("malformed triangle line, expected 'i j k'", line_no);
    for (int k = 0; k < 3; ++k) tris[i][k] = read_index(tok[k], n);
  }
  const std::size_t kcount = read_header("boundary_edges");
  std::vector<BoundaryEdge> edges(kcount);
  for (std::size_t i = 0; i < kcount; ++i) {
    if (!next_tokens(tok) || tok.size() != 3)
      throw ParseError("malformed boundary edge line, expected 'a b label'", line_no);
    edges[i].a = read_index(tok[0], n);
    edges[i].b = read_index(tok[1], n);
    if (tok[2] == "outer")
      edges[i].label = BoundaryLabel::Outer;
    else if (tok[2] == "inner")
      edges[i].label = BoundaryLabel::Inner;
    else
      throw ParseError("unknown boundary label '" + std::string(tok[2]) + "'", line_no);
  }
  if (next_tokens(tok)) throw ParseError("trailing content after boundary edges", line_no);
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  return parse_mesh(in);
}

std::string format_mesh(const Mesh& mesh) {
  std::string out;
  out += "nodes " + std::to_string(mesh.node_count()) + "\n";
  for (const Point& p : mesh.nodes()) {
    text::append_double(out, p.r);
    out += ' ';
    text::append_double(out, p.z);
    out += '\n';
  }
  out += "triangles " + std::to_string(mesh.triangle_count()) + "\n";
  for (const auto& t : mesh.triangles())
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  out += "boundary_edges " + std::to_string(mesh.boundary_edges().size()) + "\n";
  for (const auto& e : mesh.boundary_edges())
    out += std::to_string(e.a) + ' ' + std::to_string(e.b) + ' ' + std::string(to_string(e.label)) + '\n';
  return out;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write mesh file " + path.string());
  out << format_mesh(mesh);
  if (!out) throw IoError("failed writing mesh file " + path.string());
}

}  // namespace kvflux
