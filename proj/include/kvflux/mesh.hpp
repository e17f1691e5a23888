#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kvflux/geometry.hpp"

namespace kvflux {

// OUTER is the vessel contour (data side), INNER the fictitious contour inside
// the plasma (control side).
enum class BoundaryLabel { Outer, Inner };

std::string_view to_string(BoundaryLabel label);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::Outer;
};

using Triangle = std::array<int, 3>;

// Unstructured triangulation of the annular region between the OUTER and
// INNER loops. Immutable; the constructor enforces every invariant (strictly
// positive r, counter-clockwise triangles, edge-manifold, one closed simple
// loop per label with INNER inside OUTER) and throws ValidationError /
// TopologyError. The INNER loop may be absent, which gives a simply connected
// mesh; the data-completion layer rejects such meshes.
class Mesh {
 public:
  Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  // Process-unique identity, used to check that fields live on this mesh.
  std::uint64_t id() const { return id_; }

  double triangle_area(std::size_t t) const;
  double total_area() const;
  double max_edge_length() const;
  double min_edge_length() const;
  // Length of the bounding-box diagonal.
  double diameter() const;
  double min_r() const;

 private:
  void validate() const;

  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::uint64_t id_;
};

// One boundary loop traversed with the domain on the left: counter-clockwise
// for OUTER, clockwise for INNER. Starts at the node of minimum z (ties:
// minimum r).
struct BoundaryLoop {
  std::vector<int> nodes;
  std::vector<double> arc_lengths;  // arc length at each node, first is 0
  double length = 0.0;              // closed-loop length
  std::vector<Point> normals;       // unit outward normal of the domain at each node

  std::size_t size() const { return nodes.size(); }
  std::vector<Point> points(const Mesh& mesh) const;
};

struct BoundaryIndex {
  BoundaryLoop outer;
  BoundaryLoop inner;
  // For every mesh node, its position in outer/inner loop or -1.
  std::vector<int> outer_position;
  std::vector<int> inner_position;

  const BoundaryLoop& loop(BoundaryLabel label) const { return label == BoundaryLabel::Outer ? outer : inner; }
  bool has_inner() const { return !inner.nodes.empty(); }
  bool is_boundary(int node) const { return outer_position[node] >= 0 || inner_position[node] >= 0; }
};

BoundaryIndex build_boundary_index(const Mesh& mesh);

Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::filesystem::path& path);
std::string format_mesh(const Mesh& mesh);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace kvflux
