#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "kvflux/kernels.hpp"
#include "kvflux/mesh.hpp"

namespace kvflux {

// Gauss rule on the reference triangle in barycentric form; weights sum to 1.
struct TriangleRule {
  int order = 0;
  std::vector<double> l1, l2, weight;

  kernels::QuadratureView view() const { return {weight.size(), l1.data(), l2.data(), weight.data()}; }
};

// Supported orders: 1 (centroid), 2 (3 points), 5 (7 points).
TriangleRule triangle_rule(int order);

// Nodal P1 coefficients of the flux, webers.
struct FluxField {
  std::vector<double> values;
  std::uint64_t mesh_id = 0;

  std::size_t size() const { return values.size(); }
};

// A_ij = sum_T (grad phi_i . grad phi_j) Q_T(1/r), compressed row storage.
struct StiffnessMatrix {
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int32_t>;
  Sparse matrix;
  int quadrature_order = 5;
  std::uint64_t mesh_id = 0;

  kernels::CsrView csr() const;
  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

StiffnessMatrix assemble_stiffness(const Mesh& mesh, int quadrature_order = 5);
// y = A x through the active SIMD kernel.
std::vector<double> matvec(const StiffnessMatrix& a, std::span<const double> x);

enum class BcKind { Dirichlet, WeightedNeumann };

// Values are aligned with the BoundaryIndex ordering of `location`.
// WeightedNeumann values are g = (1/r) dpsi/dn.
struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  BoundaryLabel location = BoundaryLabel::Outer;
  std::vector<double> values;
};

// Stiffness matrix plus the two reduced factorizations the vacuum-flux
// problems need: interior unknowns (Dirichlet on both loops) and interior +
// OUTER unknowns (weighted Neumann on OUTER, Dirichlet on INNER). Both are
// computed once at construction and reused by every solve. Immutable and
// safe to share between threads.
class FemSystem {
 public:
  explicit FemSystem(std::shared_ptr<const Mesh> mesh, int quadrature_order = 5);
  explicit FemSystem(Mesh mesh, int quadrature_order = 5);
  ~FemSystem();
  FemSystem(const FemSystem&) = delete;
  FemSystem& operator=(const FemSystem&) = delete;

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const BoundaryIndex& boundary() const { return boundary_; }
  const StiffnessMatrix& stiffness() const { return stiffness_; }
  std::size_t outer_size() const { return boundary_.outer.size(); }
  std::size_t inner_size() const { return boundary_.inner.size(); }

  // L psi = 0 with psi = f on OUTER and psi = v on INNER.
  FluxField solve_dirichlet(std::span<const double> f_outer, std::span<const double> v_inner) const;
  // L psi = 0 with (1/r) dpsi/dn = g on OUTER and psi = v on INNER.
  FluxField solve_neumann(std::span<const double> g_outer, std::span<const double> v_inner) const;

  std::vector<double> trace(const FluxField& field, BoundaryLabel where) const;
  // Consistent boundary flux: (A psi) restricted to the loop's nodes, i.e. the
  // integral of (1/r) dpsi/dn against each boundary hat function.
  std::vector<double> weighted_normal_derivative(const FluxField& field, BoundaryLabel where) const;
  // (a - b)^T A (a - b), twice the weighted gradient energy of the difference.
  double energy_norm_sq(const FluxField& a, const FluxField& b) const;
  // Integral of g phi_i over OUTER (2-point Gauss per edge, g linear between nodes).
  std::vector<double> neumann_load(std::span<const double> g_outer) const;

  FluxField interpolate(const std::function<double(Point)>& fn) const;
  FluxField make_field(std::vector<double> values) const;
  void check_field(const FluxField& field) const;

 private:
  using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

  std::shared_ptr<const Mesh> mesh_;
  BoundaryIndex boundary_;
  StiffnessMatrix stiffness_;
  std::vector<int> interior_;           // unknowns of the Dirichlet problem
  std::vector<int> neumann_unknowns_;   // interior + OUTER
  std::vector<int> neumann_position_;   // node -> row of the Neumann system or -1
  std::unique_ptr<Factor> dirichlet_factor_;
  std::unique_ptr<Factor> neumann_factor_;
};

// Spec-shaped entry points; they check BC kinds, locations and lengths.
FluxField solve_dirichlet(const FemSystem& fem, const BoundaryCondition& f, const BoundaryCondition& v);
FluxField solve_neumann(const FemSystem& fem, const BoundaryCondition& g, const BoundaryCondition& v);

}  // namespace kvflux
