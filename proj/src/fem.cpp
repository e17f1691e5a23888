#include "kvflux/fem.hpp"

#include <cmath>
#include <numeric>

#include "kvflux/errors.hpp"

namespace kvflux {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat restrict_to(const StiffnessMatrix& a, const std::vector<int>& rows_cols, const std::vector<int>& position) {
  std::vector<Eigen::Triplet<double>> trip;
  const auto& m = a.matrix;
  for (std::size_t i = 0; i < rows_cols.size(); ++i) {
    const int row = rows_cols[i];
    for (StiffnessMatrix::Sparse::InnerIterator it(m, row); it; ++it) {
      const int j = position[it.col()];
      if (j >= 0) trip.emplace_back(static_cast<int>(i), j, it.value());
    }
  }
  SpMat out(static_cast<Eigen::Index>(rows_cols.size()), static_cast<Eigen::Index>(rows_cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                         std::to_string(got));
}

}  // namespace

TriangleRule triangle_rule(int order) {
  TriangleRule rule;
  rule.order = order;
  auto add = [&](double l0, double l1, double w) {
    (void)l0;
    rule.l1.push_back(l1);
    rule.l2.push_back(1.0 - l0 - l1);
    rule.weight.push_back(w);
  };
  switch (order) {
    case 1:
      add(1.0 / 3, 1.0 / 3, 1.0);
      break;
    case 2:
      add(2.0 / 3, 1.0 / 6, 1.0 / 3);
      add(1.0 / 6, 2.0 / 3, 1.0 / 3);
      add(1.0 / 6, 1.0 / 6, 1.0 / 3);
      break;
    case 5: {
      const double s15 = std::sqrt(15.0);
      const double a = (6.0 - s15) / 21.0, wa = (155.0 - s15) / 1200.0;
      const double b = (6.0 + s15) / 21.0, wb = (155.0 + s15) / 1200.0;
      add(1.0 / 3, 1.0 / 3, 9.0 / 40.0);
      add(a, a, wa);
      add(a, 1.0 - 2.0 * a, wa);
      add(1.0 - 2.0 * a, a, wa);
      add(b, b, wb);
      add(b, 1.0 - 2.0 * b, wb);
      add(1.0 - 2.0 * b, b, wb);
      break;
    }
    default:
      throw std::invalid_argument("quadrature order must be 1, 2 or 5");
  }
  return rule;
}

kernels::CsrView StiffnessMatrix::csr() const {
  return {static_cast<std::size_t>(matrix.rows()), matrix.outerIndexPtr(), matrix.innerIndexPtr(), matrix.valuePtr()};
}

StiffnessMatrix assemble_stiffness(const Mesh& mesh, int quadrature_order) {
  const TriangleRule rule = triangle_rule(quadrature_order);
  const std::size_t nt = mesh.triangle_count();
  std::vector<double> coords(6 * nt);
  double* r0 = coords.data();
  double* z0 = r0 + nt;
  double* r1 = z0 + nt;
  double* z1 = r1 + nt;
  double* r2 = z1 + nt;
  double* z2 = r2 + nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point a = mesh.nodes()[tri[0]], b = mesh.nodes()[tri[1]], c = mesh.nodes()[tri[2]];
    r0[t] = a.r, z0[t] = a.z, r1[t] = b.r, z1[t] = b.z, r2[t] = c.r, z2[t] = c.z;
  }
  std::vector<double> local(7 * nt);
  const kernels::LocalStiffness out{local.data(),          local.data() + nt,     local.data() + 2 * nt,
                                    local.data() + 3 * nt, local.data() + 4 * nt, local.data() + 5 * nt,
                                    local.data() + 6 * nt};
  kernels::weighted_local_stiffness({nt, r0, z0, r1, z1, r2, z2}, rule.view(), out);

  std::vector<Eigen::Triplet<double, std::int32_t>> trip;
  trip.reserve(9 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles()[t];
    const double k[3][3] = {{out.k00[t], out.k01[t], out.k02[t]},
                            {out.k01[t], out.k11[t], out.k12[t]},
                            {out.k02[t], out.k12[t], out.k22[t]}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(v[i], v[j], k[i][j]);
  }
  StiffnessMatrix a;
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  a.matrix.resize(n, n);
  a.matrix.setFromTriplets(trip.begin(), trip.end());
  a.matrix.makeCompressed();
  a.quadrature_order = quadrature_order;
  a.mesh_id = mesh.id();
  return a;
}

std::vector<double> matvec(const StiffnessMatrix& a, std::span<const double> x) {
  check_length(x.size(), a.size(), "matvec");
  std::vector<double> y(a.size());
  kernels::csr_matvec(a.csr(), x, y);
  return y;
}

FemSystem::FemSystem(Mesh mesh, int quadrature_order)
    : FemSystem(std::make_shared<const Mesh>(std::move(mesh)), quadrature_order) {}

FemSystem::FemSystem(std::shared_ptr<const Mesh> mesh, int quadrature_order)
    : mesh_(std::move(mesh)), boundary_(build_boundary_index(*mesh_)), stiffness_(assemble_stiffness(*mesh_, quadrature_order)) {
  const std::size_t n = mesh_->node_count();
  std::vector<int> dirichlet_position(n, -1);
  neumann_position_.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    const int node = static_cast<int>(v);
    if (!boundary_.is_boundary(node)) {
      dirichlet_position[v] = static_cast<int>(interior_.size());
      interior_.push_back(node);
    }
    if (boundary_.inner_position[v] < 0) {
      neumann_position_[v] = static_cast<int>(neumann_unknowns_.size());
      neumann_unknowns_.push_back(node);
    }
  }
  if (!interior_.empty()) {
    dirichlet_factor_ = std::make_unique<Factor>(restrict_to(stiffness_, interior_, dirichlet_position));
    if (dirichlet_factor_->info() != Eigen::Success) throw NumericalError("Dirichlet system factorization failed");
  }
  if (boundary_.has_inner()) {
    neumann_factor_ = std::make_unique<Factor>(restrict_to(stiffness_, neumann_unknowns_, neumann_position_));
    if (neumann_factor_->info() != Eigen::Success) throw NumericalError("Neumann system factorization failed");
  }
}

FemSystem::~FemSystem() = default;

FluxField FemSystem::solve_dirichlet(std::span<const double> f_outer, std::span<const double> v_inner) const {
  check_length(f_outer.size(), outer_size(), "solve_dirichlet: f");
  check_length(v_inner.size(), inner_size(), "solve_dirichlet: v");
  std::vector<double> psi(mesh_->node_count(), 0.0);
  for (std::size_t i = 0; i < outer_size(); ++i) psi[boundary_.outer.nodes[i]] = f_outer[i];
  for (std::size_t i = 0; i < inner_size(); ++i) psi[boundary_.inner.nodes[i]] = v_inner[i];
  if (dirichlet_factor_) {
    const std::vector<double> lifted = matvec(stiffness_, psi);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior_.size()));
    for (std::size_t i = 0; i < interior_.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -lifted[interior_[i]];
    const Eigen::VectorXd x = dirichlet_factor_->solve(rhs);
    if (dirichlet_factor_->info() != Eigen::Success) throw NumericalError("Dirichlet solve failed");
    for (std::size_t i = 0; i < interior_.size(); ++i) psi[interior_[i]] = x[static_cast<Eigen::Index>(i)];
  }
  return {std::move(psi), mesh_->id()};
}

FluxField FemSystem::solve_neumann(std::span<const double> g_outer, std::span<const double> v_inner) const {
  if (!neumann_factor_) throw NumericalError("Neumann problem is singular without an inner Dirichlet boundary");
  check_length(g_outer.size(), outer_size(), "solve_neumann: g");
  check_length(v_inner.size(), inner_size(), "solve_neumann: v");
  std::vector<double> psi(mesh_->node_count(), 0.0);
  for (std::size_t i = 0; i < inner_size(); ++i) psi[boundary_.inner.nodes[i]] = v_inner[i];
  const std::vector<double> lifted = matvec(stiffness_, psi);
  const std::vector<double> load = neumann_load(g_outer);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(neumann_unknowns_.size()));
  for (std::size_t i = 0; i < neumann_unknowns_.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -lifted[neumann_unknowns_[i]];
  for (std::size_t i = 0; i < outer_size(); ++i)
    rhs[neumann_position_[boundary_.outer.nodes[i]]] += load[i];
  const Eigen::VectorXd x = neumann_factor_->solve(rhs);
  if (neumann_factor_->info() != Eigen::Success) throw NumericalError("Neumann solve failed");
  for (std::size_t i = 0; i < neumann_unknowns_.size(); ++i) psi[neumann_unknowns_[i]] = x[static_cast<Eigen::Index>(i)];
  return {std::move(psi), mesh_->id()};
}

std::vector<double> FemSystem::trace(const FluxField& field, BoundaryLabel where) const {
  check_field(field);
  const auto& loop = boundary_.loop(where);
  std::vector<double> out(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) out[i] = field.values[loop.nodes[i]];
  return out;
}

std::vector<double> FemSystem::weighted_normal_derivative(const FluxField& field, BoundaryLabel where) const {
  check_field(field);
  const std::vector<double> residual = matvec(stiffness_, field.values);
  const auto& loop = boundary_.loop(where);
  std::vector<double> out(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) out[i] = residual[loop.nodes[i]];
  return out;
}

double FemSystem::energy_norm_sq(const FluxField& a, const FluxField& b) const {
  check_field(a);
  check_field(b);
  std::vector<double> d(a.values);
  kernels::axpy(-1.0, b.values, d);
  const std::vector<double> ad = matvec(stiffness_, d);
  return kernels::dot(d, ad);
}

std::vector<double> FemSystem::neumann_load(std::span<const double> g_outer) const {
  check_length(g_outer.size(), outer_size(), "neumann_load");
  const auto& loop = boundary_.outer;
  const std::size_t m = loop.size();
  std::vector<double> load(m, 0.0);
  const double gauss[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    const double len = distance(mesh_->nodes()[loop.nodes[i]], mesh_->nodes()[loop.nodes[j]]);
    for (double s : gauss) {
      const double g = (1.0 - s) * g_outer[i] + s * g_outer[j];
      load[i] += 0.5 * len * g * (1.0 - s);
      load[j] += 0.5 * len * g * s;
    }
  }
  return load;
}

FluxField FemSystem::interpolate(const std::function<double(Point)>& fn) const {
  std::vector<double> values(mesh_->node_count());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(mesh_->nodes()[i]);
  return {std::move(values), mesh_->id()};
}

FluxField FemSystem::make_field(std::vector<double> values) const {
  check_length(values.size(), mesh_->node_count(), "make_field");
  return {std::move(values), mesh_->id()};
}

void FemSystem::check_field(const FluxField& field) const {
  if (field.mesh_id != mesh_->id()) throw DimensionError("field does not live on this mesh");
  check_length(field.values.size(), mesh_->node_count(), "field");
}

FluxField solve_dirichlet(const FemSystem& fem, const BoundaryCondition& f, const BoundaryCondition& v) {
  if (f.kind != BcKind::Dirichlet || f.location != BoundaryLabel::Outer)
    throw DimensionError("solve_dirichlet: f must be a Dirichlet condition on OUTER");
  if (v.kind != BcKind::Dirichlet || v.location != BoundaryLabel::Inner)
    throw DimensionError("solve_dirichlet: v must be a Dirichlet condition on INNER");
  return fem.solve_dirichlet(f.values, v.values);
}

FluxField solve_neumann(const FemSystem& fem, const BoundaryCondition& g, const BoundaryCondition& v) {
  if (g.kind != BcKind::WeightedNeumann || g.location != BoundaryLabel::Outer)
    throw DimensionError("solve_neumann: g must be a weighted Neumann condition on OUTER");
  if (v.kind != BcKind::Dirichlet || v.location != BoundaryLabel::Inner)
    throw DimensionError("solve_neumann: v must be a Dirichlet condition on INNER");
  return fem.solve_neumann(g.values, v.values);
}

}  // namespace kvflux
