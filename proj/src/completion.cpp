#include "kvflux/completion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kvflux/errors.hpp"

namespace kvflux {

namespace {

Eigen::VectorXd inner_rows(const FemSystem& fem, const std::vector<double>& nodal) {
  const auto& inner = fem.boundary().inner;
  Eigen::VectorXd out(static_cast<Eigen::Index>(inner.size()));
  for (std::size_t i = 0; i < inner.size(); ++i) out[static_cast<Eigen::Index>(i)] = nodal[inner.nodes[i]];
  return out;
}

void check_control(const FemSystem& fem, const Control& u) {
  if (u.size() != fem.inner_size())
    throw DimensionError("control has " + std::to_string(u.size()) + " values, INNER has " +
                         std::to_string(fem.inner_size()) + " nodes");
}

double symmetry_defect(const Eigen::MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace

InterfaceOperators::InterfaceOperators(std::shared_ptr<const FemSystem> fem) : fem_(std::move(fem)) {
  const FemSystem& sys = *fem_;
  if (!sys.boundary().has_inner()) throw ValidationError("data completion needs a mesh with an INNER loop");
  const std::size_t m = sys.inner_size();
  const std::size_t n = sys.mesh().node_count();
  const auto ni = static_cast<Eigen::Index>(m);
  s_d_.resize(ni, ni);
  s_n_.resize(ni, ni);
  psi_d_.resize(static_cast<Eigen::Index>(n), ni);
  psi_n_.resize(static_cast<Eigen::Index>(n), ni);
  const std::vector<double> zero_outer(sys.outer_size(), 0.0);
  std::vector<double> basis(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    basis[i] = 1.0;
    const FluxField d = sys.solve_dirichlet(zero_outer, basis);
    const FluxField nm = sys.solve_neumann(zero_outer, basis);
    basis[i] = 0.0;
    const auto col = static_cast<Eigen::Index>(i);
    s_d_.col(col) = inner_rows(sys, matvec(sys.stiffness(), d.values));
    s_n_.col(col) = inner_rows(sys, matvec(sys.stiffness(), nm.values));
    psi_d_.col(col) = Eigen::Map<const Eigen::VectorXd>(d.values.data(), static_cast<Eigen::Index>(n));
    psi_n_.col(col) = Eigen::Map<const Eigen::VectorXd>(nm.values.data(), static_cast<Eigen::Index>(n));
  }

  const double scale = s_d_.cwiseAbs().maxCoeff();
  if (symmetry_defect(s_d_) > 1e-9 * scale || symmetry_defect(s_n_) > 1e-9 * scale)
    throw NumericalError("interface matrices are not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_d(0.5 * (s_d_ + s_d_.transpose()), Eigen::EigenvaluesOnly);
  if (!(eig_d.eigenvalues().minCoeff() > 0.0)) throw NumericalError("S_D is not positive definite");
  const Eigen::MatrixXd gap = s_d_ - s_n_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_gap(0.5 * (gap + gap.transpose()), Eigen::EigenvaluesOnly);
  if (eig_gap.eigenvalues().minCoeff() < -1e-8 * eig_d.eigenvalues().maxCoeff())
    throw NumericalError("S_D - S_N is not positive semidefinite");
}

Eigen::MatrixXd InterfaceOperators::system_matrix(double epsilon) const {
  const Eigen::MatrixXd s = (1.0 + epsilon) * s_d_ - s_n_;
  return 0.5 * (s + s.transpose());
}

std::shared_ptr<const InterfaceOperators::Factor> InterfaceOperators::factor(double epsilon) const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
  std::lock_guard lock(mutex_);
  auto it = factors_.find(epsilon);
  if (it != factors_.end()) return it->second;
  auto f = std::make_shared<Factor>();
  f->ldlt.compute(system_matrix(epsilon));
  f->rcond = f->ldlt.info() == Eigen::Success ? f->ldlt.rcond() : 0.0;
  return factors_.emplace(epsilon, std::move(f)).first->second;
}

std::size_t InterfaceOperators::cached_factors() const {
  std::lock_guard lock(mutex_);
  return factors_.size();
}

std::shared_ptr<const InterfaceOperators> build_interface_operators(std::shared_ptr<const FemSystem> fem) {
  return std::make_shared<const InterfaceOperators>(std::move(fem));
}

KVSystem bind_data(std::shared_ptr<const InterfaceOperators> ops, CauchyData data) {
  const FemSystem& fem = ops->fem();
  if (data.f.size() != fem.outer_size() || data.g.size() != fem.outer_size())
    throw DimensionError("Cauchy data length does not match the OUTER loop (" + std::to_string(fem.outer_size()) +
                         " nodes)");
  for (std::size_t i = 0; i < data.f.size(); ++i)
    if (!std::isfinite(data.f[i]) || !std::isfinite(data.g[i])) throw ValidationError("Cauchy data is not finite");
  KVSystem sys;
  const std::vector<double> zero_inner(fem.inner_size(), 0.0);
  sys.lift_d = fem.solve_dirichlet(data.f, zero_inner);
  sys.lift_n = fem.solve_neumann(data.g, zero_inner);
  std::vector<double> w = sys.lift_d.values;
  kernels::axpy(-1.0, sys.lift_n.values, w);
  const std::vector<double> aw = matvec(fem.stiffness(), w);
  sys.l = -inner_rows(fem, aw);
  sys.c = 0.5 * kernels::dot(w, aw);
  sys.ops = std::move(ops);
  sys.data = std::move(data);
  return sys;
}

KVSystem assemble_kv(std::shared_ptr<const FemSystem> fem, CauchyData data) {
  return bind_data(build_interface_operators(std::move(fem)), std::move(data));
}

Evaluation evaluate(const KVSystem& system, const Control& u, double epsilon) {
  const FemSystem& fem = system.fem();
  check_control(fem, u);
  const FluxField d = fem.solve_dirichlet(system.data.f, u);
  const FluxField nm = fem.solve_neumann(system.data.g, u);
  const FluxField d0 = fem.solve_dirichlet(std::vector<double>(fem.outer_size(), 0.0), u);
  Evaluation e;
  e.J = 0.5 * fem.energy_norm_sq(d, nm);
  e.R_D = 0.5 * fem.energy_norm_sq(d0, fem.make_field(std::vector<double>(fem.mesh().node_count(), 0.0)));
  e.J_eps = e.J + epsilon * e.R_D;
  return e;
}

double quadratic_form(const KVSystem& system, const Control& v) {
  check_control(system.fem(), v);
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::MatrixXd gap = system.ops->s_d() - system.ops->s_n();
  return 0.5 * x.dot(gap * x) - system.l.dot(x) + system.c;
}

CompletionResult solve_completion(const KVSystem& system, double epsilon) {
  const auto factor = system.ops->factor(epsilon);
  CompletionResult res;
  res.epsilon = epsilon;
  res.condition_estimate = factor->rcond;
  res.near_singular = factor->ldlt.info() != Eigen::Success || !(factor->rcond > 1e-13);
  if (factor->ldlt.info() != Eigen::Success) throw NumericalError("S(eps) factorization failed (near-singular)");

  const Eigen::MatrixXd s = system.ops->system_matrix(epsilon);
  Eigen::VectorXd u = factor->ldlt.solve(system.l);
  // One step of iterative refinement keeps the residual at roundoff level
  // even when S(eps) is poorly conditioned.
  u += factor->ldlt.solve(system.l - s * u);
  if (!u.allFinite()) throw NumericalError("S(eps) is numerically singular (condition estimate " +
                                           std::to_string(factor->rcond) + ")");
  const double lnorm = system.l.norm();
  const double rnorm = (s * u - system.l).norm();
  res.residual_norm = lnorm > 0.0 ? rnorm / lnorm : rnorm;

  res.u_opt.assign(u.data(), u.data() + u.size());
  res.psi_opt = system.fem().solve_neumann(system.data.g, res.u_opt);
  const Evaluation e = evaluate(system, res.u_opt, epsilon);
  res.J = e.J;
  res.R_D = e.R_D;
  res.J_eps = e.J_eps;
  return res;
}

Eigen::VectorXd optimality_residual(const KVSystem& system, const Control& u, double epsilon) {
  const FemSystem& fem = system.fem();
  check_control(fem, u);
  const std::vector<double> zero_outer(fem.outer_size(), 0.0);
  const FluxField d = fem.solve_dirichlet(system.data.f, u);
  const FluxField nm = fem.solve_neumann(system.data.g, u);
  const FluxField d0 = fem.solve_dirichlet(zero_outer, u);
  const auto wd = fem.weighted_normal_derivative(d, BoundaryLabel::Inner);
  const auto wn = fem.weighted_normal_derivative(nm, BoundaryLabel::Inner);
  const auto w0 = fem.weighted_normal_derivative(d0, BoundaryLabel::Inner);
  Eigen::VectorXd r(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) r[static_cast<Eigen::Index>(i)] = wd[i] - wn[i] + epsilon * w0[i];
  return r;
}

}  // namespace kvflux
