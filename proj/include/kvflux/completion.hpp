#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "kvflux/fem.hpp"

namespace kvflux {

// Dirichlet (f) and weighted Neumann (g) values on the OUTER loop nodes.
struct CauchyData {
  std::vector<double> f;
  std::vector<double> g;
};

// Dirichlet control on the INNER loop nodes.
using Control = std::vector<double>;

// Data-independent part of the Kohn-Vogelius system: the two discrete
// Steklov-Poincare matrices on the INNER loop,
//   S_D[j][i] = (A psi_D(phi_i))_j,   S_N[j][i] = (A psi_N(phi_i))_j,
// the column fields they were built from, and a per-epsilon cache of dense
// LDL^T factorizations of S(eps) = (1 + eps) S_D - S_N. Built once per mesh.
class InterfaceOperators {
 public:
  explicit InterfaceOperators(std::shared_ptr<const FemSystem> fem);

  const FemSystem& fem() const { return *fem_; }
  std::shared_ptr<const FemSystem> fem_ptr() const { return fem_; }
  std::size_t size() const { return static_cast<std::size_t>(s_d_.rows()); }
  const Eigen::MatrixXd& s_d() const { return s_d_; }
  const Eigen::MatrixXd& s_n() const { return s_n_; }
  // Nodal fields psi_D(phi_i) / psi_N(phi_i), one column per INNER node.
  const Eigen::MatrixXd& dirichlet_columns() const { return psi_d_; }
  const Eigen::MatrixXd& neumann_columns() const { return psi_n_; }
  Eigen::MatrixXd system_matrix(double epsilon) const;

  struct Factor {
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    double rcond = 0.0;
  };
  // Cached; thread-safe.
  std::shared_ptr<const Factor> factor(double epsilon) const;
  std::size_t cached_factors() const;

 private:
  std::shared_ptr<const FemSystem> fem_;
  Eigen::MatrixXd s_d_, s_n_, psi_d_, psi_n_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const Factor>> factors_;
};

// Operators bound to one Cauchy data set: l, the lifted fields psi~_D(f) and
// psi~_N(g), and the constant c of the quadratic form
//   J(v) = 1/2 v^T (S_D - S_N) v - l^T v + c.
struct KVSystem {
  std::shared_ptr<const InterfaceOperators> ops;
  CauchyData data;
  Eigen::VectorXd l;
  FluxField lift_d;  // psi~_D(f): f on OUTER, 0 on INNER
  FluxField lift_n;  // psi~_N(g): g on OUTER, 0 on INNER
  double c = 0.0;

  const FemSystem& fem() const { return ops->fem(); }
};

std::shared_ptr<const InterfaceOperators> build_interface_operators(std::shared_ptr<const FemSystem> fem);
KVSystem bind_data(std::shared_ptr<const InterfaceOperators> ops, CauchyData data);
// Operators plus data in one call.
KVSystem assemble_kv(std::shared_ptr<const FemSystem> fem, CauchyData data);

struct Evaluation {
  double J = 0.0;
  double R_D = 0.0;
  double J_eps = 0.0;
};

// J and R_D from actual solves and volume energies, independent of S_D/S_N.
Evaluation evaluate(const KVSystem& system, const Control& u, double epsilon = 0.0);
// 1/2 v^T (S_D - S_N) v - l^T v + c.
double quadratic_form(const KVSystem& system, const Control& v);

struct CompletionResult {
  Control u_opt;
  FluxField psi_opt;  // psi_N(u_opt, g)
  double J = 0.0;
  double R_D = 0.0;
  double J_eps = 0.0;
  double epsilon = 0.0;
  double residual_norm = 0.0;       // ||S(eps) u - l|| / ||l|| (absolute when l = 0)
  double condition_estimate = 0.0;  // reciprocal condition number of S(eps)
  bool near_singular = false;
};

// Solves S(eps) u = l. eps = 0 is attempted and flagged through
// near_singular / condition_estimate; a non-finite solution throws
// NumericalError.
CompletionResult solve_completion(const KVSystem& system, double epsilon);

// Gamma_I vector (A psi_D(u,f) - A psi_N(u,g) + eps A psi_D(u,0)) restricted to
// INNER, which equals S(eps) u - l.
Eigen::VectorXd optimality_residual(const KVSystem& system, const Control& u, double epsilon);

}  // namespace kvflux
