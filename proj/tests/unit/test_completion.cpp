#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "kvflux/completion.hpp"
#include "kvflux/equilibria.hpp"
#include "kvflux/errors.hpp"
#include "kvflux/experiments.hpp"
#include "kvflux/mesh_generation.hpp"
#include "oracles.hpp"

using namespace kvflux;

namespace {

std::shared_ptr<const FemSystem> desk() {
  static auto fem = std::make_shared<const FemSystem>(desk_annulus_mesh());
  return fem;
}

std::shared_ptr<const InterfaceOperators> desk_ops() {
  static auto ops = build_interface_operators(desk());
  return ops;
}

std::vector<double> dense(const Eigen::MatrixXd& m) {
  std::vector<double> v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  return v;
}

Control random_control(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Control u(n);
  for (auto& x : u) x = nd(rng);
  return u;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

CauchyData zero_data(const FemSystem& fem) {
  return {std::vector<double>(fem.outer_size(), 0.0), std::vector<double>(fem.outer_size(), 0.0)};
}

}  // namespace

TEST_CASE("homogeneous data") {
  const KVSystem sys = bind_data(desk_ops(), zero_data(*desk()));
  CHECK(sys.l.norm() == 0.0);
  CHECK(sys.c == 0.0);
  const CompletionResult res = solve_completion(sys, 1e-3);
  CHECK(kvtest::max_abs(res.u_opt) == 0.0);
  CHECK(res.J == 0.0);

  std::mt19937_64 rng(11);
  const Control u = random_control(sys.ops->size(), rng);
  const Evaluation e = evaluate(sys, u);
  CHECK(e.J >= 0.0);
  CHECK(e.J == doctest::Approx(quadratic_form(sys, u)).epsilon(1e-9));
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
  CHECK(e.R_D == doctest::Approx(0.5 * uv.dot(sys.ops->s_d() * uv)).epsilon(1e-9));
  CHECK(e.R_D > 0.0);
}

TEST_CASE("operator symmetry, ordering and near-singularity") {
  const auto ops = desk_ops();
  const Eigen::MatrixXd& sd = ops->s_d();
  const Eigen::MatrixXd& sn = ops->s_n();
  const double scale = sd.cwiseAbs().maxCoeff();
  CHECK((sd - sd.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK((sn - sn.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);

  const std::size_t n = ops->size();
  const auto ev_d = kvtest::jacobi_eigenvalues(dense(sd), n);
  const auto ev_gap = kvtest::jacobi_eigenvalues(dense(sd - sn), n);
  CHECK(ev_d.front() > 0.0);
  CHECK(ev_gap.front() >= -1e-10 * ev_d.back());
  // The smallest eigenvalues of S_D - S_N sit orders of magnitude below S_D's.
  CHECK(ev_gap[0] < 1e-4 * ev_d.back());
  CHECK(ev_gap[1] < 1e-3 * ev_d.back());

  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const Control v = random_control(n, rng);
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(n));
    CHECK(x.dot(sn * x) <= x.dot(sd * x));
  }
}

TEST_CASE("quadratic form identity with noisy incompatible data") {
  const auto fem = desk();
  const Reference ref = generate_reference(*fem, parse_test_case("TC1"));
  const KVSystem sys = bind_data(desk_ops(), add_noise(ref.data, 0.05, 2));
  CHECK(sys.c > 0.0);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const Control v = random_control(sys.ops->size(), rng, 50.0);
    const double j = evaluate(sys, v).J;
    CHECK(std::fabs(j - quadratic_form(sys, v)) < 1e-9 * (1.0 + std::fabs(j)));
  }
}

TEST_CASE("compatible r^2 data: the exact trace reaches the discretization floor") {
  const auto fem = desk();
  const AnalyticFlux psi = manufactured_flux("r2");
  const KVSystem sys = bind_data(desk_ops(), analytic_cauchy_data(*fem, psi));
  const Control u = boundary_values(psi, fem->mesh(), fem->boundary().inner);
  const Control zero(u.size(), 0.0);
  CHECK(evaluate(sys, u).J < 1e-3 * evaluate(sys, zero).J);
}

TEST_CASE("manufactured Solov'ev recovery at eps = 1e-8") {
  const auto ops = desk_ops();
  const TwinReport rep = run_twin(ops, parse_test_case("MANUFACTURED(solovev)"), 1e-8);
  CHECK(rep.max_rel_err_u < 1e-2);
  CHECK(rep.residual_norm < 1e-10);
}

TEST_CASE("solve_completion postconditions") {
  const auto fem = desk();
  const Reference ref = generate_reference(*fem, parse_test_case("TC1"));
  const KVSystem sys = bind_data(desk_ops(), add_noise(ref.data, 0.01, 4));
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const CompletionResult res = solve_completion(sys, eps);
    CHECK(res.residual_norm < 1e-10);
    CHECK(res.J >= 0.0);
    CHECK(res.R_D >= 0.0);
    CHECK(res.J_eps == doctest::Approx(res.J + eps * res.R_D).epsilon(1e-12));
    CHECK_FALSE(res.near_singular);
    // psi_opt is the Neumann field, never the Dirichlet one.
    CHECK(res.psi_opt.values == fem->solve_neumann(sys.data.g, res.u_opt).values);
    CHECK(res.psi_opt.values != fem->solve_dirichlet(sys.data.f, res.u_opt).values);
    const Eigen::VectorXd r = optimality_residual(sys, res.u_opt, eps);
    CHECK(r.norm() < 1e-8 * sys.l.norm());
  }
}

TEST_CASE("optimality residual is linear in the perturbation") {
  const auto fem = desk();
  const KVSystem sys = bind_data(desk_ops(), generate_reference(*fem, parse_test_case("TC2")).data);
  const double eps = 1e-3;
  const CompletionResult res = solve_completion(sys, eps);
  std::mt19937_64 rng(9);
  const Control delta = random_control(res.u_opt.size(), rng);
  Control moved = res.u_opt;
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += delta[i];
  const Eigen::Map<const Eigen::VectorXd> d(delta.data(), static_cast<Eigen::Index>(delta.size()));
  const Eigen::VectorXd expected = sys.ops->system_matrix(eps) * d;
  const Eigen::VectorXd got = optimality_residual(sys, moved, eps);
  CHECK((got - expected).norm() < 1e-8 * std::max(1.0, expected.norm()));
}

TEST_CASE("eps = 0 is attempted and reports conditioning") {
  const auto fem = desk();
  const KVSystem sys = bind_data(desk_ops(), generate_reference(*fem, parse_test_case("r2z")).data);
  const CompletionResult res = solve_completion(sys, 0.0);
  CHECK(res.condition_estimate < 1e-5);
  CHECK(res.condition_estimate < solve_completion(sys, 1e-3).condition_estimate);
  // Dirichlet and Neumann fluxes agree on INNER at the unregularized optimum.
  CHECK(optimality_residual(sys, res.u_opt, 0.0).norm() < 1e-6 * sys.l.norm());
}

TEST_CASE("data stability constant grows as eps shrinks") {
  const auto fem = desk();
  const auto ops = desk_ops();
  const CauchyData base = generate_reference(*fem, parse_test_case("TC1")).data;
  const CauchyData moved = add_noise(base, 0.01, 21);
  std::vector<double> delta;
  for (std::size_t i = 0; i < base.f.size(); ++i) {
    delta.push_back(moved.f[i] - base.f[i]);
    delta.push_back(moved.g[i] - base.g[i]);
  }
  const KVSystem s1 = bind_data(ops, base), s2 = bind_data(ops, moved);
  std::vector<double> k;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Control u1 = solve_completion(s1, eps).u_opt, u2 = solve_completion(s2, eps).u_opt;
    std::vector<double> du(u1.size());
    for (std::size_t i = 0; i < du.size(); ++i) du[i] = u1[i] - u2[i];
    k.push_back(norm2(du) / norm2(delta));
  }
  CHECK(k[0] <= k[1]);
  CHECK(k[1] <= k[2]);
}

TEST_CASE("precomputation: deterministic operators and one factorization per eps") {
  const auto t0 = std::chrono::steady_clock::now();
  auto fem = std::make_shared<const FemSystem>(iter_like_mesh());
  const auto ops = build_interface_operators(fem);
  const double assembly = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto again = build_interface_operators(std::make_shared<const FemSystem>(iter_like_mesh()));
  CHECK(ops->s_d() == again->s_d());
  CHECK(ops->s_n() == again->s_n());

  const CauchyData clean = generate_reference(*fem, parse_test_case("TC1")).data;
  CHECK(bind_data(ops, clean).l == bind_data(again, clean).l);
  const auto t1 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const KVSystem sys = bind_data(ops, add_noise(clean, 0.01, seed));
    const Eigen::VectorXd u = ops->factor(5e-4)->ldlt.solve(sys.l);
    CHECK(u.allFinite());
  }
  const double per_solve = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count() / 100;
  CHECK(ops->cached_factors() == 1);
  CHECK(per_solve < 0.1 * assembly);
}

TEST_CASE("input validation") {
  const auto fem = desk();
  CauchyData bad = zero_data(*fem);
  bad.g.pop_back();
  CHECK_THROWS_AS(bind_data(desk_ops(), bad), DimensionError);
  CauchyData nan = zero_data(*fem);
  nan.f[3] = std::nan("");
  CHECK_THROWS_AS(bind_data(desk_ops(), nan), ValidationError);
  const KVSystem sys = bind_data(desk_ops(), zero_data(*fem));
  CHECK_THROWS_AS(evaluate(sys, Control(3, 0.0)), DimensionError);
  CHECK_THROWS_AS(build_interface_operators(std::make_shared<const FemSystem>(kvtest::grid_mesh({}))), ValidationError);
}
