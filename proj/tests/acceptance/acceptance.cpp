// Runs the ten acceptance checks and prints one PASS/FAIL line for each.
// Exit status is nonzero when any check fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "kvflux/completion.hpp"
#include "kvflux/equilibria.hpp"
#include "kvflux/experiments.hpp"
#include "kvflux/io.hpp"
#include "kvflux/mesh_generation.hpp"
#include "kvflux/postprocess.hpp"
#include "kvflux/regularization.hpp"
#include "oracles.hpp"

using namespace kvflux;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::shared_ptr<const FemSystem> desk() {
  static auto fem = std::make_shared<const FemSystem>(desk_annulus_mesh());
  return fem;
}

std::shared_ptr<const InterfaceOperators> iter_ops() {
  static auto ops = build_interface_operators(std::make_shared<const FemSystem>(iter_like_mesh()));
  return ops;
}

Mesh d_shaped_mesh() {
  Polyline outer;
  for (int i = 0; i < 90; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 90;
    outer.push_back({6.2 + 2.3 * std::cos(th + 0.35 * std::sin(th)), 4.14 * std::sin(th)});
  }
  return generate_annulus_mesh(outer, scale_toward_centroid(outer, 0.5), 0.45);
}

std::vector<double> dense(const Eigen::MatrixXd& m) {
  std::vector<double> v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  return v;
}

// 1. Manufactured-solution recovery.
Outcome manufactured_recovery() {
  Outcome o;
  for (const char* name : {"one", "z", "r2", "r2z", "solovev"}) {
    const AnalyticFlux psi = manufactured_flux(name);
    // L psi* = 0, checked by finite differences at scattered points.
    double worst_gs = 0.0;
    for (Point p : {Point{4.0, -2.0}, Point{6.5, 0.7}, Point{8.2, 1.9}, Point{5.1, 2.4}}) {
      const double scale = std::max(1.0, std::fabs(psi.psi(p))) / (p.r * p.r);
      worst_gs = std::max(worst_gs, std::fabs(kvtest::gs_operator_fd(psi.psi, p)) / scale);
    }
    o.require(worst_gs < 1e-6, std::string(name) + " is not L-harmonic");

    const auto t0 = std::chrono::steady_clock::now();
    auto fem = std::make_shared<const FemSystem>(desk_annulus_mesh());
    const auto ops = build_interface_operators(fem);
    const TwinReport rep = run_twin(ops, parse_test_case(name), 1e-8);
    const double elapsed = seconds_since(t0);
    const bool ok = rep.scaled_err_u < 1e-2 && rep.at_opt.J < 1e-3 * rep.at_zero.J && elapsed < 5.0;
    o.require(ok, name);
    o.detail << ' ' << name << ": err " << fmt(rep.scaled_err_u) << ", J/J0 " << fmt(rep.at_opt.J / rep.at_zero.J) << ", "
             << fmt(elapsed) << " s;";
  }
  return o;
}

// 2. Noise error table trend.
Outcome table1_trend() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_table1(iter_ops(), 10, 1);
  const double elapsed = seconds_since(t0);
  const double published[3][2] = {{0.0131, 0.0055}, {0.0659, 0.0170}, {0.1526, 0.0405}};
  const char* label[3] = {"0%", "1%", "5%"};
  for (int i = 0; i < 3; ++i) {
    const double got[2] = {rows[i].error_tc1, rows[i].error_tc2};
    for (int c = 0; c < 2; ++c) {
      const double ratio = got[c] / published[i][c];
      const std::string what = std::string("TC") + char('1' + c) + " " + label[i];
      o.require(ratio >= 0.2 && ratio <= 5.0, what + " outside factor 5");
      o.detail << ' ' << what << ' ' << fmt(got[c]) << " (" << fmt(published[i][c]) << ");";
    }
  }
  for (int i = 1; i < 3; ++i) {
    o.require(rows[i].error_tc1 > rows[i - 1].error_tc1, "TC1 not increasing in noise");
    o.require(rows[i].error_tc2 > rows[i - 1].error_tc2, "TC2 not increasing in noise");
  }
  o.require(elapsed < 120.0, "runtime");
  o.detail << ' ' << fmt(elapsed) << " s";
  return o;
}

std::vector<std::shared_ptr<const FemSystem>> three_meshes() {
  static const std::vector<std::shared_ptr<const FemSystem>> v = {
      desk(), iter_ops()->fem_ptr(), std::make_shared<const FemSystem>(d_shaped_mesh())};
  return v;
}

// 3. Quadratic identity.
Outcome quadratic_identity() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 30.0);
  double worst = 0.0;
  for (const auto& fem : three_meshes()) {
    const auto ops = fem == iter_ops()->fem_ptr() ? iter_ops() : build_interface_operators(fem);
    const KVSystem sys = bind_data(ops, add_noise(generate_reference(*fem, parse_test_case("TC1")).data, 0.05, 5));
    for (int k = 0; k < 20; ++k) {
      Control v(ops->size());
      for (auto& x : v) x = 50.0 + nd(rng);
      const double j = evaluate(sys, v).J;
      worst = std::max(worst, std::fabs(j - quadratic_form(sys, v)) / (1.0 + std::fabs(j)));
    }
  }
  o.require(worst < 1e-9, "identity gap");
  o.detail << " max relative gap " << fmt(worst) << " over 60 controls";
  return o;
}

// 4. Operator ordering.
Outcome operator_ordering() {
  Outcome o;
  for (const auto& fem : three_meshes()) {
    const auto ops = fem == iter_ops()->fem_ptr() ? iter_ops() : build_interface_operators(fem);
    const std::size_t n = ops->size();
    const auto ev_d = kvtest::jacobi_eigenvalues(dense(ops->s_d()), n);
    const auto ev_gap = kvtest::jacobi_eigenvalues(dense(ops->s_d() - ops->s_n()), n);
    o.require(ev_d.front() > 0.0, "S_D not positive definite");
    o.require(ev_gap.front() >= -1e-10 * ev_d.back(), "S_D - S_N indefinite");
    o.detail << " N=" << n << ": min eig(S_D) " << fmt(ev_d.front()) << ", min eig(S_D-S_N)/||S_D|| "
             << fmt(ev_gap.front() / ev_d.back()) << ';';
  }
  return o;
}

// 5. Discrete optimality on every twin run.
Outcome discrete_optimality() {
  Outcome o;
  double worst_res = 0.0, worst_opt = 0.0;
  int runs = 0;
  for (const char* tc : {"TC1", "TC2", "xpoint", "solovev"}) {
    for (double p : {0.0, 0.01, 0.05}) {
      for (std::uint64_t seed = 1; seed <= (p == 0.0 ? 1u : 10u); ++seed) {
        TwinSpec spec = parse_test_case(tc);
        spec.noise_level = p;
        spec.seed = seed;
        const double eps = spec.test_case == TestCase::Manufactured ? 5e-4 : reference_epsilon(spec.test_case, p);
        const TwinReport rep = run_twin(iter_ops(), spec, eps);
        worst_res = std::max(worst_res, rep.residual_norm);
        worst_opt = std::max(worst_opt, rep.optimality_norm);
        ++runs;
      }
    }
  }
  o.require(worst_res < 1e-10, "relative residual");
  o.require(worst_opt < 1e-8, "optimality residual");
  o.detail << ' ' << runs << " runs: max ||Su-l||/||l|| " << fmt(worst_res) << ", max optimality " << fmt(worst_opt);
  return o;
}

// 6. Stiffness kernel.
Outcome stiffness_kernel() {
  Outcome o;
  std::vector<Mesh> suite;
  suite.push_back(desk_annulus_mesh());
  suite.push_back(iter_like_mesh());
  suite.push_back(refine_uniform(desk_annulus_mesh()));
  suite.push_back(refine_uniform(refine_uniform(iter_like_mesh())));
  suite.push_back(d_shaped_mesh());
  suite.push_back(generate_annulus_mesh(circle_polyline({6, 0}, 3, 48), circle_polyline({6, 0}, 1.5, 24), 0.5));
  suite.push_back(kvtest::grid_mesh({}));
  suite.push_back(kvtest::grid_mesh(kvtest::saddle_grid()));
  double worst = 0.0;
  for (const Mesh& m : suite) {
    for (int order : {1, 2, 5}) {
      const StiffnessMatrix a = assemble_stiffness(m, order);
      const auto y = matvec(a, std::vector<double>(m.node_count(), 1.0));
      for (int i = 0; i < a.matrix.rows(); ++i) {
        double row_max = 0.0;
        for (StiffnessMatrix::Sparse::InnerIterator it(a.matrix, i); it; ++it) row_max = std::max(row_max, std::fabs(it.value()));
        worst = std::max(worst, std::fabs(y[i]) / row_max);
      }
    }
  }
  o.require(worst < 1e-12, "row sums");
  o.detail << ' ' << suite.size() << " meshes x 3 rules: max |A 1|_i / max_j |A_ij| " << fmt(worst);
  return o;
}

// 7. L-curve corner.
Outcome lcurve_corner() {
  Outcome o;
  const auto grid = log_grid(1e-7, 1e-1, 25);
  for (std::size_t k : {4u, 11u, 19u}) {
    std::vector<LCurvePoint> pts;
    const double tc = std::log(grid[k]);
    for (double eps : grid) {
      const double t = std::log(eps);
      pts.push_back({eps, std::exp(std::log1p(std::exp(2.0 * (t - tc))) / 2.0), std::exp(std::log1p(std::exp(2.0 * (tc - t))) / 2.0)});
    }
    o.require(find_corner_index(pts) == k, "synthetic corner index");
  }
  const auto ops = iter_ops();
  TwinSpec spec = parse_test_case("xpoint");
  const KVSystem sys = bind_data(ops, add_noise(generate_reference(ops->fem(), spec).data, 0.01, 1));
  const double corner = sweep(sys, default_epsilon_grid()).corner_epsilon();
  o.require(corner >= 5e-5 && corner <= 5e-3, "twin corner outside [5e-5, 5e-3]");
  o.detail << " synthetic corners exact; 1% noise twin corner at eps = " << fmt(corner);
  return o;
}

// 8. Convergence order.
Outcome convergence_order() {
  Outcome o;
  // Structured polar family: on the unstructured layered mesh the nodal error
  // is still pre-asymptotic (orders near 1.6) at these sizes.
  std::vector<Mesh> levels = {polar_annulus_mesh(64, 8)};
  for (int i = 0; i < 3; ++i) levels.push_back(refine_uniform(levels.back(), desk_annulus_snap()));
  std::vector<std::unique_ptr<FemSystem>> fems;
  for (const Mesh& m : levels) fems.push_back(std::make_unique<FemSystem>(m));
  for (const char* name : {"r2", "r2z", "solovev"}) {
    const AnalyticFlux psi = manufactured_flux(name);
    for (const bool neumann : {false, true}) {
      std::vector<double> err;
      for (const auto& fem : fems) {
        const Mesh& m = fem->mesh();
        const auto& bi = fem->boundary();
        const std::vector<double> v = boundary_values(psi, m, bi.inner);
        const FluxField sol = neumann ? fem->solve_neumann(weighted_normal_values(psi, m, bi.outer), v)
                                      : fem->solve_dirichlet(boundary_values(psi, m, bi.outer), v);
        double e = 0.0;
        for (std::size_t n = 0; n < m.node_count(); ++n) e = std::max(e, std::fabs(sol.values[n] - psi.psi(m.nodes()[n])));
        err.push_back(e);
      }
      o.detail << ' ' << name << (neumann ? " N:" : " D:");
      for (std::size_t i = 1; i < err.size(); ++i) {
        const double order = std::log2(err[i - 1] / err[i]);
        o.require(order >= 1.7 && order <= 2.3, std::string(name) + (neumann ? " Neumann" : " Dirichlet") + " order");
        o.detail << ' ' << fmt(order);
      }
      o.detail << ';';
    }
  }
  return o;
}

// 9. Plasma boundary.
Outcome plasma_boundary() {
  Outcome o;
  const FemSystem grid(kvtest::grid_mesh(kvtest::saddle_grid()));
  const double c = 3.25;
  const FluxField saddle = grid.interpolate([&](Point p) { return (p.r - 6.0) * (p.r - 6.0) - p.z * p.z + c; });
  const auto [lo, hi] = std::minmax_element(saddle.values.begin(), saddle.values.end());
  const PlasmaBoundary b = find_plasma_boundary(grid, saddle);
  const double gap = std::fabs(b.psi_P - c) / (*hi - *lo);
  o.require(gap <= 1e-6, "saddle level");

  const auto ops = iter_ops();
  TwinSpec spec = parse_test_case("xpoint");
  spec.noise_level = 0.01;
  spec.seed = 1;
  const TwinReport rep = run_twin(ops, spec, 5e-4);
  const PlasmaBoundary twin = find_plasma_boundary(ops->fem(), rep.psi_opt);
  o.require(twin.closed(), "twin boundary not closed");
  o.detail << " saddle |psi_P - c|/range " << fmt(gap) << "; twin psi_P " << fmt(twin.psi_P) << ", closed "
           << (twin.closed() ? "yes" : "no");
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KVFLUX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Determinism.
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "kvflux_acceptance_determinism";
  fs::remove_all(root);
  for (const char* sub : {"a", "b"}) {
    const std::string out = (root / sub).string();
    o.require(run_cli("mesh --mesh builtin:desk -o " + out + "/mesh") == 0, "mesh run");
    o.require(run_cli("twin --case TC1 --noise 0.05 --seed 17 -o " + out + "/twin") == 0, "twin run");
    o.require(run_cli("twin --batch table1 --seeds 3 -o " + out + "/table1") == 0, "table1 run");
    o.require(run_cli("lcurve --case xpoint --noise 0.01 --seed 17 -o " + out + "/lcurve") == 0, "lcurve run");
    o.require(run_cli("complete --data " + out + "/twin/data.csv --epsilon 1e-3 -o " + out + "/complete") == 0, "complete run");
    o.require(run_cli("contour --field " + out + "/twin/psi_opt.csv --level 60 -o " + out + "/contour") == 0, "contour run");
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
    o.require(fs::exists(other) && io::read_text_file(entry.path()) == io::read_text_file(other),
              fs::relative(entry.path(), root / "a").string());
    ++files;
  }
  o.require(files >= 15, "too few artifacts");
  o.detail << ' ' << files << " artifacts compared byte for byte";
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"manufactured-solution recovery", manufactured_recovery},
      {"noise error table trend", table1_trend},
      {"quadratic identity", quadratic_identity},
      {"operator ordering", operator_ordering},
      {"discrete optimality", discrete_optimality},
      {"stiffness kernel", stiffness_kernel},
      {"L-curve corner", lcurve_corner},
      {"convergence order", convergence_order},
      {"plasma boundary", plasma_boundary},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d %s: %s;%s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
