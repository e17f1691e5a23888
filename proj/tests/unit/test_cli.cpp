#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "kvflux/cli.hpp"
#include "kvflux/errors.hpp"
#include "kvflux/experiments.hpp"
#include "kvflux/io.hpp"
#include "kvflux/mesh_generation.hpp"

using namespace kvflux;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "kvflux_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KVFLUX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config text") {
  const cli::ConfigMap m = cli::parse_config_text("# run\nmesh = builtin:desk\n\nepsilon=1e-3 # inline\n", "run.cfg");
  CHECK(m.at("mesh").value == "builtin:desk");
  CHECK(m.at("epsilon").value == "1e-3");
  CHECK(m.at("epsilon").origin == "run.cfg:4");
  CHECK_THROWS_AS(cli::parse_config_text("mesh builtin:desk\n", "x"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config_text("a = 1\na = 2\n", "x"), ConfigError);
  try {
    cli::parse_config_text("a = 1\n = 2\n", "bad.cfg");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }
}

TEST_CASE("config validation names the offending field") {
  const auto cfg = cli::parse_config_text("data = d.csv\nepsilon = -1\n", "c.cfg");
  try {
    cli::make_config("complete", cfg);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("c.cfg:2") != std::string::npos);
    CHECK(what.find("epsilon") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::make_config("complete", cli::parse_config_text("data = d.csv\n", "c")), ConfigError);
  CHECK_THROWS_AS(cli::make_config("contour", {}), ConfigError);
  CHECK_THROWS_AS(cli::make_config("twin", cli::parse_config_text("field = x\n", "c")), ConfigError);
  CHECK_THROWS_AS(cli::make_config("twin", cli::parse_config_text("noise = 0.7\n", "c")), ConfigError);
  CHECK_THROWS_AS(cli::make_config("lcurve", cli::parse_config_text("eps_grid = 1e-1,1e-2\n", "c")), ConfigError);
  CHECK_THROWS_AS(cli::make_config("fly", {}), ConfigError);
  const cli::RunConfig ok = cli::make_config("twin", cli::parse_config_text("case = TC2\nnoise = 0.01\nseed = 4\n", "c"));
  CHECK(ok.test_case == "TC2");
  CHECK(ok.noise_level == 0.01);
  CHECK(ok.seed == 4);
  CHECK_FALSE(ok.epsilon.has_value());
}

TEST_CASE("complete with zero data gives a zero control") {
  const fs::path dir = scratch("zero");
  const FemSystem fem(iter_like_mesh());
  const CauchyData zero{std::vector<double>(fem.outer_size(), 0.0), std::vector<double>(fem.outer_size(), 0.0)};
  io::write_text_file(dir / "data.csv", io::format_cauchy_csv(fem, zero));
  cli::RunConfig c = cli::make_config("complete", {{"data", {(dir / "data.csv").string(), "t"}}, {"epsilon", {"1e-3", "t"}}});
  c.output_dir = (dir / "out").string();
  std::ostringstream out, err;
  REQUIRE(cli::run(c, out, err) == 0);
  const std::string control = io::read_text_file(dir / "out" / "control.csv");
  std::istringstream lines(control);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "0");
    ++rows;
  }
  CHECK(rows == 30);
  for (const char* f : {"psi.csv", "psi.vtk", "report.txt"}) CHECK(fs::exists(dir / "out" / f));
}

TEST_CASE("lcurve on compatible manufactured data marks one corner") {
  const fs::path dir = scratch("lcurve");
  REQUIRE(run_cli("lcurve --case 'MANUFACTURED(solovev)' --mesh builtin:desk -o " + dir.string()) == 0);
  const std::string csv = io::read_text_file(dir / "lcurve.csv");
  CHECK(count(csv, "\n") >= 6);
  CHECK(count(csv, ",1\n") == 1);
}

TEST_CASE("twin TC2 without noise") {
  const fs::path dir = scratch("tc2");
  REQUIRE(run_cli("twin --case TC2 --noise 0 --epsilon 1e-5 -o " + dir.string()) == 0);
  const std::string rep = io::read_text_file(dir / "report.txt");
  const auto pos = rep.find("max_rel_err_u = ");
  REQUIRE(pos != std::string::npos);
  const double err = std::stod(rep.substr(pos + 16));
  CHECK(err > 0.0);
  CHECK(err < 5e-3);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(run_cli("mesh -o " + dir.string()) == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("complete --epsilon 1e-3") == 2);
  CHECK(run_cli("twin --noise abc") == 2);
  CHECK(run_cli("twin --bogus 1") == 2);
  CHECK(run_cli("complete --data /nonexistent/data.csv --epsilon 1e-3") == 4);
  CHECK(run_cli("mesh --mesh /nonexistent/mesh.txt") == 4);
  CHECK(run_cli("complete --config /nonexistent/run.cfg") == 4);
  io::write_text_file(dir / "broken.csv", "gamma_v_node,arc_length,f,g\n0,0,1\n");
  CHECK(run_cli("complete --data " + (dir / "broken.csv").string() + " --epsilon 1e-3") == 4);

  // A field without an X-point is a numerical failure.
  const FemSystem fem(iter_like_mesh());
  io::write_text_file(dir / "r2.csv", io::format_flux_csv(fem, fem.interpolate([](Point p) { return p.r * p.r; })));
  CHECK(run_cli("contour --field " + (dir / "r2.csv").string() + " -o " + (dir / "c").string()) == 3);
  CHECK(run_cli("contour --field " + (dir / "r2.csv").string() + " --level 1e6 -o " + (dir / "c").string()) == 3);
  CHECK(run_cli("contour --field " + (dir / "r2.csv").string() + " --level 40 -o " + (dir / "c").string()) == 0);
}

TEST_CASE("config file with command-line override") {
  const fs::path dir = scratch("cfg");
  io::write_text_file(dir / "run.cfg", "case = TC1\nnoise = 0.01\nseed = 2\noutput_dir = " + (dir / "a").string() + "\n");
  REQUIRE(run_cli("twin --config " + (dir / "run.cfg").string()) == 0);
  REQUIRE(run_cli("twin --config " + (dir / "run.cfg").string() + " -o " + (dir / "b").string() + " --set seed=3") == 0);
  CHECK(io::read_text_file(dir / "a" / "report.txt").find("seed = 2") != std::string::npos);
  CHECK(io::read_text_file(dir / "b" / "report.txt").find("seed = 3") != std::string::npos);
  io::write_text_file(dir / "bad.cfg", "case = TC1\nfield = x\n");
  CHECK(run_cli("twin --config " + (dir / "bad.cfg").string()) == 2);
}

TEST_CASE("seeded runs are byte-identical") {
  const fs::path dir = scratch("det");
  for (const char* sub : {"a", "b"}) {
    const std::string out = (dir / sub).string();
    REQUIRE(run_cli("twin --case TC1 --noise 0.05 --seed 9 -o " + out + "/twin") == 0);
    REQUIRE(run_cli("lcurve --case TC2 --noise 0.01 --seed 9 -o " + out + "/lcurve") == 0);
    REQUIRE(run_cli("contour --field " + out + "/twin/psi_opt.csv --level 60 -o " + out + "/contour") == 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = dir / "b" / fs::relative(entry.path(), dir / "a");
    CHECK(io::read_text_file(entry.path()) == io::read_text_file(twin));
    ++compared;
  }
  CHECK(compared >= 12);
}
