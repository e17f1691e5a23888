#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvflux::cli {

enum ExitCode { Ok = 0, ConfigFailure = 2, NumericalFailure = 3, IoFailure = 4 };

struct RunConfig {
  std::string command;                     // mesh | complete | twin | lcurve | contour
  std::string mesh = "builtin:iter-like";  // builtin:iter-like, builtin:desk or a mesh file
  int refine = 0;                          // uniform refinements applied after loading
  int quadrature = 5;
  std::string data;                        // Cauchy data CSV
  std::optional<double> epsilon;
  std::vector<double> eps_grid;            // decreasing; default grid when empty
  double noise_level = 0.0;
  std::uint64_t seed = 1;
  std::string test_case = "TC1";
  std::string batch;                       // twin: "table1"
  int seeds = 10;
  std::string field;                       // contour: flux CSV
  std::optional<double> level;             // contour: single isoline instead of boundary search
  std::string limiter;                     // contour: r,z CSV
  std::string output_dir = "out";
};

struct ConfigValue {
  std::string value;
  std::string origin;  // "file:line" or "command line"
};
using ConfigMap = std::map<std::string, ConfigValue>;

// Flat key = value lines; '#' starts a comment. Throws ConfigError with the
// source name and line number.
ConfigMap parse_config_text(std::string_view text, const std::string& source = "config");
// Validates keys and values for the command; throws ConfigError naming the
// offending field and where it came from.
RunConfig make_config(const std::string& command, const ConfigMap& values);

// Executes one command, writing artifacts under output_dir and a summary to
// `out`. Returns an ExitCode; errors are reported on `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace kvflux::cli
