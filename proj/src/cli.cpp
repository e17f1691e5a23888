#include "kvflux/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>

#include "kvflux/io.hpp"
#include "kvflux/mesh_generation.hpp"
#include "kvflux/text.hpp"

namespace kvflux::cli {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"mesh", {"mesh", "refine", "output_dir"}},
      {"complete", {"mesh", "refine", "quadrature", "data", "epsilon", "output_dir"}},
      {"twin", {"mesh", "refine", "quadrature", "case", "noise", "seed", "epsilon", "batch", "seeds", "output_dir"}},
      {"lcurve", {"mesh", "refine", "quadrature", "data", "case", "noise", "seed", "eps_grid", "output_dir"}},
      {"contour", {"mesh", "refine", "quadrature", "field", "level", "limiter", "output_dir"}},
  };
  return keys;
}

[[noreturn]] void bad(const std::string& key, const ConfigValue& v, const std::string& why) {
  throw ConfigError(v.origin + ": " + key + " = '" + v.value + "': " + why);
}

double to_double(const std::string& key, const ConfigValue& v) {
  double d;
  if (!text::parse_double(v.value, d)) bad(key, v, "not a finite number");
  return d;
}

long long to_int(const std::string& key, const ConfigValue& v) {
  long long i;
  if (!text::parse_int(v.value, i)) bad(key, v, "not an integer");
  return i;
}

std::shared_ptr<const FemSystem> load_fem(const RunConfig& c) {
  Mesh mesh = c.mesh == "builtin:iter-like" ? iter_like_mesh()
              : c.mesh == "builtin:desk"    ? desk_annulus_mesh()
                                            : load_mesh(c.mesh);
  const BoundarySnap snap = c.mesh == "builtin:desk" ? desk_annulus_snap() : nullptr;
  for (int i = 0; i < c.refine; ++i) mesh = refine_uniform(mesh, snap);
  return std::make_shared<const FemSystem>(std::move(mesh), c.quadrature);
}

void write(const RunConfig& c, const std::string& name, std::string_view content) {
  io::write_text_file(fs::path(c.output_dir) / name, content);
}

TwinSpec twin_spec(const RunConfig& c) {
  TwinSpec spec = parse_test_case(c.test_case);
  spec.noise_level = c.noise_level;
  spec.seed = c.seed;
  return spec;
}

void run_mesh(const RunConfig& c, std::ostream& out) {
  const auto fem = load_fem(c);
  write(c, "mesh.txt", format_mesh(fem->mesh()));
  out << "nodes = " << fem->mesh().node_count() << "\ntriangles = " << fem->mesh().triangle_count()
      << "\nouter_nodes = " << fem->outer_size() << "\ninner_nodes = " << fem->inner_size() << '\n';
}

void run_complete(const RunConfig& c, std::ostream& out) {
  const auto fem = load_fem(c);
  const KVSystem system = assemble_kv(fem, io::parse_cauchy_csv(*fem, io::read_text_file(c.data)));
  const CompletionResult res = solve_completion(system, *c.epsilon);
  const std::string report = io::format_completion_report(res);
  write(c, "report.txt", report);
  write(c, "control.csv", io::format_control_csv(*fem, res.u_opt));
  write(c, "psi.csv", io::format_flux_csv(*fem, res.psi_opt));
  write(c, "psi.vtk", io::format_flux_vtk(*fem, res.psi_opt));
  out << report;
}

void run_twin_command(const RunConfig& c, std::ostream& out) {
  const auto fem = load_fem(c);
  const auto ops = build_interface_operators(fem);
  if (c.batch == "table1") {
    const auto rows = run_table1(ops, c.seeds, c.seed);
    write(c, "table1.csv", io::format_table1_csv(rows));
    out << io::format_table1_text(rows);
    return;
  }
  const TwinSpec spec = twin_spec(c);
  const double eps = c.epsilon ? *c.epsilon : reference_epsilon(spec.test_case, spec.noise_level);
  const TwinReport rep = run_twin(ops, spec, eps);
  const std::string report = io::format_twin_report(rep);
  write(c, "report.txt", report);
  write(c, "u_opt.csv", io::format_control_csv(*fem, rep.u_opt));
  write(c, "u_ref.csv", io::format_control_csv(*fem, rep.u_ref));
  write(c, "psi_ref.csv", io::format_flux_csv(*fem, rep.psi_ref));
  write(c, "psi_opt.csv", io::format_flux_csv(*fem, rep.psi_opt));
  write(c, "psi_opt.vtk", io::format_flux_vtk(*fem, rep.psi_opt));
  write(c, "field_rel_err.csv", io::format_flux_csv(*fem, rep.field_rel_err, "rel_err"));
  write(c, "data.csv", io::format_cauchy_csv(*fem, add_noise(generate_reference(*fem, spec).data, spec.noise_level, spec.seed)));
  out << report;
}

void run_lcurve(const RunConfig& c, std::ostream& out) {
  const auto fem = load_fem(c);
  CauchyData data;
  if (!c.data.empty()) {
    data = io::parse_cauchy_csv(*fem, io::read_text_file(c.data));
  } else {
    const TwinSpec spec = twin_spec(c);
    data = add_noise(generate_reference(*fem, spec).data, spec.noise_level, spec.seed);
  }
  const KVSystem system = assemble_kv(fem, std::move(data));
  const LCurve curve = sweep(system, c.eps_grid.empty() ? default_epsilon_grid() : c.eps_grid);
  write(c, "lcurve.csv", io::format_lcurve_csv(curve));
  std::string report;
  report += "points = " + std::to_string(curve.points.size()) + '\n';
  report += "corner_epsilon = " + text::format_double(curve.corner_epsilon()) + '\n';
  report += "dropped = " + std::to_string(curve.dropped.size()) + '\n';
  write(c, "report.txt", report);
  out << report;
}

void run_contour(const RunConfig& c, std::ostream& out) {
  const auto fem = load_fem(c);
  const FluxField field = io::parse_flux_csv(*fem, io::read_text_file(c.field));
  write(c, "bfield.csv", io::format_field_csv(*fem, magnetic_field(*fem, field)));
  if (c.level) {
    const Isoline iso = extract_isoline(*fem, field, *c.level);
    write(c, "isoline.csv", io::format_isoline_csv(iso));
    out << "level = " << text::format_double(iso.level) << "\npolylines = " << iso.polylines.size()
        << "\nclosed = " << (iso.closed ? "true" : "false") << '\n';
    return;
  }
  std::optional<Polyline> limiter;
  if (!c.limiter.empty()) limiter = io::parse_polyline_csv(io::read_text_file(c.limiter));
  const PlasmaBoundary b = find_plasma_boundary(*fem, field, limiter);
  const std::string report = io::format_boundary_report(b);
  write(c, "boundary.txt", report);
  write(c, "isoline.csv", io::format_isoline_csv(b.isoline));
  out << report;
}

}  // namespace

ConfigMap parse_config_text(std::string_view text, const std::string& source) {
  ConfigMap map;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    const auto line = text::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (map.count(key)) throw ConfigError(where + ": duplicate key '" + key + "' (first at " + map[key].origin + ")");
    map[key] = {value, where};
  }
  return map;
}

RunConfig make_config(const std::string& command, const ConfigMap& values) {
  const auto allowed = allowed_keys().find(command);
  if (allowed == allowed_keys().end()) throw ConfigError("unknown command '" + command + "'");
  RunConfig c;
  c.command = command;
  for (const auto& [key, v] : values) {
    if (key == "command") {
      if (v.value != command) bad(key, v, "does not match the command being run ('" + command + "')");
      continue;
    }
    if (!allowed->second.count(key)) bad(key, v, "not a valid key for '" + command + "'");
    if (key == "mesh") {
      c.mesh = v.value;
    } else if (key == "refine") {
      const auto n = to_int(key, v);
      if (n < 0 || n > 4) bad(key, v, "must be between 0 and 4");
      c.refine = static_cast<int>(n);
    } else if (key == "quadrature") {
      const auto n = to_int(key, v);
      if (n != 1 && n != 2 && n != 5) bad(key, v, "must be 1, 2 or 5");
      c.quadrature = static_cast<int>(n);
    } else if (key == "data") {
      c.data = v.value;
    } else if (key == "epsilon") {
      const double e = to_double(key, v);
      if (e < 0.0) bad(key, v, "must be >= 0");
      c.epsilon = e;
    } else if (key == "eps_grid") {
      for (auto part : text::split(v.value, ',')) {
        double e;
        if (!text::parse_double(part, e) || !(e > 0.0)) bad(key, v, "entries must be positive numbers");
        c.eps_grid.push_back(e);
      }
      if (c.eps_grid.size() < 5) bad(key, v, "needs at least 5 values");
      for (std::size_t i = 1; i < c.eps_grid.size(); ++i)
        if (!(c.eps_grid[i] < c.eps_grid[i - 1])) bad(key, v, "must be strictly decreasing");
    } else if (key == "noise") {
      const double p = to_double(key, v);
      if (p < 0.0 || p > 0.5) bad(key, v, "must lie in [0, 0.5]");
      c.noise_level = p;
    } else if (key == "seed") {
      const auto s = to_int(key, v);
      if (s < 0) bad(key, v, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "case") {
      try {
        parse_test_case(v.value);
      } catch (const ConfigError& e) {
        bad(key, v, e.what());
      }
      c.test_case = v.value;
    } else if (key == "batch") {
      if (v.value != "table1") bad(key, v, "only 'table1' is supported");
      c.batch = v.value;
    } else if (key == "seeds") {
      const auto n = to_int(key, v);
      if (n < 1 || n > 1000) bad(key, v, "must be between 1 and 1000");
      c.seeds = static_cast<int>(n);
    } else if (key == "field") {
      c.field = v.value;
    } else if (key == "level") {
      c.level = to_double(key, v);
    } else if (key == "limiter") {
      c.limiter = v.value;
    } else if (key == "output_dir") {
      if (v.value.empty()) bad(key, v, "must not be empty");
      c.output_dir = v.value;
    }
  }
  if (command == "complete") {
    if (c.data.empty()) throw ConfigError("complete: missing required key 'data'");
    if (!c.epsilon) throw ConfigError("complete: missing required key 'epsilon'");
  }
  if (command == "contour" && c.field.empty()) throw ConfigError("contour: missing required key 'field'");
  if (command == "twin" && c.batch.empty() && !c.epsilon) {
    const TwinSpec spec = parse_test_case(c.test_case);
    const bool known = spec.test_case != TestCase::Manufactured &&
                       (c.noise_level == 0.0 || c.noise_level == 0.01 || c.noise_level == 0.05);
    if (!known) throw ConfigError("twin: 'epsilon' is required unless case is TC1/TC2 at noise 0, 0.01 or 0.05");
  }
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == "mesh") run_mesh(config, out);
    else if (config.command == "complete") run_complete(config, out);
    else if (config.command == "twin") run_twin_command(config, out);
    else if (config.command == "lcurve") run_lcurve(config, out);
    else if (config.command == "contour") run_contour(config, out);
    else throw ConfigError("unknown command '" + config.command + "'");
    return Ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return IoFailure;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return IoFailure;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return NumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return NumericalFailure;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Vacuum poloidal flux reconstruction by Kohn-Vogelius data completion"};
  app.require_subcommand(1);
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--mesh", "mesh", "builtin:iter-like, builtin:desk or a mesh file"},
      {"--refine", "refine", "uniform refinements of the mesh"},
      {"--quadrature", "quadrature", "1/r quadrature order (1, 2 or 5)"},
      {"--data", "data", "Cauchy data CSV (gamma_v_node,arc_length,f,g)"},
      {"--epsilon", "epsilon", "regularization parameter"},
      {"--eps-grid", "eps_grid", "comma-separated decreasing epsilon values"},
      {"--case", "case", "TC1, TC2 or MANUFACTURED(name)"},
      {"--noise", "noise", "noise level as a fraction"},
      {"--seed", "seed", "noise seed"},
      {"--batch", "batch", "twin batch mode (table1)"},
      {"--seeds", "seeds", "seeds averaged per noisy table1 entry"},
      {"--field", "field", "flux CSV (node_index,r,z,psi)"},
      {"--level", "level", "trace this isoflux level"},
      {"--limiter", "limiter", "limiter polyline CSV (r,z)"},
      {"-o,--output", "output_dir", "output directory"},
  };
  static const std::pair<const char*, const char*> commands[] = {
      {"mesh", "build or load a mesh and write it"},
      {"complete", "solve the completion problem for a Cauchy data file"},
      {"twin", "run a twin experiment (or the table1 batch)"},
      {"lcurve", "sweep epsilon and locate the L-curve corner"},
      {"contour", "isolines, plasma boundary and magnetic field of a flux"},
  };
  std::map<std::string, std::string> given;
  std::string config_file;
  std::vector<std::string> sets;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_file, "key = value configuration file");
    sub->add_option("--set", sets, "override any key: --set key=value");
    for (const Flag& f : flags) sub->add_option_function<std::string>(f.name, [&given, key = f.key](const std::string& v) { given[key] = v; }, f.help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ConfigFailure;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ConfigMap values;
    if (!config_file.empty()) values = parse_config_text(io::read_text_file(config_file), config_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      values[std::string(text::trim(s.substr(0, eq)))] = {std::string(text::trim(s.substr(eq + 1))), "command line"};
    }
    for (const auto& [key, value] : given) values[key] = {value, "command line"};
    return run(make_config(command, values), std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return IoFailure;
  }
}

}  // namespace kvflux::cli
