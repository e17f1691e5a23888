#include "kvflux/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kvflux/errors.hpp"
#include "kvflux/text.hpp"

namespace kvflux::io {

namespace {

void put(std::string& out, double v) { text::append_double(out, v); }

void kv(std::string& out, std::string_view key, double v) {
  out.append(key);
  out += " = ";
  put(out, v);
  out += '\n';
}

// Data rows of a CSV with a required header, '#' comments and blank lines
// skipped. Each row comes with its 1-based line number.
struct CsvRow {
  std::size_t line;
  std::vector<std::string_view> cells;
};

std::vector<CsvRow> csv_rows(std::string_view text, std::string_view header) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0, pos = 0;
  bool seen_header = header.empty();
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto line = text::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) throw ParseError("expected header '" + std::string(header) + "'", line_no);
      seen_header = true;
      continue;
    }
    rows.push_back({line_no, text::split(line, ',')});
  }
  if (!seen_header) throw ParseError("missing header '" + std::string(header) + "'");
  return rows;
}

double cell_double(const CsvRow& row, std::size_t i) {
  double v;
  if (i >= row.cells.size() || !text::parse_double(row.cells[i], v))
    throw ParseError("column " + std::to_string(i + 1) + " is not a finite number", row.line);
  return v;
}

long long cell_int(const CsvRow& row, std::size_t i) {
  long long v;
  if (i >= row.cells.size() || !text::parse_int(row.cells[i], v))
    throw ParseError("column " + std::to_string(i + 1) + " is not an integer", row.line);
  return v;
}

void expect_columns(const CsvRow& row, std::size_t n) {
  if (row.cells.size() != n)
    throw ParseError("expected " + std::to_string(n) + " columns, got " + std::to_string(row.cells.size()), row.line);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_flux_csv(const FemSystem& fem, const FluxField& field, std::string_view column) {
  fem.check_field(field);
  std::string out = "node_index,r,z,";
  out.append(column);
  out += '\n';
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Point p = fem.mesh().nodes()[i];
    out += std::to_string(i) + ',';
    put(out, p.r);
    out += ',';
    put(out, p.z);
    out += ',';
    put(out, field.values[i]);
    out += '\n';
  }
  return out;
}

FluxField parse_flux_csv(const FemSystem& fem, std::string_view text) {
  const auto rows = csv_rows(text, "node_index,r,z,psi");
  const std::size_t n = fem.mesh().node_count();
  if (rows.size() != n)
    throw ParseError("flux file has " + std::to_string(rows.size()) + " rows, mesh has " + std::to_string(n) + " nodes");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    expect_columns(rows[i], 4);
    if (cell_int(rows[i], 0) != static_cast<long long>(i)) throw ParseError("node_index out of order", rows[i].line);
    values[i] = cell_double(rows[i], 3);
  }
  return fem.make_field(std::move(values));
}

std::string format_flux_vtk(const FemSystem& fem, const FluxField& field) {
  fem.check_field(field);
  const Mesh& mesh = fem.mesh();
  std::string out = "# vtk DataFile Version 3.0\npoloidal flux\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.node_count()) + " double\n";
  for (const Point& p : mesh.nodes()) {
    put(out, p.r);
    out += ' ';
    put(out, p.z);
    out += " 0\n";
  }
  out += "CELLS " + std::to_string(mesh.triangle_count()) + ' ' + std::to_string(4 * mesh.triangle_count()) + '\n';
  for (const auto& t : mesh.triangles())
    out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  out += "CELL_TYPES " + std::to_string(mesh.triangle_count()) + '\n';
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) out += "5\n";
  out += "POINT_DATA " + std::to_string(mesh.node_count()) + "\nSCALARS psi double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) {
    put(out, v);
    out += '\n';
  }
  return out;
}

std::string format_control_csv(const FemSystem& fem, const Control& u) {
  const auto& loop = fem.boundary().inner;
  if (u.size() != loop.size()) throw DimensionError("control length does not match INNER");
  std::string out = "gamma_i_node,arc_length,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    out += std::to_string(loop.nodes[i]) + ',';
    put(out, loop.arc_lengths[i]);
    out += ',';
    put(out, u[i]);
    out += '\n';
  }
  return out;
}

std::string format_cauchy_csv(const FemSystem& fem, const CauchyData& data) {
  const auto& loop = fem.boundary().outer;
  if (data.f.size() != loop.size() || data.g.size() != loop.size())
    throw DimensionError("Cauchy data length does not match OUTER");
  std::string out = "gamma_v_node,arc_length,f,g\n";
  for (std::size_t i = 0; i < loop.size(); ++i) {
    out += std::to_string(loop.nodes[i]) + ',';
    put(out, loop.arc_lengths[i]);
    out += ',';
    put(out, data.f[i]);
    out += ',';
    put(out, data.g[i]);
    out += '\n';
  }
  return out;
}

CauchyData parse_cauchy_csv(const FemSystem& fem, std::string_view text) {
  const auto rows = csv_rows(text, "gamma_v_node,arc_length,f,g");
  const auto& loop = fem.boundary().outer;
  if (rows.size() != loop.size())
    throw ParseError("Cauchy data has " + std::to_string(rows.size()) + " rows, OUTER has " +
                     std::to_string(loop.size()) + " nodes");
  CauchyData data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    expect_columns(rows[i], 4);
    if (cell_int(rows[i], 0) != loop.nodes[i])
      throw ParseError("gamma_v_node " + std::string(rows[i].cells[0]) + " does not match OUTER node " +
                           std::to_string(loop.nodes[i]) + " at this position",
                       rows[i].line);
    cell_double(rows[i], 1);
    data.f.push_back(cell_double(rows[i], 2));
    data.g.push_back(cell_double(rows[i], 3));
  }
  return data;
}

std::string format_lcurve_csv(const LCurve& curve) {
  std::string out = "epsilon,J,R_D,is_corner\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    put(out, p.epsilon);
    out += ',';
    put(out, p.J);
    out += ',';
    put(out, p.R_D);
    out += i == curve.corner_index ? ",1\n" : ",0\n";
  }
  return out;
}

std::string format_isoline_csv(const Isoline& iso) {
  std::string out = "polyline_id,vertex_index,r,z\n";
  for (std::size_t k = 0; k < iso.polylines.size(); ++k)
    for (std::size_t i = 0; i < iso.polylines[k].size(); ++i) {
      out += std::to_string(k) + ',' + std::to_string(i) + ',';
      put(out, iso.polylines[k][i].r);
      out += ',';
      put(out, iso.polylines[k][i].z);
      out += '\n';
    }
  return out;
}

std::string format_field_csv(const FemSystem& fem, const FieldSample& b) {
  const Mesh& mesh = fem.mesh();
  std::string out = "triangle,r_c,z_c,B_r,B_z\n";
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point c = (1.0 / 3.0) * (mesh.nodes()[tri[0]] + mesh.nodes()[tri[1]] + mesh.nodes()[tri[2]]);
    out += std::to_string(t) + ',';
    put(out, c.r);
    out += ',';
    put(out, c.z);
    out += ',';
    put(out, b.br[t]);
    out += ',';
    put(out, b.bz[t]);
    out += '\n';
  }
  return out;
}

std::string format_completion_report(const CompletionResult& res) {
  std::string out;
  kv(out, "J", res.J);
  kv(out, "R_D", res.R_D);
  kv(out, "J_eps", res.J_eps);
  kv(out, "epsilon", res.epsilon);
  kv(out, "residual_norm", res.residual_norm);
  kv(out, "condition_estimate", res.condition_estimate);
  out += std::string("near_singular = ") + (res.near_singular ? "true" : "false") + '\n';
  return out;
}

std::string format_twin_report(const TwinReport& rep) {
  std::string out = "test_case = " + rep.test_case + '\n';
  kv(out, "noise_level", rep.noise_level);
  out += "seed = " + std::to_string(rep.seed) + '\n';
  kv(out, "epsilon", rep.epsilon);
  kv(out, "max_rel_err_u", rep.max_rel_err_u);
  kv(out, "scaled_err_u", rep.scaled_err_u);
  kv(out, "J_u0", rep.at_zero.J);
  kv(out, "R_D_u0", rep.at_zero.R_D);
  kv(out, "J_eps_u0", rep.at_zero.J_eps);
  kv(out, "J", rep.at_opt.J);
  kv(out, "R_D", rep.at_opt.R_D);
  kv(out, "J_eps", rep.at_opt.J_eps);
  kv(out, "residual_norm", rep.residual_norm);
  kv(out, "optimality_norm", rep.optimality_norm);
  return out;
}

std::string format_boundary_report(const PlasmaBoundary& b) {
  std::string out;
  kv(out, "psi_P", b.psi_P);
  out += "mode = " + std::string(to_string(b.mode)) + '\n';
  out += std::string("closed = ") + (b.closed() ? "true" : "false") + '\n';
  return out;
}

namespace {
constexpr double published[3][2] = {{0.0131, 0.0055}, {0.0659, 0.0170}, {0.1526, 0.0405}};
}

std::string format_table1_csv(const std::vector<Table1Entry>& rows) {
  std::string out = "noise_level,epsilon_tc1,error_tc1,published_tc1,epsilon_tc2,error_tc2,published_tc2\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    put(out, r.noise_level);
    out += ',';
    put(out, r.epsilon_tc1);
    out += ',';
    put(out, r.error_tc1);
    out += ',';
    put(out, i < 3 ? published[i][0] : 0.0);
    out += ',';
    put(out, r.epsilon_tc2);
    out += ',';
    put(out, r.error_tc2);
    out += ',';
    put(out, i < 3 ? published[i][1] : 0.0);
    out += '\n';
  }
  return out;
}

std::string format_table1_text(const std::vector<Table1Entry>& rows) {
  std::string out = "noise    error TC1 (published)    error TC2 (published)\n";
  char buf[160];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%4.0f%%    %.4f (%.4f)          %.4f (%.4f)\n", rows[i].noise_level * 100.0,
                  rows[i].error_tc1, i < 3 ? published[i][0] : 0.0, rows[i].error_tc2, i < 3 ? published[i][1] : 0.0);
    out += buf;
  }
  return out;
}

Polyline parse_polyline_csv(std::string_view text) {
  Polyline out;
  for (const auto& row : csv_rows(text, "")) {
    double r, z;
    if (row.cells.size() == 2 && row.cells[0] == "r" && row.cells[1] == "z" && out.empty()) continue;
    expect_columns(row, 2);
    if (!text::parse_double(row.cells[0], r) || !text::parse_double(row.cells[1], z))
      throw ParseError("expected r,z numbers", row.line);
    out.push_back({r, z});
  }
  if (out.size() < 3) throw ParseError("polyline needs at least 3 points");
  return out;
}

}  // namespace kvflux::io
