#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "kvflux/completion.hpp"
#include "kvflux/experiments.hpp"
#include "kvflux/postprocess.hpp"
#include "kvflux/regularization.hpp"

namespace kvflux::io {

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// node_index,r,z,psi
std::string format_flux_csv(const FemSystem& fem, const FluxField& field, std::string_view column = "psi");
FluxField parse_flux_csv(const FemSystem& fem, std::string_view text);
// Legacy ASCII VTK unstructured grid with psi as point data.
std::string format_flux_vtk(const FemSystem& fem, const FluxField& field);

// gamma_i_node,arc_length,u
std::string format_control_csv(const FemSystem& fem, const Control& u);

// gamma_v_node,arc_length,f,g; rows follow the OUTER loop order and the
// node column must match it.
std::string format_cauchy_csv(const FemSystem& fem, const CauchyData& data);
CauchyData parse_cauchy_csv(const FemSystem& fem, std::string_view text);

// epsilon,J,R_D,is_corner
std::string format_lcurve_csv(const LCurve& curve);

// polyline_id,vertex_index,r,z
std::string format_isoline_csv(const Isoline& iso);
// triangle,r_c,z_c,B_r,B_z
std::string format_field_csv(const FemSystem& fem, const FieldSample& b);

// key = value reports.
std::string format_completion_report(const CompletionResult& res);
std::string format_twin_report(const TwinReport& rep);
std::string format_boundary_report(const PlasmaBoundary& b);
// noise_level,epsilon_tc1,error_tc1,epsilon_tc2,error_tc2 plus the published values.
std::string format_table1_csv(const std::vector<Table1Entry>& rows);
std::string format_table1_text(const std::vector<Table1Entry>& rows);

// Polyline from "r,z" rows (header optional, '#' comments allowed).
Polyline parse_polyline_csv(std::string_view text);

}  // namespace kvflux::io
