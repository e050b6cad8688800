#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eitrec/forward.hpp"
#include "eitrec/optimizer.hpp"

namespace eit {

/// Legacy VTK ASCII writer: UNSTRUCTURED_GRID with POINTS, triangle CELLS and
/// one POINT_DATA scalar array named `name`.
void write_vtk(const NodalField& field, const std::string& name, const std::string& path);

void write_boundary_csv(const BoundaryData& data, const std::string& path);
BoundaryData read_boundary_csv(const std::string& path);

std::string convergence_csv(const ConvergenceRecord& record);
void write_convergence_csv(const ConvergenceRecord& record, const std::string& path);
ConvergenceRecord read_convergence_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_keyvalues(const std::string& path, const KeyValues& kv);
std::map<std::string, std::string> read_keyvalues(const std::string& path);

/// Flat `key = value` configuration with '#' comments. Unknown keys are
/// rejected with the offending line number.
std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::set<std::string>& allowed_keys);

}  // namespace eit
