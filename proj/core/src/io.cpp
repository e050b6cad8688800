#include "eitrec/io.hpp"

#include <fstream>
#include <sstream>

namespace eit {

void write_vtk(const NodalField& field, const std::string& name, const std::string& path) {
  if (path.empty()) throw IoError("empty VTK output path");
  const TriMesh& mesh = *field.mesh;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open VTK file for writing: " + path);
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : mesh.vertices) out << fmt17(p.x) << " " << fmt17(p.y) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.vertex_count() << "\n";
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) out << fmt17(v) << "\n";
  if (!out) throw IoError("failed writing VTK file: " + path);
}

void write_boundary_csv(const BoundaryData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open CSV for writing: " + path);
  out << "angle,value\n";
  for (size_t i = 0; i < data.angles.size(); ++i)
    out << fmt17(data.angles[i]) << "," << fmt17(data.values[i]) << "\n";
  if (!out) throw IoError("failed writing CSV: " + path);
}

BoundaryData read_boundary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV: " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != "angle,value")
    throw ParseError("expected 'angle,value' header in " + path, 1);
  ++lineno;
  BoundaryData data;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("missing comma in " + path, lineno);
    try {
      data.angles.push_back(std::stod(line.substr(0, comma)));
      data.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("bad number in " + path, lineno);
    }
  }
  if (data.angles.size() < 3) throw ParseError("fewer than 3 samples in " + path, lineno);
  for (size_t i = 1; i < data.angles.size(); ++i)
    if (data.angles[i] <= data.angles[i - 1])
      throw ParseError("angles not strictly increasing in " + path, static_cast<int>(i) + 2);
  return data;
}

std::string convergence_csv(const ConvergenceRecord& record) {
  std::string out = "iter,J,grad_inf,step,backtracks,eps_err\n";
  for (const auto& r : record.rows) {
    out += std::to_string(r.iter) + "," + fmt17(r.J) + "," + fmt17(r.grad_inf) + "," +
           fmt17(r.step) + "," + std::to_string(r.backtracks) + ",";
    if (r.eps_err) out += fmt17(*r.eps_err);
    out += "\n";
  }
  out += "# reason=" + to_string(record.reason) + "\n";
  return out;
}

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path) {
  write_text_file(path, convergence_csv(record));
}

ConvergenceRecord read_convergence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open convergence CSV: " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != "iter,J,grad_inf,step,backtracks,eps_err")
    throw ParseError("bad convergence CSV header in " + path, 1);
  ++lineno;
  ConvergenceRecord record;
  bool saw_reason = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# reason=", 0) == 0) {
      const std::string reason = line.substr(9);
      if (reason == "converged") record.reason = StopReason::converged;
      else if (reason == "max_iters") record.reason = StopReason::max_iters;
      else if (reason == "line_search_failed") record.reason = StopReason::line_search_failed;
      else throw ParseError("unknown termination reason in " + path, lineno);
      saw_reason = true;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() < 5) throw ParseError("short convergence CSV row in " + path, lineno);
    IterationRow row;
    try {
      row.iter = std::stoi(cols[0]);
      row.J = std::stod(cols[1]);
      row.grad_inf = std::stod(cols[2]);
      row.step = std::stod(cols[3]);
      row.backtracks = std::stoi(cols[4]);
      if (cols.size() >= 6 && !cols[5].empty()) row.eps_err = std::stod(cols[5]);
    } catch (const std::exception&) {
      throw ParseError("bad convergence CSV row in " + path, lineno);
    }
    record.rows.push_back(row);
  }
  if (!saw_reason) throw ParseError("missing '# reason=' line in " + path, lineno);
  return record;
}

void write_text_file(const std::string& path, const std::string& content) {
  if (path.empty()) throw IoError("empty output path");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_keyvalues(const std::string& path, const KeyValues& kv) {
  std::string content;
  for (const auto& [k, v] : kv) content += k + " = " + v + "\n";
  write_text_file(path, content);
}

std::map<std::string, std::string> read_keyvalues(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' in " + path, lineno);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::set<std::string>& allowed_keys) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value' in " + path, lineno);
    const std::string key = trim(line.substr(0, eq));
    if (!allowed_keys.count(key))
      throw ParseError("unknown configuration key '" + key + "' in " + path, lineno);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace eit
