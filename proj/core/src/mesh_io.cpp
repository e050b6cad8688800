#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "eitrec/mesh.hpp"

namespace eit {

namespace {

uint64_t ekey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint64_t>(b);
}

// Flips clockwise triangles and rebuilds the boundary cycle. Boundary edges
// are kept as listed when present (so written files round-trip bitwise) and
// derived from triangle topology otherwise.
void finish_mesh(TriMesh& mesh) {
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    if (mesh.signed_area(static_cast<int>(t)) < 0.0)
      std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);

  std::map<uint64_t, int> edge_count;
  for (const auto& tr : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++edge_count[ekey(tr[k], tr[(k + 1) % 3])];

  if (mesh.boundary_edges.empty()) {
    for (const auto& [key, count] : edge_count) {
      if (count != 1) continue;
      mesh.boundary_edges.push_back(
          {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)});
    }
  }
  std::map<int, std::vector<int>> link;  // boundary vertex -> boundary neighbors
  for (const auto& e : mesh.boundary_edges) {
    link[e[0]].push_back(e[1]);
    link[e[1]].push_back(e[0]);
  }
  if (mesh.boundary_edges.empty()) throw MeshError("mesh has no boundary");
  for (const auto& [v, nb] : link)
    if (nb.size() != 2) throw MeshError("boundary is not a single closed loop");

  std::vector<int> cycle;
  const int start = link.begin()->first;
  int prev = -1, cur = start;
  do {
    cycle.push_back(cur);
    const auto& nb = link[cur];
    const int next = (nb[0] == prev) ? nb[1] : nb[0];
    prev = cur;
    cur = next;
    if (cycle.size() > link.size()) throw MeshError("boundary is not a single closed loop");
  } while (cur != start);
  if (cycle.size() != link.size()) throw MeshError("boundary has several components");

  // Counterclockwise orientation, starting at the smallest polar angle.
  double area2 = 0.0;
  for (size_t i = 0; i < cycle.size(); ++i) {
    const Vec2 a = mesh.vertices[cycle[i]];
    const Vec2 b = mesh.vertices[cycle[(i + 1) % cycle.size()]];
    area2 += cross(a, b);
  }
  if (area2 < 0.0) std::reverse(cycle.begin(), cycle.end());
  size_t first = 0;
  double best = 4.0 * pi;
  for (size_t i = 0; i < cycle.size(); ++i) {
    const double a = angle_of(mesh.vertices[cycle[i]]);
    if (a < best) {
      best = a;
      first = i;
    }
  }
  std::rotate(cycle.begin(), cycle.begin() + first, cycle.end());
  mesh.boundary_cycle = cycle;
}

TriMesh read_native(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  int lineno = 0;
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError("missing header in " + path, 1);
  long long nv, nt, nb;
  {
    std::istringstream h(line);
    if (!(h >> nv >> nt >> nb) || nv < 3 || nt < 1 || nb < 3)
      throw ParseError("bad header 'nv nt nb' in " + path, lineno);
  }

  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (long long i = 0; i < nv; ++i) {
    if (!next_line()) throw ParseError("unexpected end of vertex list in " + path, lineno);
    std::istringstream s(line);
    if (!(s >> mesh.vertices[i].x >> mesh.vertices[i].y))
      throw ParseError("bad vertex line in " + path, lineno);
  }
  mesh.triangles.resize(nt);
  for (long long i = 0; i < nt; ++i) {
    if (!next_line()) throw ParseError("unexpected end of triangle list in " + path, lineno);
    std::istringstream s(line);
    auto& t = mesh.triangles[i];
    if (!(s >> t[0] >> t[1] >> t[2]))
      throw ParseError("bad triangle line in " + path, lineno);
    for (int v : t)
      if (v < 0 || v >= nv)
        throw ParseError("triangle vertex index out of range in " + path, lineno);
  }
  mesh.boundary_edges.resize(nb);
  for (long long i = 0; i < nb; ++i) {
    if (!next_line()) throw ParseError("unexpected end of boundary list in " + path, lineno);
    std::istringstream s(line);
    auto& e = mesh.boundary_edges[i];
    if (!(s >> e[0] >> e[1])) throw ParseError("bad boundary edge line in " + path, lineno);
    if (e[0] < 0 || e[0] >= nv || e[1] < 0 || e[1] >= nv)
      throw ParseError("boundary edge index out of range in " + path, lineno);
  }
  finish_mesh(mesh);
  mesh.validate();
  return mesh;
}

TriMesh read_msh2(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  int lineno = 0;
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };

  std::map<long long, int> id_map;
  TriMesh mesh;
  bool saw_nodes = false, saw_elements = false;

  while (next_line()) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      if (!next_line()) throw ParseError("truncated $MeshFormat in " + path, lineno);
      std::istringstream s(line);
      double version;
      int file_type;
      if (!(s >> version >> file_type) || file_type != 0)
        throw ParseError("only ASCII MSH 2.x is supported in " + path, lineno);
      if (version < 2.0 || version >= 3.0)
        throw ParseError("unsupported MSH version in " + path, lineno);
    } else if (line.rfind("$Nodes", 0) == 0) {
      saw_nodes = true;
      if (!next_line()) throw ParseError("truncated $Nodes in " + path, lineno);
      long long n = std::stoll(line);
      for (long long i = 0; i < n; ++i) {
        if (!next_line()) throw ParseError("unexpected end of $Nodes in " + path, lineno);
        std::istringstream s(line);
        long long id;
        double x, y, z;
        if (!(s >> id >> x >> y >> z)) throw ParseError("bad node line in " + path, lineno);
        id_map[id] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back({x, y});
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      saw_elements = true;
      if (!next_line()) throw ParseError("truncated $Elements in " + path, lineno);
      long long n = std::stoll(line);
      for (long long i = 0; i < n; ++i) {
        if (!next_line()) throw ParseError("unexpected end of $Elements in " + path, lineno);
        std::istringstream s(line);
        long long id;
        int type, ntags;
        if (!(s >> id >> type >> ntags)) throw ParseError("bad element line in " + path, lineno);
        long long tag;
        for (int k = 0; k < ntags; ++k)
          if (!(s >> tag)) throw ParseError("bad element tags in " + path, lineno);
        auto read_node = [&]() {
          long long nid;
          if (!(s >> nid)) throw ParseError("bad element node list in " + path, lineno);
          auto it = id_map.find(nid);
          if (it == id_map.end())
            throw ParseError("element references unknown node in " + path, lineno);
          return it->second;
        };
        if (type == 2) {
          const int a = read_node(), b = read_node(), c = read_node();
          mesh.triangles.push_back({a, b, c});
        } else if (type == 1) {
          read_node();
          read_node();  // boundary/interface polylines carry no extra information
        } else if (type == 15) {
          read_node();
        } else {
          throw ParseError("unsupported element type " + std::to_string(type) + " in " + path,
                           lineno);
        }
      }
    }
  }
  if (!saw_nodes || !saw_elements)
    throw ParseError("missing $Nodes or $Elements section in " + path, lineno);
  if (mesh.triangles.empty()) throw ParseError("no triangles in " + path, lineno);
  finish_mesh(mesh);
  mesh.validate();
  return mesh;
}

}  // namespace

TriMesh read_mesh(const std::string& path, MeshFormat format) {
  return format == MeshFormat::native ? read_native(path) : read_msh2(path);
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
  if (path.empty()) throw IoError("empty mesh output path");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open mesh file for writing: " + path);
  out << mesh.vertex_count() << " " << mesh.triangle_count() << " "
      << mesh.boundary_edges.size() << "\n";
  for (const auto& p : mesh.vertices) out << fmt17(p.x) << " " << fmt17(p.y) << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges) out << e[0] << " " << e[1] << "\n";
  if (!out) throw IoError("failed writing mesh file: " + path);
}

}  // namespace eit
