#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "eitrec/common.hpp"
#include "eitrec/shape.hpp"

namespace eit {

/// Conforming triangulation of a planar domain. All triangles are oriented
/// counterclockwise, the boundary is a single closed loop. Instances are
/// immutable after construction and safe to share across solvers.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<int> boundary_cycle;  // counterclockwise, starts at the smallest angle

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const {
    const auto& tr = triangles[t];
    const Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
    return 0.5 * cross(b - a, c - a);
  }

  Vec2 centroid(int t) const {
    const auto& tr = triangles[t];
    const Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
  }

  double total_area() const;
  double min_angle_deg() const;
  double max_edge_length() const;
  std::vector<bool> boundary_vertex_mask() const;

  /// Checks orientation, edge incidence counts, the boundary loop and
  /// coordinate finiteness. Throws MeshError with a description on failure.
  void validate() const;
};

/// Discretization of the boundary curve: per-boundary-vertex angles (ordered
/// along boundary_cycle), per-edge segment lengths, and the lumped vertex
/// weights (half the sum of incident edge lengths).
struct BoundaryParam {
  std::vector<int> cycle;             // copy of mesh.boundary_cycle
  std::vector<double> angles;         // angle of cycle[i], single wrap allowed
  std::vector<double> edge_lengths;   // edge i joins cycle[i] and cycle[(i+1)%n]
  std::vector<double> vertex_weights; // lumped length at cycle[i]
  std::vector<int> cycle_pos;         // vertex id -> position in cycle, -1 if interior

  int size() const { return static_cast<int>(cycle.size()); }
  double total_length() const;
};

TriMesh generate_disk_mesh(double target_edge_length);
TriMesh generate_disk_mesh_with_shape(double target_edge_length, const ShapeSpec& shape);

/// Uniform (red) refinement: every triangle splits into four via the edge
/// midpoints. New boundary vertices are optionally projected onto the unit
/// circle; self-similar families from this are what convergence studies use.
TriMesh refine_uniform(const TriMesh& mesh, bool project_boundary_to_circle = true);

BoundaryParam boundary_param(const TriMesh& mesh);

enum class MeshFormat { native, msh2 };

TriMesh read_mesh(const std::string& path, MeshFormat format);
void write_mesh(const TriMesh& mesh, const std::string& path);

/// Exact equality of vertices, triangles and boundary edges.
bool same_mesh(const TriMesh& a, const TriMesh& b);

/// True when no triangle straddles the analytic interface: excluding on-curve
/// vertices, every triangle's vertex classes and its centroid class agree.
bool conforms_to_shape(const TriMesh& mesh, const ShapeSpec& shape, double on_tol = 1e-9);

}  // namespace eit
