#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <unistd.h>

#include "eitrec/fem.hpp"
#include "eitrec/mesh.hpp"

namespace eit::test {

inline std::shared_ptr<const TriMesh> disk(double h) {
  return std::make_shared<const TriMesh>(generate_disk_mesh(h));
}

inline std::shared_ptr<const TriMesh> disk_with(double h, const ShapeSpec& shape) {
  return std::make_shared<const TriMesh>(generate_disk_mesh_with_shape(h, shape));
}

/// The unit reference triangle (0,0), (1,0), (0,1) as a one-element mesh.
inline std::shared_ptr<const TriMesh> reference_triangle() {
  TriMesh m;
  m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{0, 1}, {1, 2}, {2, 0}};
  m.boundary_cycle = {0, 1, 2};
  return std::make_shared<const TriMesh>(std::move(m));
}

/// Regular n-gon inscribed in the unit circle, fan-triangulated from the
/// center vertex (index n).
inline std::shared_ptr<const TriMesh> polygon_fan(int n) {
  TriMesh m;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * pi * i / n;
    m.vertices.push_back({std::cos(a), std::sin(a)});
  }
  m.vertices.push_back({0.0, 0.0});
  for (int i = 0; i < n; ++i) m.triangles.push_back({i, (i + 1) % n, n});
  for (int i = 0; i < n; ++i) m.boundary_edges.push_back({i, (i + 1) % n});
  for (int i = 0; i < n; ++i) m.boundary_cycle.push_back(i);
  return std::make_shared<const TriMesh>(std::move(m));
}

/// Scratch directory removed when the object goes out of scope.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("eitrec_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Smooth random field: a low-order polynomial in x, y with coefficients
/// drawn from the given stream. Suitable as a finite-difference direction.
inline NodalField random_smooth_field(std::shared_ptr<const TriMesh> mesh, SplitMix64& rng) {
  double c[6];
  for (double& v : c) v = rng.uniform_pm1();
  NodalField f(mesh);
  for (int i = 0; i < f.size(); ++i) {
    const Vec2 p = mesh->vertices[i];
    f.values[i] =
        c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.x * p.y + c[4] * p.x * p.x + c[5] * p.y * p.y;
  }
  return f;
}

inline double l2_field_error(const NodalField& u, const std::function<double(Vec2)>& exact) {
  const TriMesh& mesh = *u.mesh;
  double err2 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (int g = 0; g < 3; ++g) {
      const auto& bary = QuadRule::barycentric[g];
      Vec2 x{0.0, 0.0};
      double uh = 0.0;
      for (int k = 0; k < 3; ++k) {
        x = x + bary[k] * mesh.vertices[tr[k]];
        uh += bary[k] * u.values[tr[k]];
      }
      const double d = uh - exact(x);
      err2 += QuadRule::weights[g] * area * d * d;
    }
  }
  return std::sqrt(err2);
}

}  // namespace eit::test
