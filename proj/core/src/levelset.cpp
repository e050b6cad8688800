#include "eitrec/levelset.hpp"

#include <cmath>
#include <stdexcept>

namespace eit {

double heaviside_alpha(double q, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (q < 0.0) return 0.0;
  if (q >= alpha) return 1.0;
  return 0.5 - 0.5 * std::cos(pi * q / alpha);
}

double delta_alpha(double q, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (q < 0.0 || q >= alpha) return 0.0;
  return (pi / (2.0 * alpha)) * std::sin(pi * q / alpha);
}

CoeffFn sigma_of_q(const NodalField& q, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  auto mesh = q.mesh;
  auto values = std::make_shared<std::vector<double>>(q.values);
  return [mesh, values, alpha](int tri, Vec2, const std::array<double, 3>& bary) {
    const auto& tr = mesh->triangles[tri];
    const double qx = bary[0] * (*values)[tr[0]] + bary[1] * (*values)[tr[1]] +
                      bary[2] * (*values)[tr[2]];
    return 1.0 + heaviside_alpha(qx, alpha);
  };
}

NodalField heaviside_field(const NodalField& q, double alpha) {
  NodalField h(q.mesh);
  for (int i = 0; i < q.size(); ++i) h.values[i] = heaviside_alpha(q.values[i], alpha);
  return h;
}

namespace {

double validated_gamma(double g) {
  if (g <= 0.0) throw std::invalid_argument("gamma must be positive");
  return g;
}

SparseMatrix aux_operator_matrix(const TriMesh& mesh, double gamma) {
  // gamma * stiffness(1) + mass, assembled in one pass per triangle so the
  // level-set solve and its adjoint share the matrix bit for bit.
  const int n = mesh.vertex_count();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    if (area <= 0.0) throw MeshError("degenerate triangle in auxiliary assembly");
    const auto grads = p1_gradients(mesh, t);
    const double off = area / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double k = gamma * area * dot(grads[i], grads[j]);
        const double m = (i == j) ? 2.0 * off : off;
        trips.push_back({tr[i], tr[j], k + m});
      }
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

}  // namespace

LevelSetOperator::LevelSetOperator(std::shared_ptr<const TriMesh> mesh, double gamma,
                                   SolveOptions opts)
    : mesh_(std::move(mesh)),
      gamma_(validated_gamma(gamma)),
      mass_(assemble_mass(*mesh_)),
      solver_(mesh_, aux_operator_matrix(*mesh_, gamma), opts) {}

NodalField LevelSetOperator::solve(const NodalField& f) const {
  return solver_.solve(mass_.multiply(f.values));
}

NodalField LevelSetOperator::solve_with_load(std::span<const double> load) const {
  return solver_.solve(load);
}

NodalField solve_level_set(const NodalField& f, double gamma, SolveOptions opts) {
  LevelSetOperator op(f.mesh, gamma, opts);
  return op.solve(f);
}

}  // namespace eit
