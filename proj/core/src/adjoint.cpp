#include "eitrec/adjoint.hpp"

#include <stdexcept>

namespace eit {

GradChain::GradChain(const ConstrainedNeumannSolver& op, NodalField q_in, double alpha_in,
                     std::vector<NodalField> u_in, std::vector<std::vector<double>> m_in)
    : forward_op(&op),
      forward_version(op.version()),
      q(std::move(q_in)),
      alpha(alpha_in),
      u(std::move(u_in)),
      m_nodal(std::move(m_in)) {
  if (u.size() != m_nodal.size())
    throw std::invalid_argument("forward state and measurement counts differ");
}

void GradChain::check_fresh() const {
  if (forward_op == nullptr || forward_op->version() != forward_version)
    throw std::logic_error("stale gradient chain: forward operator was rebuilt");
}

NodalField adjoint_forward(const ConstrainedNeumannSolver& op, const SparseMatrix& boundary_mass,
                           const NodalField& u_j, const std::vector<double>& m_j_nodal) {
  const int n = op.matrix().size();
  std::vector<double> residual(n);
  for (int i = 0; i < n; ++i) residual[i] = m_j_nodal[i] - u_j.values[i];
  const auto load = boundary_mass.multiply(residual);
  return op.solve(load);
}

std::vector<double> adjoint_source(const NodalField& q, double alpha,
                                   const std::vector<NodalField>& u,
                                   const std::vector<NodalField>& z) {
  if (u.size() != z.size()) throw std::invalid_argument("state and adjoint counts differ");
  const TriMesh& mesh = *q.mesh;
  std::vector<double> load(mesh.vertex_count(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    double gg = 0.0;
    for (size_t j = 0; j < u.size(); ++j) gg += dot(field_gradient(u[j], t), field_gradient(z[j], t));
    if (gg == 0.0) continue;
    const double area = mesh.signed_area(t);
    for (int g = 0; g < 3; ++g) {
      const auto& bary = QuadRule::barycentric[g];
      const double qx =
          bary[0] * q.values[tr[0]] + bary[1] * q.values[tr[1]] + bary[2] * q.values[tr[2]];
      const double d = delta_alpha(qx, alpha);
      if (d == 0.0) continue;
      const double w = QuadRule::weights[g] * area * d * gg;
      for (int i = 0; i < 3; ++i) load[tr[i]] += w * bary[i];
    }
  }
  return load;
}

NodalField adjoint_levelset(const LevelSetOperator& op, std::span<const double> source) {
  return op.solve_with_load(source);
}

NodalField gradient(const GradChain& chain, const NodalField& lambda) {
  chain.check_fresh();
  return lambda;
}

AdjointBundle compute_gradient(const GradChain& chain, const LevelSetOperator& aux,
                               const SparseMatrix& boundary_mass) {
  chain.check_fresh();
  AdjointBundle bundle;
  bundle.z.reserve(chain.u.size());
  for (size_t j = 0; j < chain.u.size(); ++j)
    bundle.z.push_back(
        adjoint_forward(*chain.forward_op, boundary_mass, chain.u[j], chain.m_nodal[j]));
  const auto source = adjoint_source(chain.q, chain.alpha, chain.u, bundle.z);
  bundle.lambda = adjoint_levelset(aux, source);
  bundle.grad = gradient(chain, bundle.lambda);
  return bundle;
}

}  // namespace eit
