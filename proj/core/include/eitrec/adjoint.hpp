#pragma once

#include <vector>

#include "eitrec/forward.hpp"
#include "eitrec/levelset.hpp"

namespace eit {

/// Everything the gradient evaluation depends on for one control f. The
/// version tag ties the forward states to the operator they were solved with;
/// mixing states from different controls trips the staleness guard.
struct GradChain {
  const ConstrainedNeumannSolver* forward_op = nullptr;
  uint64_t forward_version = 0;
  NodalField q;
  double alpha = 0.0;
  std::vector<NodalField> u;
  std::vector<std::vector<double>> m_nodal;  // full-length, zero at interior vertices

  GradChain() = default;
  GradChain(const ConstrainedNeumannSolver& op, NodalField q_in, double alpha_in,
            std::vector<NodalField> u_in, std::vector<std::vector<double>> m_in);

  void check_fresh() const;
};

/// Adjoint state of one forward problem: a(z_j, v) equals the boundary
/// integral of the residual times v, with the residual oriented so that the
/// resulting lambda is the gradient representative (see adjoint_source).
NodalField adjoint_forward(const ConstrainedNeumannSolver& op, const SparseMatrix& boundary_mass,
                           const NodalField& u_j, const std::vector<double>& m_j_nodal);

/// Load vector of the level-set adjoint problem: per-vertex quadrature of
/// delta_alpha(q(x)) * sum_j grad u_j . grad z_j against the P1 hats, using
/// the same 3-midpoint rule as the stiffness assembly. Vanishes exactly away
/// from the interface band 0 <= q < alpha.
std::vector<double> adjoint_source(const NodalField& q, double alpha,
                                   const std::vector<NodalField>& u,
                                   const std::vector<NodalField>& z);

/// lambda with b(lambda, w) = (source, w), sharing the level-set operator.
NodalField adjoint_levelset(const LevelSetOperator& op, std::span<const double> source);

/// The L2 Riesz representative of dJ/df is lambda itself: the directional
/// derivative along w is w' M lambda.
NodalField gradient(const GradChain& chain, const NodalField& lambda);

struct AdjointBundle {
  std::vector<NodalField> z;
  NodalField lambda;
  NodalField grad;
};

AdjointBundle compute_gradient(const GradChain& chain, const LevelSetOperator& aux,
                               const SparseMatrix& boundary_mass);

}  // namespace eit
