#pragma once

#include <memory>

#include "eitrec/fem.hpp"
#include "eitrec/shape.hpp"

namespace eit {

struct SmoothingParams {
  double alpha = 0.01;  // Heaviside/delta transition width
  double gamma = 0.001; // level-set smoothing parameter
};

/// One-sided smoothed step: 0 for q < 0, (1 - cos(pi q / alpha)) / 2 on
/// [0, alpha), 1 for q >= alpha.
double heaviside_alpha(double q, double alpha);

/// Derivative of heaviside_alpha: supported on [0, alpha).
double delta_alpha(double q, double alpha);

/// Coefficient evaluator sigma(x) = 1 + H_alpha(q(x)) with q interpolated
/// linearly inside each triangle. Range is contained in [1, 2].
CoeffFn sigma_of_q(const NodalField& q, double alpha);

/// Nodal samples H_alpha(q_i), used for output fields and error metrics.
NodalField heaviside_field(const NodalField& q, double alpha);

/// The auxiliary elliptic operator gamma * stiffness + mass with homogeneous
/// Dirichlet condition, factored once and shared by the level-set solve and
/// its adjoint (the bilinear form is symmetric, so both use the same matrix).
class LevelSetOperator {
 public:
  LevelSetOperator(std::shared_ptr<const TriMesh> mesh, double gamma, SolveOptions opts = {});

  /// q with b(q, w) = (f, w): rhs is the consistent mass times the nodal f.
  NodalField solve(const NodalField& f) const;

  /// Solve against an already-assembled load vector (the adjoint path).
  NodalField solve_with_load(std::span<const double> load) const;

  double gamma() const { return gamma_; }
  const SparseMatrix& matrix() const { return solver_.eliminated_matrix(); }
  const SparseMatrix& mass() const { return mass_; }
  std::shared_ptr<const TriMesh> mesh() const { return mesh_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  double gamma_;
  SparseMatrix mass_;
  DirichletSolver solver_;
};

/// One-shot wrapper: -gamma Laplace(q) + q = f, q = 0 on the boundary.
NodalField solve_level_set(const NodalField& f, double gamma, SolveOptions opts = {});

}  // namespace eit
