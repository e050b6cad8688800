#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "eitrec/mesh.hpp"

namespace eit {

/// One scalar value per mesh vertex, interpreted as a continuous piecewise
/// linear (P1) finite element function.
struct NodalField {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<double> values;

  NodalField() = default;
  NodalField(std::shared_ptr<const TriMesh> m, double fill = 0.0)
      : mesh(std::move(m)), values(mesh->vertex_count(), fill) {}
  NodalField(std::shared_ptr<const TriMesh> m, std::vector<double> v)
      : mesh(std::move(m)), values(std::move(v)) {}

  int size() const { return static_cast<int>(values.size()); }
  double max_abs() const;

  /// Value of the P1 interpolant at an arbitrary point (nearest-triangle
  /// barycentric evaluation; intended for diagnostics, O(nt) per call).
  double interpolate(Vec2 p) const;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix in compressed row storage. Assembly accumulates
/// (i, j) and (j, i) from the same element value in the same triangle order,
/// so assembled matrices are bitwise symmetric.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

  int size() const { return n_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  double coeff(int i, int j) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  std::vector<double> row_sums() const;
  double max_abs() const;
  /// max |A_ij - A_ji| over all entries.
  double symmetry_defect() const;
  bool equals(const SparseMatrix& other) const;

  SparseMatrix scaled(double s) const;

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  /// Coordinate text dump, one "i j value" line per stored entry.
  std::string dump_coordinate_text() const;

 private:
  int n_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Degree-2, 3-point triangle rule on edge midpoints (weights 1/3 each,
/// scaled by triangle area at use sites).
struct QuadRule {
  static constexpr std::array<std::array<double, 3>, 3> barycentric = {
      {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}}};
  static constexpr std::array<double, 3> weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

/// Pointwise coefficient evaluator: triangle index, physical point and its
/// barycentric coordinates within that triangle.
using CoeffFn = std::function<double(int tri, Vec2 x, const std::array<double, 3>& bary)>;

CoeffFn constant_coeff(double value);

SparseMatrix assemble_stiffness(const TriMesh& mesh, const CoeffFn& coeff);
SparseMatrix assemble_mass(const TriMesh& mesh);
SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const BoundaryParam& bp);

/// Boundary load for an angle-parameterized flux density, 2-point trapezoid
/// per boundary edge (equivalently: lumped weight times the vertex sample).
std::vector<double> assemble_boundary_load(const TriMesh& mesh, const BoundaryParam& bp,
                                           const std::function<double(double angle)>& g);

/// Per-triangle constant gradient of a P1 field.
std::array<Vec2, 3> p1_gradients(const TriMesh& mesh, int tri);
Vec2 field_gradient(const NodalField& u, int tri);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = -1;           // -1: 10 x dimension
  int direct_threshold = 50000;  // direct factorization up to this many vertices
};

struct SolveReport {
  bool direct = false;
  int iterations = 0;
  double residual = 0.0;
  double removed_component = 0.0;  // norm of the incompatible constant part
};

/// Diagonally preconditioned conjugate gradients for SPD systems.
std::vector<double> linear_solve(const SparseMatrix& A, std::span<const double> b, double tol,
                                 int max_iter, SolveReport* report = nullptr);

/// Zeroes boundary rows/columns symmetrically and puts 1 on their diagonal.
SparseMatrix eliminate_dirichlet(const SparseMatrix& A, const std::vector<bool>& on_boundary);

/// Constrained pure-Neumann solver: A u = rhs subject to sum_i w_i u_i = 0
/// over the lumped boundary weights, via a single bordered Lagrange row
/// (direct sparse factorization) or conjugate gradients on the projected
/// system for large meshes. The factorization is cached across solves.
class ConstrainedNeumannSolver {
 public:
  ConstrainedNeumannSolver(std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                           SparseMatrix A, SolveOptions opts = {});
  ~ConstrainedNeumannSolver();
  ConstrainedNeumannSolver(ConstrainedNeumannSolver&&) noexcept;
  ConstrainedNeumannSolver& operator=(ConstrainedNeumannSolver&&) noexcept;

  NodalField solve(std::span<const double> rhs, SolveReport* report = nullptr) const;

  const SparseMatrix& matrix() const;
  const std::vector<double>& boundary_weights() const;  // full-length, 0 interior
  std::shared_ptr<const TriMesh> mesh() const;

  /// Monotone build counter; consumers use it as a staleness guard.
  uint64_t version() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Homogeneous Dirichlet solver with a cached factorization of the
/// symmetrically eliminated matrix.
class DirichletSolver {
 public:
  DirichletSolver(std::shared_ptr<const TriMesh> mesh, const SparseMatrix& A_full,
                  SolveOptions opts = {});
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  /// Solves with the load restricted to interior vertices (boundary entries
  /// of the load are ignored); the result is exactly zero on the boundary.
  NodalField solve(std::span<const double> load, SolveReport* report = nullptr) const;

  const SparseMatrix& eliminated_matrix() const;
  std::shared_ptr<const TriMesh> mesh() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot wrappers over the cached solvers.
NodalField solve_neumann_zero_mean(const SparseMatrix& A, std::span<const double> rhs,
                                   std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                                   SolveOptions opts = {}, SolveReport* report = nullptr);
NodalField solve_dirichlet_zero(const SparseMatrix& A_full, std::span<const double> rhs,
                                std::shared_ptr<const TriMesh> mesh, SolveOptions opts = {},
                                SolveReport* report = nullptr);

/// Boundary-weighted mean sum(w_i u_i) / sum(w_i).
double boundary_weighted_mean(const NodalField& u, const BoundaryParam& bp);

}  // namespace eit
