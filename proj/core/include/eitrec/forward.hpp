#pragma once

#include <vector>

#include "eitrec/fem.hpp"

namespace eit {

/// One injection pattern: unit current density on a source arc, minus one on
/// the diametrically opposite sink arc, zero elsewhere.
struct CurrentPattern {
  int electrode_count = 0;
  int index = 0;        // 1-based measurement index
  double width = pi / 20.0;
  double source_angle = 0.0;  // arc center
  double sink_angle = 0.0;
};

/// M = E/2 patterns for E equidistant electrodes; the first source arc is
/// centered at angle pi/2 (top electrode), pattern j advances by 2*pi*(j-1)/E.
std::vector<CurrentPattern> make_patterns(int electrode_count, double width = pi / 20.0);

/// Applied current density at a boundary angle: +1 on the source arc, -1 on
/// the sink arc, 0 elsewhere. Arcs are closed on the left, open on the right.
double g_eval(const CurrentPattern& pattern, double angle);

/// Boundary potential samples at sorted angles in [0, 2*pi).
struct BoundaryData {
  std::vector<double> angles;
  std::vector<double> values;
  int index = 0;
};

/// Electrode load with the +-1 arc indicator integrated exactly against the
/// P1 boundary hat functions (per-edge analytic subinterval integration).
std::vector<double> assemble_pattern_load(const TriMesh& mesh, const BoundaryParam& bp,
                                          const CurrentPattern& pattern);

/// One-shot forward solve for one pattern: assembles the sigma-weighted
/// stiffness matrix and solves the constrained Neumann problem.
NodalField forward_solve(std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                         const CoeffFn& sigma, const CurrentPattern& pattern,
                         SolveOptions opts = {});

/// Test hook for analytic flux densities g(theta).
NodalField forward_solve_with_g(std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                                const CoeffFn& sigma,
                                const std::function<double(double)>& g, SolveOptions opts = {});

/// Boundary values of u ordered by angle, with the boundary-weighted mean
/// subtracted.
BoundaryData boundary_trace(const NodalField& u, const BoundaryParam& bp, int index = 0);

/// Expands boundary samples (matching bp's angles) to a full-length nodal
/// vector that is zero at interior vertices.
std::vector<double> boundary_to_nodal(const BoundaryData& data, const TriMesh& mesh,
                                      const BoundaryParam& bp);

/// Least-squares misfit J = 1/2 sum_j integral over the boundary of
/// |u_j - m_j|^2 ds, discretized with the boundary mass matrix. Measurements
/// whose angles do not match are resampled by periodic linear interpolation.
double cost(const std::vector<BoundaryData>& traces, const std::vector<BoundaryData>& measurements,
            const TriMesh& mesh, const BoundaryParam& bp, const SparseMatrix& boundary_mass);

/// Residual form used inside the reconstruction loop: both sides already
/// expanded to full-length nodal vectors on the same mesh.
double cost_nodal(const std::vector<std::vector<double>>& traces,
                  const std::vector<std::vector<double>>& measurements,
                  const SparseMatrix& boundary_mass);

}  // namespace eit
