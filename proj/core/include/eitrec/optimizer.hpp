#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eitrec/adjoint.hpp"
#include "eitrec/forward.hpp"
#include "eitrec/levelset.hpp"
#include "eitrec/shape.hpp"

namespace eit {

struct LineSearchParams {
  double shrink = 0.5;
  double armijo_c = 1e-4;
  int max_backtracks = 25;
  double growth = 2.0;  // initial trial step = growth x last accepted step
};

struct ReconstructionConfig {
  double gamma = 0.001;
  double alpha = 0.01;
  double noise_level = 0.0;   // epsilon of the data, drives the stopping rule
  double stop_factor = 1e-9;  // beta in the stopping rule
  double tol_floor = 1e-12;
  int max_iters = 1000;
  LineSearchParams line_search;
  SolveOptions solver;
  uint64_t seed = 0;  // recorded for provenance; the loop itself draws nothing

  double stop_tolerance() const { return std::max(noise_level * stop_factor, tol_floor); }
  void validate() const;
};

enum class StopReason { converged, max_iters, line_search_failed };

std::string to_string(StopReason reason);

struct IterationRow {
  int iter = 0;
  double J = 0.0;
  double grad_inf = 0.0;
  double step = 0.0;
  int backtracks = 0;
  std::optional<double> eps_err;
};

struct ConvergenceRecord {
  std::vector<IterationRow> rows;
  StopReason reason = StopReason::max_iters;

  int iterations() const { return rows.empty() ? 0 : rows.back().iter; }
  double final_J() const { return rows.empty() ? 0.0 : rows.back().J; }
};

struct ReconstructionResult {
  NodalField f;
  NodalField q;
  NodalField heaviside;  // H_alpha(q) at vertices
  NodalField sigma;      // 1 + H_alpha(q) at vertices
  NodalField lambda;
  ConvergenceRecord record;
};

/// Indicator of a disk: 1 at vertices inside or on the circle, 0 outside.
NodalField initial_control(std::shared_ptr<const TriMesh> mesh, double radius = 0.2,
                           Vec2 center = {0.0, 0.0});

struct LineSearchResult {
  double step = 0.0;
  int backtracks = 0;
  double J_new = 0.0;
  bool success = false;
};

/// Backtracking Armijo search along -grad. Accepts the first s in
/// {s0, s0*shrink, ...} with J(f - s*grad) <= J(f) - c*s*(grad' M grad).
LineSearchResult line_search(const NodalField& f, const NodalField& grad, double J_f,
                             double grad_M_grad, double s0, const LineSearchParams& params,
                             const std::function<double(const NodalField&)>& evaluate_J);

/// Relative L2 distance between the analytic indicator of the truth and the
/// interpolated heaviside field, by the 3-midpoint quadrature on the mesh.
double reconstruction_error(const NodalField& heaviside, const ShapeSpec& truth,
                            const TriMesh& mesh);

struct IterationSnapshot {
  int iter;
  const NodalField& f;
  const NodalField& q;
  const NodalField& heaviside;
};
using SnapshotObserver = std::function<void(const IterationSnapshot&)>;

/// Steepest descent on the control f: per iteration solves the level-set
/// problem, the M forward problems, the M adjoint problems and the level-set
/// adjoint, then takes an Armijo step along -lambda. Stops when the max-norm
/// of the gradient falls below max(noise_level * stop_factor, tol_floor).
ReconstructionResult reconstruct(const ReconstructionConfig& config,
                                 std::shared_ptr<const TriMesh> mesh,
                                 const std::vector<CurrentPattern>& patterns,
                                 const std::vector<BoundaryData>& measurements,
                                 const std::optional<ShapeSpec>& truth = std::nullopt,
                                 const std::optional<NodalField>& initial = std::nullopt,
                                 const SnapshotObserver& observer = nullptr);

}  // namespace eit
