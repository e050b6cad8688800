#include "eitrec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "eitrec/synth.hpp"

namespace eit {

void ReconstructionConfig::validate() const {
  if (gamma <= 0.0 || alpha <= 0.0) throw std::invalid_argument("gamma and alpha must be positive");
  if (noise_level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (line_search.shrink <= 0.0 || line_search.shrink >= 1.0)
    throw std::invalid_argument("line-search shrink must be in (0, 1)");
  if (line_search.max_backtracks < 0 || line_search.growth <= 0.0)
    throw std::invalid_argument("bad line-search parameters");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

NodalField initial_control(std::shared_ptr<const TriMesh> mesh, double radius, Vec2 center) {
  if (radius <= 0.0) throw std::invalid_argument("initial control radius must be positive");
  if (norm(center) + radius > 1.0) throw std::invalid_argument("initial circle exits the disk");
  NodalField f(mesh);
  for (int i = 0; i < f.size(); ++i)
    f.values[i] = dist(mesh->vertices[i], center) <= radius ? 1.0 : 0.0;
  return f;
}

LineSearchResult line_search(const NodalField& f, const NodalField& grad, double J_f,
                             double grad_M_grad, double s0, const LineSearchParams& params,
                             const std::function<double(const NodalField&)>& evaluate_J) {
  if (grad.max_abs() == 0.0)
    throw std::invalid_argument("line search requires a nonzero gradient");
  LineSearchResult result;
  double s = s0;
  for (int bt = 0; bt <= params.max_backtracks; ++bt, s *= params.shrink) {
    NodalField trial(f.mesh, f.values);
    for (int i = 0; i < trial.size(); ++i) trial.values[i] -= s * grad.values[i];
    const double J_trial = evaluate_J(trial);
    if (J_trial <= J_f - params.armijo_c * s * grad_M_grad) {
      result.step = s;
      result.backtracks = bt;
      result.J_new = J_trial;
      result.success = true;
      return result;
    }
  }
  result.backtracks = params.max_backtracks;
  return result;
}

double reconstruction_error(const NodalField& heaviside, const ShapeSpec& truth,
                            const TriMesh& mesh) {
  double num = 0.0, den = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    for (int g = 0; g < 3; ++g) {
      const auto& bary = QuadRule::barycentric[g];
      const Vec2 x = {bary[0] * a.x + bary[1] * b.x + bary[2] * c.x,
                      bary[0] * a.y + bary[1] * b.y + bary[2] * c.y};
      const double chi = truth.contains(x) ? 1.0 : 0.0;
      const double H = bary[0] * heaviside.values[tr[0]] + bary[1] * heaviside.values[tr[1]] +
                       bary[2] * heaviside.values[tr[2]];
      const double w = QuadRule::weights[g] * area;
      num += w * (chi - H) * (chi - H);
      den += w * chi;
    }
  }
  if (den <= 0.0) throw std::invalid_argument("truth shape has no area on this mesh");
  return std::sqrt(num / den);
}

namespace {

struct EvalState {
  NodalField f;
  NodalField q;
  std::unique_ptr<ConstrainedNeumannSolver> op;
  std::vector<NodalField> u;
  double J = 0.0;
};

}  // namespace

ReconstructionResult reconstruct(const ReconstructionConfig& config,
                                 std::shared_ptr<const TriMesh> mesh,
                                 const std::vector<CurrentPattern>& patterns,
                                 const std::vector<BoundaryData>& measurements,
                                 const std::optional<ShapeSpec>& truth,
                                 const std::optional<NodalField>& initial,
                                 const SnapshotObserver& observer) {
  config.validate();
  if (patterns.size() != measurements.size())
    throw std::invalid_argument("pattern and measurement counts differ");
  const int M = static_cast<int>(patterns.size());
  if (M == 0) throw std::invalid_argument("at least one measurement required");

  const BoundaryParam bp = boundary_param(*mesh);
  const SparseMatrix B = assemble_boundary_mass(*mesh, bp);
  const LevelSetOperator aux(mesh, config.gamma, config.solver);

  // Measurements resampled onto this boundary, weighted-mean removed.
  std::vector<std::vector<double>> m_nodal;
  for (const auto& m : measurements)
    m_nodal.push_back(boundary_to_nodal(resample_boundary(m, bp), *mesh, bp));

  std::vector<std::vector<double>> loads;
  for (const auto& p : patterns) loads.push_back(assemble_pattern_load(*mesh, bp, p));

  auto evaluate = [&](NodalField f) {
    EvalState state;
    state.q = aux.solve(f);
    state.f = std::move(f);
    const CoeffFn sigma = sigma_of_q(state.q, config.alpha);
    SparseMatrix A = assemble_stiffness(*mesh, sigma);
    state.op = std::make_unique<ConstrainedNeumannSolver>(mesh, bp, std::move(A), config.solver);
    state.u.reserve(M);
    std::vector<std::vector<double>> traces;
    for (int j = 0; j < M; ++j) {
      state.u.push_back(state.op->solve(loads[j]));
      traces.push_back(state.u.back().values);
    }
    state.J = cost_nodal(traces, m_nodal, B);
    return state;
  };

  EvalState state =
      evaluate(initial ? *initial : initial_control(mesh));

  ReconstructionResult result;
  ConvergenceRecord& record = result.record;
  record.reason = StopReason::max_iters;
  double prev_step = 0.0;
  NodalField lambda;

  for (int k = 0; k < config.max_iters; ++k) {
    GradChain chain(*state.op, state.q, config.alpha, state.u, m_nodal);
    const AdjointBundle bundle = compute_gradient(chain, aux, B);
    lambda = bundle.lambda;
    const double grad_inf = bundle.grad.max_abs();

    IterationRow row;
    row.iter = k;
    row.J = state.J;
    row.grad_inf = grad_inf;
    if (truth) row.eps_err = reconstruction_error(heaviside_field(state.q, config.alpha),
                                                  *truth, *mesh);
    if (observer) {
      const NodalField H = heaviside_field(state.q, config.alpha);
      observer(IterationSnapshot{k, state.f, state.q, H});
    }

    if (grad_inf < config.stop_tolerance()) {
      record.rows.push_back(row);
      record.reason = StopReason::converged;
      break;
    }

    // grad' M grad for the Armijo decrease bound.
    const auto Mg = aux.mass().multiply(bundle.grad.values);
    double gMg = 0.0;
    for (int i = 0; i < bundle.grad.size(); ++i) gMg += bundle.grad.values[i] * Mg[i];

    const double s0 = (k == 0 || prev_step == 0.0)
                          ? (0.1 * state.f.max_abs() + 0.01) / grad_inf
                          : config.line_search.growth * prev_step;

    EvalState trial_state;
    const auto ls = line_search(state.f, bundle.grad, state.J, gMg, s0, config.line_search,
                                [&](const NodalField& trial) {
                                  trial_state = evaluate(trial);
                                  return trial_state.J;
                                });
    row.backtracks = ls.backtracks;
    if (!ls.success) {
      record.rows.push_back(row);
      record.reason = StopReason::line_search_failed;
      break;
    }
    row.step = ls.step;
    record.rows.push_back(row);
    prev_step = ls.step;
    state = std::move(trial_state);
  }

  result.f = state.f;
  result.q = state.q;
  result.heaviside = heaviside_field(state.q, config.alpha);
  result.sigma = result.heaviside;
  for (double& v : result.sigma.values) v += 1.0;
  result.lambda = lambda;
  return result;
}

}  // namespace eit
