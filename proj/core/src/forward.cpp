#include "eitrec/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eit {

std::vector<CurrentPattern> make_patterns(int electrode_count, double width) {
  if (electrode_count < 2 || electrode_count % 2 != 0)
    throw std::invalid_argument("electrode count must be even and at least 2");
  if (width <= 0.0 || electrode_count * width >= 2.0 * pi)
    throw std::invalid_argument("electrodes overlap: E * width must be below 2*pi");
  const int m = electrode_count / 2;
  std::vector<CurrentPattern> patterns(m);
  for (int j = 0; j < m; ++j) {
    CurrentPattern& p = patterns[j];
    p.electrode_count = electrode_count;
    p.index = j + 1;
    p.width = width;
    p.source_angle = std::fmod(pi / 2.0 + 2.0 * pi * j / electrode_count, 2.0 * pi);
    p.sink_angle = std::fmod(p.source_angle + pi, 2.0 * pi);
  }
  return patterns;
}

namespace {

// Offset of `angle` from the start of the arc [center - w/2, center + w/2),
// normalized into [0, 2*pi).
double arc_offset(double angle, double center, double width) {
  double d = std::fmod(angle - (center - width / 2.0), 2.0 * pi);
  if (d < 0.0) d += 2.0 * pi;
  return d;
}

}  // namespace

double g_eval(const CurrentPattern& pattern, double angle) {
  if (arc_offset(angle, pattern.source_angle, pattern.width) < pattern.width) return 1.0;
  if (arc_offset(angle, pattern.sink_angle, pattern.width) < pattern.width) return -1.0;
  return 0.0;
}

std::vector<double> assemble_pattern_load(const TriMesh& mesh, const BoundaryParam& bp,
                                          const CurrentPattern& pattern) {
  std::vector<double> load(mesh.vertex_count(), 0.0);
  const int nb = bp.size();

  // Arcs as [start, end) angle intervals.
  const std::array<std::pair<double, double>, 2> arcs = {
      std::pair{pattern.source_angle - pattern.width / 2.0,
                pattern.source_angle + pattern.width / 2.0},
      std::pair{pattern.sink_angle - pattern.width / 2.0,
                pattern.sink_angle + pattern.width / 2.0}};
  const std::array<double, 2> signs = {1.0, -1.0};

  for (int i = 0; i < nb; ++i) {
    const int a = bp.cycle[i];
    const int b = bp.cycle[(i + 1) % nb];
    const double th0 = bp.angles[i];
    double th1 = bp.angles[(i + 1) % nb];
    if (th1 <= th0) th1 += 2.0 * pi;  // wrap edge
    const double span = th1 - th0;
    const double L = bp.edge_lengths[i];

    for (int arc = 0; arc < 2; ++arc) {
      // Bring the arc into a window overlapping [th0, th1].
      for (int shift = -1; shift <= 1; ++shift) {
        const double lo = arcs[arc].first + 2.0 * pi * shift;
        const double hi = arcs[arc].second + 2.0 * pi * shift;
        const double t0 = std::max(lo, th0);
        const double t1 = std::min(hi, th1);
        if (t1 <= t0) continue;
        // Pull back to the edge parameter t in [0, 1]; integrate the hats
        // (1 - t) and t over [s0, s1] exactly.
        const double s0 = (t0 - th0) / span;
        const double s1 = (t1 - th0) / span;
        const double i0 = (s1 - s0) - 0.5 * (s1 * s1 - s0 * s0);
        const double i1 = 0.5 * (s1 * s1 - s0 * s0);
        load[a] += signs[arc] * L * i0;
        load[b] += signs[arc] * L * i1;
      }
    }
  }
  return load;
}

NodalField forward_solve(std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                         const CoeffFn& sigma, const CurrentPattern& pattern, SolveOptions opts) {
  const SparseMatrix A = assemble_stiffness(*mesh, sigma);
  const auto load = assemble_pattern_load(*mesh, bp, pattern);
  return solve_neumann_zero_mean(A, load, std::move(mesh), bp, opts);
}

NodalField forward_solve_with_g(std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                                const CoeffFn& sigma, const std::function<double(double)>& g,
                                SolveOptions opts) {
  const SparseMatrix A = assemble_stiffness(*mesh, sigma);
  const auto load = assemble_boundary_load(*mesh, bp, g);
  return solve_neumann_zero_mean(A, load, std::move(mesh), bp, opts);
}

BoundaryData boundary_trace(const NodalField& u, const BoundaryParam& bp, int index) {
  BoundaryData data;
  data.index = index;
  const int nb = bp.size();
  data.angles.resize(nb);
  data.values.resize(nb);
  double mean = 0.0, wsum = 0.0;
  for (int i = 0; i < nb; ++i) {
    data.angles[i] = bp.angles[i];
    data.values[i] = u.values[bp.cycle[i]];
    mean += bp.vertex_weights[i] * data.values[i];
    wsum += bp.vertex_weights[i];
  }
  mean /= wsum;
  for (double& v : data.values) v -= mean;
  return data;
}

std::vector<double> boundary_to_nodal(const BoundaryData& data, const TriMesh& mesh,
                                      const BoundaryParam& bp) {
  if (static_cast<int>(data.values.size()) != bp.size())
    throw std::invalid_argument("boundary data does not match the mesh boundary");
  std::vector<double> full(mesh.vertex_count(), 0.0);
  for (int i = 0; i < bp.size(); ++i) full[bp.cycle[i]] = data.values[i];
  return full;
}

namespace {

// Periodic linear interpolation of (angles, values) at angle a.
double interp_periodic(const std::vector<double>& angles, const std::vector<double>& values,
                       double a) {
  const int n = static_cast<int>(angles.size());
  const auto it = std::upper_bound(angles.begin(), angles.end(), a);
  int hi = static_cast<int>(it - angles.begin());
  int lo = hi - 1;
  double th_lo, th_hi;
  if (hi == 0) {  // before the first sample: wrap the last one back
    lo = n - 1;
    hi = 0;
    th_lo = angles[lo] - 2.0 * pi;
    th_hi = angles[hi];
  } else if (hi == n) {  // after the last sample
    lo = n - 1;
    hi = 0;
    th_lo = angles[lo];
    th_hi = angles[hi] + 2.0 * pi;
  } else {
    th_lo = angles[lo];
    th_hi = angles[hi];
  }
  const double t = (th_hi > th_lo) ? (a - th_lo) / (th_hi - th_lo) : 0.0;
  return (1.0 - t) * values[lo] + t * values[hi];
}

}  // namespace

double cost(const std::vector<BoundaryData>& traces, const std::vector<BoundaryData>& measurements,
            const TriMesh& mesh, const BoundaryParam& bp, const SparseMatrix& boundary_mass) {
  if (traces.size() != measurements.size())
    throw std::invalid_argument("trace and measurement counts differ");
  std::vector<std::vector<double>> t_nodal, m_nodal;
  for (size_t j = 0; j < traces.size(); ++j) {
    t_nodal.push_back(boundary_to_nodal(traces[j], mesh, bp));
    const BoundaryData& m = measurements[j];
    if (m.angles == traces[j].angles) {
      m_nodal.push_back(boundary_to_nodal(m, mesh, bp));
    } else {
      std::vector<double> full(mesh.vertex_count(), 0.0);
      for (int i = 0; i < bp.size(); ++i)
        full[bp.cycle[i]] = interp_periodic(m.angles, m.values, bp.angles[i]);
      m_nodal.push_back(std::move(full));
    }
  }
  return cost_nodal(t_nodal, m_nodal, boundary_mass);
}

double cost_nodal(const std::vector<std::vector<double>>& traces,
                  const std::vector<std::vector<double>>& measurements,
                  const SparseMatrix& boundary_mass) {
  if (traces.size() != measurements.size())
    throw std::invalid_argument("trace and measurement counts differ");
  double J = 0.0;
  std::vector<double> r(boundary_mass.size());
  for (size_t j = 0; j < traces.size(); ++j) {
    for (int i = 0; i < boundary_mass.size(); ++i) r[i] = traces[j][i] - measurements[j][i];
    const auto Br = boundary_mass.multiply(r);
    double s = 0.0;
    for (int i = 0; i < boundary_mass.size(); ++i) s += r[i] * Br[i];
    J += 0.5 * s;
  }
  return J;
}

}  // namespace eit
