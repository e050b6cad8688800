#include "eitrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

#include "eitrec/io.hpp"

namespace eit {

double boundary_l2_norm(const BoundaryData& data, const BoundaryParam& bp) {
  if (static_cast<int>(data.values.size()) != bp.size())
    throw std::invalid_argument("boundary data does not match the boundary discretization");
  const int n = bp.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double va = data.values[i];
    const double vb = data.values[(i + 1) % n];
    s += bp.edge_lengths[i] / 3.0 * (va * va + vb * vb + va * vb);
  }
  return std::sqrt(s);
}

std::vector<BoundaryData> simulate_measurements(const ShapeSpec& shape, const TriMesh& gen_mesh,
                                                const std::vector<CurrentPattern>& patterns,
                                                SolveOptions opts) {
  // Per-triangle conductivity from the analytic indicator; a triangle whose
  // vertices straddle the interface means the mesh is unusable for data
  // generation.
  if (!conforms_to_shape(gen_mesh, shape))
    throw std::invalid_argument("generation mesh does not conform to the phantom interface");
  auto cls = std::make_shared<std::vector<double>>(gen_mesh.triangle_count());
  for (int t = 0; t < gen_mesh.triangle_count(); ++t)
    (*cls)[t] = shape.contains(gen_mesh.centroid(t)) ? 2.0 : 1.0;
  const CoeffFn sigma_true = [cls](int tri, Vec2, const std::array<double, 3>&) {
    return (*cls)[tri];
  };

  auto mesh_ptr = std::make_shared<const TriMesh>(gen_mesh);
  const BoundaryParam bp = boundary_param(gen_mesh);
  const SparseMatrix A = assemble_stiffness(gen_mesh, sigma_true);
  const ConstrainedNeumannSolver solver(mesh_ptr, bp, A, opts);

  std::vector<BoundaryData> traces;
  traces.reserve(patterns.size());
  for (const auto& pattern : patterns) {
    const auto load = assemble_pattern_load(gen_mesh, bp, pattern);
    const NodalField u = solver.solve(load);
    traces.push_back(boundary_trace(u, bp, pattern.index));
  }
  return traces;
}

BoundaryData add_noise(const BoundaryData& m, const BoundaryParam& bp, const NoiseSpec& spec) {
  if (spec.level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  if (spec.level == 0.0) return m;
  const int n = bp.size();
  if (static_cast<int>(m.values.size()) != n)
    throw std::invalid_argument("boundary data does not match the boundary discretization");

  const double norm_m = boundary_l2_norm(m, bp);
  if (norm_m == 0.0)
    throw std::invalid_argument("cannot scale noise against an identically zero signal");

  SplitMix64 rng(substream_seed(spec.seed, static_cast<uint64_t>(m.index)));
  BoundaryData theta;
  theta.angles = m.angles;
  theta.values.resize(n);
  for (int i = 0; i < n; ++i) theta.values[i] = rng.uniform_pm1();
  const double norm_t = boundary_l2_norm(theta, bp);
  if (norm_t == 0.0) throw std::invalid_argument("degenerate noise draw");

  BoundaryData out = m;
  const double scale = spec.level * norm_m / norm_t;
  for (int i = 0; i < n; ++i) out.values[i] += scale * theta.values[i];
  return out;
}

BoundaryData resample_boundary(const BoundaryData& data, const BoundaryParam& target_bp) {
  const int ns = static_cast<int>(data.angles.size());
  if (ns < 3) throw std::invalid_argument("fewer than 3 source samples to resample");
  BoundaryData out;
  out.index = data.index;
  const int n = target_bp.size();
  out.angles = target_bp.angles;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) {
    const double a = target_bp.angles[i];
    const auto it = std::upper_bound(data.angles.begin(), data.angles.end(), a);
    int hi = static_cast<int>(it - data.angles.begin());
    int lo = hi - 1;
    double th_lo, th_hi;
    if (hi == 0) {
      lo = ns - 1;
      hi = 0;
      th_lo = data.angles[lo] - 2.0 * pi;
      th_hi = data.angles[hi];
    } else if (hi == ns) {
      lo = ns - 1;
      hi = 0;
      th_lo = data.angles[lo];
      th_hi = data.angles[hi] + 2.0 * pi;
    } else {
      th_lo = data.angles[lo];
      th_hi = data.angles[hi];
    }
    const double t = (th_hi > th_lo) ? (a - th_lo) / (th_hi - th_lo) : 0.0;
    out.values[i] = (1.0 - t) * data.values[lo] + t * data.values[hi];
  }
  // Re-enforce the zero boundary-weighted mean on the target discretization.
  double mean = 0.0, wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    mean += target_bp.vertex_weights[i] * out.values[i];
    wsum += target_bp.vertex_weights[i];
  }
  mean /= wsum;
  for (double& v : out.values) v -= mean;
  return out;
}

Dataset make_dataset(const ShapeSpec& shape, const TriMesh& gen_mesh, int electrode_count,
                     double width, const NoiseSpec& noise, SolveOptions opts) {
  Dataset ds;
  ds.gen_mesh = gen_mesh;
  ds.electrode_count = electrode_count;
  ds.width = width;
  ds.noise = noise;
  ds.shape = shape;
  const auto patterns = make_patterns(electrode_count, width);
  ds.clean = simulate_measurements(shape, gen_mesh, patterns, opts);
  const BoundaryParam bp = boundary_param(gen_mesh);
  ds.noisy.reserve(ds.clean.size());
  for (const auto& m : ds.clean) ds.noisy.push_back(add_noise(m, bp, noise));
  return ds;
}

namespace {

std::string measurement_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03d.csv", prefix, index);
  return buf;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_mesh(ds.gen_mesh, (fs::path(dir) / "mesh_gen.txt").string());
  KeyValues meta = {
      {"E", std::to_string(ds.electrode_count)},
      {"width", fmt17(ds.width)},
      {"eps", fmt17(ds.noise.level)},
      {"seed", std::to_string(ds.noise.seed)},
      {"prng", NoiseSpec::prng},
      {"shape", ds.shape.to_string()},
  };
  write_keyvalues((fs::path(dir) / "meta.txt").string(), meta);
  for (size_t j = 0; j < ds.clean.size(); ++j)
    write_boundary_csv(ds.clean[j],
                       (fs::path(dir) / measurement_name("m", ds.clean[j].index)).string());
  for (size_t j = 0; j < ds.noisy.size(); ++j)
    write_boundary_csv(ds.noisy[j],
                       (fs::path(dir) / measurement_name("mt", ds.noisy[j].index)).string());
}

Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  const auto meta = read_keyvalues((fs::path(dir) / "meta.txt").string());
  auto need = [&](const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw IoError("meta.txt is missing key '" + key + "' in " + dir);
    return it->second;
  };
  ds.electrode_count = std::stoi(need("E"));
  ds.width = std::stod(need("width"));
  ds.noise.level = std::stod(need("eps"));
  ds.noise.seed = std::stoull(need("seed"));
  ds.shape = ShapeSpec::parse(need("shape"));
  if (need("prng") != NoiseSpec::prng)
    throw IoError("dataset was generated with PRNG '" + need("prng") + "', expected '" +
                  NoiseSpec::prng + "'");
  ds.gen_mesh = read_mesh((fs::path(dir) / "mesh_gen.txt").string(), MeshFormat::native);
  const int m = ds.electrode_count / 2;
  for (int j = 1; j <= m; ++j) {
    ds.clean.push_back(read_boundary_csv((fs::path(dir) / measurement_name("m", j)).string()));
    ds.clean.back().index = j;
    ds.noisy.push_back(read_boundary_csv((fs::path(dir) / measurement_name("mt", j)).string()));
    ds.noisy.back().index = j;
  }
  return ds;
}

}  // namespace eit
