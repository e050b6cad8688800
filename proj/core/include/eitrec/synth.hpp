#pragma once

#include <string>
#include <vector>

#include "eitrec/forward.hpp"
#include "eitrec/shape.hpp"

namespace eit {

/// Scaled uniform noise: level, seed and the PRNG identity are recorded in
/// dataset metadata so noisy data is bit-reproducible.
struct NoiseSpec {
  double level = 0.0;
  uint64_t seed = 0;
  static constexpr const char* prng = "splitmix64";
};

/// L2(boundary) norm of boundary samples under the P1 boundary mass.
double boundary_l2_norm(const BoundaryData& data, const BoundaryParam& bp);

/// Clean boundary measurements for a piecewise constant phantom: sigma is 1
/// outside and 2 inside the shape, evaluated per triangle on a conforming
/// generation mesh. Rejects meshes with straddling triangles.
std::vector<BoundaryData> simulate_measurements(const ShapeSpec& shape, const TriMesh& gen_mesh,
                                                const std::vector<CurrentPattern>& patterns,
                                                SolveOptions opts = {});

/// Noisy copy: m + level * |m| * theta / |theta| with theta drawn per
/// boundary vertex, uniform on (-1, 1), from a substream of (seed, index).
/// The relative perturbation equals level exactly by construction.
BoundaryData add_noise(const BoundaryData& m, const BoundaryParam& bp, const NoiseSpec& spec);

/// Periodic linear interpolation onto the target boundary vertices, with the
/// boundary-weighted mean removed afterwards.
BoundaryData resample_boundary(const BoundaryData& data, const BoundaryParam& target_bp);

/// On-disk dataset: generation mesh, metadata, clean and noisy measurements.
struct Dataset {
  TriMesh gen_mesh;
  int electrode_count = 0;
  double width = pi / 20.0;
  NoiseSpec noise;
  ShapeSpec shape;
  std::vector<BoundaryData> clean;
  std::vector<BoundaryData> noisy;
};

Dataset make_dataset(const ShapeSpec& shape, const TriMesh& gen_mesh, int electrode_count,
                     double width, const NoiseSpec& noise, SolveOptions opts = {});

/// Directory layout: mesh_gen.txt, meta.txt, m_XXX.csv (clean), mt_XXX.csv
/// (noisy), one file per measurement.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

}  // namespace eit
