#include <doctest.h>

#include <cmath>

#include "eitrec/synth.hpp"
#include "helpers.hpp"

using namespace eit;

TEST_SUITE("synth") {

TEST_CASE("measurement count follows the electrode count") {
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh gen = generate_disk_mesh_with_shape(0.08, shape);
  CHECK(simulate_measurements(shape, gen, make_patterns(6)).size() == 3);
  CHECK(simulate_measurements(shape, gen, make_patterns(2)).size() == 1);
}

TEST_CASE("non-conforming meshes are rejected") {
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh plain = generate_disk_mesh(0.08);  // straddles the ellipse
  CHECK_THROWS_AS(simulate_measurements(shape, plain, make_patterns(2)), std::invalid_argument);
}

TEST_CASE("a tiny inclusion barely perturbs the background traces") {
  const ShapeSpec tiny = ShapeSpec::make_circles({Circle{{0.1, 0.2}, 0.02}});
  const TriMesh gen = generate_disk_mesh_with_shape(0.04, tiny);
  const auto patterns = make_patterns(2);
  const auto traces = simulate_measurements(tiny, gen, patterns);

  auto mesh = std::make_shared<const TriMesh>(gen);
  const BoundaryParam bp = boundary_param(gen);
  const NodalField u0 = forward_solve(mesh, bp, constant_coeff(1.0), patterns[0]);
  const BoundaryData base = boundary_trace(u0, bp);

  double scale = 0.0, worst = 0.0;
  for (int i = 0; i < bp.size(); ++i) {
    scale = std::max(scale, std::abs(base.values[i]));
    worst = std::max(worst, std::abs(traces[0].values[i] - base.values[i]));
  }
  CHECK(worst <= 1e-2 * scale);
}

TEST_CASE("clean traces satisfy the boundary constraint") {
  const ShapeSpec shape = ShapeSpec::default_circles();
  const TriMesh gen = generate_disk_mesh_with_shape(0.06, shape);
  const BoundaryParam bp = boundary_param(gen);
  for (const auto& m : simulate_measurements(shape, gen, make_patterns(4))) {
    double mean = 0.0, scale = 1e-30;
    for (int i = 0; i < bp.size(); ++i) {
      mean += bp.vertex_weights[i] * m.values[i];
      scale = std::max(scale, std::abs(m.values[i]));
    }
    CHECK(std::abs(mean) <= 1e-10 * scale);
  }
}

TEST_CASE("mirror antisymmetry for a symmetric phantom") {
  // origin-centered axis-aligned ellipse, top/bottom electrodes: reflecting
  // across the x axis swaps source and sink, so u(-theta) = -u(theta)
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh gen = generate_disk_mesh_with_shape(0.035, shape);
  const auto traces = simulate_measurements(shape, gen, make_patterns(2));
  const BoundaryData& tr = traces[0];
  const int n = static_cast<int>(tr.angles.size());

  auto eval_at = [&](double angle) {
    double a = std::fmod(angle + 4.0 * pi, 2.0 * pi);
    for (int i = 0; i < n; ++i) {
      const double a0 = tr.angles[i];
      const double a1 = (i + 1 < n) ? tr.angles[i + 1] : tr.angles[0] + 2.0 * pi;
      double aa = a;
      if (aa < a0) aa += 2.0 * pi;
      if (aa >= a0 && aa <= a1) {
        const double t = (aa - a0) / (a1 - a0);
        return (1.0 - t) * tr.values[i] + t * tr.values[(i + 1) % n];
      }
    }
    return tr.values[0];
  };

  double scale = 0.0;
  for (double v : tr.values) scale = std::max(scale, std::abs(v));
  for (double a = 0.1; a < 2.0 * pi; a += 0.41) {
    CHECK(std::abs(eval_at(-a) + eval_at(a)) <= 1e-3 * scale);
    CHECK(std::abs(eval_at(pi - a) - eval_at(a)) <= 1e-3 * scale);
  }
}

TEST_CASE("noise carries the exact prescribed relative size") {
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh gen = generate_disk_mesh_with_shape(0.06, shape);
  const BoundaryParam bp = boundary_param(gen);
  const auto clean = simulate_measurements(shape, gen, make_patterns(6));
  for (double level : {0.01, 0.1}) {
    for (const auto& m : clean) {
      const BoundaryData noisy = add_noise(m, bp, NoiseSpec{level, 77});
      BoundaryData diff = noisy;
      for (int i = 0; i < bp.size(); ++i) diff.values[i] -= m.values[i];
      const double ratio = boundary_l2_norm(diff, bp) / boundary_l2_norm(m, bp);
      CHECK(std::abs(ratio - level) <= 1e-12);
    }
  }
}

TEST_CASE("noise is deterministic per seed and independent per measurement") {
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh gen = generate_disk_mesh_with_shape(0.08, shape);
  const BoundaryParam bp = boundary_param(gen);
  const auto clean = simulate_measurements(shape, gen, make_patterns(4));

  const BoundaryData n1 = add_noise(clean[0], bp, NoiseSpec{0.05, 9});
  const BoundaryData n2 = add_noise(clean[0], bp, NoiseSpec{0.05, 9});
  CHECK(n1.values == n2.values);

  const BoundaryData other_seed = add_noise(clean[0], bp, NoiseSpec{0.05, 10});
  CHECK(n1.values != other_seed.values);

  BoundaryData same_signal = clean[0];
  same_signal.index = clean[1].index;  // different measurement index, same seed
  const BoundaryData other_index = add_noise(same_signal, bp, NoiseSpec{0.05, 9});
  CHECK(n1.values != other_index.values);
}

TEST_CASE("zero noise level is the identity") {
  const ShapeSpec shape = ShapeSpec::default_ellipse();
  const TriMesh gen = generate_disk_mesh_with_shape(0.08, shape);
  const BoundaryParam bp = boundary_param(gen);
  const auto clean = simulate_measurements(shape, gen, make_patterns(2));
  const BoundaryData noisy = add_noise(clean[0], bp, NoiseSpec{0.0, 5});
  CHECK(noisy.values == clean[0].values);
}

TEST_CASE("noise rejects an identically zero signal") {
  const TriMesh gen = generate_disk_mesh(0.2);
  const BoundaryParam bp = boundary_param(gen);
  BoundaryData zero;
  zero.angles = bp.angles;
  zero.values.assign(bp.size(), 0.0);
  zero.index = 1;
  CHECK_THROWS_AS(add_noise(zero, bp, NoiseSpec{0.1, 1}), std::invalid_argument);
}

TEST_CASE("resampling onto the same boundary is the identity") {
  const TriMesh gen = generate_disk_mesh(0.1);
  const BoundaryParam bp = boundary_param(gen);
  auto mesh = std::make_shared<const TriMesh>(gen);
  const NodalField u = forward_solve(mesh, bp, constant_coeff(1.0), make_patterns(2)[0]);
  const BoundaryData tr = boundary_trace(u, bp);
  const BoundaryData rs = resample_boundary(tr, bp);
  for (int i = 0; i < bp.size(); ++i)
    CHECK(rs.values[i] == doctest::Approx(tr.values[i]).epsilon(1e-12));
}

TEST_CASE("resampling a dense cosine is second-order accurate") {
  BoundaryData dense;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    dense.angles.push_back(2.0 * pi * i / n);
    dense.values.push_back(std::cos(dense.angles.back()));
  }
  const TriMesh target = generate_disk_mesh(0.1);
  const BoundaryParam bp = boundary_param(target);
  const BoundaryData out = resample_boundary(dense, bp);
  for (int i = 0; i < bp.size(); ++i)
    CHECK(std::abs(out.values[i] - std::cos(bp.angles[i])) <= 1e-4);
}

TEST_CASE("resampling removes constant shifts") {
  BoundaryData dense;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    dense.angles.push_back(2.0 * pi * i / n);
    dense.values.push_back(std::sin(dense.angles.back()) + 4.2);
  }
  const TriMesh target = generate_disk_mesh(0.15);
  const BoundaryParam bp = boundary_param(target);
  const BoundaryData out = resample_boundary(dense, bp);
  double mean = 0.0;
  for (int i = 0; i < bp.size(); ++i) mean += bp.vertex_weights[i] * out.values[i];
  CHECK(std::abs(mean) <= 1e-12);
}

TEST_CASE("resampling needs at least three samples") {
  BoundaryData two;
  two.angles = {0.0, pi};
  two.values = {1.0, -1.0};
  const TriMesh target = generate_disk_mesh(0.2);
  CHECK_THROWS_AS(resample_boundary(two, boundary_param(target)), std::invalid_argument);
}

TEST_CASE("dataset round trip preserves every bit") {
  test::TempDir dir("dataset");
  const ShapeSpec shape = ShapeSpec::default_circles();
  const TriMesh gen = generate_disk_mesh_with_shape(0.07, shape);
  const Dataset ds = make_dataset(shape, gen, 4, pi / 20.0, NoiseSpec{0.02, 99});
  write_dataset(ds, dir.path.string());
  const Dataset back = read_dataset(dir.path.string());
  CHECK(back.electrode_count == 4);
  CHECK(back.noise.level == 0.02);
  CHECK(back.noise.seed == 99);
  CHECK(same_mesh(back.gen_mesh, ds.gen_mesh));
  REQUIRE(back.clean.size() == ds.clean.size());
  for (size_t j = 0; j < ds.clean.size(); ++j) {
    CHECK(back.clean[j].values == ds.clean[j].values);
    CHECK(back.noisy[j].values == ds.noisy[j].values);
  }
  CHECK(back.shape.to_string() == shape.to_string());
}

TEST_CASE("mesh identity check for the inverse-crime guard") {
  const TriMesh a = generate_disk_mesh(0.2);
  const TriMesh b = a;
  CHECK(same_mesh(a, b));
  const TriMesh c = generate_disk_mesh(0.19);
  CHECK(!same_mesh(a, c));
}

}  // TEST_SUITE
