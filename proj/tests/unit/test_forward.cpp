#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eitrec/forward.hpp"
#include "eitrec/levelset.hpp"
#include "helpers.hpp"

using namespace eit;

TEST_SUITE("forward") {

TEST_CASE("pattern counts and placement") {
  CHECK(make_patterns(2).size() == 1);
  CHECK(make_patterns(6).size() == 3);
  CHECK_THROWS_AS(make_patterns(3), std::invalid_argument);
  CHECK_THROWS_AS(make_patterns(0), std::invalid_argument);
  CHECK_THROWS_AS(make_patterns(40, pi / 20.0), std::invalid_argument);  // E*width = 2*pi

  const auto ps = make_patterns(6);
  CHECK(ps[0].source_angle == doctest::Approx(pi / 2).epsilon(1e-14));
  CHECK(ps[1].source_angle == doctest::Approx(pi / 2 + pi / 3).epsilon(1e-14));
  CHECK(ps[2].source_angle == doctest::Approx(pi / 2 + 2 * pi / 3).epsilon(1e-14));
  for (const auto& p : ps)
    CHECK(std::abs(std::fmod(p.sink_angle - p.source_angle + 2 * pi, 2 * pi) - pi) < 1e-12);
}

TEST_CASE("current density evaluation") {
  const auto p = make_patterns(2)[0];
  CHECK(g_eval(p, p.source_angle) == 1.0);
  CHECK(g_eval(p, p.source_angle + pi) == -1.0);
  CHECK(g_eval(p, p.source_angle + pi / 2) == 0.0);
  // closed left endpoint, open right endpoint
  CHECK(g_eval(p, p.source_angle - p.width / 2) == 1.0);
  CHECK(g_eval(p, p.source_angle + p.width / 2) == 0.0);
}

TEST_CASE("pattern loads are nearly compatible") {
  for (double h : {0.1, 0.05}) {
    auto m = test::disk(h);
    const BoundaryParam bp = boundary_param(*m);
    for (const auto& p : make_patterns(6)) {
      const auto load = assemble_pattern_load(*m, bp, p);
      double sum = 0.0, total = 0.0;
      for (double v : load) {
        sum += v;
        total += std::abs(v);
      }
      CHECK(total > 0.1);  // both arcs hit the boundary
      CHECK(std::abs(sum) <= h * h);
    }
  }
}

TEST_CASE("forward solve with the analytic cosine flux") {
  auto m = test::disk(0.05);
  const BoundaryParam bp = boundary_param(*m);
  const NodalField u = forward_solve_with_g(m, bp, constant_coeff(1.0),
                                            [](double a) { return std::cos(a); });
  CHECK(test::l2_field_error(u, [](Vec2 p) { return p.x; }) < 2e-3);
}

TEST_CASE("zero current means zero potential") {
  auto m = test::disk(0.15);
  const BoundaryParam bp = boundary_param(*m);
  const NodalField u = forward_solve_with_g(m, bp, constant_coeff(1.0), [](double) { return 0.0; });
  CHECK(u.max_abs() <= 1e-14);
}

TEST_CASE("potential scales inversely with a constant conductivity") {
  auto m = test::disk(0.1);
  const BoundaryParam bp = boundary_param(*m);
  const auto pattern = make_patterns(2)[0];
  const NodalField u1 = forward_solve(m, bp, constant_coeff(1.0), pattern);
  const NodalField u3 = forward_solve(m, bp, constant_coeff(3.0), pattern);
  const double scale = u1.max_abs();
  for (int i = 0; i < u1.size(); ++i)
    CHECK(std::abs(3.0 * u3.values[i] - u1.values[i]) <= 1e-9 * scale);
}

TEST_CASE("boundary trace basics") {
  auto m = test::disk(0.1);
  const BoundaryParam bp = boundary_param(*m);
  const NodalField zero(m, 0.0);
  for (double v : boundary_trace(zero, bp).values) CHECK(v == 0.0);

  NodalField xf(m);
  for (int i = 0; i < xf.size(); ++i) xf.values[i] = m->vertices[i].x;
  const BoundaryData tr = boundary_trace(xf, bp);
  for (int i = 0; i < bp.size(); ++i)
    CHECK(tr.values[i] == doctest::Approx(std::cos(bp.angles[i])).epsilon(1e-10));

  double mean = 0.0;
  for (int i = 0; i < bp.size(); ++i) mean += bp.vertex_weights[i] * tr.values[i];
  CHECK(std::abs(mean) <= 1e-12 * std::max(1.0, *std::max_element(tr.values.begin(),
                                                                  tr.values.end())));
}

TEST_CASE("cost of matching traces is zero and constants integrate exactly") {
  auto m = test::disk(0.05);
  const BoundaryParam bp = boundary_param(*m);
  const SparseMatrix B = assemble_boundary_mass(*m, bp);

  BoundaryData t0;
  t0.angles = bp.angles;
  t0.values.assign(bp.size(), 0.0);
  for (int i = 0; i < bp.size(); ++i) t0.values[i] = std::sin(bp.angles[i]);
  CHECK(cost({t0}, {t0}, *m, bp, B) == 0.0);

  // constant difference of one: J = perimeter / 2, close to pi
  BoundaryData shifted = t0;
  for (double& v : shifted.values) v -= 1.0;
  const double J = cost({t0}, {shifted}, *m, bp, B);
  CHECK(J == doctest::Approx(0.5 * bp.total_length()).epsilon(1e-12));
  CHECK(std::abs(J - pi) < 0.01);

  // doubling the difference quadruples the cost exactly
  BoundaryData shifted2 = t0;
  for (double& v : shifted2.values) v -= 2.0;
  CHECK(cost({t0}, {shifted2}, *m, bp, B) == 4.0 * J);
}

TEST_CASE("cost rejects mismatched measurement counts") {
  auto m = test::disk(0.2);
  const BoundaryParam bp = boundary_param(*m);
  const SparseMatrix B = assemble_boundary_mass(*m, bp);
  BoundaryData d;
  d.angles = bp.angles;
  d.values.assign(bp.size(), 0.0);
  CHECK_THROWS_AS(cost({d, d}, {d}, *m, bp, B), std::invalid_argument);
}

TEST_CASE("cost is invariant under pattern reordering") {
  auto m = test::disk(0.07);
  const BoundaryParam bp = boundary_param(*m);
  const SparseMatrix B = assemble_boundary_mass(*m, bp);
  auto patterns = make_patterns(4);

  // off-center inclusion conductivity
  NodalField q(m);
  for (int i = 0; i < q.size(); ++i)
    q.values[i] = 0.1 - dist(m->vertices[i], {0.3, 0.2});
  const CoeffFn sigma = sigma_of_q(q, 0.05);

  std::vector<BoundaryData> traces, meas;
  for (const auto& p : patterns) {
    const NodalField u = forward_solve(m, bp, sigma, p);
    traces.push_back(boundary_trace(u, bp, p.index));
    BoundaryData fake = traces.back();
    for (double& v : fake.values) v *= 0.9;
    meas.push_back(fake);
  }
  const double J1 = cost(traces, meas, *m, bp, B);
  std::swap(traces[0], traces[1]);
  std::swap(meas[0], meas[1]);
  const double J2 = cost(traces, meas, *m, bp, B);
  CHECK(J1 == doctest::Approx(J2).epsilon(1e-14));
}

TEST_CASE("forward solve only sees the heaviside of q") {
  auto m = test::disk(0.12);
  const BoundaryParam bp = boundary_param(*m);
  const auto pattern = make_patterns(2)[0];
  const NodalField qa(m, -5.0);
  const NodalField qb(m, -3.0);  // different q, same H_alpha = 0 everywhere
  const NodalField ua = forward_solve(m, bp, sigma_of_q(qa, 0.01), pattern);
  const NodalField ub = forward_solve(m, bp, sigma_of_q(qb, 0.01), pattern);
  for (int i = 0; i < ua.size(); ++i) CHECK(ua.values[i] == ub.values[i]);
}

TEST_CASE("symmetric geometry gives mirror-related traces") {
  // sigma = 1, top/bottom electrodes: reflecting across the y axis fixes g,
  // so u(pi - theta) = u(theta); reflecting across the x axis swaps the
  // electrodes, so u(-theta) = -u(theta).
  auto m = test::disk(0.025);
  const BoundaryParam bp = boundary_param(*m);
  const auto pattern = make_patterns(2)[0];
  const NodalField u = forward_solve(m, bp, constant_coeff(1.0), pattern);
  const BoundaryData tr = boundary_trace(u, bp);

  auto eval_at = [&](double angle) {
    double a = std::fmod(angle + 4.0 * pi, 2.0 * pi);
    // piecewise-linear interpolation in angle
    const int n = bp.size();
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

  const double scale = u.max_abs();
  for (double a = 0.05; a < 2.0 * pi; a += 0.37) {
    CHECK(std::abs(eval_at(pi - a) - eval_at(a)) <= 1e-3 * std::max(scale, 1.0));
    CHECK(std::abs(eval_at(-a) + eval_at(a)) <= 1e-3 * std::max(scale, 1.0));
  }
}

}  // TEST_SUITE
