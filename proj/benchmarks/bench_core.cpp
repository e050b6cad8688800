#include <benchmark/benchmark.h>

#include <memory>

#include "eitrec/adjoint.hpp"
#include "eitrec/optimizer.hpp"
#include "eitrec/synth.hpp"

using namespace eit;

namespace {

std::shared_ptr<const TriMesh> bench_mesh(double h) {
  static std::map<double, std::shared_ptr<const TriMesh>> cache;
  auto it = cache.find(h);
  if (it == cache.end())
    it = cache.emplace(h, std::make_shared<const TriMesh>(generate_disk_mesh(h))).first;
  return it->second;
}

void BM_generate_disk_mesh(benchmark::State& state) {
  const double h = 1.0 / state.range(0);
  for (auto _ : state) {
    TriMesh m = generate_disk_mesh(h);
    benchmark::DoNotOptimize(m.vertices.data());
  }
}
BENCHMARK(BM_generate_disk_mesh)->Arg(10)->Arg(20)->Arg(40);

void BM_assemble_stiffness(benchmark::State& state) {
  auto mesh = bench_mesh(1.0 / state.range(0));
  NodalField q(mesh);
  for (int i = 0; i < q.size(); ++i) q.values[i] = 0.3 - norm(mesh->vertices[i]);
  const CoeffFn sigma = sigma_of_q(q, 0.01);
  for (auto _ : state) {
    SparseMatrix A = assemble_stiffness(*mesh, sigma);
    benchmark::DoNotOptimize(A.values().data());
  }
  state.SetItemsProcessed(state.iterations() * mesh->triangle_count());
}
BENCHMARK(BM_assemble_stiffness)->Arg(20)->Arg(40);

void BM_neumann_factorize_and_solve(benchmark::State& state) {
  auto mesh = bench_mesh(1.0 / state.range(0));
  const BoundaryParam bp = boundary_param(*mesh);
  const SparseMatrix A = assemble_stiffness(*mesh, constant_coeff(1.4));
  const auto load = assemble_pattern_load(*mesh, bp, make_patterns(2)[0]);
  for (auto _ : state) {
    ConstrainedNeumannSolver solver(mesh, bp, A);
    NodalField u = solver.solve(load);
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_neumann_factorize_and_solve)->Arg(20)->Arg(30);

void BM_neumann_resolve(benchmark::State& state) {
  auto mesh = bench_mesh(1.0 / state.range(0));
  const BoundaryParam bp = boundary_param(*mesh);
  const SparseMatrix A = assemble_stiffness(*mesh, constant_coeff(1.4));
  const ConstrainedNeumannSolver solver(mesh, bp, A);
  const auto load = assemble_pattern_load(*mesh, bp, make_patterns(2)[0]);
  for (auto _ : state) {
    NodalField u = solver.solve(load);
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_neumann_resolve)->Arg(20)->Arg(30);

void BM_gradient_evaluation(benchmark::State& state) {
  auto mesh = bench_mesh(1.0 / state.range(0));
  const BoundaryParam bp = boundary_param(*mesh);
  const SparseMatrix B = assemble_boundary_mass(*mesh, bp);
  const LevelSetOperator aux(mesh, 0.001);
  const auto patterns = make_patterns(6);
  std::vector<std::vector<double>> loads, m_nodal;
  for (const auto& p : patterns) loads.push_back(assemble_pattern_load(*mesh, bp, p));

  const NodalField f = initial_control(mesh);
  const NodalField q = aux.solve(f);
  SparseMatrix A = assemble_stiffness(*mesh, sigma_of_q(q, 0.01));
  auto op = std::make_unique<ConstrainedNeumannSolver>(mesh, bp, std::move(A));
  std::vector<NodalField> u;
  for (const auto& load : loads) {
    u.push_back(op->solve(load));
    m_nodal.push_back(u.back().values);  // zero-residual bundle is fine for timing
  }
  for (auto _ : state) {
    GradChain chain(*op, q, 0.01, u, m_nodal);
    AdjointBundle bundle = compute_gradient(chain, aux, B);
    benchmark::DoNotOptimize(bundle.grad.values.data());
  }
}
BENCHMARK(BM_gradient_evaluation)->Arg(20)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
