// Parallel kernels against the serial element-scatter reference.

#include <random>

#include <benchmark/benchmark.h>

#include "homog/kernels.hpp"
#include "homog/linsolve.hpp"

using namespace homog;

namespace {

struct Problem {
  Grid grid;
  std::vector<Mat> coef;
  std::vector<double> u, out, scratch;

  Problem(int dim, int n) : grid(Grid::cell(dim, n)) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.5, 1.5);
    coef.resize(grid.num_elements());
    for (auto& m : coef) {
      m = Mat::identity(dim, d(rng));
      if (dim == 2) m(0, 1) = m(1, 0) = 0.1 * d(rng);
    }
    u.resize(grid.num_nodes());
    for (double& v : u) v = d(rng);
    out.resize(u.size());
    scratch.resize(static_cast<std::size_t>(dim) * u.size());
  }
};

void BM_apply_parallel(benchmark::State& state) {
  Problem p(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    kernels::apply_operator(p.grid, p.coef, p.u, p.out, p.scratch);
    benchmark::DoNotOptimize(p.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.u.size()));
}

void BM_apply_serial(benchmark::State& state) {
  Problem p(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    kernels::serial::apply_operator_reference(p.grid, p.coef, p.u, p.out);
    benchmark::DoNotOptimize(p.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.u.size()));
}

void BM_dot_parallel(benchmark::State& state) {
  Problem p(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot(p.u, p.u));
}

void BM_dot_serial(benchmark::State& state) {
  Problem p(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::dot(p.u, p.u));
}

void BM_cell_solve(benchmark::State& state) {
  Problem p(2, static_cast<int>(state.range(0)));
  const EllipticOperator op(p.grid, p.coef);
  std::vector<double> b(p.u.size());
  op.apply(p.u, b);
  for (auto _ : state) benchmark::DoNotOptimize(op.solve(b, SolverOptions{1e-10}));
}

}  // namespace

BENCHMARK(BM_apply_parallel)->Args({1, 1 << 16})->Args({2, 64})->Args({2, 256})->Args({2, 1024});
BENCHMARK(BM_apply_serial)->Args({1, 1 << 16})->Args({2, 64})->Args({2, 256})->Args({2, 1024});
BENCHMARK(BM_dot_parallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_dot_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_cell_solve)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
