#include <benchmark/benchmark.h>

#include <memory>

#include "dendrite/analysis.hpp"
#include "dendrite/timestepper.hpp"

using namespace dendrite;

namespace {

// Args: cells-per-unit-length selector via h in thousandths, element order.
struct Fixture {
  explicit Fixture(const benchmark::State& state)
      : mc(CaseId::ex2),
        problem(make_discretization(std::make_shared<const Mesh>(study_mesh(mc, state.range(0) / 1000.0)),
                                    static_cast<int>(state.range(1))),
                ModelParameters::nondimensional(), mc) {
    y = problem.interpolate_exact(0.5);
    ydot = Eigen::VectorXd::Zero(y.size());
    ctx.t = 0.5;
  }
  ManufacturedCase mc;
  MixedProblem problem;
  Eigen::VectorXd y, ydot;
  StepContext ctx;
};

void BM_Residual(benchmark::State& state) {
  Fixture f(state);
  for (auto _ : state) benchmark::DoNotOptimize(f.problem.residual(f.y, f.ydot, f.ctx));
  state.counters["dofs"] = f.problem.system_size();
}

void BM_Jacobian(benchmark::State& state) {
  Fixture f(state);
  for (auto _ : state) benchmark::DoNotOptimize(f.problem.jacobian(f.y, f.ydot, f.ctx, 1000.0));
  state.counters["dofs"] = f.problem.system_size();
}

void BM_FactorizeSolve(benchmark::State& state) {
  Fixture f(state);
  const AssembledSystem sys = f.problem.jacobian(f.y, f.ydot, f.ctx, 1000.0);
  for (auto _ : state) {
    LinearSolver solver(sys.layout);
    solver.factorize(sys.matrix);
    benchmark::DoNotOptimize(solver.solve(sys.residual));
  }
  state.counters["dofs"] = f.problem.system_size();
}

void BM_BackSolve(benchmark::State& state) {
  Fixture f(state);
  const AssembledSystem sys = f.problem.jacobian(f.y, f.ydot, f.ctx, 1000.0);
  LinearSolver solver(sys.layout);
  solver.factorize(sys.matrix);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(sys.residual));
}

}  // namespace

BENCHMARK(BM_Residual)->Args({200, 2})->Args({100, 2})->Args({200, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Jacobian)->Args({200, 2})->Args({100, 2})->Args({200, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FactorizeSolve)->Args({200, 2})->Args({100, 2})->Args({200, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackSolve)->Args({200, 2})->Args({100, 2})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
