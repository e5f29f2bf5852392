// Serial reference path against the coloured OpenMP path for the cell loops.
#include "mgdwr/adaptivity.hpp"
#include "mgdwr/assembly.hpp"
#include "mgdwr/problems.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace mgdwr;

namespace {

struct Fixture {
    std::shared_ptr<const ProblemDefinition> problem;
    std::shared_ptr<const FeSpace> space;
    std::shared_ptr<const FeSpace> pu;
    std::unique_ptr<AssemblyPlan> plan;
    DiscreteFunction u;
    DiscreteFunction w;

    explicit Fixture(int n)
        : problem(build_plaplace({4.0, 1.0})),
          space(std::make_shared<const FeSpace>(std::make_shared<const Mesh>(Mesh::unit_square(n)), 2)),
          pu(std::make_shared<const FeSpace>(space->mesh_ptr(), 1)),
          plan(std::make_unique<AssemblyPlan>(space, build_constraints(*space, problem->dirichlet()))),
          u(unit_guess(*plan)),
          w(space)
    {
        for (std::size_t i = 0; i < w.coefficients().size(); ++i) w[i] = static_cast<double>(i % 7) * 0.1;
    }
};

Execution exec_of(const benchmark::State& st)
{
    return st.range(1) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_Residual(benchmark::State& st)
{
    const Fixture f(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(assemble_residual(*f.problem, *f.plan, f.u, exec_of(st)));
    st.SetLabel(st.range(1) == 0 ? "serial" : "parallel");
}

void BM_Jacobian(benchmark::State& st)
{
    const Fixture f(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(assemble_jacobian(*f.problem, *f.plan, f.u, exec_of(st)));
    st.SetLabel(st.range(1) == 0 ? "serial" : "parallel");
}

void BM_PrimalResidualPU(benchmark::State& st)
{
    const Fixture f(static_cast<int>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(weighted_primal_residual_pu(*f.problem, f.u, f.w, *f.pu, exec_of(st)));
    st.SetLabel(st.range(1) == 0 ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_Residual)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Jacobian)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PrimalResidualPU)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
