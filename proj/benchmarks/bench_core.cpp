#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hmflow/field_synthesis.hpp"
#include "hmflow/monitors.hpp"
#include "hmflow/null_control.hpp"
#include "hmflow/pde.hpp"

using namespace hmflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

DirectorField tilted(const GridPtr& g) {
  DirectorField d(g);
  for (int i = 0; i < g->count(); ++i) {
    const double a = 0.5 * std::cos(kPi * g->x(i % g->nx));
    d.node(i)[0] = std::sin(a);
    d.node(i)[2] = std::cos(a);
  }
  return d;
}

ChartField chart_modes(const GridPtr& g, double amp) {
  ChartField v(g);
  for (int i = 0; i < g->count(); ++i) {
    const double x = g->x(i % g->nx);
    v.node(i)[0] = amp * std::cos(kPi * x);
    v.node(i)[1] = amp * 0.5 * std::cos(2.0 * kPi * x);
  }
  return v;
}
}  // namespace

static void BM_DirectorStep1D(benchmark::State& state) {
  const GridPtr g = make_grid_1d(static_cast<int>(state.range(0)));
  const Stepper st(g, 1e-4);
  DirectorField d = tilted(g);
  const MagneticField h = uniform_field(g, 5.0, {0.0, 0.0, 1.0});
  for (auto _ : state) {
    st.step_director(d, h);
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_DirectorStep1D)->Arg(201)->Arg(801);

static void BM_DirectorStep2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridPtr g = make_grid_2d(n, n);
  const Stepper st(g, 1e-4);
  DirectorField d = tilted(g);
  const MagneticField h = uniform_field(g, 5.0, {0.0, 0.0, 1.0});
  for (auto _ : state) {
    st.step_director(d, h);
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_DirectorStep2D)->Arg(65)->Arg(129);

static void BM_ChartStep1D(benchmark::State& state) {
  const GridPtr g = make_grid_1d(static_cast<int>(state.range(0)));
  const Stepper st(g, 1e-4);
  ChartField v = chart_modes(g, 0.1);
  for (auto _ : state) {
    st.step_chart(v, nullptr);
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_ChartStep1D)->Arg(201)->Arg(801);

static void BM_DiffusionSolve2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridPtr g = make_grid_2d(n, n);
  const DiffusionSolver solver(g, 1e-4);
  std::vector<double> u(static_cast<std::size_t>(3) * g->count(), 1.0);
  for (auto _ : state) {
    solver.solve_inplace(u.data(), 3);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_DiffusionSolve2D)->Arg(65)->Arg(129)->Arg(257);

static void BM_SynthesizeField(benchmark::State& state) {
  const GridPtr g = make_grid_1d(static_cast<int>(state.range(0)));
  const ChartField v = chart_modes(g, 0.3);
  ControlDensity f(g);
  for (int i = 0; i < g->count(); ++i) {
    if (!g->in_omega(i)) continue;
    f.node(i)[0] = 0.5;
    f.node(i)[1] = -0.25;
  }
  for (auto _ : state) {
    MagneticField h = synthesize_field(v, f);
    benchmark::DoNotOptimize(h.data.data());
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_SynthesizeField)->Arg(201)->Arg(801);

// One evaluation of the penalized cost and its adjoint gradient: the unit of
// work inside every conjugate-gradient iteration of the null-control solver.
static void BM_CostGradient(benchmark::State& state) {
  const GridPtr g = make_grid_1d(201);
  const int steps = static_cast<int>(state.range(0));
  const Stepper st(g, 1e-3);
  const ChartField v = chart_modes(g, 0.05);
  const std::vector<std::vector<Mat2>> a(static_cast<std::size_t>(steps),
                                         coefficient_matrix(v));
  LinearState y0(g);
  for (int i = 0; i < g->count(); ++i) {
    y0.node(i)[0] = 0.1 * std::cos(kPi * g->x(i));
  }
  const std::vector<ControlDensity> u(static_cast<std::size_t>(steps), ControlDensity(g));
  for (auto _ : state) {
    CostGradient cg = hum_cost_gradient(st, a, y0, u, 1e-6);
    benchmark::DoNotOptimize(cg.cost);
  }
  state.SetItemsProcessed(state.iterations() * steps * g->count());
}
BENCHMARK(BM_CostGradient)->Arg(25)->Arg(50);

static void BM_EnergyQuadrature(benchmark::State& state) {
  const GridPtr g = make_grid_1d(static_cast<int>(state.range(0)));
  const DirectorField d = tilted(g);
  const MagneticField h = uniform_field(g, 5.0, {0.0, 0.0, 1.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy(d, h));
  }
  state.SetItemsProcessed(state.iterations() * g->count());
}
BENCHMARK(BM_EnergyQuadrature)->Arg(201)->Arg(801);

BENCHMARK_MAIN();
