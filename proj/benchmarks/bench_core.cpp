#include <benchmark/benchmark.h>

#include <random>

#include "coopdiss/dynamics.hpp"
#include "coopdiss/linalg.hpp"
#include "coopdiss/observables.hpp"
#include "coopdiss/scenario.hpp"

using namespace coopdiss;

namespace {

ComplexMatrix random_hermitian(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = g(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = Complex(g(rng), g(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

ModelOperators qubits(std::size_t n) {
  auto spec = qubit_chain(n);
  spec.collective_channels.push_back({0.001, std::vector<Complex>(n, 1.0), {}});
  for (std::size_t j = 0; j < n; ++j) spec.local_channels.push_back({5e-5, j, {}});
  return build_model(spec);
}

void BM_HermitianEigen(benchmark::State& state) {
  const auto m = random_hermitian(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eigen(m));
}
BENCHMARK(BM_HermitianEigen)->Arg(4)->Arg(16)->Arg(32)->Arg(64);

void BM_LindbladRhs(benchmark::State& state) {
  const auto model = qubits(static_cast<std::size_t>(state.range(0)));
  const LindbladGenerator gen(model);
  ComplexMatrix rho = ComplexMatrix::identity(model.dim);
  rho *= Complex(1.0 / static_cast<double>(model.dim));
  ComplexMatrix out(model.dim, model.dim);
  for (auto _ : state) {
    gen.apply(rho, out);
    benchmark::DoNotOptimize(out.data().data());
  }
}
BENCHMARK(BM_LindbladRhs)->DenseRange(2, 5);

void BM_LogNegativity(benchmark::State& state) {
  const DimsLayout layout({2, 4});
  auto m = random_hermitian(8, 2);
  ComplexMatrix rho = m * m;
  rho *= Complex(1.0) / rho.trace();
  for (auto _ : state) benchmark::DoNotOptimize(log_negativity(rho, layout, {{0}, {1}}));
}
BENCHMARK(BM_LogNegativity);

void BM_DarkSubspace(benchmark::State& state) {
  const auto model = qubits(5);
  for (auto _ : state) benchmark::DoNotOptimize(dark_subspace(model, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DarkSubspace)->Arg(1)->Arg(2);

void BM_EvolvePreset(benchmark::State& state, const char* name, std::size_t initial) {
  const Scenario s = load_preset(name);
  const auto model = build_model(s.system);
  const ComplexMatrix rho0 = build_initial_state(s.initial_states.at(initial), model.layout);
  const auto grid = uniform_grid(s.time.horizon * s.time_scale(), s.time.points);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(model, rho0, grid, s.integrator));
}
BENCHMARK_CAPTURE(BM_EvolvePreset, fig2_10, "fig2", 1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvolvePreset, fig3c_10, "fig3c", 1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvolvePreset, clockwork, "clockwork", 0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
