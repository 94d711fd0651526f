#include <benchmark/benchmark.h>

#include "qolat/meanfield.hpp"
#include "qolat/scattering.hpp"
#include "qolat/solvers.hpp"
#include "qolat/trajectories.hpp"

using namespace qolat;

static void BM_LanczosHalfFilledRing(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  auto basis = build_basis(LatticeSpec::fermions(M, M / 2, M / 2));
  const auto H = build_hamiltonian(basis, 1.0, -10.0);
  SolverOptions o;
  o.method = SolverMethod::lanczos;
  for (auto _ : state) benchmark::DoNotOptimize(ground_state(H, o).energy);
  state.counters["dim"] = static_cast<double>(basis->dimension());
}
BENCHMARK(BM_LanczosHalfFilledRing)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_HamiltonianBuild(benchmark::State& state) {
  auto basis = build_basis(LatticeSpec::fermions(8, 4, 4));
  for (auto _ : state) benchmark::DoNotOptimize(build_hamiltonian(basis, 1.0, 2.0).matrix().nonZeros());
}
BENCHMARK(BM_HamiltonianBuild)->Unit(benchmark::kMillisecond);

static void BM_AngularScan(benchmark::State& state) {
  auto basis = build_basis(LatticeSpec::fermions(6, 3, 3));
  const auto gs = ground_manifold(build_hamiltonian(basis, 1.0, 0.0));
  const auto grid = angle_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(angular_scan(gs.states, ProbeGeometry{}, grid).rows.size());
}
BENCHMARK(BM_AngularScan)->Arg(361)->Arg(3601)->Unit(benchmark::kMillisecond);

static void BM_TrajectoryEnsemble(benchmark::State& state) {
  const auto prior = DiscreteDistribution::uniform(-4, 4);
  TrajectoryOptions o{0.3, 1.0, 1.0, {0.5, 1.0}};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_ensemble(prior, o, 1, n).size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_TrajectoryEnsemble)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_SelfConsistentScan(benchmark::State& state) {
  std::vector<double> mu;
  for (int k = 0; k <= 600; ++k) mu.push_back(0.005 * k);
  const std::vector<double> alphas{0.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        phase_diagram(mu, alphas, QuantumLatticeParams{}, MeanFieldMethod::selfconsistent).cells.size());
  }
}
BENCHMARK(BM_SelfConsistentScan)->Unit(benchmark::kMillisecond);

static void BM_AtomicLimitED(benchmark::State& state) {
  const auto p = QuantumLatticeParams::from_gamma(0.0, 2.0, static_cast<int>(state.range(0)));
  std::vector<double> mu;
  for (int k = 0; k <= 3000; ++k) mu.push_back(0.001 * k);
  for (auto _ : state) benchmark::DoNotOptimize(atomic_limit_ed(p, mu).size());
}
BENCHMARK(BM_AtomicLimitED)->Arg(4)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
