#include <benchmark/benchmark.h>

#include "rdp/capacity.hpp"
#include "rdp/elliptic.hpp"
#include "rdp/measures.hpp"
#include "rdp/relaxed.hpp"

using namespace rdp;

namespace {

Grid cube(int dim, int cells) {
  const AxisRange box[3] = {{0, 1}, {0, 1}, {0, 1}};
  return Grid::build(dim, std::span<const AxisRange>(box, std::size_t(dim)), 1.0 / cells);
}

const Point mid{0.5, 0.5, 0.5};

void BM_Assemble2d(benchmark::State& st) {
  const Grid g = cube(2, int(st.range(0)));
  const NodeSet all = NodeSet::all(g);
  const auto lap = EllipticCoefficients::laplacian(2);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_stiffness(all, lap));
  st.SetItemsProcessed(st.iterations() * std::int64_t(g.node_count()));
}
BENCHMARK(BM_Assemble2d)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Assemble3d(benchmark::State& st) {
  const Grid g = cube(3, int(st.range(0)));
  const NodeSet all = NodeSet::all(g);
  const auto lap = EllipticCoefficients::laplacian(3);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_stiffness(all, lap));
  st.SetItemsProcessed(st.iterations() * std::int64_t(g.node_count()));
}
BENCHMARK(BM_Assemble3d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CgPoisson2d(benchmark::State& st) {
  const Grid g = cube(2, int(st.range(0)));
  RelaxedProblem p;
  p.domain = NodeSet::all(g);
  p.nu = SignedDensity{Field(g, 1.0)};
  for (auto _ : st) benchmark::DoNotOptimize(solve_relaxed(p, 1e-10));
}
BENCHMARK(BM_CgPoisson2d)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_HarmonicCapacity(benchmark::State& st) {
  const int dim = int(st.range(0));
  const Grid g = cube(dim, int(st.range(1)));
  const NodeSet outer = mask(g, Ball{mid, 0.4}), inner = mask(g, Ball{mid, 0.2});
  const CapacitySolver s(outer, EllipticCoefficients::laplacian(dim));
  for (auto _ : st) benchmark::DoNotOptimize(s.harmonic(inner));
}
BENCHMARK(BM_HarmonicCapacity)->Args({2, 128})->Args({2, 256})->Args({3, 32})->Unit(benchmark::kMillisecond);

void BM_MuCapacityDensity(benchmark::State& st) {
  const Grid g = cube(2, int(st.range(0)));
  const NodeSet outer = mask(g, Ball{mid, 0.4}), inner = mask(g, Ball{mid, 0.2});
  const CapacitySolver s(outer, EllipticCoefficients::laplacian(2));
  const Measure mu = make_density(Field(g, 50.0));
  for (auto _ : st) benchmark::DoNotOptimize(s.mu(inner, mu));
}
BENCHMARK(BM_MuCapacityDensity)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_KatoNorm3d(benchmark::State& st) {
  const Grid g = cube(3, int(st.range(0)));
  const SignedDensity nu{Field(g, 1.0)};
  for (auto _ : st) benchmark::DoNotOptimize(kato_norm(nu, Ball{mid, 0.5}));
}
BENCHMARK(BM_KatoNorm3d)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
