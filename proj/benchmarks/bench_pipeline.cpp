#include <benchmark/benchmark.h>

#include "flowcat/morse_numeric.hpp"
#include "flowcat/realize.hpp"
#include "flowcat/spectral.hpp"

using namespace flowcat;

static void AnalyzeTorus(benchmark::State& state) {
  for (auto _ : state) {
    morse::MorseSystem sys = morse::analyze(morse::upright_torus_surface());
    benchmark::DoNotOptimize(sys.crits.size());
  }
}
BENCHMARK(AnalyzeTorus);

static void GenerateTorusCategory(benchmark::State& state) {
  morse::MorseSystem sys = morse::analyze(morse::upright_torus_surface());
  for (auto _ : state) {
    FlowCategory f = morse::build_flow_category(sys);
    benchmark::DoNotOptimize(f.moduli0.size());
  }
}
BENCHMARK(GenerateTorusCategory);

static void TorusHomology(benchmark::State& state) {
  FlowCategory f = morse::build_flow_category(morse::analyze(morse::upright_torus_surface()));
  for (auto _ : state) {
    auto h = homology(f);
    benchmark::DoNotOptimize(h.groups.size());
  }
}
BENCHMARK(TorusHomology);

static void LoopSectorPipeline(benchmark::State& state) {
  for (auto _ : state) {
    auto sys = morse::analyze(morse::broken_geodesic_loopspace(static_cast<int>(state.range(0)), 0, 0.1));
    auto h = homology(morse::build_flow_category(sys));
    benchmark::DoNotOptimize(h.groups.size());
  }
}
BENCHMARK(LoopSectorPipeline)->Arg(2)->Arg(3);

static void SpectralPagesTorus(benchmark::State& state) {
  FlowCategory f = morse::build_flow_category(morse::analyze(morse::upright_torus_surface()));
  auto h = spectral::CoefficientTheory::ordinary_over(linalg::FieldSpec::rationals());
  for (auto _ : state) {
    auto tables = spectral::page_tables(f, h);
    benchmark::DoNotOptimize(tables.size());
  }
}
BENCHMARK(SpectralPagesTorus);

BENCHMARK_MAIN();
