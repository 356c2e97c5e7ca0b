#include <benchmark/benchmark.h>

#include <random>

#include "flowcat/exact_linalg.hpp"
#include "flowcat/field.hpp"

using namespace flowcat::linalg;

namespace {

IntMatrix random_square(std::mt19937& rng, std::size_t n, int amp) {
  std::uniform_int_distribution<int> entry(-amp, amp);
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = entry(rng);
  return m;
}

}  // namespace

static void SmithNormalForm(benchmark::State& state) {
  std::mt19937 rng(42);
  auto n = static_cast<std::size_t>(state.range(0));
  std::vector<IntMatrix> inputs;
  for (int i = 0; i < 32; ++i) inputs.push_back(random_square(rng, n, 9));
  std::size_t i = 0;
  for (auto _ : state) {
    auto s = smith_normal_form(inputs[i++ % inputs.size()]);
    benchmark::DoNotOptimize(s.D);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(SmithNormalForm)->DenseRange(2, 16, 2)->Complexity();

static void HomologyAt(benchmark::State& state) {
  std::mt19937 rng(7);
  auto n = static_cast<std::size_t>(state.range(0));
  IntMatrix d_out = random_square(rng, n, 3);
  IntMatrix ker = kernel_basis(d_out);
  IntMatrix d_in(n, ker.cols());
  for (std::size_t j = 0; j < d_in.cols(); ++j)
    for (std::size_t i = 0; i < n; ++i) d_in.at(i, j) = ker.at(i, j);
  for (auto _ : state) {
    auto h = homology_at(d_in, d_out);
    benchmark::DoNotOptimize(h.free_rank);
  }
}
BENCHMARK(HomologyAt)->DenseRange(4, 12, 4);

static void FieldRankF2(benchmark::State& state) {
  std::mt19937 rng(11);
  PrimeField f2{2};
  auto n = static_cast<std::size_t>(state.range(0));
  auto m = to_field(f2, random_square(rng, n, 1));
  for (auto _ : state) benchmark::DoNotOptimize(rank(f2, m));
}
BENCHMARK(FieldRankF2)->DenseRange(8, 64, 8);

BENCHMARK_MAIN();
