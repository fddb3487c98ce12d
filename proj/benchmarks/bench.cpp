#include <benchmark/benchmark.h>

#include <random>

#include "nearperf/generators.hpp"
#include "nearperf/ladic.hpp"
#include "nearperf/linalg.hpp"
#include "nearperf/torsion.hpp"

using namespace nearperf;

namespace {

IntMatrix square(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> d(-50, 50);
  IntMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = d(rng);
  return a;
}

std::vector<NearlyPerfectComplex> instances(std::size_t count, bool balanced) {
  std::mt19937_64 rng(17);
  InstanceOptions o;
  o.kind = InstanceKind::nearly_perfect;
  o.max_rank = 3;
  o.balanced = balanced;
  std::vector<NearlyPerfectComplex> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_npc(rng, o));
  return out;
}

void BM_Snf(benchmark::State& st) {
  const IntMatrix a = square(std::size_t(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(snf(a));
}
BENCHMARK(BM_Snf)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_Chi(benchmark::State& st) {
  const auto ns = instances(16, false);
  std::size_t k = 0;
  for (auto _ : st) benchmark::DoNotOptimize(chi(ns[k++ % ns.size()]));
}
BENCHMARK(BM_Chi);

void BM_ChiL(benchmark::State& st) {
  const auto ns = instances(16, false);
  std::size_t k = 0;
  for (auto _ : st) benchmark::DoNotOptimize(chi_l(ns[k++ % ns.size()], Int(st.range(0))));
}
BENCHMARK(BM_ChiL)->Arg(2)->Arg(7);

void BM_ChiRelPerfect(benchmark::State& st) {
  std::mt19937_64 rng(5);
  InstanceOptions o;
  o.length = int(st.range(0));
  o.max_rank = 4;
  o.balanced = true;
  const BoundedComplex p = random_complex(rng, o);
  const Filtration f = random_filtration(rng, p);
  const GradedTrivialization l = random_trivialization(rng, p, f);
  for (auto _ : st) benchmark::DoNotOptimize(chi_rel_perfect(p, f, l));
}
BENCHMARK(BM_ChiRelPerfect)->Arg(2)->Arg(4)->Arg(6);

void BM_ChiRelNpc(benchmark::State& st) {
  const auto ns = instances(8, true);
  std::vector<RatMatrix> lambdas;
  std::mt19937_64 rng(9);
  for (const auto& n : ns) lambdas.push_back(random_invertible_rational(rng, trivialization_shape(n).first));
  std::size_t k = 0;
  for (auto _ : st) {
    const std::size_t i = k++ % ns.size();
    benchmark::DoNotOptimize(chi_rel_npc(ns[i], lambdas[i]));
  }
}
BENCHMARK(BM_ChiRelNpc);

}  // namespace

BENCHMARK_MAIN();
