#include <benchmark/benchmark.h>

#include "etale/corpus.hpp"
#include "etale/correspondence.hpp"
#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/homology.hpp"
#include "etale/kformula.hpp"
#include "etale/specseq.hpp"
#include "etale/zlinalg.hpp"

using namespace etale;
using zlinalg::FgAbGroup;
using zlinalg::IntMatrix;

namespace {

IntMatrix random_matrix(corpus::Rng &rng, std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = static_cast<long>(rng.below(21)) - 10;
  return m;
}

void BM_SmithNormalForm(benchmark::State &state) {
  corpus::Rng rng(1);
  const auto m = random_matrix(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(zlinalg::smith_normal_form(m, zlinalg::kWantUV));
}
BENCHMARK(BM_SmithNormalForm)->Arg(8)->Arg(16)->Arg(32);

void BM_SmithDiagonal(benchmark::State &state) {
  corpus::Rng rng(2);
  const auto m = random_matrix(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(zlinalg::smith_diagonal(m));
}
BENCHMARK(BM_SmithDiagonal)->Arg(8)->Arg(16)->Arg(32);

void BM_CyclicGroupHomology(benchmark::State &state) {
  const auto g = groupoid::group_groupoid(FiniteGroup::cyclic(static_cast<std::size_t>(state.range(0))));
  const auto m = gmodule::constant_module(g, FgAbGroup::free(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(homology::homology_table(m, 4));
}
BENCHMARK(BM_CyclicGroupHomology)->Arg(2)->Arg(3)->Arg(5);

void BM_TorsionCoefficients(benchmark::State &state) {
  const auto g = groupoid::transitive_groupoid(2, FiniteGroup::cyclic(2));
  const auto m = gmodule::constant_module(g, FgAbGroup::cyclic(2));
  for (auto _ : state)
    benchmark::DoNotOptimize(homology::homology_table(m, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_TorsionCoefficients)->Arg(3)->Arg(4);

void BM_OmegaSInducedMap(benchmark::State &state) {
  const auto s = invsgp::graph_inverse_semigroup(corpus::path_graph(static_cast<std::size_t>(state.range(0))));
  const auto c = correspondence::omega_S(s).correspondence;
  const auto a = gmodule::constant_module(c.left(), FgAbGroup::free(1));
  const auto b = gmodule::constant_module(c.right(), FgAbGroup::free(1));
  const auto f = homology::orbit_sum_map(c, gmodule::induce(c, b));
  for (auto _ : state)
    benchmark::DoNotOptimize(homology::induced_map_homology(c, a, b, f, 4));
}
BENCHMARK(BM_OmegaSInducedMap)->Arg(2)->Arg(3)->Arg(4);

void BM_ToeplitzCrossCheck(benchmark::State &state) {
  const auto g = corpus::path_graph(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(kformula::cross_check_toeplitz(g, 4));
}
BENCHMARK(BM_ToeplitzCrossCheck)->Arg(3)->Arg(6);

void BM_FilteredLimitPage(benchmark::State &state) {
  corpus::Rng rng(3);
  const auto fc = corpus::random_filtered_complex(rng, 12, static_cast<int>(state.range(0)));
  const auto ec = specseq::couple_from_filtered_complex(fc);
  for (auto _ : state)
    benchmark::DoNotOptimize(specseq::limit_page(ec));
}
BENCHMARK(BM_FilteredLimitPage)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
