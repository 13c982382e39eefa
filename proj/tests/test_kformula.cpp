#include <doctest.h>

#include <numeric>

#include "etale/corpus.hpp"
#include "etale/gmodule.hpp"
#include "etale/homology.hpp"
#include "etale/kformula.hpp"

using namespace etale;
using namespace etale::kformula;
using zlinalg::Int;

namespace {

FgAbGroup z(std::size_t r = 1) { return FgAbGroup::free(r); }

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

invsgp::Digraph single_vertex() {
  invsgp::Digraph g;
  g.vertices = {"v"};
  return g;
}

}  // namespace

TEST_CASE("group K-theory table") {
  auto t = group_k_lookup({GroupKind::trivial, 0});
  CHECK(t.k0.isomorphic(z()));
  CHECK(t.k1.is_trivial());
  CHECK_FALSE(t.provenance.empty());
  CHECK(group_k_lookup({GroupKind::free_abelian, 0}).isomorphic(t));
  for (std::size_t k = 1; k <= 6; ++k) {
    std::size_t even = 0, odd = 0;
    for (std::size_t j = 0; j <= k; ++j)
      (j % 2 == 0 ? even : odd) += binomial(k, j);
    auto c = group_k_lookup({GroupKind::free_abelian, k});
    CHECK(c.k0.isomorphic(z(even)));
    CHECK(c.k1.isomorphic(z(odd)));
  }
  auto f2 = group_k_lookup({GroupKind::free, 2});
  CHECK(f2.k0.isomorphic(z()));
  CHECK(f2.k1.isomorphic(z(2)));
  CHECK(recognize(FiniteGroup::trivial()).has_value());
  CHECK_FALSE(recognize(FiniteGroup::cyclic(3)).has_value());
}

TEST_CASE("stabilizer sum: semilattices and graph semigroups") {
  corpus::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = corpus::random_semilattice(rng);
    auto r = corollary_b(s);
    CHECK(r.total.k0.isomorphic(z(s.nonzero_idempotents().size())));
    CHECK(r.total.k1.is_trivial());
    CHECK(r.orbits.size() == s.nonzero_idempotents().size());
    CHECK_FALSE(r.assumptions.empty());
  }
  for (int trial = 0; trial < 10; ++trial) {
    auto g = corpus::random_dag(rng);
    auto r = corollary_b(invsgp::graph_inverse_semigroup(g));
    CHECK(r.total.k0.isomorphic(z(g.vertices.size())));
    CHECK(r.total.k1.is_trivial());
  }
  auto one = corollary_b(invsgp::graph_inverse_semigroup(corpus::one_edge_graph()));
  CHECK(one.total.k0.isomorphic(z(2)));
}

TEST_CASE("stabilizer sum refuses torsion") {
  auto s = invsgp::group_with_zero(FiniteGroup::cyclic(2));
  CHECK_THROWS_AS(corollary_b(s), HypothesisRefusal);
  try {
    corollary_b(invsgp::group_with_zero(FiniteGroup::cyclic(6)));
    FAIL("expected refusal");
  } catch (const HypothesisRefusal &e) {
    CHECK(std::string(e.what()).find("order 2") != std::string::npos);
  }
}

TEST_CASE("property: stabilizer sum is invariant under relabeling") {
  corpus::Rng rng(8);
  for (const auto &[name, s] : corpus::torsion_free_semigroups()) {
    CAPTURE(name);
    auto base = corollary_b(s);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<std::size_t> perm(s.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t k = perm.size(); k > 1; --k)
        std::swap(perm[k - 1], perm[rng.below(k)]);
      CHECK(corollary_b(invsgp::relabel(s, perm)).total.isomorphic(base.total));
    }
  }
}

TEST_CASE("collapse read-off") {
  zlinalg::GradedGroup h;
  h.set(0, z(3));
  h.set(1, z(0));
  h.set(2, z(0));
  auto k = hk_collapse(h);
  REQUIRE(k.has_value());
  CHECK(k->k0.isomorphic(z(3)));
  CHECK(k->k1.is_trivial());
  h.set(1, z());
  CHECK(hk_collapse(h)->k1.isomorphic(z()));
  h.set(2, FgAbGroup::cyclic(Int(2)));
  CHECK_FALSE(hk_collapse(h).has_value());
}

TEST_CASE("collapsed discrete homology matches the stabilizer sum") {
  for (const auto &[name, s] : corpus::torsion_free_semigroups()) {
    CAPTURE(name);
    auto d = groupoid::discrete_groupoid(s);
    auto h = homology::homology_table(gmodule::constant_module(d.groupoid, z()), 3);
    auto k = hk_collapse(h);
    REQUIRE(k.has_value());
    CHECK(k->isomorphic(corollary_b(s).total));
  }
}

TEST_CASE("three routes agree on acyclic graphs") {
  auto single = cross_check_toeplitz(single_vertex());
  CHECK(single.expected.k0.isomorphic(z()));
  auto edge = cross_check_toeplitz(corpus::one_edge_graph());
  CHECK(edge.corollary.k0.isomorphic(z(2)));
  auto path = cross_check_toeplitz(corpus::path_graph(3));
  CHECK(path.universal_route->k0.isomorphic(z(3)));
  CHECK(path.discrete_route->k1.is_trivial());
  corpus::Rng rng(99);
  for (int trial = 0; trial < 5; ++trial)
    CHECK_NOTHROW(cross_check_toeplitz(corpus::random_dag(rng)));
  invsgp::Digraph loop;
  loop.vertices = {"a", "b"};
  loop.edges = {{"e", 0, 1}, {"f", 1, 0}};
  CHECK_THROWS_AS(cross_check_toeplitz(loop), std::invalid_argument);
}
