#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "etale/invsgp.hpp"

using namespace etale;
using namespace etale::invsgp;

namespace {

Digraph one_edge() { return Digraph{{"A", "B"}, {{"e", 0, 1}}}; }

// Oracle: Green's D-relation on nonzero idempotents, e D f iff some s has
// s*s = e and ss* = f.
std::vector<std::set<std::size_t>> green_d_classes(const InverseSemigroup &s) {
  std::vector<std::set<std::size_t>> classes;
  for (std::size_t e : s.nonzero_idempotents()) {
    std::set<std::size_t> cls;
    for (std::size_t t = 0; t < s.size(); ++t)
      if (s.source_idempotent(t) == e)
        cls.insert(s.range_idempotent(t));
    if (std::find(classes.begin(), classes.end(), cls) == classes.end())
      classes.push_back(cls);
  }
  return classes;
}

std::vector<std::set<std::size_t>> as_sets(const IdempotentOrbits &o) {
  std::vector<std::set<std::size_t>> out;
  for (const auto &orb : o.orbits)
    out.emplace_back(orb.begin(), orb.end());
  return out;
}

Digraph random_dag(std::mt19937_64 &rng, std::size_t max_v, std::size_t max_e) {
  Digraph g;
  std::size_t n = 1 + rng() % max_v;
  for (std::size_t v = 0; v < n; ++v)
    g.vertices.push_back("v" + std::to_string(v));
  std::size_t m = rng() % (max_e + 1);
  for (std::size_t k = 0; k < m && n > 1; ++k) {
    std::size_t a = rng() % n, b = rng() % n;
    if (a == b)
      continue;
    g.edges.push_back({"e" + std::to_string(k), std::min(a, b), std::max(a, b)});
  }
  return g;
}

}  // namespace

TEST_CASE("validate: symmetric inverse monoid and semilattices pass") {
  auto im2 = symmetric_inverse_monoid(2);
  CHECK(im2.semigroup.size() == 7);
  CHECK(validate(im2.semigroup).valid);
  CHECK(validate(powerset_semilattice(2)).valid);
  CHECK(validate(chain_semilattice(4)).valid);
  CHECK(validate(group_with_zero(FiniteGroup::cyclic(3))).valid);
}

TEST_CASE("validate: non-associative table is rejected with a witness") {
  // a b = a but (b b) ... constructed: product table on {x, y} with x*x = y, others x.
  InverseSemigroup bad({"x", "y"}, std::nullopt, {{1, 0}, {0, 0}}, {0, 1});
  auto r = validate(bad);
  REQUIRE_FALSE(r.valid);
  CHECK(r.violation->axiom == "associativity");
  CHECK(r.violation->witness.size() == 3);
}

TEST_CASE("validate: bad star is rejected") {
  auto s = powerset_semilattice(1);
  InverseSemigroup bad(s.names(), s.zero(), s.product(), {1, 1});
  CHECK_FALSE(validate(bad).valid);
}

TEST_CASE("idempotents") {
  auto sl = powerset_semilattice(2);
  CHECK(sl.nonzero_idempotents().size() == 3);
  auto gs = graph_inverse_semigroup(one_edge());
  std::set<std::string> ex;
  for (auto e : gs.nonzero_idempotents())
    ex.insert(gs.name(e));
  CHECK(ex == std::set<std::string>{"A", "B", "e.e*"});
  auto gz = group_with_zero(FiniteGroup::cyclic(2));
  REQUIRE(gz.nonzero_idempotents().size() == 1);
  CHECK(gz.name(gz.nonzero_idempotents()[0]) == "g0");
}

TEST_CASE("stabilizers") {
  auto sl = chain_semilattice(3);
  for (auto e : sl.nonzero_idempotents())
    CHECK(stabilizer_subgroup(sl, e).group.is_trivial());
  auto gs = graph_inverse_semigroup(one_edge());
  for (auto e : gs.nonzero_idempotents())
    CHECK(stabilizer_subgroup(gs, e).group.is_trivial());
  auto gz = group_with_zero(FiniteGroup::cyclic(2));
  auto st = stabilizer_subgroup(gz, *gz.index_of("g0"));
  CHECK(st.group.order() == 2);
  CHECK_THROWS_AS(stabilizer_subgroup(gz, 0), std::invalid_argument);
  CHECK_THROWS_AS(stabilizer_subgroup(gs, *gs.index_of("e")), std::invalid_argument);
}

TEST_CASE("orbits on idempotents") {
  auto sl = powerset_semilattice(3);
  CHECK(orbits_on_idempotents(sl).count() == 7);
  auto gs = graph_inverse_semigroup(one_edge());
  auto o = orbits_on_idempotents(gs);
  REQUIRE(o.count() == 2);
  CHECK(o.orbits[0] == std::vector<std::size_t>{*gs.index_of("A")});
  std::set<std::string> second;
  for (auto e : o.orbits[1])
    second.insert(gs.name(e));
  CHECK(second == std::set<std::string>{"B", "e.e*"});
  CHECK(orbits_on_idempotents(group_with_zero(FiniteGroup::cyclic(4))).count() == 1);
}

TEST_CASE("graph inverse semigroup shapes") {
  auto single = graph_inverse_semigroup(Digraph{{"v"}, {}});
  CHECK(single.size() == 2);
  auto gs = graph_inverse_semigroup(one_edge());
  CHECK(gs.nonzero_elements().size() == 5);
  std::set<std::string> names(gs.names().begin(), gs.names().end());
  CHECK(names == std::set<std::string>{"0", "A", "B", "e", "e*", "e.e*"});
  auto e = *gs.index_of("e");
  CHECK(gs.mul(gs.star(e), e) == *gs.index_of("B"));
  CHECK(gs.mul(e, gs.star(e)) == *gs.index_of("e.e*"));
  auto two = graph_inverse_semigroup(Digraph{{"A", "B"}, {}});
  CHECK(two.mul(1, 2) == 0);
  Digraph cyc{{"A", "B"}, {{"e", 0, 1}, {"f", 1, 0}}};
  CHECK_THROWS_AS(graph_inverse_semigroup(cyc), std::invalid_argument);
}

TEST_CASE("weak semilattice") {
  auto sl = powerset_semilattice(2);
  auto r = weak_semilattice_check(sl);
  CHECK(r.holds);
  for (const auto &lb : r.pairs) {
    REQUIRE(lb.generators.size() == 1);
    CHECK(lb.generators[0] == sl.mul(lb.s, lb.t));
  }
  auto gs = graph_inverse_semigroup(one_edge());
  auto e = *gs.index_of("e");
  auto rg = weak_semilattice_check(gs);
  CHECK(rg.holds);
  for (const auto &lb : rg.pairs)
    if (lb.s == e && lb.t == e)
      CHECK(lb.generators == std::vector<std::size_t>{e});
}

TEST_CASE("order-preserving injections") {
  auto poi3 = order_preserving_injections(3);
  CHECK(poi3.semigroup.size() == 20);
  CHECK(validate(poi3.semigroup).valid);
  for (auto e : poi3.semigroup.nonzero_idempotents())
    CHECK(stabilizer_subgroup(poi3.semigroup, e).group.is_trivial());
  // Orbits correspond to domain sizes 1..3.
  CHECK(orbits_on_idempotents(poi3.semigroup).count() == 3);
}

TEST_CASE("closure of partial bijections") {
  auto s = from_partial_bijections(3, {{1, 2, -1}});
  CHECK(validate(s.semigroup).valid);
  CHECK(s.semigroup.zero() == std::optional<std::size_t>{0});
  CHECK_THROWS_AS(from_partial_bijections(2, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("property: natural order is a partial order, idempotents commute") {
  std::vector<InverseSemigroup> corpus{powerset_semilattice(3), symmetric_inverse_monoid(3).semigroup,
                                       graph_inverse_semigroup(one_edge()),
                                       group_with_zero(FiniteGroup::cyclic(3)),
                                       order_preserving_injections(3).semigroup};
  for (const auto &s : corpus) {
    const std::size_t n = s.size();
    for (std::size_t a = 0; a < n; ++a) {
      REQUIRE(s.leq(a, a));
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && s.leq(a, b))
          REQUIRE_FALSE(s.leq(b, a));
        for (std::size_t c = 0; c < n; ++c)
          if (s.leq(a, b) && s.leq(b, c))
            REQUIRE(s.leq(a, c));
      }
    }
    for (auto e : s.nonzero_idempotents()) {
      auto st = stabilizer_subgroup(s, e);
      REQUIRE(st.elements[st.group.identity()] == e);
    }
    REQUIRE(as_sets(orbits_on_idempotents(s)) == green_d_classes(s));
  }
}

TEST_CASE("property: random acyclic graphs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = random_dag(rng, 5, 6);
    auto s = graph_inverse_semigroup(g);
    REQUIRE(validate(s).valid);
    auto o = orbits_on_idempotents(s);
    REQUIRE(o.count() == g.vertices.size());
    REQUIRE(as_sets(o) == green_d_classes(s));
    for (auto e : s.nonzero_idempotents())
      REQUIRE(stabilizer_subgroup(s, e).group.is_trivial());
  }
}

TEST_CASE("relabel preserves validity") {
  auto s = symmetric_inverse_monoid(2).semigroup;
  std::vector<std::size_t> perm(s.size());
  for (std::size_t k = 0; k < perm.size(); ++k)
    perm[k] = perm.size() - 1 - k;
  auto r = relabel(s, perm);
  CHECK(validate(r).valid);
  CHECK(orbits_on_idempotents(r).count() == orbits_on_idempotents(s).count());
}

TEST_CASE("finite groups") {
  auto c6 = FiniteGroup::cyclic(6);
  CHECK(c6.subgroups().size() == 4);
  CHECK(isomorphic(c6, FiniteGroup::direct_product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3))));
  CHECK_FALSE(isomorphic(FiniteGroup::cyclic(4), FiniteGroup::direct_product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2))));
  CHECK_THROWS_AS(FiniteGroup({{0, 0}, {0, 1}}), std::invalid_argument);
  auto s3 = symmetric_inverse_monoid(3).semigroup;
  auto full = *s3.index_of("[0,1,2]");
  auto st = stabilizer_subgroup(s3, full);
  CHECK(st.group.order() == 6);
  CHECK_FALSE(st.group.is_abelian());
  CHECK(st.group.subgroups().size() == 6);
}
