#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "etale/groupoid.hpp"

using namespace etale;
using namespace etale::groupoid;
using namespace etale::invsgp;

namespace {

Digraph one_edge() { return Digraph{{"A", "B"}, {{"e", 0, 1}}}; }

std::size_t nonunit_arrows(const FiniteGroupoid &g) { return g.arrow_count() - g.unit_count(); }

std::vector<std::set<std::string>> unit_orbit_names(const FiniteGroupoid &g) {
  std::vector<std::set<std::string>> out;
  for (const auto &o : orbit_decomposition(g).orbits) {
    std::set<std::string> names;
    for (auto u : o)
      names.insert(g.unit_name(u));
    out.push_back(names);
  }
  return out;
}

std::vector<std::set<std::string>> idempotent_orbit_names(const InverseSemigroup &s) {
  std::vector<std::set<std::string>> out;
  for (const auto &o : orbits_on_idempotents(s).orbits) {
    std::set<std::string> names;
    for (auto e : o)
      names.insert(s.name(e));
    out.push_back(names);
  }
  return out;
}

}  // namespace

TEST_CASE("builders satisfy the axioms") {
  auto p3 = pair_groupoid(3);
  CHECK(p3.unit_count() == 3);
  CHECK(p3.arrow_count() == 9);
  auto z2 = group_groupoid(FiniteGroup::cyclic(2));
  CHECK(z2.arrow_count() == 2);
  auto u = disjoint_union(p3, z2);
  CHECK(u.unit_count() == 4);
  CHECK(u.arrow_count() == 11);
  CHECK_THROWS_AS(u.compose(3, 0), std::invalid_argument);
}

TEST_CASE("build rejects broken composition") {
  CHECK_THROWS_AS(FiniteGroupoid::build({"x"}, {{"g", 0, 0}}, [](std::size_t, std::size_t) { return std::size_t{0}; }),
                  std::invalid_argument);
}

TEST_CASE("transformation groupoids") {
  // trivial semigroup acting as identity
  InverseSemigroup triv({"e"}, std::nullopt, {{0}}, {0});
  SAction a1{triv, {"p", "q"}, {{0, 1}}};
  auto t1 = transformation_groupoid(a1);
  CHECK(t1.groupoid.arrow_count() == 2);
  CHECK(nonunit_arrows(t1.groupoid) == 0);

  auto z2 = group_with_zero(FiniteGroup::cyclic(2));
  // Z/2 without zero acting trivially on a point
  InverseSemigroup g2({"1", "g"}, std::nullopt, {{0, 1}, {1, 0}}, {0, 1});
  SAction a2{g2, {"pt"}, {{0}, {0}}};
  auto t2 = transformation_groupoid(a2);
  CHECK(t2.groupoid.arrow_count() == 2);
  CHECK(isotropy_group(t2.groupoid, 0).group.order() == 2);

  // semilattice {0, e, f, ef=0'} realized as meet table {0, ef, e, f}
  InverseSemigroup sl({"0", "ef", "e", "f"}, std::size_t{0},
                      {{0, 0, 0, 0}, {0, 1, 1, 1}, {0, 1, 2, 1}, {0, 1, 1, 3}}, {0, 1, 2, 3});
  REQUIRE(validate(sl).valid);
  SAction a3{sl, {"1", "2"}, {{-1, -1}, {0, -1}, {0, 1}, {0, -1}}};
  REQUIRE(validate_action(a3).valid);
  auto t3 = transformation_groupoid(a3);
  CHECK(t3.groupoid.unit_count() == 2);
  CHECK(nonunit_arrows(t3.groupoid) == 0);

  SAction bad{sl, {"1", "2"}, {{-1, -1}, {0, -1}, {1, 0}, {0, -1}}};
  CHECK_FALSE(validate_action(bad).valid);
  CHECK_THROWS_AS(transformation_groupoid(bad), std::invalid_argument);
  (void)z2;
}

TEST_CASE("universal groupoid") {
  auto sl = powerset_semilattice(2);
  auto gs = universal_groupoid(sl);
  CHECK(gs.groupoid.unit_count() == 3);
  CHECK(nonunit_arrows(gs.groupoid) == 0);

  auto z3 = universal_groupoid(group_with_zero(FiniteGroup::cyclic(3)));
  CHECK(z3.groupoid.unit_count() == 1);
  CHECK(z3.groupoid.arrow_count() == 3);

  auto s = graph_inverse_semigroup(one_edge());
  auto g = universal_groupoid(s).groupoid;
  CHECK(g.unit_count() == 3);
  CHECK(nonunit_arrows(g) == 2);
  auto e = *g.find_arrow("[e,B]");
  CHECK(g.unit_name(g.source(e)) == "B");
  CHECK(g.unit_name(g.range(e)) == "e.e*");
}

TEST_CASE("discrete groupoid") {
  auto s = graph_inverse_semigroup(one_edge());
  auto d = discrete_groupoid(s).groupoid;
  CHECK(d.unit_count() == 3);
  CHECK(nonunit_arrows(d) == 2);
  auto e = *d.find_arrow("e");
  CHECK(d.unit_name(d.range(e)) == "e.e*");
  CHECK(d.unit_name(d.source(e)) == "B");
  CHECK(nonunit_arrows(discrete_groupoid(chain_semilattice(3)).groupoid) == 0);
  CHECK(discrete_groupoid(group_with_zero(FiniteGroup::cyclic(2))).groupoid.arrow_count() == 2);
}

TEST_CASE("isotropy and restriction") {
  auto p3 = pair_groupoid(3);
  for (std::size_t x = 0; x < 3; ++x)
    CHECK(isotropy_group(p3, x).group.is_trivial());
  CHECK(isotropy_group(group_groupoid(FiniteGroup::cyclic(2)), 0).group.order() == 2);
  auto r = restriction(p3, {0, 2});
  CHECK(r.groupoid.arrow_count() == 4);
  CHECK(find_isomorphism(r.groupoid, pair_groupoid(2)).has_value());
  CHECK(restriction(p3, {}).groupoid.arrow_count() == 0);
  CHECK(restriction(p3, {0, 1, 2}).groupoid.arrow_count() == 9);
  auto gs = universal_groupoid(graph_inverse_semigroup(one_edge())).groupoid;
  for (std::size_t x = 0; x < gs.unit_count(); ++x)
    CHECK(isotropy_group(gs, x).group.is_trivial());
}

TEST_CASE("orbit decomposition") {
  auto u = units_only({"a", "b"});
  CHECK(orbit_decomposition(u).orbits.size() == 2);
  auto p4 = orbit_decomposition(pair_groupoid(4));
  CHECK(p4.orbits.size() == 1);
  CHECK(p4.isotropy[0].group.is_trivial());
  auto s = graph_inverse_semigroup(one_edge());
  CHECK(unit_orbit_names(discrete_groupoid(s).groupoid) == idempotent_orbit_names(s));
}

TEST_CASE("subgroupoid checks closure") {
  auto p3 = pair_groupoid(3);
  auto a01 = *p3.find_arrow("(x0,x1)");
  auto a10 = *p3.find_arrow("(x1,x0)");
  auto sub = subgroupoid(p3, {0, 1, a01, a10});
  CHECK(sub.groupoid.arrow_count() == 4);
  CHECK_THROWS_AS(subgroupoid(p3, {0, 1, a01}), std::invalid_argument);
  CHECK_THROWS_AS(subgroupoid(p3, {a01, a10}), std::invalid_argument);
}

TEST_CASE("property: corpus semigroups") {
  std::vector<InverseSemigroup> corpus{powerset_semilattice(3),
                                       chain_semilattice(4),
                                       graph_inverse_semigroup(one_edge()),
                                       graph_inverse_semigroup(Digraph{{"A", "B", "C"}, {{"e", 0, 1}, {"f", 1, 2}}}),
                                       group_with_zero(FiniteGroup::cyclic(2)),
                                       group_with_zero(FiniteGroup::cyclic(3)),
                                       symmetric_inverse_monoid(2).semigroup,
                                       order_preserving_injections(3).semigroup};
  for (const auto &s : corpus) {
    auto uni = universal_groupoid(s);
    auto tr = transformation_groupoid(spectral_action(s));
    REQUIRE(find_isomorphism(uni.groupoid, tr.groupoid).has_value());
    auto disc = discrete_groupoid(s);
    REQUIRE(unit_orbit_names(disc.groupoid) == idempotent_orbit_names(s));
    auto od = orbit_decomposition(disc.groupoid);
    REQUIRE(od.conjugation_verified);
    for (std::size_t k = 0; k < od.orbits.size(); ++k) {
      auto st = stabilizer_subgroup(s, disc.unit_point[od.orbits[k].front()]);
      REQUIRE(isomorphic(st.group, od.isotropy[k].group));
    }
    REQUIRE(is_proper(uni.groupoid));
  }
}

TEST_CASE("property: natural actions of partial-bijection semigroups") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    std::vector<PartialMap> gens;
    for (int k = 0; k < 2; ++k) {
      PartialMap m(n, -1);
      std::vector<int> img(n);
      std::iota(img.begin(), img.end(), 0);
      std::shuffle(img.begin(), img.end(), rng);
      for (std::size_t x = 0; x < n; ++x)
        if (rng() % 3)
          m[x] = img[x];
      gens.push_back(m);
    }
    auto p = from_partial_bijections(n, gens);
    auto full = natural_action(p);
    bool degenerate = false;
    for (std::size_t x = 0; x < n; ++x) {
      bool covered = false;
      for (const auto &m : full.maps)
        covered = covered || m[x] >= 0;
      degenerate = degenerate || !covered;
    }
    CHECK(validate_action(full).valid == !degenerate);
    auto a = restrict_to_support(full);
    REQUIRE(validate_action(a).valid);
    auto t = transformation_groupoid(a);
    REQUIRE(t.groupoid.unit_count() == a.points.size());
    REQUIRE(find_isomorphism(t.groupoid, t.groupoid).has_value());
  }
}

TEST_CASE("find_isomorphism rejects non-isomorphic groupoids") {
  CHECK_FALSE(find_isomorphism(pair_groupoid(2), units_only({"a", "b"})).has_value());
  CHECK_FALSE(find_isomorphism(group_groupoid(FiniteGroup::cyclic(4)),
                               group_groupoid(FiniteGroup::direct_product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2))))
                  .has_value());
}
