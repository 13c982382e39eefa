#include <doctest.h>

#include "etale/corpus.hpp"
#include "etale/homology.hpp"

using namespace etale;
using namespace etale::homology;
using correspondence::Correspondence;
using gmodule::constant_module;
using zlinalg::ChainComplex;
using zlinalg::Int;
using zlinalg::SparseMatrix;

namespace {

FiniteGroupoid cyclic_groupoid(int n) { return groupoid::group_groupoid(FiniteGroup::cyclic(n)); }

GModule trivial_z(const FiniteGroupoid &g) { return constant_module(g, FgAbGroup::free(1)); }

FgAbGroup z(std::size_t r = 1) { return FgAbGroup::free(r); }
FgAbGroup zmod(long n) { return FgAbGroup::cyclic(Int(n)); }

// Z <-0- Z <-2- Z <-0- Z <-2- ... : the periodic resolution of Z over Z/2,
// tensored down to Z.
ChainComplex periodic_z2_complex(int top) {
  std::vector<std::size_t> ranks(static_cast<std::size_t>(top) + 1, 1);
  std::vector<SparseMatrix> d;
  for (int n = 1; n <= top; ++n) {
    SparseMatrix m(1, 1);
    if (n % 2 == 0)
      m.add(0, 0, 2);
    d.push_back(m);
  }
  return ChainComplex(0, ranks, d);
}

GModule random_module(corpus::Rng &rng, const FiniteGroupoid &g) {
  switch (rng.below(4)) {
  case 0:
    return trivial_z(g);
  case 1:
    return constant_module(g, FgAbGroup::from_invariants({Int(2)}, 1));
  case 2:
    return gmodule::free_module_on_gset(g, groupoid::translation_gset(g)).module;
  default:
    return gmodule::free_module_on_gset(g, groupoid::unit_gset(g)).module;
  }
}

bool same_homology_maps(const std::vector<InducedHomologyMap> &a, const std::vector<InducedHomologyMap> &b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t n = 0; n < a.size(); ++n)
    if (!zlinalg::maps_equal(a[n].matrix, b[n].matrix, a[n].target))
      return false;
  return true;
}

}  // namespace

TEST_CASE("bar complex shapes") {
  auto units = BarComplex::build(trivial_z(groupoid::units_only({"a", "b"})), 3);
  CHECK(units.rank(0) == 2);
  for (int n = 1; n <= 3; ++n)
    CHECK(units.rank(n) == 0);

  auto c2 = BarComplex::build(trivial_z(cyclic_groupoid(2)), 4);
  for (int n = 0; n <= 4; ++n)
    CHECK(c2.rank(n) == 1);
  for (int n = 1; n <= 4; ++n) {
    auto d = c2.complex().differential(n).to_dense();
    CHECK(d == (n % 2 ? IntMatrix{{0}} : IntMatrix{{2}}));
  }

  auto p2 = BarComplex::build(trivial_z(groupoid::pair_groupoid(2)), 4);
  for (int n = 0; n <= 4; ++n)
    CHECK(p2.rank(n) == 2);
  // d1 (a -> b) = [b] - [a]
  auto d1 = p2.complex().differential(1).to_dense();
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(d1(0, j) + d1(1, j) == 0);
    CHECK(abs(d1(0, j)) == 1);
  }

  auto un = BarComplex::build(trivial_z(groupoid::pair_groupoid(2)), 3, BarVariant::unnormalized);
  CHECK(un.rank(0) == 2);
  CHECK(un.rank(1) == 4);
  CHECK(un.rank(2) == 8);
  CHECK(un.rank(3) == 16);
}

TEST_CASE("differentials square to zero") {
  corpus::Rng rng(3);
  for (int k = 0; k < 15; ++k) {
    auto g = corpus::random_groupoid(rng, 2, 3, 3);
    auto m = random_module(rng, g);
    for (auto variant : {BarVariant::normalized, BarVariant::unnormalized}) {
      auto b = BarComplex::build(m, 3, variant);
      for (int n = 2; n <= 3; ++n)
        CHECK(zlinalg::multiply(b.complex().differential(n - 1), b.complex().differential(n)).is_zero());
    }
  }
}

TEST_CASE("tuple indexing round-trips") {
  auto g = groupoid::transitive_groupoid(2, FiniteGroup::cyclic(2));
  for (auto variant : {BarVariant::normalized, BarVariant::unnormalized}) {
    auto b = BarComplex::build(trivial_z(g), 3, variant);
    for (int n = 1; n <= 3; ++n)
      for (std::size_t t = 0; t < b.tuple_count(n); ++t) {
        auto tup = b.tuple(n, t);
        CHECK(b.tuple_index(g.range(tup[0]), tup.data(), tup.size()) == t);
      }
  }
}

TEST_CASE("homology of Z/2 matches the periodic resolution") {
  auto table = homology_table(trivial_z(cyclic_groupoid(2)), 4);
  auto oracle = periodic_z2_complex(4);
  const std::vector<FgAbGroup> expect{z(), zmod(2), z(0), zmod(2)};
  for (int n = 0; n < 4; ++n) {
    CHECK(table.at(n).isomorphic(expect[static_cast<std::size_t>(n)]));
    CHECK(table.at(n).isomorphic(zlinalg::homology_at(oracle, n)));
    CHECK(groupoid_homology(trivial_z(cyclic_groupoid(2)), n, BarVariant::unnormalized)
              .isomorphic(expect[static_cast<std::size_t>(n)]));
  }
}

TEST_CASE("classical group homology") {
  auto c3 = homology_table(trivial_z(cyclic_groupoid(3)), 4);
  CHECK(c3.at(1).isomorphic(zmod(3)));
  CHECK(c3.at(2).is_trivial());
  CHECK(c3.at(3).isomorphic(zmod(3)));

  auto mod2 = homology_table(constant_module(cyclic_groupoid(2), zmod(2)), 4);
  for (int n = 0; n < 4; ++n)
    CHECK(mod2.at(n).isomorphic(zmod(2)));

  auto sign = constant_module(cyclic_groupoid(2), z());
  sign.action[1] = IntMatrix{{-1}};
  auto st = homology_table(sign, 4);
  CHECK(st.at(0).isomorphic(zmod(2)));
  CHECK(st.at(1).is_trivial());
  CHECK(st.at(2).isomorphic(zmod(2)));
  CHECK(st.at(3).is_trivial());

  // Klein four: H_1 = (Z/2)^2, H_2 = Z/2.
  auto v4 = FiniteGroup::direct_product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2));
  auto kt = homology_table(trivial_z(groupoid::group_groupoid(v4)), 3);
  CHECK(kt.at(1).isomorphic(FgAbGroup::from_invariants({Int(2), Int(2)}, 0)));
  CHECK(kt.at(2).isomorphic(zmod(2)));
}

TEST_CASE("equivalence relations and units") {
  auto g = groupoid::disjoint_union(groupoid::disjoint_union(groupoid::pair_groupoid(3), groupoid::pair_groupoid(2)),
                                    groupoid::pair_groupoid(1));
  auto t = homology_table(trivial_z(g), 3);
  CHECK(t.at(0).isomorphic(z(3)));
  CHECK(t.at(1).is_trivial());
  CHECK(t.at(2).is_trivial());
  auto u = homology_table(constant_module(groupoid::units_only({"a", "b"}), zmod(4)), 3);
  CHECK(u.at(0).isomorphic(FgAbGroup::from_invariants({Int(4), Int(4)}, 0)));
  CHECK(u.at(1).is_trivial());
}

TEST_CASE("Morita invariance: pair groupoids look like a point") {
  for (std::size_t n = 1; n <= 5; ++n) {
    auto t = homology_table(trivial_z(groupoid::pair_groupoid(n)), 4);
    CHECK(t.at(0).isomorphic(z()));
    for (int d = 1; d < 4; ++d)
      CHECK(t.at(d).is_trivial());
  }
  auto tz = homology_table(trivial_z(groupoid::transitive_groupoid(3, FiniteGroup::cyclic(2))), 4);
  auto pz = homology_table(trivial_z(cyclic_groupoid(2)), 4);
  CHECK(tz.isomorphic(pz));
}

TEST_CASE("property: H_0 equals coinvariants") {
  corpus::Rng rng(57);
  for (int k = 0; k < 50; ++k) {
    auto g = corpus::random_groupoid(rng, 3, 3, 3);
    auto m = random_module(rng, g);
    CHECK(groupoid_homology(m, 0).isomorphic(gmodule::coinvariants(m).group));
  }
}

TEST_CASE("property: normalized and unnormalized complexes agree") {
  corpus::Rng rng(61);
  for (int k = 0; k < 12; ++k) {
    auto g = corpus::random_groupoid(rng, 2, 2, 3);
    auto m = random_module(rng, g);
    CHECK(homology_table(m, 3, BarVariant::normalized).isomorphic(homology_table(m, 3, BarVariant::unnormalized)));
  }
}

TEST_CASE("property: truncation soundness") {
  corpus::Rng rng(67);
  for (int k = 0; k < 10; ++k) {
    auto g = corpus::random_groupoid(rng, 2, 3, 4);
    auto m = random_module(rng, g);
    auto a = homology_table(m, 3), b = homology_table(m, 4);
    for (int n = 0; n < 3; ++n)
      CHECK(a.at(n).isomorphic(b.at(n)));
  }
}

TEST_CASE("discrete groupoid homology by orbits") {
  auto sl = invsgp::powerset_semilattice(2);
  auto h0 = homology_of_discrete_semigroup_groupoid(sl, 0);
  CHECK(h0.agree);
  CHECK(h0.bar.isomorphic(z(sl.nonzero_idempotents().size())));
  CHECK(homology_of_discrete_semigroup_groupoid(sl, 1).bar.is_trivial());

  auto gz = invsgp::group_with_zero(FiniteGroup::cyclic(2));
  CHECK(homology_of_discrete_semigroup_groupoid(gz, 1).bar.isomorphic(zmod(2)));
  CHECK(homology_of_discrete_semigroup_groupoid(gz, 2).bar.is_trivial());

  auto gr = invsgp::graph_inverse_semigroup(corpus::path_graph(3));
  CHECK(homology_of_discrete_semigroup_groupoid(gr, 0).bar.isomorphic(z(3)));
  for (int n = 1; n <= 3; ++n)
    CHECK(homology_of_discrete_semigroup_groupoid(gr, n).bar.is_trivial());

  corpus::Rng rng(71);
  for (int k = 0; k < 6; ++k) {
    auto s = corpus::random_partial_bijections(rng, 3, 2).semigroup;
    for (int n = 0; n < 3; ++n)
      CHECK(homology_of_discrete_semigroup_groupoid(s, n).agree);
  }
}

TEST_CASE("induced maps along the identity") {
  for (const auto &m : {trivial_z(cyclic_groupoid(2)), trivial_z(groupoid::pair_groupoid(3)),
                        constant_module(cyclic_groupoid(3), zmod(3))}) {
    auto id = correspondence::identity_correspondence(m.groupoid);
    auto maps = induced_map_homology(id, m, m, gmodule::identity_map(m), 4);
    REQUIRE(maps.size() == 4);
    for (const auto &h : maps) {
      CHECK(h.isomorphism);
      CHECK(zlinalg::maps_equal(h.matrix, IntMatrix::identity(h.source.generators()), h.target));
    }
    auto zero = induced_map_homology(id, m, m, gmodule::zero_map(m, m), 3);
    for (const auto &h : zero)
      CHECK(zlinalg::is_zero_map(h.matrix, h.target));
  }
}

TEST_CASE("Omega_S induces isomorphisms") {
  for (const auto &[name, s] : std::vector<std::pair<std::string, invsgp::InverseSemigroup>>{
           {"chain", invsgp::chain_semilattice(3)},
           {"one edge", invsgp::graph_inverse_semigroup(corpus::one_edge_graph())},
           {"brandt", corpus::brandt(2)}}) {
    CAPTURE(name);
    auto om = correspondence::omega_S(s);
    const auto &c = om.correspondence;
    auto a = trivial_z(c.left()), b = trivial_z(c.right());
    auto f = orbit_sum_map(c, gmodule::induce(c, b));
    auto maps = induced_map_homology(c, a, b, f, 4);
    for (const auto &h : maps)
      CHECK(h.isomorphism);
    if (name == "one edge") {
      CHECK(maps[0].source.isomorphic(z(2)));
      CHECK(maps[0].target.isomorphic(z(2)));
    }
  }
}

TEST_CASE("property: lifts by different methods induce the same maps") {
  corpus::Rng rng(73);
  int compared = 0;
  for (int k = 0; k < 12; ++k) {
    auto g = corpus::random_groupoid(rng, 2, 2, 2), h = corpus::random_groupoid(rng, 2, 2, 2);
    auto c = correspondence::from_homomorphism(g, h, corpus::random_functor(rng, g, h));
    auto a = trivial_z(g), b = trivial_z(h);
    auto f = orbit_sum_map(c, gmodule::induce(c, b));
    auto hom = induced_map_homology(c, a, b, f, 3);
    LiftOptions fwd{LiftMethod::solve, false, 600}, rev{LiftMethod::solve, true, 600};
    auto s1 = induced_map_homology(c, a, b, f, 3, fwd);
    auto s2 = induced_map_homology(c, a, b, f, 3, rev);
    CHECK(same_homology_maps(hom, s1));
    CHECK(same_homology_maps(s1, s2));
    ++compared;
  }
  CHECK(compared == 12);
}

TEST_CASE("property: induced maps are functorial") {
  corpus::Rng rng(79);
  for (int k = 0; k < 10; ++k) {
    auto g = corpus::random_groupoid(rng, 2, 2, 3), h = corpus::random_groupoid(rng, 2, 2, 3),
         q = corpus::random_groupoid(rng, 2, 2, 3);
    auto c1 = correspondence::from_homomorphism(g, h, corpus::random_functor(rng, g, h));
    auto c2 = correspondence::from_homomorphism(h, q, corpus::random_functor(rng, h, q));
    auto zg = trivial_z(g), zh = trivial_z(h), zq = trivial_z(q);
    auto i1 = gmodule::induce(c1, zh);
    auto i2 = gmodule::induce(c2, zq);
    auto f1 = orbit_sum_map(c1, i1);
    auto f2 = orbit_sum_map(c2, i2);
    auto iso = gmodule::composition_isomorphism(c1, c2, zq);
    REQUIRE(iso.verified);
    auto lifted = gmodule::induce_map(i1, gmodule::induce(c1, i2.module), f2);
    auto f = gmodule::compose_maps(gmodule::compose_maps(f1, lifted), iso.map);
    auto m1 = induced_map_homology(c1, zg, zh, f1, 3);
    auto m2 = induced_map_homology(c2, zh, zq, f2, 3);
    auto m = induced_map_homology(iso.composite.correspondence, zg, zq, f, 3);
    for (std::size_t n = 0; n < 3; ++n)
      CHECK(zlinalg::maps_equal(m[n].matrix, m2[n].matrix * m1[n].matrix, m[n].target));
  }
}

TEST_CASE("lift with torsion coefficients") {
  auto g = cyclic_groupoid(2);
  auto m = constant_module(g, zmod(2));
  auto id = correspondence::identity_correspondence(g);
  auto chain = induced_chain_map(id, m, m, gmodule::identity_map(m), 3);
  CHECK(chain.chain_map_verified);
  for (const auto &h : homology_maps(chain))
    CHECK(h.isomorphism);
}
