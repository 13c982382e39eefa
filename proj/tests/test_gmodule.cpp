#include <doctest.h>

#include <numeric>

#include "etale/corpus.hpp"
#include "etale/gmodule.hpp"

using namespace etale;
using namespace etale::gmodule;
using correspondence::Correspondence;
using groupoid::FiniteGroupoid;
using groupoid::GSet;
using zlinalg::Int;

namespace {

FiniteGroupoid z2() { return groupoid::group_groupoid(FiniteGroup::cyclic(2)); }

// Constant Z with the nonunit arrow of Z/2 acting by -1.
GModule sign_module() {
  auto m = constant_module(z2(), FgAbGroup::free(1));
  m.action[1] = IntMatrix{{-1}};
  return m;
}

// Left translation of g on its arrows, as a correspondence into the units.
Correspondence translation_to_units(const FiniteGroupoid &g) {
  std::vector<std::size_t> sigma;
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    sigma.push_back(g.source(a));
  return correspondence::action_correspondence(g, groupoid::translation_gset(g), g.unit_names(), sigma);
}

GSet disjoint(const GSet &a, const GSet &b) {
  GSet out = a;
  const std::size_t shift = a.points.size();
  for (std::size_t p = 0; p < b.points.size(); ++p) {
    out.points.push_back("b" + b.points[p]);
    out.anchor.push_back(b.anchor[p]);
  }
  for (std::size_t g = 0; g < out.act.size(); ++g)
    for (std::size_t p = 0; p < b.points.size(); ++p)
      out.act[g].push_back(b.act[g][p] == groupoid::npos ? groupoid::npos : b.act[g][p] + shift);
  return out;
}

std::size_t orbit_count(const FiniteGroupoid &g, const GSet &x) {
  std::vector<std::size_t> parent(x.points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t p) {
    while (parent[p] != p)
      p = parent[p] = parent[parent[p]];
    return p;
  };
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    for (std::size_t p = 0; p < x.points.size(); ++p)
      if (x.act[a][p] != groupoid::npos)
        parent[find(p)] = find(x.act[a][p]);
  std::size_t n = 0;
  for (std::size_t p = 0; p < parent.size(); ++p)
    n += find(p) == p;
  return n;
}

GModule random_module(corpus::Rng &rng, const FiniteGroupoid &g) {
  switch (rng.below(3)) {
  case 0:
    return constant_module(g, FgAbGroup::free(1));
  case 1:
    return constant_module(g, FgAbGroup::from_invariants({Int(2)}, 1));
  default:
    return free_module_on_gset(g, groupoid::translation_gset(g)).module;
  }
}

}  // namespace

TEST_CASE("constant and zero modules") {
  auto m = constant_module(z2(), FgAbGroup::free(1));
  CHECK(validate_module(m).valid);
  CHECK(coinvariants(m).group.isomorphic(FgAbGroup::free(1)));
  auto z = zero_module(groupoid::pair_groupoid(3));
  CHECK(validate_module(z).valid);
  CHECK(z.total_generators() == 0);
  CHECK(coinvariants(z).group.is_trivial());
  auto t = constant_module(z2(), FgAbGroup::cyclic(2));
  CHECK(validate_module(t).valid);
  CHECK(coinvariants(t).group.isomorphic(FgAbGroup::cyclic(2)));
}

TEST_CASE("validation catches broken actions") {
  auto m = constant_module(z2(), FgAbGroup::free(1));
  m.action[1] = IntMatrix{{2}};
  auto r = validate_module(m);
  CHECK_FALSE(r.valid);
  CHECK(r.message.find("functorial") != std::string::npos);
  auto u = constant_module(z2(), FgAbGroup::free(1));
  u.action[0] = IntMatrix{{-1}};
  CHECK_FALSE(validate_module(u).valid);
  auto t = constant_module(z2(), FgAbGroup::cyclic(3));
  t.action[1] = IntMatrix{{2}};  // 2 * 2 = 4 = 1 mod 3: functorial on Z/3
  CHECK(validate_module(t).valid);
}

TEST_CASE("free modules on G-sets") {
  auto g = groupoid::transitive_groupoid(2, FiniteGroup::cyclic(3));
  auto units = free_module_on_gset(g, groupoid::unit_gset(g));
  CHECK(validate_module(units.module).valid);
  for (const auto &f : units.module.fibres)
    CHECK(f.isomorphic(FgAbGroup::free(1)));
  auto arrows = free_module_on_gset(g, groupoid::translation_gset(g));
  CHECK(validate_module(arrows.module).valid);
  for (std::size_t u = 0; u < g.unit_count(); ++u)
    CHECK(arrows.module.fibres[u].free_rank() == g.arrows_into(u).size());
  GSet empty;
  empty.act.assign(g.arrow_count(), {});
  auto none = free_module_on_gset(g, empty);
  CHECK(none.module.total_generators() == 0);
}

TEST_CASE("coinvariants examples") {
  auto units = groupoid::units_only({"a", "b", "c"});
  auto m = constant_module(units, FgAbGroup::from_invariants({Int(2)}, 1));
  auto c = coinvariants(m);
  CHECK(c.group.isomorphic(FgAbGroup::from_invariants({Int(2), Int(2), Int(2)}, 3)));
  CHECK(c.projection == IntMatrix::identity(6));

  auto p2 = groupoid::pair_groupoid(2);
  CHECK(coinvariants(free_module_on_gset(p2, groupoid::unit_gset(p2)).module).group.isomorphic(FgAbGroup::free(1)));

  CHECK(validate_module(sign_module()).valid);
  CHECK(coinvariants(sign_module()).group.isomorphic(FgAbGroup::cyclic(2)));
}

TEST_CASE("property: coinvariants of a permutation module count orbits") {
  corpus::Rng rng(17);
  for (int k = 0; k < 30; ++k) {
    auto g = corpus::random_groupoid(rng, 3, 3, 3);
    GSet x = rng.below(2) ? groupoid::unit_gset(g) : groupoid::translation_gset(g);
    if (rng.below(2))
      x = disjoint(x, groupoid::translation_gset(g));
    auto m = free_module_on_gset(g, x).module;
    CHECK(validate_module(m).valid);
    CHECK(coinvariants(m).group.isomorphic(FgAbGroup::free(orbit_count(g, x))));
  }
}

TEST_CASE("module maps") {
  auto g = groupoid::pair_groupoid(3);
  auto free = free_module_on_gset(g, groupoid::translation_gset(g)).module;
  auto triv = constant_module(g, FgAbGroup::free(1));
  GModuleMap aug;
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    IntMatrix row(1, free.fibres[u].generators());
    for (std::size_t j = 0; j < row.cols(); ++j)
      row(0, j) = 1;
    aug.components.push_back(row);
  }
  CHECK(validate_map(free, triv, aug).valid);
  CHECK_FALSE(is_module_isomorphism(free, triv, aug));
  CHECK(is_module_isomorphism(triv, triv, identity_map(triv)));
  GModuleMap bad = aug;
  bad.components[0](0, 0) = 2;
  CHECK_FALSE(validate_map(free, triv, bad).valid);
  CHECK(validate_map(free, triv, zero_map(free, triv)).valid);
}

TEST_CASE("induction along the identity is the identity") {
  for (const auto &m : {sign_module(), constant_module(groupoid::pair_groupoid(3), FgAbGroup::cyclic(4)),
                        free_module_on_gset(groupoid::transitive_groupoid(2, FiniteGroup::cyclic(2)),
                                            groupoid::translation_gset(groupoid::transitive_groupoid(
                                                2, FiniteGroup::cyclic(2))))
                            .module}) {
    auto ind = induce(correspondence::identity_correspondence(m.groupoid), m);
    CHECK(validate_module(ind.module).valid);
    CHECK(is_module_isomorphism(ind.module, m, identity_map(m)));
    auto delta = delta_map(ind, m);
    auto cm = coinvariants(m);
    CHECK(zlinalg::maps_equal(delta, IntMatrix::identity(m.total_generators()), cm.group));
  }
}

TEST_CASE("induction along translation to the units") {
  auto g = groupoid::pair_groupoid(2);
  auto c = translation_to_units(g);
  REQUIRE(correspondence::validate_correspondence(c).valid);
  auto n = constant_module(c.right(), FgAbGroup::free(1));
  auto ind = induce(c, n);
  CHECK(validate_module(ind.module).valid);
  for (const auto &f : ind.module.fibres)
    CHECK(f.isomorphic(FgAbGroup::free(2)));
  const std::size_t flip = g.arrow_count() - 1;
  REQUIRE(!g.is_unit(flip));
  CHECK(ind.module.action[flip] == IntMatrix{{0, 1}, {1, 0}});
  // delta is an isomorphism for every coefficient module over the units.
  for (const auto &a : {FgAbGroup::free(1), FgAbGroup::cyclic(3), FgAbGroup::from_invariants({Int(2)}, 1)}) {
    auto na = constant_module(c.right(), a);
    auto ia = induce(c, na);
    auto d = delta_map(ia, na);
    CHECK(zlinalg::is_isomorphism(d, coinvariants(ia.module).group, coinvariants(na).group));
  }
  auto zero = induce(c, zero_module(c.right()));
  CHECK(zero.module.total_generators() == 0);
  CHECK(delta_map(zero, zero_module(c.right())).cols() == 0);
}

TEST_CASE("induction keeps torsion coefficients") {
  auto h = groupoid::transitive_groupoid(2, FiniteGroup::cyclic(2));
  auto c = correspondence::from_homomorphism(groupoid::units_only({"p"}), h, {0});
  auto n = constant_module(h, FgAbGroup::cyclic(2));
  auto ind = induce(c, n);
  CHECK(validate_module(ind.module).valid);
  // One orbit over the single unit, sitting at sigma = x0.
  REQUIRE(ind.module.fibres.size() == 1);
  CHECK(ind.module.fibres[0].isomorphic(FgAbGroup::cyclic(2)));
}

TEST_CASE("property: induction respects composition") {
  corpus::Rng rng(29);
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    auto a = corpus::random_correspondence(rng, 12);
    auto h = a.right();
    auto q = corpus::random_groupoid(rng, 2);
    auto b = correspondence::from_homomorphism(h, q, corpus::random_functor(rng, h, q));
    auto n = random_module(rng, q);
    auto iso = composition_isomorphism(a, b, n);
    CHECK(iso.verified);
    CHECK(validate_module(iso.iterated.module).valid);
    CHECK(validate_module(iso.direct.module).valid);
    // delta of the composite factors through the two deltas.
    auto lhs = delta_map(iso.inner, n) * delta_map(iso.iterated, iso.inner.module);
    auto rhs = delta_map(iso.direct, n) * total_matrix(iso.iterated.module, iso.direct.module, iso.map);
    CHECK(zlinalg::maps_equal(lhs, rhs, coinvariants(n).group));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("property: delta is natural in the module") {
  corpus::Rng rng(31);
  for (int k = 0; k < 15; ++k) {
    auto c = corpus::random_correspondence(rng, 12);
    const auto &h = c.right();
    auto free = free_module_on_gset(h, groupoid::translation_gset(h)).module;
    auto triv = constant_module(h, FgAbGroup::free(1));
    GModuleMap aug;
    for (std::size_t u = 0; u < h.unit_count(); ++u) {
      IntMatrix row(1, free.fibres[u].generators());
      for (std::size_t j = 0; j < row.cols(); ++j)
        row(0, j) = 1;
      aug.components.push_back(row);
    }
    REQUIRE(validate_map(free, triv, aug).valid);
    auto ifree = induce(c, free), itriv = induce(c, triv);
    auto ind_aug = induce_map(ifree, itriv, aug);
    CHECK(validate_map(ifree.module, itriv.module, ind_aug).valid);
    auto lhs = delta_map(itriv, triv) * total_matrix(ifree.module, itriv.module, ind_aug);
    auto rhs = total_matrix(free, triv, aug) * delta_map(ifree, free);
    CHECK(zlinalg::maps_equal(lhs, rhs, coinvariants(triv).group));
  }
}
