#include "etale/kformula.hpp"

#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/homology.hpp"
#include "etale/specseq.hpp"

namespace etale::kformula {

std::string KClass::to_string() const { return "(" + k0.to_string() + ", " + k1.to_string() + ")"; }

std::string GroupDescriptor::to_string() const {
  switch (kind) {
  case GroupKind::trivial:
    return "trivial";
  case GroupKind::free_abelian:
    return "Z^" + std::to_string(rank);
  case GroupKind::free:
    return "F_" + std::to_string(rank);
  }
  return "?";
}

KClass group_k_lookup(const GroupDescriptor &g) {
  switch (g.kind) {
  case GroupKind::trivial:
    return {FgAbGroup::free(1), FgAbGroup::free(0), "trivial group: K_*(C) = (Z, 0)"};
  case GroupKind::free_abelian: {
    if (g.rank == 0)
      return group_k_lookup({GroupKind::trivial, 0});
    if (g.rank > 30)
      throw HypothesisRefusal("group K-theory: Z^" + std::to_string(g.rank) + " exceeds the supported rank");
    const std::size_t half = std::size_t{1} << (g.rank - 1);
    return {FgAbGroup::free(half), FgAbGroup::free(half),
            "Z^" + std::to_string(g.rank) + ": K_*(C(T^k)) is the exterior algebra on k generators, split by parity"};
  }
  case GroupKind::free:
    return {FgAbGroup::free(1), FgAbGroup::free(g.rank),
            "F_" + std::to_string(g.rank) + ": Pimsner-Voiculescu six-term sequence, K_0 = Z, K_1 = Z^n"};
  }
  throw HypothesisRefusal("group K-theory: unknown group kind");
}

std::optional<GroupDescriptor> recognize(const FiniteGroup &g) {
  if (g.is_trivial())
    return GroupDescriptor{GroupKind::trivial, 0};
  return std::nullopt;
}

namespace {

// An element of prime order p in a nontrivial finite group, with p.
std::pair<std::size_t, std::size_t> prime_order_element(const FiniteGroup &g) {
  for (std::size_t a = 0; a < g.order(); ++a) {
    if (a == g.identity())
      continue;
    const std::size_t n = g.element_order(a);
    std::size_t p = 2;
    while (n % p != 0)
      ++p;
    std::size_t x = g.identity();
    for (std::size_t k = 0; k < n / p; ++k)
      x = g.mul(x, a);
    return {x, p};
  }
  throw std::logic_error("prime order element requested in the trivial group");
}

KClass direct_sum(const std::vector<KClass> &parts, std::string provenance) {
  std::vector<FgAbGroup> k0, k1;
  for (const auto &k : parts) {
    k0.push_back(k.k0);
    k1.push_back(k.k1);
  }
  if (parts.empty())
    return {FgAbGroup::free(0), FgAbGroup::free(0), std::move(provenance)};
  return {zlinalg::direct_sum(k0), zlinalg::direct_sum(k1), std::move(provenance)};
}

}  // namespace

CorollaryB corollary_b(const invsgp::InverseSemigroup &s) {
  invsgp::require_valid(s);
  CorollaryB out;
  const auto orbits = invsgp::orbits_on_idempotents(s);
  std::vector<KClass> parts;
  for (std::size_t k = 0; k < orbits.count(); ++k) {
    const std::size_t e = orbits.representative(k);
    const auto stab = invsgp::stabilizer_subgroup(s, e);
    if (!stab.group.is_trivial()) {
      const auto [x, p] = prime_order_element(stab.group);
      throw HypothesisRefusal("stabilizer of idempotent '" + s.name(e) + "' has the element '" +
                              s.name(stab.elements[x]) + "' of order " + std::to_string(p) +
                              "; the formula requires torsion-free stabilizers");
    }
    const auto desc = recognize(stab.group);
    if (!desc)
      throw HypothesisRefusal("unknown K-theory for the stabilizer of '" + s.name(e) + "'");
    OrbitTerm term;
    term.representative = e;
    term.orbit = orbits.orbits[k];
    term.stabilizer_order = stab.group.order();
    term.stabilizer = *desc;
    term.k = group_k_lookup(*desc);
    parts.push_back(term.k);
    out.orbits.push_back(std::move(term));
  }
  out.total = direct_sum(parts, "direct sum over " + std::to_string(orbits.count()) + " idempotent orbits");
  out.assumptions = {
      "groupoid of germs is Hausdorff: automatic for finite semigroups",
      "Baum-Connes for the stabilizers: automatic for finite groups",
      "stabilizers torsion-free: checked",
  };
  return out;
}

std::optional<KClass> hk_collapse(const zlinalg::GradedGroup &h) {
  if (!specseq::degenerate_collapse(h).certified)
    return std::nullopt;
  auto get = [&](int p) {
    auto it = h.support().find(p);
    return it == h.support().end() ? FgAbGroup::free(0) : it->second;
  };
  return KClass{get(0), get(1), "collapsed homology: K_0 = H_0, K_1 = H_1"};
}

ToeplitzReport cross_check_toeplitz(const invsgp::Digraph &g, int truncation) {
  invsgp::check_digraph(g);
  if (!invsgp::is_acyclic(g))
    throw std::invalid_argument("cross-check: graph has a directed cycle");
  const auto s = invsgp::graph_inverse_semigroup(g);
  ToeplitzReport rep;
  rep.vertices = g.vertices.size();
  rep.truncation = truncation;
  rep.expected = {FgAbGroup::free(rep.vertices), FgAbGroup::free(0), "one copy of Z per vertex"};
  rep.corollary = corollary_b(s).total;
  const auto z = FgAbGroup::free(1);
  const auto u = groupoid::universal_groupoid(s);
  const auto d = groupoid::discrete_groupoid(s);
  rep.universal_homology = homology::homology_table(gmodule::constant_module(u.groupoid, z), truncation);
  rep.discrete_homology = homology::homology_table(gmodule::constant_module(d.groupoid, z), truncation);
  rep.universal_route = hk_collapse(rep.universal_homology);
  rep.discrete_route = hk_collapse(rep.discrete_homology);
  auto require = [&](const std::optional<KClass> &k, const std::string &route) {
    if (!k)
      throw std::logic_error("cross-check: " + route + " homology does not collapse");
    if (!k->isomorphic(rep.expected))
      throw std::logic_error("cross-check: " + route + " gives " + k->to_string() + ", expected " +
                             rep.expected.to_string());
  };
  require(rep.corollary, "stabilizer sum");
  require(rep.universal_route, "universal groupoid");
  require(rep.discrete_route, "discrete groupoid");
  return rep;
}

}  // namespace etale::kformula
