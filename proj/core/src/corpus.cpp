#include "etale/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace etale::corpus {

using correspondence::Correspondence;
using groupoid::FiniteGroupoid;
using groupoid::npos;
using invsgp::Digraph;
using invsgp::InverseSemigroup;
using invsgp::PartialMap;

Digraph random_dag(Rng &rng, std::size_t max_vertices, std::size_t max_edges) {
  Digraph g;
  const std::size_t n = rng.between(1, max_vertices);
  for (std::size_t v = 0; v < n; ++v)
    g.vertices.push_back("v" + std::to_string(v));
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      slots.emplace_back(a, b);
  for (std::size_t k = slots.size(); k > 1; --k)
    std::swap(slots[k - 1], slots[rng.below(k)]);
  const std::size_t m = slots.empty() ? 0 : rng.between(0, std::min(max_edges, slots.size()));
  slots.resize(m);
  std::sort(slots.begin(), slots.end());
  // Relabel so edge direction is not always low -> high.
  std::vector<std::size_t> perm(n);
  for (std::size_t v = 0; v < n; ++v)
    perm[v] = v;
  for (std::size_t k = n; k > 1; --k)
    std::swap(perm[k - 1], perm[rng.below(k)]);
  for (std::size_t k = 0; k < m; ++k)
    g.edges.push_back({"e" + std::to_string(k), perm[slots[k].first], perm[slots[k].second]});
  return g;
}

InverseSemigroup random_semilattice(Rng &rng, std::size_t max_size) {
  for (;;) {
    std::set<unsigned> family{0u};
    const std::size_t gens = rng.between(1, 4);
    for (std::size_t k = 0; k < gens; ++k)
      family.insert(static_cast<unsigned>(rng.between(1, 15)));
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<unsigned> cur(family.begin(), family.end());
      for (unsigned a : cur)
        for (unsigned b : cur)
          grew |= family.insert(a & b).second;
    }
    if (family.size() > max_size)
      continue;
    std::vector<unsigned> elems(family.begin(), family.end());
    std::vector<std::string> names;
    for (unsigned m : elems) {
      std::string s = "{";
      for (unsigned b = 0; b < 4; ++b)
        if (m >> b & 1u)
          s += (s.size() > 1 ? "," : "") + std::to_string(b);
      names.push_back(s + "}");
    }
    std::vector<std::vector<std::size_t>> meet(elems.size(), std::vector<std::size_t>(elems.size()));
    for (std::size_t i = 0; i < elems.size(); ++i)
      for (std::size_t j = 0; j < elems.size(); ++j)
        meet[i][j] = static_cast<std::size_t>(std::find(elems.begin(), elems.end(), elems[i] & elems[j]) - elems.begin());
    return invsgp::semilattice(std::move(names), std::move(meet), 0);
  }
}

invsgp::PartialBijectionSemigroup random_partial_bijections(Rng &rng, std::size_t points, std::size_t gens) {
  std::vector<PartialMap> maps;
  for (std::size_t k = 0; k < gens; ++k) {
    PartialMap m(points, -1);
    std::vector<int> targets;
    for (std::size_t y = 0; y < points; ++y)
      targets.push_back(static_cast<int>(y));
    for (std::size_t j = targets.size(); j > 1; --j)
      std::swap(targets[j - 1], targets[rng.below(j)]);
    for (std::size_t x = 0; x < points; ++x)
      if (rng.below(3) != 0)
        m[x] = targets[x];
    maps.push_back(m);
  }
  return invsgp::from_partial_bijections(points, maps);
}

groupoid::SAction random_action(Rng &rng) {
  switch (rng.below(5)) {
  case 0:
    return groupoid::spectral_action(random_semilattice(rng, 6));
  case 1:
    return groupoid::restrict_to_support(groupoid::natural_action(random_partial_bijections(rng, 3, rng.between(1, 2))));
  case 2:
    return groupoid::spectral_action(invsgp::graph_inverse_semigroup(random_dag(rng, 3, 3)));
  case 3:
    return groupoid::spectral_action(random_partial_bijections(rng, 3, rng.between(1, 2)).semigroup);
  default:
    return groupoid::spectral_action(invsgp::group_with_zero(FiniteGroup::cyclic(rng.between(2, 4))));
  }
}

FiniteGroupoid random_groupoid(Rng &rng, std::size_t max_components, std::size_t max_units, std::size_t max_order) {
  const std::size_t k = rng.between(1, max_components);
  FiniteGroupoid g;
  for (std::size_t c = 0; c < k; ++c) {
    auto part = groupoid::transitive_groupoid(rng.between(1, max_units), FiniteGroup::cyclic(rng.between(1, max_order)));
    g = c == 0 ? part : groupoid::disjoint_union(g, part);
  }
  return g;
}

namespace {

// Homomorphism between isotropy groups, found by trying random generator
// images; falls back to the trivial homomorphism.
std::vector<std::size_t> random_group_hom(Rng &rng, const FiniteGroup &a, const FiniteGroup &b) {
  std::vector<std::size_t> gens;
  std::vector<std::size_t> span{a.identity()};
  for (std::size_t x = 0; x < a.order(); ++x)
    if (std::find(span.begin(), span.end(), x) == span.end()) {
      gens.push_back(x);
      span = a.generated(gens);
    }
  for (int attempt = 0; attempt < 30 && !gens.empty(); ++attempt) {
    std::vector<std::size_t> img;
    for (std::size_t k = 0; k < gens.size(); ++k)
      img.push_back(rng.below(b.order()));
    std::vector<std::size_t> map(a.order(), npos);
    map[a.identity()] = b.identity();
    std::vector<std::size_t> queue{a.identity()};
    bool ok = true;
    for (std::size_t i = 0; i < queue.size() && ok; ++i)
      for (std::size_t k = 0; k < gens.size() && ok; ++k) {
        const std::size_t x = a.mul(queue[i], gens[k]);
        const std::size_t y = b.mul(map[queue[i]], img[k]);
        if (map[x] == npos) {
          map[x] = y;
          queue.push_back(x);
        } else if (map[x] != y) {
          ok = false;
        }
      }
    if (ok)
      return map;
  }
  return std::vector<std::size_t>(a.order(), b.identity());
}

}  // namespace

std::vector<std::size_t> random_functor(Rng &rng, const FiniteGroupoid &g, const FiniteGroupoid &h) {
  if (h.unit_count() == 0)
    throw std::invalid_argument("random_functor: target has no units");
  const auto dec = groupoid::orbit_decomposition(g);
  std::vector<std::size_t> phi(g.arrow_count(), npos);
  // Per unit x: transversal t_x : x0 -> x and its image.
  std::vector<std::size_t> trans(g.unit_count()), trans_img(g.unit_count());
  std::vector<std::size_t> orbit_target(dec.orbits.size());
  std::vector<std::vector<std::size_t>> iso_map(dec.orbits.size());
  std::vector<std::vector<std::size_t>> iso_pos(dec.orbits.size(), std::vector<std::size_t>(g.arrow_count(), npos));
  std::vector<groupoid::IsotropyGroup> target_iso;
  for (std::size_t k = 0; k < dec.orbits.size(); ++k) {
    const std::size_t x0 = dec.orbits[k].front();
    const std::size_t y0 = rng.below(h.unit_count());
    orbit_target[k] = y0;
    const auto &src = dec.isotropy[k];
    target_iso.push_back(groupoid::isotropy_group(h, y0));
    iso_map[k] = random_group_hom(rng, src.group, target_iso.back().group);
    for (std::size_t e = 0; e < src.arrows.size(); ++e)
      iso_pos[k][src.arrows[e]] = e;
    const auto &into_y0 = h.arrows_into(y0);
    for (std::size_t x : dec.orbits[k]) {
      trans[x] = g.arrows_between(x, x0).front();
      trans_img[x] = x == x0 ? y0 : h.inverse(into_y0[rng.below(into_y0.size())]);
    }
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    const std::size_t k = dec.orbit_of[g.source(a)];
    const std::size_t tx = trans[g.source(a)], ty = trans[g.range(a)];
    const std::size_t loop = g.compose(g.inverse(ty), g.compose(a, tx));  // in isotropy at x0
    const std::size_t img = target_iso[k].arrows[iso_map[k][iso_pos[k][loop]]];
    phi[a] = h.compose(trans_img[g.range(a)], h.compose(img, h.inverse(trans_img[g.source(a)])));
  }
  return phi;
}

Correspondence random_correspondence(Rng &rng, std::size_t max_points) {
  for (;;) {
    Correspondence c;
    switch (rng.below(7)) {
    case 0:
      c = correspondence::identity_correspondence(random_groupoid(rng));
      break;
    case 1: {
      auto g = random_groupoid(rng), h = random_groupoid(rng);
      c = correspondence::from_homomorphism(g, h, random_functor(rng, g, h));
      break;
    }
    case 2: {
      auto g = random_groupoid(rng);
      c = correspondence::action_correspondence(g, rng.below(2) ? groupoid::unit_gset(g) : groupoid::translation_gset(g));
      break;
    }
    case 3: {
      auto g = random_groupoid(rng);
      std::vector<std::size_t> units(g.unit_count());
      for (std::size_t u = 0; u < units.size(); ++u)
        units[u] = u;
      c = correspondence::reverse(correspondence::subgroupoid_embedding(g, groupoid::subgroupoid(g, units)));
      break;
    }
    case 4: {
      auto g = random_groupoid(rng, 2), h = random_groupoid(rng, 2), k = random_groupoid(rng, 2);
      auto a = correspondence::from_homomorphism(g, h, random_functor(rng, g, h));
      auto b = correspondence::from_homomorphism(h, k, random_functor(rng, h, k));
      c = correspondence::compose(a, b).correspondence;
      break;
    }
    case 5: {
      auto g = random_groupoid(rng, 2);
      auto lin = correspondence::linking_groupoid(correspondence::action_correspondence(g, groupoid::translation_gset(g)));
      c = lin.morita;
      break;
    }
    default: {
      InverseSemigroup s = rng.below(2) ? random_semilattice(rng, 5)
                                        : invsgp::graph_inverse_semigroup(random_dag(rng, 3, 2));
      c = correspondence::omega_S(s).correspondence;
      break;
    }
    }
    if (c.size() <= max_points && c.size() > 0)
      return c;
  }
}

InverseSemigroup brandt(std::size_t n) {
  std::vector<PartialMap> gens;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      PartialMap m(n, -1);
      m[j] = static_cast<int>(i);
      gens.push_back(m);
    }
  return invsgp::from_partial_bijections(n, gens).semigroup;
}

Digraph path_graph(std::size_t vertices) {
  Digraph g;
  for (std::size_t v = 0; v < vertices; ++v)
    g.vertices.push_back("v" + std::to_string(v));
  for (std::size_t v = 0; v + 1 < vertices; ++v)
    g.edges.push_back({"e" + std::to_string(v), v, v + 1});
  return g;
}

Digraph one_edge_graph() {
  Digraph g;
  g.vertices = {"A", "B"};
  g.edges.push_back({"e", 0, 1});
  return g;
}

std::vector<std::pair<std::string, InverseSemigroup>> torsion_free_semigroups() {
  std::vector<std::pair<std::string, InverseSemigroup>> out;
  out.emplace_back("chain-3", invsgp::chain_semilattice(3));
  out.emplace_back("powerset-2", invsgp::powerset_semilattice(2));
  out.emplace_back("powerset-3", invsgp::powerset_semilattice(3));
  out.emplace_back("graph-one-edge", invsgp::graph_inverse_semigroup(one_edge_graph()));
  out.emplace_back("graph-path-3", invsgp::graph_inverse_semigroup(path_graph(3)));
  {
    Digraph d;
    d.vertices = {"A", "B", "C"};
    d.edges = {{"e", 0, 2}, {"f", 1, 2}};
    out.emplace_back("graph-two-into-one", invsgp::graph_inverse_semigroup(d));
  }
  out.emplace_back("brandt-2", brandt(2));
  out.emplace_back("order-preserving-3", invsgp::order_preserving_injections(3).semigroup);
  out.emplace_back("trivial-group-with-zero", invsgp::group_with_zero(FiniteGroup::trivial()));
  return out;
}

specseq::FilteredComplex random_filtered_complex(Rng &rng, std::size_t max_rank, int levels) {
  using zlinalg::IntMatrix;
  constexpr int kDegrees = 4;
  std::vector<std::vector<int>> level(kDegrees);
  std::vector<std::tuple<int, std::size_t, std::size_t, long>> pieces;  // degree of source, source, target, k
  const std::size_t budget = rng.between(1, max_rank);
  std::size_t used = 0;
  auto lev = [&] { return static_cast<int>(rng.below(static_cast<std::size_t>(levels))); };
  while (used < budget) {
    const int n = static_cast<int>(rng.below(kDegrees));
    if (used + 2 <= budget && n + 1 < kDegrees && rng.below(3) != 0) {
      const int lx = lev(), ly = static_cast<int>(rng.below(static_cast<std::size_t>(lx) + 1));
      const std::size_t x = level[n + 1].size(), y = level[n].size();
      level[n + 1].push_back(lx);
      level[n].push_back(ly);
      pieces.emplace_back(n + 1, x, y, static_cast<long>(rng.between(1, 3)));
      used += 2;
    } else {
      level[n].push_back(lev());
      used += 1;
    }
  }
  std::vector<IntMatrix> d(kDegrees);
  for (int n = 1; n < kDegrees; ++n)
    d[n] = IntMatrix(level[n - 1].size(), level[n].size());
  for (const auto &[n, x, y, k] : pieces)
    d[n](y, x) = k;
  std::vector<IntMatrix> basis(kDegrees), inverse(kDegrees);
  for (int n = 0; n < kDegrees; ++n) {
    const std::size_t r = level[n].size();
    basis[n] = IntMatrix::identity(r);
    inverse[n] = IntMatrix::identity(r);
    for (std::size_t t = 0; r > 1 && t < 2 * r; ++t) {
      const std::size_t i = rng.below(r), j = rng.below(r);
      if (i == j || level[n][j] > level[n][i])
        continue;
      long c = static_cast<long>(rng.between(1, 4));
      c = c <= 2 ? c - 3 : c - 2;
      for (std::size_t a = 0; a < r; ++a)
        basis[n](a, i) += c * basis[n](a, j);
      for (std::size_t b = 0; b < r; ++b)
        inverse[n](j, b) -= c * inverse[n](i, b);
    }
  }
  std::vector<std::size_t> ranks;
  std::vector<zlinalg::SparseMatrix> diffs;
  for (int n = 0; n < kDegrees; ++n)
    ranks.push_back(level[n].size());
  for (int n = 1; n < kDegrees; ++n)
    diffs.push_back(zlinalg::SparseMatrix::from_dense(inverse[n - 1] * d[n] * basis[n]));
  specseq::FilteredComplex fc;
  fc.complex = zlinalg::ChainComplex(0, ranks, std::move(diffs));
  fc.level = std::move(level);
  return fc;
}

}  // namespace etale::corpus
