#include "etale/groupoid.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace etale::groupoid {

using invsgp::InverseSemigroup;
using invsgp::PartialMap;

FiniteGroupoid FiniteGroupoid::build(std::vector<std::string> unit_names, std::vector<Arrow> nonunit_arrows,
                                     const std::function<std::size_t(std::size_t, std::size_t)> &compose) {
  FiniteGroupoid g;
  const std::size_t u = unit_names.size();
  g.units_ = std::move(unit_names);
  g.names_ = g.units_;
  for (std::size_t k = 0; k < u; ++k) {
    g.range_.push_back(k);
    g.source_.push_back(k);
  }
  for (auto &a : nonunit_arrows) {
    if (a.range >= u || a.source >= u)
      throw std::invalid_argument("groupoid: arrow '" + a.name + "' has an endpoint outside the unit list");
    g.names_.push_back(std::move(a.name));
    g.range_.push_back(a.range);
    g.source_.push_back(a.source);
  }
  {
    std::set<std::string> seen(g.names_.begin(), g.names_.end());
    if (seen.size() != g.names_.size())
      throw std::invalid_argument("groupoid: arrow and unit names must be distinct");
  }
  const std::size_t n = g.names_.size();
  g.into_.assign(u, {});
  g.pos_into_.assign(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    g.pos_into_[a] = g.into_[g.range_[a]].size();
    g.into_[g.range_[a]].push_back(a);
  }
  g.comp_.assign(n, {});
  for (std::size_t a = 0; a < n; ++a) {
    const auto &hs = g.into_[g.source_[a]];
    g.comp_[a].resize(hs.size());
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const std::size_t h = hs[k];
      const std::size_t ah = compose(a, h);
      if (ah >= n)
        throw std::invalid_argument("groupoid: product of '" + g.names_[a] + "' and '" + g.names_[h] +
                                    "' is missing or out of range");
      if (g.range_[ah] != g.range_[a] || g.source_[ah] != g.source_[h])
        throw std::invalid_argument("groupoid: product of '" + g.names_[a] + "' and '" + g.names_[h] +
                                    "' has the wrong range or source");
      g.comp_[a][k] = ah;
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (g.compose(g.range_[a], a) != a || g.compose(a, g.source_[a]) != a)
      throw std::invalid_argument("groupoid: unit arrows do not act as identities on '" + g.names_[a] + "'");
  }
  g.inverse_.assign(n, npos);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b : g.into_[g.source_[a]])
      if (g.source_[b] == g.range_[a] && g.compose(a, b) == g.range_[a] && g.compose(b, a) == g.source_[a]) {
        g.inverse_[a] = b;
        break;
      }
  for (std::size_t a = 0; a < n; ++a)
    if (g.inverse_[a] == npos)
      throw std::invalid_argument("groupoid: arrow '" + g.names_[a] + "' has no inverse");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t k = 0; k < g.into_[g.source_[a]].size(); ++k) {
      const std::size_t b = g.into_[g.source_[a]][k];
      const std::size_t ab = g.comp_[a][k];
      for (std::size_t j = 0; j < g.into_[g.source_[b]].size(); ++j) {
        const std::size_t c = g.into_[g.source_[b]][j];
        if (g.compose(ab, c) != g.compose(a, g.comp_[b][j]))
          throw std::invalid_argument("groupoid: composition is not associative on ('" + g.names_[a] + "', '" +
                                      g.names_[b] + "', '" + g.names_[c] + "')");
      }
    }
  return g;
}

std::optional<std::size_t> FiniteGroupoid::find_arrow(const std::string &name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::optional<std::size_t> FiniteGroupoid::find_unit(const std::string &name) const {
  auto it = std::find(units_.begin(), units_.end(), name);
  if (it == units_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - units_.begin());
}

std::size_t FiniteGroupoid::compose(std::size_t g, std::size_t h) const {
  if (source_[g] != range_[h])
    throw std::invalid_argument("groupoid: '" + names_[g] + "' and '" + names_[h] + "' are not composable");
  return comp_[g][pos_into_[h]];
}

std::vector<std::size_t> FiniteGroupoid::arrows_between(std::size_t target, std::size_t src) const {
  std::vector<std::size_t> out;
  for (std::size_t a : into_[target])
    if (source_[a] == src)
      out.push_back(a);
  return out;
}

FiniteGroupoid units_only(std::vector<std::string> names) {
  return FiniteGroupoid::build(std::move(names), {}, [](std::size_t g, std::size_t) { return g; });
}

FiniteGroupoid pair_groupoid(std::size_t n) {
  std::vector<std::string> units;
  for (std::size_t i = 0; i < n; ++i)
    units.push_back("x" + std::to_string(i));
  auto idx = [n](std::size_t i, std::size_t j) { return i == j ? i : n + i * (n - 1) + (j < i ? j : j - 1); };
  std::vector<FiniteGroupoid::Arrow> arrows;
  std::vector<std::pair<std::size_t, std::size_t>> ends(n);
  for (std::size_t i = 0; i < n; ++i)
    ends[i] = {i, i};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) {
        arrows.push_back({"(x" + std::to_string(i) + ",x" + std::to_string(j) + ")", i, j});
        ends.emplace_back(i, j);
      }
  return FiniteGroupoid::build(std::move(units), std::move(arrows), [&](std::size_t g, std::size_t h) {
    return idx(ends[g].first, ends[h].second);
  });
}

FiniteGroupoid group_groupoid(const FiniteGroup &g, const std::string &prefix) {
  std::vector<std::size_t> to_elem{g.identity()}, to_arrow(g.order());
  for (std::size_t a = 0; a < g.order(); ++a)
    if (a != g.identity())
      to_elem.push_back(a);
  for (std::size_t k = 0; k < to_elem.size(); ++k)
    to_arrow[to_elem[k]] = k;
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t k = 1; k < to_elem.size(); ++k)
    arrows.push_back({prefix + std::to_string(to_elem[k]), 0, 0});
  return FiniteGroupoid::build({prefix + std::to_string(g.identity())}, std::move(arrows),
                               [&](std::size_t a, std::size_t b) { return to_arrow[g.mul(to_elem[a], to_elem[b])]; });
}

FiniteGroupoid transitive_groupoid(std::size_t n, const FiniteGroup &g, const std::string &prefix) {
  const std::size_t m = g.order();
  std::vector<std::string> units;
  for (std::size_t i = 0; i < n; ++i)
    units.push_back("x" + std::to_string(i));
  // Arrow (i, k, j) for group element k; units are (i, identity, i).
  std::vector<std::size_t> ri, gi, si;
  std::vector<std::vector<std::vector<std::size_t>>> index(n, std::vector<std::vector<std::size_t>>(m, std::vector<std::size_t>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    index[i][g.identity()][i] = i;
    ri.push_back(i);
    gi.push_back(g.identity());
    si.push_back(i);
  }
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j && k == g.identity())
          continue;
        index[i][k][j] = n + arrows.size();
        arrows.push_back({"(x" + std::to_string(i) + "," + prefix + std::to_string(k) + ",x" + std::to_string(j) + ")", i, j});
        ri.push_back(i);
        gi.push_back(k);
        si.push_back(j);
      }
  return FiniteGroupoid::build(std::move(units), std::move(arrows), [&](std::size_t a, std::size_t b) {
    return index[ri[a]][g.mul(gi[a], gi[b])][si[b]];
  });
}

FiniteGroupoid disjoint_union(const FiniteGroupoid &a, const FiniteGroupoid &b) {
  const std::size_t ua = a.unit_count(), ub = b.unit_count();
  std::set<std::string> taken;
  for (std::size_t k = 0; k < a.arrow_count(); ++k)
    taken.insert(a.arrow_name(k));
  auto fresh = [&](std::string s) {
    while (taken.count(s))
      s += "'";
    taken.insert(s);
    return s;
  };
  std::vector<std::string> units = a.unit_names();
  std::vector<std::string> bnames(b.arrow_count());
  for (std::size_t u = 0; u < ub; ++u) {
    bnames[u] = fresh(b.unit_name(u));
    units.push_back(bnames[u]);
  }
  for (std::size_t k = ub; k < b.arrow_count(); ++k)
    bnames[k] = fresh(b.arrow_name(k));
  // new index of a's arrows and b's arrows
  std::vector<std::size_t> ia(a.arrow_count()), ib(b.arrow_count());
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t u = 0; u < ua; ++u)
    ia[u] = u;
  for (std::size_t u = 0; u < ub; ++u)
    ib[u] = ua + u;
  std::size_t next = ua + ub;
  std::vector<std::pair<int, std::size_t>> origin(ua + ub);
  for (std::size_t u = 0; u < ua; ++u)
    origin[u] = {0, u};
  for (std::size_t u = 0; u < ub; ++u)
    origin[ua + u] = {1, u};
  for (std::size_t k = ua; k < a.arrow_count(); ++k) {
    ia[k] = next++;
    arrows.push_back({a.arrow_name(k), a.range(k), a.source(k)});
    origin.emplace_back(0, k);
  }
  for (std::size_t k = ub; k < b.arrow_count(); ++k) {
    ib[k] = next++;
    arrows.push_back({bnames[k], ua + b.range(k), ua + b.source(k)});
    origin.emplace_back(1, k);
  }
  return FiniteGroupoid::build(std::move(units), std::move(arrows), [&](std::size_t g, std::size_t h) {
    auto [sg, kg] = origin[g];
    auto [sh, kh] = origin[h];
    if (sg != sh)
      return npos;
    return sg == 0 ? ia[a.compose(kg, kh)] : ib[b.compose(kg, kh)];
  });
}

IsotropyGroup isotropy_group(const FiniteGroupoid &g, std::size_t x) {
  if (x >= g.unit_count())
    throw std::invalid_argument("isotropy_group: unit index out of range");
  IsotropyGroup out;
  out.arrows = g.arrows_between(x, x);
  std::vector<std::size_t> pos(g.arrow_count(), npos);
  for (std::size_t k = 0; k < out.arrows.size(); ++k)
    pos[out.arrows[k]] = k;
  const std::size_t m = out.arrows.size();
  std::vector<std::vector<std::size_t>> t(m, std::vector<std::size_t>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      t[i][j] = pos[g.compose(out.arrows[i], out.arrows[j])];
  out.group = FiniteGroup(std::move(t));
  return out;
}

namespace {
Embedded embed_arrows(const FiniteGroupoid &g, const std::vector<std::size_t> &units,
                      const std::vector<std::size_t> &arrows) {
  std::vector<std::size_t> unit_pos(g.unit_count(), npos), arrow_pos(g.arrow_count(), npos);
  for (std::size_t k = 0; k < units.size(); ++k)
    unit_pos[units[k]] = k;
  Embedded e;
  e.unit_map = units;
  e.arrow_map = units;
  std::vector<std::string> unit_names;
  for (std::size_t u : units)
    unit_names.push_back(g.unit_name(u));
  std::vector<FiniteGroupoid::Arrow> nonunit;
  for (std::size_t a : arrows)
    if (!g.is_unit(a)) {
      if (unit_pos[g.range(a)] == npos || unit_pos[g.source(a)] == npos)
        throw std::invalid_argument("subgroupoid: arrow '" + g.arrow_name(a) + "' leaves the unit set");
      nonunit.push_back({g.arrow_name(a), unit_pos[g.range(a)], unit_pos[g.source(a)]});
      e.arrow_map.push_back(a);
    }
  for (std::size_t k = 0; k < e.arrow_map.size(); ++k)
    arrow_pos[e.arrow_map[k]] = k;
  e.groupoid = FiniteGroupoid::build(std::move(unit_names), std::move(nonunit), [&](std::size_t x, std::size_t y) {
    std::size_t p = arrow_pos[g.compose(e.arrow_map[x], e.arrow_map[y])];
    if (p == npos)
      throw std::invalid_argument("subgroupoid: arrow set is not closed under composition");
    return p;
  });
  for (std::size_t k = 0; k < e.arrow_map.size(); ++k)
    if (arrow_pos[g.inverse(e.arrow_map[k])] == npos)
      throw std::invalid_argument("subgroupoid: arrow set is not closed under inverses");
  return e;
}
}  // namespace

Embedded restriction(const FiniteGroupoid &g, const std::vector<std::size_t> &units) {
  std::vector<char> in(g.unit_count(), 0);
  for (std::size_t u : units) {
    if (u >= g.unit_count())
      throw std::invalid_argument("restriction: unit index out of range");
    if (in[u])
      throw std::invalid_argument("restriction: repeated unit");
    in[u] = 1;
  }
  std::vector<std::size_t> arrows;
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    if (in[g.range(a)] && in[g.source(a)])
      arrows.push_back(a);
  return embed_arrows(g, units, arrows);
}

Embedded subgroupoid(const FiniteGroupoid &g, std::vector<std::size_t> arrows) {
  std::sort(arrows.begin(), arrows.end());
  arrows.erase(std::unique(arrows.begin(), arrows.end()), arrows.end());
  std::set<std::size_t> touched;
  for (std::size_t a : arrows) {
    if (a >= g.arrow_count())
      throw std::invalid_argument("subgroupoid: arrow index out of range");
    touched.insert(g.range(a));
    touched.insert(g.source(a));
  }
  for (std::size_t u : touched)
    if (!std::binary_search(arrows.begin(), arrows.end(), u))
      throw std::invalid_argument("subgroupoid: missing unit arrow '" + g.unit_name(u) + "'");
  return embed_arrows(g, std::vector<std::size_t>(touched.begin(), touched.end()), arrows);
}

OrbitDecomposition orbit_decomposition(const FiniteGroupoid &g) {
  OrbitDecomposition out;
  const std::size_t n = g.unit_count();
  out.orbit_of.assign(n, npos);
  for (std::size_t x = 0; x < n; ++x) {
    if (out.orbit_of[x] != npos)
      continue;
    const std::size_t k = out.orbits.size();
    std::vector<std::size_t> orbit;
    for (std::size_t a : g.arrows_into(x))
      if (out.orbit_of[g.source(a)] == npos) {
        out.orbit_of[g.source(a)] = k;
        orbit.push_back(g.source(a));
      }
    std::sort(orbit.begin(), orbit.end());
    out.orbits.push_back(std::move(orbit));
  }
  out.conjugation_verified = true;
  for (const auto &orbit : out.orbits) {
    const std::size_t rep = orbit.front();
    out.isotropy.push_back(isotropy_group(g, rep));
    const auto &iso = out.isotropy.back();
    for (std::size_t u : orbit) {
      auto t = g.arrows_between(u, rep).front();
      auto other = isotropy_group(g, u);
      std::vector<std::size_t> pos(g.arrow_count(), npos);
      for (std::size_t k = 0; k < other.arrows.size(); ++k)
        pos[other.arrows[k]] = k;
      std::vector<std::size_t> phi;
      for (std::size_t a : iso.arrows)
        phi.push_back(pos[g.compose(g.compose(t, a), g.inverse(t))]);
      std::vector<std::size_t> sorted = phi;
      std::sort(sorted.begin(), sorted.end());
      bool ok = other.arrows.size() == iso.arrows.size() &&
                std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() && sorted.back() != npos;
      for (std::size_t i = 0; ok && i < phi.size(); ++i)
        for (std::size_t j = 0; ok && j < phi.size(); ++j)
          ok = phi[iso.group.mul(i, j)] == other.group.mul(phi[i], phi[j]);
      out.conjugation_verified = out.conjugation_verified && ok;
    }
  }
  if (!out.conjugation_verified)
    throw std::logic_error("orbit_decomposition: isotropy groups in one orbit are not conjugate");
  return out;
}

bool is_homomorphism(const FiniteGroupoid &a, const FiniteGroupoid &b, const std::vector<std::size_t> &m) {
  if (m.size() != a.arrow_count())
    return false;
  for (std::size_t x : m)
    if (x >= b.arrow_count())
      return false;
  for (std::size_t u = 0; u < a.unit_count(); ++u)
    if (!b.is_unit(m[u]))
      return false;
  for (std::size_t g = 0; g < a.arrow_count(); ++g) {
    if (b.range(m[g]) != m[a.range(g)] || b.source(m[g]) != m[a.source(g)])
      return false;
    for (std::size_t k = 0; k < a.arrows_into(a.source(g)).size(); ++k) {
      const std::size_t h = a.arrows_into(a.source(g))[k];
      if (m[a.compose_at(g, k)] != b.compose(m[g], m[h]))
        return false;
    }
  }
  return true;
}

std::optional<std::vector<std::size_t>> find_isomorphism(const FiniteGroupoid &a, const FiniteGroupoid &b) {
  if (a.unit_count() != b.unit_count() || a.arrow_count() != b.arrow_count())
    return std::nullopt;
  auto da = orbit_decomposition(a), db = orbit_decomposition(b);
  if (da.orbits.size() != db.orbits.size())
    return std::nullopt;
  std::vector<char> used(db.orbits.size(), 0);
  std::vector<std::size_t> m(a.arrow_count(), npos);
  for (std::size_t i = 0; i < da.orbits.size(); ++i) {
    std::optional<std::vector<std::size_t>> psi;
    std::size_t j = 0;
    for (; j < db.orbits.size(); ++j) {
      if (used[j] || db.orbits[j].size() != da.orbits[i].size())
        continue;
      psi = find_isomorphism(da.isotropy[i].group, db.isotropy[j].group);
      if (psi)
        break;
    }
    if (!psi)
      return std::nullopt;
    used[j] = 1;
    const auto &oa = da.orbits[i], &ob = db.orbits[j];
    const std::size_t xa = oa.front(), xb = ob.front();
    std::vector<std::size_t> unit_b(a.unit_count(), npos);
    std::vector<std::size_t> ta(a.unit_count(), npos), tb(b.unit_count(), npos);
    for (std::size_t k = 0; k < oa.size(); ++k) {
      unit_b[oa[k]] = ob[k];
      ta[oa[k]] = a.arrows_between(oa[k], xa).front();
      tb[ob[k]] = b.arrows_between(ob[k], xb).front();
    }
    std::vector<std::size_t> pos_a(a.arrow_count(), npos);
    for (std::size_t k = 0; k < da.isotropy[i].arrows.size(); ++k)
      pos_a[da.isotropy[i].arrows[k]] = k;
    for (std::size_t u : oa)
      for (std::size_t g : a.arrows_into(u)) {
        const std::size_t v = a.source(g);
        // g = t_u k t_v^{-1}
        const std::size_t k = a.compose(a.compose(a.inverse(ta[u]), g), ta[v]);
        const std::size_t kb = db.isotropy[j].arrows[(*psi)[pos_a[k]]];
        m[g] = b.compose(b.compose(tb[unit_b[u]], kb), b.inverse(tb[unit_b[v]]));
      }
  }
  if (!is_homomorphism(a, b, m))
    throw std::logic_error("find_isomorphism: constructed map is not a functor");
  std::vector<std::size_t> sorted = m;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::logic_error("find_isomorphism: constructed map is not injective");
  return m;
}

namespace {
PartialMap compose_maps(const PartialMap &s, const PartialMap &t) {
  PartialMap r(t.size(), -1);
  for (std::size_t x = 0; x < t.size(); ++x)
    if (t[x] >= 0)
      r[x] = s[static_cast<std::size_t>(t[x])];
  return r;
}
PartialMap invert_map(const PartialMap &s) {
  PartialMap r(s.size(), -1);
  for (std::size_t x = 0; x < s.size(); ++x)
    if (s[x] >= 0)
      r[static_cast<std::size_t>(s[x])] = static_cast<int>(x);
  return r;
}
}  // namespace

ActionCheck validate_action(const SAction &a) {
  const auto &s = a.semigroup;
  const std::size_t n = a.points.size();
  if (a.maps.size() != s.size())
    return {false, "action lists " + std::to_string(a.maps.size()) + " maps for " + std::to_string(s.size()) +
                       " elements"};
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (a.maps[e].size() != n)
      return {false, "map of '" + s.name(e) + "' has the wrong length"};
    std::vector<char> hit(n, 0);
    for (int y : a.maps[e]) {
      if (y < -1 || y >= static_cast<int>(n))
        return {false, "map of '" + s.name(e) + "' has a value out of range"};
      if (y >= 0 && hit[static_cast<std::size_t>(y)]++)
        return {false, "map of '" + s.name(e) + "' is not injective"};
    }
  }
  for (std::size_t x = 0; x < s.size(); ++x) {
    if (a.maps[s.star(x)] != invert_map(a.maps[x]))
      return {false, "map of '" + s.name(s.star(x)) + "' is not the inverse of the map of '" + s.name(x) + "'"};
    for (std::size_t y = 0; y < s.size(); ++y)
      if (a.maps[s.mul(x, y)] != compose_maps(a.maps[x], a.maps[y]))
        return {false, "action is not multiplicative at ('" + s.name(x) + "', '" + s.name(y) + "')"};
  }
  for (std::size_t y = 0; y < n; ++y) {
    bool covered = false;
    for (std::size_t e : s.idempotents())
      covered = covered || a.maps[e][y] >= 0;
    if (!covered)
      return {false, "point '" + a.points[y] + "' lies in no idempotent domain (degenerate action)"};
  }
  return {};
}

SAction restrict_to_support(const SAction &a) {
  const auto &s = a.semigroup;
  std::vector<int> keep(a.points.size(), -1);
  SAction out;
  out.semigroup = s;
  for (std::size_t y = 0; y < a.points.size(); ++y)
    for (std::size_t e : s.idempotents())
      if (a.maps[e][y] >= 0 && keep[y] < 0) {
        keep[y] = static_cast<int>(out.points.size());
        out.points.push_back(a.points[y]);
      }
  for (const auto &m : a.maps) {
    PartialMap r(out.points.size(), -1);
    for (std::size_t y = 0; y < m.size(); ++y)
      if (keep[y] >= 0 && m[y] >= 0)
        r[static_cast<std::size_t>(keep[y])] = keep[static_cast<std::size_t>(m[y])];
    out.maps.push_back(std::move(r));
  }
  return out;
}

ActionCheck validate_gset(const FiniteGroupoid &g, const GSet &x) {
  const std::size_t n = x.points.size();
  if (x.anchor.size() != n)
    return {false, "anchor has the wrong length"};
  for (std::size_t p = 0; p < n; ++p)
    if (x.anchor[p] >= g.unit_count())
      return {false, "anchor of '" + x.points[p] + "' is not a unit"};
  if (x.act.size() != g.arrow_count())
    return {false, "action table has the wrong number of rows"};
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    if (x.act[a].size() != n)
      return {false, "action row of '" + g.arrow_name(a) + "' has the wrong length"};
    for (std::size_t p = 0; p < n; ++p) {
      const bool want = g.source(a) == x.anchor[p];
      const std::size_t q = x.act[a][p];
      if (want != (q != npos))
        return {false, "'" + g.arrow_name(a) + "' . '" + x.points[p] + "' is defined off the anchor fibre"};
      if (!want)
        continue;
      if (q >= n)
        return {false, "'" + g.arrow_name(a) + "' . '" + x.points[p] + "' is out of range"};
      if (x.anchor[q] != g.range(a))
        return {false, "anchor is not equivariant at ('" + g.arrow_name(a) + "', '" + x.points[p] + "')"};
      if (g.is_unit(a) && q != p)
        return {false, "unit '" + g.arrow_name(a) + "' moves '" + x.points[p] + "'"};
    }
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    for (std::size_t b : g.arrows_into(g.source(a)))
      for (std::size_t p = 0; p < n; ++p)
        if (x.anchor[p] == g.source(b) && x.act[g.compose(a, b)][p] != x.act[a][x.act[b][p]])
          return {false, "action is not multiplicative at ('" + g.arrow_name(a) + "', '" + g.arrow_name(b) +
                             "', '" + x.points[p] + "')"};
  return {};
}

GSet unit_gset(const FiniteGroupoid &g) {
  GSet x;
  x.points = g.unit_names();
  for (std::size_t u = 0; u < g.unit_count(); ++u)
    x.anchor.push_back(u);
  x.act.assign(g.arrow_count(), std::vector<std::size_t>(g.unit_count(), npos));
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    x.act[a][g.source(a)] = g.range(a);
  return x;
}

GSet translation_gset(const FiniteGroupoid &g) {
  GSet x;
  const std::size_t n = g.arrow_count();
  for (std::size_t a = 0; a < n; ++a) {
    x.points.push_back(g.arrow_name(a));
    x.anchor.push_back(g.range(a));
  }
  x.act.assign(n, std::vector<std::size_t>(n, npos));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b : g.arrows_into(g.source(a)))
      x.act[a][b] = g.compose(a, b);
  return x;
}

SAction spectral_action(const InverseSemigroup &s) {
  SAction a;
  a.semigroup = s;
  auto ex = s.nonzero_idempotents();
  std::vector<std::size_t> pos(s.size(), npos);
  for (std::size_t k = 0; k < ex.size(); ++k) {
    pos[ex[k]] = k;
    a.points.push_back(s.name(ex[k]));
  }
  a.maps.assign(s.size(), PartialMap(ex.size(), -1));
  for (std::size_t t = 0; t < s.size(); ++t) {
    const std::size_t d = s.source_idempotent(t);
    for (std::size_t k = 0; k < ex.size(); ++k)
      if (s.leq(ex[k], d))
        a.maps[t][k] = static_cast<int>(pos[s.mul(s.mul(t, ex[k]), s.star(t))]);
  }
  return a;
}

SAction natural_action(const invsgp::PartialBijectionSemigroup &p) {
  SAction a;
  a.semigroup = p.semigroup;
  for (std::size_t x = 0; x < p.points; ++x)
    a.points.push_back(std::to_string(x));
  a.maps = p.maps;
  return a;
}

GermGroupoid transformation_groupoid(const SAction &a) {
  auto check = validate_action(a);
  if (!check.valid)
    throw std::invalid_argument("transformation_groupoid: invalid action: " + check.message);
  const auto &s = a.semigroup;
  const std::size_t np = a.points.size();
  auto idem = s.idempotents();
  GermGroupoid out;
  // germ_of[x][t] = arrow index of [t, x]
  std::vector<std::vector<std::size_t>> germ_of(np, std::vector<std::size_t>(s.size(), npos));
  std::vector<FiniteGroupoid::Arrow> arrows;
  out.unit_point.resize(np);
  out.germ_element.assign(np, npos);
  out.germ_point.resize(np);
  std::iota(out.unit_point.begin(), out.unit_point.end(), 0);
  std::iota(out.germ_point.begin(), out.germ_point.end(), 0);
  for (std::size_t x = 0; x < np; ++x) {
    std::vector<std::size_t> cover;
    for (std::size_t e : idem)
      if (a.defined(e, x))
        cover.push_back(e);
    // Idempotents first, so the unit germ is represented by an idempotent.
    std::vector<std::size_t> candidates = cover;
    for (std::size_t t = 0; t < s.size(); ++t)
      if (a.defined(t, x) && !s.is_idempotent(t))
        candidates.push_back(t);
    std::vector<std::size_t> reps;
    for (std::size_t t : candidates) {
      std::size_t cls = npos;
      for (std::size_t r : reps) {
        for (std::size_t e : cover)
          if (s.mul(t, e) == s.mul(r, e)) {
            cls = germ_of[x][r];
            break;
          }
        if (cls != npos)
          break;
      }
      if (cls == npos) {
        reps.push_back(t);
        if (s.is_idempotent(t)) {
          cls = x;
          out.germ_element[x] = t;
        } else {
          cls = np + arrows.size();
          arrows.push_back({"[" + s.name(t) + "," + a.points[x] + "]", a.act(t, x), x});
          out.germ_element.push_back(t);
          out.germ_point.push_back(x);
        }
      }
      germ_of[x][t] = cls;
    }
  }
  out.groupoid = FiniteGroupoid::build(a.points, std::move(arrows), [&](std::size_t g, std::size_t h) -> std::size_t {
    if (g < np)
      return h;
    if (h < np)
      return g;
    return germ_of[out.germ_point[h]][s.mul(out.germ_element[g], out.germ_element[h])];
  });
  return out;
}

GermGroupoid universal_groupoid(const InverseSemigroup &s) {
  invsgp::require_valid(s);
  auto ex = s.nonzero_idempotents();
  std::vector<std::size_t> unit_of(s.size(), npos);
  for (std::size_t k = 0; k < ex.size(); ++k)
    unit_of[ex[k]] = k;
  GermGroupoid out;
  std::vector<std::size_t> by_key(s.size(), npos);
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    out.germ_element.push_back(ex[k]);
    out.germ_point.push_back(ex[k]);
    out.unit_point.push_back(ex[k]);
    by_key[ex[k]] = k;
  }
  // [t, e] with e <= t*t; on the principal filter of e, [t, e] = [t', e] iff
  // t e = t' e, so the germ is determined by t e.
  for (std::size_t t : s.nonzero_elements())
    for (std::size_t e : ex) {
      if (!s.leq(e, s.source_idempotent(t)))
        continue;
      const std::size_t key = s.mul(t, e);
      if (by_key[key] != npos)
        continue;
      by_key[key] = ex.size() + arrows.size();
      arrows.push_back({"[" + s.name(t) + "," + s.name(e) + "]", unit_of[s.range_idempotent(key)], unit_of[e]});
      out.germ_element.push_back(key);
      out.germ_point.push_back(e);
    }
  out.groupoid = FiniteGroupoid::build(
      [&] {
        std::vector<std::string> names;
        for (std::size_t e : ex)
          names.push_back(s.name(e));
        return names;
      }(),
      std::move(arrows),
      [&](std::size_t g, std::size_t h) { return by_key[s.mul(out.germ_element[g], out.germ_element[h])]; });
  return out;
}

GermGroupoid discrete_groupoid(const InverseSemigroup &s) {
  invsgp::require_valid(s);
  auto ex = s.nonzero_idempotents();
  std::vector<std::size_t> unit_of(s.size(), npos), arrow_of(s.size(), npos);
  GermGroupoid out;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    unit_of[ex[k]] = k;
    arrow_of[ex[k]] = k;
    names.push_back(s.name(ex[k]));
    out.germ_element.push_back(ex[k]);
    out.germ_point.push_back(ex[k]);
    out.unit_point.push_back(ex[k]);
  }
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t t : s.nonzero_elements())
    if (!s.is_idempotent(t)) {
      arrow_of[t] = ex.size() + arrows.size();
      arrows.push_back({s.name(t), unit_of[s.range_idempotent(t)], unit_of[s.source_idempotent(t)]});
      out.germ_element.push_back(t);
      out.germ_point.push_back(s.source_idempotent(t));
    }
  out.groupoid = FiniteGroupoid::build(std::move(names), std::move(arrows), [&](std::size_t g, std::size_t h) {
    const std::size_t p = s.mul(out.germ_element[g], out.germ_element[h]);
    if (arrow_of[p] == npos)
      throw std::logic_error("discrete_groupoid: composable product is zero");
    return arrow_of[p];
  });
  return out;
}

}  // namespace etale::groupoid
