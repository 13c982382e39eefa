#include "etale/invsgp.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace etale::invsgp {

InverseSemigroup::InverseSemigroup(std::vector<std::string> names, std::optional<std::size_t> zero,
                                   std::vector<std::vector<std::size_t>> product, std::vector<std::size_t> star)
    : names_(std::move(names)), zero_(zero), product_(std::move(product)), star_(std::move(star)) {
  const std::size_t n = names_.size();
  if (product_.size() != n || star_.size() != n)
    throw std::invalid_argument("InverseSemigroup: product and star tables must have " + std::to_string(n) + " rows");
  for (std::size_t a = 0; a < n; ++a) {
    if (product_[a].size() != n)
      throw std::invalid_argument("InverseSemigroup: product row " + std::to_string(a) + " has wrong length");
    for (std::size_t x : product_[a])
      if (x >= n)
        throw std::invalid_argument("InverseSemigroup: product entry out of range in row " + std::to_string(a));
    if (star_[a] >= n)
      throw std::invalid_argument("InverseSemigroup: star entry out of range at " + std::to_string(a));
  }
  if (zero_ && *zero_ >= n)
    throw std::invalid_argument("InverseSemigroup: zero index out of range");
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != n)
    throw std::invalid_argument("InverseSemigroup: element names are not distinct");
}

std::optional<std::size_t> InverseSemigroup::index_of(const std::string &name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::size_t> InverseSemigroup::idempotents() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < size(); ++a)
    if (is_idempotent(a))
      out.push_back(a);
  return out;
}

std::vector<std::size_t> InverseSemigroup::nonzero_idempotents() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < size(); ++a)
    if (!is_zero(a) && is_idempotent(a))
      out.push_back(a);
  return out;
}

std::vector<std::size_t> InverseSemigroup::nonzero_elements() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < size(); ++a)
    if (!is_zero(a))
      out.push_back(a);
  return out;
}

namespace {
ValidationResult fail(std::string axiom, std::vector<std::size_t> witness, std::string message) {
  return ValidationResult{false, Violation{std::move(axiom), std::move(witness), std::move(message)}};
}
}  // namespace

ValidationResult validate(const InverseSemigroup &s) {
  const std::size_t n = s.size();
  auto nm = [&](std::size_t a) { return s.name(a); };
  if (s.zero()) {
    std::size_t z = *s.zero();
    for (std::size_t a = 0; a < n; ++a)
      if (s.mul(z, a) != z || s.mul(a, z) != z)
        return fail("zero", {z, a}, "zero " + nm(z) + " does not absorb " + nm(a));
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t ab = s.mul(a, b);
      for (std::size_t c = 0; c < n; ++c)
        if (s.mul(ab, c) != s.mul(a, s.mul(b, c)))
          return fail("associativity", {a, b, c},
                      "(" + nm(a) + " " + nm(b) + ") " + nm(c) + " != " + nm(a) + " (" + nm(b) + " " + nm(c) + ")");
    }
  for (std::size_t a = 0; a < n; ++a)
    if (s.star(s.star(a)) != a)
      return fail("involution", {a}, nm(a) + "** != " + nm(a));
  for (std::size_t a = 0; a < n; ++a)
    if (s.mul(s.mul(a, s.star(a)), a) != a)
      return fail("regularity", {a}, nm(a) + " " + nm(a) + "* " + nm(a) + " != " + nm(a));
  auto e = s.idempotents();
  for (std::size_t x : e)
    for (std::size_t y : e)
      if (s.mul(x, y) != s.mul(y, x))
        return fail("commuting idempotents", {x, y}, "idempotents " + nm(x) + " and " + nm(y) + " do not commute");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (s.star(s.mul(a, b)) != s.mul(s.star(b), s.star(a)))
        return fail("anti-automorphism", {a, b}, "(" + nm(a) + " " + nm(b) + ")* != " + nm(b) + "* " + nm(a) + "*");
  return {};
}

void require_valid(const InverseSemigroup &s) {
  auto r = validate(s);
  if (!r)
    throw std::invalid_argument("invalid inverse semigroup: " + r.violation->axiom + ": " + r.violation->message);
}

Stabilizer stabilizer_subgroup(const InverseSemigroup &s, std::size_t e) {
  if (e >= s.size() || !s.is_idempotent(e) || s.is_zero(e))
    throw std::invalid_argument("stabilizer_subgroup: element is not a nonzero idempotent");
  Stabilizer st;
  st.idempotent = e;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (s.source_idempotent(a) == e && s.range_idempotent(a) == e)
      st.elements.push_back(a);
  std::vector<std::size_t> pos(s.size(), npos);
  for (std::size_t k = 0; k < st.elements.size(); ++k)
    pos[st.elements[k]] = k;
  const std::size_t m = st.elements.size();
  std::vector<std::vector<std::size_t>> t(m, std::vector<std::size_t>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (pos[s.star(st.elements[i])] == npos)
      throw std::logic_error("stabilizer_subgroup: not closed under star");
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t p = pos[s.mul(st.elements[i], st.elements[j])];
      if (p == npos)
        throw std::logic_error("stabilizer_subgroup: not closed under product");
      t[i][j] = p;
    }
  }
  st.group = FiniteGroup(std::move(t));
  return st;
}

namespace {
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};
}  // namespace

IdempotentOrbits orbits_on_idempotents(const InverseSemigroup &s) {
  auto ex = s.nonzero_idempotents();
  UnionFind uf(s.size());
  for (std::size_t t : s.nonzero_elements()) {
    const std::size_t d = s.source_idempotent(t);
    for (std::size_t e : ex)
      if (s.leq(e, d))
        uf.unite(e, s.mul(s.mul(t, e), s.star(t)));
  }
  IdempotentOrbits out;
  out.orbit_of.assign(s.size(), npos);
  std::map<std::size_t, std::size_t> root_to_orbit;
  for (std::size_t e : ex) {
    auto [it, fresh] = root_to_orbit.emplace(uf.find(e), out.orbits.size());
    if (fresh)
      out.orbits.emplace_back();
    out.orbits[it->second].push_back(e);
    out.orbit_of[e] = it->second;
  }
  return out;
}

WeakSemilatticeReport weak_semilattice_check(const InverseSemigroup &s) {
  WeakSemilatticeReport rep;
  const std::size_t n = s.size();
  std::vector<std::vector<char>> le(n, std::vector<char>(n, 0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      le[u][v] = s.leq(u, v);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      std::vector<std::size_t> lower;
      for (std::size_t u = 0; u < n; ++u)
        if (le[u][a] && le[u][b])
          lower.push_back(u);
      LowerBounds lb{a, b, {}};
      for (std::size_t u : lower) {
        bool maximal = true;
        for (std::size_t v : lower)
          if (v != u && le[u][v]) {
            maximal = false;
            break;
          }
        if (maximal)
          lb.generators.push_back(u);
      }
      // The down-set generated by the maximal elements must be the whole set.
      for (std::size_t u : lower) {
        bool covered = false;
        for (std::size_t g : lb.generators)
          covered = covered || le[u][g];
        if (!covered)
          rep.holds = false;
      }
      rep.pairs.push_back(std::move(lb));
    }
  return rep;
}

void check_digraph(const Digraph &g) {
  std::set<std::string> names;
  for (const auto &v : g.vertices)
    if (!names.insert(v).second)
      throw std::invalid_argument("digraph: duplicate name '" + v + "'");
  for (const auto &e : g.edges) {
    if (!names.insert(e.name).second)
      throw std::invalid_argument("digraph: duplicate name '" + e.name + "'");
    if (e.src >= g.vertices.size() || e.dst >= g.vertices.size())
      throw std::invalid_argument("digraph: edge '" + e.name + "' has an endpoint outside the vertex list");
  }
}

namespace {
std::optional<std::vector<std::size_t>> topological_order(const Digraph &g) {
  std::vector<std::size_t> indeg(g.vertices.size(), 0), order;
  for (const auto &e : g.edges)
    ++indeg[e.dst];
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    if (indeg[v] == 0)
      order.push_back(v);
  for (std::size_t k = 0; k < order.size(); ++k)
    for (const auto &e : g.edges)
      if (e.src == order[k] && --indeg[e.dst] == 0)
        order.push_back(e.dst);
  if (order.size() != g.vertices.size())
    return std::nullopt;
  return order;
}
}  // namespace

bool is_acyclic(const Digraph &g) { return topological_order(g).has_value(); }

InverseSemigroup graph_inverse_semigroup(const Digraph &g) {
  check_digraph(g);
  if (!is_acyclic(g))
    throw std::invalid_argument("graph_inverse_semigroup: the graph has a directed cycle, so it has infinitely many "
                                "paths and the semigroup is infinite");
  struct Path {
    std::size_t start, end;
    std::vector<std::size_t> edges;
  };
  std::vector<Path> paths;
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    paths.push_back({v, v, {}});
  // Breadth-first by length, extending each path along outgoing edges.
  for (std::size_t k = 0; k < paths.size(); ++k)
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei)
      if (g.edges[ei].src == paths[k].end) {
        Path p = paths[k];
        p.edges.push_back(ei);
        p.end = g.edges[ei].dst;
        paths.push_back(std::move(p));
      }
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> path_index;
  for (std::size_t k = 0; k < paths.size(); ++k)
    path_index[{paths[k].start, paths[k].edges}] = k;

  auto path_name = [&](const Path &p) {
    if (p.edges.empty())
      return g.vertices[p.start];
    std::string s;
    for (std::size_t i = 0; i < p.edges.size(); ++i)
      s += (i ? "." : "") + g.edges[p.edges[i]].name;
    return s;
  };
  auto star_name = [&](const Path &q) {
    std::string s;
    for (std::size_t i = q.edges.size(); i-- > 0;)
      s += g.edges[q.edges[i]].name + "*" + (i ? "." : "");
    return s;
  };

  std::vector<std::pair<std::size_t, std::size_t>> elems;  // (p, q), index 0 unused for zero
  elems.emplace_back(npos, npos);
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    elems.emplace_back(v, v);
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t q = 0; q < paths.size(); ++q)
      if (paths[p].end == paths[q].end && !(p == q && paths[p].edges.empty()))
        elems.emplace_back(p, q);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> elem_index;
  for (std::size_t k = 1; k < elems.size(); ++k)
    elem_index[elems[k]] = k;

  std::vector<std::string> names(elems.size());
  for (std::size_t k = 1; k < elems.size(); ++k) {
    const Path &p = paths[elems[k].first], &q = paths[elems[k].second];
    if (q.edges.empty())
      names[k] = path_name(p);
    else if (p.edges.empty())
      names[k] = star_name(q);
    else
      names[k] = path_name(p) + "." + star_name(q);
  }
  {
    std::set<std::string> taken(names.begin() + 1, names.end());
    names[0] = "0";
    while (taken.count(names[0]))
      names[0] += "'";
  }

  // Returns the path k with big = small k, if small is a prefix of big.
  auto strip_prefix = [&](const Path &small, const Path &big) -> std::optional<std::size_t> {
    if (small.start != big.start || small.edges.size() > big.edges.size())
      return std::nullopt;
    if (!std::equal(small.edges.begin(), small.edges.end(), big.edges.begin()))
      return std::nullopt;
    std::vector<std::size_t> rest(big.edges.begin() + static_cast<std::ptrdiff_t>(small.edges.size()),
                                  big.edges.end());
    return path_index.at({small.end, rest});
  };
  auto concat = [&](const Path &a, const Path &b) {
    std::vector<std::size_t> e = a.edges;
    e.insert(e.end(), b.edges.begin(), b.edges.end());
    return path_index.at({a.start, e});
  };
  auto pair_index = [&](std::size_t p, std::size_t q) {
    if (p == q && paths[p].edges.empty())
      return p + 1;
    return elem_index.at({p, q});
  };

  const std::size_t n = elems.size();
  std::vector<std::vector<std::size_t>> product(n, std::vector<std::size_t>(n, 0));
  std::vector<std::size_t> star(n, 0);
  for (std::size_t a = 1; a < n; ++a) {
    auto [p, q] = elems[a];
    star[a] = pair_index(q, p);
    for (std::size_t b = 1; b < n; ++b) {
      auto [r, s] = elems[b];
      if (auto k = strip_prefix(paths[q], paths[r]))
        product[a][b] = pair_index(concat(paths[p], paths[*k]), s);
      else if (auto k2 = strip_prefix(paths[r], paths[q]))
        product[a][b] = pair_index(p, concat(paths[s], paths[*k2]));
    }
  }
  return InverseSemigroup(std::move(names), std::size_t{0}, std::move(product), std::move(star));
}

namespace {

PartialMap compose(const PartialMap &s, const PartialMap &t) {
  PartialMap r(t.size(), -1);
  for (std::size_t x = 0; x < t.size(); ++x)
    if (t[x] >= 0)
      r[x] = s[static_cast<std::size_t>(t[x])];
  return r;
}

PartialMap invert(const PartialMap &s) {
  PartialMap r(s.size(), -1);
  for (std::size_t x = 0; x < s.size(); ++x)
    if (s[x] >= 0)
      r[static_cast<std::size_t>(s[x])] = static_cast<int>(x);
  return r;
}

std::string map_name(const PartialMap &m) {
  std::string s = "[";
  for (std::size_t x = 0; x < m.size(); ++x)
    s += (x ? "," : "") + (m[x] < 0 ? std::string("-") : std::to_string(m[x]));
  return s + "]";
}

PartialBijectionSemigroup from_closed_maps(std::size_t points, std::vector<PartialMap> maps) {
  std::map<PartialMap, std::size_t> index;
  for (std::size_t k = 0; k < maps.size(); ++k)
    index[maps[k]] = k;
  const std::size_t n = maps.size();
  std::vector<std::string> names(n);
  std::vector<std::vector<std::size_t>> product(n, std::vector<std::size_t>(n));
  std::vector<std::size_t> star(n);
  for (std::size_t a = 0; a < n; ++a) {
    names[a] = map_name(maps[a]);
    star[a] = index.at(invert(maps[a]));
    for (std::size_t b = 0; b < n; ++b)
      product[a][b] = index.at(compose(maps[a], maps[b]));
  }
  const std::size_t zero = index.at(PartialMap(points, -1));
  PartialBijectionSemigroup out;
  out.semigroup = InverseSemigroup(std::move(names), zero, std::move(product), std::move(star));
  out.maps = std::move(maps);
  out.points = points;
  return out;
}

void check_partial_map(std::size_t points, const PartialMap &m) {
  if (m.size() != points)
    throw std::invalid_argument("partial map has " + std::to_string(m.size()) + " entries, expected " +
                                std::to_string(points));
  std::vector<char> hit(points, 0);
  for (int y : m) {
    if (y < -1 || y >= static_cast<int>(points))
      throw std::invalid_argument("partial map value out of range");
    if (y >= 0) {
      if (hit[static_cast<std::size_t>(y)])
        throw std::invalid_argument("partial map is not injective: " + map_name(m));
      hit[static_cast<std::size_t>(y)] = 1;
    }
  }
}

}  // namespace

PartialBijectionSemigroup from_partial_bijections(std::size_t points, const std::vector<PartialMap> &gens) {
  std::vector<PartialMap> maps{PartialMap(points, -1)};
  std::set<PartialMap> seen{maps.front()};
  auto add = [&](const PartialMap &m) {
    if (seen.insert(m).second)
      maps.push_back(m);
  };
  for (const auto &g : gens) {
    check_partial_map(points, g);
    add(g);
    add(invert(g));
  }
  for (std::size_t k = 0; k < maps.size(); ++k)
    for (std::size_t j = 0; j <= k; ++j) {
      add(compose(maps[k], maps[j]));
      add(compose(maps[j], maps[k]));
    }
  return from_closed_maps(points, std::move(maps));
}

namespace {
void all_partial_injections(std::size_t n, std::size_t x, PartialMap &cur, std::vector<char> &used,
                            std::vector<PartialMap> &out) {
  if (x == n) {
    out.push_back(cur);
    return;
  }
  cur[x] = -1;
  all_partial_injections(n, x + 1, cur, used, out);
  for (std::size_t y = 0; y < n; ++y)
    if (!used[y]) {
      used[y] = 1;
      cur[x] = static_cast<int>(y);
      all_partial_injections(n, x + 1, cur, used, out);
      used[y] = 0;
    }
  cur[x] = -1;
}
}  // namespace

PartialBijectionSemigroup symmetric_inverse_monoid(std::size_t n) {
  std::vector<PartialMap> maps;
  PartialMap cur(n, -1);
  std::vector<char> used(n, 0);
  all_partial_injections(n, 0, cur, used, maps);
  return from_closed_maps(n, std::move(maps));
}

PartialBijectionSemigroup order_preserving_injections(std::size_t n) {
  std::vector<PartialMap> all, maps;
  PartialMap cur(n, -1);
  std::vector<char> used(n, 0);
  all_partial_injections(n, 0, cur, used, all);
  for (auto &m : all) {
    int last = -1;
    bool ok = true;
    for (int y : m)
      if (y >= 0) {
        ok = ok && y > last;
        last = y;
      }
    if (ok)
      maps.push_back(std::move(m));
  }
  return from_closed_maps(n, std::move(maps));
}

InverseSemigroup semilattice(std::vector<std::string> names, std::vector<std::vector<std::size_t>> meet,
                             std::optional<std::size_t> zero) {
  std::vector<std::size_t> star(names.size());
  std::iota(star.begin(), star.end(), 0);
  return InverseSemigroup(std::move(names), zero, std::move(meet), std::move(star));
}

InverseSemigroup powerset_semilattice(std::size_t k) {
  const std::size_t n = std::size_t{1} << k;
  std::vector<std::string> names(n);
  std::vector<std::vector<std::size_t>> meet(n, std::vector<std::size_t>(n));
  for (std::size_t a = 0; a < n; ++a) {
    std::string s = "{";
    bool first = true;
    for (std::size_t b = 0; b < k; ++b)
      if (a >> b & 1) {
        s += (first ? "" : ",") + std::to_string(b);
        first = false;
      }
    names[a] = s + "}";
    for (std::size_t b = 0; b < n; ++b)
      meet[a][b] = a & b;
  }
  return semilattice(std::move(names), std::move(meet), std::size_t{0});
}

InverseSemigroup chain_semilattice(std::size_t k) {
  std::vector<std::string> names{"z"};
  for (std::size_t i = 1; i <= k; ++i)
    names.push_back("e" + std::to_string(i));
  std::vector<std::vector<std::size_t>> meet(k + 1, std::vector<std::size_t>(k + 1));
  for (std::size_t a = 0; a <= k; ++a)
    for (std::size_t b = 0; b <= k; ++b)
      meet[a][b] = std::min(a, b);
  return semilattice(std::move(names), std::move(meet), std::size_t{0});
}

InverseSemigroup group_with_zero(const FiniteGroup &g, const std::string &prefix) {
  const std::size_t n = g.order() + 1;
  std::vector<std::string> names{"0"};
  for (std::size_t a = 0; a < g.order(); ++a)
    names.push_back(prefix + std::to_string(a));
  std::vector<std::vector<std::size_t>> product(n, std::vector<std::size_t>(n, 0));
  std::vector<std::size_t> star(n, 0);
  for (std::size_t a = 1; a < n; ++a) {
    star[a] = g.inverse(a - 1) + 1;
    for (std::size_t b = 1; b < n; ++b)
      product[a][b] = g.mul(a - 1, b - 1) + 1;
  }
  return InverseSemigroup(std::move(names), std::size_t{0}, std::move(product), std::move(star));
}

InverseSemigroup relabel(const InverseSemigroup &s, const std::vector<std::size_t> &perm) {
  const std::size_t n = s.size();
  if (perm.size() != n)
    throw std::invalid_argument("relabel: permutation has the wrong length");
  std::vector<std::string> names(n);
  std::vector<std::vector<std::size_t>> product(n, std::vector<std::size_t>(n));
  std::vector<std::size_t> star(n);
  for (std::size_t a = 0; a < n; ++a) {
    names[perm[a]] = s.name(a);
    star[perm[a]] = perm[s.star(a)];
    for (std::size_t b = 0; b < n; ++b)
      product[perm[a]][perm[b]] = perm[s.mul(a, b)];
  }
  std::optional<std::size_t> zero;
  if (s.zero())
    zero = perm[*s.zero()];
  return InverseSemigroup(std::move(names), zero, std::move(product), std::move(star));
}

}  // namespace etale::invsgp
