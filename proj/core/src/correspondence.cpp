#include "etale/correspondence.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace etale::correspondence {

using groupoid::Embedded;
using groupoid::GSet;
using invsgp::InverseSemigroup;

namespace {

std::vector<std::size_t> invert_index(const std::vector<std::size_t> &map, std::size_t n) {
  std::vector<std::size_t> inv(n, npos);
  for (std::size_t k = 0; k < map.size(); ++k)
    inv[map[k]] = k;
  return inv;
}

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

std::vector<std::vector<std::size_t>> classes(UnionFind &uf, std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(n, npos);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t r = uf.find(x);
    if (slot[r] == npos) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].push_back(x);
  }
  return out;
}

Correspondence from_hom_impl(const FiniteGroupoid &g, const FiniteGroupoid &h, const std::vector<std::size_t> &phi,
                             std::vector<std::pair<std::size_t, std::size_t>> &data) {
  if (phi.size() != g.arrow_count() || !groupoid::is_homomorphism(g, h, phi))
    throw std::invalid_argument("from_homomorphism: arrow map is not a functor");
  data.clear();
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t x = 0; x < g.unit_count(); ++x)
    for (std::size_t a : h.arrows_into(h.range(phi[x]))) {
      index[{x, a}] = data.size();
      data.emplace_back(x, a);
      names.push_back("(" + g.unit_name(x) + "," + h.arrow_name(a) + ")");
      rho.push_back(x);
      sigma.push_back(h.source(a));
    }
  return Correspondence::build(
      g, h, std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) { return index.at({g.range(a), h.compose(phi[a], data[w].second)}); },
      [&](std::size_t w, std::size_t b) { return index.at({data[w].first, h.compose(data[w].second, b)}); });
}

}  // namespace

Correspondence Correspondence::build(FiniteGroupoid left, FiniteGroupoid right, std::vector<std::string> points,
                                     std::vector<std::size_t> rho, std::vector<std::size_t> sigma,
                                     const LeftFn &left_fn, const RightFn &right_fn) {
  const std::size_t n = points.size();
  if (rho.size() != n || sigma.size() != n)
    throw std::invalid_argument("correspondence: anchor maps have the wrong length");
  {
    std::set<std::string> seen(points.begin(), points.end());
    if (seen.size() != n)
      throw std::invalid_argument("correspondence: point names must be distinct");
  }
  for (std::size_t w = 0; w < n; ++w) {
    if (rho[w] >= left.unit_count())
      throw std::invalid_argument("correspondence: rho of '" + points[w] + "' is not a unit");
    if (sigma[w] >= right.unit_count())
      throw std::invalid_argument("correspondence: sigma of '" + points[w] + "' is not a unit");
  }
  Correspondence c;
  c.left_ = std::move(left);
  c.right_ = std::move(right);
  c.points_ = std::move(points);
  c.rho_ = std::move(rho);
  c.sigma_ = std::move(sigma);
  c.ltab_.assign(n, {});
  c.rtab_.assign(n, {});
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t a : c.left_.arrows_into(c.rho_[w])) {
      const std::size_t v = left_fn(c.left_.inverse(a), w);
      if (v >= n)
        throw std::invalid_argument("correspondence: left action of '" + c.left_.arrow_name(c.left_.inverse(a)) +
                                    "' on '" + c.points_[w] + "' is out of range");
      c.ltab_[w].push_back(v);
    }
    for (std::size_t h : c.right_.arrows_into(c.sigma_[w])) {
      const std::size_t v = right_fn(w, h);
      if (v >= n)
        throw std::invalid_argument("correspondence: right action of '" + c.right_.arrow_name(h) + "' on '" +
                                    c.points_[w] + "' is out of range");
      c.rtab_[w].push_back(v);
    }
  }
  return c;
}

std::optional<std::size_t> Correspondence::find_point(const std::string &name) const {
  auto it = std::find(points_.begin(), points_.end(), name);
  if (it == points_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - points_.begin());
}

std::size_t Correspondence::act_left(std::size_t g, std::size_t w) const {
  if (left_.source(g) != rho_[w])
    return npos;
  return ltab_[w][left_.position_into(left_.inverse(g))];
}

std::size_t Correspondence::act_right(std::size_t w, std::size_t h) const {
  if (right_.range(h) != sigma_[w])
    return npos;
  return rtab_[w][right_.position_into(h)];
}

CorrespondenceReport validate_correspondence(const Correspondence &c) {
  CorrespondenceReport rep;
  const auto &g = c.left();
  const auto &h = c.right();
  const std::size_t n = c.size();
  auto fail = [&](const std::string &axiom, const std::string &msg) {
    rep.valid = false;
    rep.axiom = axiom;
    rep.message = msg;
    rep.tight = rep.left_free = rep.open_morita_embedding = false;
    return rep;
  };
  auto pn = [&](std::size_t w) { return "'" + c.point_name(w) + "'"; };
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t a = 0; a < g.arrow_count(); ++a) {
      const std::size_t v = c.act_left(a, w);
      if (v == npos)
        continue;
      if (c.rho(v) != g.range(a) || c.sigma(v) != c.sigma(w))
        return fail("left anchors", "anchors are not compatible with '" + g.arrow_name(a) + "' . " + pn(w));
      if (g.is_unit(a) && v != w)
        return fail("left unit", "unit '" + g.arrow_name(a) + "' moves " + pn(w));
    }
    for (std::size_t b : h.arrows_into(c.sigma(w))) {
      const std::size_t v = c.act_right(w, b);
      if (c.sigma(v) != h.source(b) || c.rho(v) != c.rho(w))
        return fail("right anchors", "anchors are not compatible with " + pn(w) + " . '" + h.arrow_name(b) + "'");
      if (h.is_unit(b) && v != w)
        return fail("right unit", "unit '" + h.arrow_name(b) + "' moves " + pn(w));
    }
  }
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t a : g.arrows_into(c.rho(w))) {
      const std::size_t a0 = g.inverse(a);  // an arrow with source rho(w)
      const std::size_t v = c.act_left(a0, w);
      for (std::size_t b : g.arrows_into(g.range(a0))) {
        const std::size_t b0 = g.inverse(b);  // source r(a0)
        if (c.act_left(g.compose(b0, a0), w) != c.act_left(b0, v))
          return fail("left associativity", "('" + g.arrow_name(b0) + "' '" + g.arrow_name(a0) + "') . " + pn(w) +
                                                " differs from '" + g.arrow_name(b0) + "' . ('" + g.arrow_name(a0) +
                                                "' . " + pn(w) + ")");
      }
      for (std::size_t hb : h.arrows_into(c.sigma(w)))
        if (c.act_right(v, hb) != c.act_left(a0, c.act_right(w, hb)))
          return fail("commuting actions", "actions of '" + g.arrow_name(a0) + "' and '" + h.arrow_name(hb) +
                                               "' do not commute on " + pn(w));
    }
    for (std::size_t b : h.arrows_into(c.sigma(w))) {
      const std::size_t v = c.act_right(w, b);
      for (std::size_t b2 : h.arrows_into(h.source(b)))
        if (c.act_right(v, b2) != c.act_right(w, h.compose(b, b2)))
          return fail("right associativity", "(" + pn(w) + " . '" + h.arrow_name(b) + "') . '" + h.arrow_name(b2) +
                                                 "' differs from " + pn(w) + " . ('" + h.arrow_name(b) + "' '" +
                                                 h.arrow_name(b2) + "')");
      if (v == w && !h.is_unit(b))
        return fail("free right action", "non-unit '" + h.arrow_name(b) + "' fixes " + pn(w));
    }
  }
  auto orbits = right_orbits(c);
  rep.fibre_sizes.assign(g.unit_count(), 0);
  for (std::size_t x : orbits.anchor)
    ++rep.fibre_sizes[x];
  rep.tight = std::all_of(rep.fibre_sizes.begin(), rep.fibre_sizes.end(), [](std::size_t k) { return k == 1; });
  rep.left_free = true;
  for (std::size_t w = 0; w < n && rep.left_free; ++w)
    for (std::size_t a : g.arrows_into(c.rho(w)))
      if (!g.is_unit(a) && c.act_left(g.inverse(a), w) == w) {
        rep.left_free = false;
        break;
      }
  rep.open_morita_embedding = rep.tight && rep.left_free;
  return rep;
}

void require_valid(const Correspondence &c) {
  auto r = validate_correspondence(c);
  if (!r.valid)
    throw std::invalid_argument("invalid correspondence (" + r.axiom + "): " + r.message);
}

RightOrbits right_orbits(const Correspondence &c) {
  const auto &h = c.right();
  const std::size_t n = c.size();
  RightOrbits o;
  o.orbit_of.assign(n, npos);
  o.transporter.assign(n, npos);
  for (std::size_t w = 0; w < n; ++w) {
    if (o.orbit_of[w] != npos)
      continue;
    const std::size_t k = o.orbits.size();
    o.orbits.emplace_back();
    o.anchor.push_back(c.rho(w));
    for (std::size_t b : h.arrows_into(c.sigma(w))) {
      const std::size_t v = c.act_right(w, b);
      if (o.orbit_of[v] != npos)
        continue;
      o.orbit_of[v] = k;
      o.transporter[v] = b;
      o.orbits[k].push_back(v);
    }
    std::sort(o.orbits[k].begin(), o.orbits[k].end());
  }
  return o;
}

std::size_t right_transporter(const Correspondence &c, const RightOrbits &o, std::size_t w1, std::size_t w2) {
  if (o.orbit_of[w1] != o.orbit_of[w2])
    throw std::invalid_argument("right_transporter: points lie in different orbits");
  const auto &h = c.right();
  return h.compose(h.inverse(o.transporter[w1]), o.transporter[w2]);
}

std::vector<std::vector<std::size_t>> bi_orbits(const Correspondence &c) {
  UnionFind uf(c.size());
  for (std::size_t w = 0; w < c.size(); ++w) {
    for (std::size_t a : c.left().arrows_into(c.rho(w)))
      uf.unite(w, c.act_left(c.left().inverse(a), w));
    for (std::size_t b : c.right().arrows_into(c.sigma(w)))
      uf.unite(w, c.act_right(w, b));
  }
  return classes(uf, c.size());
}

Correspondence identity_correspondence(const FiniteGroupoid &g) {
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    names.push_back(g.arrow_name(a));
    rho.push_back(g.range(a));
    sigma.push_back(g.source(a));
  }
  return Correspondence::build(
      g, g, std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) { return g.compose(a, w); },
      [&](std::size_t w, std::size_t b) { return g.compose(w, b); });
}

Correspondence from_homomorphism(const FiniteGroupoid &g, const FiniteGroupoid &h, const std::vector<std::size_t> &phi) {
  std::vector<std::pair<std::size_t, std::size_t>> data;
  return from_hom_impl(g, h, phi, data);
}

Correspondence action_correspondence(const FiniteGroupoid &g, const GSet &x) {
  return action_correspondence(g, x, {"*"}, std::vector<std::size_t>(x.points.size(), 0));
}

Correspondence action_correspondence(const FiniteGroupoid &g, const GSet &x, const std::vector<std::string> &targets,
                                     const std::vector<std::size_t> &sigma) {
  auto check = groupoid::validate_gset(g, x);
  if (!check.valid)
    throw std::invalid_argument("action_correspondence: " + check.message);
  return Correspondence::build(
      g, groupoid::units_only(targets), x.points, x.anchor, sigma,
      [&](std::size_t a, std::size_t w) { return x.act[a][w]; }, [](std::size_t w, std::size_t) { return w; });
}

Correspondence reverse(const Correspondence &c) {
  auto r = validate_correspondence(c);
  if (!r.valid || !r.left_free)
    throw std::invalid_argument("reverse: needs a valid correspondence with a free left action");
  std::vector<std::size_t> rho(c.size()), sigma(c.size());
  for (std::size_t w = 0; w < c.size(); ++w) {
    rho[w] = c.sigma(w);
    sigma[w] = c.rho(w);
  }
  return Correspondence::build(
      c.right(), c.left(), c.points(), std::move(rho), std::move(sigma),
      [&](std::size_t b, std::size_t w) { return c.act_right(w, c.right().inverse(b)); },
      [&](std::size_t w, std::size_t a) { return c.act_left(c.left().inverse(a), w); });
}

Correspondence restrict_points(const Correspondence &c, const std::vector<std::size_t> &points) {
  auto pos = invert_index(points, c.size());
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t w : points) {
    names.push_back(c.point_name(w));
    rho.push_back(c.rho(w));
    sigma.push_back(c.sigma(w));
  }
  auto inside = [&](std::size_t v) {
    if (pos[v] == npos)
      throw std::invalid_argument("restrict_points: subset is not closed under the actions");
    return pos[v];
  };
  return Correspondence::build(
      c.left(), c.right(), std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) { return inside(c.act_left(a, points[w])); },
      [&](std::size_t w, std::size_t b) { return inside(c.act_right(points[w], b)); });
}

std::size_t Composite::class_of(const Correspondence &first, const Correspondence &second, std::size_t w,
                                std::size_t l) const {
  (void)first;
  const std::size_t k = first_orbits.orbit_of[w];
  const std::size_t rep = first_orbits.representative(k);
  return index.at({rep, second.act_left(first_orbits.transporter[w], l)});
}

Composite compose(const Correspondence &first, const Correspondence &second) {
  if (!(first.right() == second.left()))
    throw std::invalid_argument("compose: middle groupoids differ");
  Composite out;
  out.first_orbits = right_orbits(first);
  const auto &o = out.first_orbits;
  const auto &mid = first.right();
  std::vector<std::vector<std::size_t>> over(mid.unit_count());
  for (std::size_t l = 0; l < second.size(); ++l)
    over[second.rho(l)].push_back(l);
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t k = 0; k < o.orbits.size(); ++k) {
    const std::size_t w = o.representative(k);
    for (std::size_t l : over[first.sigma(w)]) {
      out.index[{w, l}] = out.representative.size();
      out.representative.emplace_back(w, l);
      names.push_back("[" + first.point_name(w) + "," + second.point_name(l) + "]");
      rho.push_back(first.rho(w));
      sigma.push_back(second.sigma(l));
    }
  }
  out.correspondence = Correspondence::build(
      first.left(), second.right(), std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t p) {
        const auto [w, l] = out.representative[p];
        return out.class_of(first, second, first.act_left(a, w), l);
      },
      [&](std::size_t p, std::size_t b) {
        const auto [w, l] = out.representative[p];
        return out.index.at({w, second.act_right(l, b)});
      });
  return out;
}

bool is_isomorphism(const Correspondence &a, const Correspondence &b, const std::vector<std::size_t> &map) {
  if (!(a.left() == b.left()) || !(a.right() == b.right()) || a.size() != b.size() || map.size() != a.size())
    return false;
  std::vector<char> hit(b.size(), 0);
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (map[w] >= b.size() || hit[map[w]]++)
      return false;
    if (a.rho(w) != b.rho(map[w]) || a.sigma(w) != b.sigma(map[w]))
      return false;
  }
  for (std::size_t w = 0; w < a.size(); ++w) {
    for (std::size_t g : a.left().arrows_into(a.rho(w))) {
      const std::size_t gi = a.left().inverse(g);
      if (map[a.act_left(gi, w)] != b.act_left(gi, map[w]))
        return false;
    }
    for (std::size_t h : a.right().arrows_into(a.sigma(w)))
      if (map[a.act_right(w, h)] != b.act_right(map[w], h))
        return false;
  }
  return true;
}

std::optional<std::vector<std::size_t>> find_isomorphism(const Correspondence &a, const Correspondence &b) {
  if (!(a.left() == b.left()) || !(a.right() == b.right()) || a.size() != b.size())
    return std::nullopt;
  const std::size_t n = a.size();
  auto orbits = bi_orbits(a);
  std::vector<std::size_t> map(n, npos), inv(n, npos);
  // Extends map from w -> v along both actions; returns the points assigned,
  // or nullopt after undoing them on conflict.
  auto propagate = [&](std::size_t w, std::size_t v) -> std::optional<std::vector<std::size_t>> {
    std::vector<std::size_t> assigned;
    auto undo = [&] {
      for (std::size_t x : assigned) {
        inv[map[x]] = npos;
        map[x] = npos;
      }
    };
    auto assign = [&](std::size_t x, std::size_t y) {
      if (map[x] != npos)
        return map[x] == y;
      if (inv[y] != npos || a.rho(x) != b.rho(y) || a.sigma(x) != b.sigma(y))
        return false;
      map[x] = y;
      inv[y] = x;
      assigned.push_back(x);
      return true;
    };
    if (!assign(w, v)) {
      undo();
      return std::nullopt;
    }
    for (std::size_t i = 0; i < assigned.size(); ++i) {
      const std::size_t x = assigned[i];
      const std::size_t y = map[x];
      for (std::size_t g : a.left().arrows_into(a.rho(x))) {
        const std::size_t gi = a.left().inverse(g);
        if (!assign(a.act_left(gi, x), b.act_left(gi, y))) {
          undo();
          return std::nullopt;
        }
      }
      for (std::size_t h : a.right().arrows_into(a.sigma(x)))
        if (!assign(a.act_right(x, h), b.act_right(y, h))) {
          undo();
          return std::nullopt;
        }
    }
    return assigned;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
    if (k == orbits.size())
      return true;
    const std::size_t w = orbits[k].front();
    for (std::size_t v = 0; v < n; ++v) {
      if (inv[v] != npos || a.rho(w) != b.rho(v) || a.sigma(w) != b.sigma(v))
        continue;
      auto assigned = propagate(w, v);
      if (!assigned)
        continue;
      if (assigned->size() == orbits[k].size() && search(k + 1))
        return true;
      for (std::size_t x : *assigned) {
        inv[map[x]] = npos;
        map[x] = npos;
      }
    }
    return false;
  };
  if (!search(0))
    return std::nullopt;
  if (!is_isomorphism(a, b, map))
    throw std::logic_error("find_isomorphism: propagated map is not equivariant");
  return map;
}

std::size_t LinkingGroupoid::arrow_of(const Correspondence &c, std::size_t w1, std::size_t w2) const {
  const std::size_t k = orbits.orbit_of[w1];
  const std::size_t t = orbits.transporter[w1];
  return index.at({orbits.representative(k), c.act_right(w2, c.right().inverse(t))});
}

LinkingGroupoid linking_groupoid(const Correspondence &c) {
  const auto &h = c.right();
  for (std::size_t w = 0; w < c.size(); ++w)
    for (std::size_t b : h.arrows_into(c.sigma(w)))
      if (!h.is_unit(b) && c.act_right(w, b) == w)
        throw std::invalid_argument("linking_groupoid: right action is not free");
  LinkingGroupoid out;
  out.orbits = right_orbits(c);
  const auto &o = out.orbits;
  const std::size_t nu = o.orbits.size();
  std::vector<std::vector<std::size_t>> by_sigma(h.unit_count());
  for (std::size_t w = 0; w < c.size(); ++w)
    by_sigma[c.sigma(w)].push_back(w);
  std::vector<std::string> units;
  for (std::size_t k = 0; k < nu; ++k) {
    const std::size_t r = o.representative(k);
    units.push_back("[" + c.point_name(r) + "]");
    out.pair_of.emplace_back(r, r);
    out.index[{r, r}] = k;
  }
  std::vector<FiniteGroupoid::Arrow> arrows;
  for (std::size_t k = 0; k < nu; ++k) {
    const std::size_t r = o.representative(k);
    for (std::size_t w : by_sigma[c.sigma(r)]) {
      if (w == r)
        continue;
      out.index[{r, w}] = nu + arrows.size();
      out.pair_of.emplace_back(r, w);
      arrows.push_back({"[" + c.point_name(r) + "," + c.point_name(w) + "*]", k, o.orbit_of[w]});
    }
  }
  out.groupoid = FiniteGroupoid::build(std::move(units), std::move(arrows), [&](std::size_t a, std::size_t b) {
    const auto [r1, w2] = out.pair_of[a];
    const auto [r2, w3] = out.pair_of[b];
    (void)r2;
    return out.index.at({r1, c.act_right(w3, o.transporter[w2])});
  });
  std::set<std::size_t> sig;
  for (std::size_t w = 0; w < c.size(); ++w)
    sig.insert(c.sigma(w));
  out.target = groupoid::restriction(h, std::vector<std::size_t>(sig.begin(), sig.end()));
  const auto unit_pos = invert_index(out.target.unit_map, h.unit_count());
  const auto arrow_pos = invert_index(out.target.arrow_map, h.arrow_count());
  std::vector<std::size_t> rho(c.size()), sigma(c.size());
  for (std::size_t w = 0; w < c.size(); ++w) {
    rho[w] = o.orbit_of[w];
    sigma[w] = unit_pos[c.sigma(w)];
  }
  (void)arrow_pos;
  out.morita = Correspondence::build(
      out.groupoid, out.target.groupoid, c.points(), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) {
        const auto [r, w2] = out.pair_of[a];
        return c.act_right(r, right_transporter(c, o, w2, w));
      },
      [&](std::size_t w, std::size_t b) { return c.act_right(w, out.target.arrow_map[b]); });
  return out;
}

Decomposition decompose(const Correspondence &c) {
  const auto report = validate_correspondence(c);
  if (!report.valid)
    throw std::invalid_argument("decompose: invalid correspondence (" + report.axiom + "): " + report.message);
  Decomposition d;
  d.linking = linking_groupoid(c);
  const auto &lk = d.linking;
  const auto &L = lk.groupoid;
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t a = 0; a < L.arrow_count(); ++a) {
    names.push_back(L.arrow_name(a));
    rho.push_back(c.rho(lk.orbits.representative(L.range(a))));
    sigma.push_back(L.source(a));
  }
  d.actor = Correspondence::build(
      c.left(), L, std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t g, std::size_t a) {
        const auto [r, w2] = lk.pair_of[a];
        return lk.arrow_of(c, c.act_left(g, r), w2);
      },
      [&](std::size_t a, std::size_t b) { return L.compose(a, b); });
  d.morita = lk.morita;
  std::vector<std::pair<std::size_t, std::size_t>> incl_data;
  d.inclusion = from_hom_impl(lk.target.groupoid, c.right(), lk.target.arrow_map, incl_data);
  const auto am = compose(d.actor, d.morita);
  const auto all = compose(am.correspondence, d.inclusion);
  d.recomposed = all.correspondence;
  d.witness.resize(d.recomposed.size());
  for (std::size_t p = 0; p < d.recomposed.size(); ++p) {
    const auto [q, lam] = all.representative[p];
    const auto [a, w] = am.representative[q];
    d.witness[p] = c.act_right(d.morita.act_left(a, w), incl_data[lam].second);
  }
  d.witness_verified = is_isomorphism(d.recomposed, c, d.witness);
  if (report.open_morita_embedding) {
    const auto &g = c.left();
    std::vector<std::size_t> rep_over(g.unit_count(), npos);
    for (std::size_t k = 0; k < lk.orbits.orbits.size(); ++k)
      rep_over[lk.orbits.anchor[k]] = lk.orbits.representative(k);
    std::vector<std::size_t> phi(g.arrow_count());
    for (std::size_t a = 0; a < g.arrow_count(); ++a) {
      const std::size_t r = rep_over[g.source(a)];
      phi[a] = lk.arrow_of(c, c.act_left(a, r), r);
    }
    bool ok = groupoid::is_homomorphism(g, L, phi);
    std::set<std::size_t> image(phi.begin(), phi.end());
    ok = ok && image.size() == phi.size();
    std::set<std::size_t> unit_image;
    for (std::size_t x = 0; x < g.unit_count(); ++x)
      if (L.is_unit(phi[x]))
        unit_image.insert(phi[x]);
    ok = ok && unit_image.size() == L.unit_count() && g.unit_count() == L.unit_count();
    d.actor_embedding = std::move(phi);
    d.actor_embedding_verified = ok;
  }
  return d;
}

bool is_slice(const Correspondence &c, const std::vector<std::size_t> &u) {
  const auto o = right_orbits(c);
  std::set<std::size_t> sig, orb;
  for (std::size_t w : u) {
    if (w >= c.size() || !sig.insert(c.sigma(w)).second || !orb.insert(o.orbit_of[w]).second)
      return false;
  }
  return true;
}

std::vector<std::size_t> canonical_slice(const Correspondence &c) {
  // Lowest-index point per orbit whose sigma is still free; orbits are taken
  // in order and skipped when every sigma value is already used.
  const auto o = right_orbits(c);
  std::set<std::size_t> used;
  std::vector<std::size_t> out;
  for (const auto &orbit : o.orbits)
    for (std::size_t w : orbit)
      if (used.insert(c.sigma(w)).second) {
        out.push_back(w);
        break;
      }
  return out;
}

SliceHomomorphism slice_to_homomorphism(const Correspondence &c, const std::vector<std::size_t> &u) {
  const auto report = validate_correspondence(c);
  if (!report.valid || !report.tight)
    throw std::invalid_argument("slice_to_homomorphism: correspondence must be valid and tight");
  if (!is_slice(c, u))
    throw std::invalid_argument("slice_to_homomorphism: subset is not a slice");
  const auto o = right_orbits(c);
  const auto &g = c.left();
  std::vector<std::size_t> over(g.unit_count(), npos);
  std::set<std::size_t> units;
  for (std::size_t w : u) {
    over[c.rho(w)] = w;
    units.insert(c.rho(w));
  }
  SliceHomomorphism out;
  out.domain = groupoid::restriction(g, std::vector<std::size_t>(units.begin(), units.end()));
  const auto &dom = out.domain.groupoid;
  for (std::size_t a = 0; a < dom.arrow_count(); ++a) {
    const std::size_t ga = out.domain.arrow_map[a];
    const std::size_t w = over[g.source(ga)];
    const std::size_t w2 = over[g.range(ga)];
    const std::size_t moved = c.act_left(ga, w);
    const std::size_t h = right_transporter(c, o, w2, moved);
    if (c.act_right(w2, h) != moved)
      throw std::logic_error("slice_to_homomorphism: transporter identity fails");
    out.arrow_map.push_back(h);
  }
  if (!groupoid::is_homomorphism(dom, c.right(), out.arrow_map))
    throw std::logic_error("slice_to_homomorphism: result is not a functor");
  std::set<std::size_t> image(out.arrow_map.begin(), out.arrow_map.end());
  out.injective = image.size() == out.arrow_map.size();
  if (report.open_morita_embedding && !out.injective)
    throw std::logic_error("slice_to_homomorphism: embedding gave a non-injective homomorphism");
  return out;
}

Correspondence subgroupoid_embedding(const FiniteGroupoid &g, const Embedded &k) {
  const auto unit_pos = invert_index(k.unit_map, g.unit_count());
  std::vector<std::size_t> pts;
  std::vector<std::size_t> pos(g.arrow_count(), npos);
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    if (unit_pos[g.range(a)] != npos) {
      pos[a] = pts.size();
      pts.push_back(a);
      names.push_back(g.arrow_name(a));
      rho.push_back(unit_pos[g.range(a)]);
      sigma.push_back(g.source(a));
    }
  return Correspondence::build(
      k.groupoid, g, std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t x, std::size_t w) { return pos[g.compose(k.arrow_map[x], pts[w])]; },
      [&](std::size_t w, std::size_t b) { return pos[g.compose(pts[w], b)]; });
}

EmbeddingFamily unit_family(const FiniteGroupoid &g) {
  std::vector<std::size_t> units(g.unit_count());
  std::iota(units.begin(), units.end(), 0);
  EmbeddingFamily f;
  f.ambient = g;
  f.members.push_back(subgroupoid_embedding(g, groupoid::subgroupoid(g, units)));
  f.labels.push_back("units");
  return f;
}

EmbeddingFamily whole_family(const FiniteGroupoid &g) {
  std::vector<std::size_t> all(g.arrow_count());
  std::iota(all.begin(), all.end(), 0);
  EmbeddingFamily f;
  f.ambient = g;
  f.members.push_back(subgroupoid_embedding(g, groupoid::subgroupoid(g, all)));
  f.labels.push_back("whole");
  return f;
}

void validate_family(const EmbeddingFamily &f) {
  if (f.labels.size() != f.members.size())
    throw std::invalid_argument("family: label count differs from member count");
  for (std::size_t k = 0; k < f.members.size(); ++k) {
    const auto &m = f.members[k];
    if (!(m.right() == f.ambient))
      throw std::invalid_argument("family: member '" + f.labels[k] + "' does not map into the ambient groupoid");
    auto r = validate_correspondence(m);
    if (!r.valid)
      throw std::invalid_argument("family: member '" + f.labels[k] + "' is invalid: " + r.message);
    if (!r.open_morita_embedding)
      throw std::invalid_argument("family: member '" + f.labels[k] + "' is not an open Morita embedding");
  }
}

std::optional<std::size_t> lifting_point(const Correspondence &c, std::size_t x, const std::vector<std::size_t> &gamma) {
  const auto &g = c.left();
  for (std::size_t w = 0; w < c.size(); ++w) {
    if (c.sigma(w) != x)
      continue;
    std::set<std::size_t> orbit;
    for (std::size_t a : g.arrows_into(c.rho(w)))
      orbit.insert(c.act_left(g.inverse(a), w));
    bool ok = true;
    for (std::size_t y : gamma)
      if (!orbit.count(c.act_right(w, y))) {
        ok = false;
        break;
      }
    if (ok)
      return w;
  }
  return std::nullopt;
}

namespace {

std::vector<std::vector<std::size_t>> isotropy_subgroups(const FiniteGroupoid &g, std::size_t x) {
  auto iso = groupoid::isotropy_group(g, x);
  std::vector<std::vector<std::size_t>> out;
  for (const auto &sub : iso.group.subgroups()) {
    std::vector<std::size_t> arrows;
    for (std::size_t e : sub)
      arrows.push_back(iso.arrows[e]);
    std::sort(arrows.begin(), arrows.end());
    out.push_back(std::move(arrows));
  }
  return out;
}

}  // namespace

ConditionPReport check_condition_P(const FiniteGroupoid &g, const EmbeddingFamily &fam) {
  validate_family(fam);
  if (!(fam.ambient == g))
    throw std::invalid_argument("check_condition_P: family is for a different groupoid");
  ConditionPReport rep;
  for (std::size_t x = 0; x < g.unit_count(); ++x)
    for (auto &sub : isotropy_subgroups(g, x)) {
      PWitness w;
      w.unit = x;
      w.subgroup = std::move(sub);
      for (std::size_t m = 0; m < fam.members.size() && !w.found; ++m)
        if (auto p = lifting_point(fam.members[m], x, w.subgroup)) {
          w.found = true;
          w.member = m;
          w.point = *p;
        }
      if (!w.found && rep.holds) {
        rep.holds = false;
        rep.failure = w;
      }
      rep.witnesses.push_back(std::move(w));
    }
  return rep;
}

ConditionPReport check_isotropy_lifting(const Correspondence &c) {
  ConditionPReport rep;
  const auto &h = c.right();
  for (std::size_t x = 0; x < h.unit_count(); ++x)
    for (auto &sub : isotropy_subgroups(h, x)) {
      PWitness w;
      w.unit = x;
      w.subgroup = std::move(sub);
      if (auto p = lifting_point(c, x, w.subgroup)) {
        w.found = true;
        w.member = 0;
        w.point = *p;
      } else if (rep.holds) {
        rep.holds = false;
        rep.failure = w;
      }
      rep.witnesses.push_back(std::move(w));
    }
  return rep;
}

namespace {

std::string ffin_label(const InverseSemigroup &s, std::size_t e, const std::vector<std::size_t> &f) {
  std::string out = "(" + s.name(e) + ",{";
  for (std::size_t k = 0; k < f.size(); ++k)
    out += (k ? "," : "") + s.name(f[k]);
  return out + "})";
}

template <class ArrowsFor>
FfinFamily ffin_common(const InverseSemigroup &s, const FiniteGroupoid &ambient, ArrowsFor arrows_for) {
  FfinFamily out;
  out.family.ambient = ambient;
  for (std::size_t e : s.nonzero_idempotents()) {
    const auto stab = invsgp::stabilizer_subgroup(s, e);
    for (const auto &sub : stab.group.subgroups()) {
      std::vector<std::size_t> f;
      for (std::size_t k : sub)
        f.push_back(stab.elements[k]);
      std::sort(f.begin(), f.end());
      auto emb = groupoid::subgroupoid(ambient, arrows_for(e, f));
      out.family.members.push_back(subgroupoid_embedding(ambient, emb));
      out.family.labels.push_back(ffin_label(s, e, f));
      out.idempotent.push_back(e);
      out.subgroup.push_back(std::move(f));
      out.subgroupoids.push_back(std::move(emb));
    }
  }
  return out;
}

}  // namespace

FfinFamily family_Ffin(const groupoid::SAction &a) {
  const auto t = groupoid::transformation_groupoid(a);
  const auto &s = a.semigroup;
  const auto &g = t.groupoid;
  const auto idem = s.idempotents();
  auto germ = [&](std::size_t el, std::size_t y) {
    for (std::size_t b : g.arrows_into(y)) {
      const std::size_t arrow = g.inverse(b);  // source y
      const std::size_t rep = t.germ_element[arrow];
      if (rep == npos)
        continue;
      for (std::size_t e : idem)
        if (a.defined(e, y) && s.mul(el, e) == s.mul(rep, e))
          return arrow;
    }
    throw std::logic_error("family_Ffin: germ not found");
  };
  return ffin_common(s, g, [&](std::size_t e, const std::vector<std::size_t> &f) {
    std::set<std::size_t> arrows;
    for (std::size_t y = 0; y < a.points.size(); ++y)
      if (a.defined(e, y))
        for (std::size_t el : f)
          arrows.insert(germ(el, y));
    return std::vector<std::size_t>(arrows.begin(), arrows.end());
  });
}

FfinFamily family_Ffin_discrete(const InverseSemigroup &s) {
  const auto d = groupoid::discrete_groupoid(s);
  const auto arrow_of = invert_index(d.germ_element, s.size());
  const auto idem = s.idempotents();
  return ffin_common(s, d.groupoid, [&](std::size_t, const std::vector<std::size_t> &f) {
    std::set<std::size_t> arrows;
    for (std::size_t el : f)
      for (std::size_t e : idem) {
        const std::size_t p = s.mul(el, e);
        if (!s.is_zero(p))
          arrows.insert(arrow_of[p]);
      }
    return std::vector<std::size_t>(arrows.begin(), arrows.end());
  });
}

FfinFamily family_Ffin_universal(const InverseSemigroup &s) {
  const auto u = groupoid::universal_groupoid(s);
  const auto by_key = invert_index(u.germ_element, s.size());
  const auto ex = s.nonzero_idempotents();
  return ffin_common(s, u.groupoid, [&](std::size_t e, const std::vector<std::size_t> &f) {
    std::set<std::size_t> arrows;
    for (std::size_t d : ex)
      if (s.leq(d, e))
        for (std::size_t el : f)
          arrows.insert(by_key[s.mul(el, d)]);
    return std::vector<std::size_t>(arrows.begin(), arrows.end());
  });
}

namespace {

// Iso-type classifier for small correspondences over fixed groupoids.
struct TypeTable {
  std::vector<Correspondence> reps;
  std::size_t classify(const Correspondence &c) {
    for (std::size_t k = 0; k < reps.size(); ++k)
      if (reps[k].size() == c.size() && find_isomorphism(c, reps[k]))
        return k;
    reps.push_back(c);
    return reps.size() - 1;
  }
  std::map<std::size_t, std::size_t> census(const Correspondence &c) {
    std::map<std::size_t, std::size_t> out;
    for (const auto &orbit : bi_orbits(c))
      ++out[classify(restrict_points(c, orbit))];
    return out;
  }
};

std::optional<CompatiblePair> find_lambda(const Correspondence &x, const Correspondence &omega_l) {
  const auto y = compose(x, reverse(omega_l)).correspondence;
  const auto pieces = bi_orbits(y);
  TypeTable types;
  auto need = types.census(x);
  std::vector<std::map<std::size_t, std::size_t>> offer;
  for (const auto &piece : pieces)
    offer.push_back(types.census(compose(restrict_points(y, piece), omega_l).correspondence));
  std::vector<char> take(pieces.size(), 0);
  std::size_t budget = 200000;
  std::function<bool(std::size_t)> dfs = [&](std::size_t k) -> bool {
    if (budget-- == 0)
      return false;
    bool done = std::all_of(need.begin(), need.end(), [](const auto &kv) { return kv.second == 0; });
    if (done)
      return true;
    if (k == pieces.size())
      return false;
    bool fits = !offer[k].empty();
    for (const auto &[t, cnt] : offer[k])
      if (need[t] < cnt)
        fits = false;
    if (fits) {
      for (const auto &[t, cnt] : offer[k])
        need[t] -= cnt;
      take[k] = 1;
      if (dfs(k + 1))
        return true;
      take[k] = 0;
      for (const auto &[t, cnt] : offer[k])
        need[t] += cnt;
    }
    return dfs(k + 1);
  };
  if (!dfs(0))
    return std::nullopt;
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < pieces.size(); ++k)
    if (take[k])
      chosen.insert(chosen.end(), pieces[k].begin(), pieces[k].end());
  std::sort(chosen.begin(), chosen.end());
  CompatiblePair out;
  out.lambda = restrict_points(y, chosen);
  const auto z = compose(out.lambda, omega_l).correspondence;
  auto iso = find_isomorphism(z, x);
  if (!iso)
    return std::nullopt;
  out.witness = std::move(*iso);
  return out;
}

}  // namespace

CompatibilityReport check_compatible(const Correspondence &c, const EmbeddingFamily &e, const EmbeddingFamily &f) {
  require_valid(c);
  validate_family(e);
  validate_family(f);
  if (!(e.ambient == c.left()) || !(f.ambient == c.right()))
    throw std::invalid_argument("check_compatible: families do not match the correspondence");
  CompatibilityReport rep;
  for (std::size_t k = 0; k < e.members.size(); ++k) {
    const auto x = compose(e.members[k], c).correspondence;
    bool matched = false;
    for (std::size_t l = 0; l < f.members.size() && !matched; ++l)
      if (auto pair = find_lambda(x, f.members[l])) {
        pair->e_member = k;
        pair->f_member = l;
        rep.pairing.push_back(std::move(*pair));
        matched = true;
      }
    if (!matched && rep.compatible) {
      rep.compatible = false;
      rep.unmatched = k;
    }
  }
  return rep;
}

Transfer transfer_embedding(const Correspondence &c, const Correspondence &k) {
  const auto kr = validate_correspondence(k);
  if (!kr.valid || !kr.open_morita_embedding)
    throw std::invalid_argument("transfer_embedding: second argument must be an open Morita embedding");
  require_valid(c);
  Transfer t;
  t.composite = compose(k, c).correspondence;
  t.decomposition = decompose(t.composite);
  const auto &d = t.decomposition;
  const auto &m = d.linking.groupoid;
  const auto &kg = k.left();
  std::set<std::size_t> arrows;
  for (std::size_t u = 0; u < m.unit_count(); ++u)
    for (std::size_t a : kg.arrows_into(d.actor.rho(u)))
      arrows.insert(d.actor.act_left(kg.inverse(a), u));
  t.orbit_subgroupoid = groupoid::subgroupoid(m, std::vector<std::size_t>(arrows.begin(), arrows.end()));
  const auto &lg = t.orbit_subgroupoid;
  const auto unit_pos = invert_index(lg.unit_map, m.unit_count());
  const auto arrow_pos = invert_index(lg.arrow_map, m.arrow_count());
  std::vector<std::size_t> rho(t.composite.size()), sigma(t.composite.size());
  for (std::size_t w = 0; w < t.composite.size(); ++w) {
    rho[w] = unit_pos[d.linking.orbits.orbit_of[w]];
    sigma[w] = t.composite.sigma(w);
  }
  t.embedding = Correspondence::build(
      lg.groupoid, t.composite.right(), t.composite.points(), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) { return d.morita.act_left(lg.arrow_map[a], w); },
      [&](std::size_t w, std::size_t h) { return t.composite.act_right(w, h); });
  std::vector<std::string> names;
  std::vector<std::size_t> arho, asigma;
  for (std::size_t a = 0; a < lg.groupoid.arrow_count(); ++a) {
    names.push_back(lg.groupoid.arrow_name(a));
    arho.push_back(d.actor.rho(lg.arrow_map[a]));
    asigma.push_back(lg.groupoid.source(a));
  }
  t.actor = Correspondence::build(
      kg, lg.groupoid, std::move(names), std::move(arho), std::move(asigma),
      [&](std::size_t x, std::size_t a) {
        const std::size_t v = arrow_pos[d.actor.act_left(x, lg.arrow_map[a])];
        if (v == npos)
          throw std::logic_error("transfer_embedding: orbit subgroupoid is not invariant");
        return v;
      },
      [&](std::size_t a, std::size_t b) { return lg.groupoid.compose(a, b); });
  const auto z = compose(t.actor, t.embedding);
  t.witness.resize(z.correspondence.size());
  for (std::size_t p = 0; p < z.correspondence.size(); ++p) {
    const auto [a, w] = z.representative[p];
    t.witness[p] = t.embedding.act_left(a, w);
  }
  const auto er = validate_correspondence(t.embedding);
  const auto ar = validate_correspondence(t.actor);
  t.verified = er.valid && er.open_morita_embedding && ar.valid &&
               is_isomorphism(z.correspondence, t.composite, t.witness);
  return t;
}

OmegaS omega_S(const InverseSemigroup &s) {
  OmegaS out;
  out.discrete = groupoid::discrete_groupoid(s);
  out.universal = groupoid::universal_groupoid(s);
  const auto &d = out.discrete.groupoid;
  const auto &u = out.universal.groupoid;
  const auto ex = s.nonzero_idempotents();
  const auto by_key = invert_index(out.universal.germ_element, s.size());
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<std::string> names;
  std::vector<std::size_t> rho, sigma;
  std::vector<std::size_t> unit_k;
  for (std::size_t k = 0; k < ex.size(); ++k)
    for (std::size_t g = 0; g < u.arrow_count(); ++g)
      if (s.leq(ex[u.range(g)], ex[k])) {
        index[{k, g}] = out.point_data.size();
        out.point_data.emplace_back(ex[k], g);
        names.push_back("(" + s.name(ex[k]) + "," + u.arrow_name(g) + ")");
        rho.push_back(k);
        unit_k.push_back(k);
        sigma.push_back(u.source(g));
      }
  out.correspondence = Correspondence::build(
      d, u, std::move(names), std::move(rho), std::move(sigma),
      [&](std::size_t a, std::size_t w) {
        const std::size_t t = out.discrete.germ_element[a];
        const std::size_t gamma = out.point_data[w].second;
        // germ [t, r(gamma)] is keyed by t r(gamma)
        const std::size_t germ = by_key[s.mul(t, ex[u.range(gamma)])];
        return index.at({d.range(a), u.compose(germ, gamma)});
      },
      [&](std::size_t w, std::size_t h) { return index.at({unit_k[w], u.compose(out.point_data[w].second, h)}); });
  return out;
}

}  // namespace etale::correspondence
