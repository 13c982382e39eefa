#include "etale/gmodule.hpp"

#include <stdexcept>

namespace etale::gmodule {

using correspondence::Correspondence;
using zlinalg::is_well_defined;

std::size_t GModule::total_generators() const {
  std::size_t n = 0;
  for (const auto &f : fibres)
    n += f.generators();
  return n;
}

std::vector<std::size_t> GModule::offsets() const {
  std::vector<std::size_t> out(fibres.size() + 1, 0);
  for (std::size_t u = 0; u < fibres.size(); ++u)
    out[u + 1] = out[u] + fibres[u].generators();
  return out;
}

namespace {

bool equal_in(const IntMatrix &a, const IntMatrix &b, const FgAbGroup &target) {
  return zlinalg::maps_equal(a, b, target);
}

}  // namespace

ModuleCheck validate_module(const GModule &m) {
  const auto &g = m.groupoid;
  if (m.fibres.size() != g.unit_count())
    return {false, "module has " + std::to_string(m.fibres.size()) + " fibres for " + std::to_string(g.unit_count()) +
                       " units"};
  if (m.action.size() != g.arrow_count())
    return {false, "module has " + std::to_string(m.action.size()) + " action matrices for " +
                       std::to_string(g.arrow_count()) + " arrows"};
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    const auto &src = m.fibres[g.source(a)];
    const auto &dst = m.fibres[g.range(a)];
    const auto &mat = m.action[a];
    if (mat.rows() != dst.generators() || mat.cols() != src.generators())
      return {false, "action of '" + g.arrow_name(a) + "' has shape " + std::to_string(mat.rows()) + "x" +
                         std::to_string(mat.cols())};
    if (!is_well_defined(mat, src, dst))
      return {false, "action of '" + g.arrow_name(a) + "' does not respect the fibre presentations"};
    if (g.is_unit(a) && !equal_in(mat, IntMatrix::identity(src.generators()), dst))
      return {false, "unit '" + g.arrow_name(a) + "' does not act as the identity"};
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    for (std::size_t b : g.arrows_into(g.source(a)))
      if (!equal_in(m.action[g.compose(a, b)], m.action[a] * m.action[b], m.fibres[g.range(a)]))
        return {false, "action is not functorial at ('" + g.arrow_name(a) + "', '" + g.arrow_name(b) + "')"};
  return {};
}

void require_valid(const GModule &m) {
  auto r = validate_module(m);
  if (!r.valid)
    throw std::invalid_argument("invalid module: " + r.message);
}

ModuleCheck validate_map(const GModule &source, const GModule &target, const GModuleMap &f) {
  if (!(source.groupoid == target.groupoid))
    return {false, "module map between modules over different groupoids"};
  const auto &g = source.groupoid;
  if (f.components.size() != g.unit_count())
    return {false, "module map has " + std::to_string(f.components.size()) + " components"};
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    const auto &c = f.components[u];
    if (c.rows() != target.fibres[u].generators() || c.cols() != source.fibres[u].generators())
      return {false, "component at '" + g.unit_name(u) + "' has the wrong shape"};
    if (!is_well_defined(c, source.fibres[u], target.fibres[u]))
      return {false, "component at '" + g.unit_name(u) + "' does not respect the presentations"};
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a)
    if (!equal_in(f.components[g.range(a)] * source.action[a], target.action[a] * f.components[g.source(a)],
                  target.fibres[g.range(a)]))
      return {false, "module map is not equivariant at '" + g.arrow_name(a) + "'"};
  return {};
}

bool is_module_isomorphism(const GModule &source, const GModule &target, const GModuleMap &f) {
  if (!validate_map(source, target, f).valid)
    return false;
  for (std::size_t u = 0; u < source.fibres.size(); ++u)
    if (!zlinalg::is_isomorphism(f.components[u], source.fibres[u], target.fibres[u]))
      return false;
  return true;
}

GModuleMap identity_map(const GModule &m) {
  GModuleMap f;
  for (const auto &fib : m.fibres)
    f.components.push_back(IntMatrix::identity(fib.generators()));
  return f;
}

GModuleMap zero_map(const GModule &source, const GModule &target) {
  GModuleMap f;
  for (std::size_t u = 0; u < source.fibres.size(); ++u)
    f.components.emplace_back(target.fibres[u].generators(), source.fibres[u].generators());
  return f;
}

GModuleMap compose_maps(const GModuleMap &first, const GModuleMap &second) {
  if (first.components.size() != second.components.size())
    throw std::invalid_argument("compose_maps: unit counts differ");
  GModuleMap f;
  for (std::size_t u = 0; u < first.components.size(); ++u)
    f.components.push_back(second.components[u] * first.components[u]);
  return f;
}

IntMatrix total_matrix(const GModule &source, const GModule &target, const GModuleMap &f) {
  const auto so = source.offsets(), to = target.offsets();
  IntMatrix out(target.total_generators(), source.total_generators());
  for (std::size_t u = 0; u < f.components.size(); ++u)
    out.set_block(to[u], so[u], f.components[u]);
  return out;
}

GModule constant_module(const FiniteGroupoid &g, const FgAbGroup &a) {
  GModule m;
  m.groupoid = g;
  m.fibres.assign(g.unit_count(), a);
  m.action.assign(g.arrow_count(), IntMatrix::identity(a.generators()));
  return m;
}

GModule zero_module(const FiniteGroupoid &g) { return constant_module(g, FgAbGroup::free(0)); }

FreeModule free_module_on_gset(const FiniteGroupoid &g, const groupoid::GSet &x) {
  auto check = groupoid::validate_gset(g, x);
  if (!check.valid)
    throw std::invalid_argument("free_module_on_gset: invalid G-set: " + check.message);
  FreeModule out;
  out.module.groupoid = g;
  std::vector<std::size_t> count(g.unit_count(), 0);
  out.position.resize(x.points.size());
  for (std::size_t p = 0; p < x.points.size(); ++p)
    out.position[p] = count[x.anchor[p]]++;
  for (std::size_t u = 0; u < g.unit_count(); ++u)
    out.module.fibres.push_back(FgAbGroup::free(count[u]));
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    IntMatrix mat(count[g.range(a)], count[g.source(a)]);
    for (std::size_t p = 0; p < x.points.size(); ++p)
      if (x.anchor[p] == g.source(a))
        mat(out.position[x.act[a][p]], out.position[p]) = 1;
    out.module.action.push_back(std::move(mat));
  }
  return out;
}

Coinvariants coinvariants(const GModule &m) {
  const auto &g = m.groupoid;
  const auto off = m.offsets();
  const std::size_t n = m.total_generators();
  std::vector<zlinalg::IntVector> rels;
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    const auto &p = m.fibres[u].presentation();
    for (std::size_t j = 0; j < p.cols(); ++j) {
      zlinalg::IntVector v(n, 0);
      for (std::size_t i = 0; i < p.rows(); ++i)
        v[off[u] + i] = p(i, j);
      rels.push_back(std::move(v));
    }
  }
  for (std::size_t a = g.unit_count(); a < g.arrow_count(); ++a) {
    const auto &mat = m.action[a];
    const std::size_t s = off[g.source(a)], r = off[g.range(a)];
    for (std::size_t j = 0; j < mat.cols(); ++j) {
      zlinalg::IntVector v(n, 0);
      v[s + j] += 1;
      for (std::size_t i = 0; i < mat.rows(); ++i)
        v[r + i] -= mat(i, j);
      rels.push_back(std::move(v));
    }
  }
  return {FgAbGroup(IntMatrix::from_columns(n, rels)), IntMatrix::identity(n)};
}

InducedModule induce(const Correspondence &c, const GModule &n) {
  correspondence::require_valid(c);
  require_valid(n);
  if (!(n.groupoid == c.right()))
    throw std::invalid_argument("induce: module is not over the right groupoid of the correspondence");
  const auto &g = c.left();
  InducedModule out;
  out.orbits = correspondence::right_orbits(c);
  const auto &o = out.orbits;
  out.summands.assign(g.unit_count(), {});
  out.summand_offset.assign(o.orbits.size(), 0);
  std::vector<std::size_t> width(g.unit_count(), 0);
  for (std::size_t k = 0; k < o.orbits.size(); ++k) {
    out.orbit_sigma.push_back(c.sigma(o.representative(k)));
    const std::size_t u = o.anchor[k];
    out.summands[u].push_back(k);
    out.summand_offset[k] = width[u];
    width[u] += n.fibres[c.sigma(o.representative(k))].generators();
  }
  auto &m = out.module;
  m.groupoid = g;
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    std::vector<FgAbGroup> parts;
    for (std::size_t k : out.summands[u])
      parts.push_back(n.fibres[c.sigma(o.representative(k))]);
    m.fibres.push_back(parts.empty() ? FgAbGroup::free(0) : zlinalg::direct_sum(parts));
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    IntMatrix mat(width[g.range(a)], width[g.source(a)]);
    for (std::size_t k : out.summands[g.source(a)]) {
      const std::size_t moved = c.act_left(a, o.representative(k));
      const std::size_t k2 = o.orbit_of[moved];
      mat.set_block(out.summand_offset[k2], out.summand_offset[k], n.action[o.transporter[moved]]);
    }
    m.action.push_back(std::move(mat));
  }
  return out;
}

GModuleMap induce_map(const InducedModule &source, const InducedModule &target, const GModuleMap &f) {
  if (source.orbit_sigma != target.orbit_sigma)
    throw std::invalid_argument("induce_map: inductions along different correspondences");
  GModuleMap out;
  for (std::size_t u = 0; u < source.summands.size(); ++u) {
    IntMatrix mat(target.module.fibres[u].generators(), source.module.fibres[u].generators());
    for (std::size_t k : source.summands[u])
      mat.set_block(target.summand_offset[k], source.summand_offset[k], f.components[source.orbit_sigma[k]]);
    out.components.push_back(std::move(mat));
  }
  return out;
}

IntMatrix delta_map(const InducedModule &ind, const GModule &n) {
  const auto src = ind.module.offsets();
  const auto dst = n.offsets();
  IntMatrix out(n.total_generators(), ind.module.total_generators());
  for (std::size_t u = 0; u < ind.summands.size(); ++u)
    for (std::size_t k : ind.summands[u]) {
      const std::size_t y = ind.orbit_sigma[k];
      const std::size_t w = n.fibres[y].generators();
      for (std::size_t i = 0; i < w; ++i)
        out(dst[y] + i, src[u] + ind.summand_offset[k] + i) = 1;
    }
  const auto cn = coinvariants(n);
  const auto ci = coinvariants(ind.module);
  if (!is_well_defined(out, ci.group, cn.group))
    throw std::logic_error("delta_map: not well defined on coinvariants");
  return cn.projection * out;
}

CompositionIso composition_isomorphism(const Correspondence &first, const Correspondence &second, const GModule &n) {
  CompositionIso out;
  out.inner = induce(second, n);
  out.iterated = induce(first, out.inner.module);
  out.composite = correspondence::compose(first, second);
  out.direct = induce(out.composite.correspondence, n);
  const auto &g = first.left();
  const auto &fo = out.iterated.orbits;  // right orbits of first
  const auto &so = out.inner.orbits;     // right orbits of second
  const auto &co = out.direct.orbits;    // right orbits of the composite
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    IntMatrix mat(out.direct.module.fibres[u].generators(), out.iterated.module.fibres[u].generators());
    for (std::size_t k : out.iterated.summands[u]) {
      const std::size_t w = fo.representative(k);
      for (std::size_t j : out.inner.summands[first.sigma(w)]) {
        const std::size_t l = so.representative(j);
        const std::size_t p = out.composite.index.at({w, l});
        const std::size_t kp = co.orbit_of[p];
        const std::size_t col = out.iterated.summand_offset[k] + out.inner.summand_offset[j];
        mat.set_block(out.direct.summand_offset[kp], col, n.action[co.transporter[p]]);
      }
    }
    out.map.components.push_back(std::move(mat));
  }
  out.verified = is_module_isomorphism(out.iterated.module, out.direct.module, out.map);
  return out;
}

}  // namespace etale::gmodule
