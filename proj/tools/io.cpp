#include "io.hpp"

#include <map>
#include <set>
#include <utility>

#include "json_locate.hpp"

namespace etale::cli {

using zlinalg::FgAbGroup;
using zlinalg::Int;
using zlinalg::IntMatrix;

void Node::fail(const std::string &message) const { throw SchemaError(pointer_, message); }

bool Node::has(const std::string &key) const { return value_->is_object() && value_->contains(key); }

Node Node::at(const std::string &key) const {
  require_object();
  auto it = value_->find(key);
  if (it == value_->end())
    fail("missing key \"" + key + "\"");
  return Node(*it, pointer_ + "/" + pointer_token(key));
}

std::optional<Node> Node::get(const std::string &key) const {
  require_object();
  auto it = value_->find(key);
  if (it == value_->end() || it->is_null())
    return std::nullopt;
  return Node(*it, pointer_ + "/" + pointer_token(key));
}

Node Node::operator[](std::size_t k) const { return Node((*value_)[k], pointer_ + "/" + std::to_string(k)); }

std::size_t Node::size() const { return value_->size(); }

const Node &Node::require_object() const {
  if (!value_->is_object())
    fail("expected an object");
  return *this;
}

const Node &Node::require_array() const {
  if (!value_->is_array())
    fail("expected an array");
  return *this;
}

const Node &Node::require_array(std::size_t length) const {
  require_array();
  if (value_->size() != length)
    fail("expected an array of length " + std::to_string(length) + ", got " + std::to_string(value_->size()));
  return *this;
}

std::string Node::str() const {
  if (!value_->is_string())
    fail("expected a string");
  return value_->get<std::string>();
}

std::size_t Node::count() const {
  if (!value_->is_number_unsigned() && !(value_->is_number_integer() && value_->get<long>() >= 0))
    fail("expected a nonnegative integer");
  return value_->get<std::size_t>();
}

long Node::integer() const {
  if (!value_->is_number_integer())
    fail("expected an integer");
  return value_->get<long>();
}

Int Node::number() const {
  if (value_->is_number_integer())
    return Int(std::to_string(value_->get<long>()));
  if (!value_->is_string())
    fail("expected a decimal string");
  const std::string s = value_->get<std::string>();
  const std::size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
    fail("expected a decimal string, got \"" + s + "\"");
  return Int(s[0] == '+' ? s.substr(1) : s);
}

std::size_t Node::name_in(const std::vector<std::string> &names, const char *what) const {
  const std::string s = str();
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == s)
      return k;
  fail(std::string("unknown ") + what + " \"" + s + "\"");
}

std::vector<std::string> Node::names() const {
  require_array();
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < size(); ++k) {
    out.push_back((*this)[k].str());
    if (!seen.insert(out.back()).second)
      (*this)[k].fail("duplicate name \"" + out.back() + "\"");
  }
  return out;
}

// ---- matrices and groups ----

IntMatrix read_matrix(const Node &n, std::size_t rows, std::optional<std::size_t> cols) {
  n.require_array(rows);
  if (rows == 0)
    return IntMatrix(0, cols.value_or(0));
  const std::size_t c = cols.value_or(n[0].require_array().size());
  IntMatrix m(rows, c);
  for (std::size_t i = 0; i < rows; ++i) {
    const Node row = n[i];
    row.require_array(c);
    for (std::size_t j = 0; j < c; ++j)
      m(i, j) = row[j].number();
  }
  return m;
}

json write_matrix(const IntMatrix &m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j).get_str());
    out.push_back(std::move(row));
  }
  return out;
}

FgAbGroup read_group(const Node &n) {
  const std::size_t rank = n.at("free_rank").count();
  std::vector<Int> factors;
  if (auto t = n.get("torsion")) {
    t->require_array();
    for (std::size_t k = 0; k < t->size(); ++k) {
      Int d = (*t)[k].number();
      if (d < 2)
        (*t)[k].fail("torsion coefficients must be at least 2");
      factors.push_back(d);
    }
  }
  return FgAbGroup::from_invariants(factors, rank);
}

json write_group(const FgAbGroup &g) {
  json t = json::array();
  for (const auto &d : g.factors())
    t.push_back(d.get_str());
  return {{"free_rank", g.free_rank()}, {"torsion", t}};
}

std::string group_text(const FgAbGroup &g) {
  std::string out;
  auto add = [&](const std::string &s) { out += (out.empty() ? "" : " + ") + s; };
  if (g.free_rank() == 1)
    add("Z");
  else if (g.free_rank() > 1)
    add("Z^" + std::to_string(g.free_rank()));
  for (const auto &d : g.factors())
    add("Z/" + d.get_str());
  return out.empty() ? "0" : out;
}

json write_table(const zlinalg::GradedGroup &h) {
  json out = json::object();
  for (const auto &[n, g] : h.support())
    out[std::to_string(n)] = write_group(g);
  return out;
}

// ---- semigroups and graphs ----

invsgp::InverseSemigroup read_semigroup(const Node &n) {
  const auto names = n.at("elements").names();
  const std::size_t size = names.size();
  std::optional<std::size_t> zero;
  if (auto z = n.get("zero"))
    zero = z->name_in(names, "element");
  const Node prod = n.at("product");
  prod.require_array(size);
  std::vector<std::vector<std::size_t>> product(size, std::vector<std::size_t>(size));
  for (std::size_t a = 0; a < size; ++a) {
    const Node row = prod[a];
    row.require_array(size);
    for (std::size_t b = 0; b < size; ++b)
      product[a][b] = row[b].name_in(names, "element");
  }
  const Node st = n.at("star");
  st.require_array(size);
  std::vector<std::size_t> star(size);
  for (std::size_t a = 0; a < size; ++a)
    star[a] = st[a].name_in(names, "element");
  return invsgp::InverseSemigroup(names, zero, std::move(product), std::move(star));
}

json write_semigroup(const invsgp::InverseSemigroup &s) {
  json prod = json::array();
  for (std::size_t a = 0; a < s.size(); ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < s.size(); ++b)
      row.push_back(s.name(s.mul(a, b)));
    prod.push_back(std::move(row));
  }
  json star = json::array();
  for (std::size_t a = 0; a < s.size(); ++a)
    star.push_back(s.name(s.star(a)));
  return {{"elements", s.names()},
          {"zero", s.zero() ? json(s.name(*s.zero())) : json(nullptr)},
          {"product", prod},
          {"star", star}};
}

invsgp::Digraph read_digraph(const Node &n) {
  invsgp::Digraph g;
  g.vertices = n.at("vertices").names();
  const Node edges = n.at("edges");
  edges.require_array();
  std::set<std::string> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Node e = edges[k];
    invsgp::Digraph::Edge edge;
    edge.name = e.at("name").str();
    if (!seen.insert(edge.name).second)
      e.at("name").fail("duplicate edge name \"" + edge.name + "\"");
    edge.src = e.at("src").name_in(g.vertices, "vertex");
    edge.dst = e.at("dst").name_in(g.vertices, "vertex");
    g.edges.push_back(std::move(edge));
  }
  return g;
}

json write_digraph(const invsgp::Digraph &g) {
  json edges = json::array();
  for (const auto &e : g.edges)
    edges.push_back({{"name", e.name}, {"src", g.vertices[e.src]}, {"dst", g.vertices[e.dst]}});
  return {{"vertices", g.vertices}, {"edges", edges}};
}

invsgp::InverseSemigroup read_semigroup_or_graph(const Node &n) {
  n.require_object();
  if (n.has("vertices")) {
    const auto g = read_digraph(n);
    invsgp::check_digraph(g);
    return invsgp::graph_inverse_semigroup(g);
  }
  return read_semigroup(n);
}

// ---- groupoids ----

groupoid::FiniteGroupoid read_groupoid(const Node &n) {
  using groupoid::FiniteGroupoid;
  const auto units = n.at("units").names();
  std::vector<std::string> all = units;
  std::vector<FiniteGroupoid::Arrow> arrows;
  std::vector<std::optional<Node>> inverse_nodes;
  const Node list = n.at("arrows");
  list.require_array();
  for (std::size_t k = 0; k < list.size(); ++k) {
    const Node a = list[k];
    FiniteGroupoid::Arrow arrow;
    arrow.name = a.at("name").str();
    for (const auto &x : all)
      if (x == arrow.name)
        a.at("name").fail("duplicate name \"" + arrow.name + "\"");
    arrow.range = a.at("range").name_in(units, "unit");
    arrow.source = a.at("source").name_in(units, "unit");
    all.push_back(arrow.name);
    arrows.push_back(std::move(arrow));
    inverse_nodes.push_back(a.get("inverse"));
  }
  const std::size_t u = units.size();
  auto range = [&](std::size_t a) { return a < u ? a : arrows[a - u].range; };
  auto source = [&](std::size_t a) { return a < u ? a : arrows[a - u].source; };

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;
  const Node product = n.at("product");
  product.require_array();
  for (std::size_t k = 0; k < product.size(); ++k) {
    const Node t = product[k];
    t.require_array(3);
    const std::size_t g = t[0].name_in(all, "arrow");
    const std::size_t h = t[1].name_in(all, "arrow");
    const std::size_t gh = t[2].name_in(all, "arrow");
    if (source(g) != range(h))
      t.fail("arrows \"" + all[g] + "\" and \"" + all[h] + "\" are not composable");
    auto [it, fresh] = table.emplace(std::make_pair(g, h), gh);
    if (!fresh && it->second != gh)
      t.fail("conflicting product of \"" + all[g] + "\" and \"" + all[h] + "\"");
  }
  auto compose = [&](std::size_t g, std::size_t h) -> std::size_t {
    auto it = table.find({g, h});
    if (it != table.end())
      return it->second;
    if (g < u)
      return h;
    if (h < u)
      return g;
    product.fail("missing product of \"" + all[g] + "\" and \"" + all[h] + "\"");
  };
  auto out = FiniteGroupoid::build(units, arrows, compose);
  for (std::size_t k = 0; k < arrows.size(); ++k) {
    if (!inverse_nodes[k])
      continue;
    const std::size_t inv = inverse_nodes[k]->name_in(all, "arrow");
    if (out.inverse(u + k) != inv)
      inverse_nodes[k]->fail("inverse of \"" + all[u + k] + "\" is \"" + all[out.inverse(u + k)] +
                             "\" by the product table");
  }
  return out;
}

json write_groupoid(const groupoid::FiniteGroupoid &g) {
  json arrows = json::array();
  json product = json::array();
  for (std::size_t a = g.unit_count(); a < g.arrow_count(); ++a) {
    arrows.push_back({{"name", g.arrow_name(a)},
                      {"range", g.unit_name(g.range(a))},
                      {"source", g.unit_name(g.source(a))},
                      {"inverse", g.arrow_name(g.inverse(a))}});
    for (std::size_t b = g.unit_count(); b < g.arrow_count(); ++b)
      if (g.composable(a, b))
        product.push_back({g.arrow_name(a), g.arrow_name(b), g.arrow_name(g.compose(a, b))});
  }
  return {{"units", g.unit_names()}, {"arrows", arrows}, {"product", product}};
}

// ---- actions ----

groupoid::SAction read_action(const Node &n) {
  groupoid::SAction a;
  a.semigroup = read_semigroup_or_graph(n.at("semigroup"));
  a.points = n.at("points").names();
  a.maps.assign(a.semigroup.size(), invsgp::PartialMap(a.points.size(), -1));
  const Node maps = n.at("maps");
  maps.require_object();
  for (const auto &[key, value] : maps.value().items()) {
    const Node m(value, maps.pointer() + "/" + pointer_token(key));
    const auto s = a.semigroup.index_of(key);
    if (!s)
      m.fail("unknown element \"" + key + "\"");
    m.require_object();
    for (const auto &[x, y] : value.items()) {
      const Node target(y, m.pointer() + "/" + pointer_token(x));
      std::size_t from = a.points.size();
      for (std::size_t k = 0; k < a.points.size(); ++k)
        if (a.points[k] == x)
          from = k;
      if (from == a.points.size())
        target.fail("unknown point \"" + x + "\"");
      a.maps[*s][from] = static_cast<int>(target.name_in(a.points, "point"));
    }
  }
  return a;
}

json write_action(const groupoid::SAction &a) {
  json maps = json::object();
  for (std::size_t s = 0; s < a.semigroup.size(); ++s) {
    json m = json::object();
    for (std::size_t x = 0; x < a.points.size(); ++x)
      if (a.defined(s, x))
        m[a.points[x]] = a.points[a.act(s, x)];
    maps[a.semigroup.name(s)] = std::move(m);
  }
  return {{"semigroup", write_semigroup(a.semigroup)}, {"points", a.points}, {"maps", maps}};
}

// ---- modules ----

gmodule::GModule read_module(const Node &n, const groupoid::FiniteGroupoid &g) {
  n.require_object();
  if (auto c = n.get("constant"))
    return gmodule::constant_module(g, read_group(*c));
  gmodule::GModule m;
  m.groupoid = g;
  m.fibres.resize(g.unit_count());
  std::vector<bool> seen(g.unit_count(), false);
  const Node fibres = n.at("fibres");
  fibres.require_array(g.unit_count());
  for (std::size_t k = 0; k < fibres.size(); ++k) {
    const Node f = fibres[k];
    const std::size_t u = f.at("unit").name_in(g.unit_names(), "unit");
    if (seen[u])
      f.at("unit").fail("fibre given twice");
    seen[u] = true;
    const std::size_t gens = f.at("generators").count();
    IntMatrix pres(gens, 0);
    if (auto p = f.get("presentation"))
      pres = read_matrix(*p, gens);
    m.fibres[u] = FgAbGroup(pres);
  }
  m.action.resize(g.arrow_count());
  std::vector<bool> given(g.arrow_count(), false);
  for (std::size_t u = 0; u < g.unit_count(); ++u)
    m.action[u] = IntMatrix::identity(m.fibres[u].generators());
  const Node action = n.at("action");
  action.require_array();
  for (std::size_t k = 0; k < action.size(); ++k) {
    const Node e = action[k];
    const std::string name = e.at("arrow").str();
    const auto a = g.find_arrow(name);
    if (!a)
      e.at("arrow").fail("unknown arrow \"" + name + "\"");
    if (given[*a])
      e.at("arrow").fail("action of \"" + name + "\" given twice");
    given[*a] = true;
    m.action[*a] =
        read_matrix(e.at("matrix"), m.fibres[g.range(*a)].generators(), m.fibres[g.source(*a)].generators());
  }
  for (std::size_t a = g.unit_count(); a < g.arrow_count(); ++a)
    if (!given[a])
      action.fail("missing action of arrow \"" + g.arrow_name(a) + "\"");
  return m;
}

json write_module(const gmodule::GModule &m) {
  const auto &g = m.groupoid;
  json fibres = json::array();
  for (std::size_t u = 0; u < g.unit_count(); ++u)
    fibres.push_back({{"unit", g.unit_name(u)},
                      {"generators", m.fibres[u].generators()},
                      {"presentation", write_matrix(m.fibres[u].presentation())}});
  json action = json::array();
  for (std::size_t a = g.unit_count(); a < g.arrow_count(); ++a)
    action.push_back({{"arrow", g.arrow_name(a)}, {"matrix", write_matrix(m.action[a])}});
  return {{"fibres", fibres}, {"action", action}};
}

// ---- correspondences ----

correspondence::Correspondence read_correspondence(const Node &n) {
  const auto left = read_groupoid(n.at("left"));
  const auto right = read_groupoid(n.at("right"));
  const auto points = n.at("points").names();
  const std::size_t size = points.size();
  std::vector<std::size_t> rho(size), sigma(size);
  const Node rn = n.at("rho"), sn = n.at("sigma");
  rn.require_array(size);
  sn.require_array(size);
  for (std::size_t w = 0; w < size; ++w) {
    rho[w] = rn[w].name_in(left.unit_names(), "unit of the left groupoid");
    sigma[w] = sn[w].name_in(right.unit_names(), "unit of the right groupoid");
  }
  auto arrow = [](const Node &x, const groupoid::FiniteGroupoid &g, const char *side) {
    const std::string name = x.str();
    const auto a = g.find_arrow(name);
    if (!a)
      x.fail(std::string("unknown arrow \"") + name + "\" of the " + side + " groupoid");
    return *a;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> ltab, rtab;
  const Node la = n.at("left_action");
  la.require_array();
  for (std::size_t k = 0; k < la.size(); ++k) {
    const Node t = la[k];
    t.require_array(3);
    const std::size_t g = arrow(t[0], left, "left");
    const std::size_t w = t[1].name_in(points, "point");
    if (left.source(g) != rho[w])
      t.fail("left action of \"" + left.arrow_name(g) + "\" on \"" + points[w] + "\" is undefined");
    ltab[{g, w}] = t[2].name_in(points, "point");
  }
  const Node ra = n.at("right_action");
  ra.require_array();
  for (std::size_t k = 0; k < ra.size(); ++k) {
    const Node t = ra[k];
    t.require_array(3);
    const std::size_t w = t[0].name_in(points, "point");
    const std::size_t h = arrow(t[1], right, "right");
    if (sigma[w] != right.range(h))
      t.fail("right action of \"" + right.arrow_name(h) + "\" on \"" + points[w] + "\" is undefined");
    rtab[{w, h}] = t[2].name_in(points, "point");
  }
  auto lf = [&](std::size_t g, std::size_t w) -> std::size_t {
    auto it = ltab.find({g, w});
    if (it != ltab.end())
      return it->second;
    if (left.is_unit(g))
      return w;
    la.fail("missing left action of \"" + left.arrow_name(g) + "\" on \"" + points[w] + "\"");
  };
  auto rf = [&](std::size_t w, std::size_t h) -> std::size_t {
    auto it = rtab.find({w, h});
    if (it != rtab.end())
      return it->second;
    if (right.is_unit(h))
      return w;
    ra.fail("missing right action of \"" + right.arrow_name(h) + "\" on \"" + points[w] + "\"");
  };
  return correspondence::Correspondence::build(left, right, points, rho, sigma, lf, rf);
}

json write_correspondence(const correspondence::Correspondence &c) {
  const auto &l = c.left();
  const auto &r = c.right();
  json rho = json::array(), sigma = json::array(), la = json::array(), ra = json::array();
  for (std::size_t w = 0; w < c.size(); ++w) {
    rho.push_back(l.unit_name(c.rho(w)));
    sigma.push_back(r.unit_name(c.sigma(w)));
  }
  for (std::size_t g = l.unit_count(); g < l.arrow_count(); ++g)
    for (std::size_t w = 0; w < c.size(); ++w)
      if (l.source(g) == c.rho(w))
        la.push_back({l.arrow_name(g), c.point_name(w), c.point_name(c.act_left(g, w))});
  for (std::size_t w = 0; w < c.size(); ++w)
    for (std::size_t h = r.unit_count(); h < r.arrow_count(); ++h)
      if (c.sigma(w) == r.range(h))
        ra.push_back({c.point_name(w), r.arrow_name(h), c.point_name(c.act_right(w, h))});
  return {{"left", write_groupoid(l)}, {"right", write_groupoid(r)}, {"points", c.points()},
          {"rho", rho},  {"sigma", sigma},          {"left_action", la},
          {"right_action", ra}};
}

json write_correspondence_report(const correspondence::CorrespondenceReport &r) {
  json out = {{"valid", r.valid},
              {"proper", r.proper},
              {"fibre_sizes", r.fibre_sizes},
              {"tight", r.tight},
              {"left_free", r.left_free},
              {"open_morita_embedding", r.open_morita_embedding}};
  if (!r.valid) {
    out["axiom"] = r.axiom;
    out["message"] = r.message;
  }
  return out;
}

// ---- families ----

correspondence::EmbeddingFamily read_family(const Node &n, const groupoid::FiniteGroupoid &ambient) {
  if (n.value().is_string()) {
    const std::string kind = n.str();
    if (kind == "units")
      return correspondence::unit_family(ambient);
    if (kind == "whole")
      return correspondence::whole_family(ambient);
    n.fail("unknown family \"" + kind + "\"; expected \"units\", \"whole\" or an object");
  }
  correspondence::EmbeddingFamily f;
  f.ambient = ambient;
  const Node members = n.at("members");
  members.require_array();
  for (std::size_t k = 0; k < members.size(); ++k) {
    const Node m = members[k];
    auto c = read_correspondence(m.at("correspondence"));
    if (!(c.right() == ambient))
      m.at("correspondence").at("right").fail("right groupoid differs from the ambient groupoid");
    f.labels.push_back(m.has("label") ? m.at("label").str() : "member " + std::to_string(k));
    f.members.push_back(std::move(c));
  }
  correspondence::validate_family(f);
  return f;
}

json write_family(const correspondence::EmbeddingFamily &f) {
  json members = json::array();
  for (std::size_t k = 0; k < f.members.size(); ++k)
    members.push_back({{"label", f.labels[k]}, {"correspondence", write_correspondence(f.members[k])}});
  return {{"members", members}};
}

// ---- filtered complexes ----

specseq::FilteredComplex read_filtered_complex(const Node &n) {
  const int min = static_cast<int>(n.at("min_degree").integer());
  const Node rn = n.at("ranks");
  rn.require_array();
  if (rn.size() == 0)
    rn.fail("at least one degree is required");
  std::vector<std::size_t> ranks;
  for (std::size_t k = 0; k < rn.size(); ++k)
    ranks.push_back(rn[k].count());
  const Node dn = n.at("differentials");
  dn.require_array(ranks.size() - 1);
  std::vector<IntMatrix> dense;
  std::vector<zlinalg::SparseMatrix> d;
  for (std::size_t k = 0; k + 1 < ranks.size(); ++k) {
    dense.push_back(read_matrix(dn[k], ranks[k], ranks[k + 1]));
    d.push_back(zlinalg::SparseMatrix::from_dense(dense.back()));
    if (k > 0 && !(dense[k - 1] * dense[k]).is_zero())
      dn[k].fail("differentials do not compose to zero");
  }
  specseq::FilteredComplex fc;
  fc.complex = zlinalg::ChainComplex(min, ranks, std::move(d));
  const Node ln = n.at("levels");
  ln.require_array(ranks.size());
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    ln[k].require_array(ranks[k]);
    std::vector<int> lv;
    for (std::size_t i = 0; i < ranks[k]; ++i) {
      const long v = ln[k][i].integer();
      if (v < 0)
        ln[k][i].fail("filtration levels are nonnegative");
      lv.push_back(static_cast<int>(v));
    }
    fc.level.push_back(std::move(lv));
  }
  specseq::validate_filtration(fc);
  return fc;
}

json write_filtered_complex(const specseq::FilteredComplex &fc) {
  const auto &c = fc.complex;
  json ranks = json::array(), d = json::array();
  for (int n = c.min_degree(); n <= c.max_degree(); ++n) {
    ranks.push_back(c.rank(n));
    if (n > c.min_degree())
      d.push_back(write_matrix(c.differential(n).to_dense()));
  }
  return {{"min_degree", c.min_degree()}, {"ranks", ranks}, {"differentials", d}, {"levels", fc.level}};
}

// ---- reports ----

json write_kclass(const kformula::KClass &k) {
  return {{"k0", write_group(k.k0)}, {"k1", write_group(k.k1)}, {"provenance", k.provenance}};
}

json write_page(const specseq::Page &e, const std::optional<specseq::Window> &window) {
  json groups = json::object(), diffs = json::object();
  for (const auto &[b, sq] : e.groups) {
    if (window && !window->contains(b))
      continue;
    if (!sq.group().is_trivial())
      groups[b.to_string()] = write_group(sq.group());
  }
  for (const auto &[b, m] : e.differential) {
    if (window && !window->contains(b))
      continue;
    const specseq::Bidegree t{b.p - e.r, b.q + e.r - 1};
    if (!e.support.contains(t) || zlinalg::is_zero_map(m, e.group(t)))
      continue;
    diffs[b.to_string()] = {{"target", t.to_string()}, {"matrix", write_matrix(m)}};
  }
  return {{"r", e.r}, {"groups", groups}, {"differentials", diffs}};
}

}  // namespace etale::cli
