#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "etale/corpus.hpp"
#include "etale/correspondence.hpp"
#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/homology.hpp"
#include "etale/invsgp.hpp"
#include "etale/kformula.hpp"
#include "etale/specseq.hpp"
#include "io.hpp"
#include "json_locate.hpp"

namespace etale::cli {

namespace {

using zlinalg::FgAbGroup;

struct Options {
  int truncate = 4;
  std::string window;
  std::string format = "json";
  std::uint64_t seed = 0;
  std::string input;
  std::string kind;
};

struct Result {
  json report;
  int code = kOk;
  std::string message;  // written to the error stream
};

class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---- text rendering ----

bool is_group(const json &j) {
  return j.is_object() && j.size() == 2 && j.contains("free_rank") && j.contains("torsion");
}

bool is_flat(const json &j) {
  if (j.is_array()) {
    for (const auto &x : j)
      if (!is_flat(x) || x.is_object())
        return false;
    return true;
  }
  return !j.is_object() || is_group(j);
}

std::string scalar_text(const json &j) {
  if (is_group(j))
    return group_text(read_group(Node(j, "")));
  if (j.is_string())
    return j.get<std::string>();
  if (j.is_array()) {
    std::string out = "[";
    for (std::size_t k = 0; k < j.size(); ++k)
      out += (k ? ", " : "") + scalar_text(j[k]);
    return out + "]";
  }
  return j.dump();
}

void render_text(const json &j, int indent, std::ostream &out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto &[key, value] : j.items()) {
      if (is_flat(value))
        out << pad << key << ": " << scalar_text(value) << "\n";
      else {
        out << pad << key << ":\n";
        render_text(value, indent + 2, out);
      }
    }
  } else if (j.is_array()) {
    for (const auto &value : j) {
      if (is_flat(value))
        out << pad << "- " << scalar_text(value) << "\n";
      else {
        out << pad << "-\n";
        render_text(value, indent + 2, out);
      }
    }
  } else {
    out << pad << scalar_text(j) << "\n";
  }
}

// ---- shared readers ----

Node semigroup_node(const Node &root) { return root.has("semigroup") ? root.at("semigroup") : root; }

invsgp::InverseSemigroup load_semigroup(const Node &root) {
  auto s = read_semigroup_or_graph(semigroup_node(root));
  invsgp::require_valid(s);
  return s;
}

json names_of(const std::vector<std::size_t> &idx, const std::vector<std::string> &names) {
  json out = json::array();
  for (std::size_t k : idx)
    out.push_back(names[k]);
  return out;
}

// ---- commands ----

Result cmd_validate(const Node &root, const Options &) {
  Result r;
  root.require_object();
  if (root.has("elements")) {
    const auto s = read_semigroup(root);
    const auto v = invsgp::validate(s);
    r.report = {{"kind", "semigroup"}, {"elements", s.size()}, {"valid", v.valid}};
    if (v.valid) {
      r.report["idempotents"] = s.idempotents().size();
      r.report["idempotent_orbits"] = invsgp::orbits_on_idempotents(s).count();
    } else {
      r.report["violation"] = {{"axiom", v.violation->axiom},
                               {"witness", names_of(v.violation->witness, s.names())},
                               {"message", v.violation->message}};
      r.code = kInputError;
      r.message = "invalid semigroup: " + v.violation->message;
    }
  } else if (root.has("vertices")) {
    const auto g = read_digraph(root);
    invsgp::check_digraph(g);
    r.report = {{"kind", "digraph"},
                {"vertices", g.vertices.size()},
                {"edges", g.edges.size()},
                {"acyclic", invsgp::is_acyclic(g)},
                {"valid", true}};
  } else if (root.has("units")) {
    const auto g = read_groupoid(root);
    const auto orbits = groupoid::orbit_decomposition(g);
    json list = json::array();
    for (std::size_t k = 0; k < orbits.orbits.size(); ++k)
      list.push_back({{"units", names_of(orbits.orbits[k], g.unit_names())},
                      {"isotropy_order", orbits.isotropy[k].group.order()}});
    r.report = {{"kind", "groupoid"},
                {"units", g.unit_count()},
                {"arrows", g.arrow_count()},
                {"orbits", list},
                {"valid", true}};
  } else if (root.has("left") && root.has("right")) {
    const auto c = read_correspondence(root);
    const auto rep = correspondence::validate_correspondence(c);
    r.report = write_correspondence_report(rep);
    r.report["kind"] = "correspondence";
    r.report["points"] = c.size();
    if (!rep.valid) {
      r.code = kInputError;
      r.message = "invalid correspondence: " + rep.message;
    }
  } else if (root.has("maps")) {
    const auto a = read_action(root);
    const auto check = groupoid::validate_action(a);
    r.report = {{"kind", "action"}, {"points", a.points.size()}, {"valid", check.valid}};
    if (!check.valid) {
      r.report["message"] = check.message;
      r.code = kInputError;
      r.message = "invalid action: " + check.message;
    }
  } else if (root.has("groupoid") && root.has("module")) {
    const auto g = read_groupoid(root.at("groupoid"));
    const auto m = read_module(root.at("module"), g);
    const auto check = gmodule::validate_module(m);
    r.report = {{"kind", "module"}, {"generators", m.total_generators()}, {"valid", check.valid}};
    if (!check.valid) {
      r.report["message"] = check.message;
      r.code = kInputError;
      r.message = "invalid module: " + check.message;
    }
  } else if (root.has("ranks")) {
    const auto fc = read_filtered_complex(root);
    r.report = {{"kind", "filtered_complex"},
                {"min_degree", fc.complex.min_degree()},
                {"max_degree", fc.complex.max_degree()},
                {"max_level", fc.max_level()},
                {"valid", true}};
  } else {
    root.fail("unrecognized document: expected a semigroup, digraph, groupoid, correspondence, action, module or "
              "filtered complex");
  }
  return r;
}

Result cmd_homology(const Node &root, const Options &o) {
  const Node gnode = root.has("units") ? root : root.at("groupoid");
  const auto g = read_groupoid(gnode);
  const auto m = root.has("module") ? read_module(root.at("module"), g) : gmodule::constant_module(g, FgAbGroup::free(1));
  gmodule::require_valid(m);
  // Without non-unit arrows the bar complex stops in degree 0.
  const int top = g.arrow_count() == g.unit_count() ? 1 : o.truncate;
  const auto h = homology::homology_table(m, top);
  return {{{"truncation", o.truncate}, {"homology", write_table(h)}}, kOk, ""};
}

Result cmd_universal(const Node &root, const Options &) {
  const auto s = load_semigroup(root);
  const auto u = groupoid::universal_groupoid(s);
  json germs = json::array();
  for (std::size_t a = 0; a < u.groupoid.arrow_count(); ++a)
    germs.push_back({{"arrow", u.groupoid.arrow_name(a)},
                     {"element", s.name(u.germ_element[a])},
                     {"source", s.name(u.germ_point[a])}});
  return {{{"groupoid", write_groupoid(u.groupoid)}, {"germs", germs}}, kOk, ""};
}

Result cmd_omega_s(const Node &root, const Options &) {
  const auto s = load_semigroup(root);
  const auto om = correspondence::omega_S(s);
  const auto rep = correspondence::validate_correspondence(om.correspondence);
  json points = json::array();
  for (std::size_t w = 0; w < om.correspondence.size(); ++w)
    points.push_back({{"point", om.correspondence.point_name(w)},
                      {"idempotent", s.name(om.point_data[w].first)},
                      {"arrow", om.universal.groupoid.arrow_name(om.point_data[w].second)}});
  Result r{{{"correspondence", write_correspondence(om.correspondence)},
            {"validation", write_correspondence_report(rep)},
            {"points", points}},
           kOk,
           ""};
  if (!rep.valid) {
    r.code = kInputError;
    r.message = "correspondence fails validation: " + rep.message;
  }
  return r;
}

Result cmd_induced_map(const Node &root, const Options &o) {
  correspondence::Correspondence c;
  if (root.has("left"))
    c = read_correspondence(root);
  else if (root.has("correspondence"))
    c = read_correspondence(root.at("correspondence"));
  else
    c = correspondence::omega_S(load_semigroup(root)).correspondence;
  correspondence::require_valid(c);
  gmodule::GModule a, b;
  gmodule::GModuleMap f;
  if (auto mn = root.has("left") ? std::nullopt : root.get("map")) {
    a = read_module(root.at("source_module"), c.left());
    b = read_module(root.at("target_module"), c.right());
    gmodule::require_valid(a);
    gmodule::require_valid(b);
    const auto ind = gmodule::induce(c, b);
    mn->require_array(c.left().unit_count());
    f.components.resize(c.left().unit_count());
    std::vector<bool> seen(c.left().unit_count(), false);
    for (std::size_t k = 0; k < mn->size(); ++k) {
      const Node e = (*mn)[k];
      const std::size_t u = e.at("unit").name_in(c.left().unit_names(), "unit");
      if (seen[u])
        e.at("unit").fail("component given twice");
      seen[u] = true;
      f.components[u] =
          read_matrix(e.at("matrix"), ind.module.fibres[u].generators(), a.fibres[u].generators());
    }
    const auto check = gmodule::validate_map(a, ind.module, f);
    if (!check.valid)
      mn->fail("not a module map into the induced module: " + check.message);
  } else {
    if (!root.has("left") && (root.has("source_module") || root.has("target_module")))
      root.fail("modules other than Z need an explicit \"map\"");
    a = gmodule::constant_module(c.left(), FgAbGroup::free(1));
    b = gmodule::constant_module(c.right(), FgAbGroup::free(1));
    f = homology::orbit_sum_map(c, gmodule::induce(c, b));
  }
  const auto maps = homology::induced_map_homology(c, a, b, f, o.truncate);
  json list = json::array();
  bool all = true;
  for (const auto &m : maps) {
    all = all && m.isomorphism;
    list.push_back({{"degree", m.degree},
                    {"source", write_group(m.source)},
                    {"target", write_group(m.target)},
                    {"matrix", write_matrix(m.matrix)},
                    {"isomorphism", m.isomorphism}});
  }
  return {{{"truncation", o.truncate}, {"maps", list}, {"isomorphism", all}}, kOk, ""};
}

Result cmd_k_formula(const Node &root, const Options &) {
  const auto s = load_semigroup(root);
  try {
    const auto cb = kformula::corollary_b(s);
    json orbits = json::array();
    for (const auto &t : cb.orbits)
      orbits.push_back({{"rep", s.name(t.representative)},
                        {"orbit", names_of(t.orbit, s.names())},
                        {"stabilizer", t.stabilizer.to_string()},
                        {"stabilizer_order", t.stabilizer_order},
                        {"kclass", write_kclass(t.k)}});
    return {{{"k0", write_group(cb.total.k0)},
             {"k1", write_group(cb.total.k1)},
             {"provenance", cb.total.provenance},
             {"orbits", orbits},
             {"assumptions", cb.assumptions}},
            kOk,
            ""};
  } catch (const kformula::HypothesisRefusal &e) {
    return {{{"status", "refused"}, {"reason", e.what()}}, kRefused, std::string("refused: ") + e.what()};
  }
}

Result cmd_check_p(const Node &root, const Options &) {
  groupoid::FiniteGroupoid g;
  correspondence::EmbeddingFamily fam;
  if (root.has("action")) {
    const auto a = read_action(root.at("action"));
    const auto check = groupoid::validate_action(a);
    if (!check.valid)
      root.at("action").fail("invalid action: " + check.message);
    const auto fn = root.get("family");
    if (!fn || (fn->value().is_string() && fn->str() == "Ffin")) {
      fam = correspondence::family_Ffin(a).family;
      g = fam.ambient;
    } else {
      g = groupoid::transformation_groupoid(a).groupoid;
      fam = read_family(*fn, g);
    }
  } else {
    g = read_groupoid(root.at("groupoid"));
    fam = read_family(root.at("family"), g);
  }
  const auto rep = correspondence::check_condition_P(g, fam);
  auto witness = [&](const correspondence::PWitness &w) {
    json out = {{"unit", g.unit_name(w.unit)},
                {"subgroup", names_of(w.subgroup, [&] {
                   std::vector<std::string> n;
                   for (std::size_t a = 0; a < g.arrow_count(); ++a)
                     n.push_back(g.arrow_name(a));
                   return n;
                 }())},
                {"order", w.subgroup.size()},
                {"found", w.found}};
    if (w.found)
      out["member"] = fam.labels[w.member], out["point"] = fam.members[w.member].point_name(w.point);
    return out;
  };
  json witnesses = json::array();
  for (const auto &w : rep.witnesses)
    witnesses.push_back(witness(w));
  Result r{{{"holds", rep.holds},
            {"members", fam.labels},
            {"witnesses", witnesses},
            {"failure", rep.failure ? witness(*rep.failure) : json(nullptr)}},
           kOk,
           ""};
  if (!rep.holds) {
    r.code = kRefused;
    r.message = "condition (P) fails: the isotropy subgroup of order " + std::to_string(rep.failure->subgroup.size()) +
                " at unit '" + g.unit_name(rep.failure->unit) + "' lifts to no member";
  }
  return r;
}

json pages_json(const specseq::LimitPage &lp, const std::optional<specseq::Window> &window) {
  json pages = json::object();
  for (const auto &p : lp.pages)
    pages[std::to_string(p.r)] = write_page(p, window);
  return pages;
}

Result cmd_specseq(const Node &root, const Options &o) {
  std::optional<specseq::Window> window;
  if (!o.window.empty())
    window = specseq::Window::parse(o.window);
  root.require_object();
  if (root.has("ranks") || root.has("filtered_complex")) {
    const auto fc = read_filtered_complex(root.has("ranks") ? root : root.at("filtered_complex"));
    const auto ec = specseq::couple_from_filtered_complex(fc);
    const auto lp = specseq::limit_page(ec);
    const auto conv = specseq::converge_check(ec, specseq::induced_filtration(fc), window.value_or(ec.support()));
    json entries = json::array();
    for (const auto &e : conv.entries)
      entries.push_back({{"at", e.at.to_string()},
                         {"limit", write_group(e.limit)},
                         {"graded", write_group(e.graded)},
                         {"ok", e.ok}});
    json convergence = {{"converges", conv.converges}, {"entries", entries}};
    if (conv.witness)
      convergence["witness"] = conv.witness->to_string();
    return {{{"source", "filtered_complex"},
             {"support", ec.support().to_string()},
             {"stabilization", lp.stabilization},
             {"bound", lp.bound},
             {"pages", pages_json(lp, window)},
             {"convergence", convergence}},
            kOk,
            ""};
  }
  const Node rn = root.at("resolution");
  const auto g = read_groupoid(rn.at("groupoid"));
  const auto even = read_group(rn.at("even"));
  const auto odd = rn.has("odd") ? read_group(rn.at("odd")) : FgAbGroup::free(0);
  const int qmin = rn.has("qmin") ? static_cast<int>(rn.at("qmin").integer()) : 0;
  const int qmax = rn.has("qmax") ? static_cast<int>(rn.at("qmax").integer()) : qmin;
  if (qmax < qmin)
    rn.at("qmax").fail("qmax is below qmin");
  const auto pattern = specseq::constant_pattern(g, even, odd);
  const auto ec = specseq::couple_from_resolution(pattern, o.truncate, qmin, qmax);
  const auto lp = specseq::limit_page(ec);
  bool match = true;
  json mismatches = json::array();
  if (lp.pages.size() >= 2) {
    const auto &e2 = lp.pages[1];
    for (int q = qmin; q <= qmax; ++q) {
      const auto h = homology::homology_table(pattern.row(q), o.truncate);
      for (int p = 0; p < o.truncate; ++p)
        if (!e2.group({p, q}).isomorphic(h.at(p))) {
          match = false;
          mismatches.push_back(specseq::Bidegree{p, q}.to_string());
        }
    }
  }
  json report = {{"source", "resolution"},
                 {"support", ec.support().to_string()},
                 {"stabilization", lp.stabilization},
                 {"bound", lp.bound},
                 {"pages", pages_json(lp, window)},
                 {"e2_matches_homology", match}};
  if (!match)
    report["mismatches"] = mismatches;
  return {report, kOk, ""};
}

Result cmd_cross_check(const Node &root, const Options &o) {
  const auto g = read_digraph(root);
  const auto rep = kformula::cross_check_toeplitz(g, o.truncate);
  return {{{"vertices", rep.vertices},
           {"truncation", rep.truncation},
           {"expected", write_kclass(rep.expected)},
           {"routes",
            {{"stabilizer_sum", write_kclass(rep.corollary)},
             {"universal_groupoid", write_kclass(*rep.universal_route)},
             {"discrete_groupoid", write_kclass(*rep.discrete_route)}}},
           {"homology",
            {{"universal_groupoid", write_table(rep.universal_homology)},
             {"discrete_groupoid", write_table(rep.discrete_homology)}}},
           {"agree", true}},
          kOk,
          ""};
}

Result cmd_generate(const Options &o) {
  corpus::Rng rng(o.seed);
  json out;
  if (o.kind == "dag")
    out = write_digraph(corpus::random_dag(rng));
  else if (o.kind == "semilattice")
    out = write_semigroup(corpus::random_semilattice(rng));
  else if (o.kind == "partial-bijections")
    out = write_semigroup(corpus::random_partial_bijections(rng).semigroup);
  else if (o.kind == "action")
    out = write_action(corpus::random_action(rng));
  else if (o.kind == "groupoid")
    out = write_groupoid(corpus::random_groupoid(rng));
  else if (o.kind == "correspondence")
    out = write_correspondence(corpus::random_correspondence(rng));
  else
    out = write_filtered_complex(corpus::random_filtered_complex(rng));
  return {out, kOk, ""};
}

using Command = Result (*)(const Node &, const Options &);

struct CommandSpec {
  const char *name;
  const char *help;
  Command run;
};

const std::vector<CommandSpec> &commands() {
  static const std::vector<CommandSpec> list = {
      {"validate", "Validate a semigroup, digraph, groupoid, correspondence, action or module", cmd_validate},
      {"homology", "Homology table of a groupoid with module coefficients (default Z)", cmd_homology},
      {"universal", "Universal groupoid of an inverse semigroup or graph", cmd_universal},
      {"omega-s", "Correspondence from the discrete to the universal groupoid, with validation", cmd_omega_s},
      {"induced-map", "Maps induced in homology by a correspondence", cmd_induced_map},
      {"k-formula", "K-theory from the stabilizer sum formula", cmd_k_formula},
      {"check-p", "Condition (P) for a groupoid and an embedding family", cmd_check_p},
      {"specseq", "Pages and convergence of a filtered complex or resolution couple", cmd_specseq},
      {"cross-check", "Three-route K-theory cross-check for an acyclic digraph", cmd_cross_check},
  };
  return list;
}

std::string read_input(const std::string &path, std::istream &in) {
  std::ostringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw InputError("cannot read input file");
  buf << f.rdbuf();
  return buf.str();
}

std::string strip_exception_tag(const std::string &what) {
  if (what.rfind("[json.exception.", 0) == 0) {
    const auto end = what.find("] ");
    if (end != std::string::npos)
      return what.substr(end + 2);
  }
  return what;
}

void emit(const json &report, const Options &o, std::ostream &out) {
  if (o.format == "text")
    render_text(report, 0, out);
  else
    out << report.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, std::istream &in) {
  CLI::App app{"Homology, spectral sequences and K-theory formulas for finite etale groupoids"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--truncate", o.truncate, "Truncation degree of bar complexes")->check(CLI::Range(1, 64));
  app.add_option("--window", o.window, "Bidegree window pmin:pmax,qmin:qmax");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--seed", o.seed, "Seed for generate");
  std::map<CLI::App *, const CommandSpec *> dispatch;
  for (const auto &c : commands()) {
    auto *sub = app.add_subcommand(c.name, c.help);
    sub->add_option("input", o.input, "JSON input file, - for standard input")->required();
    dispatch[sub] = &c;
  }
  auto *gen = app.add_subcommand("generate", "Emit a seeded random input document");
  gen->add_option("kind", o.kind, "Document kind")
      ->required()
      ->check(CLI::IsMember(
          {"dag", "semilattice", "partial-bijections", "action", "groupoid", "correspondence", "filtered-complex"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kOk : kInputError;
  }

  if (gen->parsed()) {
    emit(cmd_generate(o).report, o, out);
    return kOk;
  }
  const CommandSpec *spec = nullptr;
  for (const auto &[sub, c] : dispatch)
    if (sub->parsed())
      spec = c;

  std::string text;
  try {
    text = read_input(o.input, in);
  } catch (const InputError &e) {
    err << o.input << ": error: " << e.what() << "\n";
    return kInputError;
  }
  const JsonLocator locator(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    const auto pos = locator.at_offset(e.byte > 0 ? e.byte - 1 : 0);
    err << o.input << ":" << pos.line << ":" << pos.column << ": error: " << strip_exception_tag(e.what()) << "\n";
    return kInputError;
  }
  try {
    const Result r = spec->run(Node(doc, ""), o);
    emit(r.report, o, out);
    if (!r.message.empty())
      err << o.input << ": " << r.message << "\n";
    return r.code;
  } catch (const SchemaError &e) {
    const auto pos = locator.find(e.pointer());
    err << o.input << ":" << pos.line << ":" << pos.column << ": error: " << e.what() << " (at "
        << (e.pointer().empty() ? "/" : e.pointer()) << ")\n";
  } catch (const kformula::HypothesisRefusal &e) {
    err << o.input << ": refused: " << e.what() << "\n";
    return kRefused;
  } catch (const specseq::PreconditionError &e) {
    err << o.input << ": refused: " << e.what() << "\n";
    return kRefused;
  } catch (const json::exception &e) {
    err << o.input << ": error: " << strip_exception_tag(e.what()) << "\n";
  } catch (const std::exception &e) {
    err << o.input << ": error: " << e.what() << "\n";
  }
  return kInputError;
}

}  // namespace etale::cli
