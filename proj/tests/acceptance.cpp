// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "etale/corpus.hpp"
#include "etale/correspondence.hpp"
#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/homology.hpp"
#include "etale/invsgp.hpp"
#include "etale/specseq.hpp"
#include "io.hpp"

using namespace etale;
using nlohmann::json;
using zlinalg::FgAbGroup;
using zlinalg::Int;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string &what) {
  if (!ok)
    throw Failure(what);
}

bool same_invariants(const FgAbGroup &a, const FgAbGroup &b) {
  return a.free_rank() == b.free_rank() && a.factors() == b.factors();
}

std::string fmt(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

gmodule::GModule random_module(corpus::Rng &rng, const groupoid::FiniteGroupoid &g) {
  switch (rng.below(5)) {
  case 0:
    return gmodule::constant_module(g, FgAbGroup::free(1));
  case 1:
    return gmodule::constant_module(g, FgAbGroup::from_invariants({Int(2)}, 1));
  case 2:
    return gmodule::constant_module(g, FgAbGroup::from_invariants({Int(3)}, 0));
  case 3:
    return gmodule::free_module_on_gset(g, groupoid::translation_gset(g)).module;
  default:
    return gmodule::free_module_on_gset(g, groupoid::unit_gset(g)).module;
  }
}

// 1. Three K-theory routes for random acyclic digraphs, through the CLI.
Outcome criterion1() {
  corpus::Rng rng(2024);
  double worst = 0;
  std::size_t max_v = 0, max_e = 0;
  for (int k = 0; k < 10; ++k) {
    const auto g = corpus::random_dag(rng, 6, 8);
    max_v = std::max(max_v, g.vertices.size());
    max_e = std::max(max_e, g.edges.size());
    require(g.vertices.size() <= 6 && g.edges.size() <= 8, "generator exceeded size bounds");
    std::istringstream in(cli::write_digraph(g).dump());
    std::ostringstream out, err;
    const auto t0 = Clock::now();
    const int code = cli::run({"cross-check", "-", "--truncate", "4"}, out, err, in);
    const double dt = seconds_since(t0);
    worst = std::max(worst, dt);
    require(code == 0, "digraph " + std::to_string(k) + ": cross-check failed: " + err.str());
    require(dt < 10.0, "digraph " + std::to_string(k) + " took " + fmt(dt) + " s");
    const json rep = json::parse(out.str());
    for (const char *route : {"stabilizer_sum", "universal_groupoid", "discrete_groupoid"}) {
      const json &kc = rep["routes"][route];
      require(kc["k0"]["free_rank"] == g.vertices.size() && kc["k0"]["torsion"].empty() &&
                  kc["k1"]["free_rank"] == 0 && kc["k1"]["torsion"].empty(),
              "digraph " + std::to_string(k) + ": route " + route + " differs from (Z^|V|, 0)");
    }
  }
  return {true, "10 digraphs (up to " + std::to_string(max_v) + " vertices, " + std::to_string(max_e) +
                    " edges), three routes equal (Z^|V|, 0), slowest " + fmt(worst) + " s"};
}

// 2. Omega_S induces isomorphisms in degrees 0..3.
Outcome criterion2() {
  auto corpus_list = corpus::torsion_free_semigroups();
  corpus::Rng rng(77);
  for (int k = 0; k < 2; ++k)
    corpus_list.emplace_back("random-semilattice-" + std::to_string(k), corpus::random_semilattice(rng, 8));
  corpus_list.emplace_back("graph-random-dag", invsgp::graph_inverse_semigroup(corpus::random_dag(rng, 4, 4)));
  double worst = 0;
  for (const auto &[name, s] : corpus_list) {
    const auto t0 = Clock::now();
    const auto om = correspondence::omega_S(s);
    const auto &c = om.correspondence;
    const auto a = gmodule::constant_module(c.left(), FgAbGroup::free(1));
    const auto b = gmodule::constant_module(c.right(), FgAbGroup::free(1));
    const auto f = homology::orbit_sum_map(c, gmodule::induce(c, b));
    const auto maps = homology::induced_map_homology(c, a, b, f, 4);
    const double dt = seconds_since(t0);
    worst = std::max(worst, dt);
    require(maps.size() == 4, name + ": expected degrees 0..3");
    for (const auto &m : maps) {
      require(same_invariants(m.source, m.target), name + ": degree " + std::to_string(m.degree) +
                                                       " groups differ: " + m.source.to_string() + " vs " +
                                                       m.target.to_string());
      require(m.isomorphism && zlinalg::is_isomorphism(m.matrix, m.source, m.target),
              name + ": degree " + std::to_string(m.degree) + " map is not invertible");
    }
    require(dt < 60.0, name + " took " + fmt(dt) + " s");
  }
  return {true, std::to_string(corpus_list.size()) + " semigroups, isomorphism in degrees 0..3, slowest " +
                    fmt(worst) + " s"};
}

// 3. Group homology of Z/2 against the 2-periodic resolution.
Outcome criterion3() {
  const auto g = groupoid::group_groupoid(FiniteGroup::cyclic(2));
  const auto h = homology::homology_table(gmodule::constant_module(g, FgAbGroup::free(1)), 4);
  std::vector<std::size_t> ranks(5, 1);
  std::vector<zlinalg::SparseMatrix> d;
  for (int n = 1; n <= 4; ++n) {
    zlinalg::SparseMatrix m(1, 1);
    if (n % 2 == 0)
      m.add(0, 0, 2);  // norm element 1 + t acts as 2 on Z
    d.push_back(m);
  }
  const zlinalg::ChainComplex periodic(0, ranks, d);
  const std::vector<FgAbGroup> expected = {FgAbGroup::free(1), FgAbGroup::cyclic(2), FgAbGroup::free(0),
                                           FgAbGroup::cyclic(2)};
  for (int n = 0; n < 4; ++n) {
    require(same_invariants(h.at(n), expected[n]), "bar complex H_" + std::to_string(n) + " = " + h.at(n).to_string());
    require(same_invariants(zlinalg::homology_at(periodic, n), expected[n]),
            "periodic oracle H_" + std::to_string(n) + " disagrees");
  }
  return {true, "H_0..3 = (Z, Z/2, 0, Z/2) from bar complex and periodic resolution"};
}

// 4. H_0 equals coinvariants.
Outcome criterion4() {
  corpus::Rng rng(4);
  for (int k = 0; k < 60; ++k) {
    const auto g = corpus::random_groupoid(rng, 3, 3, 4);
    const auto m = random_module(rng, g);
    const auto h0 = homology::groupoid_homology(m, 0);
    const auto co = gmodule::coinvariants(m).group;
    require(same_invariants(h0, co), "pair " + std::to_string(k) + ": H_0 = " + h0.to_string() +
                                         ", coinvariants = " + co.to_string());
  }
  return {true, "60 random (groupoid, module) pairs"};
}

// 5. Spectral sequences.
Outcome criterion5() {
  using namespace specseq;
  corpus::Rng rng(55);
  // (a) E^2 of resolution couples.
  int pairs = 0;
  for (int k = 0; k < 12; ++k) {
    const auto g = corpus::random_groupoid(rng, 2, 2, 3);
    const FgAbGroup even = rng.below(2) ? FgAbGroup::free(1) : FgAbGroup::from_invariants({Int(2)}, 1);
    const FgAbGroup odd = rng.below(2) ? FgAbGroup::free(0) : FgAbGroup::cyclic(3);
    const auto pattern = constant_pattern(g, even, odd);
    const int t = 3;
    const auto e2 = page(couple_from_resolution(pattern, t, 0, 1), 2);
    for (int q = 0; q <= 1; ++q)
      for (int p = 0; p < t; ++p)
        require(same_invariants(e2.group({p, q}), homology::groupoid_homology(pattern.row(q), p)),
                "(a) pair " + std::to_string(k) + ": E^2" + Bidegree{p, q}.to_string() + " differs");
    ++pairs;
  }
  // (b) convergence for two-step filtered complexes.
  int complexes = 0;
  for (int k = 0; k < 12; ++k) {
    const auto fc = corpus::random_filtered_complex(rng, 12, 2);
    std::size_t total = 0;
    for (int n = fc.complex.min_degree(); n <= fc.complex.max_degree(); ++n)
      total += fc.complex.rank(n);
    require(total <= 12 && fc.max_level() <= 1, "(b) generator exceeded bounds");
    const auto ec = couple_from_filtered_complex(fc);
    const auto rep = converge_check(ec, induced_filtration(fc), ec.support());
    require(rep.converges, "(b) complex " + std::to_string(k) + " fails at " +
                               (rep.witness ? rep.witness->to_string() : std::string("?")));
    ++complexes;
  }
  // (c) comparison along Omega_S morphisms.
  int morphisms = 0;
  for (const auto &[name, s] : corpus::torsion_free_semigroups()) {
    const int t = 3;
    const auto om = correspondence::omega_S(s);
    const auto &c = om.correspondence;
    const auto a = gmodule::constant_module(c.left(), FgAbGroup::free(1));
    const auto b = gmodule::constant_module(c.right(), FgAbGroup::free(1));
    const auto f = homology::orbit_sum_map(c, gmodule::induce(c, b));
    const auto chain = homology::induced_chain_map(c, a, b, f, t);
    require(chain.chain_map_verified, "(c) " + name + ": chain map not verified");
    const auto ra = resolution_complex(ParityPattern{a, gmodule::zero_module(c.left())}, t, 0, 2);
    const auto rb = resolution_complex(ParityPattern{b, gmodule::zero_module(c.right())}, t, 0, 2);
    const auto fm = resolution_chain_map(ra, rb, chain.maps);
    const Window w = hull(default_data_window(ra.filtered), default_data_window(rb.filtered));
    const auto src = couple_from_filtered_complex(ra.filtered, w);
    const auto dst = couple_from_filtered_complex(rb.filtered, w);
    const auto m = couple_morphism(ra.filtered, rb.filtered, fm, w);
    const auto rep = comparison(src, dst, m);
    require(rep.certified && rep.abutment_isomorphism, "(c) " + name + ": comparison not certified");
    ++morphisms;
  }
  return {true, "(a) " + std::to_string(pairs) + " resolution couples, (b) " + std::to_string(complexes) +
                    " filtered complexes converge, (c) " + std::to_string(morphisms) + " morphisms certified"};
}

// 6. Condition (P).
Outcome criterion6() {
  corpus::Rng rng(66);
  for (int k = 0; k < 12; ++k) {
    const auto a = corpus::random_action(rng);
    const auto fam = correspondence::family_Ffin(a);
    const auto rep = correspondence::check_condition_P(fam.family.ambient, fam.family);
    require(rep.holds, "action " + std::to_string(k) + ": finite-subgroup family fails");
  }
  int with_isotropy = 0, without = 0;
  for (int k = 0; k < 30; ++k) {
    const auto g = corpus::random_groupoid(rng, 3, 3, 3);
    bool nontrivial = false;
    for (const auto &iso : groupoid::orbit_decomposition(g).isotropy)
      nontrivial = nontrivial || !iso.group.is_trivial();
    const bool holds = correspondence::check_condition_P(g, correspondence::unit_family(g)).holds;
    require(holds == !nontrivial, "groupoid " + std::to_string(k) + ": unit family verdict " +
                                      (holds ? "holds" : "fails") + " with " +
                                      (nontrivial ? "nontrivial" : "trivial") + " isotropy");
    (nontrivial ? with_isotropy : without)++;
  }
  require(with_isotropy > 0 && without > 0, "unit family test did not cover both cases");
  return {true, "12 actions pass with the finite-subgroup family; unit family fails on " +
                    std::to_string(with_isotropy) + " and passes on " + std::to_string(without) + " groupoids"};
}

// 7. Decomposition round trip.
Outcome criterion7() {
  corpus::Rng rng(777);
  std::size_t witnessed = 0;
  for (int k = 0; k < 12; ++k) {
    const auto c = corpus::random_correspondence(rng, 20);
    require(c.size() <= 20, "generator exceeded 20 points");
    const auto d = correspondence::decompose(c);
    require(d.witness_verified, "correspondence " + std::to_string(k) + ": witness not verified");
    require(correspondence::is_isomorphism(d.recomposed, c, d.witness),
            "correspondence " + std::to_string(k) + ": witness is not an isomorphism");
    witnessed += d.witness.size();
  }
  return {true, "12 correspondences, witnesses cover " + std::to_string(witnessed) + " points"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 Toeplitz K-theory cross-check", criterion1}, {"2 Omega_S homology isomorphism", criterion2},
      {"3 Z/2 group homology oracle", criterion3},     {"4 H_0 equals coinvariants", criterion4},
      {"5 spectral sequences", criterion5},            {"6 condition (P)", criterion6},
      {"7 decomposition round trip", criterion7},
  };
  bool all = true;
  for (const auto &[name, check] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception &e) {
      o = {false, e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(seconds_since(t0)) << " s]"
              << std::endl;
  }
  return all ? 0 : 1;
}
