#include <doctest.h>

#include "etale/corpus.hpp"
#include "etale/specseq.hpp"

using namespace etale;
using namespace etale::specseq;
using zlinalg::ChainComplex;
using zlinalg::Int;
using zlinalg::SparseMatrix;

namespace {

FgAbGroup z(std::size_t r = 1) { return FgAbGroup::free(r); }
FgAbGroup zmod(long n) { return FgAbGroup::cyclic(Int(n)); }

FilteredComplex make_filtered(std::vector<std::size_t> ranks, std::vector<SparseMatrix> d,
                              std::vector<std::vector<int>> level) {
  FilteredComplex fc;
  fc.complex = ChainComplex(0, std::move(ranks), std::move(d));
  fc.level = std::move(level);
  return fc;
}

// Z --k--> Z with the source at level 1 and the target at level 0.
FilteredComplex crossing_piece(long k) {
  SparseMatrix d(1, 1);
  d.add(0, 0, k);
  return make_filtered({1, 1}, {d}, {{0}, {1}});
}

// Orders and ranks of the graded pieces of E^inf in total degree n.
std::pair<std::size_t, Int> limit_size(const Page &e, int n) {
  std::size_t rank = 0;
  Int order = 1;
  for (const auto &[b, sq] : e.groups) {
    if (b.p + b.q != n)
      continue;
    rank += sq.group().free_rank();
    for (const auto &f : sq.group().factors())
      order *= f;
  }
  return {rank, order};
}

std::pair<std::size_t, Int> group_size(const FgAbGroup &g) {
  Int order = 1;
  for (const auto &f : g.factors())
    order *= f;
  return {g.free_rank(), order};
}

bool is_identity_on(const IntMatrix &m, const FgAbGroup &g) {
  return zlinalg::maps_equal(m, IntMatrix::identity(g.generators()), g);
}

}  // namespace

TEST_CASE("windows parse and reject malformed input") {
  const Window w = Window::parse("-1:3,0:2");
  CHECK(w == Window{-1, 3, 0, 2});
  CHECK(w.to_string() == "-1:3,0:2");
  CHECK(w.bidegrees().size() == 15);
  CHECK_THROWS_AS(Window::parse("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("3:1,0:0"), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("0:1,0:1x"), std::invalid_argument);
  CHECK(hull(Window{0, 1, 0, 1}, Window{-2, 0, 1, 3}) == Window{-2, 1, 0, 3});
}

TEST_CASE("zero complex gives the zero couple") {
  auto fc = make_filtered({0, 0}, {SparseMatrix(0, 0)}, {{}, {}});
  auto ec = couple_from_filtered_complex(fc);
  CHECK(check_exactness(ec).exact);
  auto lp = limit_page(ec);
  for (const auto &[b, sq] : lp.limit().groups)
    CHECK(sq.group().is_trivial());
  auto rep = converge_check(ec, induced_filtration(fc), ec.support());
  CHECK(rep.converges);
}

TEST_CASE("one-step filtration collapses at the first page") {
  // Z <-2- Z <-0- Z, all at level 0.
  SparseMatrix d1(1, 1), d2(1, 1);
  d1.add(0, 0, 2);
  auto fc = make_filtered({1, 1, 1}, {d1, d2}, {{0}, {0}, {0}});
  auto ec = couple_from_filtered_complex(fc);
  CHECK(check_exactness(ec).exact);
  auto e1 = page(ec, 1);
  CHECK(e1.group({0, 0}).isomorphic(zmod(2)));
  CHECK(e1.group({0, 1}).is_trivial());
  CHECK(e1.group({0, 2}).isomorphic(z()));
  auto lp = limit_page(ec);
  CHECK(lp.stabilization == 1);
  CHECK(converge_check(ec, induced_filtration(fc), ec.support()).converges);
}

TEST_CASE("crossing piece: d1 realizes the connecting map") {
  for (long k : {1L, 2L, 3L}) {
    auto fc = crossing_piece(k);
    auto ec = couple_from_filtered_complex(fc);
    CHECK(check_exactness(ec).exact);
    auto e1 = page(ec, 1);
    // Graded pieces: Z at (0,0) and Z at (1,0); d1 is multiplication by k.
    CHECK(e1.group({0, 0}).isomorphic(z()));
    CHECK(e1.group({1, 0}).isomorphic(z()));
    auto e2 = page(ec, 2);
    CHECK(e2.group({1, 0}).is_trivial());
    CHECK(e2.group({0, 0}).isomorphic(k == 1 ? z(0) : zmod(k)));
    CHECK(verify_next_page(e1, e2));
    CHECK(converge_check(ec, induced_filtration(fc), ec.support()).converges);
  }
}

TEST_CASE("filtration must be by subcomplexes") {
  SparseMatrix d(1, 1);
  d.add(0, 0, 1);
  auto bad = make_filtered({1, 1}, {d}, {{1}, {0}});
  CHECK_THROWS_AS(couple_from_filtered_complex(bad), std::invalid_argument);
  CHECK_THROWS_AS(validate_filtration(bad), std::invalid_argument);
}

TEST_CASE("pages outside the data window are refused") {
  auto fc = crossing_piece(2);
  auto ec = couple_from_filtered_complex(fc, Window{-1, 1, -1, 1});
  CHECK_NOTHROW(page(ec, 1));
  CHECK_THROWS_AS(page(ec, 2), MarginError);
  CHECK_THROWS_AS(limit_page(ec), StabilizationError);
}

TEST_CASE("property: random two-step filtered complexes converge") {
  corpus::Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    auto fc = corpus::random_filtered_complex(rng, 12, 2);
    CAPTURE(trial);
    validate_filtration(fc);
    auto ec = couple_from_filtered_complex(fc);
    auto ex = check_exactness(ec);
    CHECK(ex.exact);
    auto lp = limit_page(ec);
    for (std::size_t r = 1; r < lp.pages.size(); ++r)
      CHECK(verify_next_page(lp.pages[r - 1], lp.pages[r]));
    auto target = induced_filtration(fc);
    auto rep = converge_check(ec, target, ec.support());
    CHECK(rep.converges);
    // Extension-blind oracle: ranks and orders add up to those of H_n.
    for (int n = 0; n <= fc.complex.max_degree(); ++n)
      CHECK(limit_size(lp.limit(), n) == group_size(zlinalg::homology_at(fc.complex, n)));
  }
}

TEST_CASE("property: three-step filtrations converge with higher differentials") {
  corpus::Rng rng(77);
  bool saw_d2 = false;
  for (int trial = 0; trial < 20; ++trial) {
    auto fc = corpus::random_filtered_complex(rng, 10, 3);
    auto ec = couple_from_filtered_complex(fc);
    CHECK(check_exactness(ec).exact);
    auto lp = limit_page(ec);
    saw_d2 = saw_d2 || lp.stabilization > 2;
    CHECK(converge_check(ec, induced_filtration(fc), ec.support()).converges);
  }
  CHECK(saw_d2);
}

TEST_CASE("corrupted target is caught with a witness") {
  auto fc = crossing_piece(2);
  auto ec = couple_from_filtered_complex(fc);
  // Target taken from the same shape with d = 0: H_0 = Z instead of Z/2.
  SparseMatrix d(1, 1);
  auto other = make_filtered({1, 1}, {d}, {{0}, {1}});
  auto rep = converge_check(ec, induced_filtration(other), ec.support());
  CHECK_FALSE(rep.converges);
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->p + rep.witness->q == 0);
}

TEST_CASE("target validation") {
  FilteredTarget t;
  auto l = zlinalg::Lattice::full(1);
  auto zero = zlinalg::Lattice::zero(1);
  t.steps[0] = {Subquotient(l, zero)};
  CHECK_THROWS_AS(validate_target(t), std::invalid_argument);
  t.steps[0] = {Subquotient(zero, zero), Subquotient(l, zero)};
  CHECK_NOTHROW(validate_target(t));
}

TEST_CASE("resolution couples: E2 is groupoid homology") {
  auto check_e2 = [](const ParityPattern &pat, int truncation, int qmin, int qmax) {
    auto ec = couple_from_resolution(pat, truncation, qmin, qmax);
    CHECK(check_exactness(ec).exact);
    auto e2 = page(ec, 2);
    for (int q = qmin; q <= qmax; ++q)
      for (int p = 0; p < truncation; ++p) {
        CAPTURE(p);
        CAPTURE(q);
        CHECK(e2.group({p, q}).isomorphic(homology::groupoid_homology(pat.row(q), p)));
      }
    return e2;
  };
  // Equivalence relation with two classes: Z^2 at (0, even).
  auto eq = groupoid::disjoint_union(groupoid::pair_groupoid(3), groupoid::pair_groupoid(2));
  auto e2 = check_e2(constant_pattern(eq, z(), z(0)), 3, 0, 3);
  CHECK(e2.group({0, 0}).isomorphic(z(2)));
  CHECK(e2.group({0, 1}).is_trivial());
  CHECK(e2.group({0, 2}).isomorphic(z(2)));
  // Zero pattern.
  auto zero = check_e2(constant_pattern(eq, z(0), z(0)), 2, 0, 1);
  CHECK(zero.groups.empty());
  // Units only with Z/2: one copy per unit.
  auto u = groupoid::units_only({"a", "b", "c"});
  auto eu = check_e2(constant_pattern(u, zmod(2), z(0)), 2, 0, 2);
  CHECK(eu.group({0, 2}).isomorphic(FgAbGroup::from_invariants({Int(2), Int(2), Int(2)}, 0)));
  // Group homology rows, torsion coefficients included.
  auto c2 = groupoid::group_groupoid(FiniteGroup::cyclic(2));
  check_e2(constant_pattern(c2, z(), z()), 3, 0, 1);
  check_e2(constant_pattern(c2, zmod(2), z(0)), 3, -1, 0);
  auto sign = gmodule::constant_module(c2, z());
  sign.action[1] = IntMatrix{{-1}};
  check_e2(ParityPattern{sign, gmodule::constant_module(c2, zmod(3))}, 3, 0, 1);
}

TEST_CASE("degenerate collapse certificate") {
  auto eq = groupoid::pair_groupoid(3);
  auto ec = couple_from_resolution(constant_pattern(eq, z(), z(0)), 3, 0, 2);
  auto lp = limit_page(ec);
  const Page &e2 = lp.pages[1];
  auto cert = degenerate_collapse(e2);
  CHECK(cert.certified);
  for (const auto &[b, sq] : e2.groups)
    CHECK(sq.group().isomorphic(lp.limit().group(b)));
  auto c2 = groupoid::group_groupoid(FiniteGroup::cyclic(2));
  auto ec2 = couple_from_resolution(constant_pattern(c2, z(), z(0)), 4, 0, 0);
  CHECK_FALSE(degenerate_collapse(page(ec2, 2)).certified);
  zlinalg::GradedGroup h;
  h.set(0, z());
  h.set(1, z());
  h.set(2, z(0));
  CHECK(degenerate_collapse(h).certified);
  h.set(2, zmod(2));
  CHECK_FALSE(degenerate_collapse(h).certified);
}

TEST_CASE("identity and zero morphisms") {
  corpus::Rng rng(5);
  auto fc = corpus::random_filtered_complex(rng, 10, 2);
  FilteredChainMap id, zero;
  for (int n = 0; n <= fc.complex.max_degree(); ++n) {
    id.maps.push_back(IntMatrix::identity(fc.complex.rank(n)));
    zero.maps.emplace_back(fc.complex.rank(n), fc.complex.rank(n));
  }
  const Window w = default_data_window(fc);
  auto ec = couple_from_filtered_complex(fc, w);
  auto mid = couple_morphism(fc, fc, id, w);
  CHECK(check_morphism(ec, ec, mid).commutes);
  auto pages = couple_morphism_pages(ec, ec, mid, 3);
  for (const auto &pm : pages) {
    auto e = page(ec, pm.r);
    for (const auto &[b, m] : pm.maps)
      CHECK(is_identity_on(m, e.group(b)));
  }
  CHECK(comparison(ec, ec, mid).certified);
  CHECK(comparison(ec, ec, mid).abutment_isomorphism);
  auto mz = couple_morphism(fc, fc, zero, w);
  for (const auto &pm : couple_morphism_pages(ec, ec, mz, 2)) {
    auto e = page(ec, pm.r);
    for (const auto &[b, m] : pm.maps)
      CHECK(zlinalg::is_zero_map(m, e.group(b)));
  }
  bool nontrivial_e2 = false;
  for (const auto &[b, sq] : page(ec, 2).groups)
    nontrivial_e2 = nontrivial_e2 || !sq.group().is_trivial();
  if (nontrivial_e2)
    CHECK_THROWS_AS(comparison(ec, ec, mz), PreconditionError);
}

TEST_CASE("non-commuting data is rejected") {
  auto fc = crossing_piece(2);
  FilteredChainMap bad;
  bad.maps = {IntMatrix{{1}}, IntMatrix{{0}}};
  CHECK_THROWS_AS(couple_morphism(fc, fc, bad, default_data_window(fc)), std::invalid_argument);
}

TEST_CASE("morphism from the unit map along Omega_S") {
  for (const auto &[name, s] : std::vector<std::pair<std::string, invsgp::InverseSemigroup>>{
           {"one edge", invsgp::graph_inverse_semigroup(corpus::one_edge_graph())},
           {"chain", invsgp::chain_semilattice(3)},
           {"brandt", corpus::brandt(2)}}) {
    CAPTURE(name);
    const int t = 3;
    auto om = correspondence::omega_S(s);
    const auto &c = om.correspondence;
    auto a = gmodule::constant_module(c.left(), z()), b = gmodule::constant_module(c.right(), z());
    auto f = homology::orbit_sum_map(c, gmodule::induce(c, b));
    auto chain = homology::induced_chain_map(c, a, b, f, t);
    REQUIRE(chain.chain_map_verified);
    auto ra = resolution_complex(ParityPattern{a, gmodule::zero_module(c.left())}, t, 0, 2);
    auto rb = resolution_complex(ParityPattern{b, gmodule::zero_module(c.right())}, t, 0, 2);
    auto fm = resolution_chain_map(ra, rb, chain.maps);
    const Window w = hull(default_data_window(ra.filtered), default_data_window(rb.filtered));
    auto src = couple_from_filtered_complex(ra.filtered, w);
    auto dst = couple_from_filtered_complex(rb.filtered, w);
    auto m = couple_morphism(ra.filtered, rb.filtered, fm, w);
    CHECK(check_morphism(src, dst, m).commutes);
    auto pages = couple_morphism_pages(src, dst, m, 2);
    auto hom = homology::homology_maps(chain);
    const Page e2a = page(src, 2), e2b = page(dst, 2);
    for (int p = 0; p < t; ++p) {
      CAPTURE(p);
      const Bidegree x{p, 0};
      auto it = pages[1].maps.find(x);
      const IntMatrix mx = it == pages[1].maps.end()
                               ? IntMatrix(e2b.group(x).generators(), e2a.group(x).generators())
                               : it->second;
      CHECK(zlinalg::is_isomorphism(mx, e2a.group(x), e2b.group(x)) == hom[static_cast<std::size_t>(p)].isomorphism);
      CHECK(e2a.group(x).isomorphic(hom[static_cast<std::size_t>(p)].source));
    }
    auto rep = comparison(src, dst, m);
    CHECK(rep.certified);
    CHECK(rep.abutment_isomorphism);
  }
}
