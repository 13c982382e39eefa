#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "etale/correspondence.hpp"
#include "etale/groupoid.hpp"
#include "etale/invsgp.hpp"
#include "etale/specseq.hpp"

// Seeded generators for test and benchmark inputs.
namespace etale::corpus {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform-ish in [0, n); n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

private:
  std::mt19937_64 engine_;
};

// Acyclic digraph without loops or parallel edges.
invsgp::Digraph random_dag(Rng &rng, std::size_t max_vertices = 6, std::size_t max_edges = 8);
// Intersection-closed family of subsets of a 4-set containing the empty set.
invsgp::InverseSemigroup random_semilattice(Rng &rng, std::size_t max_size = 8);
invsgp::PartialBijectionSemigroup random_partial_bijections(Rng &rng, std::size_t points = 3, std::size_t gens = 2);
// Spectral action of a random semigroup or natural action of partial bijections.
groupoid::SAction random_action(Rng &rng);

// Disjoint union of transitive groupoids with cyclic isotropy.
groupoid::FiniteGroupoid random_groupoid(Rng &rng, std::size_t max_components = 3, std::size_t max_units = 3,
                                         std::size_t max_order = 3);
// A functor g -> h given on arrows (h must have at least one unit).
std::vector<std::size_t> random_functor(Rng &rng, const groupoid::FiniteGroupoid &g, const groupoid::FiniteGroupoid &h);
// Valid nonempty correspondence with at most max_points points, drawn from
// identities, functors, actions, composites, Morita pieces and Omega_S.
correspondence::Correspondence random_correspondence(Rng &rng, std::size_t max_points = 20);

// Free complex in degrees 0..3 with filtration levels 0..levels-1, built from
// elementary pieces (Z, or Z --k--> Z possibly crossing levels) followed by a
// random filtration-preserving change of basis.
specseq::FilteredComplex random_filtered_complex(Rng &rng, std::size_t max_rank = 12, int levels = 2);

// Brandt semigroup B_n: matrix units e_ij with zero.
invsgp::InverseSemigroup brandt(std::size_t n);
// Fixed named corpus of semigroups whose stabilizers are trivial.
std::vector<std::pair<std::string, invsgp::InverseSemigroup>> torsion_free_semigroups();
invsgp::Digraph path_graph(std::size_t vertices);
invsgp::Digraph one_edge_graph();

}  // namespace etale::corpus
