#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etale/finite_group.hpp"
#include "etale/invsgp.hpp"
#include "etale/zlinalg.hpp"

// K-groups of reduced semigroup C*-algebras assembled from stabilizer groups,
// and the read-off of K-theory from homology when the spectral sequence
// collapses for degree reasons.
namespace etale::kformula {

using zlinalg::FgAbGroup;

struct KClass {
  FgAbGroup k0;
  FgAbGroup k1;
  std::string provenance;

  bool isomorphic(const KClass &other) const { return k0.isomorphic(other.k0) && k1.isomorphic(other.k1); }
  std::string to_string() const;
};

// A formula hypothesis fails; the engine refuses instead of extrapolating.
class HypothesisRefusal : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class GroupKind {
  trivial,
  free_abelian,  // Z^rank
  free,          // F_rank
};

struct GroupDescriptor {
  GroupKind kind = GroupKind::trivial;
  std::size_t rank = 0;
  std::string to_string() const;
};

// The only source of group K-theory in the engine.
KClass group_k_lookup(const GroupDescriptor &g);
// Finite groups are recognized only when trivial; any other finite group has
// torsion and no table entry.
std::optional<GroupDescriptor> recognize(const FiniteGroup &g);

struct OrbitTerm {
  std::size_t representative = 0;
  std::vector<std::size_t> orbit;
  std::size_t stabilizer_order = 1;
  GroupDescriptor stabilizer;
  KClass k;
};

struct CorollaryB {
  KClass total;
  std::vector<OrbitTerm> orbits;
  std::vector<std::string> assumptions;
};

// Direct sum over orbits of nonzero idempotents of the K-theory of the
// stabilizer groups. Throws HypothesisRefusal for a stabilizer with an element
// of prime order or without a table entry.
CorollaryB corollary_b(const invsgp::InverseSemigroup &s);

// K_0 = H_0 and K_1 = H_1 when H_p vanishes for every other p in the table;
// absent otherwise.
std::optional<KClass> hk_collapse(const zlinalg::GradedGroup &h);

struct ToeplitzReport {
  std::size_t vertices = 0;
  int truncation = 0;
  KClass expected;
  KClass corollary;
  zlinalg::GradedGroup universal_homology;
  zlinalg::GradedGroup discrete_homology;
  std::optional<KClass> universal_route;
  std::optional<KClass> discrete_route;
};

// For a finite acyclic digraph: the stabilizer sum, the collapsed homology of
// the universal groupoid and of the discrete groupoid, each compared with
// (Z^|V|, 0). Throws std::logic_error on any disagreement and
// std::invalid_argument for a cyclic graph.
ToeplitzReport cross_check_toeplitz(const invsgp::Digraph &g, int truncation = 4);

}  // namespace etale::kformula
