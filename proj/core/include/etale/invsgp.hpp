#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etale/finite_group.hpp"

namespace etale::invsgp {

inline constexpr std::size_t npos = SIZE_MAX;

// Finite inverse semigroup on indices 0..n-1, given by its product and star
// tables. The zero is optional.
class InverseSemigroup {
public:
  InverseSemigroup() = default;
  // Checks table shapes only; use validate() for the axioms.
  InverseSemigroup(std::vector<std::string> names, std::optional<std::size_t> zero,
                   std::vector<std::vector<std::size_t>> product, std::vector<std::size_t> star);

  std::size_t size() const { return names_.size(); }
  const std::string &name(std::size_t a) const { return names_[a]; }
  const std::vector<std::string> &names() const { return names_; }
  std::optional<std::size_t> index_of(const std::string &name) const;
  std::optional<std::size_t> zero() const { return zero_; }
  bool is_zero(std::size_t a) const { return zero_ && *zero_ == a; }

  std::size_t mul(std::size_t a, std::size_t b) const { return product_[a][b]; }
  std::size_t star(std::size_t a) const { return star_[a]; }
  const std::vector<std::vector<std::size_t>> &product() const { return product_; }
  const std::vector<std::size_t> &star_table() const { return star_; }

  // s*s and ss*
  std::size_t source_idempotent(std::size_t s) const { return mul(star(s), s); }
  std::size_t range_idempotent(std::size_t s) const { return mul(s, star(s)); }
  bool is_idempotent(std::size_t a) const { return mul(a, a) == a; }
  // Natural order: s <= t iff s = t s* s.
  bool leq(std::size_t s, std::size_t t) const { return s == mul(t, mul(star(s), s)); }

  std::vector<std::size_t> idempotents() const;
  std::vector<std::size_t> nonzero_idempotents() const;
  std::vector<std::size_t> nonzero_elements() const;

private:
  std::vector<std::string> names_;
  std::optional<std::size_t> zero_;
  std::vector<std::vector<std::size_t>> product_;
  std::vector<std::size_t> star_;
};

struct Violation {
  std::string axiom;
  std::vector<std::size_t> witness;
  std::string message;
};

struct ValidationResult {
  bool valid = true;
  std::optional<Violation> violation;
  explicit operator bool() const { return valid; }
};

// Reports the first violated axiom, in the order: zero, associativity,
// involution, regularity, commuting idempotents, anti-automorphism.
ValidationResult validate(const InverseSemigroup &s);
// Throws std::invalid_argument carrying the diagnostic when s is invalid.
void require_valid(const InverseSemigroup &s);

struct Stabilizer {
  std::size_t idempotent = 0;
  std::vector<std::size_t> elements;  // group index k is elements[k]
  FiniteGroup group;
};

// S_e = { s : s*s = ss* = e }.
Stabilizer stabilizer_subgroup(const InverseSemigroup &s, std::size_t e);

struct IdempotentOrbits {
  std::vector<std::vector<std::size_t>> orbits;  // each sorted, representative first
  std::vector<std::size_t> orbit_of;             // per element; npos off E^x
  std::size_t count() const { return orbits.size(); }
  std::size_t representative(std::size_t k) const { return orbits[k].front(); }
};

// e ~ s e s* whenever e <= s*s; classes ordered by lowest member.
IdempotentOrbits orbits_on_idempotents(const InverseSemigroup &s);

struct LowerBounds {
  std::size_t s = 0, t = 0;
  std::vector<std::size_t> generators;  // maximal common lower bounds
};

struct WeakSemilatticeReport {
  bool holds = true;
  std::vector<LowerBounds> pairs;  // one entry per unordered pair s <= t (by index)
};

// Finite S always passes; the report lists the generating set of every
// common-lower-bound down-set.
WeakSemilatticeReport weak_semilattice_check(const InverseSemigroup &s);

struct Digraph {
  struct Edge {
    std::string name;
    std::size_t src = 0;
    std::size_t dst = 0;
  };
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
};

// Throws std::invalid_argument for dangling edges or duplicate names.
void check_digraph(const Digraph &g);
bool is_acyclic(const Digraph &g);

// Elements are 0 and pairs (p, q) of paths ending at the same vertex, written
// p q*. For an edge e: A -> B, e*e = v_B and ee* <= v_A. Rejects cyclic graphs.
// Index 0 is the zero, indices 1..|V| are the vertex idempotents.
InverseSemigroup graph_inverse_semigroup(const Digraph &g);

// Partial bijection of {0..n-1}; -1 marks points outside the domain.
using PartialMap = std::vector<int>;

struct PartialBijectionSemigroup {
  InverseSemigroup semigroup;
  std::vector<PartialMap> maps;  // maps[a] represents element a
  std::size_t points = 0;
};

// Inverse subsemigroup of the symmetric inverse monoid generated by gens
// (closed under product and inverse, always containing the empty map as zero).
PartialBijectionSemigroup from_partial_bijections(std::size_t points, const std::vector<PartialMap> &gens);
PartialBijectionSemigroup symmetric_inverse_monoid(std::size_t n);
// Order-preserving partial injections of a chain.
PartialBijectionSemigroup order_preserving_injections(std::size_t n);

// Meet-semilattice with the given meet table (must contain a bottom used as zero).
InverseSemigroup semilattice(std::vector<std::string> names, std::vector<std::vector<std::size_t>> meet,
                             std::optional<std::size_t> zero);
// Subsets of a k-set under intersection; the empty set is the zero.
InverseSemigroup powerset_semilattice(std::size_t k);
// Chain z < e_1 < ... < e_k with meet = min.
InverseSemigroup chain_semilattice(std::size_t k);
// G with an adjoined zero at index 0.
InverseSemigroup group_with_zero(const FiniteGroup &g, const std::string &prefix = "g");
// Same semigroup with element a renamed and moved to position perm[a].
InverseSemigroup relabel(const InverseSemigroup &s, const std::vector<std::size_t> &perm);

}  // namespace etale::invsgp
