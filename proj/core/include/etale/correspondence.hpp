#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "etale/groupoid.hpp"
#include "etale/invsgp.hpp"

namespace etale::correspondence {

using groupoid::FiniteGroupoid;
using groupoid::npos;

// Finite G-H bispace. Left action g.w is defined iff s(g) = rho(w); right
// action w.h iff sigma(w) = r(h).
class Correspondence {
public:
  using LeftFn = std::function<std::size_t(std::size_t g, std::size_t w)>;
  using RightFn = std::function<std::size_t(std::size_t w, std::size_t h)>;

  Correspondence() = default;
  // The callbacks are evaluated exactly on the defined pairs. Only shapes are
  // checked here; the axioms are checked by validate_correspondence.
  static Correspondence build(FiniteGroupoid left, FiniteGroupoid right, std::vector<std::string> points,
                              std::vector<std::size_t> rho, std::vector<std::size_t> sigma, const LeftFn &left_fn,
                              const RightFn &right_fn);

  const FiniteGroupoid &left() const { return left_; }
  const FiniteGroupoid &right() const { return right_; }
  std::size_t size() const { return points_.size(); }
  const std::string &point_name(std::size_t w) const { return points_[w]; }
  const std::vector<std::string> &points() const { return points_; }
  std::optional<std::size_t> find_point(const std::string &name) const;
  std::size_t rho(std::size_t w) const { return rho_[w]; }
  std::size_t sigma(std::size_t w) const { return sigma_[w]; }
  // npos when undefined.
  std::size_t act_left(std::size_t g, std::size_t w) const;
  std::size_t act_right(std::size_t w, std::size_t h) const;

private:
  FiniteGroupoid left_, right_;
  std::vector<std::string> points_;
  std::vector<std::size_t> rho_, sigma_;
  // ltab_[w][k]: arrows_into(rho(w))[k] inverted, acting on w.
  std::vector<std::vector<std::size_t>> ltab_;
  // rtab_[w][k]: w . arrows_into(sigma(w))[k]
  std::vector<std::vector<std::size_t>> rtab_;
};

struct CorrespondenceReport {
  bool valid = true;
  std::string axiom;
  std::string message;
  // Finite bispaces are proper; the fibres of rho-bar are recorded.
  bool proper = true;
  std::vector<std::size_t> fibre_sizes;  // |rho-bar^{-1}(x)| per unit x of G
  bool tight = false;
  bool left_free = false;
  bool open_morita_embedding = false;
};
CorrespondenceReport validate_correspondence(const Correspondence &c);
// Throws std::invalid_argument with the report message.
void require_valid(const Correspondence &c);

// Orbits of the right action. Requires a free right action.
struct RightOrbits {
  std::vector<std::vector<std::size_t>> orbits;  // representative (lowest index) first
  std::vector<std::size_t> orbit_of;
  std::vector<std::size_t> transporter;  // rep . transporter[w] = w
  std::vector<std::size_t> anchor;       // rho-bar per orbit
  std::size_t representative(std::size_t k) const { return orbits[k].front(); }
};
RightOrbits right_orbits(const Correspondence &c);
// The unique h with w1 . h = w2 (both in one orbit).
std::size_t right_transporter(const Correspondence &c, const RightOrbits &o, std::size_t w1, std::size_t w2);

// Orbits under both actions together.
std::vector<std::vector<std::size_t>> bi_orbits(const Correspondence &c);

Correspondence identity_correspondence(const FiniteGroupoid &g);
// Bispace {(x, h) : phi(x) = r(h)} of a functor phi given on arrows.
Correspondence from_homomorphism(const FiniteGroupoid &g, const FiniteGroupoid &h, const std::vector<std::size_t> &phi);
// G-space X as a correspondence into the units-only groupoid on `targets`,
// with sigma given per point (default: a single target point).
Correspondence action_correspondence(const FiniteGroupoid &g, const groupoid::GSet &x);
Correspondence action_correspondence(const FiniteGroupoid &g, const groupoid::GSet &x,
                                     const std::vector<std::string> &targets, const std::vector<std::size_t> &sigma);
// H -> G with the actions swapped; requires a free left action.
Correspondence reverse(const Correspondence &c);
// Sub-bispace on a subset closed under both actions, in the given order.
Correspondence restrict_points(const Correspondence &c, const std::vector<std::size_t> &points);

struct Composite {
  Correspondence correspondence;
  // Point -> (w, l) with w the orbit representative of its right orbit.
  std::vector<std::pair<std::size_t, std::size_t>> representative;
  RightOrbits first_orbits;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  // Class of an arbitrary pair with sigma(w) = rho(l).
  std::size_t class_of(const Correspondence &first, const Correspondence &second, std::size_t w,
                       std::size_t l) const;
};
// first : G -> H, second : H -> K gives G -> K on the balanced product.
Composite compose(const Correspondence &first, const Correspondence &second);

bool is_isomorphism(const Correspondence &a, const Correspondence &b, const std::vector<std::size_t> &map);
// Equivariant bijection over identical groupoids, if one exists.
std::optional<std::vector<std::size_t>> find_isomorphism(const Correspondence &a, const Correspondence &b);

struct LinkingGroupoid {
  FiniteGroupoid groupoid;  // units = right orbits of the bispace
  RightOrbits orbits;
  // Arrow -> (orbit representative, w) naming [rep, w*].
  std::vector<std::pair<std::size_t, std::size_t>> pair_of;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  groupoid::Embedded target;  // H restricted to sigma of the bispace
  Correspondence morita;      // bispace : groupoid -> target.groupoid
  // Arrow [w1, w2*] for sigma(w1) = sigma(w2).
  std::size_t arrow_of(const Correspondence &c, std::size_t w1, std::size_t w2) const;
};
LinkingGroupoid linking_groupoid(const Correspondence &c);

struct Decomposition {
  LinkingGroupoid linking;
  Correspondence actor;      // G -> linking groupoid, bispace = its arrows
  Correspondence morita;     // linking groupoid -> H restricted
  Correspondence inclusion;  // H restricted -> H
  Correspondence recomposed;
  // recomposed point -> input point: [[a, w], h] -> (a . w) . h
  std::vector<std::size_t> witness;
  bool witness_verified = false;
  // Filled for open Morita embeddings: G arrow -> linking arrow, g -> g . phi(s(g)).
  std::optional<std::vector<std::size_t>> actor_embedding;
  bool actor_embedding_verified = false;
};
Decomposition decompose(const Correspondence &c);

bool is_slice(const Correspondence &c, const std::vector<std::size_t> &u);
// Per right orbit, the lowest-index point whose sigma is not yet taken; orbits
// with no such point are skipped.
std::vector<std::size_t> canonical_slice(const Correspondence &c);

struct SliceHomomorphism {
  groupoid::Embedded domain;          // G restricted to rho(U)
  std::vector<std::size_t> arrow_map;  // domain arrow -> H arrow
  bool injective = false;
};
// g . u = u' . phi(g) with u, u' in U. Requires c tight and U a slice.
SliceHomomorphism slice_to_homomorphism(const Correspondence &c, const std::vector<std::size_t> &u);

// Family of open Morita embeddings K -> ambient.
struct EmbeddingFamily {
  FiniteGroupoid ambient;
  std::vector<Correspondence> members;
  std::vector<std::string> labels;
};
// Bispace = ambient arrows with range in the subgroupoid's units.
Correspondence subgroupoid_embedding(const FiniteGroupoid &g, const groupoid::Embedded &k);
EmbeddingFamily unit_family(const FiniteGroupoid &g);
EmbeddingFamily whole_family(const FiniteGroupoid &g);
// Throws std::invalid_argument naming the first malformed member.
void validate_family(const EmbeddingFamily &f);

// w with sigma(w) = x and w . gamma inside the left orbit of w.
std::optional<std::size_t> lifting_point(const Correspondence &c, std::size_t x, const std::vector<std::size_t> &gamma);

struct PWitness {
  std::size_t unit = 0;
  std::vector<std::size_t> subgroup;  // isotropy arrows
  bool found = false;
  std::size_t member = npos;
  std::size_t point = npos;
};
struct ConditionPReport {
  bool holds = true;
  std::vector<PWitness> witnesses;  // one per (unit, subgroup)
  std::optional<PWitness> failure;  // first failing pair
};
ConditionPReport check_condition_P(const FiniteGroupoid &g, const EmbeddingFamily &fam);
// Every finite isotropy subgroup of H lifts to some point (hypothesis of the
// automatic transfer of condition P).
ConditionPReport check_isotropy_lifting(const Correspondence &c);

struct FfinFamily {
  EmbeddingFamily family;
  std::vector<std::size_t> idempotent;               // per member
  std::vector<std::vector<std::size_t>> subgroup;    // per member, semigroup elements
  std::vector<groupoid::Embedded> subgroupoids;      // per member
};
// Members {[s, y] : s in F, y in dom e} of the transformation groupoid, one per
// nonzero idempotent e and subgroup F of the stabilizer of e.
FfinFamily family_Ffin(const groupoid::SAction &a);
// Same index set inside the discrete groupoid S^x: nonzero elements f d with
// f in F and d idempotent.
FfinFamily family_Ffin_discrete(const invsgp::InverseSemigroup &s);
// The spectral-action family realised inside the universal groupoid of S.
FfinFamily family_Ffin_universal(const invsgp::InverseSemigroup &s);

struct CompatiblePair {
  std::size_t e_member = 0;
  std::size_t f_member = 0;
  Correspondence lambda;            // K -> L
  std::vector<std::size_t> witness;  // (lambda then L -> H) point -> (K -> G then c) point
};
struct CompatibilityReport {
  bool compatible = true;
  std::vector<CompatiblePair> pairing;
  std::optional<std::size_t> unmatched;  // first E member without a partner
};
CompatibilityReport check_compatible(const Correspondence &c, const EmbeddingFamily &e, const EmbeddingFamily &f);

struct Transfer {
  Correspondence composite;  // K -> H
  Decomposition decomposition;
  groupoid::Embedded orbit_subgroupoid;  // K . M0 inside the linking groupoid M
  Correspondence embedding;              // L -> H
  Correspondence actor;                  // K -> L
  std::vector<std::size_t> witness;      // compose(actor, embedding) point -> composite point
  bool verified = false;
};
Transfer transfer_embedding(const Correspondence &c, const Correspondence &k);

struct OmegaS {
  groupoid::GermGroupoid discrete;
  groupoid::GermGroupoid universal;
  Correspondence correspondence;
  // Point -> (idempotent element e, universal arrow gamma) with r(gamma) <= e.
  std::vector<std::pair<std::size_t, std::size_t>> point_data;
};
OmegaS omega_S(const invsgp::InverseSemigroup &s);

}  // namespace etale::correspondence
