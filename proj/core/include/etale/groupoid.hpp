#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "etale/finite_group.hpp"
#include "etale/invsgp.hpp"

namespace etale::groupoid {

inline constexpr std::size_t npos = SIZE_MAX;

// Finite discrete groupoid. Arrows 0..U-1 are the unit arrows of units 0..U-1.
class FiniteGroupoid {
public:
  struct Arrow {
    std::string name;
    std::size_t range = 0;
    std::size_t source = 0;
  };

  FiniteGroupoid() = default;
  // Non-unit arrows are given explicitly; compose(g, h) is called on every
  // composable pair (s(g) = r(h)) of arrows, units included, and must return an
  // arrow index. All groupoid axioms are checked; throws std::invalid_argument
  // naming the first failure.
  static FiniteGroupoid build(std::vector<std::string> unit_names, std::vector<Arrow> nonunit_arrows,
                              const std::function<std::size_t(std::size_t, std::size_t)> &compose);

  std::size_t unit_count() const { return units_.size(); }
  std::size_t arrow_count() const { return range_.size(); }
  const std::string &unit_name(std::size_t u) const { return units_[u]; }
  const std::string &arrow_name(std::size_t a) const { return names_[a]; }
  const std::vector<std::string> &unit_names() const { return units_; }
  std::optional<std::size_t> find_arrow(const std::string &name) const;
  std::optional<std::size_t> find_unit(const std::string &name) const;

  std::size_t range(std::size_t a) const { return range_[a]; }
  std::size_t source(std::size_t a) const { return source_[a]; }
  std::size_t inverse(std::size_t a) const { return inverse_[a]; }
  bool is_unit(std::size_t a) const { return a < units_.size(); }
  bool composable(std::size_t g, std::size_t h) const { return source_[g] == range_[h]; }
  // Throws std::invalid_argument if s(g) != r(h).
  std::size_t compose(std::size_t g, std::size_t h) const;
  // Arrows with range u, in increasing index order.
  const std::vector<std::size_t> &arrows_into(std::size_t u) const { return into_[u]; }
  // Position of a among arrows_into(range(a)).
  std::size_t position_into(std::size_t a) const { return pos_into_[a]; }
  // compose(g, arrows_into(source(g))[k])
  std::size_t compose_at(std::size_t g, std::size_t k) const { return comp_[g][k]; }
  std::vector<std::size_t> arrows_between(std::size_t target, std::size_t src) const;

  bool operator==(const FiniteGroupoid &rhs) const = default;

private:
  std::vector<std::string> units_;
  std::vector<std::string> names_;
  std::vector<std::size_t> range_, source_, inverse_;
  std::vector<std::vector<std::size_t>> into_;
  std::vector<std::size_t> pos_into_;
  std::vector<std::vector<std::size_t>> comp_;
};

// A sub- or restricted groupoid together with its inclusion.
struct Embedded {
  FiniteGroupoid groupoid;
  std::vector<std::size_t> arrow_map;  // new arrow -> ambient arrow
  std::vector<std::size_t> unit_map;   // new unit -> ambient unit
};

FiniteGroupoid units_only(std::vector<std::string> names);
FiniteGroupoid pair_groupoid(std::size_t n);
FiniteGroupoid group_groupoid(const FiniteGroup &g, const std::string &prefix = "g");
FiniteGroupoid disjoint_union(const FiniteGroupoid &a, const FiniteGroupoid &b);
// Units x0..x{n-1}, arrows (xi,g,xj) for g in the group; (xi,g,xj)(xj,h,xk) = (xi,gh,xk).
FiniteGroupoid transitive_groupoid(std::size_t n, const FiniteGroup &g, const std::string &prefix = "g");

// Left G-set: anchor to units, act[g][x] defined (not npos) iff s(g) = anchor[x].
struct GSet {
  std::vector<std::string> points;
  std::vector<std::size_t> anchor;
  std::vector<std::vector<std::size_t>> act;
};

struct IsotropyGroup {
  std::vector<std::size_t> arrows;  // group element k is arrows[k]
  FiniteGroup group;
};
IsotropyGroup isotropy_group(const FiniteGroupoid &g, std::size_t x);

Embedded restriction(const FiniteGroupoid &g, const std::vector<std::size_t> &units);
// Arrows must be closed under composition and inverse and contain the unit
// arrows of every unit they touch.
Embedded subgroupoid(const FiniteGroupoid &g, std::vector<std::size_t> arrows);

struct OrbitDecomposition {
  std::vector<std::vector<std::size_t>> orbits;  // sorted; representative first
  std::vector<std::size_t> orbit_of;             // per unit
  std::vector<IsotropyGroup> isotropy;           // at each representative
  bool conjugation_verified = false;
};
OrbitDecomposition orbit_decomposition(const FiniteGroupoid &g);

// Finite groupoids are proper and Hausdorff; this is certified, not tested.
inline constexpr bool is_proper(const FiniteGroupoid &) { return true; }

bool is_homomorphism(const FiniteGroupoid &a, const FiniteGroupoid &b, const std::vector<std::size_t> &arrow_map);
// Arrow bijection that is a functor, if the groupoids are isomorphic.
std::optional<std::vector<std::size_t>> find_isomorphism(const FiniteGroupoid &a, const FiniteGroupoid &b);

// Action of an inverse semigroup on a finite set by partial bijections.
struct SAction {
  invsgp::InverseSemigroup semigroup;
  std::vector<std::string> points;
  std::vector<invsgp::PartialMap> maps;  // maps[s][x] = s.x or -1
  bool defined(std::size_t s, std::size_t x) const { return maps[s][x] >= 0; }
  std::size_t act(std::size_t s, std::size_t x) const { return static_cast<std::size_t>(maps[s][x]); }
};

struct ActionCheck {
  bool valid = true;
  std::string message;
};
ActionCheck validate_action(const SAction &a);
ActionCheck validate_gset(const FiniteGroupoid &g, const GSet &x);
// Units with g . s(g) = r(g).
GSet unit_gset(const FiniteGroupoid &g);
// Arrows under left multiplication.
GSet translation_gset(const FiniteGroupoid &g);

// Action on the nonzero idempotents: s acts on e iff e <= s*s, by e -> s e s*.
SAction spectral_action(const invsgp::InverseSemigroup &s);
// Action of a partial-bijection semigroup on its points.
SAction natural_action(const invsgp::PartialBijectionSemigroup &p);
// Drops points outside every idempotent domain.
SAction restrict_to_support(const SAction &a);

// Groupoid built from semigroup data, with bookkeeping back to the semigroup.
struct GermGroupoid {
  FiniteGroupoid groupoid;
  std::vector<std::size_t> germ_element;  // arrow -> a semigroup element representing its germ
  std::vector<std::size_t> germ_point;    // arrow -> source point
  std::vector<std::size_t> unit_point;    // unit -> point (or idempotent)
};

// Germs [s, x] with x in dom(s); [s,x] = [t,x] iff s e = t e for an idempotent
// e whose domain contains x. Units are the points.
GermGroupoid transformation_groupoid(const SAction &a);
// Units = E^x; arrows = germs [s, e] with e <= s*s, each represented by s e.
GermGroupoid universal_groupoid(const invsgp::InverseSemigroup &s);
// Arrows = S^x, units = E^x, r(t) = tt*, s(t) = t*t.
GermGroupoid discrete_groupoid(const invsgp::InverseSemigroup &s);

}  // namespace etale::groupoid
