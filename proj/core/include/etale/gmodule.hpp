#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "etale/correspondence.hpp"
#include "etale/groupoid.hpp"
#include "etale/zlinalg.hpp"

namespace etale::gmodule {

using groupoid::FiniteGroupoid;
using zlinalg::FgAbGroup;
using zlinalg::IntMatrix;

// Fibrewise presented abelian groups with arrow actions. action[g] maps the
// generators of fibres[s(g)] to those of fibres[r(g)].
struct GModule {
  FiniteGroupoid groupoid;
  std::vector<FgAbGroup> fibres;
  std::vector<IntMatrix> action;

  std::size_t total_generators() const;
  // Start of each fibre inside the direct sum of all generators.
  std::vector<std::size_t> offsets() const;
};

struct ModuleCheck {
  bool valid = true;
  std::string message;
};
ModuleCheck validate_module(const GModule &m);
void require_valid(const GModule &m);

// Per-unit matrices between fibre generators.
struct GModuleMap {
  std::vector<IntMatrix> components;
};
ModuleCheck validate_map(const GModule &source, const GModule &target, const GModuleMap &f);
bool is_module_isomorphism(const GModule &source, const GModule &target, const GModuleMap &f);
GModuleMap identity_map(const GModule &m);
GModuleMap zero_map(const GModule &source, const GModule &target);
// second after first
GModuleMap compose_maps(const GModuleMap &first, const GModuleMap &second);
// Block matrix on the direct sum of all fibre generators.
IntMatrix total_matrix(const GModule &source, const GModule &target, const GModuleMap &f);

GModule constant_module(const FiniteGroupoid &g, const FgAbGroup &a);
GModule zero_module(const FiniteGroupoid &g);

struct FreeModule {
  GModule module;
  // Point -> index of its basis vector inside the fibre at its anchor.
  std::vector<std::size_t> position;
};
FreeModule free_module_on_gset(const FiniteGroupoid &g, const groupoid::GSet &x);

// Quotient of the direct sum of fibres by m - g.m, presented on the direct sum
// generators; projection is the quotient map on those generators.
struct Coinvariants {
  FgAbGroup group;
  IntMatrix projection;
};
Coinvariants coinvariants(const GModule &m);

// Fibre at u: one summand N_{sigma(w)} per right orbit with representative w
// and rho(w) = u, ordered by orbit index.
struct InducedModule {
  GModule module;
  correspondence::RightOrbits orbits;
  std::vector<std::vector<std::size_t>> summands;  // per unit of G: orbit indices
  std::vector<std::size_t> summand_offset;         // per orbit: offset inside its fibre
  std::vector<std::size_t> orbit_sigma;            // per orbit: sigma of the representative
};
InducedModule induce(const correspondence::Correspondence &c, const GModule &n);
// Ind of a module map over the right groupoid.
GModuleMap induce_map(const InducedModule &source, const InducedModule &target, const GModuleMap &f);

// Coinvariants of Ind_c N to coinvariants of N, as a matrix on the direct sum
// generators: [w (x) m] -> class of m in the fibre at sigma(w).
IntMatrix delta_map(const InducedModule &ind, const GModule &n);

// Natural isomorphism Ind_first(Ind_second N) -> Ind_{first o second} N.
struct CompositionIso {
  InducedModule inner;      // Ind_second N
  InducedModule iterated;   // Ind_first(Ind_second N)
  correspondence::Composite composite;
  InducedModule direct;     // Ind_{composite} N
  GModuleMap map;           // iterated -> direct
  bool verified = false;
};
CompositionIso composition_isomorphism(const correspondence::Correspondence &first,
                                       const correspondence::Correspondence &second, const GModule &n);

}  // namespace etale::gmodule
