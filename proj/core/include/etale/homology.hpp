#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "etale/correspondence.hpp"
#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/invsgp.hpp"
#include "etale/zlinalg.hpp"

// Bar complexes of finite groupoids with module coefficients, chain maps along
// correspondences and the induced maps in homology.
//
// Conventions: an n-chain is a composable tuple (g1, ..., gn), s(gi) = r(gi+1),
// with a coefficient in the fibre at s(gn). Face 0 drops g1, face i composes
// gi gi+1, face n drops gn and moves the coefficient by gn. Degree 0 chains are
// coefficients at a unit.
namespace etale::homology {

using gmodule::GModule;
using gmodule::GModuleMap;
using groupoid::FiniteGroupoid;
using zlinalg::FgAbGroup;
using zlinalg::IntMatrix;

enum class BarVariant {
  normalized,    // tuples without units
  unnormalized,  // all composable tuples
};

class BarComplex {
public:
  // Degrees 0..truncation; homology is reliable in degrees below truncation.
  // Torsion fibres make the chain groups presented; their dense relation
  // matrices are refused above a size limit.
  static BarComplex build(const GModule &m, int truncation, BarVariant variant = BarVariant::normalized);
  // Generators and differentials only, with no module validation. The actions
  // need only be functorial modulo the fibre relations.
  static BarComplex build_free(const GModule &m, int truncation, BarVariant variant = BarVariant::normalized);

  // H_n for n < truncation. Torsion coefficients go through a sparse free
  // replacement of the presented complex.
  FgAbGroup homology(int n) const;

  const GModule &module() const { return module_; }
  const FiniteGroupoid &groupoid() const { return module_.groupoid; }
  int truncation() const { return truncation_; }
  BarVariant variant() const { return variant_; }
  const zlinalg::ChainComplex &complex() const { return complex_; }

  std::size_t tuple_count(int n) const;
  // Arrows of tuple t in degree n; for n = 0 the single entry is the unit.
  std::vector<std::size_t> tuple(int n, std::size_t t) const;
  // Index of a tuple (arrows g1..gn, composable) in degree n, or npos if it is
  // degenerate in the normalized variant. For n = 0 pass the unit as root.
  std::size_t tuple_index(std::size_t root, const std::size_t *arrows, std::size_t n) const;
  // Unit carrying the coefficient of tuple t.
  std::size_t coefficient_unit(int n, std::size_t t) const;
  // First generator of tuple t in the chain group of degree n.
  std::size_t generator_offset(int n, std::size_t t) const { return gen_offset_[n][t]; }
  std::size_t rank(int n) const { return gen_offset_[n].back(); }

private:
  static BarComplex assemble(const GModule &m, int truncation, BarVariant variant, bool relations);

  GModule module_;
  int truncation_ = 0;
  BarVariant variant_ = BarVariant::normalized;
  // Degree n tuples extend degree n-1 tuples by one arrow at the end; the
  // extensions of a tuple are contiguous and ordered like arrows_into.
  std::vector<std::vector<std::uint32_t>> last_;   // per degree: last arrow (unit for n = 0)
  std::vector<std::vector<std::uint32_t>> parent_; // per degree >= 1: tuple index in degree n-1
  std::vector<std::vector<std::size_t>> first_child_;
  std::vector<std::vector<std::size_t>> gen_offset_;
  zlinalg::ChainComplex complex_;
};

// H_n(G; M) from the bar complex truncated at n + 1.
FgAbGroup groupoid_homology(const GModule &m, int n, BarVariant variant = BarVariant::normalized);
// Degrees 0..truncation-1 from one complex.
zlinalg::GradedGroup homology_table(const GModule &m, int truncation, BarVariant variant = BarVariant::normalized);

// Free chain complex with the homology of C(G; M) in degrees below
// truncation. For free fibres it is the bar complex; torsion fibres add one
// generator per torsion coefficient in the next degree. level[n][i] is the bar
// degree a generator comes from, so every level is a subcomplex.
struct FreeBarModel {
  zlinalg::ChainComplex complex;
  std::vector<std::vector<int>> level;
};
FreeBarModel free_bar_model(const GModule &m, int truncation, BarVariant variant = BarVariant::normalized);

// Z_G -> Ind_c Z_H sending the generator at u to the sum of all orbit summands
// at u.
GModuleMap orbit_sum_map(const correspondence::Correspondence &c, const gmodule::InducedModule &ind);

enum class LiftMethod {
  homotopy,  // f_n = s f_{n-1} d with the fibrewise contracting homotopy
  solve,     // integer solve per basis element (small inputs only)
};

struct LiftOptions {
  LiftMethod method = LiftMethod::homotopy;
  // For LiftMethod::solve: reverse the order in which unknowns are visited.
  bool reverse_order = false;
  // For LiftMethod::solve: refuse fibres of Ind_c Q_n larger than this.
  std::size_t max_fibre = 600;
};

// Lift of f : A -> Ind_c B to the normalized bar resolutions, pushed to
// coinvariants and through delta: degree n maps C_n(G; A) -> C_n(H; B).
struct InducedChainMap {
  BarComplex source;
  BarComplex target;
  std::vector<zlinalg::SparseMatrix> maps;  // degrees 0..truncation
  bool chain_map_verified = false;
};
InducedChainMap induced_chain_map(const correspondence::Correspondence &c, const GModule &a, const GModule &b,
                                  const GModuleMap &f, int truncation, const LiftOptions &options = {});

struct InducedHomologyMap {
  int degree = 0;
  FgAbGroup source;
  FgAbGroup target;
  IntMatrix matrix;  // on the presentation generators of source and target
  bool isomorphism = false;
};
// Maps in degrees 0..truncation-1.
std::vector<InducedHomologyMap> induced_map_homology(const correspondence::Correspondence &c, const GModule &a,
                                                     const GModule &b, const GModuleMap &f, int truncation,
                                                     const LiftOptions &options = {});
// Single degree n, computed with truncation n + 1.
InducedHomologyMap induced_map_homology(const correspondence::Correspondence &c, const GModule &a, const GModule &b,
                                        const GModuleMap &f, int n, bool single_degree);

// Homology maps of one chain map, degrees 0..maps.size()-2.
std::vector<InducedHomologyMap> homology_maps(const InducedChainMap &chain);

struct DiscreteHomology {
  FgAbGroup bar;          // from the bar complex of S^x
  FgAbGroup orbit_sum;    // direct sum over orbits of stabilizer group homology
  bool agree = false;
};
// Throws std::logic_error when the two computations disagree.
DiscreteHomology homology_of_discrete_semigroup_groupoid(const invsgp::InverseSemigroup &s, int n);

}  // namespace etale::homology
