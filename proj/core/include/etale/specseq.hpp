#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/homology.hpp"
#include "etale/zlinalg.hpp"

// Exact couples of finitely generated abelian groups and their spectral
// sequences.
//
// Bidegrees: i : D(p,q) -> D(p+1,q-1), j : D(p,q) -> C(p,q),
// k : C(p,q) -> D(p-1,q); d^r has bidegree (-r, r-1). For a filtered complex
// D(p,q) = H_{p+q}(F_p) and C(p,q) = H_{p+q}(F_p / F_{p-1}).
namespace etale::specseq {

using zlinalg::FgAbGroup;
using zlinalg::IntMatrix;
using zlinalg::Lattice;
using zlinalg::Subquotient;

struct Bidegree {
  int p = 0;
  int q = 0;
  auto operator<=>(const Bidegree &) const = default;
  std::string to_string() const;
};

struct Window {
  int pmin = 0;
  int pmax = 0;
  int qmin = 0;
  int qmax = 0;

  bool contains(int p, int q) const { return p >= pmin && p <= pmax && q >= qmin && q <= qmax; }
  bool contains(Bidegree b) const { return contains(b.p, b.q); }
  bool contains(const Window &w) const;
  std::vector<Bidegree> bidegrees() const;
  std::string to_string() const;
  // "pmin:pmax,qmin:qmax"
  static Window parse(const std::string &text);
  bool operator==(const Window &) const = default;
};
// Smallest window containing both.
Window hull(const Window &a, const Window &b);

// Raised when a page needs couple data outside the data window.
class MarginError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// Raised when the comparison theorem's hypothesis fails.
class PreconditionError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ExactCouple {
public:
  ExactCouple() = default;
  // C vanishes outside support; D and C are known on data, which must contain
  // support.
  ExactCouple(Window data, Window support);

  const Window &data_window() const { return data_; }
  const Window &support() const { return support_; }

  void set_C(Bidegree b, FgAbGroup g);
  void set_D(Bidegree b, FgAbGroup g);
  void set_i(Bidegree b, IntMatrix m);
  void set_j(Bidegree b, IntMatrix m);
  void set_k(Bidegree b, IntMatrix m);

  // Unset groups inside the data window are zero; outside it MarginError.
  const FgAbGroup &C(Bidegree b) const;
  const FgAbGroup &D(Bidegree b) const;
  // Maps keyed by source bidegree; unset maps are zero.
  IntMatrix i(Bidegree b) const;
  IntMatrix j(Bidegree b) const;
  IntMatrix k(Bidegree b) const;

private:
  void require_data(Bidegree b, const char *what) const;

  Window data_;
  Window support_;
  std::map<Bidegree, FgAbGroup> c_, d_;
  std::map<Bidegree, IntMatrix> i_, j_, k_;
  FgAbGroup zero_;
};

struct ExactnessReport {
  bool exact = true;
  std::vector<std::string> failures;
};
// Well-definedness of i, j, k and exactness at all three nodes wherever the
// neighbouring data is inside the data window.
ExactnessReport check_exactness(const ExactCouple &ec);

// Free chain complex with a filtration level >= 0 per generator; F_p is spanned
// by the generators of level <= p.
struct FilteredComplex {
  zlinalg::ChainComplex complex;
  std::vector<std::vector<int>> level;  // [degree - min_degree][generator]

  int max_level() const;
};
// Throws std::invalid_argument unless every F_p is a subcomplex.
void validate_filtration(const FilteredComplex &fc);

// Support: p in [0, max level], q covering the complex's degrees. The default
// data window adds a margin of max level + 2 on every side, enough for the
// limit page.
ExactCouple couple_from_filtered_complex(const FilteredComplex &fc, std::optional<Window> data = std::nullopt);
Window default_data_window(const FilteredComplex &fc);

struct Page {
  int r = 1;
  Window support;
  // Subquotients of the generators of C(p,q), for p,q in support.
  std::map<Bidegree, Subquotient> groups;
  // d^r on presentation generators, keyed by source; absent means zero.
  std::map<Bidegree, IntMatrix> differential;

  const FgAbGroup &group(Bidegree b) const;
  // Matrix of d^r out of b (zero when absent).
  IntMatrix d(Bidegree b) const;
};

// E^r on the support. d^r is checked to be well defined and to square to zero.
Page page(const ExactCouple &ec, int r);
// H(E^r, d^r) at b.
FgAbGroup page_homology(const Page &e, Bidegree b);
// E^{r+1} = H(E^r, d^r) on the support.
bool verify_next_page(const Page &e, const Page &next);

struct LimitPage {
  int stabilization = 1;  // first r with E^r = E^infinity
  int bound = 1;          // d^r vanishes for r >= bound for bidegree reasons
  std::vector<Page> pages;  // E^1 .. E^bound
  const Page &limit() const { return pages.back(); }
};
class StabilizationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
LimitPage limit_page(const ExactCouple &ec);

// Ascending filtration of graded groups: steps[n][k] is F_k G_n, all with one
// ambient and one denominator, steps[n][0] zero and the last step G_n.
struct FilteredTarget {
  std::map<int, std::vector<Subquotient>> steps;
};
void validate_target(const FilteredTarget &t);
// Filtration of total homology by the images of H(F_{k-1}).
FilteredTarget induced_filtration(const FilteredComplex &fc);

struct ConvergenceEntry {
  Bidegree at;
  FgAbGroup limit;
  FgAbGroup graded;
  bool ok = false;
};
struct ConvergenceReport {
  bool converges = true;
  int stabilization = 1;
  std::vector<ConvergenceEntry> entries;
  std::optional<Bidegree> witness;
};
// E^inf(p,q) against F_{p+1} G_{p+q} / F_p G_{p+q} on the window.
ConvergenceReport converge_check(const ExactCouple &ec, const FilteredTarget &target, const Window &window);

// Module of bar degree p placed in row q; rows alternate even/odd.
struct ParityPattern {
  gmodule::GModule even;
  gmodule::GModule odd;
  const gmodule::GModule &row(int q) const { return (q % 2 == 0) ? even : odd; }
};
ParityPattern constant_pattern(const groupoid::FiniteGroupoid &g, const FgAbGroup &even, const FgAbGroup &odd);

// Direct sum over rows q of the free bar model of the row module, shifted to
// total degree p + q and filtered by bar degree. E^2(p,q) = H_p(G; M_q) for
// p < truncation.
struct ResolutionComplex {
  FilteredComplex filtered;
  int truncation = 0;
  int qmin = 0;
  int qmax = 0;
  // offset[q][n - min_degree]: first generator of row q in total degree n.
  std::map<int, std::vector<std::size_t>> offset;
  // Last bar degree of row q; it holds the boundaries of the previous degree.
  std::map<int, int> top;
  // Rows whose module has torsion fibres.
  std::map<int, bool> torsion;
};
ResolutionComplex resolution_complex(const ParityPattern &pattern, int truncation, int qmin, int qmax);
ExactCouple couple_from_resolution(const ParityPattern &pattern, int truncation, int qmin, int qmax);

// Filtration-preserving chain map between filtered complexes, per degree of the
// source (dense, target rank x source rank).
struct FilteredChainMap {
  std::vector<IntMatrix> maps;
};
void validate_filtered_map(const FilteredComplex &a, const FilteredComplex &b, const FilteredChainMap &f);

struct CoupleMorphism {
  std::map<Bidegree, IntMatrix> on_C;  // absent means zero
  std::map<Bidegree, IntMatrix> on_D;
};
struct MorphismCheck {
  bool commutes = true;
  std::vector<std::string> failures;
};
MorphismCheck check_morphism(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m);
// Both couples are built on window.
CoupleMorphism couple_morphism(const FilteredComplex &a, const FilteredComplex &b, const FilteredChainMap &f,
                               const Window &window);

// Chain map between resolution complexes with a zero odd row, from a chain map
// of bar complexes in degrees 0..truncation.
FilteredChainMap resolution_chain_map(const ResolutionComplex &a, const ResolutionComplex &b,
                                      const std::vector<zlinalg::SparseMatrix> &even_row);

struct PageMap {
  int r = 1;
  std::map<Bidegree, IntMatrix> maps;  // on page presentation generators
  bool commutes_with_d = true;
};
// Maps on E^1 .. E^last; throws std::invalid_argument for a non-morphism.
std::vector<PageMap> couple_morphism_pages(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m,
                                           int last);

struct ComparisonReport {
  bool certified = false;
  int bound = 1;
  // Pages 2..bound checked; bound is E^infinity.
  std::vector<int> pages_checked;
  // Map on D at the top of the data window, i.e. on the abutment, per degree.
  bool abutment_isomorphism = false;
};
// Throws PreconditionError unless the E^2 map is an isomorphism everywhere and
// std::logic_error if a later page fails to be one.
ComparisonReport comparison(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m);

struct CollapseCertificate {
  bool certified = false;
  std::vector<Bidegree> obstructions;  // nonzero E^2 outside columns 0, 1
};
CollapseCertificate degenerate_collapse(const Page &e2);
// Single-row form for a homology table: H_p must vanish for p outside {0, 1}.
CollapseCertificate degenerate_collapse(const zlinalg::GradedGroup &h);

}  // namespace etale::specseq
