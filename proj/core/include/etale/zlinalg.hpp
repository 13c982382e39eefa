#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace etale::zlinalg {

using Int = mpz_class;
using IntVector = std::vector<Int>;

class IntMatrix {
public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_columns(std::size_t rows, const std::vector<IntVector> &cols);
  static IntMatrix column_vector(const IntVector &v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Int &operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Int &operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  bool is_zero() const;
  IntMatrix transpose() const;
  IntVector column(std::size_t j) const;
  void set_column(std::size_t j, const IntVector &v);
  IntMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const IntMatrix &b);
  IntMatrix select_columns(const std::vector<std::size_t> &idx) const;
  IntMatrix select_rows(const std::vector<std::size_t> &idx) const;
  IntMatrix hconcat(const IntMatrix &rhs) const;
  IntMatrix vconcat(const IntMatrix &rhs) const;

  std::string to_string() const;

  bool operator==(const IntMatrix &rhs) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Int> a_;
};

IntMatrix operator*(const IntMatrix &a, const IntMatrix &b);
IntVector operator*(const IntMatrix &a, const IntVector &x);
IntMatrix operator+(const IntMatrix &a, const IntMatrix &b);
IntMatrix operator-(const IntMatrix &a, const IntMatrix &b);
IntMatrix operator-(const IntMatrix &a);
IntMatrix direct_sum(const IntMatrix &a, const IntMatrix &b);

// Bareiss fraction-free elimination.
Int determinant(const IntMatrix &m);
bool is_unimodular(const IntMatrix &m);

enum SmithWants : unsigned {
  kWantNone = 0,
  kWantU = 1,
  kWantV = 2,
  kWantUInverse = 4,
  kWantVInverse = 8,
  kWantUV = kWantU | kWantV,
  kWantAll = 15,
};

struct SmithForm {
  IntMatrix s;
  IntMatrix u;      // rows x rows, u*m*v = s
  IntMatrix v;      // cols x cols
  IntMatrix u_inv;  // filled on request
  IntMatrix v_inv;  // filled on request
  std::vector<Int> diagonal;  // min(rows, cols) entries, d_1 | d_2 | ...
  std::size_t rank = 0;
};

// Pivot rule: smallest nonzero absolute value in the active submatrix,
// ties broken by lowest row then lowest column.
SmithForm smith_normal_form(const IntMatrix &m, unsigned wants = kWantUV);

// Diagonal only; cheaper when no transforms are needed.
std::vector<Int> smith_diagonal(const IntMatrix &m);

std::optional<IntVector> solve_integer(const IntMatrix &a, const IntVector &b);
// Columnwise solve of a*x = b. Absent if any column has no integer solution.
std::optional<IntMatrix> solve_integer(const IntMatrix &a, const IntMatrix &b);
// Same, with the unknowns of a visited in the given order. Different orders
// generally return different particular solutions.
std::optional<IntMatrix> solve_integer_ordered(const IntMatrix &a, const IntMatrix &b,
                                               const std::vector<std::size_t> &column_order);

// Sublattice of Z^n with a basis read off from a Smith form.
class Lattice {
public:
  Lattice() = default;
  static Lattice generated_by(const IntMatrix &gens);
  static Lattice generated_by(std::size_t ambient, const std::vector<IntVector> &gens);
  static Lattice full(std::size_t n);
  static Lattice zero(std::size_t n);

  std::size_t ambient() const { return ambient_; }
  std::size_t rank() const { return basis_.cols(); }
  const IntMatrix &basis() const { return basis_; }
  // Nonzero Smith diagonal of the generators (the lattice's elementary divisors
  // inside Z^n); entries equal to 1 mean the basis vector is primitive.
  const std::vector<Int> &scales() const { return scale_; }

  bool contains(const IntVector &z) const;
  bool contains(const Lattice &other) const;
  bool contains_columns(const IntMatrix &zs) const;
  std::optional<IntVector> coordinates(const IntVector &z) const;
  // Throws std::domain_error when a column lies outside the lattice.
  IntMatrix coordinates(const IntMatrix &zs) const;
  bool is_full() const;
  bool operator==(const Lattice &other) const;

private:
  std::size_t ambient_ = 0;
  IntMatrix basis_;
  IntMatrix u_;
  std::vector<Int> scale_;
};

Lattice lattice_sum(const Lattice &a, const Lattice &b);
Lattice kernel(const IntMatrix &f);
Lattice image(const IntMatrix &f);
// { x : f x in target }
Lattice preimage(const IntMatrix &f, const Lattice &target);
Lattice intersect(const Lattice &a, const Lattice &b);
Lattice apply(const IntMatrix &f, const Lattice &l);

// Z^n / im(presentation); columns of the presentation are relations.
class FgAbGroup {
public:
  FgAbGroup();
  explicit FgAbGroup(IntMatrix presentation);

  static FgAbGroup free(std::size_t rank);
  // order 0 gives Z.
  static FgAbGroup cyclic(const Int &order);
  static FgAbGroup from_invariants(const std::vector<Int> &factors, std::size_t free_rank);

  const IntMatrix &presentation() const { return pres_; }
  const Lattice &relations() const { return rel_; }
  std::size_t generators() const { return pres_.rows(); }
  const std::vector<Int> &factors() const { return factors_; }
  std::size_t free_rank() const { return free_rank_; }

  bool is_trivial() const { return factors_.empty() && free_rank_ == 0; }
  bool is_free() const { return factors_.empty(); }
  bool isomorphic(const FgAbGroup &other) const;
  bool is_zero_element(const IntVector &x) const { return rel_.contains(x); }

  FgAbGroup direct_sum(const FgAbGroup &other) const;
  std::string to_string() const;

private:
  IntMatrix pres_;
  Lattice rel_;
  std::vector<Int> factors_;
  std::size_t free_rank_ = 0;
};

FgAbGroup direct_sum(const std::vector<FgAbGroup> &parts);

// f : Z^a -> Z^b viewed as a map of presented groups.
bool is_well_defined(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target);
// Throws std::invalid_argument when f does not respect the presentations.
bool is_isomorphism(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target);
bool is_zero_map(const IntMatrix &f, const FgAbGroup &target);
bool maps_equal(const IntMatrix &f, const IntMatrix &g, const FgAbGroup &target);
// Inverse of an isomorphism of presented groups, as a generator-level matrix.
IntMatrix inverse_map(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target);

// num / den with den inside num, both in Z^n. The group is presented on the
// numerator basis.
class Subquotient {
public:
  Subquotient() = default;
  Subquotient(Lattice numerator, Lattice denominator);

  const Lattice &numerator() const { return num_; }
  const Lattice &denominator() const { return den_; }
  const FgAbGroup &group() const { return group_; }
  std::size_t ambient() const { return num_.ambient(); }

  IntVector coordinates(const IntVector &z) const;
  IntMatrix coordinates(const IntMatrix &zs) const;
  // Ambient representatives of the presentation generators.
  const IntMatrix &representatives() const { return num_.basis(); }
  // Matrix of the map induced by an ambient map f, which must carry the
  // numerator into target's numerator.
  IntMatrix induced_map(const IntMatrix &f, const Subquotient &target) const;

private:
  Lattice num_;
  Lattice den_;
  FgAbGroup group_;
};

// Column-sparse matrix with 64-bit entries. Arithmetic on it is overflow
// checked; callers widen to IntMatrix when a bound is hit.
class SparseMatrix {
public:
  using Entry = std::pair<std::uint32_t, std::int64_t>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), col_(cols) {}
  static SparseMatrix from_dense(const IntMatrix &m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const;
  // Adds v to entry (i, j); entries in a column are kept sorted by row.
  void add(std::size_t i, std::size_t j, std::int64_t v);
  const std::vector<Entry> &column(std::size_t j) const { return col_[j]; }
  std::vector<Entry> &column(std::size_t j) { return col_[j]; }
  IntMatrix to_dense() const;
  bool is_zero() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<Entry>> col_;
};

SparseMatrix multiply(const SparseMatrix &a, const SparseMatrix &b);

class ChainComplex {
public:
  ChainComplex() = default;
  // ranks[k] is the number of generators in degree min_degree + k;
  // differentials[k] maps degree min_degree + k + 1 to min_degree + k.
  // relations (optional) present each chain group as a quotient of Z^rank.
  ChainComplex(int min_degree, std::vector<std::size_t> ranks,
               std::vector<SparseMatrix> differentials,
               std::vector<IntMatrix> relations = {});

  int min_degree() const { return min_; }
  int max_degree() const { return min_ + static_cast<int>(ranks_.size()) - 1; }
  std::size_t rank(int n) const;
  bool is_free() const { return free_; }
  // d_n : C_n -> C_{n-1}; zero map at either end.
  SparseMatrix differential(int n) const;
  IntMatrix relations(int n) const;
  FgAbGroup chain_group(int n) const;

private:
  int min_ = 0;
  std::vector<std::size_t> ranks_;
  std::vector<SparseMatrix> d_;
  std::vector<IntMatrix> rel_;
  bool free_ = true;
};

// ker d_n / im d_{n+1} as a subquotient of the generators of C_n.
Subquotient homology_subquotient(const ChainComplex &c, int n);
// Same group, computed after eliminating unit pivots for free complexes.
FgAbGroup homology_at(const ChainComplex &c, int n);

class GradedGroup {
public:
  void set(int degree, FgAbGroup g) { groups_[degree] = std::move(g); }
  const FgAbGroup &at(int degree) const;
  const std::map<int, FgAbGroup> &support() const { return groups_; }
  bool isomorphic(const GradedGroup &other) const;

private:
  std::map<int, FgAbGroup> groups_;
};

}  // namespace etale::zlinalg
