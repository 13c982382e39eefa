#include "etale/zlinalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace etale::zlinalg {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  a_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_)
      throw std::invalid_argument("IntMatrix: ragged initializer");
    for (long v : r)
      a_.emplace_back(v);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_columns(std::size_t rows, const std::vector<IntVector> &cols) {
  IntMatrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows)
      throw std::invalid_argument("IntMatrix::from_columns: column length mismatch");
    for (std::size_t i = 0; i < rows; ++i)
      m(i, j) = cols[j][i];
  }
  return m;
}

IntMatrix IntMatrix::column_vector(const IntVector &v) {
  IntMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i)
    m(i, 0) = v[i];
  return m;
}

bool IntMatrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](const Int &x) { return sgn(x) == 0; });
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      t(j, i) = (*this)(i, j);
  return t;
}

IntVector IntMatrix::column(std::size_t j) const {
  IntVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    v[i] = (*this)(i, j);
  return v;
}

void IntMatrix::set_column(std::size_t j, const IntVector &v) {
  if (v.size() != rows_)
    throw std::invalid_argument("IntMatrix::set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    (*this)(i, j) = v[i];
}

IntMatrix IntMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_)
    throw std::out_of_range("IntMatrix::block");
  IntMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void IntMatrix::set_block(std::size_t r0, std::size_t c0, const IntMatrix &b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
    throw std::out_of_range("IntMatrix::set_block");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      (*this)(r0 + i, c0 + j) = b(i, j);
}

IntMatrix IntMatrix::select_columns(const std::vector<std::size_t> &idx) const {
  IntMatrix m(rows_, idx.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < idx.size(); ++k)
      m(i, k) = (*this)(i, idx[k]);
  return m;
}

IntMatrix IntMatrix::select_rows(const std::vector<std::size_t> &idx) const {
  IntMatrix m(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (std::size_t j = 0; j < cols_; ++j)
      m(k, j) = (*this)(idx[k], j);
  return m;
}

IntMatrix IntMatrix::hconcat(const IntMatrix &rhs) const {
  if (rows_ != rhs.rows_)
    throw std::invalid_argument("IntMatrix::hconcat: row mismatch");
  IntMatrix m(rows_, cols_ + rhs.cols_);
  m.set_block(0, 0, *this);
  m.set_block(0, cols_, rhs);
  return m;
}

IntMatrix IntMatrix::vconcat(const IntMatrix &rhs) const {
  if (cols_ != rhs.cols_)
    throw std::invalid_argument("IntMatrix::vconcat: column mismatch");
  IntMatrix m(rows_ + rhs.rows_, cols_);
  m.set_block(0, 0, *this);
  m.set_block(rows_, 0, rhs);
  return m;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < cols_; ++j)
      os << (j ? "," : "") << (*this)(i, j).get_str();
    os << ']';
  }
  os << ']';
  return os.str();
}

IntMatrix operator*(const IntMatrix &a, const IntMatrix &b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("IntMatrix product: inner dimension mismatch");
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Int &aik = a(i, k);
      if (sgn(aik) == 0)
        continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (sgn(b(k, j)) != 0)
          mpz_addmul(c(i, j).get_mpz_t(), aik.get_mpz_t(), b(k, j).get_mpz_t());
    }
  return c;
}

IntVector operator*(const IntMatrix &a, const IntVector &x) {
  if (a.cols() != x.size())
    throw std::invalid_argument("IntMatrix-vector product: dimension mismatch");
  IntVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      if (sgn(a(i, k)) != 0 && sgn(x[k]) != 0)
        mpz_addmul(y[i].get_mpz_t(), a(i, k).get_mpz_t(), x[k].get_mpz_t());
  return y;
}

IntMatrix operator+(const IntMatrix &a, const IntMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("IntMatrix sum: shape mismatch");
  IntMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      c(i, j) = a(i, j) + b(i, j);
  return c;
}

IntMatrix operator-(const IntMatrix &a, const IntMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("IntMatrix difference: shape mismatch");
  IntMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      c(i, j) = a(i, j) - b(i, j);
  return c;
}

IntMatrix operator-(const IntMatrix &a) {
  IntMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      c(i, j) = -a(i, j);
  return c;
}

IntMatrix direct_sum(const IntMatrix &a, const IntMatrix &b) {
  IntMatrix c(a.rows() + b.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(a.rows(), a.cols(), b);
  return c;
}

Int determinant(const IntMatrix &m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("determinant: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0)
    return 1;
  IntMatrix a = m;
  Int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (sgn(a(k, k)) == 0) {
      std::size_t p = k + 1;
      while (p < n && sgn(a(p, k)) == 0)
        ++p;
      if (p == n)
        return 0;
      for (std::size_t j = 0; j < n; ++j)
        std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Int t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        a(i, j) = t;
      }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

bool is_unimodular(const IntMatrix &m) {
  if (m.rows() != m.cols())
    return false;
  Int d = determinant(m);
  return d == 1 || d == -1;
}

namespace {

// Dense working state for the Smith reduction. Row-major storage; the four
// optional transforms are updated alongside every elementary operation.
class SmithEngine {
public:
  SmithEngine(const IntMatrix &m, unsigned wants) : r_(m.rows()), c_(m.cols()), wants_(wants), a_(m) {
    if (wants & kWantU)
      u_ = IntMatrix::identity(r_);
    if (wants & kWantUInverse)
      ui_ = IntMatrix::identity(r_);
    if (wants & kWantV)
      v_ = IntMatrix::identity(c_);
    if (wants & kWantVInverse)
      vi_ = IntMatrix::identity(c_);
  }

  SmithForm run() {
    const std::size_t n = std::min(r_, c_);
    std::size_t t = 0;
    for (; t < n; ++t) {
      std::size_t pi, pj;
      if (!find_min(t, t, r_, c_, pi, pj))
        break;
      move_pivot(t, pi, pj);
      reduce_stage(t);
      if (sgn(a_(t, t)) < 0)
        negate_row(t);
    }
    SmithForm out;
    out.rank = t;
    out.diagonal.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out.diagonal[i] = a_(i, i);
    out.s = std::move(a_);
    out.u = std::move(u_);
    out.v = std::move(v_);
    out.u_inv = std::move(ui_);
    out.v_inv = std::move(vi_);
    return out;
  }

private:
  bool find_min(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1, std::size_t &pi,
                std::size_t &pj) const {
    const Int *best = nullptr;
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = c0; j < c1; ++j) {
        const Int &x = a_(i, j);
        if (sgn(x) == 0)
          continue;
        if (!best || mpz_cmpabs(x.get_mpz_t(), best->get_mpz_t()) < 0) {
          best = &x;
          pi = i;
          pj = j;
          if (mpz_cmpabs_ui(x.get_mpz_t(), 1) == 0)
            return true;
        }
      }
    return best != nullptr;
  }

  void move_pivot(std::size_t t, std::size_t pi, std::size_t pj) {
    if (pi != t)
      swap_rows(t, pi);
    if (pj != t)
      swap_cols(t, pj);
  }

  void reduce_stage(std::size_t t) {
    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < r_; ++i) {
        if (sgn(a_(i, t)) == 0)
          continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), a_(i, t).get_mpz_t(), a_(t, t).get_mpz_t());
        add_row(i, t, -q);
        if (sgn(a_(i, t)) != 0)
          clean = false;
      }
      for (std::size_t j = t + 1; j < c_; ++j) {
        if (sgn(a_(t, j)) == 0)
          continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), a_(t, j).get_mpz_t(), a_(t, t).get_mpz_t());
        add_col(j, t, -q);
        if (sgn(a_(t, j)) != 0)
          clean = false;
      }
      if (!clean) {
        // A remainder is strictly smaller than the pivot; move the smallest
        // entry of row t / column t into position.
        std::size_t pi = t, pj = t;
        const Int *best = &a_(t, t);
        for (std::size_t i = t + 1; i < r_; ++i)
          if (sgn(a_(i, t)) != 0 && mpz_cmpabs(a_(i, t).get_mpz_t(), best->get_mpz_t()) < 0) {
            best = &a_(i, t);
            pi = i;
            pj = t;
          }
        for (std::size_t j = t + 1; j < c_; ++j)
          if (sgn(a_(t, j)) != 0 && mpz_cmpabs(a_(t, j).get_mpz_t(), best->get_mpz_t()) < 0) {
            best = &a_(t, j);
            pi = t;
            pj = j;
          }
        move_pivot(t, pi, pj);
        continue;
      }
      if (mpz_cmpabs_ui(a_(t, t).get_mpz_t(), 1) == 0)
        return;
      bool fixed = false;
      for (std::size_t i = t + 1; i < r_ && !fixed; ++i)
        for (std::size_t j = t + 1; j < c_; ++j)
          if (sgn(a_(i, j)) != 0 && !mpz_divisible_p(a_(i, j).get_mpz_t(), a_(t, t).get_mpz_t())) {
            add_row(t, i, Int(1));
            fixed = true;
            break;
          }
      if (!fixed)
        return;
    }
  }

  void swap_rows(std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < c_; ++k)
      mpz_swap(a_(i, k).get_mpz_t(), a_(j, k).get_mpz_t());
    if (wants_ & kWantU)
      for (std::size_t k = 0; k < r_; ++k)
        mpz_swap(u_(i, k).get_mpz_t(), u_(j, k).get_mpz_t());
    if (wants_ & kWantUInverse)
      for (std::size_t k = 0; k < r_; ++k)
        mpz_swap(ui_(k, i).get_mpz_t(), ui_(k, j).get_mpz_t());
  }

  void swap_cols(std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < r_; ++k)
      mpz_swap(a_(k, i).get_mpz_t(), a_(k, j).get_mpz_t());
    if (wants_ & kWantV)
      for (std::size_t k = 0; k < c_; ++k)
        mpz_swap(v_(k, i).get_mpz_t(), v_(k, j).get_mpz_t());
    if (wants_ & kWantVInverse)
      for (std::size_t k = 0; k < c_; ++k)
        mpz_swap(vi_(i, k).get_mpz_t(), vi_(j, k).get_mpz_t());
  }

  // row_i += q * row_j
  void add_row(std::size_t i, std::size_t j, const Int &q) {
    if (sgn(q) == 0)
      return;
    for (std::size_t k = 0; k < c_; ++k)
      if (sgn(a_(j, k)) != 0)
        mpz_addmul(a_(i, k).get_mpz_t(), q.get_mpz_t(), a_(j, k).get_mpz_t());
    if (wants_ & kWantU)
      for (std::size_t k = 0; k < r_; ++k)
        if (sgn(u_(j, k)) != 0)
          mpz_addmul(u_(i, k).get_mpz_t(), q.get_mpz_t(), u_(j, k).get_mpz_t());
    if (wants_ & kWantUInverse)
      for (std::size_t k = 0; k < r_; ++k)
        if (sgn(ui_(k, i)) != 0)
          mpz_submul(ui_(k, j).get_mpz_t(), q.get_mpz_t(), ui_(k, i).get_mpz_t());
  }

  // col_i += q * col_j
  void add_col(std::size_t i, std::size_t j, const Int &q) {
    if (sgn(q) == 0)
      return;
    for (std::size_t k = 0; k < r_; ++k)
      if (sgn(a_(k, j)) != 0)
        mpz_addmul(a_(k, i).get_mpz_t(), q.get_mpz_t(), a_(k, j).get_mpz_t());
    if (wants_ & kWantV)
      for (std::size_t k = 0; k < c_; ++k)
        if (sgn(v_(k, j)) != 0)
          mpz_addmul(v_(k, i).get_mpz_t(), q.get_mpz_t(), v_(k, j).get_mpz_t());
    if (wants_ & kWantVInverse)
      for (std::size_t k = 0; k < c_; ++k)
        if (sgn(vi_(i, k)) != 0)
          mpz_submul(vi_(j, k).get_mpz_t(), q.get_mpz_t(), vi_(i, k).get_mpz_t());
  }

  void negate_row(std::size_t t) {
    for (std::size_t k = 0; k < c_; ++k)
      mpz_neg(a_(t, k).get_mpz_t(), a_(t, k).get_mpz_t());
    if (wants_ & kWantU)
      for (std::size_t k = 0; k < r_; ++k)
        mpz_neg(u_(t, k).get_mpz_t(), u_(t, k).get_mpz_t());
    if (wants_ & kWantUInverse)
      for (std::size_t k = 0; k < r_; ++k)
        mpz_neg(ui_(k, t).get_mpz_t(), ui_(k, t).get_mpz_t());
  }

  std::size_t r_, c_;
  unsigned wants_;
  IntMatrix a_, u_, ui_, v_, vi_;
};

}  // namespace

SmithForm smith_normal_form(const IntMatrix &m, unsigned wants) { return SmithEngine(m, wants).run(); }

std::vector<Int> smith_diagonal(const IntMatrix &m) { return SmithEngine(m, kWantNone).run().diagonal; }

std::optional<IntMatrix> solve_integer(const IntMatrix &a, const IntMatrix &b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("solve_integer: a has " + std::to_string(a.rows()) + " rows but b has " +
                                std::to_string(b.rows()));
  SmithForm f = smith_normal_form(a, kWantUV);
  IntMatrix y = f.u * b;
  IntMatrix z(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i < f.rank) {
        if (!mpz_divisible_p(y(i, j).get_mpz_t(), f.diagonal[i].get_mpz_t()))
          return std::nullopt;
        mpz_divexact(z(i, j).get_mpz_t(), y(i, j).get_mpz_t(), f.diagonal[i].get_mpz_t());
      } else if (sgn(y(i, j)) != 0) {
        return std::nullopt;
      }
    }
  }
  return f.v * z;
}

std::optional<IntVector> solve_integer(const IntMatrix &a, const IntVector &b) {
  auto x = solve_integer(a, IntMatrix::column_vector(b));
  if (!x)
    return std::nullopt;
  return x->column(0);
}

std::optional<IntMatrix> solve_integer_ordered(const IntMatrix &a, const IntMatrix &b,
                                               const std::vector<std::size_t> &column_order) {
  if (column_order.size() != a.cols())
    throw std::invalid_argument("solve_integer_ordered: order length mismatch");
  auto xp = solve_integer(a.select_columns(column_order), b);
  if (!xp)
    return std::nullopt;
  IntMatrix x(a.cols(), b.cols());
  for (std::size_t k = 0; k < column_order.size(); ++k)
    for (std::size_t j = 0; j < b.cols(); ++j)
      x(column_order[k], j) = (*xp)(k, j);
  return x;
}

// ---------------------------------------------------------------- Lattice

Lattice Lattice::generated_by(const IntMatrix &gens) {
  Lattice l;
  l.ambient_ = gens.rows();
  SmithForm f = smith_normal_form(gens, kWantU | kWantUInverse);
  l.basis_ = IntMatrix(l.ambient_, f.rank);
  for (std::size_t k = 0; k < f.rank; ++k)
    for (std::size_t i = 0; i < l.ambient_; ++i)
      l.basis_(i, k) = f.u_inv(i, k) * f.diagonal[k];
  l.scale_.assign(f.diagonal.begin(), f.diagonal.begin() + static_cast<std::ptrdiff_t>(f.rank));
  l.u_ = std::move(f.u);
  return l;
}

Lattice Lattice::generated_by(std::size_t ambient, const std::vector<IntVector> &gens) {
  return generated_by(IntMatrix::from_columns(ambient, gens));
}

Lattice Lattice::full(std::size_t n) {
  Lattice l;
  l.ambient_ = n;
  l.basis_ = IntMatrix::identity(n);
  l.u_ = IntMatrix::identity(n);
  l.scale_.assign(n, Int(1));
  return l;
}

Lattice Lattice::zero(std::size_t n) {
  Lattice l;
  l.ambient_ = n;
  l.basis_ = IntMatrix(n, 0);
  l.u_ = IntMatrix::identity(n);
  return l;
}

std::optional<IntVector> Lattice::coordinates(const IntVector &z) const {
  if (z.size() != ambient_)
    throw std::invalid_argument("Lattice::coordinates: ambient mismatch");
  IntVector y = u_ * z;
  IntVector c(rank());
  for (std::size_t i = 0; i < ambient_; ++i) {
    if (i < rank()) {
      if (!mpz_divisible_p(y[i].get_mpz_t(), scale_[i].get_mpz_t()))
        return std::nullopt;
      mpz_divexact(c[i].get_mpz_t(), y[i].get_mpz_t(), scale_[i].get_mpz_t());
    } else if (sgn(y[i]) != 0) {
      return std::nullopt;
    }
  }
  return c;
}

IntMatrix Lattice::coordinates(const IntMatrix &zs) const {
  if (zs.rows() != ambient_)
    throw std::invalid_argument("Lattice::coordinates: ambient mismatch");
  IntMatrix y = u_ * zs;
  IntMatrix c(rank(), zs.cols());
  for (std::size_t j = 0; j < zs.cols(); ++j)
    for (std::size_t i = 0; i < ambient_; ++i) {
      if (i < rank()) {
        if (!mpz_divisible_p(y(i, j).get_mpz_t(), scale_[i].get_mpz_t()))
          throw std::domain_error("Lattice::coordinates: vector outside lattice");
        mpz_divexact(c(i, j).get_mpz_t(), y(i, j).get_mpz_t(), scale_[i].get_mpz_t());
      } else if (sgn(y(i, j)) != 0) {
        throw std::domain_error("Lattice::coordinates: vector outside lattice");
      }
    }
  return c;
}

bool Lattice::contains(const IntVector &z) const { return coordinates(z).has_value(); }

bool Lattice::contains_columns(const IntMatrix &zs) const {
  if (zs.rows() != ambient_)
    throw std::invalid_argument("Lattice::contains_columns: ambient mismatch");
  IntMatrix y = u_ * zs;
  for (std::size_t j = 0; j < zs.cols(); ++j)
    for (std::size_t i = 0; i < ambient_; ++i) {
      if (i < rank()) {
        if (!mpz_divisible_p(y(i, j).get_mpz_t(), scale_[i].get_mpz_t()))
          return false;
      } else if (sgn(y(i, j)) != 0) {
        return false;
      }
    }
  return true;
}

bool Lattice::contains(const Lattice &other) const { return contains_columns(other.basis()); }

bool Lattice::is_full() const {
  return rank() == ambient_ && std::all_of(scale_.begin(), scale_.end(), [](const Int &s) { return s == 1; });
}

bool Lattice::operator==(const Lattice &other) const {
  return ambient_ == other.ambient_ && rank() == other.rank() && contains(other) && other.contains(*this);
}

Lattice lattice_sum(const Lattice &a, const Lattice &b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("lattice_sum: ambient mismatch");
  return Lattice::generated_by(a.basis().hconcat(b.basis()));
}

namespace {
IntMatrix kernel_basis(const IntMatrix &f) {
  SmithForm s = smith_normal_form(f, kWantV);
  std::vector<std::size_t> idx;
  for (std::size_t j = s.rank; j < f.cols(); ++j)
    idx.push_back(j);
  return s.v.select_columns(idx);
}
}  // namespace

Lattice kernel(const IntMatrix &f) {
  // Columns of V beyond the rank already form a basis of a saturated lattice.
  IntMatrix k = kernel_basis(f);
  if (k.cols() == 0)
    return Lattice::zero(f.cols());
  return Lattice::generated_by(k);
}

Lattice image(const IntMatrix &f) { return Lattice::generated_by(f); }

Lattice preimage(const IntMatrix &f, const Lattice &target) {
  if (f.rows() != target.ambient())
    throw std::invalid_argument("preimage: ambient mismatch");
  if (target.is_full())
    return Lattice::full(f.cols());
  IntMatrix m = f.hconcat(-target.basis());
  IntMatrix k = kernel_basis(m);
  return Lattice::generated_by(k.block(0, 0, f.cols(), k.cols()));
}

Lattice intersect(const Lattice &a, const Lattice &b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("intersect: ambient mismatch");
  IntMatrix m = a.basis().hconcat(-b.basis());
  IntMatrix k = kernel_basis(m);
  return Lattice::generated_by(a.basis() * k.block(0, 0, a.rank(), k.cols()));
}

Lattice apply(const IntMatrix &f, const Lattice &l) { return Lattice::generated_by(f * l.basis()); }

// ---------------------------------------------------------------- FgAbGroup

FgAbGroup::FgAbGroup() : pres_(0, 0), rel_(Lattice::zero(0)) {}

FgAbGroup::FgAbGroup(IntMatrix presentation) : pres_(std::move(presentation)) {
  rel_ = Lattice::generated_by(pres_);
  for (const Int &s : rel_.scales())
    if (s != 1)
      factors_.push_back(s);
  free_rank_ = pres_.rows() - rel_.rank();
}

FgAbGroup FgAbGroup::free(std::size_t rank) { return FgAbGroup(IntMatrix(rank, 0)); }

FgAbGroup FgAbGroup::cyclic(const Int &order) {
  if (order == 0)
    return free(1);
  IntMatrix p(1, 1);
  p(0, 0) = abs(order);
  return FgAbGroup(p);
}

FgAbGroup FgAbGroup::from_invariants(const std::vector<Int> &factors, std::size_t free_rank) {
  IntMatrix p(factors.size() + free_rank, factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i)
    p(i, i) = factors[i];
  return FgAbGroup(p);
}

bool FgAbGroup::isomorphic(const FgAbGroup &other) const {
  return free_rank_ == other.free_rank_ && factors_ == other.factors_;
}

FgAbGroup FgAbGroup::direct_sum(const FgAbGroup &other) const {
  return FgAbGroup(zlinalg::direct_sum(pres_, other.pres_));
}

std::string FgAbGroup::to_string() const {
  if (is_trivial())
    return "0";
  std::string s;
  if (free_rank_ > 0)
    s = free_rank_ == 1 ? "Z" : "Z^" + std::to_string(free_rank_);
  for (const Int &d : factors_) {
    if (!s.empty())
      s += " + ";
    s += "Z/" + d.get_str();
  }
  return s;
}

FgAbGroup direct_sum(const std::vector<FgAbGroup> &parts) {
  std::size_t r = 0, c = 0;
  for (const auto &p : parts) {
    r += p.presentation().rows();
    c += p.presentation().cols();
  }
  IntMatrix m(r, c);
  r = c = 0;
  for (const auto &p : parts) {
    m.set_block(r, c, p.presentation());
    r += p.presentation().rows();
    c += p.presentation().cols();
  }
  return FgAbGroup(m);
}

namespace {
void check_shape(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target) {
  if (f.rows() != target.generators() || f.cols() != source.generators())
    throw std::invalid_argument("map shape " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                                " does not match groups with " + std::to_string(source.generators()) + " and " +
                                std::to_string(target.generators()) + " generators");
}
}  // namespace

bool is_well_defined(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target) {
  check_shape(f, source, target);
  return target.relations().contains_columns(f * source.presentation());
}

bool is_isomorphism(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target) {
  if (!is_well_defined(f, source, target))
    throw std::invalid_argument("is_isomorphism: map does not carry relations into relations");
  if (!Lattice::generated_by(f.hconcat(target.presentation())).is_full())
    return false;
  return source.relations().contains(preimage(f, target.relations()));
}

bool is_zero_map(const IntMatrix &f, const FgAbGroup &target) {
  if (f.rows() != target.generators())
    throw std::invalid_argument("is_zero_map: shape mismatch");
  return target.relations().contains_columns(f);
}

bool maps_equal(const IntMatrix &f, const IntMatrix &g, const FgAbGroup &target) {
  return is_zero_map(f - g, target);
}

IntMatrix inverse_map(const IntMatrix &f, const FgAbGroup &source, const FgAbGroup &target) {
  if (!is_isomorphism(f, source, target))
    throw std::invalid_argument("inverse_map: map is not an isomorphism");
  IntMatrix a = f.hconcat(target.presentation());
  auto x = solve_integer(a, IntMatrix::identity(target.generators()));
  if (!x)
    throw std::logic_error("inverse_map: surjectivity certificate failed");
  return x->block(0, 0, f.cols(), target.generators());
}

// ---------------------------------------------------------------- Subquotient

Subquotient::Subquotient(Lattice numerator, Lattice denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (num_.ambient() != den_.ambient())
    throw std::invalid_argument("Subquotient: ambient mismatch");
  if (!num_.contains(den_))
    throw std::invalid_argument("Subquotient: denominator not contained in numerator");
  group_ = FgAbGroup(num_.coordinates(den_.basis()));
}

IntVector Subquotient::coordinates(const IntVector &z) const {
  auto c = num_.coordinates(z);
  if (!c)
    throw std::domain_error("Subquotient::coordinates: vector outside numerator");
  return *c;
}

IntMatrix Subquotient::coordinates(const IntMatrix &zs) const { return num_.coordinates(zs); }

IntMatrix Subquotient::induced_map(const IntMatrix &f, const Subquotient &target) const {
  return target.coordinates(f * num_.basis());
}

// ---------------------------------------------------------------- SparseMatrix

namespace {
std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("sparse entry overflow");
  return r;
}
std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("sparse entry overflow");
  return r;
}
}  // namespace

SparseMatrix SparseMatrix::from_dense(const IntMatrix &m) {
  SparseMatrix s(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const Int &x = m(i, j);
      if (sgn(x) == 0)
        continue;
      if (!x.fits_slong_p())
        throw std::overflow_error("SparseMatrix::from_dense: entry exceeds 64-bit range");
      s.col_[j].emplace_back(static_cast<std::uint32_t>(i), x.get_si());
    }
  return s;
}

std::size_t SparseMatrix::nonzeros() const {
  std::size_t n = 0;
  for (const auto &c : col_)
    n += c.size();
  return n;
}

void SparseMatrix::add(std::size_t i, std::size_t j, std::int64_t v) {
  if (i >= rows_ || j >= cols_)
    throw std::out_of_range("SparseMatrix::add");
  if (v == 0)
    return;
  auto &c = col_[j];
  auto it = std::lower_bound(c.begin(), c.end(), static_cast<std::uint32_t>(i),
                             [](const Entry &e, std::uint32_t r) { return e.first < r; });
  if (it != c.end() && it->first == i) {
    it->second = checked_add(it->second, v);
    if (it->second == 0)
      c.erase(it);
  } else {
    c.insert(it, Entry(static_cast<std::uint32_t>(i), v));
  }
}

IntMatrix SparseMatrix::to_dense() const {
  IntMatrix m(rows_, cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (const auto &[i, v] : col_[j])
      m(i, j) = static_cast<long>(v);
  return m;
}

bool SparseMatrix::is_zero() const {
  return std::all_of(col_.begin(), col_.end(), [](const auto &c) { return c.empty(); });
}

SparseMatrix multiply(const SparseMatrix &a, const SparseMatrix &b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("sparse product: inner dimension mismatch");
  SparseMatrix c(a.rows(), b.cols());
  std::vector<std::int64_t> acc(a.rows(), 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    touched.clear();
    for (const auto &[k, v] : b.column(j))
      for (const auto &[i, w] : a.column(k)) {
        if (acc[i] == 0)
          touched.push_back(i);
        acc[i] = checked_add(acc[i], checked_mul(w, v));
      }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    auto &col = c.column(j);
    for (auto i : touched) {
      if (acc[i] != 0)
        col.emplace_back(i, acc[i]);
      acc[i] = 0;
    }
  }
  return c;
}

// ---------------------------------------------------------------- ChainComplex

ChainComplex::ChainComplex(int min_degree, std::vector<std::size_t> ranks, std::vector<SparseMatrix> differentials,
                           std::vector<IntMatrix> relations)
    : min_(min_degree), ranks_(std::move(ranks)), d_(std::move(differentials)), rel_(std::move(relations)) {
  if (ranks_.empty())
    throw std::invalid_argument("ChainComplex: at least one degree required");
  if (d_.size() + 1 != ranks_.size())
    throw std::invalid_argument("ChainComplex: expected " + std::to_string(ranks_.size() - 1) + " differentials");
  for (std::size_t k = 0; k < d_.size(); ++k)
    if (d_[k].rows() != ranks_[k] || d_[k].cols() != ranks_[k + 1])
      throw std::invalid_argument("ChainComplex: differential into degree " + std::to_string(min_ + int(k)) +
                                  " has the wrong shape");
  if (rel_.empty()) {
    for (std::size_t r : ranks_)
      rel_.emplace_back(r, 0);
  }
  if (rel_.size() != ranks_.size())
    throw std::invalid_argument("ChainComplex: relation count mismatch");
  for (std::size_t k = 0; k < rel_.size(); ++k) {
    if (rel_[k].rows() != ranks_[k])
      throw std::invalid_argument("ChainComplex: relation matrix has the wrong height");
    if (rel_[k].cols() > 0)
      free_ = false;
  }
  for (std::size_t k = 0; k + 1 < d_.size(); ++k) {
    SparseMatrix dd = multiply(d_[k], d_[k + 1]);
    if (free_) {
      if (!dd.is_zero())
        throw std::invalid_argument("ChainComplex: d o d is nonzero at degree " + std::to_string(min_ + int(k) + 2));
    } else if (!dd.is_zero()) {
      if (!Lattice::generated_by(rel_[k]).contains_columns(dd.to_dense()))
        throw std::invalid_argument("ChainComplex: d o d is nonzero at degree " + std::to_string(min_ + int(k) + 2));
    }
  }
  if (!free_)
    for (std::size_t k = 0; k < d_.size(); ++k)
      if (rel_[k + 1].cols() > 0 &&
          !Lattice::generated_by(rel_[k]).contains_columns(d_[k].to_dense() * rel_[k + 1]))
        throw std::invalid_argument("ChainComplex: differential does not respect relations at degree " +
                                    std::to_string(min_ + int(k) + 1));
}

std::size_t ChainComplex::rank(int n) const {
  if (n < min_ || n > max_degree())
    return 0;
  return ranks_[static_cast<std::size_t>(n - min_)];
}

SparseMatrix ChainComplex::differential(int n) const {
  if (n > min_ && n <= max_degree())
    return d_[static_cast<std::size_t>(n - min_ - 1)];
  return SparseMatrix(rank(n - 1), rank(n));
}

IntMatrix ChainComplex::relations(int n) const {
  if (n < min_ || n > max_degree())
    return IntMatrix(0, 0);
  return rel_[static_cast<std::size_t>(n - min_)];
}

FgAbGroup ChainComplex::chain_group(int n) const {
  if (n < min_ || n > max_degree())
    return FgAbGroup();
  return FgAbGroup(rel_[static_cast<std::size_t>(n - min_)]);
}

Subquotient homology_subquotient(const ChainComplex &c, int n) {
  if (n < c.min_degree() || n > c.max_degree())
    throw std::out_of_range("homology_at: degree " + std::to_string(n) + " outside [" +
                            std::to_string(c.min_degree()) + ", " + std::to_string(c.max_degree()) + "]");
  IntMatrix dn = c.differential(n).to_dense();
  IntMatrix dn1 = c.differential(n + 1).to_dense();
  if (c.is_free())
    return Subquotient(kernel(dn), image(dn1));
  IntMatrix below = c.relations(n - 1);
  Lattice cycles = below.rows() == 0 ? Lattice::full(c.rank(n)) : preimage(dn, Lattice::generated_by(below));
  Lattice bounds = Lattice::generated_by(dn1.hconcat(c.relations(n)));
  return Subquotient(cycles, bounds);
}

namespace {

// Eliminates unit pivots from the piece C_{n+1} -> C_n -> C_{n-1} of a free
// complex. Removing a pair (a, b) with d(b)_a = +-1 leaves homology unchanged.
class UnitPivotReducer {
public:
  UnitPivotReducer(const SparseMatrix &upper, const SparseMatrix &lower)
      : up_(upper), low_(lower), alive_top_(upper.cols(), 1), alive_mid_(lower.cols(), 1),
        alive_bot_(lower.rows(), 1) {}

  FgAbGroup run() {
    // Pivots in d_n remove a middle generator, i.e. a row of d_{n+1}; pivots
    // in d_{n+1} remove a middle generator, i.e. a column of d_n.
    eliminate(low_, alive_mid_, alive_bot_);
    eliminate(up_, alive_top_, alive_mid_);
    std::vector<std::size_t> mid, bot, top;
    for (std::size_t i = 0; i < alive_mid_.size(); ++i)
      if (alive_mid_[i])
        mid.push_back(i);
    for (std::size_t i = 0; i < alive_bot_.size(); ++i)
      if (alive_bot_[i])
        bot.push_back(i);
    for (std::size_t j = 0; j < alive_top_.size(); ++j)
      if (alive_top_[j] && has_live_entry(up_.column(j), alive_mid_))
        top.push_back(j);
    IntMatrix dl = restrict(low_, bot, mid);
    IntMatrix du = restrict(up_, mid, top);
    return Subquotient(kernel(dl), image(du)).group();
  }

private:
  static bool has_live_entry(const std::vector<SparseMatrix::Entry> &col, const std::vector<char> &rows) {
    for (const auto &e : col)
      if (rows[e.first])
        return true;
    return false;
  }

  static IntMatrix restrict(const SparseMatrix &m, const std::vector<std::size_t> &rows,
                            const std::vector<std::size_t> &cols) {
    std::vector<std::int64_t> pos(m.rows(), -1);
    for (std::size_t k = 0; k < rows.size(); ++k)
      pos[rows[k]] = static_cast<std::int64_t>(k);
    IntMatrix d(rows.size(), cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k)
      for (const auto &[i, v] : m.column(cols[k]))
        if (pos[i] >= 0)
          d(static_cast<std::size_t>(pos[i]), k) = static_cast<long>(v);
    return d;
  }

  // Gaussian elimination of unit pivots in m; alive_* track live basis elements.
  static void eliminate(SparseMatrix &m, std::vector<char> &alive_cols, std::vector<char> &alive_rows) {
    std::vector<std::vector<std::uint32_t>> row_cols(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (const auto &e : m.column(j))
        row_cols[e.first].push_back(static_cast<std::uint32_t>(j));
    for (std::size_t b = 0; b < m.cols(); ++b) {
      if (!alive_cols[b])
        continue;
      auto &col = m.column(b);
      prune(col, alive_rows);
      // Choose the unit entry whose row is shared by the fewest columns.
      std::int64_t best_row = -1;
      std::size_t best_count = 0;
      std::int64_t eps = 0;
      for (const auto &[i, v] : col)
        if (v == 1 || v == -1) {
          std::size_t cnt = row_cols[i].size();
          if (best_row < 0 || cnt < best_count) {
            best_row = i;
            best_count = cnt;
            eps = v;
          }
        }
      if (best_row < 0)
        continue;
      const auto a = static_cast<std::uint32_t>(best_row);
      const std::vector<SparseMatrix::Entry> pivot_col = col;
      for (std::uint32_t y : row_cols[a]) {
        if (y == b || !alive_cols[y])
          continue;
        auto &cy = m.column(y);
        std::int64_t coef = entry(cy, a);
        if (coef == 0)
          continue;
        std::int64_t factor = checked_mul(coef, eps);
        axpy(cy, pivot_col, -factor, row_cols, y);
      }
      alive_cols[b] = 0;
      alive_rows[a] = 0;
      col.clear();
      row_cols[a].clear();
    }
  }

  static void prune(std::vector<SparseMatrix::Entry> &col, const std::vector<char> &alive_rows) {
    col.erase(std::remove_if(col.begin(), col.end(), [&](const auto &e) { return !alive_rows[e.first]; }),
              col.end());
  }

  static std::int64_t entry(const std::vector<SparseMatrix::Entry> &col, std::uint32_t i) {
    auto it = std::lower_bound(col.begin(), col.end(), i, [](const auto &e, std::uint32_t r) { return e.first < r; });
    return it != col.end() && it->first == i ? it->second : 0;
  }

  // y += f * x, both sorted by row; newly created rows are indexed.
  static void axpy(std::vector<SparseMatrix::Entry> &y, const std::vector<SparseMatrix::Entry> &x, std::int64_t f,
                   std::vector<std::vector<std::uint32_t>> &row_cols, std::uint32_t ycol) {
    std::vector<SparseMatrix::Entry> out;
    out.reserve(y.size() + x.size());
    std::size_t p = 0, q = 0;
    while (p < y.size() || q < x.size()) {
      if (q == x.size() || (p < y.size() && y[p].first < x[q].first)) {
        out.push_back(y[p++]);
      } else if (p == y.size() || x[q].first < y[p].first) {
        out.emplace_back(x[q].first, checked_mul(f, x[q].second));
        row_cols[x[q].first].push_back(ycol);
        ++q;
      } else {
        std::int64_t v = checked_add(y[p].second, checked_mul(f, x[q].second));
        if (v != 0)
          out.emplace_back(y[p].first, v);
        ++p;
        ++q;
      }
    }
    y.swap(out);
  }

  SparseMatrix up_, low_;
  std::vector<char> alive_top_, alive_mid_, alive_bot_;
};

}  // namespace

FgAbGroup homology_at(const ChainComplex &c, int n) {
  if (n < c.min_degree() || n > c.max_degree())
    throw std::out_of_range("homology_at: degree " + std::to_string(n) + " outside [" +
                            std::to_string(c.min_degree()) + ", " + std::to_string(c.max_degree()) + "]");
  if (c.is_free()) {
    try {
      return UnitPivotReducer(c.differential(n + 1), c.differential(n)).run();
    } catch (const std::overflow_error &) {
      // fall through to the arbitrary-precision path
    }
  }
  return homology_subquotient(c, n).group();
}

const FgAbGroup &GradedGroup::at(int degree) const {
  static const FgAbGroup zero;
  auto it = groups_.find(degree);
  return it == groups_.end() ? zero : it->second;
}

bool GradedGroup::isomorphic(const GradedGroup &other) const {
  for (const auto &[d, g] : groups_)
    if (!g.isomorphic(other.at(d)))
      return false;
  for (const auto &[d, g] : other.groups_)
    if (!g.isomorphic(at(d)))
      return false;
  return true;
}

}  // namespace etale::zlinalg
