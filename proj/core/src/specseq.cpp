#include "etale/specseq.hpp"

#include <algorithm>
#include <charconv>
#include <utility>

namespace etale::specseq {

using zlinalg::ChainComplex;
using zlinalg::SparseMatrix;

// ---------------------------------------------------------------- windows

std::string Bidegree::to_string() const { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

bool Window::contains(const Window &w) const {
  return w.pmin >= pmin && w.pmax <= pmax && w.qmin >= qmin && w.qmax <= qmax;
}

std::vector<Bidegree> Window::bidegrees() const {
  std::vector<Bidegree> out;
  for (int p = pmin; p <= pmax; ++p)
    for (int q = qmin; q <= qmax; ++q)
      out.push_back({p, q});
  return out;
}

std::string Window::to_string() const {
  return std::to_string(pmin) + ":" + std::to_string(pmax) + "," + std::to_string(qmin) + ":" + std::to_string(qmax);
}

Window Window::parse(const std::string &text) {
  int v[4];
  const char *cur = text.data();
  const char *end = text.data() + text.size();
  const char seps[3] = {':', ',', ':'};
  for (int k = 0; k < 4; ++k) {
    auto [ptr, ec] = std::from_chars(cur, end, v[k]);
    if (ec != std::errc() || (k < 3 && (ptr == end || *ptr != seps[k])) || (k == 3 && ptr != end))
      throw std::invalid_argument("window: expected pmin:pmax,qmin:qmax, got '" + text + "'");
    cur = ptr + (k < 3 ? 1 : 0);
  }
  Window w{v[0], v[1], v[2], v[3]};
  if (w.pmin > w.pmax || w.qmin > w.qmax)
    throw std::invalid_argument("window: empty range in '" + text + "'");
  return w;
}

Window hull(const Window &a, const Window &b) {
  return {std::min(a.pmin, b.pmin), std::max(a.pmax, b.pmax), std::min(a.qmin, b.qmin), std::max(a.qmax, b.qmax)};
}

// ---------------------------------------------------------------- couples

ExactCouple::ExactCouple(Window data, Window support) : data_(data), support_(support), zero_(FgAbGroup::free(0)) {
  if (!data_.contains(support_))
    throw std::invalid_argument("exact couple: support " + support_.to_string() + " not inside data window " +
                                data_.to_string());
}

void ExactCouple::require_data(Bidegree b, const char *what) const {
  if (!data_.contains(b))
    throw MarginError(std::string("exact couple: ") + what + " at " + b.to_string() + " outside data window " +
                      data_.to_string());
}

void ExactCouple::set_C(Bidegree b, FgAbGroup g) {
  if (!support_.contains(b)) {
    if (g.generators() == 0)
      return;
    throw std::invalid_argument("exact couple: C" + b.to_string() + " outside support");
  }
  c_[b] = std::move(g);
}

void ExactCouple::set_D(Bidegree b, FgAbGroup g) {
  require_data(b, "D");
  d_[b] = std::move(g);
}

namespace {
void check_map_shape(const IntMatrix &m, const FgAbGroup &src, const FgAbGroup &dst, const std::string &what) {
  if (m.rows() != dst.generators() || m.cols() != src.generators())
    throw std::invalid_argument("exact couple: " + what + " has the wrong shape");
}
}  // namespace

void ExactCouple::set_i(Bidegree b, IntMatrix m) {
  check_map_shape(m, D(b), D({b.p + 1, b.q - 1}), "i" + b.to_string());
  i_[b] = std::move(m);
}

void ExactCouple::set_j(Bidegree b, IntMatrix m) {
  check_map_shape(m, D(b), C(b), "j" + b.to_string());
  j_[b] = std::move(m);
}

void ExactCouple::set_k(Bidegree b, IntMatrix m) {
  check_map_shape(m, C(b), D({b.p - 1, b.q}), "k" + b.to_string());
  k_[b] = std::move(m);
}

const FgAbGroup &ExactCouple::C(Bidegree b) const {
  if (!support_.contains(b))
    return zero_;
  auto it = c_.find(b);
  return it == c_.end() ? zero_ : it->second;
}

const FgAbGroup &ExactCouple::D(Bidegree b) const {
  require_data(b, "D");
  auto it = d_.find(b);
  return it == d_.end() ? zero_ : it->second;
}

namespace {
IntMatrix stored_or_zero(const std::map<Bidegree, IntMatrix> &maps, Bidegree b, std::size_t rows, std::size_t cols) {
  auto it = maps.find(b);
  return it == maps.end() ? IntMatrix(rows, cols) : it->second;
}
}  // namespace

IntMatrix ExactCouple::i(Bidegree b) const {
  const Bidegree t{b.p + 1, b.q - 1};
  return stored_or_zero(i_, b, D(t).generators(), D(b).generators());
}

IntMatrix ExactCouple::j(Bidegree b) const { return stored_or_zero(j_, b, C(b).generators(), D(b).generators()); }

IntMatrix ExactCouple::k(Bidegree b) const {
  const Bidegree t{b.p - 1, b.q};
  require_data(b, "C");
  return stored_or_zero(k_, b, D(t).generators(), C(b).generators());
}

namespace {

// im(in) + relations == ker(out) at a node with presentation g.
bool exact_at(const IntMatrix &in, const IntMatrix &out, const FgAbGroup &g, const FgAbGroup &next) {
  const Lattice im = zlinalg::lattice_sum(zlinalg::image(in), g.relations());
  const Lattice ker = zlinalg::preimage(out, next.relations());
  return im == ker;
}

}  // namespace

ExactnessReport check_exactness(const ExactCouple &ec) {
  ExactnessReport rep;
  const Window &w = ec.data_window();
  auto fail = [&](const std::string &m) {
    rep.exact = false;
    rep.failures.push_back(m);
  };
  for (const Bidegree b : w.bidegrees()) {
    const Bidegree up{b.p + 1, b.q - 1}, down{b.p - 1, b.q + 1}, left{b.p - 1, b.q}, right{b.p + 1, b.q};
    if (w.contains(up) && !zlinalg::is_well_defined(ec.i(b), ec.D(b), ec.D(up)))
      fail("i" + b.to_string() + " not well defined");
    if (!zlinalg::is_well_defined(ec.j(b), ec.D(b), ec.C(b)))
      fail("j" + b.to_string() + " not well defined");
    if (w.contains(left) && !zlinalg::is_well_defined(ec.k(b), ec.C(b), ec.D(left)))
      fail("k" + b.to_string() + " not well defined");
    if (!rep.exact)
      continue;
    if (w.contains(down) && !exact_at(ec.i(down), ec.j(b), ec.D(b), ec.C(b)))
      fail("not exact at D" + b.to_string() + " (im i, ker j)");
    if (w.contains(left) && !exact_at(ec.j(b), ec.k(b), ec.C(b), ec.D(left)))
      fail("not exact at C" + b.to_string());
    if (w.contains(right) && w.contains(up) && !exact_at(ec.k(right), ec.i(b), ec.D(b), ec.D(up)))
      fail("not exact at D" + b.to_string() + " (im k, ker i)");
  }
  return rep;
}

// ---------------------------------------------------------------- filtered complexes

int FilteredComplex::max_level() const {
  int top = 0;
  for (const auto &row : level)
    for (int l : row)
      top = std::max(top, l);
  return top;
}

void validate_filtration(const FilteredComplex &fc) {
  const auto &c = fc.complex;
  if (!c.is_free())
    throw std::invalid_argument("filtered complex: chain groups must be free");
  const int lo = c.min_degree(), hi = c.max_degree();
  if (fc.level.size() != static_cast<std::size_t>(hi - lo + 1))
    throw std::invalid_argument("filtered complex: one level list per degree required");
  for (int n = lo; n <= hi; ++n) {
    const auto &lv = fc.level[static_cast<std::size_t>(n - lo)];
    if (lv.size() != c.rank(n))
      throw std::invalid_argument("filtered complex: degree " + std::to_string(n) + " has " +
                                  std::to_string(lv.size()) + " levels for " + std::to_string(c.rank(n)) +
                                  " generators");
    for (int l : lv)
      if (l < 0)
        throw std::invalid_argument("filtered complex: negative level in degree " + std::to_string(n));
  }
  for (int n = lo + 1; n <= hi; ++n) {
    const auto d = c.differential(n);
    const auto &src = fc.level[static_cast<std::size_t>(n - lo)];
    const auto &dst = fc.level[static_cast<std::size_t>(n - 1 - lo)];
    for (std::size_t j = 0; j < d.cols(); ++j)
      for (const auto &[i, v] : d.column(j))
        if (v != 0 && dst[i] > src[j])
          throw std::invalid_argument("filtration not by subcomplexes: d_" + std::to_string(n) + " sends generator " +
                                      std::to_string(j) + " of level " + std::to_string(src[j]) +
                                      " onto level " + std::to_string(dst[i]));
  }
}

namespace {

Lattice embed(const Lattice &l, const std::vector<std::size_t> &idx, std::size_t ambient) {
  IntMatrix b(ambient, l.rank());
  for (std::size_t k = 0; k < l.rank(); ++k)
    for (std::size_t i = 0; i < idx.size(); ++i)
      b(idx[i], k) = l.basis()(i, k);
  return Lattice::generated_by(b);
}

Lattice coordinate_lattice(const std::vector<std::size_t> &idx, std::size_t ambient) {
  IntMatrix b(ambient, idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k)
    b(idx[k], k) = 1;
  return Lattice::generated_by(b);
}

Subquotient zero_subquotient(std::size_t ambient) { return Subquotient(Lattice::zero(ambient), Lattice::zero(ambient)); }

// Homology of filtration stages and of graded pieces, as subquotients of the
// chain groups. Results are cached and deterministic, so two instances on the
// same complex give identical presentations.
class FilteredHomology {
public:
  explicit FilteredHomology(const FilteredComplex &fc) : fc_(fc) {
    validate_filtration(fc);
    lo_ = fc.complex.min_degree();
    hi_ = fc.complex.max_degree();
    top_ = fc.max_level();
    for (int n = lo_; n <= hi_ + 1; ++n) {
      if (n == lo_)
        d_.emplace_back(0, rank(n));
      else if (n == hi_ + 1)
        d_.emplace_back(rank(hi_), 0);
      else
        d_.push_back(fc.complex.differential(n).to_dense());
    }
  }

  int min_degree() const { return lo_; }
  int max_degree() const { return hi_; }
  int top_level() const { return top_; }
  std::size_t rank(int n) const { return (n < lo_ || n > hi_) ? 0 : fc_.complex.rank(n); }
  // d_n : C_n -> C_{n-1}, for lo <= n <= hi + 1.
  const IntMatrix &d(int n) const { return d_[static_cast<std::size_t>(n - lo_)]; }

  std::vector<std::size_t> stage(int p, int n) const {
    std::vector<std::size_t> idx;
    if (n < lo_ || n > hi_)
      return idx;
    const auto &lv = fc_.level[static_cast<std::size_t>(n - lo_)];
    for (std::size_t i = 0; i < lv.size(); ++i)
      if (lv[i] <= p)
        idx.push_back(i);
    return idx;
  }

  // H_n(F_p).
  const Subquotient &absolute(int p, int n) {
    if (n < lo_ || n > hi_ || p < 0)
      p = -1;
    p = std::min(p, top_);
    const auto key = std::make_pair(p, n);
    auto it = abs_.find(key);
    if (it != abs_.end())
      return it->second;
    if (p < 0)
      return abs_.emplace(key, zero_subquotient(rank(n))).first->second;
    const auto idx = stage(p, n), above = stage(p, n + 1);
    const Lattice num = embed(zlinalg::kernel(d(n).select_columns(idx)), idx, rank(n));
    const Lattice den = zlinalg::image(d(n + 1).select_columns(above));
    return abs_.emplace(key, Subquotient(num, den)).first->second;
  }

  // H_n(F_p / F_{p-1}); zero on zero generators outside the levels.
  const Subquotient &relative(int p, int n) {
    if (n < lo_ || n > hi_ || p < 0 || p > top_) {
      p = -1;
      n = lo_ - 1;
    }
    const auto key = std::make_pair(p, n);
    auto it = rel_.find(key);
    if (it != rel_.end())
      return it->second;
    if (p < 0)
      return rel_.emplace(key, zero_subquotient(0)).first->second;
    const auto idx = stage(p, n), above = stage(p, n + 1);
    const Lattice below = coordinate_lattice(stage(p - 1, n - 1), rank(n - 1));
    const Lattice num = embed(zlinalg::preimage(d(n).select_columns(idx), below), idx, rank(n));
    const Lattice den = zlinalg::lattice_sum(coordinate_lattice(stage(p - 1, n), rank(n)),
                                             zlinalg::image(d(n + 1).select_columns(above)));
    return rel_.emplace(key, Subquotient(num, den)).first->second;
  }

  // Induced map of an ambient map between cached subquotients, memoized by key.
  template <class Key>
  const IntMatrix &cached_map(std::map<Key, IntMatrix> &cache, const Key &key, const Subquotient &src,
                              const Subquotient &dst, const IntMatrix &ambient) {
    auto it = cache.find(key);
    if (it != cache.end())
      return it->second;
    IntMatrix m = (src.group().generators() == 0 || dst.group().generators() == 0)
                      ? IntMatrix(dst.group().generators(), src.group().generators())
                      : src.induced_map(ambient, dst);
    return cache.emplace(key, std::move(m)).first->second;
  }

private:
  const FilteredComplex &fc_;
  int lo_ = 0, hi_ = 0, top_ = 0;
  std::vector<IntMatrix> d_;
  std::map<std::pair<int, int>, Subquotient> abs_, rel_;
};

Window support_of(const FilteredComplex &fc) {
  const int top = fc.max_level();
  return {0, top, fc.complex.min_degree() - top, fc.complex.max_degree()};
}

int clamp_level(int p, int top) { return std::max(-1, std::min(p, top)); }

}  // namespace

Window default_data_window(const FilteredComplex &fc) {
  const Window s = support_of(fc);
  const int m = fc.max_level() + 2;
  return {s.pmin - m, s.pmax + m, s.qmin - m, s.qmax + m};
}

ExactCouple couple_from_filtered_complex(const FilteredComplex &fc, std::optional<Window> data) {
  FilteredHomology h(fc);
  const Window support = support_of(fc);
  ExactCouple ec(data ? *data : default_data_window(fc), support);
  const Window &w = ec.data_window();
  const int top = h.top_level();
  std::map<std::pair<int, int>, IntMatrix> i_cache, j_cache, k_cache;
  for (const Bidegree b : w.bidegrees()) {
    const int n = b.p + b.q;
    ec.set_D(b, h.absolute(b.p, n).group());
    if (support.contains(b))
      ec.set_C(b, h.relative(b.p, n).group());
  }
  for (const Bidegree b : w.bidegrees()) {
    const int n = b.p + b.q;
    const int p = clamp_level(b.p, top);
    const Subquotient &dp = h.absolute(b.p, n);
    if (w.contains(b.p + 1, b.q - 1) && dp.group().generators() > 0) {
      const Subquotient &dn = h.absolute(b.p + 1, n);
      if (dn.group().generators() > 0)
        ec.set_i(b, h.cached_map(i_cache, {p, n}, dp, dn, IntMatrix::identity(h.rank(n))));
    }
    if (!support.contains(b))
      continue;
    const Subquotient &c = h.relative(b.p, n);
    if (c.group().generators() == 0)
      continue;
    if (dp.group().generators() > 0)
      ec.set_j(b, h.cached_map(j_cache, {p, n}, dp, c, IntMatrix::identity(h.rank(n))));
    if (w.contains(b.p - 1, b.q) && n - 1 >= h.min_degree()) {
      const Subquotient &dl = h.absolute(b.p - 1, n - 1);
      if (dl.group().generators() > 0)
        ec.set_k(b, h.cached_map(k_cache, {p, n}, c, dl, h.d(n)));
    }
  }
  return ec;
}

// ---------------------------------------------------------------- pages

const FgAbGroup &Page::group(Bidegree b) const {
  static const FgAbGroup zero = FgAbGroup::free(0);
  auto it = groups.find(b);
  return it == groups.end() ? zero : it->second.group();
}

IntMatrix Page::d(Bidegree b) const {
  const Bidegree t{b.p - r, b.q + r - 1};
  auto it = differential.find(b);
  return it == differential.end() ? IntMatrix(group(t).generators(), group(b).generators()) : it->second;
}

namespace {

// i^s : D(b) -> D(p+s, q-s).
IntMatrix i_power(const ExactCouple &ec, Bidegree b, int s) {
  IntMatrix m = IntMatrix::identity(ec.D(b).generators());
  for (int t = 0; t < s; ++t) {
    m = ec.i(b) * m;
    b = {b.p + 1, b.q - 1};
  }
  return m;
}

void require_margin(const ExactCouple &ec, Bidegree b, int r) {
  const Window &w = ec.data_window();
  const Window need{b.p - r, b.p + r - 1, b.q - r + 1, b.q + r - 1};
  if (!w.contains(need))
    throw MarginError("page " + std::to_string(r) + " at " + b.to_string() + " needs couple data on " +
                      need.to_string() + "; data window is " + w.to_string());
}

}  // namespace

Page page(const ExactCouple &ec, int r) {
  if (r < 1)
    throw std::invalid_argument("page: sheet index must be at least 1");
  Page e;
  e.r = r;
  e.support = ec.support();
  for (const Bidegree b : e.support.bidegrees()) {
    const FgAbGroup &c = ec.C(b);
    if (c.generators() == 0)
      continue;
    require_margin(ec, b, r);
    const Bidegree left{b.p - 1, b.q}, from{b.p - r, b.q + r - 1}, to{b.p + r - 1, b.q - r + 1};
    const Lattice reach = zlinalg::lattice_sum(zlinalg::image(i_power(ec, from, r - 1)), ec.D(left).relations());
    const Lattice cycles = zlinalg::preimage(ec.k(b), reach);
    const Lattice dead = zlinalg::preimage(i_power(ec, b, r - 1), ec.D(to).relations());
    const Lattice bounds = zlinalg::lattice_sum(zlinalg::apply(ec.j(b), dead), c.relations());
    e.groups.emplace(b, Subquotient(cycles, bounds));
  }
  for (const auto &[b, sq] : e.groups) {
    const Bidegree t{b.p - r, b.q + r - 1};
    auto tit = e.groups.find(t);
    if (tit == e.groups.end() || sq.group().generators() == 0)
      continue;
    const Bidegree left{b.p - 1, b.q};
    const IntMatrix lift = i_power(ec, t, r - 1).hconcat(ec.D(left).presentation());
    const IntMatrix kx = ec.k(b) * sq.representatives();
    auto sol = zlinalg::solve_integer(lift, kx);
    if (!sol)
      throw std::logic_error("page " + std::to_string(r) + ": k of a cycle at " + b.to_string() +
                             " is not in the image of i");
    const IntMatrix y = sol->block(0, 0, ec.D(t).generators(), sol->cols());
    IntMatrix m = tit->second.coordinates(ec.j(t) * y);
    if (!zlinalg::is_well_defined(m, sq.group(), tit->second.group()))
      throw std::logic_error("page " + std::to_string(r) + ": d at " + b.to_string() + " is not well defined");
    e.differential.emplace(b, std::move(m));
  }
  for (const auto &[b, m] : e.differential) {
    const Bidegree t{b.p - r, b.q + r - 1}, t2{t.p - r, t.q + r - 1};
    auto it = e.differential.find(t);
    if (it != e.differential.end() && !zlinalg::is_zero_map(it->second * m, e.group(t2)))
      throw std::logic_error("page " + std::to_string(r) + ": d∘d nonzero at " + b.to_string());
  }
  return e;
}

FgAbGroup page_homology(const Page &e, Bidegree b) {
  const FgAbGroup &g = e.group(b);
  const Bidegree t{b.p - e.r, b.q + e.r - 1}, s{b.p + e.r, b.q - e.r + 1};
  const Lattice ker = zlinalg::preimage(e.d(b), e.group(t).relations());
  const Lattice im = zlinalg::lattice_sum(zlinalg::image(e.d(s)), g.relations());
  return Subquotient(ker, im).group();
}

bool verify_next_page(const Page &e, const Page &next) {
  for (const Bidegree b : e.support.bidegrees())
    if (!page_homology(e, b).isomorphic(next.group(b)))
      return false;
  return true;
}

namespace {

bool differential_vanishes(const Page &e) {
  for (const auto &[b, m] : e.differential)
    if (!zlinalg::is_zero_map(m, e.group({b.p - e.r, b.q + e.r - 1})))
      return false;
  return true;
}

}  // namespace

LimitPage limit_page(const ExactCouple &ec) {
  LimitPage out;
  out.bound = ec.support().pmax - ec.support().pmin + 1;
  for (int r = 1; r <= out.bound; ++r) {
    try {
      out.pages.push_back(page(ec, r));
    } catch (const MarginError &err) {
      std::string diff;
      if (out.pages.size() >= 2) {
        const Page &a = out.pages[out.pages.size() - 2], &b = out.pages.back();
        for (const Bidegree x : ec.support().bidegrees())
          if (!a.group(x).isomorphic(b.group(x)))
            diff += " " + x.to_string() + ": " + a.group(x).to_string() + " vs " + b.group(x).to_string();
      }
      throw StabilizationError("limit page: no stabilization within the data window (" + std::string(err.what()) +
                               ")" + (diff.empty() ? "" : "; last two pages differ at" + diff));
    }
    if (r > 1 && !verify_next_page(out.pages[out.pages.size() - 2], out.pages.back()))
      throw std::logic_error("limit page: E^" + std::to_string(r) + " is not the homology of E^" +
                             std::to_string(r - 1));
  }
  out.stabilization = out.bound;
  while (out.stabilization > 1 && differential_vanishes(out.pages[static_cast<std::size_t>(out.stabilization - 2)]))
    --out.stabilization;
  return out;
}

// ---------------------------------------------------------------- targets

void validate_target(const FilteredTarget &t) {
  for (const auto &[n, steps] : t.steps) {
    const std::string where = "filtered target degree " + std::to_string(n);
    if (steps.empty())
      throw std::invalid_argument(where + ": no steps");
    if (!steps.front().group().is_trivial())
      throw std::invalid_argument(where + ": first step is not zero");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (steps[k].ambient() != steps[0].ambient() || !(steps[k].denominator() == steps[0].denominator()))
        throw std::invalid_argument(where + ": steps have different ambients or denominators");
      if (k > 0 && !steps[k].numerator().contains(steps[k - 1].numerator()))
        throw std::invalid_argument(where + ": step " + std::to_string(k - 1) + " not contained in step " +
                                    std::to_string(k));
    }
  }
}

FilteredTarget induced_filtration(const FilteredComplex &fc) {
  FilteredHomology h(fc);
  FilteredTarget t;
  for (int n = h.min_degree(); n <= h.max_degree(); ++n) {
    const Lattice den = zlinalg::image(h.d(n + 1));
    auto &steps = t.steps[n];
    for (int k = 0; k <= h.top_level() + 1; ++k) {
      const Lattice num = zlinalg::lattice_sum(h.absolute(k - 1, n).numerator(), den);
      steps.emplace_back(num, den);
    }
  }
  return t;
}

ConvergenceReport converge_check(const ExactCouple &ec, const FilteredTarget &target, const Window &window) {
  validate_target(target);
  const LimitPage lp = limit_page(ec);
  ConvergenceReport rep;
  rep.stabilization = lp.stabilization;
  for (const Bidegree b : window.bidegrees()) {
    ConvergenceEntry e;
    e.at = b;
    e.limit = lp.limit().group(b);
    auto it = target.steps.find(b.p + b.q);
    if (it == target.steps.end()) {
      e.graded = FgAbGroup::free(0);
    } else {
      const auto &steps = it->second;
      auto step = [&](int k) -> const Subquotient & {
        return steps[static_cast<std::size_t>(std::clamp(k, 0, static_cast<int>(steps.size()) - 1))];
      };
      e.graded = Subquotient(step(b.p + 1).numerator(), step(b.p).numerator()).group();
    }
    e.ok = e.limit.isomorphic(e.graded);
    if (!e.ok && !rep.witness) {
      rep.converges = false;
      rep.witness = b;
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

// ---------------------------------------------------------------- resolution couples

ParityPattern constant_pattern(const groupoid::FiniteGroupoid &g, const FgAbGroup &even, const FgAbGroup &odd) {
  return {gmodule::constant_module(g, even), gmodule::constant_module(g, odd)};
}

namespace {

bool row_is_zero(const gmodule::GModule &m) { return m.total_generators() == 0; }

bool row_has_torsion(const gmodule::GModule &m) {
  for (const auto &f : m.fibres)
    if (f.presentation().cols() != 0)
      return true;
  return false;
}

// Free bar model of one row, with its last degree replaced by the boundaries
// it maps onto so the row has no homology there.
struct Row {
  std::vector<std::size_t> ranks;
  std::vector<IntMatrix> d;  // d[m] : degree m -> m-1, m >= 1
  std::vector<std::vector<int>> level;
};

Row truncated_row(const gmodule::GModule &m, int truncation) {
  const bool torsion = row_has_torsion(m);
  const auto model = homology::free_bar_model(m, torsion ? truncation + 1 : truncation);
  const int top = model.complex.max_degree();
  Row row;
  row.d.emplace_back();
  for (int k = 0; k <= top; ++k) {
    row.ranks.push_back(model.complex.rank(k));
    row.level.push_back(model.level[static_cast<std::size_t>(k)]);
    if (k > 0)
      row.d.push_back(model.complex.differential(k).to_dense());
  }
  if (top > 0) {
    const Lattice b = zlinalg::image(row.d[static_cast<std::size_t>(top)]);
    row.d[static_cast<std::size_t>(top)] = b.basis();
    row.ranks[static_cast<std::size_t>(top)] = b.rank();
    row.level[static_cast<std::size_t>(top)].assign(b.rank(), top);
  }
  return row;
}

}  // namespace

ResolutionComplex resolution_complex(const ParityPattern &pattern, int truncation, int qmin, int qmax) {
  if (truncation < 1)
    throw std::invalid_argument("resolution couple: truncation must be at least 1");
  if (qmin > qmax)
    throw std::invalid_argument("resolution couple: empty row range");
  ResolutionComplex rc;
  rc.truncation = truncation;
  rc.qmin = qmin;
  rc.qmax = qmax;
  std::map<int, Row> rows;
  int hi = qmin;
  for (int q = qmin; q <= qmax; ++q) {
    const auto &m = pattern.row(q);
    if (row_is_zero(m))
      continue;
    rows.emplace(q, truncated_row(m, truncation));
    rc.top[q] = static_cast<int>(rows.at(q).ranks.size()) - 1;
    rc.torsion[q] = row_has_torsion(m);
    hi = std::max(hi, q + rc.top[q]);
  }
  const int lo = qmin;
  const std::size_t degrees = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::size_t> ranks(degrees, 0);
  std::vector<std::vector<int>> level(degrees);
  for (int q = qmin; q <= qmax; ++q) {
    auto &off = rc.offset[q];
    off.assign(degrees, 0);
    for (std::size_t n = 0; n < degrees; ++n)
      off[n] = ranks[n];
    auto it = rows.find(q);
    if (it == rows.end())
      continue;
    for (std::size_t m = 0; m < it->second.ranks.size(); ++m) {
      const std::size_t n = static_cast<std::size_t>(q - lo) + m;
      ranks[n] += it->second.ranks[m];
      level[n].insert(level[n].end(), it->second.level[m].begin(), it->second.level[m].end());
    }
  }
  std::vector<SparseMatrix> diffs;
  for (std::size_t n = 1; n < degrees; ++n) {
    SparseMatrix dn(ranks[n - 1], ranks[n]);
    for (const auto &[q, row] : rows) {
      const int m = static_cast<int>(n) + lo - q;
      if (m < 1 || m >= static_cast<int>(row.ranks.size()))
        continue;
      const IntMatrix &blk = row.d[static_cast<std::size_t>(m)];
      const std::size_t r0 = rc.offset[q][n - 1], c0 = rc.offset[q][n];
      for (std::size_t j = 0; j < blk.cols(); ++j)
        for (std::size_t i = 0; i < blk.rows(); ++i)
          if (sgn(blk(i, j)) != 0) {
            if (!blk(i, j).fits_slong_p())
              throw std::overflow_error("resolution couple: boundary entry exceeds 64 bits");
            dn.add(r0 + i, c0 + j, blk(i, j).get_si());
          }
    }
    diffs.push_back(std::move(dn));
  }
  rc.filtered.complex = ChainComplex(lo, ranks, std::move(diffs));
  rc.filtered.level = std::move(level);
  return rc;
}

ExactCouple couple_from_resolution(const ParityPattern &pattern, int truncation, int qmin, int qmax) {
  return couple_from_filtered_complex(resolution_complex(pattern, truncation, qmin, qmax).filtered);
}

// ---------------------------------------------------------------- morphisms

void validate_filtered_map(const FilteredComplex &a, const FilteredComplex &b, const FilteredChainMap &f) {
  const int lo = a.complex.min_degree(), hi = a.complex.max_degree();
  if (b.complex.min_degree() != lo || b.complex.max_degree() != hi)
    throw std::invalid_argument("filtered map: complexes span different degrees");
  if (f.maps.size() != static_cast<std::size_t>(hi - lo + 1))
    throw std::invalid_argument("filtered map: one matrix per degree required");
  for (int n = lo; n <= hi; ++n) {
    const std::size_t k = static_cast<std::size_t>(n - lo);
    const IntMatrix &m = f.maps[k];
    if (m.rows() != b.complex.rank(n) || m.cols() != a.complex.rank(n))
      throw std::invalid_argument("filtered map: degree " + std::to_string(n) + " has the wrong shape");
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t i = 0; i < m.rows(); ++i)
        if (sgn(m(i, j)) != 0 && b.level[k][i] > a.level[k][j])
          throw std::invalid_argument("filtered map: degree " + std::to_string(n) + " raises the filtration level");
    if (n > lo) {
      const IntMatrix lhs = b.complex.differential(n).to_dense() * m;
      const IntMatrix rhs = f.maps[k - 1] * a.complex.differential(n).to_dense();
      if (!(lhs == rhs))
        throw std::invalid_argument("filtered map: not a chain map in degree " + std::to_string(n));
    }
  }
}

MorphismCheck check_morphism(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m) {
  if (!(src.data_window() == dst.data_window()))
    throw std::invalid_argument("couple morphism: data windows differ");
  MorphismCheck rep;
  const Window &w = src.data_window();
  auto on_D = [&](Bidegree b) { return stored_or_zero(m.on_D, b, dst.D(b).generators(), src.D(b).generators()); };
  auto on_C = [&](Bidegree b) { return stored_or_zero(m.on_C, b, dst.C(b).generators(), src.C(b).generators()); };
  auto fail = [&](const std::string &s) {
    rep.commutes = false;
    rep.failures.push_back(s);
  };
  for (const Bidegree b : w.bidegrees()) {
    const IntMatrix t = on_D(b), s = on_C(b);
    if (!zlinalg::is_well_defined(t, src.D(b), dst.D(b)) || !zlinalg::is_well_defined(s, src.C(b), dst.C(b))) {
      fail("map at " + b.to_string() + " not well defined");
      continue;
    }
    const Bidegree up{b.p + 1, b.q - 1}, left{b.p - 1, b.q};
    if (w.contains(up) && !zlinalg::maps_equal(on_D(up) * src.i(b), dst.i(b) * t, dst.D(up)))
      fail("does not commute with i at " + b.to_string());
    if (!zlinalg::maps_equal(s * src.j(b), dst.j(b) * t, dst.C(b)))
      fail("does not commute with j at " + b.to_string());
    if (w.contains(left) && !zlinalg::maps_equal(on_D(left) * src.k(b), dst.k(b) * s, dst.D(left)))
      fail("does not commute with k at " + b.to_string());
  }
  return rep;
}

CoupleMorphism couple_morphism(const FilteredComplex &a, const FilteredComplex &b, const FilteredChainMap &f,
                               const Window &window) {
  validate_filtered_map(a, b, f);
  FilteredHomology ha(a), hb(b);
  const Window sa = support_of(a), sb = support_of(b);
  const int lo = a.complex.min_degree(), hi = a.complex.max_degree();
  CoupleMorphism out;
  std::map<std::pair<int, int>, IntMatrix> d_cache, c_cache;
  const int top = std::max(ha.top_level(), hb.top_level());
  for (const Bidegree x : window.bidegrees()) {
    const int n = x.p + x.q;
    if (n < lo || n > hi)
      continue;
    const IntMatrix &fn = f.maps[static_cast<std::size_t>(n - lo)];
    const Subquotient &da = ha.absolute(x.p, n), &db = hb.absolute(x.p, n);
    if (da.group().generators() > 0 && db.group().generators() > 0)
      out.on_D.emplace(x, ha.cached_map(d_cache, {clamp_level(x.p, top), n}, da, db, fn));
    if (sa.contains(x) && sb.contains(x)) {
      const Subquotient &ca = ha.relative(x.p, n), &cb = hb.relative(x.p, n);
      if (ca.group().generators() > 0 && cb.group().generators() > 0)
        out.on_C.emplace(x, ha.cached_map(c_cache, {x.p, n}, ca, cb, fn));
    }
  }
  return out;
}

namespace {

std::size_t row_rank(const ResolutionComplex &rc, int q, int n) {
  const auto &c = rc.filtered.complex;
  const std::size_t k = static_cast<std::size_t>(n - c.min_degree());
  const std::size_t end = q < rc.qmax ? rc.offset.at(q + 1)[k] : c.rank(n);
  return end - rc.offset.at(q)[k];
}

}  // namespace

FilteredChainMap resolution_chain_map(const ResolutionComplex &a, const ResolutionComplex &b,
                                      const std::vector<SparseMatrix> &even_row) {
  if (a.truncation != b.truncation || a.qmin != b.qmin || a.qmax != b.qmax)
    throw std::invalid_argument("resolution map: complexes have different shapes");
  const auto &ca = a.filtered.complex, &cb = b.filtered.complex;
  const int lo = ca.min_degree();
  if (cb.min_degree() != lo || cb.max_degree() != ca.max_degree())
    throw std::invalid_argument("resolution map: complexes span different degrees");
  if (even_row.size() < static_cast<std::size_t>(a.truncation) + 1)
    throw std::invalid_argument("resolution map: need chain maps in degrees 0.." + std::to_string(a.truncation));
  FilteredChainMap f;
  for (int n = lo; n <= ca.max_degree(); ++n)
    f.maps.emplace_back(cb.rank(n), ca.rank(n));
  for (int q = a.qmin; q <= a.qmax; ++q) {
    const bool in_a = a.top.count(q) > 0, in_b = b.top.count(q) > 0;
    if (q % 2 != 0) {
      if (in_a || in_b)
        throw std::invalid_argument("resolution map: odd rows must be zero");
      continue;
    }
    if (!in_a || !in_b)
      continue;
    if (a.torsion.at(q) || b.torsion.at(q))
      throw std::invalid_argument("resolution map: torsion rows are not supported");
    const int top = a.top.at(q);
    if (b.top.at(q) != top)
      throw std::invalid_argument("resolution map: rows have different lengths");
    for (int m = 0; m <= top; ++m) {
      const int n = q + m;
      const std::size_t k = static_cast<std::size_t>(n - lo);
      const std::size_t r0 = b.offset.at(q)[k], c0 = a.offset.at(q)[k];
      IntMatrix blk;
      if (m < top) {
        blk = even_row[static_cast<std::size_t>(m)].to_dense();
      } else {
        // Last degree: generators are boundaries; solve for their images.
        const IntMatrix ba = ca.differential(n).to_dense().block(a.offset.at(q)[k - 1], c0, row_rank(a, q, n - 1),
                                                                   row_rank(a, q, n));
        const IntMatrix bb = cb.differential(n).to_dense().block(b.offset.at(q)[k - 1], r0, row_rank(b, q, n - 1),
                                                                   row_rank(b, q, n));
        auto sol = zlinalg::solve_integer(bb, even_row[static_cast<std::size_t>(m - 1)].to_dense() * ba);
        if (!sol)
          throw std::invalid_argument("resolution map: does not carry boundaries to boundaries");
        blk = *sol;
      }
      f.maps[k].set_block(r0, c0, blk);
    }
  }
  return f;
}

// ---------------------------------------------------------------- page maps

std::vector<PageMap> couple_morphism_pages(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m,
                                           int last) {
  const auto check = check_morphism(src, dst, m);
  if (!check.commutes)
    throw std::invalid_argument("couple morphism: " + check.failures.front());
  std::vector<PageMap> out;
  const Window support = hull(src.support(), dst.support());
  for (int r = 1; r <= last; ++r) {
    const Page a = page(src, r), b = page(dst, r);
    PageMap pm;
    pm.r = r;
    for (const Bidegree x : support.bidegrees()) {
      auto ia = a.groups.find(x);
      auto ib = b.groups.find(x);
      if (ia == a.groups.end() || ib == b.groups.end())
        continue;
      auto s = m.on_C.find(x);
      IntMatrix map = s == m.on_C.end() ? IntMatrix(ib->second.group().generators(), ia->second.group().generators())
                                        : ia->second.induced_map(s->second, ib->second);
      pm.maps.emplace(x, std::move(map));
    }
    auto map_at = [&](Bidegree x) {
      auto it = pm.maps.find(x);
      return it == pm.maps.end() ? IntMatrix(b.group(x).generators(), a.group(x).generators()) : it->second;
    };
    for (const Bidegree x : support.bidegrees()) {
      const Bidegree t{x.p - r, x.q + r - 1};
      if (!zlinalg::maps_equal(b.d(x) * map_at(x), map_at(t) * a.d(x), b.group(t)))
        pm.commutes_with_d = false;
    }
    if (!pm.commutes_with_d)
      throw std::logic_error("couple morphism: page " + std::to_string(r) + " map does not commute with d");
    out.push_back(std::move(pm));
  }
  return out;
}

ComparisonReport comparison(const ExactCouple &src, const ExactCouple &dst, const CoupleMorphism &m) {
  ComparisonReport rep;
  const Window support = hull(src.support(), dst.support());
  rep.bound = support.pmax - support.pmin + 1;
  const int last = std::max(rep.bound, 2);
  const auto pages = couple_morphism_pages(src, dst, m, last);
  std::vector<Page> a, b;
  for (int r = 1; r <= last; ++r) {
    a.push_back(page(src, r));
    b.push_back(page(dst, r));
  }
  for (int r = 2; r <= last; ++r) {
    const auto &pm = pages[static_cast<std::size_t>(r - 1)];
    const Page &pa = a[static_cast<std::size_t>(r - 1)], &pb = b[static_cast<std::size_t>(r - 1)];
    for (const Bidegree x : support.bidegrees()) {
      auto it = pm.maps.find(x);
      const IntMatrix f = it == pm.maps.end() ? IntMatrix(pb.group(x).generators(), pa.group(x).generators())
                                              : it->second;
      if (zlinalg::is_isomorphism(f, pa.group(x), pb.group(x)))
        continue;
      if (r == 2)
        throw PreconditionError("comparison: E^2 map is not an isomorphism at " + x.to_string() + " (" +
                                pa.group(x).to_string() + " -> " + pb.group(x).to_string() + ")");
      throw std::logic_error("comparison: E^" + std::to_string(r) + " map fails to be an isomorphism at " +
                             x.to_string());
    }
    rep.pages_checked.push_back(r);
  }
  rep.abutment_isomorphism = true;
  const Window &w = src.data_window();
  for (int q = w.qmin; q <= w.qmax; ++q) {
    const Bidegree x{w.pmax, q};
    auto it = m.on_D.find(x);
    const IntMatrix f = it == m.on_D.end() ? IntMatrix(dst.D(x).generators(), src.D(x).generators()) : it->second;
    if (!zlinalg::is_isomorphism(f, src.D(x), dst.D(x)))
      rep.abutment_isomorphism = false;
  }
  rep.certified = true;
  return rep;
}

// ---------------------------------------------------------------- collapse

CollapseCertificate degenerate_collapse(const Page &e2) {
  if (e2.r != 2)
    throw std::invalid_argument("degenerate collapse: expects the second page");
  CollapseCertificate c;
  for (const auto &[b, sq] : e2.groups)
    if ((b.p < 0 || b.p > 1) && !sq.group().is_trivial())
      c.obstructions.push_back(b);
  c.certified = c.obstructions.empty();
  return c;
}

CollapseCertificate degenerate_collapse(const zlinalg::GradedGroup &h) {
  CollapseCertificate c;
  for (const auto &[p, g] : h.support())
    if ((p < 0 || p > 1) && !g.is_trivial())
      c.obstructions.push_back({p, 0});
  c.certified = c.obstructions.empty();
  return c;
}

}  // namespace etale::specseq
