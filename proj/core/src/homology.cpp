#include "etale/homology.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>

namespace etale::homology {

using correspondence::Correspondence;
using groupoid::npos;
using zlinalg::Int;
using zlinalg::IntVector;
using zlinalg::SparseMatrix;

namespace {

constexpr std::size_t kMaxGenerators = 30'000'000;
constexpr std::size_t kMaxDenseRelations = 20'000'000;

std::int64_t to_i64(const Int &x) {
  if (!x.fits_slong_p())
    throw std::overflow_error("bar complex: coefficient exceeds 64-bit range");
  return x.get_si();
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("chain map: coefficient overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("chain map: coefficient overflow");
  return r;
}

using SparseColumns = std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>>;

SparseColumns sparse_columns(const IntMatrix &m) {
  SparseColumns out(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (sgn(m(i, j)) != 0)
        out[j].emplace_back(static_cast<std::uint32_t>(i), to_i64(m(i, j)));
  return out;
}

}  // namespace

std::size_t BarComplex::tuple_count(int n) const { return last_[static_cast<std::size_t>(n)].size(); }

std::size_t BarComplex::coefficient_unit(int n, std::size_t t) const {
  const std::size_t a = last_[static_cast<std::size_t>(n)][t];
  return n == 0 ? a : groupoid().source(a);
}

std::vector<std::size_t> BarComplex::tuple(int n, std::size_t t) const {
  if (n == 0)
    return {last_[0][t]};
  std::vector<std::size_t> out(static_cast<std::size_t>(n));
  for (int d = n; d >= 1; --d) {
    out[static_cast<std::size_t>(d - 1)] = last_[static_cast<std::size_t>(d)][t];
    t = parent_[static_cast<std::size_t>(d)][t];
  }
  return out;
}

std::size_t BarComplex::tuple_index(std::size_t root, const std::size_t *arrows, std::size_t n) const {
  const auto &g = groupoid();
  const bool normalized = variant_ == BarVariant::normalized;
  std::size_t idx = root;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = arrows[i];
    if (normalized && g.is_unit(a))
      return npos;
    idx = first_child_[i][idx] + g.position_into(a) - (normalized ? 1 : 0);
  }
  return idx;
}

BarComplex BarComplex::build(const GModule &m, int truncation, BarVariant variant) {
  gmodule::require_valid(m);
  return assemble(m, truncation, variant, true);
}

BarComplex BarComplex::build_free(const GModule &m, int truncation, BarVariant variant) {
  return assemble(m, truncation, variant, false);
}

BarComplex BarComplex::assemble(const GModule &m, int truncation, BarVariant variant, bool with_relations) {
  if (truncation < 1)
    throw std::invalid_argument("bar complex: truncation must be at least 1");
  BarComplex b;
  b.module_ = m;
  b.truncation_ = truncation;
  b.variant_ = variant;
  const auto &g = m.groupoid;
  const bool normalized = variant == BarVariant::normalized;
  const std::size_t top = static_cast<std::size_t>(truncation);
  b.last_.resize(top + 1);
  b.parent_.resize(top + 1);
  b.first_child_.resize(top + 1);
  b.gen_offset_.resize(top + 1);
  for (std::size_t x = 0; x < g.unit_count(); ++x)
    b.last_[0].push_back(static_cast<std::uint32_t>(x));
  auto fill_offsets = [&](std::size_t n) {
    auto &off = b.gen_offset_[n];
    off.assign(1, 0);
    for (std::size_t t = 0; t < b.last_[n].size(); ++t) {
      off.push_back(off.back() + m.fibres[b.coefficient_unit(static_cast<int>(n), t)].generators());
      if (off.back() > kMaxGenerators)
        throw std::length_error("bar complex: degree " + std::to_string(n) + " exceeds " +
                                std::to_string(kMaxGenerators) + " generators");
    }
  };
  fill_offsets(0);
  for (std::size_t n = 1; n <= top; ++n) {
    auto &fc = b.first_child_[n - 1];
    fc.resize(b.last_[n - 1].size());
    for (std::size_t t = 0; t < b.last_[n - 1].size(); ++t) {
      fc[t] = b.last_[n].size();
      for (std::size_t a : g.arrows_into(b.coefficient_unit(static_cast<int>(n - 1), t))) {
        if (normalized && g.is_unit(a))
          continue;
        b.last_[n].push_back(static_cast<std::uint32_t>(a));
        b.parent_[n].push_back(static_cast<std::uint32_t>(t));
      }
      if (b.last_[n].size() > kMaxGenerators)
        throw std::length_error("bar complex: degree " + std::to_string(n) + " exceeds " +
                                std::to_string(kMaxGenerators) + " tuples");
    }
    fill_offsets(n);
  }

  std::vector<SparseColumns> act;
  for (const auto &mat : m.action)
    act.push_back(sparse_columns(mat));
  std::vector<std::size_t> ranks;
  for (std::size_t n = 0; n <= top; ++n)
    ranks.push_back(b.rank(static_cast<int>(n)));
  std::vector<SparseMatrix> diffs;
  std::vector<std::size_t> scratch(top);
  for (std::size_t n = 1; n <= top; ++n) {
    SparseMatrix d(ranks[n - 1], ranks[n]);
    for (std::size_t t = 0; t < b.last_[n].size(); ++t) {
      auto tup = b.tuple(static_cast<int>(n), t);
      const std::size_t y = g.source(tup[n - 1]);
      const std::size_t width = m.fibres[y].generators();
      const std::size_t col0 = b.gen_offset_[n][t];
      // face 0
      const std::size_t i0 = b.tuple_index(g.source(tup[0]), tup.data() + 1, n - 1);
      for (std::size_t j = 0; j < width; ++j)
        d.add(b.gen_offset_[n - 1][i0] + j, col0 + j, 1);
      // inner faces
      for (std::size_t i = 1; i < n; ++i) {
        std::size_t len = 0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i)
            continue;
          scratch[len++] = k == i - 1 ? g.compose(tup[i - 1], tup[i]) : tup[k];
        }
        const std::size_t idx = b.tuple_index(g.range(tup[0]), scratch.data(), n - 1);
        if (idx == npos)
          continue;
        const std::int64_t sign = i % 2 ? -1 : 1;
        for (std::size_t j = 0; j < width; ++j)
          d.add(b.gen_offset_[n - 1][idx] + j, col0 + j, sign);
      }
      // last face
      const std::size_t il = b.tuple_index(g.range(tup[0]), tup.data(), n - 1);
      const std::int64_t sign = n % 2 ? -1 : 1;
      for (std::size_t j = 0; j < width; ++j)
        for (const auto &[i, v] : act[tup[n - 1]][j])
          d.add(b.gen_offset_[n - 1][il] + i, col0 + j, sign * v);
    }
    diffs.push_back(std::move(d));
  }

  bool free = true;
  for (const auto &f : m.fibres)
    free = free && f.presentation().cols() == 0;
  std::vector<IntMatrix> rels;
  if (!free && with_relations) {
    for (std::size_t n = 0; n <= top; ++n) {
      std::size_t cols = 0;
      for (std::size_t t = 0; t < b.last_[n].size(); ++t)
        cols += m.fibres[b.coefficient_unit(static_cast<int>(n), t)].presentation().cols();
      if (ranks[n] * cols > kMaxDenseRelations)
        throw std::length_error("bar complex: presented chain group in degree " + std::to_string(n) +
                                " too large for dense relations (" + std::to_string(ranks[n]) + " generators)");
      IntMatrix r(ranks[n], cols);
      std::size_t c = 0;
      for (std::size_t t = 0; t < b.last_[n].size(); ++t) {
        const auto &p = m.fibres[b.coefficient_unit(static_cast<int>(n), t)].presentation();
        r.set_block(b.gen_offset_[n][t], c, p);
        c += p.cols();
      }
      rels.push_back(std::move(r));
    }
  }
  b.complex_ = zlinalg::ChainComplex(0, std::move(ranks), std::move(diffs), std::move(rels));
  return b;
}

namespace {

bool has_torsion_fibres(const GModule &m) {
  for (const auto &f : m.fibres)
    if (f.presentation().cols() != 0)
      return true;
  return false;
}

// Fibres rewritten in Smith bases with unit generators dropped; order[u][i]
// is 0 for a free generator, else the order of the cyclic generator.
struct Diagonalized {
  GModule module;
  std::vector<std::vector<std::int64_t>> order;
};

Diagonalized diagonalize(const GModule &m) {
  const auto &g = m.groupoid;
  Diagonalized out;
  out.module.groupoid = g;
  std::vector<IntMatrix> to_new(g.unit_count()), from_new(g.unit_count());
  for (std::size_t u = 0; u < g.unit_count(); ++u) {
    const auto &p = m.fibres[u].presentation();
    const std::size_t r = p.rows();
    auto sf = zlinalg::smith_normal_form(p, zlinalg::kWantU | zlinalg::kWantUInverse);
    std::vector<std::size_t> keep;
    std::vector<std::int64_t> ord;
    for (std::size_t i = 0; i < r; ++i) {
      const Int d = i < sf.diagonal.size() ? Int(abs(sf.diagonal[i])) : Int(0);
      if (d == 1)
        continue;
      keep.push_back(i);
      ord.push_back(to_i64(d));
    }
    to_new[u] = sf.u.select_rows(keep);
    from_new[u] = sf.u_inv.select_columns(keep);
    out.module.fibres.push_back(FgAbGroup::free(keep.size()));
    out.order.push_back(std::move(ord));
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    IntMatrix mat = to_new[g.range(a)] * m.action[a] * from_new[g.source(a)];
    const auto &ord = out.order[g.range(a)];
    for (std::size_t i = 0; i < mat.rows(); ++i)
      if (ord[i] != 0)
        for (std::size_t j = 0; j < mat.cols(); ++j) {
          Int v = mat(i, j) % ord[i];
          if (v < 0)
            v += ord[i];
          mat(i, j) = v;
        }
    out.module.action.push_back(std::move(mat));
  }
  return out;
}

// Free complex T with T_n = F_n + K_{n-1}, F the bar complex on the Smith
// generators and K its torsion generators, quasi-isomorphic to F / R:
//   D(x, y) = (dx + Ry, -Yx - d_K y),  R d_K = d R,  R Y = d d.
class TorsionReplacement {
public:
  TorsionReplacement(const GModule &m, int truncation, BarVariant variant) : diag_(diagonalize(m)) {
    f_ = BarComplex::build_free(diag_.module, truncation, variant);
    const std::size_t top = static_cast<std::size_t>(truncation);
    kpos_.resize(top + 1);
    order_.resize(top + 1);
    kgen_.resize(top + 1);
    for (std::size_t n = 0; n <= top; ++n) {
      const int dn = static_cast<int>(n);
      kpos_[n].assign(f_.rank(dn), npos);
      order_[n].assign(f_.rank(dn), 0);
      for (std::size_t t = 0; t < f_.tuple_count(dn); ++t) {
        const auto &ord = diag_.order[f_.coefficient_unit(dn, t)];
        for (std::size_t i = 0; i < ord.size(); ++i) {
          const std::size_t c = f_.generator_offset(dn, t) + i;
          order_[n][c] = ord[i];
          if (ord[i] != 0) {
            kpos_[n][c] = kgen_[n].size();
            kgen_[n].push_back(c);
          }
        }
      }
    }
    std::vector<std::size_t> ranks;
    std::vector<SparseMatrix> diffs;
    for (std::size_t n = 0; n <= top; ++n)
      ranks.push_back(f_.rank(static_cast<int>(n)) + (n == 0 ? 0 : kgen_[n - 1].size()));
    for (std::size_t n = 1; n <= top; ++n) {
      const int dn = static_cast<int>(n);
      const SparseMatrix d = f_.complex().differential(dn);
      const SparseMatrix below = n >= 2 ? f_.complex().differential(dn - 1) : SparseMatrix(0, 0);
      SparseMatrix out(ranks[n - 1], ranks[n]);
      const std::size_t fbelow = f_.rank(dn - 1);
      for (std::size_t j = 0; j < d.cols(); ++j)
        for (const auto &[i, v] : d.column(j))
          out.add(i, j, v);
      if (n >= 2) {
        auto dd = zlinalg::multiply(below, d);
        for (std::size_t j = 0; j < dd.cols(); ++j)
          for (const auto &[i, v] : dd.column(j))
            out.add(fbelow + kpos_at(n - 2, i, v), j, -divide(n - 2, i, v));
      }
      const std::size_t fhere = f_.rank(dn);
      for (std::size_t y = 0; y < kgen_[n - 1].size(); ++y) {
        const std::size_t c = kgen_[n - 1][y];
        const std::int64_t ord = order_[n - 1][c];
        out.add(c, fhere + y, ord);
        if (n >= 2)
          for (const auto &[i, v] : below.column(c)) {
            const std::int64_t scaled = v * ord;
            out.add(fbelow + kpos_at(n - 2, i, scaled), fhere + y, -divide(n - 2, i, scaled));
          }
      }
      diffs.push_back(std::move(out));
    }
    complex_ = zlinalg::ChainComplex(0, std::move(ranks), std::move(diffs));
  }

  FgAbGroup homology(int n) const { return zlinalg::homology_at(complex_, n); }
  const zlinalg::ChainComplex &complex() const { return complex_; }

  std::vector<std::vector<int>> levels() const {
    std::vector<std::vector<int>> out(kgen_.size());
    for (std::size_t n = 0; n < kgen_.size(); ++n) {
      out[n].assign(f_.rank(static_cast<int>(n)), static_cast<int>(n));
      if (n > 0)
        out[n].resize(out[n].size() + kgen_[n - 1].size(), static_cast<int>(n) - 1);
    }
    return out;
  }

private:
  std::size_t kpos_at(std::size_t n, std::size_t row, std::int64_t v) const {
    if (order_[n][row] == 0) {
      if (v != 0)
        throw std::logic_error("torsion replacement: relation leaves the torsion part");
      return 0;
    }
    return kpos_[n][row];
  }
  std::int64_t divide(std::size_t n, std::size_t row, std::int64_t v) const {
    const std::int64_t d = order_[n][row];
    if (d == 0)
      return 0;
    if (v % d != 0)
      throw std::logic_error("torsion replacement: relation not divisible by the generator order");
    return v / d;
  }

  Diagonalized diag_;
  BarComplex f_;
  std::vector<std::vector<std::size_t>> kpos_;
  std::vector<std::vector<std::int64_t>> order_;
  std::vector<std::vector<std::size_t>> kgen_;
  zlinalg::ChainComplex complex_;
};

}  // namespace

FgAbGroup BarComplex::homology(int n) const {
  if (n < 0 || n >= truncation_)
    throw std::out_of_range("bar complex: degree " + std::to_string(n) + " outside the certified range [0, " +
                            std::to_string(truncation_ - 1) + "]");
  if (!has_torsion_fibres(module_))
    return zlinalg::homology_at(complex_, n);
  return TorsionReplacement(module_, truncation_, variant_).homology(n);
}

FreeBarModel free_bar_model(const GModule &m, int truncation, BarVariant variant) {
  gmodule::require_valid(m);
  FreeBarModel out;
  if (!has_torsion_fibres(m)) {
    auto b = BarComplex::build_free(m, truncation, variant);
    for (int n = 0; n <= truncation; ++n)
      out.level.emplace_back(b.rank(n), n);
    out.complex = b.complex();
    return out;
  }
  TorsionReplacement t(m, truncation, variant);
  out.complex = t.complex();
  out.level = t.levels();
  return out;
}

FgAbGroup groupoid_homology(const GModule &m, int n, BarVariant variant) {
  if (n < 0)
    return FgAbGroup::free(0);
  gmodule::require_valid(m);
  if (!has_torsion_fibres(m))
    return zlinalg::homology_at(BarComplex::build_free(m, n + 1, variant).complex(), n);
  return TorsionReplacement(m, n + 1, variant).homology(n);
}

zlinalg::GradedGroup homology_table(const GModule &m, int truncation, BarVariant variant) {
  gmodule::require_valid(m);
  zlinalg::GradedGroup out;
  if (!has_torsion_fibres(m)) {
    auto b = BarComplex::build_free(m, truncation, variant);
    for (int n = 0; n < truncation; ++n)
      out.set(n, zlinalg::homology_at(b.complex(), n));
  } else {
    TorsionReplacement t(m, truncation, variant);
    for (int n = 0; n < truncation; ++n)
      out.set(n, t.homology(n));
  }
  return out;
}

GModuleMap orbit_sum_map(const Correspondence &c, const gmodule::InducedModule &ind) {
  GModuleMap f;
  for (std::size_t u = 0; u < c.left().unit_count(); ++u) {
    IntMatrix col(ind.module.fibres[u].generators(), 1);
    for (std::size_t k : ind.summands[u]) {
      if (ind.module.fibres[u].generators() != ind.summands[u].size())
        throw std::invalid_argument("orbit_sum_map: fibres of the right module must have one generator");
      col(ind.summand_offset[k], 0) = 1;
    }
    f.components.push_back(std::move(col));
  }
  return f;
}

namespace {

// Element of Ind_c Q_n: terms keyed by (orbit, coefficient generator, h0..hn).
constexpr std::size_t kMaxLift = 7;
struct Key {
  std::uint32_t orbit = 0;
  std::uint32_t coef = 0;
  std::array<std::uint32_t, kMaxLift + 1> h{};
  auto operator<=>(const Key &) const = default;
};
using Element = std::vector<std::pair<Key, std::int64_t>>;

void normalize(Element &e) {
  std::sort(e.begin(), e.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < e.size();) {
    std::int64_t v = 0;
    std::size_t j = i;
    for (; j < e.size() && e[j].first == e[i].first; ++j)
      v = checked_add(v, e[j].second);
    if (v != 0)
      e[out++] = {e[i].first, v};
    i = j;
  }
  e.resize(out);
}

class Lifter {
public:
  Lifter(const Correspondence &c, const GModule &a, const GModule &b, const GModuleMap &f, int truncation,
         const LiftOptions &opt)
      : c_(c), a_(a), b_(b), f_(f), top_(static_cast<std::size_t>(truncation)), opt_(opt),
        src_(BarComplex::build(a, truncation)), dst_(BarComplex::build(b, truncation)),
        ind_(gmodule::induce(c, b)) {
    if (truncation + 1 > static_cast<int>(kMaxLift))
      throw std::invalid_argument("induced_chain_map: truncation above " + std::to_string(kMaxLift - 1));
    auto check = gmodule::validate_map(a, ind_.module, f);
    if (!check.valid)
      throw std::invalid_argument("induced_chain_map: " + check.message);
    const auto &g = c.left();
    const auto &o = ind_.orbits;
    move_.assign(g.arrow_count(), std::vector<std::pair<std::uint32_t, std::uint32_t>>(o.orbits.size()));
    for (std::size_t x = 0; x < g.arrow_count(); ++x)
      for (std::size_t k : ind_.summands[g.source(x)]) {
        const std::size_t moved = c.act_left(x, o.representative(k));
        move_[x][k] = {static_cast<std::uint32_t>(o.orbit_of[moved]), static_cast<std::uint32_t>(o.transporter[moved])};
      }
    for (const auto &mat : a.action)
      a_act_.push_back(sparse_columns(mat));
    for (const auto &mat : b.action)
      b_act_.push_back(sparse_columns(mat));
  }

  InducedChainMap run() {
    std::vector<std::vector<Element>> lift(top_ + 1);
    for (std::size_t n = 0; n <= top_; ++n) {
      lift[n].resize(src_.rank(static_cast<int>(n)));
      const std::size_t tuples = src_.tuple_count(static_cast<int>(n));
      for (std::size_t t = 0; t < tuples; ++t) {
        const std::size_t y = src_.coefficient_unit(static_cast<int>(n), t);
        for (std::size_t j = 0; j < a_.fibres[y].generators(); ++j) {
          Element rhs = n == 0 ? unit_image(src_.tuple(0, t)[0], j) : boundary_image(n, t, j, lift[n - 1]);
          Element value;
          if (opt_.method == LiftMethod::solve)
            value = solve(n, rhs, anchor(n, t));
          else
            value = n == 0 ? std::move(rhs) : contract(rhs);
          lift[n][src_.generator_offset(static_cast<int>(n), t) + j] = std::move(value);
        }
      }
    }
    InducedChainMap out{src_, dst_, {}, false};
    for (std::size_t n = 0; n <= top_; ++n)
      out.maps.push_back(push(n, lift[n]));
    out.chain_map_verified = verify(out);
    return out;
  }

private:
  std::size_t anchor(std::size_t n, std::size_t t) const {
    return n == 0 ? src_.tuple(0, t)[0] : c_.left().range(src_.tuple(static_cast<int>(n), t)[0]);
  }

  // s_{-1} f(a_j): each summand coefficient b becomes (1, b) in Ind Q_0.
  Element unit_image(std::size_t x, std::size_t j) const {
    Element e;
    const auto &col = f_.components[x];
    for (std::size_t k : ind_.summands[x]) {
      const std::size_t w = b_.fibres[ind_.orbit_sigma[k]].generators();
      for (std::size_t i = 0; i < w; ++i) {
        const auto &v = col(ind_.summand_offset[k] + i, j);
        if (sgn(v) != 0) {
          Key key;
          key.orbit = static_cast<std::uint32_t>(k);
          key.coef = static_cast<std::uint32_t>(i);
          key.h[0] = static_cast<std::uint32_t>(ind_.orbit_sigma[k]);
          e.emplace_back(key, to_i64(v));
        }
      }
    }
    return e;
  }

  // F_{n-1} applied to d(1, g1..gn, a_j).
  Element boundary_image(std::size_t n, std::size_t t, std::size_t j, const std::vector<Element> &prev) const {
    const auto &g = c_.left();
    auto tup = src_.tuple(static_cast<int>(n), t);
    Element acc;
    auto add_scaled = [&](const Element &e, std::int64_t s) {
      for (const auto &[k, v] : e)
        acc.emplace_back(k, checked_mul(v, s));
    };
    // face 0: g1 . F(g2..gn, a)
    {
      const std::size_t idx = src_.tuple_index(g.source(tup[0]), tup.data() + 1, n - 1);
      add_scaled(act(tup[0], prev[src_.generator_offset(static_cast<int>(n - 1), idx) + j]), 1);
    }
    std::vector<std::size_t> scratch(n);
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t len = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i)
          continue;
        scratch[len++] = k == i - 1 ? g.compose(tup[i - 1], tup[i]) : tup[k];
      }
      const std::size_t idx = src_.tuple_index(g.range(tup[0]), scratch.data(), n - 1);
      if (idx == npos)
        continue;
      add_scaled(prev[src_.generator_offset(static_cast<int>(n - 1), idx) + j], i % 2 ? -1 : 1);
    }
    const std::size_t il = src_.tuple_index(g.range(tup[0]), tup.data(), n - 1);
    const std::int64_t sign = n % 2 ? -1 : 1;
    for (const auto &[i, v] : a_act_[tup[n - 1]][j])
      add_scaled(prev[src_.generator_offset(static_cast<int>(n - 1), il) + i], checked_mul(sign, v));
    normalize(acc);
    return acc;
  }

  // Length of the arrow list of a key in degree n is n + 1.
  Element act(std::size_t x, const Element &e) const {
    Element out;
    out.reserve(e.size());
    const auto &h = c_.right();
    for (const auto &[k, v] : e) {
      Key key = k;
      const auto [k2, tr] = move_[x][k.orbit];
      key.orbit = k2;
      key.h[0] = static_cast<std::uint32_t>(h.compose(tr, k.h[0]));
      out.emplace_back(key, v);
    }
    normalize(out);
    return out;
  }

  // Contracting homotopy (h0..hn) -> (1, h0..hn), zero when h0 is a unit.
  Element contract(const Element &e) const {
    const auto &h = c_.right();
    Element out;
    for (const auto &[k, v] : e) {
      if (h.is_unit(k.h[0]))
        continue;
      Key key = k;
      for (std::size_t i = kMaxLift; i >= 1; --i)
        key.h[i] = k.h[i - 1];
      key.h[0] = static_cast<std::uint32_t>(h.range(k.h[0]));
      out.emplace_back(key, v);
    }
    normalize(out);
    return out;
  }

  // Integer solve of d X = rhs inside the fibre (Ind Q_n)_x.
  Element solve(std::size_t n, const Element &rhs, std::size_t x) const {
    const auto basis = fibre_basis(n, x);
    if (basis.size() > opt_.max_fibre)
      throw std::length_error("lift: fibre of dimension " + std::to_string(basis.size()) + " exceeds the solve limit");
    std::vector<Key> lower = n == 0 ? std::vector<Key>{} : fibre_basis(n - 1, x);
    std::map<Key, std::size_t> lower_index;
    std::size_t lower_dim;
    if (n == 0) {
      lower_dim = ind_.module.fibres[x].generators();
    } else {
      for (std::size_t i = 0; i < lower.size(); ++i)
        lower_index[lower[i]] = i;
      lower_dim = lower.size();
    }
    std::vector<IntVector> cols;
    for (const auto &key : basis) {
      IntVector col(lower_dim, 0);
      for (const auto &[k, v] : boundary_of(n, key)) {
        const std::size_t row = n == 0 ? ind_.summand_offset[k.orbit] + k.coef : lower_index.at(k);
        col[row] += v;
      }
      cols.push_back(std::move(col));
    }
    // Relations of the target fibre become extra unknowns.
    std::size_t extra = 0;
    if (n == 0) {
      const auto &p = ind_.module.fibres[x].presentation();
      for (std::size_t j = 0; j < p.cols(); ++j, ++extra)
        cols.push_back(p.column(j));
    } else {
      for (std::size_t i = 0; i < lower.size(); ++i) {
        const auto &p = b_.fibres[coefficient_unit_of(n - 1, lower[i])].presentation();
        for (std::size_t j = 0; j < p.cols(); ++j) {
          if (sgn(p(lower[i].coef, j)) == 0)
            continue;
          // Full relation column of this tuple block.
          IntVector col(lower_dim, 0);
          for (std::size_t r = 0; r < p.rows(); ++r) {
            Key other = lower[i];
            other.coef = static_cast<std::uint32_t>(r);
            col[lower_index.at(other)] = p(r, j);
          }
          cols.push_back(std::move(col));
          ++extra;
        }
      }
    }
    IntMatrix a = IntMatrix::from_columns(lower_dim, cols);
    IntVector target(lower_dim, 0);
    for (const auto &[k, v] : rhs) {
      const std::size_t row = n == 0 ? ind_.summand_offset[k.orbit] + k.coef : lower_index.at(k);
      target[row] += v;
    }
    std::vector<std::size_t> order(a.cols());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = opt_.reverse_order ? (i < basis.size() ? basis.size() - 1 - i : i) : i;
    auto sol = zlinalg::solve_integer_ordered(a, IntMatrix::column_vector(target), order);
    if (!sol)
      throw std::logic_error("lift: no integer solution in degree " + std::to_string(n) +
                             " (exactness of the induced resolution violated)");
    Element out;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (sgn((*sol)(i, 0)) != 0)
        out.emplace_back(basis[i], to_i64((*sol)(i, 0)));
    return out;
  }

  std::size_t coefficient_unit_of(std::size_t n, const Key &k) const {
    return c_.right().source(k.h[n]);
  }

  // Normalized basis of (Ind Q_n)_x.
  std::vector<Key> fibre_basis(std::size_t n, std::size_t x) const {
    const auto &h = c_.right();
    std::vector<Key> out;
    for (std::size_t k : ind_.summands[x]) {
      Key key;
      key.orbit = static_cast<std::uint32_t>(k);
      std::vector<Key> frontier;
      for (std::size_t h0 : h.arrows_into(ind_.orbit_sigma[k])) {
        key.h[0] = static_cast<std::uint32_t>(h0);
        frontier.push_back(key);
      }
      for (std::size_t d = 1; d <= n; ++d) {
        std::vector<Key> next;
        for (const auto &f : frontier)
          for (std::size_t a : h.arrows_into(h.source(f.h[d - 1]))) {
            if (h.is_unit(a))
              continue;
            Key e = f;
            e.h[d] = static_cast<std::uint32_t>(a);
            next.push_back(e);
          }
        frontier = std::move(next);
      }
      for (auto &f : frontier)
        for (std::size_t j = 0; j < b_.fibres[h.source(f.h[n])].generators(); ++j) {
          f.coef = static_cast<std::uint32_t>(j);
          out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Differential of Ind Q on one basis key; in degree 0 the augmentation,
  // keyed by (orbit, coefficient) with h unused.
  Element boundary_of(std::size_t n, const Key &key) const {
    const auto &h = c_.right();
    Element out;
    if (n == 0) {
      for (const auto &[i, v] : b_act_[key.h[0]][key.coef]) {
        Key k;
        k.orbit = key.orbit;
        k.coef = i;
        out.emplace_back(k, v);
      }
      normalize(out);
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t comp = h.compose(key.h[i], key.h[i + 1]);
      if (i >= 1 && h.is_unit(comp))
        continue;
      Key k;
      k.orbit = key.orbit;
      k.coef = key.coef;
      std::size_t len = 0;
      for (std::size_t p = 0; p <= n; ++p) {
        if (p == i + 1)
          continue;
        k.h[len++] = static_cast<std::uint32_t>(p == i ? comp : key.h[p]);
      }
      out.emplace_back(k, i % 2 ? -1 : 1);
    }
    const std::int64_t sign = n % 2 ? -1 : 1;
    for (const auto &[i, v] : b_act_[key.h[n]][key.coef]) {
      Key k;
      k.orbit = key.orbit;
      k.coef = i;
      for (std::size_t p = 0; p < n; ++p)
        k.h[p] = key.h[p];
      out.emplace_back(k, sign * v);
    }
    normalize(out);
    return out;
  }

  // Coinvariants and delta: (w, h0, h1..hn, b) -> (h1..hn, b) at s(h0).
  SparseMatrix push(std::size_t n, const std::vector<Element> &lift) {
    const auto &h = c_.right();
    SparseMatrix out(dst_.rank(static_cast<int>(n)), src_.rank(static_cast<int>(n)));
    std::vector<std::size_t> arrows(n);
    for (std::size_t col = 0; col < lift.size(); ++col)
      for (const auto &[k, v] : lift[col]) {
        for (std::size_t p = 0; p < n; ++p)
          arrows[p] = k.h[p + 1];
        const std::size_t idx = dst_.tuple_index(h.source(k.h[0]), arrows.data(), n);
        if (idx == npos)
          throw std::logic_error("lift: degenerate chain in the normalized resolution");
        out.add(dst_.generator_offset(static_cast<int>(n), idx) + k.coef, col, v);
      }
    return out;
  }

  bool verify(const InducedChainMap &m) const {
    for (std::size_t n = 1; n <= top_; ++n) {
      auto lhs = zlinalg::multiply(dst_.complex().differential(static_cast<int>(n)), m.maps[n]);
      auto rhs = zlinalg::multiply(m.maps[n - 1], src_.complex().differential(static_cast<int>(n)));
      if (dst_.complex().is_free()) {
        for (std::size_t j = 0; j < lhs.cols(); ++j)
          if (lhs.column(j) != rhs.column(j))
            return false;
      } else {
        auto diff = lhs.to_dense() - rhs.to_dense();
        auto rel = zlinalg::Lattice::generated_by(dst_.complex().relations(static_cast<int>(n - 1)));
        if (!rel.contains_columns(diff))
          return false;
      }
    }
    return true;
  }

  const Correspondence &c_;
  const GModule &a_;
  const GModule &b_;
  const GModuleMap &f_;
  std::size_t top_;
  LiftOptions opt_;
  BarComplex src_, dst_;
  gmodule::InducedModule ind_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> move_;
  std::vector<SparseColumns> a_act_, b_act_;
};

}  // namespace

InducedChainMap induced_chain_map(const Correspondence &c, const GModule &a, const GModule &b, const GModuleMap &f,
                                  int truncation, const LiftOptions &options) {
  if (!(a.groupoid == c.left()) || !(b.groupoid == c.right()))
    throw std::invalid_argument("induced_chain_map: modules do not sit over the groupoids of the correspondence");
  Lifter l(c, a, b, f, truncation, options);
  return l.run();
}

std::vector<InducedHomologyMap> homology_maps(const InducedChainMap &chain) {
  std::vector<InducedHomologyMap> out;
  for (int n = 0; n + 1 < static_cast<int>(chain.maps.size()); ++n) {
    auto s = zlinalg::homology_subquotient(chain.source.complex(), n);
    auto t = zlinalg::homology_subquotient(chain.target.complex(), n);
    InducedHomologyMap m;
    m.degree = n;
    m.source = s.group();
    m.target = t.group();
    m.matrix = s.induced_map(chain.maps[static_cast<std::size_t>(n)].to_dense(), t);
    m.isomorphism = m.source.isomorphic(m.target) && zlinalg::is_isomorphism(m.matrix, m.source, m.target);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<InducedHomologyMap> induced_map_homology(const Correspondence &c, const GModule &a, const GModule &b,
                                                     const GModuleMap &f, int truncation, const LiftOptions &options) {
  auto chain = induced_chain_map(c, a, b, f, truncation, options);
  if (!chain.chain_map_verified)
    throw std::logic_error("induced_map_homology: lifted maps do not commute with the differentials");
  return homology_maps(chain);
}

InducedHomologyMap induced_map_homology(const Correspondence &c, const GModule &a, const GModule &b,
                                        const GModuleMap &f, int n, bool) {
  return induced_map_homology(c, a, b, f, n + 1).back();
}

DiscreteHomology homology_of_discrete_semigroup_groupoid(const invsgp::InverseSemigroup &s, int n) {
  DiscreteHomology out;
  const auto d = groupoid::discrete_groupoid(s);
  out.bar = groupoid_homology(gmodule::constant_module(d.groupoid, FgAbGroup::free(1)), n);
  std::vector<FgAbGroup> parts;
  const auto orbits = invsgp::orbits_on_idempotents(s);
  for (std::size_t k = 0; k < orbits.count(); ++k) {
    const auto stab = invsgp::stabilizer_subgroup(s, orbits.representative(k));
    const auto gg = groupoid::group_groupoid(stab.group);
    parts.push_back(groupoid_homology(gmodule::constant_module(gg, FgAbGroup::free(1)), n));
  }
  out.orbit_sum = parts.empty() ? FgAbGroup::free(0) : zlinalg::direct_sum(parts);
  out.agree = out.bar.isomorphic(out.orbit_sum);
  if (!out.agree)
    throw std::logic_error("discrete groupoid homology: bar complex gives " + out.bar.to_string() +
                           ", orbit decomposition gives " + out.orbit_sum.to_string());
  return out;
}

}  // namespace etale::homology
