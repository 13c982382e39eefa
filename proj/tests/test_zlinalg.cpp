#include <doctest.h>

#include <random>

#include "etale/zlinalg.hpp"

using namespace etale::zlinalg;

namespace {

IntMatrix random_matrix(std::mt19937_64 &rng, std::size_t r, std::size_t c, long lo, long hi, double density = 1.0) {
  std::uniform_int_distribution<long> val(lo, hi);
  std::uniform_real_distribution<double> coin(0, 1);
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (coin(rng) < density)
        m(i, j) = val(rng);
  return m;
}

// Oracle: determinantal divisors via gcd of all k x k minors.
Int minor_gcd(const IntMatrix &m, std::size_t k) {
  Int g = 0;
  std::vector<std::size_t> rs(k), cs(k);
  auto next = [](std::vector<std::size_t> &v, std::size_t n) {
    std::size_t k = v.size();
    for (std::size_t i = k; i-- > 0;)
      if (v[i] < n - k + i) {
        ++v[i];
        for (std::size_t j = i + 1; j < k; ++j)
          v[j] = v[j - 1] + 1;
        return true;
      }
    return false;
  };
  for (std::size_t i = 0; i < k; ++i)
    rs[i] = i;
  do {
    for (std::size_t i = 0; i < k; ++i)
      cs[i] = i;
    do {
      Int d = determinant(m.select_rows(rs).select_columns(cs));
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
    } while (next(cs, m.cols()));
  } while (next(rs, m.rows()));
  return g;
}

std::vector<Int> invariant_factors_oracle(const IntMatrix &m) {
  std::vector<Int> out;
  Int prev = 1;
  for (std::size_t k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
    Int g = minor_gcd(m, k);
    if (g == 0)
      break;
    out.push_back(g / prev);
    prev = g;
  }
  return out;
}

ChainComplex complex_from(int min_degree, std::vector<std::size_t> ranks, const std::vector<IntMatrix> &ds) {
  std::vector<SparseMatrix> sp;
  for (const auto &d : ds)
    sp.push_back(SparseMatrix::from_dense(d));
  return ChainComplex(min_degree, std::move(ranks), std::move(sp));
}

}  // namespace

TEST_CASE("smith form of a small matrix") {
  IntMatrix m{{2, 4}, {6, 8}};
  auto f = smith_normal_form(m, kWantAll);
  CHECK(f.diagonal == std::vector<Int>{2, 4});
  CHECK(f.u * m * f.v == f.s);
  CHECK(f.u * f.u_inv == IntMatrix::identity(2));
  CHECK(f.v * f.v_inv == IntMatrix::identity(2));
}

TEST_CASE("smith form of zero and empty matrices") {
  CHECK(smith_normal_form(IntMatrix(3, 2)).rank == 0);
  CHECK(smith_normal_form(IntMatrix(0, 4)).diagonal.empty());
  CHECK(smith_normal_form(IntMatrix(4, 0)).rank == 0);
}

TEST_CASE("smith form property: transforms, divisibility, minors") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    IntMatrix m = random_matrix(rng, r, c, -9, 9, 0.6);
    auto f = smith_normal_form(m, kWantAll);
    REQUIRE(f.u * m * f.v == f.s);
    REQUIRE(is_unimodular(f.u));
    REQUIRE(is_unimodular(f.v));
    REQUIRE(f.u * f.u_inv == IntMatrix::identity(r));
    REQUIRE(f.v_inv * f.v == IntMatrix::identity(c));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (i != j)
          REQUIRE(f.s(i, j) == 0);
    for (std::size_t i = 0; i + 1 < f.rank; ++i)
      REQUIRE(mpz_divisible_p(f.diagonal[i + 1].get_mpz_t(), f.diagonal[i].get_mpz_t()));
    for (std::size_t i = 0; i < f.rank; ++i)
      REQUIRE(f.diagonal[i] > 0);
    auto oracle = invariant_factors_oracle(m);
    REQUIRE(oracle.size() == f.rank);
    for (std::size_t i = 0; i < f.rank; ++i)
      REQUIRE(oracle[i] == f.diagonal[i]);
  }
}

TEST_CASE("smith form handles large entries without overflow") {
  IntMatrix m(2, 2);
  m(0, 0) = Int("123456789012345678901234567890");
  m(0, 1) = Int("987654321098765432109876543210");
  m(1, 0) = 7;
  m(1, 1) = 11;
  auto f = smith_normal_form(m, kWantAll);
  CHECK(f.u * m * f.v == f.s);
  CHECK(f.diagonal[0] * f.diagonal[1] == abs(determinant(m)));
}

TEST_CASE("integer solvability") {
  CHECK_FALSE(solve_integer(IntMatrix{{2}}, IntVector{3}).has_value());
  auto x = solve_integer(IntMatrix{{2, 3}}, IntVector{1});
  REQUIRE(x.has_value());
  CHECK(IntMatrix{{2, 3}} * *x == IntVector{1});
  CHECK_THROWS_AS(solve_integer(IntMatrix{{2, 3}}, IntVector{1, 2}), std::invalid_argument);
}

TEST_CASE("solve property: random consistent systems") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    IntMatrix a = random_matrix(rng, r, c, -6, 6, 0.7);
    IntMatrix x0 = random_matrix(rng, c, 1, -5, 5);
    IntMatrix b = a * x0;
    auto x = solve_integer(a, b);
    REQUIRE(x.has_value());
    REQUIRE(a * *x == b);
    std::vector<std::size_t> rev(c);
    for (std::size_t k = 0; k < c; ++k)
      rev[k] = c - 1 - k;
    auto y = solve_integer_ordered(a, b, rev);
    REQUIRE(y.has_value());
    REQUIRE(a * *y == b);
  }
}

TEST_CASE("lattice membership, kernel and preimage") {
  Lattice l = Lattice::generated_by(IntMatrix{{2, 0}, {0, 3}});
  CHECK(l.contains(IntVector{4, 3}));
  CHECK_FALSE(l.contains(IntVector{1, 0}));
  Lattice k = kernel(IntMatrix{{1, 1, 1}});
  CHECK(k.rank() == 2);
  CHECK(k.contains(IntVector{1, -1, 0}));
  // x with 2x in 4Z is 2Z
  Lattice p = preimage(IntMatrix{{2}}, Lattice::generated_by(IntMatrix{{4}}));
  CHECK(p == Lattice::generated_by(IntMatrix{{2}}));
  Lattice i = intersect(Lattice::generated_by(IntMatrix{{4}}), Lattice::generated_by(IntMatrix{{6}}));
  CHECK(i == Lattice::generated_by(IntMatrix{{12}}));
}

TEST_CASE("lattice property: preimage membership matches direct test") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 1 + rng() % 3, m = 1 + rng() % 3;
    IntMatrix f = random_matrix(rng, m, n, -4, 4);
    Lattice target = Lattice::generated_by(random_matrix(rng, m, 1 + rng() % 3, -4, 4));
    Lattice pre = preimage(f, target);
    for (int s = 0; s < 20; ++s) {
      IntMatrix x = random_matrix(rng, n, 1, -6, 6);
      REQUIRE(pre.contains(x.column(0)) == target.contains((f * x).column(0)));
    }
  }
}

TEST_CASE("finitely generated abelian groups") {
  FgAbGroup g(IntMatrix{{2, 0}, {0, 4}, {0, 0}});
  CHECK(g.free_rank() == 1);
  CHECK(g.factors() == std::vector<Int>{2, 4});
  CHECK(g.to_string() == "Z + Z/2 + Z/4");
  CHECK(FgAbGroup(IntMatrix{{2, 0}, {0, 3}}).isomorphic(FgAbGroup::cyclic(6)));
  CHECK(FgAbGroup().is_trivial());
}

TEST_CASE("isomorphism test") {
  auto z2 = FgAbGroup::free(2);
  CHECK(is_isomorphism(IntMatrix{{1, 1}, {0, 1}}, z2, z2));
  auto z = FgAbGroup::free(1);
  CHECK_FALSE(is_isomorphism(IntMatrix{{2}}, z, z));
  auto z6 = FgAbGroup::cyclic(6);
  CHECK(is_isomorphism(IntMatrix{{5}}, z6, z6));
  CHECK_FALSE(is_isomorphism(IntMatrix{{2}}, z6, z6));
  CHECK_THROWS_AS(is_isomorphism(IntMatrix{{1}}, FgAbGroup::cyclic(2), FgAbGroup::cyclic(3)), std::invalid_argument);
  auto inv = inverse_map(IntMatrix{{5}}, z6, z6);
  CHECK(maps_equal(IntMatrix{{5}} * inv, IntMatrix{{1}}, z6));
}

TEST_CASE("isomorphism property: unimodular maps are isomorphisms") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng() % 4;
    IntMatrix u = IntMatrix::identity(n);
    for (int s = 0; s < 6; ++s) {
      std::size_t i = rng() % n, j = rng() % n;
      if (i == j)
        continue;
      long q = static_cast<long>(rng() % 5) - 2;
      for (std::size_t k = 0; k < n; ++k)
        u(i, k) += q * u(j, k);
    }
    auto g = FgAbGroup::free(n);
    REQUIRE(is_isomorphism(u, g, g));
    IntMatrix d = u;
    for (std::size_t k = 0; k < n; ++k)
      d(0, k) *= 3;
    REQUIRE_FALSE(is_isomorphism(d, g, g));
  }
}

TEST_CASE("homology of small complexes") {
  // 0 -> Z --x2--> Z -> 0 in degrees 1, 0
  auto c = complex_from(0, {1, 1}, {IntMatrix{{2}}});
  CHECK(homology_at(c, 0).isomorphic(FgAbGroup::cyclic(2)));
  CHECK(homology_at(c, 1).is_trivial());
  CHECK(homology_subquotient(c, 0).group().isomorphic(FgAbGroup::cyclic(2)));

  // hollow triangle: vertices a, b, c; edges ab, bc, ca
  IntMatrix d1{{-1, 0, 1}, {1, -1, 0}, {0, 1, -1}};
  auto t = complex_from(0, {3, 3}, {d1});
  CHECK(homology_at(t, 0).isomorphic(FgAbGroup::free(1)));
  CHECK(homology_at(t, 1).isomorphic(FgAbGroup::free(1)));
  CHECK_THROWS_AS(homology_at(t, 5), std::out_of_range);
}

TEST_CASE("chain complex rejects d o d != 0") {
  CHECK_THROWS_AS(complex_from(0, {1, 1, 1}, {IntMatrix{{1}}, IntMatrix{{1}}}), std::invalid_argument);
}

TEST_CASE("presented complex with torsion chain groups") {
  // Z/4 --x2--> Z/4, in degrees 1, 0
  std::vector<SparseMatrix> d{SparseMatrix::from_dense(IntMatrix{{2}})};
  ChainComplex c(0, {1, 1}, d, {IntMatrix{{4}}, IntMatrix{{4}}});
  CHECK_FALSE(c.is_free());
  CHECK(homology_at(c, 0).isomorphic(FgAbGroup::cyclic(2)));
  CHECK(homology_at(c, 1).isomorphic(FgAbGroup::cyclic(2)));
}

TEST_CASE("homology property: sparse reduction matches dense subquotient") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t a = 1 + rng() % 5, b = 1 + rng() % 6, c = 1 + rng() % 5;
    // d1 = random, d2 = kernel-valued: product of kernel basis with random.
    IntMatrix d1 = random_matrix(rng, a, b, -2, 2, 0.5);
    Lattice k = kernel(d1);
    IntMatrix d2(b, c);
    if (k.rank() > 0)
      d2 = k.basis() * random_matrix(rng, k.rank(), c, -2, 2, 0.5);
    auto cx = complex_from(0, {a, b, c}, {d1, d2});
    for (int n = 0; n <= 2; ++n)
      REQUIRE(homology_at(cx, n).isomorphic(homology_subquotient(cx, n).group()));
    // Euler characteristic
    long chi = long(a) - long(b) + long(c);
    long hchi = 0;
    for (int n = 0; n <= 2; ++n)
      hchi += (n % 2 ? -1 : 1) * long(homology_at(cx, n).free_rank());
    REQUIRE(chi == hchi);
  }
}

TEST_CASE("sparse matrix arithmetic") {
  SparseMatrix s(2, 2);
  s.add(1, 0, 3);
  s.add(0, 0, 2);
  s.add(1, 0, -3);
  CHECK(s.nonzeros() == 1);
  CHECK(s.to_dense() == IntMatrix{{2, 0}, {0, 0}});
  SparseMatrix big(1, 1);
  big.add(0, 0, INT64_MAX);
  CHECK_THROWS_AS(big.add(0, 0, 1), std::overflow_error);
}
