#include "etale/finite_group.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace etale {

FiniteGroup::FiniteGroup() : table_{{0}}, inverse_{0}, identity_(0) {}

FiniteGroup::FiniteGroup(std::vector<std::vector<std::size_t>> table) : table_(std::move(table)) {
  const std::size_t n = table_.size();
  if (n == 0)
    throw std::invalid_argument("FiniteGroup: empty table");
  for (const auto &row : table_) {
    if (row.size() != n)
      throw std::invalid_argument("FiniteGroup: table is not square");
    for (std::size_t x : row)
      if (x >= n)
        throw std::invalid_argument("FiniteGroup: entry out of range");
  }
  std::size_t e = n;
  for (std::size_t a = 0; a < n && e == n; ++a) {
    bool ok = true;
    for (std::size_t b = 0; b < n && ok; ++b)
      ok = table_[a][b] == b && table_[b][a] == b;
    if (ok)
      e = a;
  }
  if (e == n)
    throw std::invalid_argument("FiniteGroup: no identity element");
  identity_ = e;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
          throw std::invalid_argument("FiniteGroup: product is not associative");
  inverse_.assign(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (table_[a][b] == e && table_[b][a] == e)
        inverse_[a] = b;
  if (std::find(inverse_.begin(), inverse_.end(), n) != inverse_.end())
    throw std::invalid_argument("FiniteGroup: element without inverse");
}

FiniteGroup FiniteGroup::cyclic(std::size_t n) {
  if (n == 0)
    throw std::invalid_argument("FiniteGroup::cyclic: order must be positive");
  std::vector<std::vector<std::size_t>> t(n, std::vector<std::size_t>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      t[a][b] = (a + b) % n;
  return FiniteGroup(std::move(t));
}

FiniteGroup FiniteGroup::direct_product(const FiniteGroup &a, const FiniteGroup &b) {
  const std::size_t n = a.order(), m = b.order();
  std::vector<std::vector<std::size_t>> t(n * m, std::vector<std::size_t>(n * m));
  for (std::size_t x = 0; x < n * m; ++x)
    for (std::size_t y = 0; y < n * m; ++y)
      t[x][y] = a.mul(x / m, y / m) * m + b.mul(x % m, y % m);
  return FiniteGroup(std::move(t));
}

bool FiniteGroup::is_abelian() const {
  for (std::size_t a = 0; a < order(); ++a)
    for (std::size_t b = a + 1; b < order(); ++b)
      if (mul(a, b) != mul(b, a))
        return false;
  return true;
}

std::size_t FiniteGroup::element_order(std::size_t a) const {
  std::size_t k = 1, x = a;
  while (x != identity_) {
    x = mul(x, a);
    ++k;
  }
  return k;
}

std::vector<std::size_t> FiniteGroup::generated(const std::vector<std::size_t> &gens) const {
  std::vector<char> in(order(), 0);
  std::vector<std::size_t> out{identity_};
  in[identity_] = 1;
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t g : gens) {
      std::size_t y = mul(out[k], g);
      if (!in[y]) {
        in[y] = 1;
        out.push_back(y);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> FiniteGroup::subgroups() const {
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> frontier{generated({})};
  seen.insert(frontier.front());
  while (!frontier.empty()) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto &h : frontier)
      for (std::size_t g = 0; g < order(); ++g) {
        if (std::binary_search(h.begin(), h.end(), g))
          continue;
        std::vector<std::size_t> gens = h;
        gens.push_back(g);
        auto k = generated(gens);
        if (seen.insert(k).second)
          next.push_back(std::move(k));
      }
    frontier = std::move(next);
  }
  std::vector<std::vector<std::size_t>> out(seen.begin(), seen.end());
  std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.size() < b.size(); });
  return out;
}

FiniteGroup FiniteGroup::subgroup(const std::vector<std::size_t> &elements) const {
  std::vector<std::size_t> pos(order(), order());
  for (std::size_t k = 0; k < elements.size(); ++k)
    pos[elements[k]] = k;
  std::vector<std::vector<std::size_t>> t(elements.size(), std::vector<std::size_t>(elements.size()));
  for (std::size_t a = 0; a < elements.size(); ++a)
    for (std::size_t b = 0; b < elements.size(); ++b) {
      std::size_t p = pos[mul(elements[a], elements[b])];
      if (p == order())
        throw std::invalid_argument("FiniteGroup::subgroup: not closed under the product");
      t[a][b] = p;
    }
  return FiniteGroup(std::move(t));
}

std::optional<std::vector<std::size_t>> find_isomorphism(const FiniteGroup &a, const FiniteGroup &b) {
  const std::size_t n = a.order();
  if (n != b.order())
    return std::nullopt;
  std::vector<std::size_t> oa(n), ob(n);
  for (std::size_t x = 0; x < n; ++x) {
    oa[x] = a.element_order(x);
    ob[x] = b.element_order(x);
  }
  auto sa = oa, sb = ob;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb)
    return std::nullopt;
  std::vector<std::size_t> map(n, n);
  std::vector<char> used(n, 0);
  map[a.identity()] = b.identity();
  used[b.identity()] = 1;
  std::function<bool(std::size_t)> extend = [&](std::size_t x) -> bool {
    if (x == n) {
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
          if (map[a.mul(p, q)] != b.mul(map[p], map[q]))
            return false;
      return true;
    }
    if (map[x] != n)
      return extend(x + 1);
    for (std::size_t y = 0; y < n; ++y) {
      if (used[y] || ob[y] != oa[x])
        continue;
      map[x] = y;
      used[y] = 1;
      bool ok = true;
      for (std::size_t p = 0; p <= x && ok; ++p)
        for (std::size_t q = 0; q <= x && ok; ++q) {
          std::size_t pq = a.mul(p, q);
          if (map[p] != n && map[q] != n && map[pq] != n)
            ok = map[pq] == b.mul(map[p], map[q]);
        }
      if (ok && extend(x + 1))
        return true;
      map[x] = n;
      used[y] = 0;
    }
    return false;
  };
  if (!extend(0))
    return std::nullopt;
  return map;
}

}  // namespace etale
