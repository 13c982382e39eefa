#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace etale {

// Finite group given by its multiplication table on 0..n-1.
class FiniteGroup {
public:
  FiniteGroup();
  // Throws std::invalid_argument if the table is not a group.
  explicit FiniteGroup(std::vector<std::vector<std::size_t>> table);

  static FiniteGroup trivial() { return FiniteGroup(); }
  static FiniteGroup cyclic(std::size_t n);
  static FiniteGroup direct_product(const FiniteGroup &a, const FiniteGroup &b);

  std::size_t order() const { return table_.size(); }
  std::size_t identity() const { return identity_; }
  std::size_t mul(std::size_t a, std::size_t b) const { return table_[a][b]; }
  std::size_t inverse(std::size_t a) const { return inverse_[a]; }
  const std::vector<std::vector<std::size_t>> &table() const { return table_; }

  bool is_trivial() const { return order() == 1; }
  bool is_abelian() const;
  std::size_t element_order(std::size_t a) const;
  // Sorted closure of the given elements.
  std::vector<std::size_t> generated(const std::vector<std::size_t> &gens) const;
  // Every subgroup, each a sorted element list; ordered by size then lexicographically.
  std::vector<std::vector<std::size_t>> subgroups() const;
  // Restriction of the table to a subgroup, reindexed in the given order.
  FiniteGroup subgroup(const std::vector<std::size_t> &elements) const;

private:
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
};

// Backtracking search for an isomorphism a -> b (element map), small groups only.
std::optional<std::vector<std::size_t>> find_isomorphism(const FiniteGroup &a, const FiniteGroup &b);
inline bool isomorphic(const FiniteGroup &a, const FiniteGroup &b) { return find_isomorphism(a, b).has_value(); }

}  // namespace etale
