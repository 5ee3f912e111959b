#pragma once

#include <map>
#include <vector>

namespace beamuq {

//! Vector of per-dimension approximation levels; every entry is >= 1.
using MultiIndex = std::vector<int>;

//! Finite, duplicate-free set of multi-indices kept in lexicographic order.
class MultiIndexSet {
public:
  MultiIndexSet() = default;
  explicit MultiIndexSet(std::vector<MultiIndex> indices);

  //! Classical isotropic Smolyak set { i >= 1 : sum_n (i_n - 1) <= w }.
  //! The offset keeps w = 0 at the single-point grid.
  static MultiIndexSet smolyak(int dim, int level);

  bool contains(const MultiIndex& index) const;
  void insert(const MultiIndex& index);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  int dim() const;

  const std::vector<MultiIndex>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

private:
  std::vector<MultiIndex> indices_;
};

//! True iff every backward neighbor (entries kept >= 1) of every member
//! is itself a member.
bool is_downward_closed(const MultiIndexSet& set);

//! Combination-technique coefficients c_i = sum over binary forward shifts
//! j of (-1)^|j| for i+j in the set. Indices with c_i == 0 are omitted;
//! absence means zero. Throws std::invalid_argument for sets that are not
//! downward-closed.
std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set);

//! All indices outside the set whose backward neighbors all lie inside:
//! the admissible candidates for growing the set one index at a time.
MultiIndexSet reduced_margin(const MultiIndexSet& set);

}  // namespace beamuq
