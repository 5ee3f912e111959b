#include "beamuq/multi_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace beamuq {

MultiIndexSet::MultiIndexSet(std::vector<MultiIndex> indices) : indices_(std::move(indices)) {
  for (const auto& idx : indices_) {
    if (idx.empty()) throw std::invalid_argument("MultiIndexSet: empty multi-index");
    if (idx.size() != indices_.front().size()) {
      throw std::invalid_argument("MultiIndexSet: inconsistent dimensions");
    }
    for (int e : idx) {
      if (e < 1) throw std::invalid_argument("MultiIndexSet: entries must be >= 1");
    }
  }
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

namespace {

void enumerate_smolyak(int dim, int budget, MultiIndex& current,
                       std::vector<MultiIndex>& out) {
  const int n = static_cast<int>(current.size());
  if (n == dim) {
    out.push_back(current);
    return;
  }
  for (int level = 1; level - 1 <= budget; ++level) {
    current.push_back(level);
    enumerate_smolyak(dim, budget - (level - 1), current, out);
    current.pop_back();
  }
}

}  // namespace

MultiIndexSet MultiIndexSet::smolyak(int dim, int level) {
  if (dim < 1) throw std::invalid_argument("smolyak: dim must be >= 1");
  if (level < 0) throw std::invalid_argument("smolyak: level must be >= 0");
  std::vector<MultiIndex> out;
  MultiIndex current;
  enumerate_smolyak(dim, level, current, out);
  return MultiIndexSet(std::move(out));
}

bool MultiIndexSet::contains(const MultiIndex& index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

void MultiIndexSet::insert(const MultiIndex& index) {
  if (!indices_.empty() && index.size() != indices_.front().size()) {
    throw std::invalid_argument("MultiIndexSet::insert: dimension mismatch");
  }
  for (int e : index) {
    if (e < 1) throw std::invalid_argument("MultiIndexSet::insert: entries must be >= 1");
  }
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it != indices_.end() && *it == index) return;
  indices_.insert(it, index);
}

int MultiIndexSet::dim() const {
  if (indices_.empty()) return 0;
  return static_cast<int>(indices_.front().size());
}

bool is_downward_closed(const MultiIndexSet& set) {
  for (const auto& idx : set) {
    MultiIndex neighbor = idx;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] == 1) continue;
      neighbor[k] -= 1;
      const bool present = set.contains(neighbor);
      neighbor[k] += 1;
      if (!present) return false;
    }
  }
  return true;
}

std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set) {
  if (!is_downward_closed(set)) {
    throw std::invalid_argument("combination_coefficients: set is not downward-closed");
  }
  std::map<MultiIndex, int> coefficients;
  const int dim = set.dim();
  for (const auto& idx : set) {
    int c = 0;
    MultiIndex shifted = idx;
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      int bits = 0;
      for (int k = 0; k < dim; ++k) {
        if (mask & (1u << k)) {
          shifted[static_cast<std::size_t>(k)] += 1;
          ++bits;
        }
      }
      if (set.contains(shifted)) c += (bits % 2 == 0) ? 1 : -1;
      for (int k = 0; k < dim; ++k) {
        if (mask & (1u << k)) shifted[static_cast<std::size_t>(k)] -= 1;
      }
    }
    if (c != 0) coefficients.emplace(idx, c);
  }
  return coefficients;
}

MultiIndexSet reduced_margin(const MultiIndexSet& set) {
  if (set.empty()) {
    throw std::invalid_argument("reduced_margin: set must be nonempty");
  }
  MultiIndexSet margin;
  for (const auto& idx : set) {
    MultiIndex forward = idx;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      forward[k] += 1;
      if (!set.contains(forward) && !margin.contains(forward)) {
        bool admissible = true;
        MultiIndex backward = forward;
        for (std::size_t l = 0; l < forward.size() && admissible; ++l) {
          if (forward[l] == 1) continue;
          backward[l] -= 1;
          admissible = set.contains(backward);
          backward[l] += 1;
        }
        if (admissible) margin.insert(forward);
      }
      forward[k] -= 1;
    }
  }
  return margin;
}

}  // namespace beamuq
