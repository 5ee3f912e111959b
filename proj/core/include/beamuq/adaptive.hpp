#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "beamuq/sparse_grid.hpp"

namespace beamuq {

struct AdaptiveOptions {
  //! Hard cap on unique forward-model evaluations, exploration included.
  std::size_t budget = 100;
  //! Stop once every candidate profit falls at or below this value.
  double profit_tolerance = 0.0;
  //! Build the returned surrogate on accepted plus explored indices
  //! (their values are already paid for); false restricts to accepted.
  bool include_explored = true;
  int threads = 1;
};

struct AdaptiveHistoryEntry {
  int step = 0;
  MultiIndex chosen;
  double profit = 0.0;
  std::size_t evaluations_used = 0;
  double expected_value = 0.0;
  std::size_t grid_size = 0;  // reduced cardinality of the accepted set
};

enum class AdaptiveStop { tolerance, budget };

struct AdaptiveState {
  MultiIndexSet accepted;
  MultiIndexSet candidates;               // reduced margin of accepted
  std::map<MultiIndex, double> profits;   // last computed candidate profits
  std::size_t evaluations_used = 0;
  std::vector<AdaptiveHistoryEntry> history;
  AdaptiveStop stop_reason = AdaptiveStop::budget;
};

struct AdaptiveResult {
  Surrogate surrogate;
  AdaptiveState state;
};

//! A-posteriori adaptive construction of the index set, driven by the
//! profit |change of E[f]| / new evaluations of each reduced-margin
//! candidate. Candidates are explored in lexicographic order (skipping any
//! whose exploration would overrun the budget), the best one is accepted,
//! and the margin is refreshed; ties break to the lexicographically
//! smallest index. Exploration costs are charged when the profit is first
//! computed, so the evaluation ledger includes rejected candidates.
AdaptiveResult adapt(const std::function<double(const ParameterPoint&)>& f,
                     const ParameterSpace& space, const std::vector<FamilyPtr>& families,
                     const LevelToKnots& level_to_knots, const AdaptiveOptions& options);

//! CSV export: step, index, profit, cumulative evaluations, running E[f].
void export_history_csv(const AdaptiveState& state, const std::filesystem::path& path);

}  // namespace beamuq
