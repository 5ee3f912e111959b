#include "beamuq/adaptive.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "parallel_util.hpp"

namespace beamuq {

namespace {

std::string key_of(const ParameterPoint& p) {
  std::string key(p.size() * sizeof(double), '\0');
  std::memcpy(key.data(), p.data(), key.size());
  return key;
}

// All evaluated points, keyed by exact coordinates. Nested rules make keys
// of shared points identical across grids.
class ValueBank {
public:
  bool has(const ParameterPoint& p) const { return values_.count(key_of(p)) > 0; }
  double get(const ParameterPoint& p) const { return values_.at(key_of(p)); }
  void put(const ParameterPoint& p, double v) { values_.emplace(key_of(p), v); }
  std::size_t size() const { return values_.size(); }

private:
  std::unordered_map<std::string, double> values_;
};

struct BuiltGrid {
  SparseGrid grid;
  ReducedSparseGrid reduced;
};

BuiltGrid build_for(const ParameterSpace& space, const std::vector<FamilyPtr>& families,
                    const LevelToKnots& m, const MultiIndexSet& set) {
  SparseGrid grid = build_sparse_grid(space, families, m, set);
  ReducedSparseGrid reduced = reduce(grid);
  return BuiltGrid{std::move(grid), std::move(reduced)};
}

double expectation_from_bank(const BuiltGrid& built, const ValueBank& bank) {
  double acc = 0.0;
  for (std::size_t q = 0; q < built.reduced.size(); ++q) {
    acc += built.reduced.weights[q] * bank.get(built.reduced.points[q]);
  }
  return acc;
}

Surrogate surrogate_from_bank(BuiltGrid built, const ValueBank& bank) {
  ValueTable values(built.reduced.size(), 1);
  for (std::size_t q = 0; q < built.reduced.size(); ++q) {
    values.row(q)[0] = bank.get(built.reduced.points[q]);
  }
  return Surrogate{std::move(built.grid), std::move(built.reduced), std::move(values)};
}

}  // namespace

AdaptiveResult adapt(const std::function<double(const ParameterPoint&)>& f,
                     const ParameterSpace& space, const std::vector<FamilyPtr>& families,
                     const LevelToKnots& m, const AdaptiveOptions& options) {
  if (options.budget < 1) {
    throw std::invalid_argument("adapt: budget smaller than the root grid cost");
  }
  if (options.profit_tolerance < 0.0) {
    throw std::invalid_argument("adapt: profit tolerance must be >= 0");
  }

  const int dim = space.dim();
  AdaptiveState state;
  ValueBank bank;

  auto evaluate_points = [&](const std::vector<ParameterPoint>& fresh) {
    std::vector<double> out(fresh.size());
    detail::parallel_for(fresh.size(), options.threads, [&](std::size_t k) {
      try {
        out[k] = f(fresh[k]);
      } catch (const EvaluationError&) {
        throw;
      } catch (const std::exception& e) {
        std::ostringstream oss;
        oss << "adapt: forward model failed: " << e.what();
        throw EvaluationError(oss.str(), fresh[k]);
      }
    });
    for (std::size_t k = 0; k < fresh.size(); ++k) bank.put(fresh[k], out[k]);
    state.evaluations_used += fresh.size();
  };

  // Root grid.
  state.accepted = MultiIndexSet({MultiIndex(static_cast<std::size_t>(dim), 1)});
  BuiltGrid accepted_grid = build_for(space, families, m, state.accepted);
  {
    std::vector<ParameterPoint> fresh;
    for (const auto& q : accepted_grid.reduced.points) fresh.push_back(q);
    evaluate_points(fresh);
  }
  double expected = expectation_from_bank(accepted_grid, bank);

  // Exploration ledger: marginal cost charged when a candidate is first
  // explored. MultiIndexSet of explored indices feeds the final surrogate.
  std::map<MultiIndex, std::size_t> exploration_cost;
  MultiIndexSet explored;

  for (int step = 1;; ++step) {
    state.candidates = reduced_margin(state.accepted);

    // Explore affordable unexplored candidates in lexicographic order.
    for (const auto& candidate : state.candidates) {
      if (exploration_cost.count(candidate)) continue;
      MultiIndexSet trial = state.accepted;
      trial.insert(candidate);
      BuiltGrid trial_grid = build_for(space, families, m, trial);
      std::vector<ParameterPoint> fresh;
      for (const auto& q : trial_grid.reduced.points) {
        if (!bank.has(q)) fresh.push_back(q);
      }
      if (state.evaluations_used + fresh.size() > options.budget) continue;
      evaluate_points(fresh);
      exploration_cost.emplace(candidate, fresh.size());
      explored.insert(candidate);
    }

    // Profits of every explored candidate against the current estimate.
    state.profits.clear();
    for (const auto& candidate : state.candidates) {
      auto it = exploration_cost.find(candidate);
      if (it == exploration_cost.end()) continue;
      MultiIndexSet trial = state.accepted;
      trial.insert(candidate);
      BuiltGrid trial_grid = build_for(space, families, m, trial);
      const double trial_expected = expectation_from_bank(trial_grid, bank);
      const double cost = static_cast<double>(std::max<std::size_t>(1, it->second));
      state.profits.emplace(candidate, std::abs(trial_expected - expected) / cost);
    }

    if (state.profits.empty()) {
      state.stop_reason = AdaptiveStop::budget;
      break;
    }

    // Largest profit wins; std::map iteration breaks ties lexicographically.
    auto best = state.profits.begin();
    for (auto it = state.profits.begin(); it != state.profits.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    if (best->second <= options.profit_tolerance) {
      state.stop_reason = AdaptiveStop::tolerance;
      break;
    }

    state.accepted.insert(best->first);
    accepted_grid = build_for(space, families, m, state.accepted);
    expected = expectation_from_bank(accepted_grid, bank);

    AdaptiveHistoryEntry entry;
    entry.step = step;
    entry.chosen = best->first;
    entry.profit = best->second;
    entry.evaluations_used = state.evaluations_used;
    entry.expected_value = expected;
    entry.grid_size = accepted_grid.reduced.size();
    state.history.push_back(entry);
  }

  MultiIndexSet final_set = state.accepted;
  if (options.include_explored) {
    for (const auto& idx : explored) final_set.insert(idx);
  }
  AdaptiveResult result{surrogate_from_bank(build_for(space, families, m, final_set), bank),
                        std::move(state)};
  return result;
}

void export_history_csv(const AdaptiveState& state, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_history_csv: cannot open " + path.string());
  out << "step,index,profit,cumulative_evaluations,expected_value\n";
  char buffer[96];
  for (const auto& entry : state.history) {
    std::ostringstream idx;
    for (std::size_t n = 0; n < entry.chosen.size(); ++n) {
      if (n) idx << " ";
      idx << entry.chosen[n];
    }
    out << entry.step << ",\"" << idx.str() << "\",";
    std::snprintf(buffer, sizeof(buffer), "%.17g,%zu,%.17g\n", entry.profit,
                  entry.evaluations_used, entry.expected_value);
    out << buffer;
  }
}

}  // namespace beamuq
