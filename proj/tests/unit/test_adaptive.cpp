#include <stdexcept>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "beamuq/adaptive.hpp"
#include "doctest.h"

using namespace beamuq;

TEST_CASE("constant functions stop at the tolerance after one margin sweep") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  AdaptiveOptions options;
  options.budget = 100;
  options.profit_tolerance = 0.0;
  const auto result = adapt([](const ParameterPoint&) { return 2.0; }, space, families,
                            level_to_knots_doubling, options);
  CHECK(result.state.stop_reason == AdaptiveStop::tolerance);
  CHECK(result.state.accepted.size() == 1);
  CHECK(result.state.history.empty());
  CHECK(quadrature_scalar(result.surrogate) == doctest::Approx(2.0).epsilon(1e-13));
  // exploration of both first-margin candidates was still paid for
  CHECK(result.state.evaluations_used > 1);
}

TEST_CASE("anisotropic functions refine the active dimension only") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  AdaptiveOptions options;
  options.budget = 200;
  // profits along the inactive dimensions vanish only to rounding
  options.profit_tolerance = 1e-12;
  const auto result = adapt(
      [](const ParameterPoint& p) { return std::exp(2.0 * p[0]); }, space, families,
      level_to_knots_doubling, options);
  for (const auto& idx : result.state.accepted) {
    CHECK(idx[1] == 1);
    CHECK(idx[2] == 1);
  }
  CHECK(result.state.accepted.size() > 1);
}

TEST_CASE("one budgeted step accepts the best candidate of the first margin") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  // Quadratic in p0 only: the (2,1) candidate carries all the profit.
  const auto f = [](const ParameterPoint& p) { return p[0] * p[0]; };
  AdaptiveOptions options;
  options.budget = 5;  // root (1) + two 2-point explorations (2+2)
  const auto result = adapt(f, space, families, level_to_knots_doubling, options);
  REQUIRE(result.state.history.size() == 1);
  CHECK(result.state.history[0].chosen == MultiIndex{2, 1});
  CHECK(result.state.evaluations_used == 5);
}

TEST_CASE("accepted sets stay downward-closed and costs are monotone") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const auto families = clenshaw_curtis_families(space);
  AdaptiveOptions options;
  options.budget = 120;
  const auto result = adapt(
      [](const ParameterPoint& p) { return 1.0 / (p[0] + p[1]); }, space, families,
      level_to_knots_doubling, options);
  CHECK(is_downward_closed(result.state.accepted));
  std::size_t previous = 0;
  for (const auto& entry : result.state.history) {
    CHECK(entry.evaluations_used >= previous);
    previous = entry.evaluations_used;
  }
  CHECK(result.state.evaluations_used <= options.budget);
  // candidates match the reduced margin of the accepted set
  const auto margin = reduced_margin(result.state.accepted);
  CHECK(result.state.candidates.indices() == margin.indices());
}

TEST_CASE("equal inputs give identical histories") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  const auto f = [](const ParameterPoint& p) {
    return std::sin(3.0 * p[0]) + 0.1 * p[1];
  };
  AdaptiveOptions options;
  options.budget = 90;
  const auto a = adapt(f, space, families, level_to_knots_doubling, options);
  options.threads = 2;
  const auto b = adapt(f, space, families, level_to_knots_doubling, options);
  REQUIRE(a.state.history.size() == b.state.history.size());
  for (std::size_t k = 0; k < a.state.history.size(); ++k) {
    CHECK(a.state.history[k].chosen == b.state.history[k].chosen);
    CHECK(a.state.history[k].profit == b.state.history[k].profit);
    CHECK(a.state.history[k].expected_value == b.state.history[k].expected_value);
  }
}

TEST_CASE("surrogate includes explored candidates by default") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  const auto f = [](const ParameterPoint& p) { return std::exp(p[0] + 0.3 * p[1]); };
  AdaptiveOptions options;
  options.budget = 60;
  const auto with = adapt(f, space, families, level_to_knots_doubling, options);
  CHECK(with.surrogate.grid.index_set().size() >= with.state.accepted.size());
  CHECK(is_downward_closed(with.surrogate.grid.index_set()));

  options.include_explored = false;
  const auto without = adapt(f, space, families, level_to_knots_doubling, options);
  CHECK(without.surrogate.grid.index_set().indices() ==
        without.state.accepted.indices());
}

TEST_CASE("budget below the root cost is rejected") {
  ParameterSpace space({{0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  AdaptiveOptions options;
  options.budget = 0;
  CHECK_THROWS_AS(adapt([](const ParameterPoint&) { return 1.0; }, space, families,
                        level_to_knots_doubling, options),
                  std::invalid_argument);
}

TEST_CASE("history export writes one row per accepted index") {
  ParameterSpace space({{0.0, 1.0}, {0.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  AdaptiveOptions options;
  options.budget = 40;
  const auto result = adapt(
      [](const ParameterPoint& p) { return p[0] * p[0] + 0.2 * p[1]; }, space, families,
      level_to_knots_doubling, options);
  const auto path = std::filesystem::temp_directory_path() / "beamuq_history_test.csv";
  export_history_csv(result.state, path);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "step,index,profit,cumulative_evaluations,expected_value");
  while (std::getline(in, line)) ++rows;
  std::filesystem::remove(path);
  CHECK(rows == result.state.history.size());
}
