#include <stdexcept>
#include "beamuq/multi_index.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace beamuq;

TEST_CASE("smolyak sets enumerate the budgeted indices") {
  const auto w0 = MultiIndexSet::smolyak(2, 0);
  CHECK(w0.indices() == std::vector<MultiIndex>{{1, 1}});

  const auto w1 = MultiIndexSet::smolyak(2, 1);
  CHECK(w1.indices() == std::vector<MultiIndex>{{1, 1}, {1, 2}, {2, 1}});

  const auto n3 = MultiIndexSet::smolyak(3, 1);
  CHECK(n3.size() == 4);
  CHECK(n3.contains({1, 1, 1}));
  CHECK(n3.contains({2, 1, 1}));
  CHECK(n3.contains({1, 2, 1}));
  CHECK(n3.contains({1, 1, 2}));
}

TEST_CASE("downward-closedness detection") {
  CHECK(is_downward_closed(MultiIndexSet({{1, 1}})));
  CHECK_FALSE(is_downward_closed(MultiIndexSet({{1, 1}, {2, 2}})));
  for (int dim = 1; dim <= 4; ++dim) {
    for (int w = 0; w <= 5; ++w) {
      CHECK(is_downward_closed(MultiIndexSet::smolyak(dim, w)));
    }
  }
}

TEST_CASE("combination coefficients: frozen small cases") {
  {
    const auto c = combination_coefficients(MultiIndexSet({{1, 1}}));
    REQUIRE(c.size() == 1);
    CHECK(c.at({1, 1}) == 1);
  }
  {
    const auto c = combination_coefficients(MultiIndexSet::smolyak(2, 1));
    CHECK(c.at({1, 1}) == -1);
    CHECK(c.at({1, 2}) == 1);
    CHECK(c.at({2, 1}) == 1);
  }
  {
    // 1D telescoping: only the top level survives.
    const auto c = combination_coefficients(MultiIndexSet({{1}, {2}, {3}}));
    REQUIRE(c.size() == 1);
    CHECK(c.at({3}) == 1);
  }
  CHECK_THROWS_AS(combination_coefficients(MultiIndexSet({{1, 1}, {2, 2}})),
                  std::invalid_argument);
}

TEST_CASE("combination coefficients match the telescoping oracle") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int w = 0; w <= 4; ++w) {
      const auto set = MultiIndexSet::smolyak(dim, w);
      const auto direct = combination_coefficients(set);
      const auto oracle = testing::telescoping_coefficients(set);
      CHECK(direct == oracle);

      int sum = 0;
      for (const auto& [idx, c] : direct) sum += c;
      CHECK(sum == 1);
    }
  }
}

TEST_CASE("reduced margin of small sets") {
  {
    const auto margin = reduced_margin(MultiIndexSet({{1, 1}}));
    CHECK(margin.indices() == std::vector<MultiIndex>{{1, 2}, {2, 1}});
  }
  {
    const auto margin = reduced_margin(MultiIndexSet::smolyak(2, 1));
    CHECK(margin.indices() == std::vector<MultiIndex>{{1, 3}, {2, 2}, {3, 1}});
  }
  {
    const auto margin = reduced_margin(MultiIndexSet({{1}, {2}}));
    CHECK(margin.indices() == std::vector<MultiIndex>{{3}});
  }
  CHECK_THROWS_AS(reduced_margin(MultiIndexSet()), std::invalid_argument);
}

TEST_CASE("margin extensions stay downward-closed") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int w = 0; w <= 3; ++w) {
      const auto set = MultiIndexSet::smolyak(dim, w);
      const auto margin = reduced_margin(set);
      for (const auto& idx : margin) {
        MultiIndexSet grown = set;
        grown.insert(idx);
        CHECK(is_downward_closed(grown));
      }
    }
  }
}
