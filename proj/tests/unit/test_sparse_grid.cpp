#include <cmath>
#include <filesystem>
#include <numeric>

#include "beamuq/sparse_grid.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace beamuq;

namespace {

Surrogate make_surrogate(const ParameterSpace& space, int level, const FomFunction& f,
                         const Surrogate* recycle = nullptr,
                         EvaluationReport* report = nullptr) {
  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling,
                                      MultiIndexSet::smolyak(space.dim(), level));
  ReducedSparseGrid reduced = reduce(grid);
  return evaluate_on_grid(f, std::move(grid), std::move(reduced), recycle, 1, report);
}

}  // namespace

TEST_CASE("single-point grid at level zero") {
  ParameterSpace space({{0.0, 1.0}, {2.0, 4.0}});
  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling, MultiIndexSet::smolyak(2, 0));
  REQUIRE(grid.terms().size() == 1);
  CHECK(grid.terms()[0].coefficient == 1);
  const auto reduced = reduce(grid);
  REQUIRE(reduced.size() == 1);
  CHECK(reduced.points[0] == ParameterPoint{0.5, 3.0});
  CHECK(reduced.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("level-one 2D grid reduces to five points with the known center weight") {
  ParameterSpace space({{-1.0, 1.0}, {-1.0, 1.0}});
  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling, MultiIndexSet::smolyak(2, 1));
  const auto reduced = reduce(grid);
  CHECK(reduced.size() == 5);
  double center_weight = 0.0;
  bool found = false;
  for (std::size_t q = 0; q < reduced.size(); ++q) {
    if (reduced.points[q][0] == 0.0 && reduced.points[q][1] == 0.0) {
      center_weight = reduced.weights[q];
      found = true;
    }
  }
  REQUIRE(found);
  // -1 * 1 + (2/3) + (2/3) from the two three-point terms.
  CHECK(center_weight == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("reduced cardinalities match the dyadic enumeration oracle") {
  ParameterSpace space({{-1.0, 1.0}, {-1.0, 1.0}});
  const auto families = clenshaw_curtis_families(space);
  const std::vector<std::size_t> frozen = {1, 5, 13, 29, 65, 145};
  for (int w = 0; w <= 5; ++w) {
    const auto set = MultiIndexSet::smolyak(2, w);
    SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling, set);
    const auto reduced = reduce(grid);
    CHECK(reduced.size() == frozen[static_cast<std::size_t>(w)]);
    CHECK(reduced.size() == testing::enumerate_unique_points(set));
  }
  for (int dim = 3; dim <= 4; ++dim) {
    std::vector<Interval> ranges(static_cast<std::size_t>(dim), Interval{0.0, 1.0});
    ParameterSpace s(ranges);
    const auto fams = clenshaw_curtis_families(s);
    for (int w = 0; w <= 4; ++w) {
      const auto set = MultiIndexSet::smolyak(dim, w);
      SparseGrid grid = build_sparse_grid(s, fams, level_to_knots_doubling, set);
      CHECK(reduce(grid).size() == testing::enumerate_unique_points(set));
    }
  }
}

TEST_CASE("combined weights sum to one") {
  for (int dim = 1; dim <= 4; ++dim) {
    std::vector<Interval> ranges(static_cast<std::size_t>(dim), Interval{0.2, 0.9});
    ParameterSpace space(ranges);
    const auto families = clenshaw_curtis_families(space);
    for (int w = 0; w <= 5; ++w) {
      SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                          MultiIndexSet::smolyak(dim, w));
      const auto reduced = reduce(grid);
      const double sum = std::accumulate(reduced.weights.begin(), reduced.weights.end(), 0.0);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("evaluation recycles nested values and counts fresh work") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const auto f = scalar_fom([](const ParameterPoint& p) { return p[0] * p[0] + p[1]; });

  EvaluationReport first;
  Surrogate coarse = make_surrogate(space, 1, f, nullptr, &first);
  CHECK(first.new_evaluations == 5);
  CHECK(first.recycled == 0);

  EvaluationReport second;
  Surrogate fine = make_surrogate(space, 2, f, &coarse, &second);
  CHECK(second.recycled == 5);
  CHECK(second.new_evaluations == fine.reduced.size() - 5);

  EvaluationReport again;
  Surrogate same = make_surrogate(space, 2, f, &fine, &again);
  CHECK(again.new_evaluations == 0);
  CHECK(again.recycled == same.reduced.size());

  // recycle_from must be a subset of the new grid
  CHECK_THROWS_AS(make_surrogate(space, 1, f, &fine), std::invalid_argument);
}

TEST_CASE("forward-model failures carry the offending point") {
  ParameterSpace space({{0.0, 1.0}});
  const auto f = scalar_fom([](const ParameterPoint& p) -> double {
    if (p[0] == 0.5) throw std::runtime_error("boom");
    return p[0];
  });
  CHECK_THROWS_AS(make_surrogate(space, 0, f), EvaluationError);
  try {
    make_surrogate(space, 0, f);
  } catch (const EvaluationError& e) {
    REQUIRE(e.point().size() == 1);
    CHECK(e.point()[0] == 0.5);
  }
}

TEST_CASE("interpolation reproduces nodal values and constants") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const auto f = scalar_fom([](const ParameterPoint& p) {
    return std::exp(p[0]) * std::cos(3.0 * p[1]);
  });
  Surrogate surrogate = make_surrogate(space, 3, f);

  const ValueTable at_nodes = interpolate(surrogate, surrogate.reduced.points);
  for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
    const double stored = surrogate.values.row(q)[0];
    CHECK(std::abs(at_nodes.row(q)[0] - stored) <= 1e-10 * std::abs(stored));
  }

  const auto constant = scalar_fom([](const ParameterPoint&) { return 3.0; });
  Surrogate flat = make_surrogate(space, 2, constant);
  const auto queries = sample_uniform(space, 50, 11);
  const ValueTable values = interpolate(flat, queries);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    CHECK(values.row(i)[0] == doctest::Approx(3.0).epsilon(1e-13));
  }
}

TEST_CASE("three-point rule interpolates quadratics exactly") {
  ParameterSpace space({{0.0, 1.0}});
  const auto f = scalar_fom([](const ParameterPoint& p) { return p[0] * p[0]; });
  Surrogate surrogate = make_surrogate(space, 1, f);  // 3 nodes in 1D
  const auto queries = sample_uniform(space, 50, 21);
  const ValueTable values = interpolate(surrogate, queries);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    CHECK(values.row(i)[0] == doctest::Approx(queries[i][0] * queries[i][0]).epsilon(1e-12));
  }
}

TEST_CASE("interpolation agrees with the brute-force combination oracle") {
  ParameterSpace space({{0.5, 1.5}, {-0.5, 0.5}});
  const auto f = scalar_fom([](const ParameterPoint& p) {
    return 1.0 / (1.0 + p[0] * p[0] + 0.5 * p[1]);
  });
  for (int w = 1; w <= 3; ++w) {
    Surrogate surrogate = make_surrogate(space, w, f);
    const auto queries = sample_uniform(space, 100, 33);
    const ValueTable values = interpolate(surrogate, queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const double oracle = testing::brute_force_interpolate(surrogate, queries[i]);
      CHECK(std::abs(values.row(i)[0] - oracle) < 1e-12);
    }
  }
}

TEST_CASE("out-of-domain queries error unless extrapolation is allowed") {
  ParameterSpace space({{0.0, 1.0}});
  const auto f = scalar_fom([](const ParameterPoint& p) { return p[0]; });
  Surrogate surrogate = make_surrogate(space, 1, f);
  const std::vector<ParameterPoint> outside{{1.5}};
  CHECK_THROWS_AS(interpolate(surrogate, outside), std::domain_error);
  InterpolateOptions options;
  options.allow_extrapolation = true;
  const ValueTable value = interpolate(surrogate, outside, options);
  CHECK(value.row(0)[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("quadrature integrates low moments exactly") {
  ParameterSpace space({{0.5, 1.5}, {0.0, 1.0}});
  const auto constant = scalar_fom([](const ParameterPoint&) { return 4.25; });
  Surrogate flat = make_surrogate(space, 1, constant);
  CHECK(quadrature_scalar(flat) == doctest::Approx(4.25).epsilon(1e-13));

  const auto linear = scalar_fom([](const ParameterPoint& p) { return p[0]; });
  Surrogate lin = make_surrogate(space, 1, linear);
  CHECK(quadrature_scalar(lin) == doctest::Approx(1.0).epsilon(1e-12));

  const auto square = scalar_fom([](const ParameterPoint& p) { return p[1] * p[1]; });
  Surrogate sq = make_surrogate(space, 1, square);
  CHECK(quadrature_scalar(sq) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sparse quadrature is exact for monomials of total degree <= w") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}, {0.1, 0.2}});
  const auto families = clenshaw_curtis_families(space);
  for (int w = 1; w <= 4; ++w) {
    SparseGrid grid = build_sparse_grid(space, families, level_to_knots_doubling,
                                        MultiIndexSet::smolyak(3, w));
    const auto reduced = reduce(grid);
    for (int d1 = 0; d1 <= w; ++d1) {
      for (int d2 = 0; d1 + d2 <= w; ++d2) {
        for (int d3 = 0; d1 + d2 + d3 <= w; ++d3) {
          double acc = 0.0;
          for (std::size_t q = 0; q < reduced.size(); ++q) {
            const auto& p = reduced.points[q];
            acc += reduced.weights[q] * std::pow(p[0], d1) * std::pow(p[1], d2) *
                   std::pow(p[2], d3);
          }
          const double exact = testing::uniform_moment(d1, 0.5, 1.5) *
                               testing::uniform_moment(d2, 0.25, 0.75) *
                               testing::uniform_moment(d3, 0.1, 0.2);
          CHECK(acc == doctest::Approx(exact).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("vector-valued quadrature applies componentwise") {
  ParameterSpace space({{0.0, 1.0}});
  const FomFunction f = [](const ParameterPoint& p) {
    return std::vector<double>{p[0], p[0] * p[0], 1.0};
  };
  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling, MultiIndexSet::smolyak(1, 2));
  auto reduced = reduce(grid);
  Surrogate surrogate = evaluate_on_grid(f, std::move(grid), std::move(reduced));
  const auto means = quadrature(surrogate);
  REQUIRE(means.size() == 3);
  CHECK(means[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(means[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(means[2] == doctest::Approx(1.0).epsilon(1e-13));

  const Surrogate second = extract_component(surrogate, 1);
  CHECK(quadrature_scalar(second) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("surrogate JSON round-trip preserves values and grid") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const auto f = scalar_fom([](const ParameterPoint& p) { return p[0] + 2.0 * p[1]; });
  Surrogate surrogate = make_surrogate(space, 2, f);

  const auto path = std::filesystem::temp_directory_path() / "beamuq_surrogate_test.json";
  save_surrogate(surrogate, path);
  const Surrogate loaded = load_surrogate(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.reduced.size() == surrogate.reduced.size());
  for (std::size_t q = 0; q < loaded.reduced.size(); ++q) {
    CHECK(loaded.reduced.points[q] == surrogate.reduced.points[q]);
    CHECK(loaded.values.row(q)[0] == surrogate.values.row(q)[0]);
  }
  const auto queries = sample_uniform(space, 20, 3);
  const ValueTable a = interpolate(surrogate, queries);
  const ValueTable b = interpolate(loaded, queries);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    CHECK(a.row(i)[0] == b.row(i)[0]);
  }
}
