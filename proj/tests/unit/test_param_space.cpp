#include <stdexcept>
#include <cmath>

#include "beamuq/param_space.hpp"
#include "doctest.h"

using namespace beamuq;

TEST_CASE("parameter space validates its ranges") {
  CHECK_THROWS_AS(ParameterSpace({{1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ParameterSpace({{2.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ParameterSpace({}), std::invalid_argument);
}

TEST_CASE("density is the normalized product over the box") {
  ParameterSpace space({{0.0, 2.0}, {1.0, 1.5}});
  const ParameterPoint inside{1.0, 1.2};
  const ParameterPoint outside{3.0, 1.2};
  CHECK(space.density(inside) == doctest::Approx(1.0 / (2.0 * 0.5)));
  CHECK(space.density(outside) == 0.0);
}

TEST_CASE("uniform samples stay inside the box") {
  ParameterSpace space({{0.0, 1.0}});
  const auto samples = sample_uniform(space, 1000, 5);
  for (const auto& p : samples) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= 1.0);
  }
}

TEST_CASE("identical seeds reproduce identical streams bitwise") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const auto a = sample_uniform(space, 64, 1234);
  const auto b = sample_uniform(space, 64, 1234);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i][0] == b[i][0]);
    CHECK(a[i][1] == b[i][1]);
  }
  const auto c = sample_uniform(space, 64, 1235);
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i][0] != c[i][0]) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("sample mean obeys the law of large numbers") {
  ParameterSpace space({{0.5, 1.5}});
  const auto samples = sample_uniform(space, 100000, 99);
  double mean = 0.0;
  for (const auto& p : samples) mean += p[0];
  mean /= static_cast<double>(samples.size());
  // 6 sigma of the standard error 1/(sqrt(12) sqrt(1e5))
  CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("affine map hits endpoints and midpoint") {
  ParameterSpace space({{0.5, 1.5}, {0.25, 0.75}});
  const std::vector<double> low{-1.0, -1.0};
  const std::vector<double> high{1.0, 1.0};
  const std::vector<double> mid{0.0, 0.0};
  CHECK(map_affine(low, space) == ParameterPoint{0.5, 0.25});
  CHECK(map_affine(high, space) == ParameterPoint{1.5, 0.75});
  CHECK(map_affine(mid, space) == ParameterPoint{1.0, 0.5});
  const std::vector<double> bad{1.5, 0.0};
  CHECK_THROWS_AS(map_affine(bad, space), std::domain_error);
}

TEST_CASE("affine map round-trips through its inverse") {
  ParameterSpace space({{0.5, 1.5}, {0.1, 0.2}, {-3.0, 7.0}});
  const auto points = sample_uniform(space, 200, 7);
  for (const auto& p : points) {
    const auto ref = map_to_reference(p, space);
    const auto back = map_affine(ref, space);
    for (std::size_t n = 0; n < p.size(); ++n) {
      CHECK(back[n] == doctest::Approx(p[n]).epsilon(1e-14));
      CHECK(ref[n] >= -1.0);
      CHECK(ref[n] <= 1.0);
    }
  }
}
