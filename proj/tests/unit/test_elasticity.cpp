#include <stdexcept>
#include <cmath>

#include "beamuq/elasticity.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace beamuq;

namespace {

constexpr double kE0 = 1.0e10;   // Pa   (10^4 MPa)
constexpr double kTx = 1.0e6;    // N/m  (10^3 kN/m)

TractionProblem unit_problem() {
  return TractionProblem{BeamGeometry{1.0, 1.0}, kTx, 0.0};
}

}  // namespace

TEST_CASE("one-knot stiffness ratio values") {
  const ParameterPoint p{1.0, 0.5, 0.1};
  CHECK(alpha_one_knot(0.5, 0.0, p, 0.4) == doctest::Approx(1.0 - 0.4).epsilon(1e-15));
  CHECK(alpha_one_knot(0.3, 0.7, p, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  // frozen: 1 - 0.4 exp(-1/2)
  CHECK(alpha_one_knot(0.6, 0.2, p, 0.4) ==
        doctest::Approx(0.7573877361149466).epsilon(1e-12));
}

TEST_CASE("two-knot stiffness ratio values") {
  // p = (p1, width1x, width2x, width1y, width2y, offset_x, offset_y)
  const ParameterPoint p{1.2, 0.5, 0.5, 0.05, 0.05, 4.0, 0.2};
  const double at_anchor = alpha_two_knot(1.0, 0.5, p, 0.4, 0.4, 1.0, 0.5);
  // second knot is 4 m away with width 0.5: contribution < 1e-8
  CHECK(at_anchor == doctest::Approx(1.2 - 0.4).epsilon(1e-8));
  CHECK(alpha_two_knot(1.0, 0.5, p, 0.0, 0.0, 1.0, 0.5) == doctest::Approx(1.2));
  // far field
  CHECK(alpha_two_knot(9.99, 0.99, p, 0.4, 0.4, 1.0, 0.5) ==
        doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("material field derivatives match finite differences") {
  const MaterialField material = two_knot_material(kE0, 0.4, 0.4, 1.0, 0.5);
  const ParameterPoint p{1.1, 0.6, 0.4, 0.06, 0.08, 3.0, -0.2};
  const double h = 1e-6;
  for (double x : {0.7, 1.0, 3.9}) {
    for (double y : {0.2, 0.5}) {
      const double fd_x =
          (material.alpha(x + h, y, p) - material.alpha(x - h, y, p)) / (2.0 * h);
      const double fd_y =
          (material.alpha(x, y + h, p) - material.alpha(x, y - h, p)) / (2.0 * h);
      CHECK(material.alpha_dx(x, y, p) == doctest::Approx(fd_x).epsilon(1e-6));
      CHECK(material.alpha_dy(x, y, p) == doctest::Approx(fd_y).epsilon(1e-6));
    }
  }
}

TEST_CASE("constant stiffness reproduces the uniaxial solution exactly") {
  const MaterialField material = one_knot_material(kE0, 0.0);  // alpha == p1
  const ParameterPoint p{1.0, 0.5, 0.15};
  const IgaDiscretization iga{4, 4, 32, 32};
  const DisplacementField field = solve_traction_problem(unit_problem(), material, p, iga);

  const double exact_corner = kTx * 1.0 / kE0;
  const double corner = qoi_corner(field, BeamGeometry{1.0, 1.0});
  CHECK(std::abs(corner - exact_corner) / exact_corner < 1e-9);

  // u_x is linear in x, u_y vanishes (both to solver roundoff)
  for (double x : {0.0, 0.2, 0.55, 1.0}) {
    for (double y : {0.0, 0.4, 1.0}) {
      const auto v = field.evaluate(x, y);
      CHECK(std::abs(v.ux - kTx * x / kE0) < 1e-8 * exact_corner);
      CHECK(std::abs(v.uy) < 1e-8 * exact_corner);
    }
  }
}

TEST_CASE("zero load gives a zero field") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const ParameterPoint p{1.0, 0.5, 0.15};
  const TractionProblem unloaded{BeamGeometry{1.0, 1.0}, 0.0, 0.0};
  const DisplacementField field =
      solve_traction_problem(unloaded, material, p, IgaDiscretization{4, 4, 16, 8});
  for (double v : field.coeff_x()) CHECK(std::abs(v) < 1e-12);
  for (double v : field.coeff_y()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("qoi is linear in the load") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const ParameterPoint p{0.9, 0.45, 0.12};
  const IgaDiscretization iga{4, 4, 24, 8};
  const TractionProblem base = unit_problem();
  const TractionProblem doubled{base.geometry, 2.0 * base.tx, 0.0};
  const double q1 = qoi_corner(solve_traction_problem(base, material, p, iga), base.geometry);
  const double q2 =
      qoi_corner(solve_traction_problem(doubled, material, p, iga), base.geometry);
  CHECK(std::abs(q2 - 2.0 * q1) <= 1e-12 * std::abs(q2));
}

TEST_CASE("paper configuration is accepted") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const ParameterPoint p{1.0, 0.5, 0.15};
  const IgaDiscretization iga{4, 4, 32, 32};
  CHECK_NOTHROW(solve_traction_problem(unit_problem(), material, p, iga));
}

TEST_CASE("one-knot solves agree with the 1D quadrature oracle") {
  // For y-independent stiffness the corner displacement is
  // t_x / E0 * integral_0^L ds / alpha(s).
  const MaterialField material = one_knot_material(kE0, 0.4);
  const IgaDiscretization iga{4, 4, 32, 8};
  for (const auto& p : {ParameterPoint{1.0, 0.5, 0.15}, ParameterPoint{0.6, 0.3, 0.11},
                        ParameterPoint{1.45, 0.7, 0.19}}) {
    const DisplacementField field = solve_traction_problem(unit_problem(), material, p, iga);
    const double computed = qoi_corner(field, BeamGeometry{1.0, 1.0});
    const double oracle = kTx / kE0 *
        testing::adaptive_simpson(
            [&](double s) { return 1.0 / alpha_one_knot(s, 0.0, p, 0.4); }, 0.0, 1.0, 1e-12);
    // spatial truncation of the degree-4 collocation at 32 basis functions
    CHECK(std::abs(computed - oracle) / std::abs(oracle) < 2e-5);
  }
}

TEST_CASE("vertical displacement vanishes for y-independent stiffness") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const ParameterPoint p{0.8, 0.6, 0.13};
  const DisplacementField field = solve_traction_problem(unit_problem(), material, p,
                                                         IgaDiscretization{4, 4, 32, 12});
  double max_uy = 0.0, max_ux = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const auto v = field.evaluate(i / 49.0, j / 49.0);
      max_uy = std::max(max_uy, std::abs(v.uy));
      max_ux = std::max(max_ux, std::abs(v.ux));
    }
  }
  CHECK(max_uy <= 1e-8 * max_ux);
}

TEST_CASE("corner displacement decreases as the beam stiffens") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const IgaDiscretization iga{4, 4, 24, 8};
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const double p1 = 0.5 + k * (1.0 / 19.0);
    const DisplacementField field =
        solve_traction_problem(unit_problem(), material, {p1, 0.5, 0.15}, iga);
    const double corner = qoi_corner(field, BeamGeometry{1.0, 1.0});
    CHECK(corner < previous);
    previous = corner;
  }
}

TEST_CASE("spatial self-convergence under a smooth stiffness profile") {
  MaterialField material;
  material.e0 = kE0;
  material.alpha = [](double x, double, const ParameterPoint&) {
    return 1.0 + 0.1 * std::sin(std::numbers::pi * x);
  };
  material.alpha_dx = [](double x, double, const ParameterPoint&) {
    return 0.1 * std::numbers::pi * std::cos(std::numbers::pi * x);
  };
  material.alpha_dy = [](double, double, const ParameterPoint&) { return 0.0; };
  const ParameterPoint p{};

  std::vector<double> corners;
  for (int basis : {16, 24, 32}) {
    const DisplacementField field = solve_traction_problem(
        unit_problem(), material, p, IgaDiscretization{4, 4, basis, 8});
    corners.push_back(qoi_corner(field, BeamGeometry{1.0, 1.0}));
  }
  const double d1 = std::abs(corners[1] - corners[0]);
  const double d2 = std::abs(corners[2] - corners[1]);
  CHECK(d2 < d1);
}

TEST_CASE("l2 field error of identical and scaled fields") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  const ParameterPoint p{1.1, 0.4, 0.12};
  const IgaDiscretization iga{4, 4, 16, 8};
  const DisplacementField field = solve_traction_problem(unit_problem(), material, p, iga);
  CHECK(l2_relative_field_error(field, field) == doctest::Approx(0.0));

  std::vector<double> doubled_x = field.coeff_x();
  for (auto& v : doubled_x) v *= 2.0;
  const DisplacementField doubled(field.knots_x(), field.knots_y(), doubled_x,
                                  field.coeff_y());
  CHECK(l2_relative_field_error(doubled, field) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degrees below two are rejected") {
  const MaterialField material = one_knot_material(kE0, 0.4);
  CHECK_THROWS_AS(solve_traction_problem(unit_problem(), material, {1.0, 0.5, 0.15},
                                         IgaDiscretization{1, 1, 8, 8}),
                  std::invalid_argument);
}

TEST_CASE("displacement evaluation respects partition of unity") {
  OpenKnotVector kvx(4, 10, 0.0, 1.0), kvy(4, 8, 0.0, 1.0);
  const std::size_t count = 80;
  std::vector<double> ones(count, 0.25), zeros(count, 0.0);
  const DisplacementField field(kvx, kvy, ones, zeros);
  for (double x : {0.0, 0.3, 1.0}) {
    for (double y : {0.0, 0.7, 1.0}) {
      const auto v = field.evaluate(x, y);
      CHECK(v.ux == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(v.uy == 0.0);
    }
  }
}
