#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamuq/bspline.hpp"
#include "beamuq/param_space.hpp"

namespace beamuq {

struct BeamGeometry {
  double length = 1.0;  // m
  double height = 1.0;  // m
};

//! Heterogeneous isotropic Young modulus E(x,y,p) = E0 * alpha(x,y,p).
//! The solver needs the spatial gradient of alpha, so the field carries
//! analytic partial derivatives alongside the value.
struct MaterialField {
  double e0 = 1.0;  // Pa
  std::function<double(double, double, const ParameterPoint&)> alpha;
  std::function<double(double, double, const ParameterPoint&)> alpha_dx;
  std::function<double(double, double, const ParameterPoint&)> alpha_dy;
};

//! One Gaussian stiffness dip along x: alpha = p1 - gamma exp(-(x-p2)^2/(2 p3^2)).
MaterialField one_knot_material(double e0, double gamma);

//! Two Gaussian dips, the first anchored at (anchor_x, anchor_y), the second
//! offset by (p6, p7); widths p2..p5.
MaterialField two_knot_material(double e0, double gamma1, double gamma2,
                                double anchor_x, double anchor_y);

double alpha_one_knot(double x, double y, const ParameterPoint& p, double gamma);
double alpha_two_knot(double x, double y, const ParameterPoint& p, double gamma1,
                      double gamma2, double anchor_x, double anchor_y);

//! Traction problem on the rectangle: sliding supports u_x = 0 on x = 0 and
//! u_y = 0 on y = 0 (shear-free), prescribed traction (tx, ty) on x = L,
//! traction-free top edge y = H.
struct TractionProblem {
  BeamGeometry geometry;
  double tx = 0.0;  // N/m
  double ty = 0.0;  // N/m
};

struct IgaDiscretization {
  int degree_x = 4;
  int degree_y = 4;
  int basis_x = 32;
  int basis_y = 32;
};

//! Tensor B-spline displacement expansion: control coefficients for both
//! components over the shared knot vectors, row-major with the x index
//! varying slowest.
class DisplacementField {
public:
  DisplacementField(OpenKnotVector kvx, OpenKnotVector kvy, std::vector<double> ux,
                    std::vector<double> uy);

  const OpenKnotVector& knots_x() const { return kvx_; }
  const OpenKnotVector& knots_y() const { return kvy_; }
  const std::vector<double>& coeff_x() const { return ux_; }
  const std::vector<double>& coeff_y() const { return uy_; }

  struct Value {
    double ux = 0.0;
    double uy = 0.0;
  };
  Value evaluate(double x, double y) const;

private:
  OpenKnotVector kvx_, kvy_;
  std::vector<double> ux_, uy_;
};

class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct SolveOptions {
  double condition_limit = 1e14;
  bool estimate_condition = true;
};

//! Strong-form isogeometric collocation solve of div(C : grad_s u) = 0 with
//! C = diag(E, E, E/2) in Voigt form. Collocation stations are the Greville
//! abscissae of both directions; kinematic constraints are imposed exactly
//! through the boundary control coefficients and edge tractions are
//! collocated at the boundary stations. The assembled 2*basis_x*basis_y
//! system is solved densely with partial pivoting.
DisplacementField solve_traction_problem(const TractionProblem& problem,
                                         const MaterialField& material,
                                         const ParameterPoint& p,
                                         const IgaDiscretization& iga,
                                         const SolveOptions& options = {});

//! Horizontal displacement at the bottom-right corner (L, 0).
double qoi_corner(const DisplacementField& field, const BeamGeometry& geometry);

//! || u_x - u_x_ref ||_L2(D) / || u_x_ref ||_L2(D), by tensor Gauss
//! quadrature with degree+1 points per knot span of the reference.
double l2_relative_field_error(const DisplacementField& field,
                               const DisplacementField& reference);

//! Structured-grid CSV (x, y, u_x, u_y) on an nx-by-ny sampling lattice.
void export_field_csv(const DisplacementField& field, int nx, int ny,
                      const std::filesystem::path& path);

}  // namespace beamuq
