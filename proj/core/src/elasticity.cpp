#include "beamuq/elasticity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "beamuq/gauss.hpp"

namespace beamuq {

double alpha_one_knot(double x, double /*y*/, const ParameterPoint& p, double gamma) {
  const double d = x - p[1];
  return p[0] - gamma * std::exp(-d * d / (2.0 * p[2] * p[2]));
}

MaterialField one_knot_material(double e0, double gamma) {
  MaterialField field;
  field.e0 = e0;
  field.alpha = [gamma](double x, double y, const ParameterPoint& p) {
    return alpha_one_knot(x, y, p, gamma);
  };
  field.alpha_dx = [gamma](double x, double /*y*/, const ParameterPoint& p) {
    const double s2 = p[2] * p[2];
    const double d = x - p[1];
    return gamma * std::exp(-d * d / (2.0 * s2)) * d / s2;
  };
  field.alpha_dy = [](double, double, const ParameterPoint&) { return 0.0; };
  return field;
}

double alpha_two_knot(double x, double y, const ParameterPoint& p, double gamma1,
                      double gamma2, double anchor_x, double anchor_y) {
  const double dx1 = x - anchor_x;
  const double dy1 = y - anchor_y;
  const double dx2 = x - anchor_x - p[5];
  const double dy2 = y - anchor_y - p[6];
  const double g1 = std::exp(-dx1 * dx1 / (2.0 * p[1] * p[1])) *
                    std::exp(-dy1 * dy1 / (2.0 * p[3] * p[3]));
  const double g2 = std::exp(-dx2 * dx2 / (2.0 * p[2] * p[2])) *
                    std::exp(-dy2 * dy2 / (2.0 * p[4] * p[4]));
  return p[0] - gamma1 * g1 - gamma2 * g2;
}

MaterialField two_knot_material(double e0, double gamma1, double gamma2, double anchor_x,
                                double anchor_y) {
  MaterialField field;
  field.e0 = e0;
  field.alpha = [gamma1, gamma2, anchor_x, anchor_y](double x, double y,
                                                     const ParameterPoint& p) {
    return alpha_two_knot(x, y, p, gamma1, gamma2, anchor_x, anchor_y);
  };
  field.alpha_dx = [gamma1, gamma2, anchor_x, anchor_y](double x, double y,
                                                        const ParameterPoint& p) {
    const double dx1 = x - anchor_x;
    const double dy1 = y - anchor_y;
    const double dx2 = x - anchor_x - p[5];
    const double dy2 = y - anchor_y - p[6];
    const double g1 = std::exp(-dx1 * dx1 / (2.0 * p[1] * p[1])) *
                      std::exp(-dy1 * dy1 / (2.0 * p[3] * p[3]));
    const double g2 = std::exp(-dx2 * dx2 / (2.0 * p[2] * p[2])) *
                      std::exp(-dy2 * dy2 / (2.0 * p[4] * p[4]));
    return gamma1 * g1 * dx1 / (p[1] * p[1]) + gamma2 * g2 * dx2 / (p[2] * p[2]);
  };
  field.alpha_dy = [gamma1, gamma2, anchor_x, anchor_y](double x, double y,
                                                        const ParameterPoint& p) {
    const double dx1 = x - anchor_x;
    const double dy1 = y - anchor_y;
    const double dx2 = x - anchor_x - p[5];
    const double dy2 = y - anchor_y - p[6];
    const double g1 = std::exp(-dx1 * dx1 / (2.0 * p[1] * p[1])) *
                      std::exp(-dy1 * dy1 / (2.0 * p[3] * p[3]));
    const double g2 = std::exp(-dx2 * dx2 / (2.0 * p[2] * p[2])) *
                      std::exp(-dy2 * dy2 / (2.0 * p[4] * p[4]));
    return gamma1 * g1 * dy1 / (p[3] * p[3]) + gamma2 * g2 * dy2 / (p[4] * p[4]);
  };
  return field;
}

DisplacementField::DisplacementField(OpenKnotVector kvx, OpenKnotVector kvy,
                                     std::vector<double> ux, std::vector<double> uy)
    : kvx_(std::move(kvx)), kvy_(std::move(kvy)), ux_(std::move(ux)), uy_(std::move(uy)) {
  const std::size_t expected = static_cast<std::size_t>(kvx_.basis_count()) *
                               static_cast<std::size_t>(kvy_.basis_count());
  if (ux_.size() != expected || uy_.size() != expected) {
    throw std::invalid_argument("DisplacementField: coefficient shape mismatch");
  }
}

DisplacementField::Value DisplacementField::evaluate(double x, double y) const {
  const BasisSpanValues bx = basis_span_values(kvx_, x, 0);
  const BasisSpanValues by = basis_span_values(kvy_, y, 0);
  const int m = kvy_.basis_count();
  Value out;
  for (int di = 0; di <= kvx_.degree(); ++di) {
    const int i = bx.first_active + di;
    for (int dj = 0; dj <= kvy_.degree(); ++dj) {
      const int j = by.first_active + dj;
      const double basis = bx.values[0][static_cast<std::size_t>(di)] *
                           by.values[0][static_cast<std::size_t>(dj)];
      const std::size_t idx = static_cast<std::size_t>(i) * m + j;
      out.ux += basis * ux_[idx];
      out.uy += basis * uy_[idx];
    }
  }
  return out;
}

namespace {

struct StationBasis {
  double coord = 0.0;
  BasisSpanValues basis;  // derivatives 0..2
};

// One-norm condition estimate (Hager/Higham power iteration on |A^-1|)
// using the existing factorization.
double condition_estimate_1norm(const Eigen::MatrixXd& a,
                                const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  const Eigen::Index n = a.rows();
  const double norm_a = a.cwiseAbs().colwise().sum().maxCoeff();

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = lu.solve(x);
    estimate = y.cwiseAbs().sum();
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Eigen::Index best = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&best);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[best] = 1.0;
  }
  return norm_a * estimate;
}

}  // namespace

DisplacementField solve_traction_problem(const TractionProblem& problem,
                                         const MaterialField& material,
                                         const ParameterPoint& p,
                                         const IgaDiscretization& iga,
                                         const SolveOptions& options) {
  if (iga.degree_x < 2 || iga.degree_y < 2) {
    throw std::invalid_argument("solve_traction_problem: spline degrees must be >= 2");
  }
  if (iga.basis_x < iga.degree_x + 1 || iga.basis_y < iga.degree_y + 1 ||
      iga.basis_x < 4 || iga.basis_y < 4) {
    throw std::invalid_argument("solve_traction_problem: too few basis functions");
  }

  const int nx = iga.basis_x;
  const int ny = iga.basis_y;
  const double length = problem.geometry.length;
  const double height = problem.geometry.height;
  OpenKnotVector kvx(iga.degree_x, nx, 0.0, length);
  OpenKnotVector kvy(iga.degree_y, ny, 0.0, height);

  const std::vector<double> gx = greville_abscissae(kvx);  // nx-1 stations, ends included
  const std::vector<double> gy = greville_abscissae(kvy);  // ny-1 stations

  std::vector<StationBasis> sx(gx.size()), sy(gy.size());
  for (std::size_t a = 0; a < gx.size(); ++a) {
    sx[a] = {gx[a], basis_span_values(kvx, gx[a], 2)};
  }
  for (std::size_t b = 0; b < gy.size(); ++b) {
    sy[b] = {gy[b], basis_span_values(kvy, gy[b], 2)};
  }

  const std::size_t unknowns = 2 * static_cast<std::size_t>(nx) * ny;
  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(unknowns),
                                                static_cast<Eigen::Index>(unknowns));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns));

  const std::size_t y_offset = static_cast<std::size_t>(nx) * ny;
  auto col_x = [&](int i, int j) { return static_cast<Eigen::Index>(i) * ny + j; };
  auto col_y = [&](int i, int j) {
    return static_cast<Eigen::Index>(y_offset) + static_cast<Eigen::Index>(i) * ny + j;
  };

  // The stiffness enters in alpha units (E/E0); tractions are divided by E0.
  const double tx = problem.tx / material.e0;
  const double ty = problem.ty / material.e0;

  Eigen::Index row = 0;

  enum class RowKind { momentum_x, momentum_y, shear, normal_x, normal_y };

  auto emit_collocated = [&](RowKind kind, std::size_t a, std::size_t b, double rhs_value) {
    const double x = sx[a].coord;
    const double y = sy[b].coord;
    const double av = material.alpha(x, y, p);
    const double ax = material.alpha_dx(x, y, p);
    const double ay = material.alpha_dy(x, y, p);
    const auto& bx = sx[a].basis;
    const auto& by = sy[b].basis;
    for (int di = 0; di <= iga.degree_x; ++di) {
      const int i = bx.first_active + di;
      const double n0 = bx.values[0][static_cast<std::size_t>(di)];
      const double n1 = bx.values[1][static_cast<std::size_t>(di)];
      const double n2 = bx.values[2][static_cast<std::size_t>(di)];
      for (int dj = 0; dj <= iga.degree_y; ++dj) {
        const int j = by.first_active + dj;
        const double m0 = by.values[0][static_cast<std::size_t>(dj)];
        const double m1 = by.values[1][static_cast<std::size_t>(dj)];
        const double m2 = by.values[2][static_cast<std::size_t>(dj)];
        double cx = 0.0, cy = 0.0;
        switch (kind) {
          case RowKind::momentum_x:
            cx = ax * n1 * m0 + av * n2 * m0 + 0.5 * ay * n0 * m1 + 0.5 * av * n0 * m2;
            cy = 0.5 * ay * n1 * m0 + 0.5 * av * n1 * m1;
            break;
          case RowKind::momentum_y:
            cx = 0.5 * ax * n0 * m1 + 0.5 * av * n1 * m1;
            cy = 0.5 * ax * n1 * m0 + 0.5 * av * n2 * m0 + ay * n0 * m1 + av * n0 * m2;
            break;
          case RowKind::shear:
            cx = 0.5 * av * n0 * m1;
            cy = 0.5 * av * n1 * m0;
            break;
          case RowKind::normal_x:
            cx = av * n1 * m0;
            break;
          case RowKind::normal_y:
            cy = av * n0 * m1;
            break;
        }
        if (cx != 0.0) a_mat(row, col_x(i, j)) += cx;
        if (cy != 0.0) a_mat(row, col_y(i, j)) += cy;
      }
    }
    rhs[row] = rhs_value;
    ++row;
  };

  const std::size_t last_a = gx.size() - 1;  // station on x = L
  const std::size_t last_b = gy.size() - 1;  // station on y = H

  // Momentum balance at all stations except the traction edges x = L, y = H.
  // Stations on the kinematic edges are included: the exact Dirichlet rows
  // below constrain coefficients, not collocation slots.
  for (std::size_t a = 0; a + 1 < gx.size(); ++a) {
    for (std::size_t b = 0; b + 1 < gy.size(); ++b) {
      emit_collocated(RowKind::momentum_x, a, b, 0.0);
      emit_collocated(RowKind::momentum_y, a, b, 0.0);
    }
  }

  // Sliding supports imposed exactly through the boundary coefficients:
  // u_x(0, .) and u_y(., 0) vanish identically.
  for (int j = 0; j < ny; ++j) {
    a_mat(row, col_x(0, j)) = 1.0;
    ++row;
  }
  for (int i = 0; i < nx; ++i) {
    a_mat(row, col_y(i, 0)) = 1.0;
    ++row;
  }

  // Shear condition once per boundary station: zero on the sliding edges,
  // the tangential load component on x = L. The corner (L,0) keeps the
  // sliding (zero-shear) version, (L,H) the traction version. At (0,0)
  // the coefficient rows already force u_x,y = u_y,x = 0, so a shear row
  // there would be a linear combination of them; its slot moves to an
  // extra tangential-momentum row on the loaded edge below.
  for (std::size_t b = 1; b <= last_b; ++b) emit_collocated(RowKind::shear, 0, b, 0.0);
  for (std::size_t a = 1; a <= last_a; ++a) emit_collocated(RowKind::shear, a, 0, 0.0);
  for (std::size_t b = 1; b <= last_b; ++b) emit_collocated(RowKind::shear, last_a, b, ty);
  for (std::size_t a = 1; a < last_a; ++a) emit_collocated(RowKind::shear, a, last_b, 0.0);

  // Normal tractions along the loaded and free edges.
  for (std::size_t b = 0; b <= last_b; ++b) emit_collocated(RowKind::normal_x, last_a, b, tx);
  for (std::size_t a = 0; a <= last_a; ++a) emit_collocated(RowKind::normal_y, a, last_b, 0.0);

  // Corner closure: tangential momentum at the two mixed corners, plus the
  // slot freed at (0,0) as tangential momentum at the second station of the
  // loaded edge. All three vanish identically under a y-independent
  // stiffness, preserving the exact u_y = 0 reduction.
  emit_collocated(RowKind::momentum_y, last_a, 0, 0.0);
  emit_collocated(RowKind::momentum_x, 0, last_b, 0.0);
  emit_collocated(RowKind::momentum_y, last_a, 1, 0.0);

  if (row != static_cast<Eigen::Index>(unknowns)) {
    throw SolverError("solve_traction_problem: row bookkeeping mismatch");
  }

  // Two-sided equilibration balances the h^-2 scale of the momentum rows
  // against the O(1) coefficient rows: A -> R A C with unit-max rows and
  // columns after a few sweeps.
  const Eigen::Index n_rows = a_mat.rows();
  Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(n_rows);
  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n_rows);
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (Eigen::Index r = 0; r < n_rows; ++r) {
      const double scale = a_mat.row(r).cwiseAbs().maxCoeff();
      if (scale <= 0.0) throw SolverError("solve_traction_problem: empty row");
      a_mat.row(r) /= scale;
      row_scale[r] *= scale;
    }
    for (Eigen::Index c = 0; c < n_rows; ++c) {
      const double scale = a_mat.col(c).cwiseAbs().maxCoeff();
      if (scale <= 0.0) throw SolverError("solve_traction_problem: empty column");
      a_mat.col(c) /= scale;
      col_scale[c] *= scale;
    }
  }
  Eigen::VectorXd scaled_rhs = rhs.cwiseQuotient(row_scale);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a_mat);
  if (options.estimate_condition) {
    const double cond = condition_estimate_1norm(a_mat, lu);
    if (!(cond < options.condition_limit)) {
      throw SolverError("solve_traction_problem: ill-conditioned collocation system, "
                        "1-norm condition estimate " + std::to_string(cond));
    }
  }
  Eigen::VectorXd solution = lu.solve(scaled_rhs);
  // One step of iterative refinement knocks the LU roundoff down to the
  // residual level; the uniaxial reference solutions rely on it.
  solution += lu.solve(scaled_rhs - a_mat * solution);
  if (!solution.allFinite()) {
    throw SolverError("solve_traction_problem: singular collocation system");
  }
  solution = solution.cwiseQuotient(col_scale);

  std::vector<double> ux(y_offset), uy(y_offset);
  for (std::size_t k = 0; k < y_offset; ++k) {
    ux[k] = solution[static_cast<Eigen::Index>(k)];
    uy[k] = solution[static_cast<Eigen::Index>(y_offset + k)];
  }
  return DisplacementField(std::move(kvx), std::move(kvy), std::move(ux), std::move(uy));
}

double qoi_corner(const DisplacementField& field, const BeamGeometry& geometry) {
  return field.evaluate(geometry.length, 0.0).ux;
}

double l2_relative_field_error(const DisplacementField& field,
                               const DisplacementField& reference) {
  const OpenKnotVector& kvx = reference.knots_x();
  const OpenKnotVector& kvy = reference.knots_y();
  if (field.knots_x().lower() != kvx.lower() || field.knots_x().upper() != kvx.upper() ||
      field.knots_y().lower() != kvy.lower() || field.knots_y().upper() != kvy.upper()) {
    throw std::invalid_argument("l2_relative_field_error: geometry mismatch");
  }
  const GaussRule& gauss_x = gauss_legendre(kvx.degree() + 1);
  const GaussRule& gauss_y = gauss_legendre(kvy.degree() + 1);

  const double hx = (kvx.upper() - kvx.lower()) / kvx.span_count();
  const double hy = (kvy.upper() - kvy.lower()) / kvy.span_count();

  double err2 = 0.0, ref2 = 0.0;
  for (int sxi = 0; sxi < kvx.span_count(); ++sxi) {
    const double x0 = kvx.lower() + sxi * hx;
    for (int gi = 0; gi < kvx.degree() + 1; ++gi) {
      const double x = x0 + 0.5 * hx * (gauss_x.nodes[static_cast<std::size_t>(gi)] + 1.0);
      const double wx = 0.5 * hx * gauss_x.weights[static_cast<std::size_t>(gi)];
      for (int syi = 0; syi < kvy.span_count(); ++syi) {
        const double y0 = kvy.lower() + syi * hy;
        for (int gj = 0; gj < kvy.degree() + 1; ++gj) {
          const double y =
              y0 + 0.5 * hy * (gauss_y.nodes[static_cast<std::size_t>(gj)] + 1.0);
          const double w =
              wx * 0.5 * hy * gauss_y.weights[static_cast<std::size_t>(gj)];
          const double u = field.evaluate(x, y).ux;
          const double uref = reference.evaluate(x, y).ux;
          err2 += w * (u - uref) * (u - uref);
          ref2 += w * uref * uref;
        }
      }
    }
  }
  if (ref2 <= 0.0) {
    throw std::invalid_argument("l2_relative_field_error: reference field has zero norm");
  }
  return std::sqrt(err2 / ref2);
}

void export_field_csv(const DisplacementField& field, int nx, int ny,
                      const std::filesystem::path& path) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("export_field_csv: need nx, ny >= 2");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_field_csv: cannot open " + path.string());
  out << "x,y,ux,uy\n";
  char buffer[120];
  const double ax = field.knots_x().lower(), bx = field.knots_x().upper();
  const double ay = field.knots_y().lower(), by = field.knots_y().upper();
  for (int i = 0; i < nx; ++i) {
    const double x = ax + (bx - ax) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const double y = ay + (by - ay) * j / (ny - 1);
      const auto v = field.evaluate(x, y);
      std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g,%.17g,%.17g\n", x, y, v.ux, v.uy);
      out << buffer;
    }
  }
}

}  // namespace beamuq
