#ifndef MEMFLUX_DISCRETIZATION_HPP
#define MEMFLUX_DISCRETIZATION_HPP

#include <vector>

#include "memflux/grid.hpp"
#include "memflux/linear_solver.hpp"

namespace memflux {

/// Nonlinear drift profile g(U) = sum_{n>=1} c_n U^n with no constant
/// term, so the zero state carries no drift flux.  Physical
/// coefficients a_n of p(U) = sum a_n U^n convert via g = ell*p/(2*d1).
class DriftPolynomial {
public:
  DriftPolynomial() = default;  // zero drift

  static DriftPolynomial dimensionless(std::vector<double> c);
  static DriftPolynomial from_physical(const std::vector<double>& a, double ell, double d1);
  /// p(U) = -b U (1 - U), i.e. a1 = -b, a2 = +b.
  static DriftPolynomial logistic(double b, double ell, double d1);
  static DriftPolynomial none() { return DriftPolynomial(); }

  double g(double u) const;
  double dg(double u) const;
  /// Upper bound of |g'| over [lo, hi]; exact for degree <= 2, sampled
  /// plus endpoints otherwise.
  double max_abs_dg(double lo, double hi) const;
  bool is_zero() const;
  /// Coefficient of U^n (n >= 1) in g.
  const std::vector<double>& coefficients() const { return c_; }

private:
  std::vector<double> c_;  // c_[k] multiplies U^{k+1}
};

enum class BcKind { dirichlet, zero_flux, periodic, interface_flux };

/// Interface-flux edges carry a coupling record: the outward total
/// flux through face k is coupling_coeff * u_cell - coupling_data[k].
/// With coupling_coeff = 0 this is a prescribed flux; a positive
/// coefficient gives the Robin-type exchange used by the thin-membrane
/// coupling.
struct EdgeBc {
  BcKind kind = BcKind::zero_flux;
  double value = 0.0;                 // Dirichlet value
  double coupling_coeff = 0.0;        // enters the matrix diagonal
  std::vector<double> coupling_data;  // enters the rhs

  static EdgeBc dirichlet(double v) { return {BcKind::dirichlet, v, 0.0, {}}; }
  static EdgeBc zero_flux() { return {BcKind::zero_flux, 0.0, 0.0, {}}; }
  static EdgeBc periodic() { return {BcKind::periodic, 0.0, 0.0, {}}; }
  static EdgeBc interface_flux(std::vector<double> outward_flux) {
    for (double& v : outward_flux) v = -v;
    return {BcKind::interface_flux, 0.0, 0.0, std::move(outward_flux)};
  }
  static EdgeBc interface_robin(double coeff, std::vector<double> data) {
    return {BcKind::interface_flux, 0.0, coeff, std::move(data)};
  }
};

/// One condition per edge; periodic edges must come in opposing pairs.
struct BoundaryConditions {
  EdgeBc left, right, bottom, top;

  static BoundaryConditions dirichlet_lr(double u_left, double u_right) {
    return {EdgeBc::dirichlet(u_left), EdgeBc::dirichlet(u_right), EdgeBc::zero_flux(),
            EdgeBc::zero_flux()};
  }
  static BoundaryConditions all_zero_flux() { return {}; }
};

/// Throws std::invalid_argument on unpaired periodic edges or
/// wrongly-sized interface-flux vectors.
void validate_bcs(const StructuredGrid& grid, const BoundaryConditions& bcs);

/// Assembles the operator approximating -div(D grad .) with two-point
/// fluxes (harmonic face coefficient) for the diagonal tensor entries
/// and four-point face-averaged stencils for the off-diagonal entries.
/// Boundary structure is folded in: zero-flux and interface-flux faces
/// carry nothing, periodic faces wrap, Dirichlet faces contribute the
/// half-cell transmissibility to the diagonal (the data lands in the
/// rhs through apply_bc).  Masked cells become identity rows and all
/// their faces carry zero flux.
SparseOperator assemble_diffusion(const StructuredGrid& grid, const TensorField& tensor,
                                  const CellMask& mask, const BoundaryConditions& bcs);

/// Adds the boundary-data contributions to the rhs: Dirichlet values
/// through ghost elimination and prescribed interface fluxes.  Pairs
/// with assemble_diffusion, which holds the matrix part.
void apply_bc(const StructuredGrid& grid, const TensorField& tensor, const CellMask& mask,
              const BoundaryConditions& bcs, std::vector<double>& rhs);

/// Discrete divergence of the drift field (D11 g(u), D21 g(u)) with
/// first-order upwinding by the sign of the local advective face
/// coefficient.  Fluxes vanish on masked faces, zero-flux faces and
/// interface-flux faces (prescribed total flux lives in the rhs).
ScalarField drift_divergence(const StructuredGrid& grid, const TensorField& tensor,
                             const DriftPolynomial& drift, const ScalarField& u,
                             const CellMask& mask, const BoundaryConditions& bcs);

/// Largest stable explicit drift substep: dt <= 1 / (max|D11 g'|/hx +
/// max|D21 g'|/hy) with g' ranged over [lo, hi].  Infinity for zero
/// drift.
double drift_cfl_dt(const StructuredGrid& grid, const TensorField& tensor,
                    const DriftPolynomial& drift, double lo, double hi);

/// Net outward boundary fluxes of the total flux J = -D(grad u + G(u)),
/// per edge, integrated over the edge.  The diffusive part is
/// evaluated from `u_diff` (implicit stage field) and the drift part
/// from `u_drift` (explicit stage field) so the IMEX mass budget
/// closes exactly.
struct BoundaryFluxes {
  double left = 0.0, right = 0.0, bottom = 0.0, top = 0.0;
  double net_outflow() const { return left + right + bottom + top; }
};

BoundaryFluxes boundary_outflow(const StructuredGrid& grid, const TensorField& tensor,
                                const DriftPolynomial& drift, const ScalarField& u_diff,
                                const ScalarField& u_drift, const CellMask& mask,
                                const BoundaryConditions& bcs);

/// Total flux J.e1 integrated over the column of x-faces left of cell
/// column `face_i` (positive rightward).  The finite-volume face flux
/// is single valued, so the value serves both adjacent regions.
double column_total_flux(const StructuredGrid& grid, const TensorField& tensor,
                         const DriftPolynomial& drift, const ScalarField& u_diff,
                         const ScalarField& u_drift, const CellMask& mask,
                         const BoundaryConditions& bcs, int face_i);

}  // namespace memflux

#endif
