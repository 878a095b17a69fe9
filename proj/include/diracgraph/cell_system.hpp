#pragma once

#include <Eigen/Core>
#include <vector>

#include "diracgraph/cell.hpp"
#include "diracgraph/spinor.hpp"

namespace dg {

// Homogeneous boundary-condition system M(k; alpha) c = 0 in the per-bond
// amplitudes c = (mu_0, mu_hat_0, mu_1, mu_hat_1, ...), bonds in declaration
// order. One scalar row per scalar boundary condition; always square for a
// well-formed cell. At a kirchhoff vertex the chi sum carries sign +1 for
// x=0 ends and -1 for x=L ends.
Eigen::MatrixXcd assemble_cell_system(const CellSpec& cell, double k, double alpha);

// Test hook: flips the sign of the quasiperiodic chi rows, which breaks
// self-adjointness; used by `validate` mutation checks only.
Eigen::MatrixXcd assemble_cell_system_flipped_flux(const CellSpec& cell, double k, double alpha);

// Unit-norm c with ||M c|| <= 10 * tol. tol is relative to the largest
// singular value. Throws std::invalid_argument when M is not rank deficient
// at tol. multiplicity (if given) receives the rank deficiency.
Eigen::VectorXcd nullspace_amplitudes(const Eigen::MatrixXcd& M, double tol,
                                      int* multiplicity = nullptr);

// Spinor traces at both endpoints of one bond.
struct BoundaryTrace {
  SpinorValue at0;
  SpinorValue atL;
};
using CellBoundaryState = std::vector<BoundaryTrace>;

CellBoundaryState boundary_traces(const CellSpec& cell, const Eigen::VectorXcd& amplitudes,
                                  double k);

// Omega(psi, phi) = sum_j [ psi.phi_j(0) conj(phi.chi_j(0)) - psi.phi_j(L) conj(phi.chi_j(L))
//                         - psi.chi_j(0) conj(phi.phi_j(0)) + psi.chi_j(L) conj(phi.phi_j(L)) ].
cplx skew_form_residual(const CellBoundaryState& left_state, const CellBoundaryState& right_state);

// Max residual of every boundary-condition row evaluated on the traces.
double bc_residual(const CellSpec& cell, const Eigen::VectorXcd& amplitudes, double k,
                   double alpha);

}  // namespace dg
