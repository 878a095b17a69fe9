#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracgraph/cell.hpp"
#include "diracgraph/spinor.hpp"

namespace dg {

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Topology { comb, ladder, loop, custom };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

// A secular problem: either one of the printed scattering matrices as a
// function of the phase variables (w1, w2, w3, z), or a custom cell whose
// I-S role is played by the assembled boundary-condition matrix.
struct SecularSystem {
  Topology topology = Topology::comb;
  double l1 = 1.0, l2 = 1.0, l3 = 0.0;  // l3 used by loop only
  std::optional<CellSpec> cell;         // set for custom

  int dim() const;
  double total_length() const;
  bool from_assembler() const { return topology == Topology::custom; }
  // The boundary-condition cell equivalent to this system (oracle side).
  CellSpec oracle_cell() const;
};

SecularSystem comb_system(double l1, double l2);
SecularSystem ladder_system(double l1, double l2);
SecularSystem loop_system(double l1, double l2, double l3 = 0.0);  // 0 -> l3 = l2
SecularSystem custom_system(CellSpec cell);

// Printed S-matrix at unimodular phases (built-in topologies only).
Eigen::MatrixXcd s_matrix(const SecularSystem& sys, cplx w1, cplx w2, cplx w3, cplx z);

// I - S at physical (k, alpha); for custom, the assembled cell matrix.
Eigen::MatrixXcd secular_matrix(const SecularSystem& sys, double k, double alpha);

cplx secular_value(const SecularSystem& sys, double k, double alpha);   // det(I - S)
double secular_surrogate(const SecularSystem& sys, double k, double alpha);  // smallest sv
double secular_surrogate_rel(const SecularSystem& sys, double k, double alpha);

// p(z) = z^m det(I - S) with negative powers cleared; recovered by sampling
// F at M-th roots of unity and inverting the DFT, then truncating end
// coefficients below 1e-12 * max|a|.
struct AlphaPolynomial {
  std::vector<cplx> coeffs;  // a_0 .. a_d
  int shift = 0;             // m
  double truncation_threshold = 0.0;
  double sample_scale = 0.0;  // max |F| over the sample ring
  bool degenerate = false;    // identically-zero F: in the spectrum for all alpha

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  cplx eval_f(double alpha) const;              // reconstructs F(alpha)
  std::vector<cplx> roots() const;              // companion-matrix roots of p
  std::vector<double> unit_circle_angles(double tol_z) const;  // principal args
};

// F sampled as a function of alpha with everything else held fixed.
AlphaPolynomial alpha_polynomial_of(const std::function<cplx(double)>& f_of_alpha,
                                    int samples = 16);
AlphaPolynomial alpha_polynomial(const SecularSystem& sys, double k, int samples = 16);

struct FlatInterval {
  double k_lo = 0.0, k_hi = 0.0;
};

struct RootFindResult {
  std::vector<double> roots;  // strictly increasing
  std::vector<int> multiplicity;
  std::vector<FlatInterval> flat;
};

// Grid scan of the surrogate + golden-section refinement. samples = 0 picks
// a density from the total cell length. Roots closer than 10*tol merge.
RootFindResult find_roots_k(const SecularSystem& sys, double alpha, double k_min, double k_max,
                            int samples = 0, double tol = 1e-10);

namespace detail {
// Shared scan machinery on a relative-surrogate function; exposed for tests.
RootFindResult scan_minima(const std::function<double(double)>& rel_surrogate, double k_min,
                           double k_max, int samples, double tol, double accept_rel,
                           const std::function<int(double)>& multiplicity_of);
}  // namespace detail

// Star graph secular problem (N bonds, one central vertex, dead ends with
// phi = 0 at the outer endpoints).
struct StarSecularSystem {
  std::vector<double> lengths;
  int n() const { return static_cast<int>(lengths.size()); }
};

Eigen::MatrixXcd star_matrix(const StarSecularSystem& star, double k);
cplx star_secular(const StarSecularSystem& star, double k);
std::vector<double> star_roots(const StarSecularSystem& star, double k_min, double k_max,
                               int samples = 0, double tol = 1e-12);

}  // namespace dg
