#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diracgraph/secular.hpp"

namespace dg {

struct TorusPoint {
  double kappa1 = 0.0, kappa2 = 0.0;  // stored representatives in [0, 2pi)
};

TorusPoint make_torus_point(double kappa1, double kappa2);

// Phi(kappa1, kappa2; alpha) = det(I - S(e^{i k1}, e^{i k2}, e^{i k2}, e^{i a})).
// Loop requires l3 = l2; custom has no 2-phase reduction and is rejected.
cplx phi(const SecularSystem& sys, TorusPoint p, double alpha);
double phi_surrogate(const SecularSystem& sys, TorusPoint p, double alpha);
AlphaPolynomial alpha_polynomial_torus(const SecularSystem& sys, TorusPoint p, int samples = 16);

struct MembershipResult {
  bool in_spectrum = false;
  double witness_alpha = 0.0;  // principal value in (-pi, pi]
  bool degenerate = false;     // Phi identically zero in alpha
};

// Exists-alpha test through the unit-circle roots of the alpha polynomial.
MembershipResult membership(const SecularSystem& sys, TorusPoint p, double tol_z = 1e-6);

struct ZeroCurve {
  double alpha = 0.0;
  int curve_id = 0;
  std::vector<TorusPoint> points;
  bool closed = false;
};

std::vector<ZeroCurve> zero_set_curves(const SecularSystem& sys, double alpha, int grid_n,
                                       double tol_z = 1e-6, int threads = 1);

enum class ProbMethod { grid, monte_carlo };

struct ProbabilityEstimate {
  Topology topology = Topology::comb;
  ProbMethod method = ProbMethod::grid;
  double p_sigma = 0.0;
  int grid_n = 0;
  double tol_z = 0.0;
  std::uint64_t seed = 0;
  long long samples = 0;
  double error_bound = 0.0;
  std::optional<double> octant_discrepancy;
};

ProbabilityEstimate probability(const SecularSystem& sys, int grid_n, double tol_z,
                                ProbMethod method, std::uint64_t seed, int threads = 1,
                                long long mc_samples = 0);

// Fraction of uniformly sampled k in (0, k_max] whose torus image is in the
// spectrum. warning (if given) receives a note when l1/l2 is nearly rational.
double empirical_spectrum_fraction(const SecularSystem& sys, double k_max, long long samples,
                                   std::uint64_t seed, int threads = 1, double tol_z = 1e-6,
                                   std::string* warning = nullptr);

// |p_full - 8 * octant area / (2 pi)^2|; the octant method is a cross-check.
double octant_reduction_check(const SecularSystem& sys, int grid_n, double tol_z = 1e-6,
                              int threads = 1);

namespace detail {
// Column construction on an arbitrary membership field, exposed for tests:
// per column the first spectral band going up from the axis, full weight when
// the band is axis-bisected (entry at 0), half weight otherwise.
double octant_area(const std::function<bool(double, double)>& member, int grid_n);
double full_measure(const std::function<bool(double, double)>& member, int grid_n);
}  // namespace detail

}  // namespace dg
