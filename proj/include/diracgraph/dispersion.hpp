#pragma once

#include <cmath>
#include <stdexcept>

namespace dg {

enum class EnergyBranch { positive, negative };

// Relativistic kinematics in units hbar = m = c = 1. The positive branch has
// E = sqrt(k^2+1) >= 1; the negative branch is its mirror image.
struct DispersionModel {
  double k = 0.0;
  EnergyBranch branch = EnergyBranch::positive;
};

inline double energy(const DispersionModel& m) {
  if (m.k < 0.0) throw std::domain_error("energy: wavenumber must be >= 0");
  const double e = std::hypot(m.k, 1.0);
  return m.branch == EnergyBranch::positive ? e : -e;
}

// gamma = (E-1)/k, evaluated as k/(E+1) which has no cancellation as k -> 0.
inline double gamma(const DispersionModel& m) {
  if (m.k <= 0.0) throw std::domain_error("gamma: wavenumber must be > 0");
  return m.k / (std::hypot(m.k, 1.0) + 1.0);
}

}  // namespace dg
