#pragma once

#include <complex>
#include <string>

#include "diracgraph/dispersion.hpp"

namespace dg {

using cplx = std::complex<double>;

struct SpinorValue {
  cplx phi;  // upper component
  cplx chi;  // lower component
};

// Per-bond plane-wave amplitudes: phi(x) = mu e^{ikx} + mu_hat e^{-ikx}.
struct BondAmplitude {
  cplx mu;
  cplx mu_hat;
  std::string bond_id;
  double length = 0.0;
};

inline SpinorValue plane_wave(const BondAmplitude& amp, const DispersionModel& m, double x) {
  if (x < 0.0 || x > amp.length)
    throw std::domain_error("plane_wave: coordinate outside [0, length]");
  const double g = gamma(m);
  const cplx ep = std::exp(cplx(0.0, m.k * x));
  const cplx em = std::exp(cplx(0.0, -m.k * x));
  return SpinorValue{amp.mu * ep + amp.mu_hat * em,
                     cplx(0.0, g) * (amp.mu * ep - amp.mu_hat * em)};
}

}  // namespace dg
