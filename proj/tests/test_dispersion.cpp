#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diracgraph/dispersion.hpp"
#include "diracgraph/rng.hpp"
#include "diracgraph/spinor.hpp"

using namespace dg;

TEST_CASE("gamma at exact values") {
  CHECK(gamma({0.75}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));  // E = 5/4
  CHECK(gamma({std::sqrt(3.0)}) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  // small-k limit: gamma ~ k/2 without cancellation
  const double g = gamma({1e-8});
  CHECK(std::abs(g - 5e-9) / 5e-9 < 1e-6);
  CHECK_THROWS_AS(gamma({0.0}), std::domain_error);
  CHECK_THROWS_AS(gamma({-1.0}), std::domain_error);
}

TEST_CASE("energy branches") {
  CHECK(energy({0.0}) == 1.0);
  CHECK(energy({std::sqrt(3.0)}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(energy({0.75, EnergyBranch::negative}) == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK_THROWS_AS(energy({-0.1}), std::domain_error);
}

TEST_CASE("gamma identity and monotonicity") {
  double prev = 0.0;
  for (double k = 1e-8; k <= 1e3; k *= 1.37) {
    const double g = gamma({k});
    CHECK(std::abs(g * (energy({k}) + 1.0) - k) <= 2e-16 * k);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("plane wave endpoints") {
  BondAmplitude amp{cplx(0.5, 0.0), cplx(0.5, 0.0), "b", 2.0};
  const auto v = plane_wave(amp, {1.3}, 0.0);
  CHECK(v.phi.real() == doctest::Approx(1.0));
  CHECK(std::abs(v.chi) == doctest::Approx(0.0));
  BondAmplitude amp2{cplx(0.3, -0.2), cplx(-1.1, 0.4), "b", 2.0};
  const auto w = plane_wave(amp2, {1.3}, 0.0);
  CHECK(w.phi == amp2.mu + amp2.mu_hat);
  CHECK_THROWS_AS(plane_wave(amp, {1.3}, -0.1), std::domain_error);
  CHECK_THROWS_AS(plane_wave(amp, {1.3}, 2.1), std::domain_error);
}

TEST_CASE("plane wave satisfies the first-order system under finite differences") {
  // independent oracle: central differences on both components,
  // -chi' + phi = E phi and phi' - chi = E chi
  const double h = 1e-5;
  for (int t = 0; t < 60; ++t) {
    const double k = 0.2 + 4.0 * counter_uniform(7, t);
    const DispersionModel m{k};
    const double E = energy(m);
    BondAmplitude amp{cplx(2 * counter_uniform(8, t) - 1, 2 * counter_uniform(9, t) - 1),
                      cplx(2 * counter_uniform(10, t) - 1, 2 * counter_uniform(11, t) - 1),
                      "b", 1.0};
    const double x = 0.2 + 0.6 * counter_uniform(12, t);
    const auto c0 = plane_wave(amp, m, x - h);
    const auto c1 = plane_wave(amp, m, x);
    const auto c2 = plane_wave(amp, m, x + h);
    const cplx dphi = (c2.phi - c0.phi) / (2 * h);
    const cplx dchi = (c2.chi - c0.chi) / (2 * h);
    CHECK(std::abs(-dchi + c1.phi - E * c1.phi) < 1e-6);
    CHECK(std::abs(dphi - c1.chi - E * c1.chi) < 1e-6);
  }
}
