#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "diracgraph/rng.hpp"
#include "diracgraph/secular.hpp"

using namespace dg;
namespace {
constexpr double pi = std::numbers::pi;

// Independent comb oracle: real dispersion polynomial
//   2 cos(k l2) (cos(k l1) - cos alpha) - sin(k l1) sin(k l2) = 0,
// derived by eliminating the comb amplitude relations by hand. Roots located
// by sign-change bisection, so the test alphas avoid band-edge double roots.
double comb_dispersion(double k, double l1, double l2, double alpha) {
  return 2.0 * std::cos(k * l2) * (std::cos(k * l1) - std::cos(alpha)) -
         std::sin(k * l1) * std::sin(k * l2);
}

std::vector<double> comb_analytic_roots(double l1, double l2, double alpha, double k_min,
                                        double k_max) {
  std::vector<double> out;
  const int n = 200000;
  double prev_k = k_min, prev_v = comb_dispersion(k_min, l1, l2, alpha);
  for (int i = 1; i <= n; ++i) {
    const double k = k_min + (k_max - k_min) * i / n;
    const double v = comb_dispersion(k, l1, l2, alpha);
    if ((prev_v < 0 && v >= 0) || (prev_v > 0 && v <= 0)) {
      double a = prev_k, b = k;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        const double vm = comb_dispersion(m, l1, l2, alpha);
        if ((comb_dispersion(a, l1, l2, alpha) < 0) == (vm < 0)) a = m; else b = m;
      }
      out.push_back(0.5 * (a + b));
    }
    prev_k = k; prev_v = v;
  }
  return out;
}
}  // namespace

TEST_CASE("printed comb matrix entries") {
  const SecularSystem sys = comb_system(1.0, 1.0);
  const cplx w1 = std::exp(cplx(0, 0.37)), w2 = std::exp(cplx(0, 1.11)),
             z = std::exp(cplx(0, 0.59));
  const Eigen::MatrixXcd S = s_matrix(sys, w1, w2, w2, z);
  CHECK(std::abs(S(0, 0) - w1 / z) < 1e-15);       // e^{-i alpha + i k l1}
  CHECK(std::abs(S(3, 0)) == 0.0);                 // printed zero
  CHECK(std::abs(S(0, 2) - (1.0 / z - w1)) < 1e-15);
  CHECK(std::abs(S(1, 3) - w2) < 1e-15);
  CHECK(std::abs(S(2, 1) - z) < 1e-15);
  // all-ones phases give a small-integer matrix
  const Eigen::MatrixXcd S1 = s_matrix(sys, 1.0, 1.0, 1.0, 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(S1(i, j).imag()) == 0.0);
      CHECK(std::abs(S1(i, j)) <= 2.0);
    }
}

TEST_CASE("printed ladder matrix entries") {
  const SecularSystem sys = ladder_system(1.0, 1.0);
  const cplx w1 = std::exp(cplx(0, 0.81)), w2 = std::exp(cplx(0, 0.23)),
             z = std::exp(cplx(0, 2.0));
  const Eigen::MatrixXcd S = s_matrix(sys, w1, w2, w2, z);
  CHECK(std::abs(S(2, 5) - (-w2)) < 1e-15);  // row 3, column 6 in the printed layout
  CHECK(std::abs(S(3, 0) - (-z + w1)) < 1e-15);
  CHECK(std::abs(S(5, 1) - 1.0) < 1e-15);
  CHECK(std::abs(S(1, 4) - (1.0 / z - w1)) < 1e-15);
}

TEST_CASE("matrix entries are unimodular-bounded Laurent monomial sums") {
  for (const SecularSystem& sys :
       {comb_system(1, 1), ladder_system(1, 1), loop_system(1, 1, 1)}) {
    for (int t = 0; t < 10; ++t) {
      const cplx w1 = std::exp(cplx(0, 2 * pi * counter_uniform(3, 3 * t)));
      const cplx w2 = std::exp(cplx(0, 2 * pi * counter_uniform(3, 3 * t + 1)));
      const cplx w3 = std::exp(cplx(0, 2 * pi * counter_uniform(3, 3 * t + 2)));
      const cplx z = std::exp(cplx(0, 2 * pi * counter_uniform(4, t)));
      const Eigen::MatrixXcd S = s_matrix(sys, w1, w2, w3, z);
      CHECK(S.cwiseAbs().maxCoeff() <= 2.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(s_matrix(comb_system(1, 1), cplx(1.5, 0), 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("secular value is 2pi periodic in alpha and surrogate vanishes at roots") {
  const SecularSystem sys = comb_system(1.0, 1.0);
  for (int t = 0; t < 12; ++t) {
    const double k = 0.4 + 6.0 * counter_uniform(5, t);
    const double a = -pi + 2 * pi * counter_uniform(6, t);
    const cplx f0 = secular_value(sys, k, a);
    const cplx f1 = secular_value(sys, k, a + 2 * pi);
    CHECK(std::abs(f1 - f0) <= 1e-12 * (1.0 + std::abs(f0)));
  }
  const auto roots = find_roots_k(sys, 0.9, 1e-3, 8.0).roots;
  REQUIRE(!roots.empty());
  for (double r : roots) CHECK(secular_surrogate_rel(sys, r, 0.9) < 1e-8);
  for (std::size_t i = 0; i + 1 < roots.size(); ++i)
    CHECK(secular_surrogate_rel(sys, 0.5 * (roots[i] + roots[i + 1]), 0.9) > 1e-5);
}

TEST_CASE("comb roots match the analytic dispersion oracle") {
  const double l1 = 1.0, l2 = 1.0;
  const SecularSystem sys = comb_system(l1, l2);
  for (double alpha : {pi / 3, 2.0}) {
    const auto got = find_roots_k(sys, alpha, 1e-3, 20.0).roots;
    const auto want = comb_analytic_roots(l1, l2, alpha, 1e-3, 20.0);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(std::abs(got[i] - want[i]) < 1e-8);
  }
  // incommensurate lengths as well
  const SecularSystem sys2 = comb_system(0.7, 1.3);
  const auto got2 = find_roots_k(sys2, 1.1, 1e-3, 12.0).roots;
  const auto want2 = comb_analytic_roots(0.7, 1.3, 1.1, 1e-3, 12.0);
  REQUIRE(got2.size() == want2.size());
  for (std::size_t i = 0; i < got2.size(); ++i) CHECK(std::abs(got2[i] - want2[i]) < 1e-8);
}

TEST_CASE("root sets are invariant under flux reversal") {
  for (const SecularSystem& sys :
       {comb_system(1, 1), ladder_system(2.5, 1), loop_system(0.2, 1)}) {
    const auto rp = find_roots_k(sys, 0.8, 1e-3, 10.0).roots;
    const auto rn = find_roots_k(sys, -0.8, 1e-3, 10.0).roots;
    REQUIRE(rp.size() == rn.size());
    for (std::size_t i = 0; i < rp.size(); ++i) CHECK(std::abs(rp[i] - rn[i]) < 1e-6);
  }
}

TEST_CASE("empty scan range returns no roots") {
  const SecularSystem sys = comb_system(1.0, 1.0);
  const auto res = find_roots_k(sys, 0.3, 0.4999, 0.5, 16);
  CHECK(res.roots.empty());
  CHECK(res.flat.empty());
}

TEST_CASE("scan machinery flags flat plateaus as intervals") {
  // synthetic relative surrogate: an exact zero stretch on [2, 3]
  auto rel = [](double k) {
    if (k < 2.0) return 2.0 - k;
    if (k > 3.0) return k - 3.0;
    return 0.0;
  };
  const auto res = detail::scan_minima(rel, 0.5, 4.5, 400, 1e-10, 1e-8, nullptr);
  REQUIRE(res.flat.size() == 1);
  CHECK(res.flat[0].k_lo > 1.9);
  CHECK(res.flat[0].k_hi < 3.1);
  CHECK(res.roots.empty());
}

TEST_CASE("alpha polynomial: comb degree band, reconstruction, and band-point roots") {
  const SecularSystem sys = comb_system(1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double k = 0.3 + 8.0 * counter_uniform(9, t);
    const AlphaPolynomial poly = alpha_polynomial(sys, k);
    if (poly.degenerate) continue;
    CHECK(poly.degree() <= 4);  // z-degrees -2..+2 before shifting
    const double a = 0.3;
    CHECK(std::abs(poly.eval_f(a) - secular_value(sys, k, a)) <=
          1e-10 * std::max(poly.sample_scale, 1e-30));
  }
  const double alpha0 = 1.2;
  const auto roots = find_roots_k(sys, alpha0, 0.5, 6.0).roots;
  REQUIRE(!roots.empty());
  for (double r : roots) {
    const AlphaPolynomial poly = alpha_polynomial(sys, r);
    double best = 1e18;
    for (const auto& z : poly.roots()) best = std::min(best, std::abs(z - std::exp(cplx(0, alpha0))));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("alpha polynomial round trip: unit roots are spectrum witnesses") {
  const SecularSystem sys = ladder_system(1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const double k = 0.5 + 7.0 * counter_uniform(17, t);
    const AlphaPolynomial poly = alpha_polynomial(sys, k);
    if (poly.degenerate) continue;
    for (const auto& z : poly.roots()) {
      if (std::abs(std::abs(z) - 1.0) < 1e-6)
        CHECK(secular_surrogate_rel(sys, k, std::arg(z)) < 1e-6);
    }
  }
}

TEST_CASE("star secular: N=1 collapses to 2 cos(kL)") {
  const StarSecularSystem star{{1.0}};
  for (double k = 0.1; k < 12.0; k += 0.37) {
    CHECK(std::abs(star_secular(star, k) - 2.0 * std::cos(k)) < 1e-12);
  }
  const auto roots = star_roots(star, 0.1, 10.5 * pi);
  REQUIRE(roots.size() >= 10);
  for (std::size_t n = 0; n < 10; ++n)
    CHECK(std::abs(roots[n] - (n + 0.5) * pi) < 1e-10);
}

TEST_CASE("star N=2 equal legs: Dirichlet interval roots n pi / 2") {
  // oracle: two legs of length L joined at the center act as a single
  // interval of length 2L with phi = 0 on both ends
  const StarSecularSystem star{{1.0, 1.0}};
  const auto roots = star_roots(star, 0.1, 10.0);
  REQUIRE(roots.size() >= 6);
  for (std::size_t n = 0; n < 6; ++n)
    CHECK(std::abs(roots[n] - (n + 1) * pi / 2.0) < 1e-9);
}

TEST_CASE("star N=3 equal lengths: roots invariant under bond permutation") {
  const StarSecularSystem a{{1.0, 1.0, 1.0}};
  const StarSecularSystem b{{1.0, 1.0, 1.0}};
  const auto ra = star_roots(a, 0.1, 9.0);
  const auto rb = star_roots(b, 0.1, 9.0);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i] == rb[i]);
  // and under an actual permutation of distinct lengths
  const auto r1 = star_roots(StarSecularSystem{{0.8, 1.0, 1.3}}, 0.1, 9.0);
  const auto r2 = star_roots(StarSecularSystem{{1.3, 0.8, 1.0}}, 0.1, 9.0);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(std::abs(r1[i] - r2[i]) < 1e-10);
}

TEST_CASE("custom topology falls back to the assembled system") {
  const SecularSystem sys = custom_system(comb_cell(1.0, 1.0));
  CHECK(sys.from_assembler());
  CHECK_THROWS_AS(s_matrix(sys, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  const SecularSystem printed = comb_system(1.0, 1.0);
  const auto r1 = find_roots_k(sys, 0.6, 1e-3, 6.0).roots;
  const auto r2 = find_roots_k(printed, 0.6, 1e-3, 6.0).roots;
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(std::abs(r1[i] - r2[i]) < 1e-8);
}
