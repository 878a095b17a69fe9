#include "diracgraph/secular.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "diracgraph/cell_system.hpp"

namespace dg {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// Range-reduced phase: keeps e^{i t} accurate for large k*l and makes the
// 2pi periodicity of every evaluation explicit.
cplx unit_phase(double t) { return std::exp(cplx(0.0, std::remainder(t, two_pi))); }

void require_unimodular(cplx w, const char* name) {
  if (std::abs(std::abs(w) - 1.0) > 1e-12)
    throw std::domain_error(std::string("s_matrix: ") + name + " must be unimodular");
}
}  // namespace

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::comb: return "comb";
    case Topology::ladder: return "ladder";
    case Topology::loop: return "loop";
    case Topology::custom: return "custom";
  }
  return "?";
}

Topology topology_from_name(const std::string& name) {
  if (name == "comb") return Topology::comb;
  if (name == "ladder") return Topology::ladder;
  if (name == "loop") return Topology::loop;
  if (name == "custom") return Topology::custom;
  throw std::invalid_argument("unknown topology: " + name);
}

int SecularSystem::dim() const {
  switch (topology) {
    case Topology::comb: return 4;
    case Topology::ladder: return 6;
    case Topology::loop: return 6;
    case Topology::custom: return 2 * static_cast<int>(cell->bonds.size());
  }
  return 0;
}

double SecularSystem::total_length() const {
  if (topology == Topology::custom) return cell->total_length();
  return l1 + l2 + (topology == Topology::loop ? l3 : 0.0);
}

CellSpec SecularSystem::oracle_cell() const {
  switch (topology) {
    case Topology::comb: return comb_cell(l1, l2);
    case Topology::ladder: return ladder_cell(l1, l2);
    case Topology::loop: return loop_cell(l1, l2, l3);
    case Topology::custom: return *cell;
  }
  throw std::logic_error("unreachable");
}

SecularSystem comb_system(double l1, double l2) {
  if (l1 <= 0 || l2 <= 0) throw std::invalid_argument("lengths must be positive");
  return {Topology::comb, l1, l2, 0.0, std::nullopt};
}

SecularSystem ladder_system(double l1, double l2) {
  if (l1 <= 0 || l2 <= 0) throw std::invalid_argument("lengths must be positive");
  return {Topology::ladder, l1, l2, 0.0, std::nullopt};
}

SecularSystem loop_system(double l1, double l2, double l3) {
  if (l3 == 0.0) l3 = l2;
  if (l1 <= 0 || l2 <= 0 || l3 <= 0) throw std::invalid_argument("lengths must be positive");
  return {Topology::loop, l1, l2, l3, std::nullopt};
}

SecularSystem custom_system(CellSpec cell) {
  cell.validate();
  SecularSystem s;
  s.topology = Topology::custom;
  s.cell = std::move(cell);
  return s;
}

Eigen::MatrixXcd s_matrix(const SecularSystem& sys, cplx w1, cplx w2, cplx w3, cplx z) {
  require_unimodular(w1, "w1");
  require_unimodular(w2, "w2");
  require_unimodular(w3, "w3");
  require_unimodular(z, "z");
  const cplx zb = 1.0 / z;
  switch (sys.topology) {
    case Topology::comb: {
      Eigen::MatrixXcd S(4, 4);
      S << zb * w1, 0, zb - w1, 0,
           -1.0 + zb * w1, 0, w1 - zb, w2,
           -w1, z, 0, z * w2,
           0, w2, 0, 0;
      return S;
    }
    case Topology::ladder: {
      Eigen::MatrixXcd S(6, 6);
      S << zb * w1, 0, 0, zb - w1, 0, 0,
           0, zb * w1, 0, 0, zb - w1, 0,
           1, 0, 0, w1, 0, -w2,
           -z + w1, 0, z, z * w1, 0, z * w2,
           0, -z + w1, z * w2, 0, z * w1, -z,
           0, 1, -w2, 0, w1, 0;
      return S;
    }
    case Topology::loop: {
      // Flux rail in slot 1, the two arcs in slots 2 and 3. The paper's
      // printed slot assignment puts the rail phase third, which contradicts
      // its own l3 = l2 reduction; see the loop secular tests.
      const cplx a = w2, b = w3, r = w1;
      Eigen::MatrixXcd S(6, 6);
      S << 0, 1, 0, -a, b, 0,
           0, 0, zb * r, 0, -b, zb,
           a, 0, 0, 1, 0, -r,
           -a, b, 0, 0, 1, 0,
           1.0 / b, 1.0 / b, -zb * r / b, -a / b, 0, zb / b,
           -a / r, -b / r, 1.0 / r, 1.0 / r, 1.0 / r, 0;
      return S;
    }
    case Topology::custom:
      throw std::invalid_argument(
          "s_matrix: custom topology has no phase-form scattering matrix; "
          "secular_* evaluate the assembled cell system instead");
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXcd secular_matrix(const SecularSystem& sys, double k, double alpha) {
  if (k <= 0.0) throw std::domain_error("secular_matrix: k must be > 0");
  if (sys.from_assembler()) return assemble_cell_system(*sys.cell, k, alpha);
  const Eigen::MatrixXcd S = s_matrix(sys, unit_phase(k * sys.l1), unit_phase(k * sys.l2),
                                      unit_phase(k * sys.l3), unit_phase(alpha));
  return Eigen::MatrixXcd::Identity(S.rows(), S.cols()) - S;
}

cplx secular_value(const SecularSystem& sys, double k, double alpha) {
  return secular_matrix(sys, k, alpha).determinant();
}

double secular_surrogate(const SecularSystem& sys, double k, double alpha) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(secular_matrix(sys, k, alpha));
  return svd.singularValues().tail(1)(0);
}

double secular_surrogate_rel(const SecularSystem& sys, double k, double alpha) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(secular_matrix(sys, k, alpha));
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

// ---------------------------------------------------------------------------
// alpha polynomial

cplx AlphaPolynomial::eval_f(double alpha) const {
  if (degenerate) return 0.0;
  const cplx z = unit_phase(alpha);
  cplx p = 0.0;
  for (int i = degree(); i >= 0; --i) p = p * z + coeffs[i];
  return p * unit_phase(-shift * alpha);
}

std::vector<cplx> AlphaPolynomial::roots() const {
  // strip leading/trailing coefficients already truncated to exact zeros
  int lo = 0, hi = degree();
  while (hi >= lo && coeffs[hi] == 0.0) --hi;
  while (lo <= hi && coeffs[lo] == 0.0) ++lo;
  const int d = hi - lo;
  if (d < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  const cplx lead = coeffs[hi];
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -coeffs[lo + i] / lead;
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return std::arg(a) < std::arg(b) || (std::arg(a) == std::arg(b) && std::abs(a) < std::abs(b));
  });
  return out;
}

std::vector<double> AlphaPolynomial::unit_circle_angles(double tol_z) const {
  std::vector<double> out;
  for (const cplx& z : roots())
    if (std::abs(std::abs(z) - 1.0) <= tol_z) out.push_back(std::arg(z));
  std::sort(out.begin(), out.end());
  return out;
}

AlphaPolynomial alpha_polynomial_of(const std::function<cplx(double)>& f_of_alpha, int samples) {
  int m = std::max(4, samples);
  for (;; m *= 2) {
    std::vector<cplx> f(m);
    double scale = 0.0;
    for (int j = 0; j < m; ++j) {
      f[j] = f_of_alpha(two_pi * j / m);
      scale = std::max(scale, std::abs(f[j]));
    }
    AlphaPolynomial poly;
    poly.sample_scale = scale;
    if (scale < 1e-12) {  // identically zero in alpha at this point
      poly.degenerate = true;
      poly.truncation_threshold = 0.0;
      return poly;
    }
    // inverse DFT: a_r = (1/M) sum_j f_j e^{-2pi i j r / M}, degree r mapped
    // into [-M/2, M/2)
    const int half = m / 2;
    std::vector<cplx> laurent(m);
    for (int r = 0; r < m; ++r) {
      cplx acc = 0.0;
      for (int j = 0; j < m; ++j) acc += f[j] * unit_phase(-two_pi * j * r / m);
      laurent[r] = acc / static_cast<double>(m);
    }
    // reorder to degrees -half .. half-1
    std::vector<cplx> by_degree(m);
    for (int r = 0; r < m; ++r) {
      const int deg = r < half ? r : r - m;
      by_degree[deg + half] = laurent[r];
    }
    double amax = 0.0;
    for (const cplx& a : by_degree) amax = std::max(amax, std::abs(a));
    const double thr = 1e-12 * amax;
    int lo = 0, hi = m - 1;
    while (hi >= lo && std::abs(by_degree[hi]) <= thr) --hi;
    while (lo <= hi && std::abs(by_degree[lo]) <= thr) ++lo;
    poly.truncation_threshold = thr;
    if (hi < lo) {
      poly.degenerate = true;
      return poly;
    }
    poly.shift = half - lo;
    poly.coeffs.assign(by_degree.begin() + lo, by_degree.begin() + hi + 1);
    // held-out reconstruction check; aliasing doubles the sample count
    bool ok = true;
    for (double a : {0.3, 1.0 + 1e-3, 2.7}) {
      const cplx err = poly.eval_f(a) - f_of_alpha(a);
      if (std::abs(err) > 1e-10 * scale) { ok = false; break; }
    }
    if (ok) return poly;
    if (m >= 256) throw numerical_error("alpha_polynomial: reconstruction failed at 256 samples");
  }
}

AlphaPolynomial alpha_polynomial(const SecularSystem& sys, double k, int samples) {
  return alpha_polynomial_of([&](double a) { return secular_value(sys, k, a); }, samples);
}

// ---------------------------------------------------------------------------
// root scan

namespace detail {

namespace {
double golden_min(const std::function<double(double)>& f, double a, double b, double tol,
                  double* fmin) {
  constexpr double gr = 0.6180339887498949;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double km = 0.5 * (a + b);
  if (fmin) *fmin = std::min(fc, fd);
  return km;
}
}  // namespace

RootFindResult scan_minima(const std::function<double(double)>& rel, double k_min, double k_max,
                           int samples, double tol, double accept_rel,
                           const std::function<int(double)>& multiplicity_of) {
  RootFindResult out;
  if (!(k_min < k_max)) return out;
  const int n = std::max(samples, 8);
  std::vector<double> ks(n), v(n);
  for (int i = 0; i < n; ++i) {
    ks[i] = k_min + (k_max - k_min) * (i + 0.5) / n;
    v[i] = rel(ks[i]);
  }
  // flat plateaus: maximal runs already below threshold
  std::vector<bool> in_flat(n, false);
  for (int i = 0; i < n;) {
    if (v[i] < accept_rel) {
      int j = i;
      while (j + 1 < n && v[j + 1] < accept_rel) ++j;
      if (j - i + 1 >= 3 && ks[j] - ks[i] > 100.0 * tol) {
        out.flat.push_back({ks[i], ks[j]});
        for (int t = i; t <= j; ++t) in_flat[t] = true;
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  auto push_root = [&](double km) {
    const double f = rel(km);
    if (f >= accept_rel) return;
    if (!out.roots.empty() && km - out.roots.back() < 10.0 * tol) {
      // same root seen twice: keep the earlier one
      return;
    }
    out.roots.push_back(km);
    out.multiplicity.push_back(multiplicity_of ? multiplicity_of(km) : 1);
  };
  for (int i = 0; i < n; ++i) {
    if (in_flat[i]) continue;
    const double left = i > 0 ? v[i - 1] : v[i] + 1.0;
    const double right = i + 1 < n ? v[i + 1] : v[i] + 1.0;
    if (v[i] <= left && v[i] <= right && v[i] < 0.5) {
      const double a = i > 0 ? ks[i - 1] : k_min;
      const double b = i + 1 < n ? ks[i + 1] : k_max;
      double fmin = 0.0;
      const double km = golden_min(rel, a, b, tol, &fmin);
      push_root(km);
    }
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

}  // namespace detail

RootFindResult find_roots_k(const SecularSystem& sys, double alpha, double k_min, double k_max,
                            int samples, double tol) {
  if (!(0.0 < k_min && k_min < k_max))
    throw std::domain_error("find_roots_k: need 0 < k_min < k_max");
  if (samples <= 0) {
    const double guide = 32.0 * (k_max - k_min) * sys.total_length() / two_pi;
    samples = std::max(1024, static_cast<int>(std::ceil(guide)));
  }
  auto rel = [&](double k) { return secular_surrogate_rel(sys, k, alpha); };
  auto mult = [&](double k) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(secular_matrix(sys, k, alpha));
    const auto& sv = svd.singularValues();
    int m = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= 1e-8 * sv(0)) ++m;
    return std::max(m, 1);
  };
  return detail::scan_minima(rel, k_min, k_max, samples, tol, 1e-8, mult);
}

// ---------------------------------------------------------------------------
// star graph

Eigen::MatrixXcd star_matrix(const StarSecularSystem& star, double k) {
  const int n = star.n();
  if (n < 1) throw std::invalid_argument("star_matrix: need at least one bond");
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  // A = [[1^T, -I], [1, 1]], B = [[1^T, -I], [-1, -1]]
  for (int i = 0; i + 1 < n; ++i) {
    M(i, 0) = 1.0;
    M(i, i + 1) = -1.0;
    M(i, n) = 1.0;
    M(i, n + i + 1) = -1.0;
  }
  for (int j = 0; j < n; ++j) {
    M(n - 1, j) = 1.0;
    M(n - 1, n + j) = -1.0;
  }
  for (int j = 0; j < n; ++j) {
    M(n + j, j) = unit_phase(k * star.lengths[j]);
    M(n + j, n + j) = unit_phase(-k * star.lengths[j]);
  }
  return M;
}

cplx star_secular(const StarSecularSystem& star, double k) {
  if (k <= 0.0) throw std::domain_error("star_secular: k must be > 0");
  return star_matrix(star, k).determinant();
}

std::vector<double> star_roots(const StarSecularSystem& star, double k_min, double k_max,
                               int samples, double tol) {
  if (samples <= 0) {
    double total = 0.0;
    for (double l : star.lengths) total += l;
    samples = std::max(512, static_cast<int>(std::ceil(32.0 * (k_max - k_min) * total / two_pi)));
  }
  auto rel = [&](double k) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(star_matrix(star, k));
    const auto& sv = svd.singularValues();
    return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  };
  auto res = detail::scan_minima(rel, k_min, k_max, samples, tol, 1e-8, nullptr);
  return res.roots;
}

}  // namespace dg
