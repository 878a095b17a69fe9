#include "diracgraph/torus.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "diracgraph/parallel.hpp"
#include "diracgraph/rng.hpp"

namespace dg {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

double mod_2pi(double x) {
  double r = std::fmod(x, two_pi);
  if (r < 0) r += two_pi;
  return r;
}

void require_torus_reducible(const SecularSystem& sys) {
  if (sys.topology == Topology::custom)
    throw std::invalid_argument(
        "torus reduction unsupported for custom cells: the assembled system is not a "
        "function of (kappa1, kappa2) mod 2pi");
  if (sys.topology == Topology::loop &&
      std::abs(sys.l3 - sys.l2) > 1e-12 * std::max(sys.l2, sys.l3))
    throw std::invalid_argument(
        "torus reduction requires l3 = l2 for the loop topology (unsupported reduction)");
}

Eigen::MatrixXcd torus_matrix(const SecularSystem& sys, double kappa1, double kappa2,
                              double alpha) {
  const cplx w1 = std::exp(cplx(0.0, kappa1));
  const cplx w2 = std::exp(cplx(0.0, kappa2));
  const Eigen::MatrixXcd S = s_matrix(sys, w1, w2, w2, std::exp(cplx(0.0, alpha)));
  return Eigen::MatrixXcd::Identity(S.rows(), S.cols()) - S;
}
}  // namespace

TorusPoint make_torus_point(double kappa1, double kappa2) {
  return {mod_2pi(kappa1), mod_2pi(kappa2)};
}

cplx phi(const SecularSystem& sys, TorusPoint p, double alpha) {
  require_torus_reducible(sys);
  return torus_matrix(sys, p.kappa1, p.kappa2, alpha).determinant();
}

double phi_surrogate(const SecularSystem& sys, TorusPoint p, double alpha) {
  require_torus_reducible(sys);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(torus_matrix(sys, p.kappa1, p.kappa2, alpha));
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

AlphaPolynomial alpha_polynomial_torus(const SecularSystem& sys, TorusPoint p, int samples) {
  require_torus_reducible(sys);
  return alpha_polynomial_of(
      [&](double a) { return torus_matrix(sys, p.kappa1, p.kappa2, a).determinant(); }, samples);
}

MembershipResult membership(const SecularSystem& sys, TorusPoint p, double tol_z) {
  const AlphaPolynomial poly = alpha_polynomial_torus(sys, p);
  MembershipResult r;
  if (poly.degenerate) {
    r.in_spectrum = true;
    r.degenerate = true;
    r.witness_alpha = 0.0;
    return r;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const cplx& z : poly.roots()) {
    const double d = std::abs(std::abs(z) - 1.0);
    if (d < best) {
      best = d;
      r.witness_alpha = std::arg(z);
    }
  }
  r.in_spectrum = best <= tol_z;
  return r;
}

// ---------------------------------------------------------------------------
// zero-set curves

namespace {

struct NodeWitness {
  bool valid = false;
  double d = 0.0;  // wrapped(theta_best - alpha), in (-pi, pi]
};

double wrap_angle(double a) {
  double r = std::remainder(a, two_pi);
  if (r <= -pi) r += two_pi;
  return r;
}

struct Segment {
  long long e0, e1;  // global edge ids of the two endpoints
  double x0, y0, x1, y1;
};

}  // namespace

std::vector<ZeroCurve> zero_set_curves(const SecularSystem& sys, double alpha, int grid_n,
                                       double tol_z, int threads) {
  require_torus_reducible(sys);
  if (grid_n < 64) throw std::domain_error("zero_set_curves: grid_n must be >= 64");
  // The witness field is folded to [0, pi]; exactly at the fold values 0 and
  // pi the signed distance is one-sided and the level set cannot be crossed.
  // cos is flat there, so a 1e-5 nudge moves the curves by ~5e-11, far below
  // the grid interpolation error.
  const double alpha_fold = std::abs(std::remainder(alpha, two_pi));
  const double alpha_march = std::clamp(alpha_fold, 1e-5, pi - 1e-5);
  const int n = grid_n;
  const double h = two_pi / n;
  std::vector<NodeWitness> node(static_cast<std::size_t>(n + 1) * (n + 1));
  parallel_for(static_cast<std::size_t>(n + 1) * (n + 1), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx % (n + 1));
    const int j = static_cast<int>(idx / (n + 1));
    const AlphaPolynomial poly = alpha_polynomial_torus(sys, {i * h, j * h});
    NodeWitness w;
    if (!poly.degenerate) {
      double best = std::numeric_limits<double>::infinity();
      for (const cplx& z : poly.roots()) {
        if (std::abs(std::abs(z) - 1.0) > tol_z) continue;
        const double d = wrap_angle(std::arg(z) - alpha_march);
        if (std::abs(d) < std::abs(best)) best = d;
        // the conjugate-symmetric partner competes as well
        const double d2 = wrap_angle(-std::arg(z) - alpha_march);
        if (std::abs(d2) < std::abs(best)) best = d2;
      }
      if (std::isfinite(best)) {
        w.valid = true;
        w.d = best;
      }
    }
    node[idx] = w;
  });

  auto at = [&](int i, int j) -> const NodeWitness& { return node[static_cast<std::size_t>(j) * (n + 1) + i]; };
  // global edge ids: horizontal edge (i,j)-(i+1,j): 2*(j*(n+1)+i); vertical
  // edge (i,j)-(i,j+1): 2*(j*(n+1)+i)+1
  auto hedge = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * (n + 1) + i); };
  auto vedge = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * (n + 1) + i) + 1; };

  std::vector<Segment> segs;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const NodeWitness* c[4] = {&at(i, j), &at(i + 1, j), &at(i + 1, j + 1), &at(i, j + 1)};
      bool ok = true;
      for (const auto* w : c) ok = ok && w->valid;
      if (!ok) continue;
      double maxjump = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          maxjump = std::max(maxjump, std::abs(c[a]->d - c[b]->d));
      if (maxjump > pi / 4) continue;  // branch switch: split here
      int sign[4];
      for (int a = 0; a < 4; ++a) sign[a] = c[a]->d >= 0.0 ? 1 : 0;
      const int code = sign[0] | sign[1] << 1 | sign[2] << 2 | sign[3] << 3;
      if (code == 0 || code == 15) continue;
      // edge order: bottom (0-1), right (1-2), top (2-3), left (3-0)
      const long long eid[4] = {hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)};
      double ex[4], ey[4];
      bool cut[4];
      const double xv[4] = {i * h, (i + 1) * h, (i + 1) * h, i * h};
      const double yv[4] = {j * h, j * h, (j + 1) * h, (j + 1) * h};
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        cut[e] = sign[a] != sign[b];
        if (cut[e]) {
          const double da = c[a]->d, db = c[b]->d;
          const double t = da / (da - db);
          ex[e] = xv[a] + t * (xv[b] - xv[a]);
          ey[e] = yv[a] + t * (yv[b] - yv[a]);
        }
      }
      std::vector<int> cuts;
      for (int e = 0; e < 4; ++e)
        if (cut[e]) cuts.push_back(e);
      auto push_seg = [&](int a, int b) {
        segs.push_back({eid[a], eid[b], ex[a], ey[a], ex[b], ey[b]});
      };
      if (cuts.size() == 2) {
        push_seg(cuts[0], cuts[1]);
      } else if (cuts.size() == 4) {
        const double center = 0.25 * (c[0]->d + c[1]->d + c[2]->d + c[3]->d);
        if ((center >= 0.0) == (sign[0] == 1)) {
          push_seg(0, 1);
          push_seg(2, 3);
        } else {
          push_seg(3, 0);
          push_seg(1, 2);
        }
      }
    }
  }

  // chain segments through shared edges
  std::multimap<long long, std::size_t> by_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_edge.insert({segs[s].e0, s});
    by_edge.insert({segs[s].e1, s});
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<ZeroCurve> curves;
  auto next_at = [&](long long edge, std::size_t self) -> long long {
    auto range = by_edge.equal_range(edge);
    std::size_t found = segs.size();
    int count = 0;
    for (auto it = range.first; it != range.second; ++it) {
      if (it->second == self || used[it->second]) continue;
      ++count;
      found = it->second;
    }
    return count == 1 ? static_cast<long long>(found) : -1;
  };
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = true;
    std::vector<std::pair<double, double>> pts = {{segs[s0].x0, segs[s0].y0},
                                                  {segs[s0].x1, segs[s0].y1}};
    std::vector<long long> endpoints = {segs[s0].e0, segs[s0].e1};
    // extend forward from e1, then backward from e0
    for (int dir = 0; dir < 2; ++dir) {
      long long edge = dir == 0 ? endpoints[1] : endpoints[0];
      std::size_t cur = s0;
      while (true) {
        const long long nxt = next_at(edge, cur);
        if (nxt < 0) break;
        const Segment& sg = segs[static_cast<std::size_t>(nxt)];
        used[static_cast<std::size_t>(nxt)] = true;
        const bool from0 = sg.e0 == edge;
        const std::pair<double, double> p = from0 ? std::make_pair(sg.x1, sg.y1)
                                                  : std::make_pair(sg.x0, sg.y0);
        if (dir == 0)
          pts.push_back(p);
        else
          pts.insert(pts.begin(), p);
        edge = from0 ? sg.e1 : sg.e0;
        cur = static_cast<std::size_t>(nxt);
        if (edge == (dir == 0 ? endpoints[0] : endpoints[1])) break;  // closed
      }
      if (dir == 0) endpoints[1] = edge; else endpoints[0] = edge;
    }
    ZeroCurve curve;
    curve.alpha = alpha;
    curve.curve_id = static_cast<int>(curves.size());
    const bool closed = endpoints[0] == endpoints[1] && pts.size() > 2;
    curve.closed = closed;
    for (const auto& [x, y] : pts) curve.points.push_back({x, y});
    curves.push_back(std::move(curve));
  }
  return curves;
}

// ---------------------------------------------------------------------------
// probability

ProbabilityEstimate probability(const SecularSystem& sys, int grid_n, double tol_z,
                                ProbMethod method, std::uint64_t seed, int threads,
                                long long mc_samples) {
  require_torus_reducible(sys);
  ProbabilityEstimate est;
  est.topology = sys.topology;
  est.method = method;
  est.grid_n = grid_n;
  est.tol_z = tol_z;
  est.seed = seed;
  if (method == ProbMethod::grid) {
    if (grid_n < 128) throw std::domain_error("probability: grid method needs grid_n >= 128");
    const int n = grid_n;
    const double h = two_pi / n;
    std::vector<std::uint8_t> in(static_cast<std::size_t>(n) * n);
    parallel_for(static_cast<std::size_t>(n) * n, threads, [&](std::size_t idx) {
      const int i = static_cast<int>(idx % n);
      const int j = static_cast<int>(idx / n);
      in[idx] = membership(sys, {(i + 0.5) * h, (j + 0.5) * h}, tol_z).in_spectrum ? 1 : 0;
    });
    long long count = 0;
    long long boundary = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = static_cast<std::size_t>(j) * n + i;
        count += in[idx];
        const std::size_t right = static_cast<std::size_t>(j) * n + (i + 1) % n;
        const std::size_t up = static_cast<std::size_t>((j + 1) % n) * n + i;
        if (in[idx] != in[right] || in[idx] != in[up]) ++boundary;
      }
    est.samples = static_cast<long long>(n) * n;
    est.p_sigma = static_cast<double>(count) / static_cast<double>(est.samples);
    est.error_bound = 2.0 * static_cast<double>(boundary) / static_cast<double>(est.samples);
  } else {
    const long long ns = mc_samples > 0 ? mc_samples : static_cast<long long>(grid_n) * grid_n;
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(ns));
    parallel_for(static_cast<std::size_t>(ns), threads, [&](std::size_t i) {
      const double x = two_pi * counter_uniform(seed, 2 * i);
      const double y = two_pi * counter_uniform(seed, 2 * i + 1);
      hit[i] = membership(sys, {x, y}, tol_z).in_spectrum ? 1 : 0;
    });
    long long count = 0;
    for (auto v : hit) count += v;
    est.samples = ns;
    est.p_sigma = static_cast<double>(count) / static_cast<double>(ns);
    est.error_bound = 3.0 * std::sqrt(est.p_sigma * (1.0 - est.p_sigma) / static_cast<double>(ns));
  }
  return est;
}

double empirical_spectrum_fraction(const SecularSystem& sys, double k_max, long long samples,
                                   std::uint64_t seed, int threads, double tol_z,
                                   std::string* warning) {
  require_torus_reducible(sys);
  if (k_max <= 0.0 || samples < 1)
    throw std::domain_error("empirical_spectrum_fraction: bad k_max or samples");
  if (warning) {
    warning->clear();
    const double ratio = sys.l1 / sys.l2;
    for (int q = 1; q <= 64; ++q) {
      const double p = std::round(ratio * q);
      if (std::abs(ratio - p / q) < 1e-12) {
        *warning = "l1/l2 is within 1e-12 of " + std::to_string(static_cast<long long>(p)) + "/" +
                   std::to_string(q) + "; equidistribution may converge slowly";
        break;
      }
    }
  }
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
    double k = k_max * counter_uniform(seed, i);
    if (k == 0.0) k = k_max * 0.5;
    hit[i] = membership(sys, make_torus_point(k * sys.l1, k * sys.l2), tol_z).in_spectrum ? 1 : 0;
  });
  long long count = 0;
  for (auto v : hit) count += v;
  return static_cast<double>(count) / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// octant cross-check

namespace detail {

namespace {
// First spectral band going up the column at kappa1 = x; returns the area
// contribution of one column of width dx: full band when the axis bisects it
// (entry at 0), half otherwise.
double octant_column(const std::function<bool(double, double)>& member, double x, int n,
                     double dx) {
  const double step = pi / n;
  double entry = -1.0, exit = -1.0;
  bool inside = member(x, 1e-9);
  const bool axis_bisected = inside;
  if (inside) entry = 0.0;
  double prev = 1e-9;
  for (int j = 1; j <= n; ++j) {
    const double y = j * step;
    const bool now = member(x, y);
    if (inside != now) {
      double lo = prev, hi = y;
      for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (member(x, mid) == inside ? lo : hi) = mid;
      }
      if (!inside) {
        entry = 0.5 * (lo + hi);
        inside = true;
      } else {
        exit = 0.5 * (lo + hi);
        break;
      }
    }
    prev = y;
  }
  if (entry < 0.0) return 0.0;  // column never enters the spectrum
  if (exit < 0.0) exit = pi;    // still inside at the cap
  return (exit - entry) * (axis_bisected ? 1.0 : 0.5) * dx;
}
}  // namespace

double octant_area(const std::function<bool(double, double)>& member, int grid_n) {
  const int n = std::max(grid_n, 64);
  const double dx = pi / n;
  double area = 0.0;
  for (int i = 0; i < n; ++i) area += octant_column(member, (i + 0.5) * dx, n, dx);
  return area;
}

double full_measure(const std::function<bool(double, double)>& member, int grid_n) {
  const int n = std::max(grid_n, 64);
  const double h = two_pi / n;
  long long count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (member((i + 0.5) * h, (j + 0.5) * h)) ++count;
  return static_cast<double>(count) / (static_cast<double>(n) * n);
}

}  // namespace detail

double octant_reduction_check(const SecularSystem& sys, int grid_n, double tol_z, int threads) {
  require_torus_reducible(sys);
  const auto member = [&](double x, double y) {
    return membership(sys, make_torus_point(x, y), tol_z).in_spectrum;
  };
  // full measure on a midpoint grid, parallel over rows
  const int n = std::max(grid_n, 128);
  const double h = two_pi / n;
  std::vector<long long> row_counts(n, 0);
  parallel_for(n, threads, [&](std::size_t j) {
    long long c = 0;
    for (int i = 0; i < n; ++i)
      if (member((i + 0.5) * h, (j + 0.5) * h)) ++c;
    row_counts[j] = c;
  });
  long long total = 0;
  for (long long c : row_counts) total += c;
  const double p_full = static_cast<double>(total) / (static_cast<double>(n) * n);

  // octant area, parallel over columns, summed in column order
  const double dx = pi / n;
  std::vector<double> col_area(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    col_area[i] = detail::octant_column(member, (i + 0.5) * dx, n, dx);
  });
  double area = 0.0;
  for (double a : col_area) area += a;
  const double p_oct = 8.0 * area / (two_pi * two_pi);
  return std::abs(p_full - p_oct);
}

}  // namespace dg
