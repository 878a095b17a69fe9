#include "diracgraph/bands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "diracgraph/parallel.hpp"

namespace dg {

namespace {
constexpr double pi = std::numbers::pi;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

std::size_t BandSet::max_bands() const {
  std::size_t m = 0;
  for (const auto& c : columns) m = std::max(m, c.k.size());
  return m;
}

BandSet compute_bands(const SecularSystem& sys, const BandSweepParams& p) {
  if (p.alpha_steps < 2) throw std::domain_error("compute_bands: alpha_steps must be >= 2");
  if (p.k_max <= 0.0) throw std::domain_error("compute_bands: k_max must be > 0");
  BandSet out;
  out.topology = sys.topology;
  out.l1 = sys.l1;
  out.l2 = sys.l2;
  out.l3 = sys.l3;
  out.beta = sys.l2 > 0 ? sys.l1 / sys.l2 : 0.0;
  out.k_max = p.k_max;
  out.columns.resize(p.alpha_steps);
  const double k_lo = std::min(1e-6, p.k_max / 1e6);
  parallel_for(p.alpha_steps, p.threads, [&](std::size_t i) {
    const double alpha = -pi + 2.0 * pi * static_cast<double>(i) / (p.alpha_steps - 1);
    auto res = find_roots_k(sys, alpha, k_lo, p.k_max, p.k_samples, p.tol);
    BandColumn col;
    col.alpha = alpha;
    col.k = std::move(res.roots);
    col.multiplicity = std::move(res.multiplicity);
    col.flat = std::move(res.flat);
    out.columns[i] = std::move(col);
  });
  return out;
}

// ---------------------------------------------------------------------------
// crossing detection

std::string crossing_kind_name(CrossingKind k) {
  switch (k) {
    case CrossingKind::crossing: return "crossing";
    case CrossingKind::avoided: return "avoided";
    case CrossingKind::unresolved: return "unresolved";
  }
  return "?";
}

namespace {

// Witness angles of the alpha polynomial at physical k, folded to [0, pi].
std::vector<double> witness_angles(const SecularSystem& sys, double k, double tol_z) {
  AlphaPolynomial poly = alpha_polynomial(sys, k);
  if (poly.degenerate) return {};
  std::vector<double> out;
  for (double a : poly.unit_circle_angles(tol_z)) out.push_back(std::abs(a));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-10; }),
            out.end());
  return out;
}

struct Branch {
  std::vector<int> pick;           // chosen angle index per sample (-1 when absent)
  std::vector<double> theta_full;  // aligned with the sample grid (NaN when absent)
  std::vector<double> k, theta;    // compacted
};

// Follow the angle branch through (k_anchor, theta_anchor) across the sampled
// angle lists. Lists are indexed 0..m-1 with k ascending.
Branch trace_branch(const std::vector<double>& ks, const std::vector<std::vector<double>>& lists,
                    double k_anchor, double theta_anchor) {
  const int m = static_cast<int>(ks.size());
  Branch br;
  br.pick.assign(m, -1);
  int i0 = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(ks[i] - k_anchor) < std::abs(ks[i0] - k_anchor)) i0 = i;
  auto nearest = [&](int i, double pred, double window) {
    int best = -1;
    double bd = window;
    for (std::size_t j = 0; j < lists[i].size(); ++j) {
      const double d = std::abs(lists[i][j] - pred);
      if (d < bd) { bd = d; best = static_cast<int>(j); }
    }
    return best;
  };
  const int j0 = nearest(i0, theta_anchor, 0.3);
  br.theta_full.assign(m, std::numeric_limits<double>::quiet_NaN());
  if (j0 < 0) return br;
  br.theta_full[i0] = lists[i0][j0];
  br.pick[i0] = j0;
  for (int dir : {+1, -1}) {
    double prev = br.theta_full[i0];
    double slope = 0.0;
    bool have_slope = false;
    for (int i = i0 + dir; i >= 0 && i < m; i += dir) {
      const double dk = ks[i] - ks[i - dir];
      const double pred = prev + (have_slope ? slope * dk : 0.0);
      const double window = std::max(0.05, 4.0 * std::abs(slope) * std::abs(dk) + 1e-3);
      const int j = nearest(i, pred, window);
      if (j < 0) break;
      slope = (lists[i][j] - prev) / dk;
      have_slope = true;
      prev = lists[i][j];
      br.theta_full[i] = prev;
      br.pick[i] = j;
    }
  }
  for (int i = 0; i < m; ++i)
    if (br.pick[i] >= 0) {
      br.k.push_back(ks[i]);
      br.theta.push_back(br.theta_full[i]);
    }
  return br;
}

struct RefineOutcome {
  bool certified = false;
  double min_gap = 0.0;
  double alpha = 0.0;  // folded location in [0, pi]
  double k_at = 0.0;
};

// Gap certification by branch analysis over [klo, khi]; depth controls the
// zoom recursion for the avoided case.
RefineOutcome refine_window(const SecularSystem& sys, double klo, double khi, double ka,
                            double kb, double theta0, int depth) {
  RefineOutcome out;
  const int m = 161;
  std::vector<double> ks(m);
  std::vector<std::vector<double>> lists(m);
  for (int i = 0; i < m; ++i) {
    ks[i] = klo + (khi - klo) * i / (m - 1);
    lists[i] = witness_angles(sys, ks[i], 1e-6);
  }
  Branch A = trace_branch(ks, lists, ka, theta0);
  Branch B = trace_branch(ks, lists, kb, theta0);
  if (A.k.size() < 5 || B.k.size() < 5) return out;

  // same branch: the pair meets at a fold (or at the alpha interval edge)
  bool same = false;
  for (std::size_t i = 0; i < A.pick.size(); ++i)
    if (A.pick[i] >= 0 && A.pick[i] == B.pick[i]) { same = true; break; }
  if (same) {
    // the touching point is the theta extremum between the anchors
    Branch& br = A;
    int ia = 0, ib = 0;
    for (std::size_t i = 0; i < br.k.size(); ++i) {
      if (std::abs(br.k[i] - ka) < std::abs(br.k[ia] - ka)) ia = static_cast<int>(i);
      if (std::abs(br.k[i] - kb) < std::abs(br.k[ib] - kb)) ib = static_cast<int>(i);
    }
    if (ia > ib) std::swap(ia, ib);
    int ix = ia;
    for (int i = ia; i <= ib; ++i)
      if (std::abs(br.theta[i] - theta0) > std::abs(br.theta[ix] - theta0)) ix = i;
    out.certified = true;
    out.min_gap = 0.0;
    out.alpha = br.theta[ix];
    out.k_at = br.k[ix];
    return out;
  }

  // distinct branches over a common k range
  std::vector<double> ck, dA, dB;
  for (int i = 0; i < m; ++i) {
    if (A.pick[i] < 0 || B.pick[i] < 0) continue;
    ck.push_back(ks[i]);
    dA.push_back(A.theta_full[i]);
    dB.push_back(B.theta_full[i]);
  }
  if (ck.size() >= 2) {
    for (std::size_t i = 1; i < ck.size(); ++i) {
      const double d0 = dA[i - 1] - dB[i - 1];
      const double d1 = dA[i] - dB[i];
      if ((d0 <= 0.0 && d1 > 0.0) || (d0 >= 0.0 && d1 < 0.0)) {
        const double t = d0 / (d0 - d1);
        out.certified = true;
        out.min_gap = 0.0;
        out.k_at = ck[i - 1] + t * (ck[i] - ck[i - 1]);
        out.alpha = dA[i - 1] + t * (dA[i] - dA[i - 1]);
        return out;
      }
    }
  }

  // avoided: invert both branches over the shared theta range
  auto k_of_theta = [](const Branch& br, double th, double k_near) {
    double best = std::numeric_limits<double>::quiet_NaN();
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < br.k.size(); ++i) {
      const double a = br.theta[i - 1], b = br.theta[i];
      if ((th - a) * (th - b) > 0.0) continue;
      const double t = (b == a) ? 0.5 : (th - a) / (b - a);
      const double k = br.k[i - 1] + t * (br.k[i] - br.k[i - 1]);
      const double d = std::abs(k - k_near);
      if (d < bestd) { bestd = d; best = k; }
    }
    return best;
  };
  const double lo = std::max(*std::min_element(A.theta.begin(), A.theta.end()),
                             *std::min_element(B.theta.begin(), B.theta.end()));
  const double hi = std::min(*std::max_element(A.theta.begin(), A.theta.end()),
                             *std::max_element(B.theta.begin(), B.theta.end()));
  if (!(lo < hi)) {
    // branches do not share any alpha: closest approach at the range edge
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < A.k.size(); ++i)
      for (std::size_t j = 0; j < B.k.size(); ++j)
        if (std::abs(A.theta[i] - B.theta[j]) < 2e-3)
          best = std::min(best, std::abs(A.k[i] - B.k[j]));
    if (!std::isfinite(best)) return out;
    out.certified = true;
    out.min_gap = best;
    out.alpha = 0.5 * (lo + hi);
    out.k_at = 0.5 * (ka + kb);
    return out;
  }
  const int grid = 801;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_alpha = theta0, best_k = 0.5 * (ka + kb);
  for (int i = 0; i < grid; ++i) {
    const double th = lo + (hi - lo) * i / (grid - 1);
    const double kA = k_of_theta(A, th, ka);
    const double kB = k_of_theta(B, th, kb);
    if (!std::isfinite(kA) || !std::isfinite(kB)) continue;
    const double g = std::abs(kA - kB);
    if (g < best_gap) {
      best_gap = g;
      best_alpha = th;
      best_k = 0.5 * (kA + kB);
    }
  }
  if (!std::isfinite(best_gap)) return out;
  if (depth > 0) {
    const double span = (khi - klo) * 6.0 / (m - 1);
    const double lo2 = std::max(klo, best_k - span);
    const double hi2 = std::min(khi, best_k + span);
    if (hi2 - lo2 > 1e-12) {
      RefineOutcome z = refine_window(sys, lo2, hi2, best_k - best_gap / 2,
                                      best_k + best_gap / 2, best_alpha, depth - 1);
      if (z.certified) return z;
    }
  }
  out.certified = true;
  out.min_gap = best_gap;
  out.alpha = best_alpha;
  out.k_at = best_k;
  return out;
}

// Refinement entry: decides the window, handles flat bands.
RefineOutcome refine_pair(const SecularSystem& sys, const BandSet& bands, std::size_t pair,
                          std::size_t col_at, double alpha0) {
  RefineOutcome out;
  const auto& cols = bands.columns;
  // flat test over all columns where the band exists
  auto band_stats = [&](std::size_t n) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const auto& c : cols)
      if (n < c.k.size()) { mn = std::min(mn, c.k[n]); mx = std::max(mx, c.k[n]); }
    return std::pair<double, double>(mn, mx);
  };
  const auto [lo0, hi0] = band_stats(pair);
  const auto [lo1, hi1] = band_stats(pair + 1);
  const bool flat0 = hi0 - lo0 < 1e-9 * (1.0 + std::abs(hi0));
  const bool flat1 = hi1 - lo1 < 1e-9 * (1.0 + std::abs(hi1));

  const auto& c = cols[col_at];
  if (pair + 1 >= c.k.size()) return out;
  const double ka = c.k[pair], kb = c.k[pair + 1];
  double klo = ka - 0.5 * (pair > 0 ? ka - c.k[pair - 1] : kb - ka);
  double khi = kb + 0.5 * (pair + 2 < c.k.size() ? c.k[pair + 2] - kb : kb - ka);
  // widen over the alpha neighbourhood
  const std::size_t j0 = col_at > 2 ? col_at - 2 : 0;
  const std::size_t j1 = std::min(cols.size() - 1, col_at + 2);
  for (std::size_t j = j0; j <= j1; ++j) {
    if (pair + 1 < cols[j].k.size()) {
      klo = std::min(klo, cols[j].k[pair] - 1e-4);
      khi = std::max(khi, cols[j].k[pair + 1] + 1e-4);
    }
  }
  klo = std::max(klo, 1e-9);

  if (flat0 != flat1) {
    // dispersive band against a flat line k = k_f
    const double k_f = flat0 ? 0.5 * (lo0 + hi0) : 0.5 * (lo1 + hi1);
    const double k_disp_anchor = flat0 ? kb : ka;
    const int m = 201;
    std::vector<double> ks(m);
    std::vector<std::vector<double>> lists(m);
    for (int i = 0; i < m; ++i) {
      ks[i] = klo + (khi - klo) * i / (m - 1);
      if (std::abs(ks[i] - k_f) < 1e-9 * (1.0 + k_f)) ks[i] += 2e-9 * (1.0 + k_f);
      lists[i] = witness_angles(sys, ks[i], 1e-6);
    }
    Branch D = trace_branch(ks, lists, k_disp_anchor, std::abs(alpha0));
    if (D.k.size() < 5) return out;
    double best = std::numeric_limits<double>::infinity();
    double besta = std::abs(alpha0);
    bool crosses = false;
    for (std::size_t i = 0; i < D.k.size(); ++i) {
      const double g = std::abs(D.k[i] - k_f);
      if (g < best) { best = g; besta = D.theta[i]; }
      if (i > 0 && (D.k[i - 1] - k_f) * (D.k[i] - k_f) <= 0.0) {
        const double t = (k_f - D.k[i - 1]) / (D.k[i] - D.k[i - 1]);
        besta = D.theta[i - 1] + t * (D.theta[i] - D.theta[i - 1]);
        crosses = true;
        break;
      }
    }
    out.certified = true;
    out.min_gap = crosses ? 0.0 : best;
    out.alpha = besta;
    out.k_at = k_f;
    return out;
  }

  return refine_window(sys, klo, khi, ka, kb, std::abs(alpha0), 2);
}

}  // namespace

std::vector<CrossingEvent> detect_crossings(const BandSet& bands, double delta_cross,
                                            double delta_avoid, const SecularSystem* sys) {
  if (delta_cross >= delta_avoid)
    throw std::domain_error("detect_crossings: need delta_cross < delta_avoid");
  const auto& cols = bands.columns;
  if (cols.size() < 3) throw std::domain_error("detect_crossings: need >= 3 alpha samples");
  std::vector<CrossingEvent> events;
  const std::size_t nb = bands.max_bands();
  const bool full_sweep = std::abs(cols.front().alpha + pi) < 1e-9 &&
                          std::abs(cols.back().alpha - pi) < 1e-9;
  for (std::size_t pair = 0; pair + 1 < nb; ++pair) {
    // gap samples over columns where the pair exists
    std::vector<std::size_t> idx;
    std::vector<double> gap;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (pair + 1 < cols[j].k.size()) {
        idx.push_back(j);
        gap.push_back(cols[j].k[pair + 1] - cols[j].k[pair]);
      }
    }
    if (gap.size() < 3) continue;
    std::size_t jm = 0;
    for (std::size_t j = 1; j < gap.size(); ++j)
      if (gap[j] < gap[jm]) jm = j;

    const bool at_grid_edge = !full_sweep && (idx[jm] == 0 || idx[jm] == cols.size() - 1);
    double alpha0 = cols[idx[jm]].alpha;
    double gap0 = gap[jm];
    // parabolic refinement through the three samples around the minimum
    if (jm > 0 && jm + 1 < gap.size() && idx[jm - 1] + 1 == idx[jm] &&
        idx[jm] + 1 == idx[jm + 1]) {
      const double x0 = cols[idx[jm - 1]].alpha, x1 = cols[idx[jm]].alpha,
                   x2 = cols[idx[jm + 1]].alpha;
      const double y0 = gap[jm - 1], y1 = gap[jm], y2 = gap[jm + 1];
      const double h = x1 - x0;
      const double denom = y0 - 2 * y1 + y2;
      if (std::abs(x2 - x1 - h) < 1e-12 && denom > 0) {
        const double t = 0.5 * (y0 - y2) / denom;  // in units of h from x1
        if (std::abs(t) <= 1.0) {
          alpha0 = x1 + t * h;
          gap0 = std::max(0.0, y1 - 0.25 * (y0 - y2) * t);
        }
      }
    }

    CrossingEvent ev;
    ev.band_low = static_cast<int>(pair);
    ev.alpha = alpha0;
    ev.min_gap = gap0;
    ev.k_at = cols[idx[jm]].k[pair] + 0.5 * gap[jm];
    if (at_grid_edge) {
      ev.kind = CrossingKind::unresolved;
      if (gap0 <= delta_avoid) events.push_back(ev);
      continue;
    }
    if (sys) {
      const RefineOutcome r = refine_pair(*sys, bands, pair, idx[jm], alpha0);
      if (r.certified) {
        ev.min_gap = r.min_gap;
        ev.alpha = alpha0 < 0 ? -r.alpha : r.alpha;
        ev.k_at = r.k_at;
      }
    }
    if (ev.min_gap < delta_cross)
      ev.kind = CrossingKind::crossing;
    else if (ev.min_gap <= delta_avoid)
      ev.kind = CrossingKind::avoided;
    else
      continue;
    events.push_back(ev);
  }
  std::sort(events.begin(), events.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
    return a.alpha < b.alpha || (a.alpha == b.alpha && a.band_low < b.band_low);
  });
  return events;
}

// ---------------------------------------------------------------------------
// export / import

namespace {
void write_rows(const BandSet& b, const std::function<void(double, double, double, double, int, int)>& row) {
  for (const auto& c : b.columns)
    for (std::size_t n = 0; n < c.k.size(); ++n) {
      const double e = std::hypot(c.k[n], 1.0);
      row(c.alpha, c.k[n], e, -e, static_cast<int>(n), c.multiplicity[n]);
    }
}
}  // namespace

void export_bands_csv(const BandSet& bands, std::ostream& out, const std::string& header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "alpha,k,E_pos,E_neg,band_index,multiplicity\n";
  write_rows(bands, [&](double a, double k, double ep, double en, int n, int m) {
    out << fmt17(a) << ',' << fmt17(k) << ',' << fmt17(ep) << ',' << fmt17(en) << ',' << n << ','
        << m << "\n";
  });
}

void export_bands_json(const BandSet& bands, std::ostream& out, const std::string& header_comment) {
  nlohmann::json j;
  j["topology"] = topology_name(bands.topology);
  j["beta"] = bands.beta;
  j["l1"] = bands.l1;
  j["l2"] = bands.l2;
  if (bands.topology == Topology::loop) j["l3"] = bands.l3;
  j["k_max"] = bands.k_max;
  j["rows"] = nlohmann::json::array();
  write_rows(bands, [&](double a, double k, double ep, double en, int n, int m) {
    j["rows"].push_back({{"alpha", a},
                         {"k", k},
                         {"E_pos", ep},
                         {"E_neg", en},
                         {"band_index", n},
                         {"multiplicity", m}});
  });
  nlohmann::json flats = nlohmann::json::array();
  for (const auto& c : bands.columns)
    for (const auto& f : c.flat)
      flats.push_back({{"alpha", c.alpha}, {"k_lo", f.k_lo}, {"k_hi", f.k_hi}});
  if (!flats.empty()) j["flat_intervals"] = flats;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << j.dump(1) << "\n";
}

namespace {
void append_row(BandSet& b, double alpha, double k, int band_index, int mult) {
  if (b.columns.empty() || b.columns.back().alpha != alpha) {
    BandColumn c;
    c.alpha = alpha;
    b.columns.push_back(c);
  }
  auto& col = b.columns.back();
  if (static_cast<int>(col.k.size()) != band_index)
    throw std::invalid_argument("band rows out of order");
  col.k.push_back(k);
  col.multiplicity.push_back(mult);
  b.k_max = std::max(b.k_max, k);
}
}  // namespace

BandSet import_bands_csv(std::istream& in) {
  BandSet b;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 6) throw std::invalid_argument("bad band CSV row: " + line);
    append_row(b, std::stod(f[0]), std::stod(f[1]), std::stoi(f[4]), std::stoi(f[5]));
  }
  return b;
}

BandSet import_bands_json(std::istream& in) {
  std::string text, line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    text += line;
    text += '\n';
  }
  nlohmann::json j = nlohmann::json::parse(text);
  BandSet b;
  if (j.contains("topology")) b.topology = topology_from_name(j["topology"].get<std::string>());
  if (j.contains("beta")) b.beta = j["beta"].get<double>();
  if (j.contains("l1")) b.l1 = j["l1"].get<double>();
  if (j.contains("l2")) b.l2 = j["l2"].get<double>();
  if (j.contains("l3")) b.l3 = j["l3"].get<double>();
  for (const auto& r : j.at("rows"))
    append_row(b, r.at("alpha").get<double>(), r.at("k").get<double>(),
               r.at("band_index").get<int>(), r.at("multiplicity").get<int>());
  return b;
}

std::string gnuplot_band_script(const std::string& csv_path) {
  std::ostringstream s;
  s << "# gnuplot script for band data\n"
    << "set datafile separator ','\n"
    << "set xlabel 'alpha'\n"
    << "set ylabel 'E'\n"
    << "set key off\n"
    << "plot '" << csv_path << "' using 1:3 with points pt 7 ps 0.2, \\\n"
    << "     '" << csv_path << "' using 1:4 with points pt 7 ps 0.2\n";
  return s.str();
}

}  // namespace dg
