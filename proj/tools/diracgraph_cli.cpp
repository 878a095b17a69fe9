// Command-line surface: band sweeps, zero-set extraction, probability
// estimates and the self-validation suite.
#include <CLI11.hpp>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "diracgraph/bands.hpp"
#include "diracgraph/cell_system.hpp"
#include "diracgraph/dispersion.hpp"
#include "diracgraph/parallel.hpp"
#include "diracgraph/rng.hpp"
#include "diracgraph/torus.hpp"
#include "diracgraph/version.hpp"

namespace {

constexpr double pi = std::numbers::pi;

struct RunConfig {
  std::string topology = "comb";
  std::string cell_path;
  double beta = 1.0;
  double l1_override = 0.0;  // 0 = derive from beta
  double l2 = 1.0;
  double l3 = 0.0;  // loop only; 0 = l2
  int alpha_steps = 201;
  double k_max = 10.0;
  int k_samples = 0;
  double tol = 1e-10;
  double delta_cross = 1e-6;
  double delta_avoid = 1e-4;
  int grid_n = 1024;
  double tol_z = 1e-6;
  std::uint64_t seed = 0;
  long long mc_samples = 0;
  int threads = 0;
  std::string out;
  std::string format = "csv";
  bool plot_script = false;
  std::string alpha_list;
  std::string method = "grid";
  std::string octant_check = "auto";
  bool deep = false;
  bool flip_flux_sign = false;  // test hook
};

dg::SecularSystem build_system(const RunConfig& c) {
  const double l1 = c.l1_override > 0.0 ? c.l1_override : c.beta * c.l2;
  const dg::Topology t = dg::topology_from_name(c.topology);
  switch (t) {
    case dg::Topology::comb: return dg::comb_system(l1, c.l2);
    case dg::Topology::ladder: return dg::ladder_system(l1, c.l2);
    case dg::Topology::loop: return dg::loop_system(l1, c.l2, c.l3);
    case dg::Topology::custom:
      if (c.cell_path.empty())
        throw std::invalid_argument("custom topology requires --cell <path>");
      return dg::custom_system(dg::load_cell(c.cell_path));
  }
  throw std::logic_error("unreachable");
}

std::string config_line(const RunConfig& c, const std::string& command) {
  std::ostringstream s;
  s << "diracgraph " << dg::version << " | " << command << " topology=" << c.topology;
  if (!c.cell_path.empty()) s << " cell=" << c.cell_path;
  char buf[64];
  auto f = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, " %s=%.17g", name, v);
    s << buf;
  };
  f("beta", c.beta);
  if (c.l1_override > 0) f("l1", c.l1_override);
  f("l2", c.l2);
  if (c.l3 > 0) f("l3", c.l3);
  if (command == "bands") {
    s << " alpha_steps=" << c.alpha_steps;
    f("k_max", c.k_max);
    s << " k_samples=" << c.k_samples;
    f("tol", c.tol);
    f("delta_cross", c.delta_cross);
    f("delta_avoid", c.delta_avoid);
  }
  if (command == "zerosets") {
    s << " alpha_list=" << c.alpha_list << " grid=" << c.grid_n;
    f("tol_z", c.tol_z);
  }
  if (command == "prob") {
    s << " method=" << c.method << " grid=" << c.grid_n;
    f("tol_z", c.tol_z);
    s << " seed=" << c.seed;
    if (c.mc_samples > 0) s << " mc_samples=" << c.mc_samples;
    s << " octant_check=" << c.octant_check;
  }
  s << " threads=" << c.threads << " format=" << c.format;
  return s.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

// accepts "pi", "2pi", "-pi/2", plain numbers, and products like "0.5pi"
double parse_angle(const std::string& text) {
  const auto star = text.find("pi");
  if (star != std::string::npos) {
    const std::string pre = text.substr(0, star);
    const std::string post = text.substr(star + 2);
    double denom = 1.0;
    if (!post.empty()) {
      if (post[0] != '/') throw std::invalid_argument("bad angle: " + text);
      denom = std::stod(post.substr(1));
    }
    double num = 1.0;
    if (!pre.empty() && pre != "+") {
      if (pre == "-") num = -1.0;
      else num = std::stod(pre);
    }
    return num * pi / denom;
  }
  return std::stod(text);
}

std::vector<double> parse_alpha_list(const std::string& spec) {
  // start:stop:count
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 3) throw std::invalid_argument("--alpha-list expects start:stop:count");
  const double a0 = parse_angle(parts[0]);
  const double a1 = parse_angle(parts[1]);
  const int n = std::stoi(parts[2]);
  if (n < 1) throw std::invalid_argument("--alpha-list count must be >= 1");
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(n == 1 ? a0 : a0 + (a1 - a0) * i / (n - 1));
  return out;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int run_bands(const RunConfig& cfg) {
  const dg::SecularSystem sys = build_system(cfg);
  dg::BandSweepParams p;
  p.alpha_steps = cfg.alpha_steps;
  p.k_max = cfg.k_max;
  p.tol = cfg.tol;
  p.k_samples = cfg.k_samples;
  p.threads = cfg.threads;
  const dg::BandSet bands = dg::compute_bands(sys, p);
  const auto events = dg::detect_crossings(bands, cfg.delta_cross, cfg.delta_avoid, &sys);

  const std::string header = config_line(cfg, "bands");
  auto out = open_out(cfg.out);
  if (cfg.format == "json")
    dg::export_bands_json(bands, out, header);
  else
    dg::export_bands_csv(bands, out, header);
  out.close();
  if (cfg.plot_script) {
    auto ps = open_out(cfg.out + ".gnuplot");
    ps << dg::gnuplot_band_script(cfg.out);
  }
  std::size_t n_rows = 0;
  for (const auto& c : bands.columns) n_rows += c.k.size();
  std::cout << "bands: " << bands.columns.size() << " alpha columns, max " << bands.max_bands()
            << " bands, " << n_rows << " rows -> " << cfg.out << "\n";
  int n_cross = 0, n_avoid = 0, n_unres = 0;
  for (const auto& e : events) {
    if (e.kind == dg::CrossingKind::crossing) ++n_cross;
    if (e.kind == dg::CrossingKind::avoided) ++n_avoid;
    if (e.kind == dg::CrossingKind::unresolved) ++n_unres;
  }
  std::cout << "crossing events: " << n_cross << " crossing, " << n_avoid << " avoided, "
            << n_unres << " unresolved\n";
  for (const auto& e : events)
    std::cout << "  " << dg::crossing_kind_name(e.kind) << " bands (" << e.band_low << ","
              << e.band_low + 1 << ") alpha=" << fmt17(e.alpha) << " k=" << fmt17(e.k_at)
              << " min_gap=" << fmt17(e.min_gap) << "\n";
  return 0;
}

int run_zerosets(const RunConfig& cfg) {
  const dg::SecularSystem sys = build_system(cfg);
  const auto alphas = parse_alpha_list(cfg.alpha_list);
  if (alphas.empty()) throw std::invalid_argument("empty alpha list");
  auto out = open_out(cfg.out);
  out << "# " << config_line(cfg, "zerosets") << "\n";
  out << "alpha,kappa1,kappa2,curve_id,color_index\n";
  std::size_t total_points = 0;
  int curve_base = 0;
  for (double a : alphas) {
    const auto curves = dg::zero_set_curves(sys, a, cfg.grid_n, cfg.tol_z, cfg.threads);
    for (const auto& c : curves) {
      for (const auto& p : c.points) {
        out << fmt17(a) << ',' << fmt17(p.kappa1) << ',' << fmt17(p.kappa2) << ','
            << (curve_base + c.curve_id) << ',' << fmt17(a / pi) << "\n";
        ++total_points;
      }
    }
    if (!curves.empty()) curve_base += static_cast<int>(curves.size());
  }
  std::cout << "zerosets: " << alphas.size() << " alpha slices, " << curve_base << " curves, "
            << total_points << " points -> " << cfg.out << "\n";
  return 0;
}

int run_prob(const RunConfig& cfg) {
  const dg::SecularSystem sys = build_system(cfg);
  const dg::ProbMethod method =
      cfg.method == "monte_carlo" ? dg::ProbMethod::monte_carlo : dg::ProbMethod::grid;
  dg::ProbabilityEstimate est = dg::probability(sys, cfg.grid_n, cfg.tol_z, method, cfg.seed,
                                                cfg.threads, cfg.mc_samples);
  bool do_octant = cfg.octant_check == "on";
  if (cfg.octant_check == "auto")
    do_octant = sys.topology == dg::Topology::comb || sys.topology == dg::Topology::ladder;
  if (do_octant)
    est.octant_discrepancy =
        dg::octant_reduction_check(sys, std::min(cfg.grid_n, 512), cfg.tol_z, cfg.threads);

  std::ostringstream j;
  j << "{\n"
    << "  \"topology\": \"" << dg::topology_name(est.topology) << "\",\n"
    << "  \"method\": \"" << (est.method == dg::ProbMethod::grid ? "grid" : "monte_carlo")
    << "\",\n"
    << "  \"grid\": " << est.grid_n << ",\n"
    << "  \"tol_z\": " << fmt17(est.tol_z) << ",\n"
    << "  \"seed\": " << est.seed << ",\n"
    << "  \"samples\": " << est.samples << ",\n"
    << "  \"p_sigma\": " << fmt17(est.p_sigma) << ",\n"
    << "  \"error_bound\": " << fmt17(est.error_bound) << ",\n"
    << "  \"octant_discrepancy\": "
    << (est.octant_discrepancy ? fmt17(*est.octant_discrepancy) : std::string("null")) << "\n"
    << "}\n";
  auto out = open_out(cfg.out);
  out << "# " << config_line(cfg, "prob") << "\n" << j.str();
  std::cout << j.str();
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct CheckReport {
  int failures = 0;
  void line(const std::string& name, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!pass) {
      ++failures;
      if (first_fail.empty()) first_fail = name;
    }
  }
  void info(const std::string& name, const std::string& detail) {
    std::cout << "[INFO] " << name << "  (" << detail << ")\n";
  }
  std::string first_fail;
};

bool root_sets_match(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

std::vector<double> cell_roots(const dg::CellSpec& cell, double alpha, double k_min, double k_max,
                               bool flipped) {
  auto rel = [&](double k) {
    const Eigen::MatrixXcd M = flipped ? dg::assemble_cell_system_flipped_flux(cell, k, alpha)
                                       : dg::assemble_cell_system(cell, k, alpha);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    return sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  };
  const int samples = std::max(1024, static_cast<int>(48.0 * (k_max - k_min) *
                                                      cell.total_length() / (2 * pi)));
  auto res = dg::detail::scan_minima(rel, k_min, k_max, samples, 1e-12, 1e-8, nullptr);
  return res.roots;
}

int run_validate(const RunConfig& cfg) {
  CheckReport rep;
  const int threads = cfg.threads;

  {  // gamma identities
    bool ok = true;
    for (double k = 1e-8; k <= 1e3; k *= 3.1622776601683795) {
      const double g = dg::gamma({k});
      ok = ok && std::abs(g * (dg::energy({k}) + 1.0) - k) <= 1e-15 * k;
      ok = ok && g > 0.0 && g < 1.0;
    }
    double prev = 0.0;
    for (double k = 0.01; k < 100.0; k *= 1.07) {
      const double g = dg::gamma({k});
      ok = ok && g > prev;
      prev = g;
    }
    rep.line("gamma identities", ok);
  }

  {  // plane-wave residuals under central differences
    const double h = 1e-5;
    double worst = 0.0;
    for (int t = 0; t < 40; ++t) {
      const double k = 0.2 + 3.0 * dg::counter_uniform(11, 2 * t);
      const dg::DispersionModel m{k};
      const double E = dg::energy(m);
      dg::BondAmplitude amp{dg::cplx(dg::counter_uniform(12, t), dg::counter_uniform(13, t)),
                            dg::cplx(dg::counter_uniform(14, t), dg::counter_uniform(15, t)),
                            "b", 1.0};
      const double x = 0.3 + 0.4 * dg::counter_uniform(16, t);
      const auto c0 = dg::plane_wave(amp, m, x - h);
      const auto c1 = dg::plane_wave(amp, m, x);
      const auto c2 = dg::plane_wave(amp, m, x + h);
      const dg::cplx dphi = (c2.phi - c0.phi) / (2 * h);
      const dg::cplx dchi = (c2.chi - c0.chi) / (2 * h);
      worst = std::max(worst, std::abs(-dchi + c1.phi - E * c1.phi));
      worst = std::max(worst, std::abs(dphi - c1.chi - E * c1.chi));
    }
    rep.line("plane-wave first-order system residual", worst < 1e-6,
             "max residual " + fmt17(worst));
  }

  {  // skew-form residuals per topology (+ mutation hook)
    const int pairs = cfg.deep ? 100 : 20;
    bool ok = true;
    double worst = 0.0;
    for (const auto& topo : {std::string("comb"), std::string("ladder"), std::string("loop")}) {
      RunConfig c2 = cfg;
      c2.topology = topo;
      c2.beta = 1.0;
      c2.l1_override = 0.0;
      const dg::SecularSystem sys = build_system(c2);
      const dg::CellSpec cell = sys.oracle_cell();
      for (int t = 0; t < pairs; ++t) {
        const double alpha = -pi + 2 * pi * dg::counter_uniform(21, t);
        auto roots = cell_roots(cell, alpha, 0.3, 9.0, cfg.flip_flux_sign);
        if (roots.size() < 2) continue;
        const std::size_t i = dg::counter_hash(22, t) % roots.size();
        std::size_t j = dg::counter_hash(23, t) % roots.size();
        if (j == i) j = (j + 1) % roots.size();
        auto state_at = [&](double k) {
          const Eigen::MatrixXcd M = cfg.flip_flux_sign
                                         ? dg::assemble_cell_system_flipped_flux(cell, k, alpha)
                                         : dg::assemble_cell_system(cell, k, alpha);
          const Eigen::VectorXcd c = dg::nullspace_amplitudes(M, 1e-6);
          return dg::boundary_traces(cell, c, k);
        };
        const auto psi = state_at(roots[i]);
        const auto phi2 = state_at(roots[j]);
        worst = std::max(worst, std::abs(dg::skew_form_residual(psi, phi2)));
      }
    }
    ok = worst < 1e-10;
    rep.line("skew-form residual on eigenstate pairs", ok, "max |Omega| = " + fmt17(worst));

    // negative control: a chi-sum violation must register
    const dg::CellSpec cell = dg::comb_cell(1.0, 1.0);
    auto roots = cell_roots(cell, 0.7, 0.3, 9.0, false);
    const Eigen::MatrixXcd M = dg::assemble_cell_system(cell, roots[0], 0.7);
    Eigen::VectorXcd c = dg::nullspace_amplitudes(M, 1e-6);
    Eigen::VectorXcd bad = c;
    bad(0) += 0.3;  // breaks the vertex conditions
    const double omega_bad = std::abs(dg::skew_form_residual(
        dg::boundary_traces(cell, bad, roots[0]), dg::boundary_traces(cell, c, roots[0])));
    rep.line("skew-form detects a boundary-condition violation", omega_bad > 1e-6,
             "|Omega| = " + fmt17(omega_bad));
  }

  {  // oracle equivalence comb/ladder; loop best-effort
    for (const auto& topo : {std::string("comb"), std::string("ladder")}) {
      RunConfig c2 = cfg;
      c2.topology = topo;
      c2.beta = 1.0;
      c2.l2 = 1.0;
      c2.l1_override = 0.0;
      const dg::SecularSystem sys = build_system(c2);
      const dg::CellSpec cell = sys.oracle_cell();
      bool ok = true;
      double worst = 0.0;
      for (double alpha : {0.0, pi / 3, pi}) {
        const auto rs = dg::find_roots_k(sys, alpha, 1e-3, 20.0).roots;
        const auto rm = cell_roots(cell, alpha, 1e-3, 20.0, false);
        if (!root_sets_match(rs, rm, 1e-8)) ok = false;
        for (std::size_t i = 0; i < std::min(rs.size(), rm.size()); ++i)
          worst = std::max(worst, std::abs(rs[i] - rm[i]));
      }
      rep.line("oracle equivalence (" + topo + ", k <= 20, alpha in {0, pi/3, pi})", ok,
               "max root diff " + fmt17(worst));
    }
    {
      RunConfig c2 = cfg;
      c2.topology = "loop";
      c2.beta = 1.0;
      c2.l2 = 1.0;
      c2.l1_override = 0.0;
      const dg::SecularSystem sys = build_system(c2);
      const dg::CellSpec cell = sys.oracle_cell();
      double worst = 0.0;
      bool counts = true;
      for (double alpha : {0.0, pi / 3, pi}) {
        const auto rs = dg::find_roots_k(sys, alpha, 1e-3, 20.0).roots;
        const auto rm = cell_roots(cell, alpha, 1e-3, 20.0, false);
        if (rs.size() != rm.size()) counts = false;
        for (std::size_t i = 0; i < std::min(rs.size(), rm.size()); ++i)
          worst = std::max(worst, std::abs(rs[i] - rm[i]));
      }
      rep.info("oracle equivalence (loop, best-effort)",
               std::string(counts ? "root counts match" : "root counts differ") +
                   ", max root diff " + fmt17(worst));
    }
  }

  {  // alpha-reversal symmetry
    bool ok = true;
    for (const auto& topo : {std::string("comb"), std::string("ladder"), std::string("loop")}) {
      RunConfig c2 = cfg;
      c2.topology = topo;
      const dg::SecularSystem sys = build_system(c2);
      const auto rp = dg::find_roots_k(sys, pi / 3, 1e-3, 12.0).roots;
      const auto rn = dg::find_roots_k(sys, -pi / 3, 1e-3, 12.0).roots;
      ok = ok && root_sets_match(rp, rn, 1e-6);
    }
    rep.line("flux reversal symmetry of root sets", ok);
  }

  {  // star N=1 analytic roots
    const dg::StarSecularSystem star{{1.0}};
    const auto roots = dg::star_roots(star, 0.1, 10.5 * pi);
    bool ok = roots.size() >= 10;
    double worst = 0.0;
    for (std::size_t n = 0; ok && n < 10; ++n) {
      const double expect = (n + 0.5) * pi;
      worst = std::max(worst, std::abs(roots[n] - expect));
      ok = worst < 1e-10;
    }
    rep.line("star N=1 analytic roots (n+1/2)pi", ok, "max err " + fmt17(worst));
  }

  {  // alpha polynomial round trips
    RunConfig c2 = cfg;
    c2.topology = "comb";
    const dg::SecularSystem sys = build_system(c2);
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
      const dg::TorusPoint p{2 * pi * dg::counter_uniform(31, t),
                             2 * pi * dg::counter_uniform(32, t)};
      const auto poly = dg::alpha_polynomial_torus(sys, p);
      if (poly.degenerate) continue;
      const double res = std::abs(poly.eval_f(0.3) - dg::phi(sys, p, 0.3));
      worst = std::max(worst, res / std::max(poly.sample_scale, 1e-30));
      ok = ok && worst < 1e-10;
      ok = ok && poly.degree() <= 4;  // comb coefficient band is narrow
    }
    rep.line("alpha-polynomial reconstruction at held-out alpha", ok,
             "max rel residual " + fmt17(worst));
    // band-point round trip
    const auto roots = dg::find_roots_k(sys, 0.8, 0.5, 6.0).roots;
    bool rt = !roots.empty();
    if (rt) {
      const auto poly = dg::alpha_polynomial(sys, roots[0]);
      double best = 1e9;
      for (const auto& z : poly.roots())
        best = std::min(best, std::abs(z - std::exp(dg::cplx(0, 0.8))));
      rt = best < 1e-6;
    }
    rep.line("alpha-polynomial root at a band point", rt);
  }

  {  // membership vs dense alpha-scan audit
    RunConfig c2 = cfg;
    c2.topology = "comb";
    const dg::SecularSystem sys = build_system(c2);
    const int npts = cfg.deep ? 4096 : 128;
    std::vector<int> bad(npts, 0);
    dg::parallel_for(npts, threads, [&](std::size_t t) {
      dg::TorusPoint p;
      if (cfg.deep) {
        const int side = 64;
        const double h = 2 * pi / side;
        p = {(static_cast<int>(t) % side + 0.5) * h, (static_cast<int>(t) / side + 0.5) * h};
      } else {
        p = {2 * pi * dg::counter_uniform(41, t), 2 * pi * dg::counter_uniform(42, t)};
      }
      const bool member = dg::membership(sys, p, 1e-6).in_spectrum;
      bool scan = false;
      for (double a = 0.0; a <= pi + 1e-9; a += 1e-3)
        if (dg::phi_surrogate(sys, p, a) < 1e-6) { scan = true; break; }
      if (member != scan) bad[t] = 1;
    });
    int nbad = 0;
    for (int b : bad) nbad += b;
    rep.line("membership matches dense alpha scan", nbad == 0,
             std::to_string(nbad) + "/" + std::to_string(npts) + " disagree");
  }

  {  // probability refinement stability
    bool ok = true;
    std::string detail;
    for (const auto& topo : {std::string("comb"), std::string("ladder"), std::string("loop")}) {
      RunConfig c2 = cfg;
      c2.topology = topo;
      const dg::SecularSystem sys = build_system(c2);
      const auto p1 = dg::probability(sys, 128, 1e-6, dg::ProbMethod::grid, 0, threads);
      const auto p2 = dg::probability(sys, 256, 1e-6, dg::ProbMethod::grid, 0, threads);
      const double diff = std::abs(p1.p_sigma - p2.p_sigma);
      ok = ok && diff <= p1.error_bound;
      detail += topo + ": |p(128)-p(256)|=" + fmt17(diff) + " bound=" + fmt17(p1.error_bound) + " ";
    }
    rep.line("probability refinement stability", ok, detail);
  }

  std::cout << (rep.failures == 0 ? "validate: all checks passed\n"
                                  : "validate: FAILED (first failing check: " + rep.first_fail +
                                        ")\n");
  return rep.failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirac quasiparticles on periodic metric graphs: band spectra, torus zero sets "
               "and spectral probability"};
  app.set_version_flag("--version", std::string(dg::version));
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--topology", cfg.topology, "comb | ladder | loop | custom")
        ->check(CLI::IsMember({"comb", "ladder", "loop", "custom"}));
    cmd->add_option("--cell", cfg.cell_path, "CellSpec JSON (required for custom)");
    cmd->add_option("--beta", cfg.beta, "l1 = beta * l2")->check(CLI::PositiveNumber);
    cmd->add_option("--l1", cfg.l1_override, "override l1 directly");
    cmd->add_option("--l2", cfg.l2, "unit length l2")->check(CLI::PositiveNumber);
    cmd->add_option("--l3", cfg.l3, "loop arc length l3 (default l2)");
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  };

  auto* bands = app.add_subcommand("bands", "sweep the flux and export band data");
  add_common(bands);
  bands->add_option("--alpha-steps", cfg.alpha_steps, "columns over [-pi, pi]");
  bands->add_option("--k-max", cfg.k_max, "scan roots in (0, k_max]")->check(CLI::PositiveNumber);
  bands->add_option("--k-samples", cfg.k_samples, "surrogate scan samples (0 = auto)");
  bands->add_option("--tol", cfg.tol, "root bracket width");
  bands->add_option("--delta-cross", cfg.delta_cross, "crossing threshold (k units)");
  bands->add_option("--delta-avoid", cfg.delta_avoid, "avoided-crossing threshold (k units)");
  bands->add_option("--out", cfg.out, "output file")->required();
  bands->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  bands->add_flag("--plot-script", cfg.plot_script, "emit a gnuplot template next to the CSV");

  auto* zerosets = app.add_subcommand("zerosets", "extract torus zero-set curves");
  add_common(zerosets);
  zerosets->add_option("--alpha-list", cfg.alpha_list, "start:stop:count ('pi' accepted)")
      ->required();
  zerosets->add_option("--grid", cfg.grid_n, "torus grid resolution (>= 64)");
  zerosets->add_option("--tol-z", cfg.tol_z, "unit-circle tolerance");
  zerosets->add_option("--out", cfg.out, "output CSV")->required();

  auto* prob = app.add_subcommand("prob", "probability for a random momentum to be in the spectrum");
  add_common(prob);
  prob->add_option("--grid", cfg.grid_n, "torus grid resolution (>= 128)");
  prob->add_option("--tol-z", cfg.tol_z, "unit-circle tolerance");
  prob->add_option("--method", cfg.method, "grid | monte_carlo")
      ->check(CLI::IsMember({"grid", "monte_carlo"}));
  prob->add_option("--seed", cfg.seed, "monte carlo seed");
  prob->add_option("--mc-samples", cfg.mc_samples, "monte carlo sample count");
  prob->add_option("--octant-check", cfg.octant_check, "auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  prob->add_option("--out", cfg.out, "output JSON");

  auto* validate = app.add_subcommand("validate", "run the numerical validation suite");
  add_common(validate);
  validate->add_flag("--deep", cfg.deep, "full-size audits (slower)");
  validate->add_flag("--test-flip-flux-sign", cfg.flip_flux_sign, "")->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bands->parsed()) {
      if (cfg.alpha_steps < 2) throw std::invalid_argument("--alpha-steps must be >= 2");
      return run_bands(cfg);
    }
    if (zerosets->parsed()) {
      if (cfg.out.empty()) throw std::invalid_argument("--out required");
      return run_zerosets(cfg);
    }
    if (prob->parsed()) {
      if (cfg.out.empty()) cfg.out = "prob.json";
      return run_prob(cfg);
    }
    if (validate->parsed()) return run_validate(cfg);
  } catch (const dg::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
