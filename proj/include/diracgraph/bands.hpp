#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "diracgraph/secular.hpp"

namespace dg {

struct BandColumn {
  double alpha = 0.0;
  std::vector<double> k;          // strictly increasing
  std::vector<int> multiplicity;  // parallel to k
  std::vector<FlatInterval> flat;
};

struct BandSet {
  Topology topology = Topology::comb;
  double beta = 1.0;  // l1 = beta * l2
  double l1 = 1.0, l2 = 1.0, l3 = 0.0;
  double k_max = 0.0;
  std::vector<BandColumn> columns;  // increasing alpha over [-pi, pi]

  std::size_t max_bands() const;
};

struct BandSweepParams {
  int alpha_steps = 201;
  double k_max = 10.0;
  double tol = 1e-10;
  int k_samples = 0;  // 0 = auto
  int threads = 1;
};

BandSet compute_bands(const SecularSystem& sys, const BandSweepParams& params);

enum class CrossingKind { crossing, avoided, unresolved };
std::string crossing_kind_name(CrossingKind k);

struct CrossingEvent {
  double alpha = 0.0;   // location of the closest approach
  int band_low = 0;     // pair (band_low, band_low + 1)
  double min_gap = 0.0; // k distance at closest approach
  CrossingKind kind = CrossingKind::unresolved;
  double k_at = 0.0;
};

// Grid localization + parabolic refinement; when `sys` is given, each
// candidate is certified by tracing witness-angle branches of the alpha
// polynomial in a local k window.
std::vector<CrossingEvent> detect_crossings(const BandSet& bands, double delta_cross,
                                            double delta_avoid,
                                            const SecularSystem* sys = nullptr);

// CSV columns: alpha,k,E_pos,E_neg,band_index,multiplicity sorted by
// (alpha, band_index); JSON mirror carries the same rows.
void export_bands_csv(const BandSet& bands, std::ostream& out, const std::string& header_comment);
void export_bands_json(const BandSet& bands, std::ostream& out, const std::string& header_comment);
BandSet import_bands_csv(std::istream& in);
BandSet import_bands_json(std::istream& in);

std::string gnuplot_band_script(const std::string& csv_path);

}  // namespace dg
