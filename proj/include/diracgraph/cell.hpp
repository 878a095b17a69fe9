#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dg {

enum class VertexRole { kirchhoff, dead_end_chi, dead_end_phi, flux_link };

struct BondSpec {
  std::string id;
  double length = 0.0;
};

// A bond endpoint: x = 0 or x = length of bond `bond`.
struct BondEndRef {
  int bond = -1;
  bool at_length_end = false;
};

struct VertexSpec {
  VertexRole role = VertexRole::kirchhoff;
  std::vector<BondEndRef> attached;
};

// Unit-cell topology. Flux pairs reference flux_link vertices (from, to) and
// impose phi_to = e^{i alpha} phi_from, chi_to = -e^{i alpha} chi_from; both
// ends must sit at the same coordinate end (0/0 or L/L), which is what keeps
// the skew form zero under the printed sign convention.
struct CellSpec {
  std::vector<BondSpec> bonds;
  std::vector<VertexSpec> vertices;
  std::vector<std::pair<int, int>> flux_pairs;

  int bond_index(const std::string& id) const;
  double total_length() const;
  Eigen::MatrixXi adjacency() const;  // symmetric 0/1 over vertices
  void validate() const;              // throws std::invalid_argument
};

CellSpec comb_cell(double l1, double l2);
CellSpec ladder_cell(double l1, double l2);
CellSpec loop_cell(double l1, double l2, double l3);

CellSpec load_cell(const std::filesystem::path& path);
CellSpec parse_cell_json(const std::string& text);
std::string cell_to_json(const CellSpec& cell);

}  // namespace dg
