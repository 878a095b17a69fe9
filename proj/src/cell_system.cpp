#include "diracgraph/cell_system.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "diracgraph/dispersion.hpp"

namespace dg {

namespace {

struct Assembler {
  const CellSpec& cell;
  double k, alpha;
  double g;  // gamma(k)
  int nb;
  Eigen::MatrixXcd M;
  int row = 0;

  Assembler(const CellSpec& c, double k_, double alpha_)
      : cell(c), k(k_), alpha(alpha_), g(gamma({k_})), nb(static_cast<int>(c.bonds.size())),
        M(Eigen::MatrixXcd::Zero(2 * c.bonds.size(), 2 * c.bonds.size())) {}

  double coord(const BondEndRef& e) const {
    return e.at_length_end ? cell.bonds[e.bond].length : 0.0;
  }
  // phi(e) = mu e^{ikx} + mu_hat e^{-ikx}
  void add_phi(int r, const BondEndRef& e, cplx w) {
    const double x = coord(e);
    M(r, 2 * e.bond) += w * std::exp(cplx(0, k * x));
    M(r, 2 * e.bond + 1) += w * std::exp(cplx(0, -k * x));
  }
  // chi(e) = i gamma (mu e^{ikx} - mu_hat e^{-ikx})
  void add_chi(int r, const BondEndRef& e, cplx w) {
    const double x = coord(e);
    M(r, 2 * e.bond) += w * cplx(0, g) * std::exp(cplx(0, k * x));
    M(r, 2 * e.bond + 1) -= w * cplx(0, g) * std::exp(cplx(0, -k * x));
  }

  void build(double flux_chi_sign) {
    const cplx z = std::exp(cplx(0, alpha));
    for (const auto& v : cell.vertices) {
      switch (v.role) {
        case VertexRole::kirchhoff: {
          for (std::size_t i = 1; i < v.attached.size(); ++i) {
            add_phi(row, v.attached[0], 1.0);
            add_phi(row, v.attached[i], -1.0);
            ++row;
          }
          for (const auto& e : v.attached)
            add_chi(row, e, e.at_length_end ? -1.0 : 1.0);
          ++row;
          break;
        }
        case VertexRole::dead_end_chi:
          add_chi(row, v.attached[0], 1.0);
          ++row;
          break;
        case VertexRole::dead_end_phi:
          add_phi(row, v.attached[0], 1.0);
          ++row;
          break;
        case VertexRole::flux_link:
          break;  // handled through flux_pairs
      }
    }
    for (const auto& [from, to] : cell.flux_pairs) {
      const auto& ea = cell.vertices[from].attached[0];
      const auto& eb = cell.vertices[to].attached[0];
      add_phi(row, eb, 1.0);
      add_phi(row, ea, -z);
      ++row;
      add_chi(row, eb, 1.0);
      add_chi(row, ea, flux_chi_sign * z);
      ++row;
    }
    if (row != 2 * nb)
      throw std::invalid_argument("malformed cell: boundary-condition count != amplitude count");
  }
};

}  // namespace

Eigen::MatrixXcd assemble_cell_system(const CellSpec& cell, double k, double alpha) {
  if (k <= 0.0) throw std::domain_error("assemble_cell_system: k must be > 0");
  cell.validate();
  Assembler a(cell, k, alpha);
  a.build(+1.0);  // chi row: chi(to) + e^{i alpha} chi(from) = 0
  return a.M;
}

Eigen::MatrixXcd assemble_cell_system_flipped_flux(const CellSpec& cell, double k, double alpha) {
  if (k <= 0.0) throw std::domain_error("assemble_cell_system: k must be > 0");
  cell.validate();
  Assembler a(cell, k, alpha);
  a.build(-1.0);
  return a.M;
}

Eigen::VectorXcd nullspace_amplitudes(const Eigen::MatrixXcd& M, double tol, int* multiplicity) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv(0);
  if (scale == 0.0) {
    if (multiplicity) *multiplicity = static_cast<int>(M.cols());
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(M.cols());
    c(0) = 1.0;
    return c;
  }
  const int n = static_cast<int>(sv.size());
  if (sv(n - 1) > tol * scale)
    throw std::invalid_argument("nullspace_amplitudes: matrix is not rank deficient at tol");
  if (multiplicity) {
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (sv(i) <= tol * scale) ++m;
    *multiplicity = m;
  }
  return svd.matrixV().col(n - 1);
}

CellBoundaryState boundary_traces(const CellSpec& cell, const Eigen::VectorXcd& amplitudes,
                                  double k) {
  if (amplitudes.size() != static_cast<Eigen::Index>(2 * cell.bonds.size()))
    throw std::invalid_argument("boundary_traces: amplitude vector has wrong size");
  CellBoundaryState st(cell.bonds.size());
  for (std::size_t b = 0; b < cell.bonds.size(); ++b) {
    BondAmplitude amp{amplitudes(2 * b), amplitudes(2 * b + 1), cell.bonds[b].id,
                      cell.bonds[b].length};
    st[b].at0 = plane_wave(amp, {k}, 0.0);
    st[b].atL = plane_wave(amp, {k}, cell.bonds[b].length);
  }
  return st;
}

cplx skew_form_residual(const CellBoundaryState& left_state, const CellBoundaryState& right_state) {
  if (left_state.size() != right_state.size())
    throw std::invalid_argument("skew_form_residual: trace shapes differ");
  cplx omega = 0.0;
  for (std::size_t j = 0; j < left_state.size(); ++j) {
    const auto& p = left_state[j];
    const auto& q = right_state[j];
    omega += p.at0.phi * std::conj(q.at0.chi) - p.atL.phi * std::conj(q.atL.chi);
    omega += -p.at0.chi * std::conj(q.at0.phi) + p.atL.chi * std::conj(q.atL.phi);
  }
  return omega;
}

double bc_residual(const CellSpec& cell, const Eigen::VectorXcd& amplitudes, double k,
                   double alpha) {
  const Eigen::MatrixXcd M = assemble_cell_system(cell, k, alpha);
  return (M * amplitudes).cwiseAbs().maxCoeff();
}

}  // namespace dg
