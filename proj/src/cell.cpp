#include "diracgraph/cell.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dg {

using nlohmann::json;

int CellSpec::bond_index(const std::string& id) const {
  for (std::size_t i = 0; i < bonds.size(); ++i)
    if (bonds[i].id == id) return static_cast<int>(i);
  throw std::invalid_argument("unknown bond id: " + id);
}

double CellSpec::total_length() const {
  double s = 0.0;
  for (const auto& b : bonds) s += b.length;
  return s;
}

Eigen::MatrixXi CellSpec::adjacency() const {
  const int nv = static_cast<int>(vertices.size());
  // vertex owning each bond end
  std::map<std::pair<int, int>, int> owner;
  for (int v = 0; v < nv; ++v)
    for (const auto& e : vertices[v].attached)
      owner[{e.bond, e.at_length_end ? 1 : 0}] = v;
  Eigen::MatrixXi C = Eigen::MatrixXi::Zero(nv, nv);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    auto i0 = owner.find({static_cast<int>(b), 0});
    auto i1 = owner.find({static_cast<int>(b), 1});
    if (i0 == owner.end() || i1 == owner.end()) continue;
    if (i0->second == i1->second) continue;  // self-loop: zero diagonal kept
    C(i0->second, i1->second) = 1;
    C(i1->second, i0->second) = 1;
  }
  return C;
}

void CellSpec::validate() const {
  if (bonds.empty()) throw std::invalid_argument("cell has no bonds");
  std::set<std::string> ids;
  for (const auto& b : bonds) {
    if (b.length <= 0.0) throw std::invalid_argument("bond length must be positive: " + b.id);
    if (!ids.insert(b.id).second) throw std::invalid_argument("duplicate bond id: " + b.id);
  }
  // every bond endpoint attached to exactly one vertex role
  std::map<std::pair<int, int>, int> seen;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const auto& vert = vertices[v];
    if (vert.attached.empty())
      throw std::invalid_argument("vertex with no attached bond ends");
    if (vert.role != VertexRole::kirchhoff && vert.attached.size() != 1)
      throw std::invalid_argument("dead-end and flux vertices attach exactly one bond end");
    for (const auto& e : vert.attached) {
      if (e.bond < 0 || e.bond >= static_cast<int>(bonds.size()))
        throw std::invalid_argument("attached end references unknown bond");
      if (++seen[{e.bond, e.at_length_end ? 1 : 0}] > 1)
        throw std::invalid_argument("bond end attached to more than one vertex");
    }
  }
  for (std::size_t b = 0; b < bonds.size(); ++b)
    for (int end = 0; end < 2; ++end)
      if (!seen.count({static_cast<int>(b), end}))
        throw std::invalid_argument("bond end not attached to any vertex: " + bonds[b].id);
  // flux pairs
  std::set<int> used;
  for (const auto& [a, b] : flux_pairs) {
    for (int v : {a, b}) {
      if (v < 0 || v >= static_cast<int>(vertices.size()))
        throw std::invalid_argument("flux pair references unknown vertex");
      if (vertices[v].role != VertexRole::flux_link)
        throw std::invalid_argument("flux pair vertex must have role flux_link");
      if (!used.insert(v).second)
        throw std::invalid_argument("flux_link vertex used in more than one pair");
    }
    if (vertices[a].attached[0].at_length_end != vertices[b].attached[0].at_length_end)
      throw std::invalid_argument(
          "flux pair ends must sit at the same coordinate end (0/0 or L/L); the printed "
          "quasiperiodic sign is only self-adjoint for matched ends");
  }
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].role == VertexRole::flux_link && !used.count(static_cast<int>(v)))
      throw std::invalid_argument("flux_link vertex not referenced by any flux pair");
}

CellSpec comb_cell(double l1, double l2) {
  CellSpec c;
  c.bonds = {{"b_minus", l1 / 2}, {"b_plus", l1 / 2}, {"tooth", l2}};
  c.vertices = {
      {VertexRole::kirchhoff, {{0, false}, {1, false}, {2, false}}},
      {VertexRole::dead_end_chi, {{2, true}}},
      {VertexRole::flux_link, {{0, true}}},
      {VertexRole::flux_link, {{1, true}}},
  };
  c.flux_pairs = {{2, 3}};
  return c;
}

CellSpec ladder_cell(double l1, double l2) {
  // The printed ladder matrix reduces to a one-vertex cell whose step carries
  // phi = 0 at the far end (the antisymmetric rung sector).
  CellSpec c;
  c.bonds = {{"b_minus", l1 / 2}, {"b_plus", l1 / 2}, {"step", l2}};
  c.vertices = {
      {VertexRole::kirchhoff, {{0, false}, {1, false}, {2, false}}},
      {VertexRole::dead_end_phi, {{2, true}}},
      {VertexRole::flux_link, {{0, true}}},
      {VertexRole::flux_link, {{1, true}}},
  };
  c.flux_pairs = {{2, 3}};
  return c;
}

CellSpec loop_cell(double l1, double l2, double l3) {
  CellSpec c;
  c.bonds = {{"b_minus", l1 / 2}, {"b_plus", l1 / 2}, {"arc_a", l2}, {"arc_b", l3}};
  c.vertices = {
      {VertexRole::kirchhoff, {{0, false}, {2, false}, {3, false}}},
      {VertexRole::kirchhoff, {{1, false}, {2, true}, {3, true}}},
      {VertexRole::flux_link, {{0, true}}},
      {VertexRole::flux_link, {{1, true}}},
  };
  c.flux_pairs = {{2, 3}};
  return c;
}

namespace {

VertexRole role_from_name(const std::string& s) {
  if (s == "kirchhoff") return VertexRole::kirchhoff;
  if (s == "dead_end_chi") return VertexRole::dead_end_chi;
  if (s == "dead_end_phi") return VertexRole::dead_end_phi;
  if (s == "flux_link") return VertexRole::flux_link;
  throw std::invalid_argument("unknown vertex role: " + s);
}

const char* role_name(VertexRole r) {
  switch (r) {
    case VertexRole::kirchhoff: return "kirchhoff";
    case VertexRole::dead_end_chi: return "dead_end_chi";
    case VertexRole::dead_end_phi: return "dead_end_phi";
    case VertexRole::flux_link: return "flux_link";
  }
  return "?";
}

bool parse_end(const json& j) {
  if (j.is_number()) {
    if (j.get<double>() == 0.0) return false;
    throw std::invalid_argument("bond end must be 0 or \"L\"");
  }
  const std::string s = j.get<std::string>();
  if (s == "0") return false;
  if (s == "L") return true;
  throw std::invalid_argument("bond end must be 0 or \"L\"");
}

}  // namespace

CellSpec parse_cell_json(const std::string& text) {
  json j = json::parse(text);
  CellSpec c;
  for (const auto& b : j.at("bonds"))
    c.bonds.push_back({b.at("id").get<std::string>(), b.at("length").get<double>()});
  for (const auto& v : j.at("vertices")) {
    VertexSpec vs;
    vs.role = role_from_name(v.at("role").get<std::string>());
    for (const auto& e : v.at("attached"))
      vs.attached.push_back({c.bond_index(e.at(0).get<std::string>()), parse_end(e.at(1))});
    c.vertices.push_back(std::move(vs));
  }
  if (j.contains("flux_pairs"))
    for (const auto& p : j.at("flux_pairs"))
      c.flux_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  c.validate();
  return c;
}

CellSpec load_cell(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open cell file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_cell_json(ss.str());
}

std::string cell_to_json(const CellSpec& cell) {
  json j;
  j["bonds"] = json::array();
  for (const auto& b : cell.bonds) j["bonds"].push_back({{"id", b.id}, {"length", b.length}});
  j["vertices"] = json::array();
  for (const auto& v : cell.vertices) {
    json attached = json::array();
    for (const auto& e : v.attached)
      attached.push_back({cell.bonds[e.bond].id, e.at_length_end ? "L" : "0"});
    j["vertices"].push_back({{"role", role_name(v.role)}, {"attached", attached}});
  }
  j["flux_pairs"] = json::array();
  for (const auto& [a, b] : cell.flux_pairs) j["flux_pairs"].push_back({a, b});
  return j.dump(2);
}

}  // namespace dg
