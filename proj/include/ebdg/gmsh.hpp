#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "geometry.hpp"

namespace ebdg {

namespace detail {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) fail(std::string("unexpected end of file, expected ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError(source_ + ":" + std::to_string(number_) + ": " + msg);
  }

  int line_number() const { return number_; }

 private:
  std::istream& in_;
  std::string source_;
  int number_ = 0;
};

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Reads a 2D Gmsh MSH 2.2 ASCII mesh. Cells: triangles (3/6/10 nodes) and quads
/// (4/9/16 nodes). Line elements (2/3/4 nodes) carry boundary tags through their physical
/// group; the boundary name is the physical name, or the group number if unnamed.
inline Mesh<2> read_gmsh(std::istream& in, const std::string& source = "<stream>") {
  detail::LineReader rd(in, source);
  std::map<int, std::string> physical_names;
  std::vector<std::array<double, 2>> node_xy;
  std::unordered_map<long, int> node_index;
  struct RawElement {
    int type;
    int physical;
    long id;
    std::vector<long> nodes;
    int line;
  };
  std::vector<RawElement> raw;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (rd.next(line)) {
    const std::string section = detail::trim(line);
    if (section == "$MeshFormat") {
      std::istringstream ss(rd.require("format line"));
      double version = 0;
      int file_type = -1;
      if (!(ss >> version >> file_type)) rd.fail("malformed $MeshFormat");
      if (version < 2.0 || version >= 3.0) rd.fail("unsupported MSH version " + std::to_string(version) + " (need 2.x)");
      if (file_type != 0) rd.fail("binary MSH files are not supported");
      if (detail::trim(rd.require("$EndMeshFormat")) != "$EndMeshFormat") rd.fail("expected $EndMeshFormat");
      have_format = true;
    } else if (section == "$PhysicalNames") {
      std::istringstream ss(rd.require("physical name count"));
      int n = 0;
      if (!(ss >> n) || n < 0) rd.fail("malformed physical name count");
      for (int i = 0; i < n; ++i) {
        std::istringstream ps(rd.require("physical name"));
        int dim = 0, tag = 0;
        if (!(ps >> dim >> tag)) rd.fail("malformed physical name entry");
        std::string rest;
        std::getline(ps, rest);
        rest = detail::trim(rest);
        if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') rest = rest.substr(1, rest.size() - 2);
        physical_names[tag] = rest;
      }
      if (detail::trim(rd.require("$EndPhysicalNames")) != "$EndPhysicalNames") rd.fail("expected $EndPhysicalNames");
    } else if (section == "$Nodes") {
      std::istringstream ss(rd.require("node count"));
      long n = 0;
      if (!(ss >> n) || n < 0) rd.fail("malformed node count");
      node_xy.reserve(n);
      for (long i = 0; i < n; ++i) {
        std::istringstream ns(rd.require("node"));
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(ns >> id >> x >> y >> z)) rd.fail("malformed node entry");
        if (node_index.count(id)) rd.fail("duplicate node id " + std::to_string(id));
        node_index[id] = static_cast<int>(node_xy.size());
        node_xy.push_back({x, y});
      }
      if (detail::trim(rd.require("$EndNodes")) != "$EndNodes") rd.fail("expected $EndNodes");
      have_nodes = true;
    } else if (section == "$Elements") {
      std::istringstream ss(rd.require("element count"));
      long n = 0;
      if (!(ss >> n) || n < 0) rd.fail("malformed element count");
      for (long i = 0; i < n; ++i) {
        std::istringstream es(rd.require("element"));
        RawElement el{};
        int ntags = 0;
        if (!(es >> el.id >> el.type >> ntags) || ntags < 0) rd.fail("malformed element entry");
        std::vector<int> tags(ntags);
        for (int t = 0; t < ntags; ++t)
          if (!(es >> tags[t])) rd.fail("malformed element tags");
        el.physical = ntags > 0 ? tags[0] : 0;
        int count = 0;
        switch (el.type) {
          case 1: count = 2; break;
          case 8: count = 3; break;
          case 26: count = 4; break;
          case 2: count = 3; break;
          case 9: count = 6; break;
          case 21: count = 10; break;
          case 3: count = 4; break;
          case 10: count = 9; break;
          case 36: count = 16; break;
          case 15: count = 1; break;
          default: rd.fail("unsupported element type " + std::to_string(el.type));
        }
        el.nodes.resize(count);
        for (int k = 0; k < count; ++k)
          if (!(es >> el.nodes[k])) rd.fail("element " + std::to_string(el.id) + " has too few nodes");
        el.line = rd.line_number();
        raw.push_back(std::move(el));
      }
      if (detail::trim(rd.require("$EndElements")) != "$EndElements") rd.fail("expected $EndElements");
      have_elements = true;
    } else if (!section.empty() && section[0] == '$' && section.rfind("$End", 0) != 0) {
      // Skip sections this reader does not use.
      const std::string end = "$End" + section.substr(1);
      std::string skip;
      do {
        skip = detail::trim(rd.require(end.c_str()));
      } while (skip != end);
    } else {
      rd.fail("unexpected content '" + section + "'");
    }
  }
  if (!have_format) rd.fail("missing $MeshFormat section");
  if (!have_nodes) rd.fail("missing $Nodes section");
  if (!have_elements) rd.fail("missing $Elements section");

  Mesh<2> mesh;
  mesh.nodes = node_xy;
  std::map<std::vector<int>, int> boundary_edges;
  auto lookup = [&](const RawElement& el, long id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) {
      throw MeshError(source + ":" + std::to_string(el.line) + ": element " + std::to_string(el.id) +
                      " references unknown node " + std::to_string(id));
    }
    return it->second;
  };
  for (const auto& el : raw) {
    if (el.type == 15) continue;
    std::vector<int> nodes;
    for (long id : el.nodes) nodes.push_back(lookup(el, id));
    if (el.type == 1 || el.type == 8 || el.type == 26) {
      auto it = physical_names.find(el.physical);
      const std::string name = it != physical_names.end() ? it->second : std::to_string(el.physical);
      std::vector<int> key = {std::min(nodes[0], nodes[1]), std::max(nodes[0], nodes[1])};
      boundary_edges[key] = mesh.boundary_index(name);
      continue;
    }
    const Shape shape = (el.type == 2 || el.type == 9 || el.type == 21) ? Shape::triangle : Shape::quad;
    mesh.elements.push_back({shape, nodes, el.id});
  }
  if (mesh.elements.empty()) throw MeshError(source + ": mesh contains no 2D elements");
  mesh.build_faces(boundary_edges);
  return mesh;
}

inline Mesh<2> load_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return read_gmsh(in, path);
}

}  // namespace ebdg
