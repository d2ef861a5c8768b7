#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "euler.hpp"

namespace ebdg {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lagrange basis on the geometric nodes of an element (Gmsh node ordering, expressed
/// in this library's reference coordinates).
class GeometricBasis {
 public:
  GeometricBasis(Shape shape, int num_nodes) : shape_(shape), nodes_(node_coordinates(shape, num_nodes)) {
    degree_ = degree_for(shape, num_nodes);
    const int n = num_nodes;
    if (ebdg::num_basis(shape, degree_) != n) throw MeshError("geometric basis: node count mismatch");
    Eigen::MatrixXd V(n, n);
    double g[64];
    for (int i = 0; i < n; ++i) {
      eval_generators(shape, degree_, nodes_[i], g, nullptr);
      for (int j = 0; j < n; ++j) V(i, j) = g[j];
    }
    inv_ = V.inverse();
  }

  Shape shape() const { return shape_; }
  int degree() const { return degree_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<RefPoint>& nodes() const { return nodes_; }

  /// Shape-function values and reference gradients at r.
  void eval(const RefPoint& r, double* N, std::array<double, 2>* dN) const {
    const int n = num_nodes();
    double g[64];
    std::array<double, 2> dg[64];
    eval_generators(shape_, degree_, r, g, dN ? dg : nullptr);
    for (int i = 0; i < n; ++i) {
      double s = 0.0, sx = 0.0, sy = 0.0;
      for (int j = 0; j < n; ++j) {
        s += inv_(j, i) * g[j];
        if (dN) {
          sx += inv_(j, i) * dg[j][0];
          sy += inv_(j, i) * dg[j][1];
        }
      }
      N[i] = s;
      if (dN) dN[i] = {sx, sy};
    }
  }

  static int degree_for(Shape shape, int num_nodes) {
    switch (shape) {
      case Shape::line:
        if (num_nodes >= 2 && num_nodes <= 4) return num_nodes - 1;
        break;
      case Shape::quad:
        if (num_nodes == 4) return 1;
        if (num_nodes == 9) return 2;
        if (num_nodes == 16) return 3;
        break;
      case Shape::triangle:
        if (num_nodes == 3) return 1;
        if (num_nodes == 6) return 2;
        if (num_nodes == 10) return 3;
        break;
    }
    throw MeshError("unsupported " + to_string(shape) + " with " + std::to_string(num_nodes) + " nodes");
  }

  /// Reference coordinates of the geometric nodes in Gmsh order.
  static std::vector<RefPoint> node_coordinates(Shape shape, int num_nodes) {
    const double t = 1.0 / 3.0;
    switch (shape) {
      case Shape::line:
        if (num_nodes == 2) return {{-1, 0}, {1, 0}};
        if (num_nodes == 3) return {{-1, 0}, {1, 0}, {0, 0}};
        if (num_nodes == 4) return {{-1, 0}, {1, 0}, {-t, 0}, {t, 0}};
        break;
      case Shape::quad: {
        std::vector<RefPoint> c = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        if (num_nodes == 4) return c;
        if (num_nodes == 9) {
          c.insert(c.end(), {{0.5, 0}, {1, 0.5}, {0.5, 1}, {0, 0.5}, {0.5, 0.5}});
          return c;
        }
        if (num_nodes == 16) {
          c.insert(c.end(), {{t, 0}, {2 * t, 0}, {1, t}, {1, 2 * t}, {2 * t, 1}, {t, 1}, {0, 2 * t}, {0, t},
                             {t, t}, {2 * t, t}, {2 * t, 2 * t}, {t, 2 * t}});
          return c;
        }
        break;
      }
      case Shape::triangle: {
        // Gmsh barycentric layout on (0,0),(1,0),(0,1), mapped by r = 2 r_g - 1.
        auto m = [](double a, double b) { return RefPoint{2 * a - 1, 2 * b - 1}; };
        std::vector<RefPoint> c = {m(0, 0), m(1, 0), m(0, 1)};
        if (num_nodes == 3) return c;
        if (num_nodes == 6) {
          c.insert(c.end(), {m(0.5, 0), m(0.5, 0.5), m(0, 0.5)});
          return c;
        }
        if (num_nodes == 10) {
          c.insert(c.end(), {m(t, 0), m(2 * t, 0), m(2 * t, t), m(t, 2 * t), m(0, 2 * t), m(0, t), m(t, t)});
          return c;
        }
        break;
      }
    }
    throw MeshError("unsupported " + to_string(shape) + " with " + std::to_string(num_nodes) + " nodes");
  }

 private:
  Shape shape_;
  std::vector<RefPoint> nodes_;
  int degree_ = 1;
  Eigen::MatrixXd inv_;
};

inline const GeometricBasis& geometric_basis(Shape shape, int num_nodes) {
  static const std::map<std::pair<Shape, int>, std::shared_ptr<GeometricBasis>> table = [] {
    std::map<std::pair<Shape, int>, std::shared_ptr<GeometricBasis>> t;
    for (int n : {2, 3, 4}) t[{Shape::line, n}] = std::make_shared<GeometricBasis>(Shape::line, n);
    for (int n : {4, 9, 16}) t[{Shape::quad, n}] = std::make_shared<GeometricBasis>(Shape::quad, n);
    for (int n : {3, 6, 10}) t[{Shape::triangle, n}] = std::make_shared<GeometricBasis>(Shape::triangle, n);
    return t;
  }();
  auto it = table.find({shape, num_nodes});
  if (it == table.end()) {
    throw MeshError("unsupported " + to_string(shape) + " with " + std::to_string(num_nodes) + " nodes");
  }
  return *it->second;
}

/// Unstructured mesh: geometric nodes, elements, and face connectivity.
template <int Dim>
struct Mesh {
  struct Element {
    Shape shape = Dim == 1 ? Shape::line : Shape::quad;
    std::vector<int> nodes;  // geometric nodes in Gmsh order
    long id = 0;             // external identifier for diagnostics
  };
  /// Side 1 is absent (-1) on boundary faces. For periodic faces, a point on side 1
  /// plus offset coincides with the matching point on side 0.
  struct Face {
    std::array<int, 2> elem{-1, -1};
    std::array<int, 2> edge{-1, -1};
    int boundary = -1;
    Vec<Dim> offset{};
    bool is_boundary() const { return elem[1] < 0; }
  };

  std::vector<Vec<Dim>> nodes;
  std::vector<Element> elements;
  std::vector<Face> faces;
  std::vector<std::string> boundary_names;
  std::vector<std::vector<int>> element_faces;  // [e][k]
  std::vector<std::vector<int>> neighbors;      // N_e

  int num_elements() const { return static_cast<int>(elements.size()); }

  int boundary_index(const std::string& name) {
    for (std::size_t i = 0; i < boundary_names.size(); ++i)
      if (boundary_names[i] == name) return static_cast<int>(i);
    boundary_names.push_back(name);
    return static_cast<int>(boundary_names.size()) - 1;
  }

  int find_boundary(const std::string& name) const {
    for (std::size_t i = 0; i < boundary_names.size(); ++i)
      if (boundary_names[i] == name) return static_cast<int>(i);
    return -1;
  }

  /// Corner node ids of local edge k.
  std::vector<int> edge_corners(int e, int k) const {
    const auto& el = elements[e];
    if (el.shape == Shape::line) return {el.nodes[k]};
    const int nc = el.shape == Shape::quad ? 4 : 3;
    return {el.nodes[k], el.nodes[(k + 1) % nc]};
  }

  /// Builds faces by matching element edges through shared corner nodes. Edges not shared
  /// by two elements must appear in boundary_edges (sorted corner key -> boundary index).
  void build_faces(const std::map<std::vector<int>, int>& boundary_edges) {
    faces.clear();
    element_faces.assign(elements.size(), {});
    std::map<std::vector<int>, int> open;
    for (int e = 0; e < num_elements(); ++e) {
      const int ne = num_edges(elements[e].shape);
      element_faces[e].assign(ne, -1);
      for (int k = 0; k < ne; ++k) {
        auto key = edge_corners(e, k);
        std::sort(key.begin(), key.end());
        auto it = open.find(key);
        if (it != open.end()) {
          Face& f = faces[it->second];
          if (f.elem[1] >= 0) throw MeshError("edge shared by more than two elements near element " + std::to_string(elements[e].id));
          f.elem[1] = e;
          f.edge[1] = k;
          element_faces[e][k] = it->second;
          open.erase(it);
        } else {
          Face f;
          f.elem[0] = e;
          f.edge[0] = k;
          faces.push_back(f);
          element_faces[e][k] = static_cast<int>(faces.size()) - 1;
          open[key] = static_cast<int>(faces.size()) - 1;
        }
      }
    }
    for (const auto& [key, fi] : open) {
      auto it = boundary_edges.find(key);
      if (it == boundary_edges.end()) {
        throw MeshError("boundary edge of element " + std::to_string(elements[faces[fi].elem[0]].id) +
                        " has no boundary tag");
      }
      faces[fi].boundary = it->second;
    }
    build_neighbors();
  }

  void build_neighbors() {
    neighbors.assign(elements.size(), {});
    for (const auto& f : faces) {
      if (f.is_boundary()) continue;
      if (f.elem[0] == f.elem[1]) continue;
      neighbors[f.elem[0]].push_back(f.elem[1]);
      neighbors[f.elem[1]].push_back(f.elem[0]);
    }
    for (auto& n : neighbors) {
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
    }
  }

  /// Moves boundary faces tagged `from` whose corner centroid satisfies pred to boundary `to`.
  template <class Pred>
  void retag_boundary(const std::string& from, const std::string& to, Pred&& pred) {
    const int ia = find_boundary(from);
    if (ia < 0) throw MeshError("retag_boundary: unknown boundary '" + from + "'");
    const int ib = boundary_index(to);
    for (auto& f : faces) {
      if (f.boundary != ia) continue;
      const auto corners = edge_corners(f.elem[0], f.edge[0]);
      Vec<Dim> c{};
      for (int n : corners)
        for (int d = 0; d < Dim; ++d) c[d] += nodes[n][d] / corners.size();
      if (pred(c)) f.boundary = ib;
    }
  }

  /// Joins the boundary faces tagged `a` with those tagged `b`, where a point x on `b`
  /// corresponds to x + offset on `a`. Matching uses the face corner coordinates.
  void make_periodic(const std::string& a, const std::string& b, const Vec<Dim>& offset) {
    const int ia = find_boundary(a), ib = find_boundary(b);
    if (ia < 0 || ib < 0) throw MeshError("make_periodic: unknown boundary '" + (ia < 0 ? a : b) + "'");
    std::vector<int> fa, fb;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
      if (faces[i].boundary == ia) fa.push_back(i);
      if (faces[i].boundary == ib) fb.push_back(i);
    }
    if (fa.size() != fb.size()) throw MeshError("make_periodic: boundaries '" + a + "' and '" + b + "' differ in face count");
    auto center = [&](int fi) {
      Vec<Dim> c{};
      const auto corners = edge_corners(faces[fi].elem[0], faces[fi].edge[0]);
      for (int n : corners)
        for (int d = 0; d < Dim; ++d) c[d] += nodes[n][d] / corners.size();
      return c;
    };
    std::vector<bool> used(fb.size(), false);
    std::vector<int> remove;
    for (int i : fa) {
      const Vec<Dim> ca = center(i);
      int match = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < fb.size(); ++j) {
        if (used[j]) continue;
        Vec<Dim> cb = center(fb[j]);
        double d2 = 0.0;
        for (int d = 0; d < Dim; ++d) d2 += (cb[d] + offset[d] - ca[d]) * (cb[d] + offset[d] - ca[d]);
        if (d2 < best) best = d2, match = static_cast<int>(j);
      }
      if (match < 0 || std::sqrt(best) > 1e-8 * (1.0 + norm<Dim>(offset))) {
        throw MeshError("make_periodic: no partner for a face on '" + a + "'");
      }
      used[match] = true;
      Face& f = faces[i];
      const Face& g = faces[fb[match]];
      f.elem[1] = g.elem[0];
      f.edge[1] = g.edge[0];
      f.boundary = -1;
      f.offset = offset;
      element_faces[g.elem[0]][g.edge[0]] = i;
      remove.push_back(fb[match]);
    }
    // Drop the absorbed faces and renumber.
    std::sort(remove.begin(), remove.end());
    std::vector<int> remap(faces.size(), -1);
    std::vector<Face> kept;
    for (int i = 0, r = 0; i < static_cast<int>(faces.size()); ++i) {
      if (r < static_cast<int>(remove.size()) && remove[r] == i) {
        ++r;
        continue;
      }
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(faces[i]);
    }
    faces = std::move(kept);
    for (auto& ef : element_faces)
      for (auto& fi : ef) fi = remap[fi];
    build_neighbors();
  }
};

/// Uniform 1D mesh of n intervals on [x0, x1]; boundaries "left" and "right".
inline Mesh<1> uniform_line_mesh(double x0, double x1, int n, bool periodic = false) {
  if (n < 1 || !(x1 > x0)) throw MeshError("uniform_line_mesh: bad extent or count");
  Mesh<1> m;
  for (int i = 0; i <= n; ++i) m.nodes.push_back({x0 + (x1 - x0) * i / n});
  m.nodes.back()[0] = x1;
  for (int i = 0; i < n; ++i) m.elements.push_back({Shape::line, {i, i + 1}, i});
  std::map<std::vector<int>, int> bnd;
  bnd[{0}] = m.boundary_index("left");
  bnd[{n}] = m.boundary_index("right");
  m.build_faces(bnd);
  if (periodic) m.make_periodic("right", "left", {x1 - x0});
  return m;
}

/// Structured nx-by-ny quad mesh of [x0,x1]x[y0,y1]; boundaries "bottom", "right", "top", "left".
inline Mesh<2> rectangle_quad_mesh(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1) throw MeshError("rectangle_quad_mesh: bad counts");
  Mesh<2> m;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.elements.push_back({Shape::quad, {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}, j * nx + i});
  std::map<std::vector<int>, int> bnd;
  const int b = m.boundary_index("bottom"), r = m.boundary_index("right"), t = m.boundary_index("top"),
            l = m.boundary_index("left");
  auto key = [](int a, int c) { return std::vector<int>{std::min(a, c), std::max(a, c)}; };
  for (int i = 0; i < nx; ++i) {
    bnd[key(id(i, 0), id(i + 1, 0))] = b;
    bnd[key(id(i, ny), id(i + 1, ny))] = t;
  }
  for (int j = 0; j < ny; ++j) {
    bnd[key(id(0, j), id(0, j + 1))] = l;
    bnd[key(id(nx, j), id(nx, j + 1))] = r;
  }
  m.build_faces(bnd);
  return m;
}

/// Jacobian matrix dx/dr and its determinant at reference point r.
template <int Dim>
struct JacobianEval {
  std::array<std::array<double, Dim>, Dim> J{};  // J[i][j] = dx_i / dr_j
  double det = 0.0;
  Vec<Dim> x{};
};

template <int Dim>
inline JacobianEval<Dim> geometric_jacobian(const Mesh<Dim>& mesh, int e, const RefPoint& r) {
  const auto& el = mesh.elements[e];
  const auto& gb = geometric_basis(el.shape, static_cast<int>(el.nodes.size()));
  double N[16];
  std::array<double, 2> dN[16];
  gb.eval(r, N, dN);
  JacobianEval<Dim> out;
  for (std::size_t i = 0; i < el.nodes.size(); ++i) {
    const auto& xn = mesh.nodes[el.nodes[i]];
    for (int a = 0; a < Dim; ++a) {
      out.x[a] += N[i] * xn[a];
      for (int b = 0; b < Dim; ++b) out.J[a][b] += dN[i][b] * xn[a];
    }
  }
  if constexpr (Dim == 1) {
    out.det = out.J[0][0];
  } else {
    out.det = out.J[0][0] * out.J[1][1] - out.J[0][1] * out.J[1][0];
  }
  return out;
}

/// Surface Jacobian magnitude and unit outward normal on edge k at reference point r
/// (r must lie on the edge).
template <int Dim>
inline std::pair<double, Vec<Dim>> surface_jacobian(const Mesh<Dim>& mesh, int e, int k, const RefPoint& r) {
  const auto jac = geometric_jacobian(mesh, e, r);
  if constexpr (Dim == 1) {
    const double sgn = jac.det > 0 ? 1.0 : -1.0;
    return {1.0, Vec<1>{k == 0 ? -sgn : sgn}};
  } else {
    const auto verts = reference_vertices(mesh.elements[e].shape);
    const int nv = static_cast<int>(verts.size());
    const RefPoint a = verts[k], b = verts[(k + 1) % nv];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double tr[2] = {(b[0] - a[0]) / len, (b[1] - a[1]) / len};
    const double tx = jac.J[0][0] * tr[0] + jac.J[0][1] * tr[1];
    const double ty = jac.J[1][0] * tr[0] + jac.J[1][1] * tr[1];
    const double mag = std::hypot(tx, ty);
    return {mag, Vec<2>{ty / mag, -tx / mag}};
  }
}

/// Cached per-element geometry at the quadrature points of a reference element.
template <int Dim>
struct ElementGeometry {
  std::vector<Vec<Dim>> x_volume;
  std::vector<double> det_volume;
  std::vector<double> weight_volume;  // w_v |J_v|
  std::vector<std::array<std::array<double, Dim>, Dim>> inv_jacobian;  // dr/dx
  std::vector<Vec<Dim>> x_surface;
  std::vector<Vec<Dim>> normal;
  std::vector<double> jac_surface;    // |J^d|
  std::vector<double> weight_surface; // w_s |J^d|
  std::vector<double> zeta;           // w_s |J^d| / V_e
  double volume = 0.0;
  double surface = 0.0;
  double length = 0.0;  // L_e
  Vec<Dim> centroid{};
  bool affine = true;
};

template <int Dim>
inline ElementGeometry<Dim> build_element_geometry(const Mesh<Dim>& mesh, int e, const ReferenceElement& ref) {
  ElementGeometry<Dim> g;
  const long id = mesh.elements[e].id;
  const int nv = ref.num_volume_points();
  const auto& vr = ref.volume_rule();
  double det0 = 0.0;
  for (int v = 0; v < nv; ++v) {
    const auto jac = geometric_jacobian(mesh, e, vr.points[v]);
    if (!(jac.det > 0.0)) throw MeshError("inverted element " + std::to_string(id) + " (non-positive Jacobian)");
    if (v == 0) det0 = jac.det;
    if (std::abs(jac.det - det0) > 1e-12 * std::abs(det0)) g.affine = false;
    g.x_volume.push_back(jac.x);
    g.det_volume.push_back(jac.det);
    g.weight_volume.push_back(vr.weights[v] * jac.det);
    std::array<std::array<double, Dim>, Dim> inv{};
    if constexpr (Dim == 1) {
      inv[0][0] = 1.0 / jac.J[0][0];
    } else {
      inv[0][0] = jac.J[1][1] / jac.det;
      inv[0][1] = -jac.J[0][1] / jac.det;
      inv[1][0] = -jac.J[1][0] / jac.det;
      inv[1][1] = jac.J[0][0] / jac.det;
    }
    g.inv_jacobian.push_back(inv);
    g.volume += vr.weights[v] * jac.det;
    for (int d = 0; d < Dim; ++d) g.centroid[d] += vr.weights[v] * jac.det * jac.x[d];
  }
  for (int d = 0; d < Dim; ++d) g.centroid[d] /= g.volume;
  const int ns = ref.num_surface_points();
  double max_jac = 0.0;
  for (int s = 0; s < ns; ++s) {
    const RefPoint& r = ref.surface_point(s);
    const int k = ref.surface_edge(s);
    const auto jac = geometric_jacobian(mesh, e, r);
    const auto [mag, n] = surface_jacobian(mesh, e, k, r);
    if (!(mag > 1e-14 * std::pow(g.volume, 1.0 / Dim))) {
      throw MeshError("degenerate edge " + std::to_string(k) + " of element " + std::to_string(id));
    }
    g.x_surface.push_back(jac.x);
    g.normal.push_back(n);
    g.jac_surface.push_back(mag);
    g.weight_surface.push_back(ref.surface_weight(s) * mag);
    g.surface += ref.surface_weight(s) * mag;
    max_jac = std::max(max_jac, mag);
  }
  for (int s = 0; s < ns; ++s) g.zeta.push_back(g.weight_surface[s] / g.volume);
  g.length = g.volume / max_jac;
  if constexpr (Dim == 2) {
    // Closed-surface identity: sum zeta n = 0; scaled by L_e to be dimensionless.
    Vec<2> sum{};
    for (int s = 0; s < ns; ++s)
      for (int d = 0; d < 2; ++d) sum[d] += g.zeta[s] * g.normal[s][d];
    if (norm<2>(sum) * g.length > 1e-10) {
      throw MeshError("element " + std::to_string(id) + " fails the closed-surface identity by " +
                      std::to_string(norm<2>(sum) * g.length));
    }
    // Outward orientation, checked per edge at the middle surface point.
    for (int k = 0; k < ref.num_edges(); ++k) {
      const int s = ref.surface_index(k, ref.num_edge_points(k) / 2);
      Vec<2> dx{g.x_surface[s][0] - g.centroid[0], g.x_surface[s][1] - g.centroid[1]};
      if (dot<2>(dx, g.normal[s]) <= 0.0) {
        throw MeshError("element " + std::to_string(id) + " has an inward normal on edge " + std::to_string(k));
      }
    }
  }
  return g;
}

}  // namespace ebdg
