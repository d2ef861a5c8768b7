#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <ebdg/cases.hpp>
#include <ebdg/gmsh.hpp>

using namespace ebdg;

namespace {

const char* kTwoTriangles = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "wall"
2 2 "fluid"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 1 1 1 2
2 1 2 1 1 2 3
3 1 2 1 1 3 4
4 1 2 1 1 4 1
5 2 2 2 1 1 2 3
6 2 2 2 1 1 3 4
$EndElements
)";

// Annular sector r in [0.5, 1], theta in [0, pi/2] with 9-node quads, n sectors.
std::string sector_msh(int n) {
  const double r[3] = {0.5, 0.75, 1.0};
  auto nid = [](int i, int j) { return j * 3 + i + 1; };  // i radial, j angular (2n+1 stations)
  const int nj = 2 * n + 1;
  int count = 0;
  std::ostringstream body;
  body.precision(17);
  for (int s = 0; s < n; ++s) {
    const int j = 2 * s;
    body << ++count << " 8 2 1 1 " << nid(2, j) << ' ' << nid(2, j + 2) << ' ' << nid(2, j + 1) << '\n';
    body << ++count << " 8 2 2 2 " << nid(0, j) << ' ' << nid(0, j + 2) << ' ' << nid(0, j + 1) << '\n';
  }
  body << ++count << " 8 2 3 3 " << nid(0, 0) << ' ' << nid(2, 0) << ' ' << nid(1, 0) << '\n';
  body << ++count << " 8 2 3 3 " << nid(0, nj - 1) << ' ' << nid(2, nj - 1) << ' ' << nid(1, nj - 1) << '\n';
  for (int s = 0; s < n; ++s) {
    const int j = 2 * s;
    body << ++count << " 10 2 4 4 " << nid(0, j) << ' ' << nid(2, j) << ' ' << nid(2, j + 2) << ' ' << nid(0, j + 2)
         << ' ' << nid(1, j) << ' ' << nid(2, j + 1) << ' ' << nid(1, j + 2) << ' ' << nid(0, j + 1) << ' '
         << nid(1, j + 1) << '\n';
  }
  std::ostringstream out;
  out.precision(17);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n3\n1 1 \"outer\"\n1 2 \"inner\"\n1 3 \"side\"\n"
      << "$EndPhysicalNames\n$Nodes\n" << 3 * nj << '\n';
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < 3; ++i) {
      const double th = 0.5 * std::numbers::pi * j / (nj - 1);
      out << nid(i, j) << ' ' << r[i] * std::cos(th) << ' ' << r[i] * std::sin(th) << " 0\n";
    }
  out << "$EndNodes\n$Elements\n" << count << '\n' << body.str() << "$EndElements\n";
  return out.str();
}

Mesh<2> parse(const std::string& text) {
  std::istringstream in(text);
  return read_gmsh(in, "fixture.msh");
}

double boundary_length(const Mesh<2>& mesh, const std::string& name, int p) {
  const int b = mesh.find_boundary(name);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ReferenceElement ref(mesh.elements[e].shape, p);
    const auto g = build_element_geometry(mesh, e, ref);
    for (int s = 0; s < ref.num_surface_points(); ++s)
      if (mesh.faces[mesh.element_faces[e][ref.surface_edge(s)]].boundary == b) total += g.weight_surface[s];
  }
  return total;
}

}  // namespace

TEST(Geometry, GmshTwoTriangles) {
  const auto mesh = parse(kTwoTriangles);
  ASSERT_EQ(mesh.num_elements(), 2);
  EXPECT_EQ(mesh.faces.size(), 5u);
  EXPECT_EQ(mesh.neighbors[0], std::vector<int>{1});
  EXPECT_EQ(mesh.elements[1].id, 6);
  const int wall = mesh.find_boundary("wall");
  ASSERT_GE(wall, 0);
  int tagged = 0;
  for (const auto& f : mesh.faces) tagged += f.is_boundary() && f.boundary == wall;
  EXPECT_EQ(tagged, 4);
  const ReferenceElement ref(Shape::triangle, 2);
  for (int e = 0; e < 2; ++e) EXPECT_NEAR(build_element_geometry(mesh, e, ref).volume, 0.5, 1e-15);
  EXPECT_NEAR(boundary_length(mesh, "wall", 2), 4.0, 1e-14);
}

TEST(Geometry, GmshErrorsCarryLocation) {
  const std::string text = kTwoTriangles;
  const std::string truncated = text.substr(0, text.find("5 2 2"));
  try {
    parse(truncated);
    FAIL() << "truncated file accepted";
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("fixture.msh:"), std::string::npos) << e.what();
  }
  std::string bad_node = text;
  bad_node.replace(bad_node.find("6 2 2 2 1 1 3 4"), 15, "6 2 2 2 1 1 3 9");
  EXPECT_THROW(parse(bad_node), MeshError);
  std::string untagged = text;
  untagged.replace(untagged.find("4 1 2 1 1 4 1"), 13, "4 15 2 1 1 4");
  EXPECT_THROW(parse(untagged), MeshError);
  EXPECT_THROW(parse("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n"), MeshError);
  EXPECT_THROW(load_gmsh("/nonexistent/mesh.msh"), MeshError);
}

TEST(Geometry, IdentityAndScaledMaps) {
  const auto unit = rectangle_quad_mesh(0.0, 1.0, 0.0, 1.0, 1, 1);
  const auto jac = geometric_jacobian(unit, 0, {0.3, 0.7});
  EXPECT_NEAR(jac.det, 1.0, 1e-15);
  EXPECT_NEAR(jac.J[0][1], 0.0, 1e-15);
  EXPECT_NEAR(jac.x[0], 0.3, 1e-15);
  EXPECT_NEAR(jac.x[1], 0.7, 1e-15);
  const double h = 0.25;
  const auto small = rectangle_quad_mesh(0.0, h, 0.0, h, 1, 1);
  const auto g = build_element_geometry(small, 0, ReferenceElement(Shape::quad, 2));
  EXPECT_NEAR(g.volume, h * h, 1e-15);
  EXPECT_NEAR(g.length, h, 1e-15);
  EXPECT_NEAR(g.surface, 4 * h, 1e-14);
  EXPECT_TRUE(g.affine);
  const auto line = uniform_line_mesh(0.0, 1.0, 10);
  const auto gl = build_element_geometry(line, 3, ReferenceElement(Shape::line, 2));
  EXPECT_NEAR(gl.volume, 0.1, 1e-15);
  EXPECT_NEAR(gl.length, 0.1, 1e-15);
  EXPECT_NEAR(gl.normal[0][0], -1.0, 0.0);
  EXPECT_NEAR(gl.normal[1][0], 1.0, 0.0);
}

TEST(Geometry, RightTriangleLength) {
  const double h = 0.1;
  Mesh<2> m;
  m.nodes = {{0, 0}, {h, 0}, {0, h}};
  m.elements.push_back({Shape::triangle, {0, 1, 2}, 1});
  std::map<std::vector<int>, int> bnd;
  const int b = m.boundary_index("b");
  bnd[{0, 1}] = bnd[{1, 2}] = bnd[{0, 2}] = b;
  m.build_faces(bnd);
  const auto g = build_element_geometry(m, 0, ReferenceElement(Shape::triangle, 3));
  EXPECT_NEAR(g.volume, h * h / 2, 1e-16);
  for (double j : g.jac_surface) EXPECT_NEAR(j, h / 2, 1e-15);
  EXPECT_NEAR(g.length, h, 1e-15);
  EXPECT_NEAR(g.surface, (2 + std::sqrt(2.0)) * h, 1e-15);
  EXPECT_NEAR(geometric_jacobian(m, 0, {0.0, 0.0}).det, h * h / 4, 1e-17);
}

TEST(Geometry, CurvedJacobianAgainstFiniteDifferences) {
  const auto mesh = curved_quad_mesh(2, 2, 0.08);
  const double d = 1e-6;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (const RefPoint r : {RefPoint{0.2, 0.3}, RefPoint{0.5, 0.5}, RefPoint{0.9, 0.1}}) {
      const auto j = geometric_jacobian(mesh, e, r);
      const auto xp = geometric_jacobian(mesh, e, {r[0] + d, r[1]}).x, xm = geometric_jacobian(mesh, e, {r[0] - d, r[1]}).x;
      const auto yp = geometric_jacobian(mesh, e, {r[0], r[1] + d}).x, ym = geometric_jacobian(mesh, e, {r[0], r[1] - d}).x;
      const double a = (xp[0] - xm[0]) / (2 * d), b = (yp[0] - ym[0]) / (2 * d);
      const double c = (xp[1] - xm[1]) / (2 * d), dd = (yp[1] - ym[1]) / (2 * d);
      EXPECT_NEAR(j.det, a * dd - b * c, 1e-8);
      EXPECT_NEAR(j.J[0][0], a, 1e-8);
      EXPECT_NEAR(j.J[1][0], c, 1e-8);
    }
}

TEST(Geometry, CurvedMeshIdentities) {
  const auto mesh = curved_quad_mesh(3, 3, 0.05);
  for (int p = 1; p <= 4; ++p) {
    const ReferenceElement ref(Shape::quad, p);
    double area = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto g = build_element_geometry(mesh, e, ref);
      area += g.volume;
      Vec<2> sum{};
      for (int s = 0; s < ref.num_surface_points(); ++s)
        for (int k = 0; k < 2; ++k) sum[k] += g.zeta[s] * g.normal[s][k];
      EXPECT_LT(norm<2>(sum), 1e-12);
      for (double j : g.jac_surface) EXPECT_LE(g.length, g.volume / j + 1e-15);
      if (e == 4) EXPECT_FALSE(g.affine);
    }
    EXPECT_NEAR(area, 1.0, 1e-13) << p;
  }
}

TEST(Geometry, InteriorFacePointsMatch) {
  const auto mesh = curved_quad_mesh(3, 2, 0.05);
  const ReferenceElement ref(Shape::quad, 3);
  std::vector<ElementGeometry<2>> geo;
  for (int e = 0; e < mesh.num_elements(); ++e) geo.push_back(build_element_geometry(mesh, e, ref));
  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) continue;
    const int n = ref.num_edge_points(f.edge[0]);
    for (int q = 0; q < n; ++q) {
      const int s0 = ref.surface_index(f.edge[0], q);
      double best = 1e300;
      int match = -1;
      for (int r = 0; r < n; ++r) {
        const int s1 = ref.surface_index(f.edge[1], r);
        const double dx = std::hypot(geo[f.elem[0]].x_surface[s0][0] - geo[f.elem[1]].x_surface[s1][0],
                                     geo[f.elem[0]].x_surface[s0][1] - geo[f.elem[1]].x_surface[s1][1]);
        if (dx < best) best = dx, match = s1;
      }
      EXPECT_LT(best, 1e-14);
      EXPECT_NEAR(geo[f.elem[0]].normal[s0][0], -geo[f.elem[1]].normal[match][0], 1e-13);
      EXPECT_NEAR(geo[f.elem[0]].normal[s0][1], -geo[f.elem[1]].normal[match][1], 1e-13);
      EXPECT_NEAR(geo[f.elem[0]].jac_surface[s0], geo[f.elem[1]].jac_surface[match], 1e-13);
    }
  }
}

TEST(Geometry, QuarterCircleArcLength) {
  const auto mesh = parse(sector_msh(4));
  ASSERT_EQ(mesh.num_elements(), 4);
  EXPECT_NEAR(boundary_length(mesh, "outer", 3), std::numbers::pi / 2, 1e-4);
  EXPECT_NEAR(boundary_length(mesh, "inner", 3), std::numbers::pi / 4, 1e-4);
  EXPECT_NEAR(boundary_length(mesh, "side", 3), 1.0, 1e-14);
}

TEST(Geometry, PeriodicLineMesh) {
  const auto m = uniform_line_mesh(0.0, 2.0, 8, true);
  EXPECT_EQ(m.faces.size(), 8u);
  for (const auto& f : m.faces) EXPECT_FALSE(f.is_boundary());
  EXPECT_EQ(m.neighbors[0], (std::vector<int>{1, 7}));
  EXPECT_THROW(uniform_line_mesh(1.0, 0.0, 4), MeshError);
}

TEST(Geometry, InvertedElementRejected) {
  Mesh<2> m;
  m.nodes = {{0, 0}, {0, 1}, {1, 0}};
  m.elements.push_back({Shape::triangle, {0, 1, 2}, 7});
  std::map<std::vector<int>, int> bnd;
  const int b = m.boundary_index("b");
  bnd[{0, 1}] = bnd[{1, 2}] = bnd[{0, 2}] = b;
  m.build_faces(bnd);
  EXPECT_THROW(build_element_geometry(m, 0, ReferenceElement(Shape::triangle, 1)), MeshError);
}
