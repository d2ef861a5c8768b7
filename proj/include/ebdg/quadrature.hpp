#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebdg {

enum class Shape { line, quad, triangle };

inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::line: return "line";
    case Shape::quad: return "quad";
    case Shape::triangle: return "triangle";
  }
  return "?";
}

inline Shape shape_from_string(const std::string& name) {
  if (name == "line") return Shape::line;
  if (name == "quad") return Shape::quad;
  if (name == "triangle") return Shape::triangle;
  throw std::invalid_argument("unknown element shape '" + name + "'");
}

/// Reference coordinates. The line uses only the first entry.
using RefPoint = std::array<double, 2>;

// Reference elements:
//   line      [-1, 1]
//   quad      [0, 1]^2, vertices (0,0) (1,0) (1,1) (0,1)
//   triangle  vertices (-1,-1) (1,-1) (-1,1)
// Edges run counter-clockwise and are parameterized by reference arclength.

inline int spatial_dim(Shape s) { return s == Shape::line ? 1 : 2; }

inline int num_edges(Shape s) {
  switch (s) {
    case Shape::line: return 2;
    case Shape::quad: return 4;
    case Shape::triangle: return 3;
  }
  return 0;
}

inline double reference_volume(Shape s) {
  switch (s) {
    case Shape::line: return 2.0;
    case Shape::quad: return 1.0;
    case Shape::triangle: return 2.0;
  }
  return 0.0;
}

inline std::vector<RefPoint> reference_vertices(Shape s) {
  switch (s) {
    case Shape::line: return {{-1.0, 0.0}, {1.0, 0.0}};
    case Shape::quad: return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    case Shape::triangle: return {{-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}};
  }
  return {};
}

inline bool inside_reference(Shape s, const RefPoint& r, double tol = 1e-12) {
  switch (s) {
    case Shape::line: return r[0] >= -1.0 - tol && r[0] <= 1.0 + tol;
    case Shape::quad:
      return r[0] >= -tol && r[0] <= 1.0 + tol && r[1] >= -tol && r[1] <= 1.0 + tol;
    case Shape::triangle: return r[0] >= -1.0 - tol && r[1] >= -1.0 - tol && r[0] + r[1] <= tol;
  }
  return false;
}

struct QuadratureRule {
  std::vector<RefPoint> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// One edge of a reference element with its rule. Points are given in element
/// reference coordinates; params are the arclength positions along the edge.
struct EdgeRule {
  RefPoint start{};
  RefPoint end{};
  double length = 1.0;
  std::vector<double> params;
  QuadratureRule rule;
};

struct SurfaceQuadratureSet {
  std::vector<EdgeRule> edges;

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.rule.size();
    return n;
  }
};

/// Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > 10) throw std::invalid_argument("gauss_legendre: unsupported point count " + std::to_string(n));
  QuadratureRule q;
  q.points.resize(n);
  q.weights.resize(n);
  q.exact_degree = 2 * n - 1;
  auto legendre = [n](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.points[i] = {-x, 0.0};
    q.points[n - 1 - i] = {x, 0.0};
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.points[n / 2][0] = 0.0;
  return q;
}

/// Gauss-Legendre rule mapped to [a, b]; the weights sum to b - a.
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule q = gauss_legendre(n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q.points[i][0] = a + 0.5 * (b - a) * (q.points[i][0] + 1.0);
    q.weights[i] *= 0.5 * (b - a);
  }
  return q;
}

inline int gauss_points_for_degree(int order) { return std::max(1, (order + 2) / 2); }

namespace detail {

struct TriangleOrbit {
  int kind;  // 1: centroid, 3: (a,b,b), 6: (a,b,c)
  double a, b, c, w;
};

struct TriangleRuleData {
  int degree;
  std::vector<TriangleOrbit> orbits;
};

// Symmetric positive-weight rules (Dunavant), barycentric orbits; weights sum to 1.
inline const std::vector<TriangleRuleData>& triangle_rule_table() {
  static const std::vector<TriangleRuleData> table = {
      {1, {{1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}}},
      {2, {{3, 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3}}},
      {4,
       {{3, 0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
        {3, 0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322}}},
      {5,
       {{1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
        {3, 0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506},
        {3, 0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827}}},
      {6,
       {{3, 0.501426509658179, 0.249286745170910, 0.249286745170910, 0.116786275726379},
        {3, 0.873821971016996, 0.063089014491502, 0.063089014491502, 0.050844906370207},
        {6, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374}}},
      {8,
       {{1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.144315607677787},
        {3, 0.081414823414554, 0.459292588292723, 0.459292588292723, 0.095091634267285},
        {3, 0.658861384496480, 0.170569307751760, 0.170569307751760, 0.103217370534718},
        {3, 0.898905543365938, 0.050547228317031, 0.050547228317031, 0.032458497623198},
        {6, 0.008394777409958, 0.263112829634638, 0.728492392955404, 0.027230314174435}}},
      {9,
       {{1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.097135796282799},
        {3, 0.020634961602525, 0.489682519198738, 0.489682519198738, 0.031334700227139},
        {3, 0.125820817014127, 0.437089591492937, 0.437089591492937, 0.077827541004774},
        {3, 0.623592928761935, 0.188203535619033, 0.188203535619033, 0.079647738927210},
        {3, 0.910540973211095, 0.044729513394453, 0.044729513394453, 0.025577675658698},
        {6, 0.036838412054736, 0.221962989160766, 0.741198598784498, 0.043283539377289}}},
  };
  return table;
}

inline RefPoint triangle_from_barycentric(double l0, double l1, double l2) {
  // vertices (-1,-1), (1,-1), (-1,1)
  return {-l0 + l1 - l2, -l0 - l1 + l2};
}

inline QuadratureRule triangle_rule(int order) {
  for (const auto& data : triangle_rule_table()) {
    if (data.degree < order) continue;
    QuadratureRule q;
    q.exact_degree = data.degree;
    const double area = reference_volume(Shape::triangle);
    auto add = [&](double l0, double l1, double l2, double w) {
      q.points.push_back(triangle_from_barycentric(l0, l1, l2));
      q.weights.push_back(w * area);
    };
    for (const auto& o : data.orbits) {
      if (o.kind == 1) {
        add(o.a, o.b, o.c, o.w);
      } else if (o.kind == 3) {
        add(o.a, o.b, o.b, o.w);
        add(o.b, o.a, o.b, o.w);
        add(o.b, o.b, o.a, o.w);
      } else {
        add(o.a, o.b, o.c, o.w);
        add(o.a, o.c, o.b, o.w);
        add(o.b, o.a, o.c, o.w);
        add(o.b, o.c, o.a, o.w);
        add(o.c, o.a, o.b, o.w);
        add(o.c, o.b, o.a, o.w);
      }
    }
    return q;
  }
  throw std::invalid_argument("triangle quadrature: order " + std::to_string(order) + " unsupported (max 9)");
}

}  // namespace detail

inline constexpr int kMaxQuadratureOrder = 9;

/// Positive-weight volume rule with exact_degree >= order.
inline QuadratureRule volume_rule(Shape shape, int order) {
  if (order < 0 || order > kMaxQuadratureOrder) {
    throw std::invalid_argument("volume_rule: order " + std::to_string(order) + " unsupported for " +
                                to_string(shape));
  }
  const int n = gauss_points_for_degree(order);
  switch (shape) {
    case Shape::line: return gauss_legendre(n);
    case Shape::quad: {
      const QuadratureRule g = gauss_legendre(n, 0.0, 1.0);
      QuadratureRule q;
      q.exact_degree = g.exact_degree;
      // x fastest
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          q.points.push_back({g.points[i][0], g.points[j][0]});
          q.weights.push_back(g.weights[i] * g.weights[j]);
        }
      }
      return q;
    }
    case Shape::triangle: return detail::triangle_rule(order);
  }
  throw std::invalid_argument("volume_rule: unknown shape");
}

/// Per-edge rules; each edge's weights sum to its reference length.
inline SurfaceQuadratureSet surface_rules(Shape shape, int order) {
  if (order < 0 || order > kMaxQuadratureOrder) {
    throw std::invalid_argument("surface_rules: order " + std::to_string(order) + " unsupported for " +
                                to_string(shape));
  }
  SurfaceQuadratureSet set;
  if (shape == Shape::line) {
    for (double x : {-1.0, 1.0}) {
      EdgeRule e;
      e.start = e.end = {x, 0.0};
      e.length = 1.0;
      e.params = {0.0};
      e.rule.points = {{x, 0.0}};
      e.rule.weights = {1.0};
      e.rule.exact_degree = std::numeric_limits<int>::max();
      set.edges.push_back(e);
    }
    return set;
  }
  const auto verts = reference_vertices(shape);
  const int nv = static_cast<int>(verts.size());
  const int n = gauss_points_for_degree(order);
  for (int k = 0; k < nv; ++k) {
    EdgeRule e;
    e.start = verts[k];
    e.end = verts[(k + 1) % nv];
    const double dx = e.end[0] - e.start[0];
    const double dy = e.end[1] - e.start[1];
    e.length = std::hypot(dx, dy);
    const QuadratureRule g = gauss_legendre(n, 0.0, e.length);
    e.rule.exact_degree = g.exact_degree;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = g.points[i][0];
      e.params.push_back(t);
      e.rule.points.push_back({e.start[0] + t * dx / e.length, e.start[1] + t * dy / e.length});
      e.rule.weights.push_back(g.weights[i]);
    }
    set.edges.push_back(e);
  }
  return set;
}

}  // namespace ebdg
