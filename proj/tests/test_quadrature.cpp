#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <ebdg/quadrature.hpp>

using namespace ebdg;

namespace {

// Exact monomial integrals over the reference elements.
double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

double line_monomial(int a) { return a % 2 ? 0.0 : 2.0 / (a + 1); }

double quad_monomial(int a, int b) { return 1.0 / ((a + 1) * (b + 1)); }

// Triangle (-1,-1),(1,-1),(-1,1): substitute x = 2u - 1, y = 2v - 1 over the unit simplex,
// whose monomial integrals are i! j! / (i + j + 2)!.
double triangle_monomial(int a, int b) {
  double total = 0.0;
  for (int i = 0; i <= a; ++i)
    for (int j = 0; j <= b; ++j) {
      const double c = factorial(a) / (factorial(i) * factorial(a - i)) * factorial(b) / (factorial(j) * factorial(b - j));
      total += c * std::pow(2.0, i + j) * std::pow(-1.0, a - i + b - j) * factorial(i) * factorial(j) / factorial(i + j + 2);
    }
  return 4.0 * total;
}

double integrate(const QuadratureRule& q, int a, int b) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b);
  return s;
}

}  // namespace

TEST(Quadrature, GaussLegendreBasics) {
  const auto g1 = gauss_legendre(1);
  ASSERT_EQ(g1.size(), 1u);
  EXPECT_NEAR(g1.points[0][0], 0.0, 1e-15);
  EXPECT_NEAR(g1.weights[0], 2.0, 1e-15);
  const auto g2 = gauss_legendre(2);
  EXPECT_NEAR(std::abs(g2.points[0][0]), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(g2.points[0][0], -g2.points[1][0], 1e-15);
  const auto g3 = gauss_legendre(3);
  EXPECT_EQ(g3.exact_degree, 5);
  EXPECT_NEAR(integrate(g3, 4, 0), 0.4, 1e-15);
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
  EXPECT_THROW(gauss_legendre(11), std::invalid_argument);
}

TEST(Quadrature, GaussLegendreExactness) {
  for (int n = 1; n <= 10; ++n) {
    const auto g = gauss_legendre(n);
    EXPECT_EQ(g.exact_degree, 2 * n - 1);
    for (int a = 0; a <= 2 * n - 1; ++a) EXPECT_NEAR(integrate(g, a, 0), line_monomial(a), 1e-13) << n << " " << a;
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.points[i][0], -g.points[g.size() - 1 - i][0], 1e-14);
  }
}

TEST(Quadrature, VolumeRulesExactAndPositive) {
  for (Shape s : {Shape::line, Shape::quad, Shape::triangle}) {
    for (int order = 0; order <= kMaxQuadratureOrder; ++order) {
      const auto q = volume_rule(s, order);
      EXPECT_GE(q.exact_degree, order);
      double sum = 0.0;
      for (double w : q.weights) {
        EXPECT_GT(w, 0.0);
        sum += w;
      }
      EXPECT_NEAR(sum, reference_volume(s), 1e-14);
      for (const auto& r : q.points) EXPECT_TRUE(inside_reference(s, r, 1e-14));
      for (int a = 0; a <= q.exact_degree; ++a)
        for (int b = 0; a + b <= q.exact_degree; ++b) {
          if (s == Shape::line && b > 0) continue;
          const double exact = s == Shape::line   ? line_monomial(a)
                               : s == Shape::quad ? quad_monomial(a, b)
                                                  : triangle_monomial(a, b);
          EXPECT_NEAR(integrate(q, a, b), exact, 1e-12) << to_string(s) << " order " << order << " x^" << a << " y^" << b;
        }
    }
  }
}

TEST(Quadrature, RandomPolynomials) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Shape s : {Shape::quad, Shape::triangle}) {
    const auto q = volume_rule(s, 7);
    for (int trial = 0; trial < 20; ++trial) {
      double num = 0.0, exact = 0.0;
      for (int a = 0; a <= 7; ++a)
        for (int b = 0; a + b <= 7; ++b) {
          const double c = u(rng);
          num += c * integrate(q, a, b);
          exact += c * (s == Shape::quad ? quad_monomial(a, b) : triangle_monomial(a, b));
        }
      EXPECT_NEAR(num, exact, 1e-12);
    }
  }
}

TEST(Quadrature, TableOneQuadRule) {
  const auto q = volume_rule(Shape::quad, 5);
  EXPECT_EQ(q.size(), 9u);
  const auto s = surface_rules(Shape::quad, 5);
  ASSERT_EQ(s.edges.size(), 4u);
  for (const auto& e : s.edges) EXPECT_EQ(e.rule.size(), 3u);
}

TEST(Quadrature, TriangleOrderThreeIsPositive) {
  const auto q = volume_rule(Shape::triangle, 3);
  EXPECT_GE(q.exact_degree, 3);
  for (double w : q.weights) EXPECT_GT(w, 0.0);
}

TEST(Quadrature, SurfaceRules) {
  const auto l = surface_rules(Shape::line, 7);
  ASSERT_EQ(l.edges.size(), 2u);
  EXPECT_EQ(l.edges[0].rule.points[0][0], -1.0);
  EXPECT_EQ(l.edges[1].rule.points[0][0], 1.0);
  EXPECT_EQ(l.edges[0].rule.weights[0], 1.0);
  const auto t = surface_rules(Shape::triangle, 3);
  ASSERT_EQ(t.edges.size(), 3u);
  for (const auto& e : t.edges) {
    EXPECT_EQ(e.rule.size(), 2u);
    EXPECT_EQ(e.rule.exact_degree, 3);
    double sum = 0.0;
    for (double w : e.rule.weights) sum += w;
    EXPECT_NEAR(sum, e.length, 1e-14);
    for (const auto& r : e.rule.points) EXPECT_TRUE(inside_reference(Shape::triangle, r, 1e-14));
  }
  EXPECT_THROW(volume_rule(Shape::quad, 10), std::invalid_argument);
}
