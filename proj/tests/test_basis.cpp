#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include <ebdg/basis.hpp>

using namespace ebdg;

namespace {

RefPoint random_point(Shape s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (s) {
    case Shape::line: return {-1.0 + 2.0 * u(rng), 0.0};
    case Shape::quad: return {u(rng), u(rng)};
    case Shape::triangle: {
      double a = u(rng), b = u(rng);
      if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
      return {-1.0 + 2.0 * a, -1.0 + 2.0 * b};
    }
  }
  return {};
}

const Shape kShapes[] = {Shape::line, Shape::quad, Shape::triangle};

}  // namespace

TEST(Basis, Counts) {
  for (int p = 0; p <= 4; ++p) {
    EXPECT_EQ(num_basis(Shape::line, p), p + 1);
    EXPECT_EQ(num_basis(Shape::quad, p), (p + 1) * (p + 1));
    EXPECT_EQ(num_basis(Shape::triangle, p), (p + 1) * (p + 2) / 2);
  }
}

TEST(Basis, ConstantMemberAndOrthonormality) {
  std::mt19937_64 rng(6);
  for (Shape s : kShapes)
    for (int p = 1; p <= 4; ++p) {
      const ReferenceElement ref(s, p);
      const double c0 = ref.eval_basis(random_point(s, rng))[0];
      EXPECT_NEAR(ref.eval_basis(random_point(s, rng))[0], c0, 1e-14);
      const Eigen::MatrixXd M = ref.mass_matrix();
      EXPECT_LT((M - Eigen::MatrixXd::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      EXPECT_EQ(llt.info(), Eigen::Success);
    }
}

TEST(Basis, LagrangePartitionOfUnity) {
  std::mt19937_64 rng(7);
  for (Shape s : kShapes)
    for (int p = 1; p <= 4; ++p) {
      const ReferenceElement ref(s, p);
      for (int i = 0; i < 20; ++i) EXPECT_NEAR(ref.lagrange(random_point(s, rng)).sum(), 1.0, 1e-12);
    }
}

TEST(Basis, ReproducesCoordinateFunction) {
  // Fit r -> r[0] by interpolation at the N_p interpolation points, then compare at random points.
  std::mt19937_64 rng(8);
  for (Shape s : kShapes)
    for (int p = 1; p <= 4; ++p) {
      const ReferenceElement ref(s, p);
      const auto& pts = ref.interpolation_points();
      std::vector<double> vals(pts.size());
      for (std::size_t n = 0; n < pts.size(); ++n) vals[n] = ref.volume_rule().points[pts[n]][0];
      const auto c = ref.from_point_values<double>(vals);
      for (int i = 0; i < 20; ++i) {
        const auto r = random_point(s, rng);
        const auto phi = ref.eval_basis(r);
        double v = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m) v += c[m] * phi[m];
        EXPECT_NEAR(v, r[0], 1e-12);
      }
    }
}

TEST(Basis, PointValueRoundTripAndTwoPathEvaluation) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Shape s : kShapes)
    for (int p = 1; p <= 4; ++p) {
      const ReferenceElement ref(s, p);
      std::vector<double> c(ref.num_basis());
      for (auto& x : c) x = u(rng);
      const auto vals = ref.to_point_values<double>(c);
      const auto back = ref.from_point_values<double>(vals);
      for (std::size_t m = 0; m < c.size(); ++m) EXPECT_NEAR(back[m], c[m], 1e-12);
      for (int i = 0; i < 50; ++i) {
        const auto r = random_point(s, rng);
        const auto phi = ref.eval_basis(r);
        double modal = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m) modal += c[m] * phi[m];
        const Eigen::VectorXd l = ref.lagrange(r);
        double nodal = 0.0;
        for (std::size_t n = 0; n < vals.size(); ++n) nodal += l(n) * vals[n];
        EXPECT_NEAR(modal, nodal, 1e-12);
      }
      // Constant polynomial: equal values everywhere.
      std::vector<double> one(ref.num_basis(), 0.0);
      one[0] = ref.constant_coefficient();
      for (double v : ref.to_point_values<double>(one)) EXPECT_NEAR(v, 1.0, 1e-14);
    }
}

TEST(Basis, InterpolationIdentityAtQuadraturePoints) {
  for (Shape s : kShapes)
    for (int p = 1; p <= 4; ++p) {
      const ReferenceElement ref(s, p);
      const Eigen::MatrixXd& Ainv = ref.interpolation_matrix_inverse();
      auto check = [&](const RefPoint& r, std::span<const double> phi_row) {
        const Eigen::VectorXd l = ref.lagrange(r);
        Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(phi_row.data(), phi_row.size());
        EXPECT_LT((l - Ainv * phi).cwiseAbs().maxCoeff(), 1e-12);
        // l reproduces phi through the interpolation matrix.
        EXPECT_LT((ref.interpolation_matrix() * l - phi).cwiseAbs().maxCoeff(), 1e-12);
      };
      for (int v = 0; v < ref.num_volume_points(); ++v) check(ref.volume_rule().points[v], ref.phi_volume_row(v));
      for (int q = 0; q < ref.num_surface_points(); ++q) check(ref.surface_point(q), ref.phi_surface_row(q));
    }
}

TEST(Basis, SingularSubsetRejected) {
  // Two coincident-value choices: on the line with p=1, picking the same point twice is singular.
  EXPECT_THROW(ReferenceElement(Shape::line, 1, std::vector<int>{0, 0}), std::invalid_argument);
  EXPECT_THROW(ReferenceElement(Shape::line, 5), std::invalid_argument);
}

TEST(Basis, OutsidePointRejected) {
  const ReferenceElement ref(Shape::triangle, 2);
  EXPECT_THROW(ref.eval_basis({0.5, 0.5}), std::out_of_range);
  EXPECT_NO_THROW(ref.eval_basis({0.0, 0.0}));
}
