#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <ebdg/cases.hpp>

using namespace ebdg;

TEST(Cases, NormalShockSatisfiesJumpConditions) {
  const GasModel gas;
  for (double ma : {1.5, 2.0, 5.0, 100.0}) {
    const auto s = normal_shock(ma, 1.4, 1.0, gas);
    // Shock frame: the front is at rest, gas enters from the right.
    const double r1 = s.pre.rho, u1 = s.pre.velocity[0] - s.speed, p1 = s.pre.pressure;
    const double r2 = s.post.rho, u2 = s.post.velocity[0] - s.speed, p2 = s.post.pressure;
    const double h1 = gas.gamma / (gas.gamma - 1) * p1 / r1 + 0.5 * u1 * u1;
    const double h2 = gas.gamma / (gas.gamma - 1) * p2 / r2 + 0.5 * u2 * u2;
    EXPECT_NEAR(r1 * u1, r2 * u2, 1e-12 * std::abs(r1 * u1));
    EXPECT_NEAR(r1 * u1 * u1 + p1, r2 * u2 * u2 + p2, 1e-12 * (r1 * u1 * u1 + p1));
    EXPECT_NEAR(h1, h2, 1e-12 * h1);
    EXPECT_NEAR(s.speed, ma, 1e-14);  // c1 = 1 for rho 1.4, p 1
    EXPECT_GT(entropy(conservative_from_primitive<1>(s.post, gas), gas),
              entropy(conservative_from_primitive<1>(s.pre, gas), gas));
  }
  const auto weak = normal_shock(1.0);
  EXPECT_NEAR(weak.post.rho, weak.pre.rho, 1e-14);
  EXPECT_NEAR(weak.post.velocity[0], 0.0, 1e-14);
  EXPECT_THROW(normal_shock(0.9), std::invalid_argument);
}

TEST(Cases, AdvectionInitialMeansAreCellAverages) {
  CaseParams prm;
  prm.h = 0.05;
  const auto c = advect1d_case(prm);
  const double tp = 2 * std::numbers::pi;
  for (int e = 0; e < 20; ++e) {
    const double a = 0.05 * e, b = a + 0.05;
    const double exact = 1.0 + 0.1 * (std::cos(tp * a) - std::cos(tp * b)) / (tp * 0.05);
    EXPECT_NEAR(c.disc->element_average(c.initial, e).rho(), exact, 1e-10);
  }
  EXPECT_THROW(advect1d_case([] { CaseParams p; p.h = 0.3; return p; }()), std::invalid_argument);
}

TEST(Cases, ProjectionErrorConverges) {
  for (int p = 1; p <= 3; ++p) {
    double prev = 0.0;
    for (double h : {0.1, 0.05}) {
      CaseParams prm;
      prm.h = h;
      prm.p = p;
      const auto c = advect1d_case(prm);
      const double err = l2_errors(*c.disc, c.initial, c.exact, 0.0).q[0];
      if (prev > 0.0) EXPECT_NEAR(std::log2(prev / err), p + 1.0, 0.15) << p;
      prev = err;
    }
  }
}

TEST(Cases, ConvergenceTableArithmetic) {
  const auto rows = convergence_table({0.1, 0.05, 0.025}, {1e-3, 1.25e-4, 1.5625e-5});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(std::isnan(rows[0].rate));
  EXPECT_NEAR(rows[1].rate, 3.0, 1e-12);
  EXPECT_NEAR(rows[2].rate, 3.0, 1e-12);
  EXPECT_THROW(convergence_table({0.1}, {}), std::invalid_argument);
}

TEST(Cases, ShockSetup) {
  CaseParams prm;
  prm.mach = 5.0;
  const auto c = shock1d_case(prm);
  EXPECT_EQ(c.disc->num_elements(), 120);
  EXPECT_NEAR(shock_front_position(*c.disc, c.initial), 0.0, 1e-12);
  EXPECT_NEAR(c.options.t_end, 0.2, 1e-14);
  EXPECT_EQ(c.options.strategy, BoundStrategy::global);
  EXPECT_NEAR(c.options.global_bound, -1.4 * std::log(1.4), 1e-14);
}

TEST(Cases, DoubleMachSetup) {
  CaseParams prm;
  prm.p = 1;
  const auto c = dmr_case(prm);
  EXPECT_EQ(c.disc->num_elements(), 120 * 30);
  EXPECT_NEAR(c.disc->element_average(c.initial, 0).rho(), 8.0, 1e-12);
  EXPECT_NEAR(c.disc->element_average(c.initial, 119).rho(), 1.4, 1e-12);
  EXPECT_DOUBLE_EQ(c.options.t_end, 0.25);
}

TEST(Cases, CylinderFreeStream) {
  const GasModel gas;
  const auto U = cylinder_free_stream(gas);
  const auto W = primitive_from_conservative(U, gas);
  EXPECT_NEAR(W.velocity[0] / std::sqrt(gas.gamma * W.pressure / W.rho), 0.38, 1e-14);
  CaseParams prm;
  prm.p = 1;
  const auto c = cylinder_case(prm);
  double area = 0.0;
  for (int e = 0; e < c.disc->num_elements(); ++e) area += c.disc->geometry(e).volume;
  EXPECT_NEAR(area, std::numbers::pi * (400.0 - 1.0), 1e-3 * area);
  prm.level = 0;
  EXPECT_THROW(cylinder_case(prm), std::invalid_argument);
}

TEST(Cases, FreeStreamStaysPut) {
  CaseParams prm;
  prm.p = 2;
  auto c = freestream_case(prm, 5);
  const auto st = run(*c.disc, c.initial, c.options);
  ASSERT_FALSE(st.failed) << st.failure;
  const auto U = c.exact({0.0, 0.0}, 0.0);
  for (int e = 0; e < c.disc->num_elements(); ++e) {
    const auto m = c.disc->element_average(st.solution, e);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(m.q[k], U.q[k], 1e-13);
  }
}
