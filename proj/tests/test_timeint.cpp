#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <ebdg/timeint.hpp>

using namespace ebdg;

namespace {

// y' = -y + sin t, y(0) = 1; exact y = 1.5 e^{-t} + (sin t - cos t) / 2.
double exact(double t) { return 1.5 * std::exp(-t) + 0.5 * (std::sin(t) - std::cos(t)); }

double integrate(Scheme s, int n) {
  const double dt = 1.0 / n;
  double y = 1.0;
  for (int i = 0; i < n; ++i)
    advance(y, i * dt, dt, s, [](const double& u, double t, double& out) { out = -u + std::sin(t); });
  return std::abs(y - exact(1.0));
}

double observed_order(Scheme s) {
  return std::log2(integrate(s, 40) / integrate(s, 80));
}

}  // namespace

TEST(TimeIntegration, SchemeNames) {
  for (Scheme s : {Scheme::forward_euler, Scheme::ssprk33, Scheme::rk4_classic})
    EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_EQ(scheme_from_string("rk4"), Scheme::rk4_classic);
  EXPECT_EQ(num_stages(Scheme::ssprk33), 3);
  EXPECT_THROW(scheme_from_string("rk45"), std::invalid_argument);
}

TEST(TimeIntegration, OrdersOfAccuracy) {
  EXPECT_NEAR(observed_order(Scheme::forward_euler), 1.0, 0.05);
  EXPECT_NEAR(observed_order(Scheme::ssprk33), 3.0, 0.1);
  EXPECT_NEAR(observed_order(Scheme::rk4_classic), 4.0, 0.1);
}

TEST(TimeIntegration, ForwardEulerDefinition) {
  double y = 2.0;
  advance(y, 0.3, 0.1, Scheme::forward_euler, [](const double& u, double t, double& out) { out = u * u + t; });
  EXPECT_DOUBLE_EQ(y, 2.0 + 0.1 * (4.0 + 0.3));
}

TEST(TimeIntegration, SspStagesAreConvexEulerSteps) {
  // Explicit Shu-Osher recomputation for a nonlinear right-hand side.
  auto f = [](double u, double t) { return std::cos(u) + t; };
  const double u0 = 0.7, t = 0.2, dt = 0.05;
  const double u1 = u0 + dt * f(u0, t);
  const double u2 = 0.75 * u0 + 0.25 * (u1 + dt * f(u1, t + dt));
  const double u3 = u0 / 3.0 + 2.0 / 3.0 * (u2 + dt * f(u2, t + 0.5 * dt));
  double y = u0;
  advance(y, t, dt, Scheme::ssprk33, [&](const double& u, double tt, double& out) { out = f(u, tt); });
  EXPECT_NEAR(y, u3, 1e-15);
}

TEST(TimeIntegration, ZeroRightHandSideKeepsState) {
  for (Scheme s : {Scheme::forward_euler, Scheme::ssprk33, Scheme::rk4_classic}) {
    double y = 3.25;
    advance(y, 0.0, 0.5, s, [](const double&, double, double& out) { out = 0.0; });
    EXPECT_EQ(y, 3.25);
  }
}

TEST(TimeIntegration, LimiterSeesEveryStage) {
  for (Scheme s : {Scheme::forward_euler, Scheme::ssprk33, Scheme::rk4_classic}) {
    std::vector<int> stages;
    double y = 1.0;
    advance(y, 0.0, 0.1, s, [](const double& u, double, double& out) { out = -u; },
            [&](double&, int stage) { stages.push_back(stage); });
    ASSERT_EQ(static_cast<int>(stages.size()), num_stages(s));
    for (int i = 0; i < num_stages(s); ++i) EXPECT_EQ(stages[i], i + 1);
  }
}

TEST(TimeIntegration, FailuresReportTheStage) {
  int calls = 0;
  double y = 1.0;
  try {
    advance(y, 0.0, 0.1, Scheme::rk4_classic, [&](const double& u, double, double& out) {
      if (++calls == 3) throw std::runtime_error("bad state");
      out = -u;
    });
    FAIL() << "no exception";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), 3);
    EXPECT_NE(std::string(e.what()).find("bad state"), std::string::npos);
  }
}
