#include <gtest/gtest.h>

#include <ebdg/lp.hpp>

using namespace ebdg;

TEST(Lp, TextbookProblem) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
  const auto r = solve_lp_max({3.0, 5.0}, {1.0, 0.0, 0.0, 2.0, 3.0, 2.0}, {4.0, 12.0, 18.0});
  ASSERT_EQ(r.status, LpResult::Status::optimal);
  EXPECT_NEAR(r.objective, 36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(Lp, DegenerateRows) {
  // Rows with b = 0 force x = y, then x + y <= 2.
  const auto r = solve_lp_max({1.0, 1.0}, {1.0, -1.0, -1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 2.0});
  ASSERT_EQ(r.status, LpResult::Status::optimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
}

TEST(Lp, UnboundedAndBadInput) {
  EXPECT_EQ(solve_lp_max({1.0, 0.0}, {0.0, 1.0}, {1.0}).status, LpResult::Status::unbounded);
  EXPECT_THROW(solve_lp_max({1.0}, {1.0}, {-1.0}), std::invalid_argument);
  EXPECT_THROW(solve_lp_max({1.0, 1.0}, {1.0}, {1.0}), std::invalid_argument);
}
