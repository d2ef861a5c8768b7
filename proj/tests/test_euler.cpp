#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <ebdg/euler.hpp>

using namespace ebdg;

namespace {

const GasModel kGas{};

template <int Dim>
ConservedState<Dim> random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lr(-3.0, 3.0), uv(-5.0, 5.0);
  Vec<Dim> u{};
  for (auto& x : u) x = uv(rng);
  return conservative_from_primitive<Dim>(std::exp(lr(rng)), u, std::exp(lr(rng)), kGas);
}

template <int Dim>
Vec<Dim> random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec<Dim> n{};
  double r = 0.0;
  do {
    r = 0.0;
    for (auto& x : n) x = g(rng), r += x * x;
  } while (r < 1e-6);
  for (auto& x : n) x /= std::sqrt(r);
  return n;
}

}  // namespace

TEST(Euler, PressureClosedForms) {
  EXPECT_DOUBLE_EQ(pressure(ConservedState<1>(1.0, {0.0}, 2.5), kGas), 1.0);
  EXPECT_NEAR(pressure(ConservedState<1>(1.0, {1.0}, 1.0), kGas), 0.2, 1e-15);
  const auto W = primitive_from_conservative(ConservedState<2>(1.4, {0.0, 0.0}, 2.5), kGas);
  EXPECT_DOUBLE_EQ(W.rho, 1.4);
  EXPECT_DOUBLE_EQ(W.velocity[0], 0.0);
  EXPECT_DOUBLE_EQ(W.velocity[1], 0.0);
  EXPECT_NEAR(W.pressure, 1.0, 1e-15);
}

TEST(Euler, NonPositiveDensityIsAnAdmissibilityError) {
  EXPECT_THROW(primitive_from_conservative(ConservedState<1>(0.0, {0.0}, 1.0), kGas), AdmissibilityError);
  EXPECT_THROW(entropy(ConservedState<1>(1.0, {2.0}, 1.0), kGas), AdmissibilityError);
}

TEST(Euler, PrimitiveRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto U = random_state<2>(rng);
    const auto W = primitive_from_conservative(U, kGas);
    EXPECT_GT(W.pressure, 0.0);
    const auto V = conservative_from_primitive(W, kGas);
    for (int k = 0; k < 4; ++k) EXPECT_LE(std::abs(V.q[k] - U.q[k]), 1e-14 * std::max(1.0, std::abs(U.q[k])));
  }
}

TEST(Euler, FluxClosedForms) {
  const auto F0 = flux(ConservedState<1>(1.0, {0.0}, 2.5), kGas)[0];
  EXPECT_NEAR(F0.q[0], 0.0, 1e-15);
  EXPECT_NEAR(F0.q[1], 1.0, 1e-15);
  EXPECT_NEAR(F0.q[2], 0.0, 1e-15);
  const auto F1 = flux(ConservedState<1>(1.0, {1.0}, 1.0), kGas)[0];
  EXPECT_NEAR(F1.q[0], 1.0, 1e-15);
  EXPECT_NEAR(F1.q[1], 1.2, 1e-15);
  EXPECT_NEAR(F1.q[2], 1.2, 1e-15);
}

TEST(Euler, TwoDimensionalFluxEmbedsOneDimensional) {
  const auto U1 = conservative_from_primitive<1>(1.3, {1.0}, 0.7, kGas);
  const auto U2 = conservative_from_primitive<2>(1.3, {1.0, 0.0}, 0.7, kGas);
  const auto f1 = flux(U1, kGas)[0];
  const auto f2 = flux(U2, kGas);
  EXPECT_NEAR(f2[0].q[0], f1.q[0], 1e-15);
  EXPECT_NEAR(f2[0].q[1], f1.q[1], 1e-15);
  EXPECT_NEAR(f2[0].q[2], 0.0, 1e-15);
  EXPECT_NEAR(f2[0].q[3], f1.q[2], 1e-15);
  EXPECT_NEAR(f2[1].q[0], 0.0, 1e-15);
  EXPECT_NEAR(f2[1].q[3], 0.0, 1e-15);
}

TEST(Euler, WaveSpeeds) {
  EXPECT_NEAR(max_wave_speed(conservative_from_primitive<1>(1.4, {0.0}, 1.0, kGas), kGas), 1.0, 1e-15);
  EXPECT_NEAR(max_wave_speed(conservative_from_primitive<2>(1.0, {3.0, 4.0}, 1.0, kGas), kGas), 5.0 + std::sqrt(1.4),
              1e-14);
  EXPECT_NEAR(max_wave_speed(conservative_from_primitive<1>(1.0, {0.0}, 1.0, kGas), kGas), std::sqrt(1.4), 1e-15);
}

TEST(Euler, EntropyValues) {
  EXPECT_DOUBLE_EQ(entropy(conservative_from_primitive<1>(1.0, {0.0}, 1.0, kGas), kGas), 0.0);
  EXPECT_NEAR(entropy(conservative_from_primitive<1>(1.4, {0.0}, 1.0, kGas), kGas), -1.4 * std::log(1.4), 1e-15);
  EXPECT_NEAR(-1.4 * std::log(1.4), -0.471061, 1e-6);
  // s_ref placing the pre-shock state of the moving-shock case at 0.620.
  const double s_ref = 0.620 + 1.4 * std::log(1.4);
  EXPECT_NEAR(s_ref, 1.091061, 1e-6);
  const GasModel shifted{1.4, s_ref};
  EXPECT_NEAR(entropy(conservative_from_primitive<1>(1.4, {0.0}, 1.0, shifted), shifted), 0.620, 1e-14);
}

TEST(Euler, EntropyIgnoresVelocity) {
  const auto a = conservative_from_primitive<2>(0.8, {0.0, 0.0}, 2.0, kGas);
  const auto b = conservative_from_primitive<2>(0.8, {-3.0, 7.0}, 2.0, kGas);
  EXPECT_NEAR(entropy(a, kGas), entropy(b, kGas), 1e-14);
}

TEST(Euler, EntropyPair) {
  const auto P0 = entropy_pair(conservative_from_primitive<1>(1.0, {0.0}, 1.0, kGas), kGas);
  EXPECT_DOUBLE_EQ(P0.variable, 0.0);
  EXPECT_DOUBLE_EQ(P0.flux[0], 0.0);
  const GasModel g1{1.4, 1.0};
  const auto P1 = entropy_pair(conservative_from_primitive<1>(1.0, {1.0}, 1.0, g1), g1);
  EXPECT_NEAR(P1.variable, -1.0, 1e-15);
  EXPECT_NEAR(P1.flux[0], -1.0, 1e-15);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto U = random_state<2>(rng);
    EXPECT_NEAR(entropy_pair(U, kGas).variable, -U.rho() * entropy(U, kGas), 1e-12 * (1.0 + U.rho()));
  }
}

TEST(Euler, LaxFriedrichsConsistencyAndConservation) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto U = random_state<2>(rng);
    const auto V = random_state<2>(rng);
    const auto n = random_unit<2>(rng);
    const double lam = std::max(max_wave_speed(U, kGas), max_wave_speed(V, kGas));
    const auto F = normal_flux(U, n, kGas);
    const auto G = lax_friedrichs_flux<2>(U, U, n, max_wave_speed(U, kGas), kGas);
    double fn = 0.0;
    for (double x : F.q) fn = std::max(fn, std::abs(x));
    for (int k = 0; k < 4; ++k) EXPECT_LE(std::abs(G.q[k] - F.q[k]), 1e-14 * fn);
    const auto A = lax_friedrichs_flux<2>(U, V, n, lam, kGas);
    const auto B = lax_friedrichs_flux<2>(V, U, {-n[0], -n[1]}, lam, kGas);
    for (int k = 0; k < 4; ++k) EXPECT_LE(std::abs(A.q[k] + B.q[k]), 1e-14 * (std::abs(A.q[k]) + 1.0));
  }
}

TEST(Euler, LaxFriedrichsSodPairAgainstExtendedPrecision) {
  const ConservedState<1> L(1.0, {0.0}, 2.5), R(0.125, {0.0}, 0.25);
  const double lam = std::max(max_wave_speed(L, kGas), max_wave_speed(R, kGas));
  const auto F = lax_friedrichs_flux<1>(L, R, {1.0}, lam, kGas);
  // Independent long-double evaluation: both states are at rest, so only pressure enters.
  const long double pl = 0.4L * 2.5L, pr = 0.4L * 0.25L;
  const long double cl = std::sqrt(1.4L * pl / 1.0L), cr = std::sqrt(1.4L * pr / 0.125L);
  const long double l = std::max(cl, cr);
  const long double ref[3] = {-0.5L * l * (0.125L - 1.0L), 0.5L * (pl + pr), -0.5L * l * (0.25L - 2.5L)};
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(F.q[k], static_cast<double>(ref[k]), 1e-15);
}

TEST(Euler, LaxFriedrichsContract) {
  const ConservedState<1> U(1.0, {0.0}, 2.5);
  EXPECT_THROW(lax_friedrichs_flux<1>(U, U, {1.0}, 0.5, kGas), ContractError);
  EXPECT_THROW(lax_friedrichs_flux<2>(ConservedState<2>(1.0, {0.0, 0.0}, 2.5), ConservedState<2>(1.0, {0.0, 0.0}, 2.5),
                                      {1.0, 1.0}, 10.0, kGas),
               ContractError);
}

TEST(Euler, CombinedSpeedBound) {
  const auto U = conservative_from_primitive<2>(1.0, {0.3, 0.1}, 1.0, kGas);
  const std::array<ConservedState<2>, 1> one{U};
  const std::array<double, 1> w1{1.0};
  EXPECT_NEAR(combined_speed_bound<2>(one, w1, kGas), 1.6 * max_wave_speed(U, kGas), 1e-14);
  const std::array<ConservedState<2>, 2> two{U, U};
  const std::array<double, 2> w2{0.5, 0.5};
  EXPECT_NEAR(combined_speed_bound<2>(two, w2, kGas), 1.6 * max_wave_speed(U, kGas), 1e-14);
  const std::array<double, 2> bad{0.7, 0.7};
  EXPECT_THROW(combined_speed_bound<2>(two, bad, kGas), ContractError);
  EXPECT_DOUBLE_EQ(time_step_speed_factor(2, 1.4), 1.6);
  EXPECT_DOUBLE_EQ(time_step_speed_factor(1, 1.4), 1.0);
}

TEST(Euler, CombinedSpeedBoundHoldsForRandomCombinations) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uw(1e-6, 1.0);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::array<ConservedState<2>, 2> s{random_state<2>(rng), random_state<2>(rng)};
    const double a = uw(rng);
    const std::array<double, 2> w{a, 1.0 - a};
    if (!(w[1] > 0.0)) continue;
    const auto C = w[0] * s[0] + w[1] * s[1];
    violations += max_wave_speed(C, kGas) > combined_speed_bound<2>(s, w, kGas);
  }
  EXPECT_EQ(violations, 0);
}
