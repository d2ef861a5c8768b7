#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ebdg {

template <int Dim>
using Vec = std::array<double, Dim>;

template <int Dim>
constexpr double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
  double s = 0.0;
  for (int d = 0; d < Dim; ++d) s += a[d] * b[d];
  return s;
}

template <int Dim>
inline double norm(const Vec<Dim>& a) {
  return std::sqrt(dot<Dim>(a, a));
}

/// "Positive" for density and pressure means strictly above this value.
inline constexpr double kAdmissibilityTolerance = 1e-13;

struct GasModel {
  double gamma = 1.4;
  double s_ref = 0.0;  // reference entropy added to ln p - gamma ln rho
};

/// Raised when a state that must be physical (rho > 0, p > 0) is not.
/// Carries the element/point context when the caller knows it.
class AdmissibilityError : public std::runtime_error {
 public:
  AdmissibilityError(const std::string& what, int element = -1, int point = -1)
      : std::runtime_error(format(what, element, point)), element_(element), point_(point) {}

  int element() const { return element_; }
  int point() const { return point_; }

 private:
  static std::string format(const std::string& what, int element, int point) {
    std::ostringstream os;
    os << what;
    if (element >= 0) os << " (element " << element;
    if (point >= 0) os << (element >= 0 ? ", " : " (") << "point " << point;
    if (element >= 0 || point >= 0) os << ")";
    return os.str();
  }
  int element_;
  int point_;
};

/// Raised on caller bugs: violated preconditions that are not data-dependent.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Density, momentum vector, total energy rho*e.
template <int Dim>
struct ConservedState {
  static constexpr int kNumVars = Dim + 2;
  std::array<double, Dim + 2> q{};

  ConservedState() = default;
  explicit ConservedState(const std::array<double, Dim + 2>& values) : q(values) {}
  ConservedState(double rho, const Vec<Dim>& momentum, double total_energy) {
    q[0] = rho;
    for (int d = 0; d < Dim; ++d) q[1 + d] = momentum[d];
    q[Dim + 1] = total_energy;
  }

  double rho() const { return q[0]; }
  double momentum(int d) const { return q[1 + d]; }
  double total_energy() const { return q[Dim + 1]; }
  Vec<Dim> momentum() const {
    Vec<Dim> m{};
    for (int d = 0; d < Dim; ++d) m[d] = q[1 + d];
    return m;
  }

  double& operator[](int i) { return q[i]; }
  double operator[](int i) const { return q[i]; }

  ConservedState& operator+=(const ConservedState& o) {
    for (int i = 0; i < kNumVars; ++i) q[i] += o.q[i];
    return *this;
  }
  ConservedState& operator-=(const ConservedState& o) {
    for (int i = 0; i < kNumVars; ++i) q[i] -= o.q[i];
    return *this;
  }
  ConservedState& operator*=(double s) {
    for (auto& v : q) v *= s;
    return *this;
  }
  friend ConservedState operator+(ConservedState a, const ConservedState& b) { return a += b; }
  friend ConservedState operator-(ConservedState a, const ConservedState& b) { return a -= b; }
  friend ConservedState operator*(double s, ConservedState a) { return a *= s; }
  friend ConservedState operator*(ConservedState a, double s) { return a *= s; }
  friend bool operator==(const ConservedState&, const ConservedState&) = default;
};

template <int Dim>
struct PrimitiveState {
  double rho = 1.0;
  Vec<Dim> velocity{};
  double pressure = 1.0;
};

template <int Dim>
inline double kinetic_energy_density(const ConservedState<Dim>& U) {
  double m2 = 0.0;
  for (int d = 0; d < Dim; ++d) m2 += U.momentum(d) * U.momentum(d);
  return 0.5 * m2 / U.rho();
}

/// Ideal-gas pressure. No admissibility check; callers that limit use the raw value.
template <int Dim>
inline double pressure(const ConservedState<Dim>& U, const GasModel& gas) {
  return (gas.gamma - 1.0) * (U.total_energy() - kinetic_energy_density(U));
}

template <int Dim>
inline bool is_admissible(const ConservedState<Dim>& U, const GasModel& gas) {
  if (!(U.rho() > kAdmissibilityTolerance)) return false;
  return pressure(U, gas) > kAdmissibilityTolerance;
}

template <int Dim>
inline void require_admissible(const ConservedState<Dim>& U, const GasModel& gas, int element = -1,
                               int point = -1) {
  if (!(U.rho() > kAdmissibilityTolerance)) {
    throw AdmissibilityError("non-positive density rho=" + std::to_string(U.rho()), element, point);
  }
  const double p = pressure(U, gas);
  if (!(p > kAdmissibilityTolerance)) {
    throw AdmissibilityError("non-positive pressure p=" + std::to_string(p), element, point);
  }
}

template <int Dim>
inline PrimitiveState<Dim> primitive_from_conservative(const ConservedState<Dim>& U,
                                                       const GasModel& gas, int element = -1,
                                                       int point = -1) {
  if (!(U.rho() > kAdmissibilityTolerance)) {
    throw AdmissibilityError("non-positive density rho=" + std::to_string(U.rho()), element, point);
  }
  PrimitiveState<Dim> W;
  W.rho = U.rho();
  for (int d = 0; d < Dim; ++d) W.velocity[d] = U.momentum(d) / U.rho();
  W.pressure = pressure(U, gas);
  return W;
}

template <int Dim>
inline ConservedState<Dim> conservative_from_primitive(const PrimitiveState<Dim>& W,
                                                       const GasModel& gas) {
  ConservedState<Dim> U;
  U.q[0] = W.rho;
  double u2 = 0.0;
  for (int d = 0; d < Dim; ++d) {
    U.q[1 + d] = W.rho * W.velocity[d];
    u2 += W.velocity[d] * W.velocity[d];
  }
  U.q[Dim + 1] = W.pressure / (gas.gamma - 1.0) + 0.5 * W.rho * u2;
  return U;
}

template <int Dim>
inline ConservedState<Dim> conservative_from_primitive(double rho, const std::type_identity_t<Vec<Dim>>& u, double p,
                                                       const GasModel& gas) {
  return conservative_from_primitive<Dim>(PrimitiveState<Dim>{rho, u, p}, gas);
}

/// Physical flux, one column per Cartesian direction.
template <int Dim>
inline std::array<ConservedState<Dim>, Dim> flux(const ConservedState<Dim>& U, const GasModel& gas) {
  const double p = pressure(U, gas);
  const double rho = U.rho();
  std::array<ConservedState<Dim>, Dim> F{};
  for (int d = 0; d < Dim; ++d) {
    const double ud = U.momentum(d) / rho;
    F[d].q[0] = U.momentum(d);
    for (int k = 0; k < Dim; ++k) F[d].q[1 + k] = U.momentum(k) * ud;
    F[d].q[1 + d] += p;
    F[d].q[Dim + 1] = ud * (U.total_energy() + p);
  }
  return F;
}

template <int Dim>
inline ConservedState<Dim> normal_flux(const ConservedState<Dim>& U, const std::type_identity_t<Vec<Dim>>& n,
                                       const GasModel& gas) {
  const double p = pressure(U, gas);
  const double rho = U.rho();
  double un = 0.0;
  for (int d = 0; d < Dim; ++d) un += U.momentum(d) * n[d];
  un /= rho;
  ConservedState<Dim> F;
  F.q[0] = rho * un;
  for (int k = 0; k < Dim; ++k) F.q[1 + k] = U.momentum(k) * un + p * n[k];
  F.q[Dim + 1] = un * (U.total_energy() + p);
  return F;
}

template <int Dim>
inline double sound_speed(const ConservedState<Dim>& U, const GasModel& gas) {
  require_admissible(U, gas);
  return std::sqrt(gas.gamma * pressure(U, gas) / U.rho());
}

/// Local maximum characteristic speed |u| + c.
template <int Dim>
inline double max_wave_speed(const ConservedState<Dim>& U, const GasModel& gas) {
  require_admissible(U, gas);
  double m2 = 0.0;
  for (int d = 0; d < Dim; ++d) m2 += U.momentum(d) * U.momentum(d);
  return std::sqrt(m2) / U.rho() + std::sqrt(gas.gamma * pressure(U, gas) / U.rho());
}

/// s = ln p - gamma ln rho + s_ref.
template <int Dim>
inline double entropy(const ConservedState<Dim>& U, const GasModel& gas) {
  require_admissible(U, gas);
  return std::log(pressure(U, gas)) - gas.gamma * std::log(U.rho()) + gas.s_ref;
}

/// Entropy for states already known to be admissible; skips the check.
template <int Dim>
inline double entropy_unchecked(const ConservedState<Dim>& U, const GasModel& gas) {
  return std::log(pressure(U, gas)) - gas.gamma * std::log(U.rho()) + gas.s_ref;
}

template <int Dim>
struct EntropyPair {
  double variable;  // -rho s
  Vec<Dim> flux;    // -rho s u
};

template <int Dim>
inline EntropyPair<Dim> entropy_pair(const ConservedState<Dim>& U, const GasModel& gas) {
  const double s = entropy(U, gas);
  EntropyPair<Dim> out;
  out.variable = -U.rho() * s;
  for (int d = 0; d < Dim; ++d) out.flux[d] = -s * U.momentum(d);
  return out;
}

/// Local Lax-Friedrichs flux along the unit normal n with dissipation speed lambda.
/// lambda must cover both states' characteristic speeds.
template <int Dim>
inline ConservedState<Dim> lax_friedrichs_flux(const ConservedState<Dim>& UL,
                                               const ConservedState<Dim>& UR, const std::type_identity_t<Vec<Dim>>& n,
                                               double lambda, const GasModel& gas) {
  if (std::abs(norm<Dim>(n) - 1.0) > 1e-12) {
    throw ContractError("lax_friedrichs_flux: normal is not a unit vector");
  }
  const double nu = std::max(max_wave_speed(UL, gas), max_wave_speed(UR, gas));
  if (lambda < nu * (1.0 - 1e-12)) {
    throw ContractError("lax_friedrichs_flux: lambda=" + std::to_string(lambda) +
                        " below local wave speed " + std::to_string(nu));
  }
  const auto FL = normal_flux(UL, n, gas);
  const auto FR = normal_flux(UR, n, gas);
  ConservedState<Dim> out;
  for (int i = 0; i < Dim + 2; ++i) {
    out.q[i] = 0.5 * (FL.q[i] + FR.q[i]) - 0.5 * lambda * (UR.q[i] - UL.q[i]);
  }
  return out;
}

/// sqrt(2 + gamma (gamma - 1)): bound on the speed of a convex combination of states
/// relative to the largest speed of its members.
inline double combination_speed_factor(double gamma) { return std::sqrt(2.0 + gamma * (gamma - 1.0)); }

/// Inflation of the time-step dissipation speed: max{sqrt(N_d), sqrt(2 + gamma(gamma-1))}
/// in multiple dimensions, 1 in one dimension.
inline double time_step_speed_factor(int dim, double gamma) {
  if (dim == 1) return 1.0;
  return std::max(std::sqrt(static_cast<double>(dim)), combination_speed_factor(gamma));
}

/// Upper bound for the characteristic speed of sum_k w_k U_k (w convex).
template <int Dim>
inline double combined_speed_bound(std::span<const ConservedState<Dim>> states,
                                   std::span<const double> weights, const GasModel& gas) {
  if (states.size() != weights.size() || states.empty()) {
    throw ContractError("combined_speed_bound: states/weights size mismatch");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ContractError("combined_speed_bound: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ContractError("combined_speed_bound: weights must sum to 1");
  double nu = 0.0;
  for (const auto& U : states) nu = std::max(nu, max_wave_speed(U, gas));
  return combination_speed_factor(gas.gamma) * nu;
}

}  // namespace ebdg
