#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dg.hpp"
#include "euler.hpp"

namespace ebdg {

inline constexpr double kDensityFloor = 1e-13;
inline constexpr double kPressureFloor = 1e-13;
inline constexpr double kNoEntropyBound = -std::numeric_limits<double>::infinity();
/// Relative entropy slack below which a mean counts as lying on its bound.
inline constexpr double kBoundRoundoff = 1e-12;
/// Smallest retained fraction 1 - eps taken from the secant scaling before falling back to bisection.
inline constexpr double kSecantResolution = 1e-8;

/// Raised when an element mean violates the limiter's preconditions.
class LimiterError : public AdmissibilityError {
 public:
  using AdmissibilityError::AdmissibilityError;
};

// ---------------------------------------------------------------------------
// Entropy-bound estimation

/// Extrapolated lower bound from the element's own points and the exterior traces:
/// min{ min_{D-} s, s_m - (min_{x != x_m} |x_m - x| / |x_m - x_n|) (s_n - s_m) }.
/// Ties for the minimum/maximum go to the lowest point index.
template <int Dim>
double estimate_entropy_bound_local(std::span<const double> s_points, std::span<const Vec<Dim>> x_points,
                                    std::span<const double> s_exterior) {
  if (s_points.size() != x_points.size() || s_points.size() < 2) {
    throw ContractError("estimate_entropy_bound_local: need at least two points with coordinates");
  }
  std::size_t im = 0, in = 0;
  for (std::size_t i = 1; i < s_points.size(); ++i) {
    if (s_points[i] < s_points[im]) im = i;
    if (s_points[i] > s_points[in]) in = i;
  }
  const double sm = s_points[im], sn = s_points[in];
  double extrapolated = sm;
  if (sn > sm) {
    auto dist = [&](std::size_t a, std::size_t b) {
      double d2 = 0.0;
      for (int d = 0; d < Dim; ++d) d2 += (x_points[a][d] - x_points[b][d]) * (x_points[a][d] - x_points[b][d]);
      return std::sqrt(d2);
    };
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s_points.size(); ++i)
      if (i != im) dmin = std::min(dmin, dist(im, i));
    const double dmn = dist(im, in);
    if (dmn > 0.0) extrapolated = sm - (dmin / dmn) * (sn - sm);
  }
  double ext = std::numeric_limits<double>::infinity();
  for (double s : s_exterior) ext = std::min(ext, s);
  return std::min(ext, extrapolated);
}

/// Update with the previous bounds of the element and its neighbors:
/// max{ local estimate, min_{k in N_e + e} s_k(t - dt) }.
inline double update_entropy_bound(double local_estimate, std::span<const double> previous_bounds) {
  double m = std::numeric_limits<double>::infinity();
  for (double s : previous_bounds) m = std::min(m, s);
  if (previous_bounds.empty()) return local_estimate;
  return std::max(local_estimate, m);
}

enum class BoundStrategy { local, global };

struct EntropyBoundState {
  BoundStrategy strategy = BoundStrategy::local;
  double global_value = kNoEntropyBound;
  /// Lower limit applied to every local estimate (the minimum-entropy-principle floor).
  double floor = kNoEntropyBound;
  std::vector<double> current;
  std::vector<double> previous;
  bool initialized = false;
};

/// Per-element bounds s_e^0(t) from evaluated traces. The first call uses the local
/// estimate alone; later calls also take the previous bounds of the neighborhood.
template <int Dim>
void estimate_entropy_bounds(const Discretization<Dim>& disc, const Traces<Dim>& tr, EntropyBoundState& st) {
  const int ne = disc.num_elements();
  if (st.strategy == BoundStrategy::global) {
    st.previous = st.current;
    st.current.assign(ne, st.global_value);
    st.initialized = true;
    return;
  }
  const GasModel& gas = disc.gas();
  std::vector<double> next(ne);
  const auto& mesh = disc.mesh();
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto& ref = disc.ref(e);
    const auto& g = disc.geometry(e);
    const int nv = ref.num_volume_points(), ns = ref.num_surface_points();
    thread_local std::vector<double> s_pts, s_ext;
    thread_local std::vector<Vec<Dim>> x_pts;
    s_pts.clear();
    s_ext.clear();
    x_pts.clear();
    for (int v = 0; v < nv; ++v) {
      s_pts.push_back(entropy(tr.volume[disc.volume_offset(e) + v], gas));
      x_pts.push_back(g.x_volume[v]);
    }
    for (int s = 0; s < ns; ++s) {
      const int flat = disc.surface_offset(e) + s;
      s_pts.push_back(entropy(tr.surface[flat], gas));
      x_pts.push_back(g.x_surface[s]);
      if (tr.exterior_bounds_entropy[flat]) s_ext.push_back(entropy(tr.exterior[flat], gas));
    }
    double b = estimate_entropy_bound_local<Dim>(s_pts, x_pts, s_ext);
    if (st.initialized) {
      double prev = st.current[e];
      for (int k : mesh.neighbors[e]) prev = std::min(prev, st.current[k]);
      b = std::max(b, prev);
    }
    next[e] = std::max(b, st.floor);
  }
  st.previous = st.initialized ? st.current : next;
  st.current = std::move(next);
  st.initialized = true;
}

// ---------------------------------------------------------------------------
// Limiting operators on one element. Point values cover the element's set D (volume and
// surface quadrature points) and are updated in place alongside the coefficients.

/// Scales the density toward its mean so it is >= floor at every point.
/// Returns theta_rho in [0, 1].
template <int Dim>
double enforce_density_positivity(std::span<ConservedState<Dim>> coeffs, std::span<ConservedState<Dim>> points,
                                  double rho_mean, double constant_coefficient, double rho_floor = kDensityFloor,
                                  int element = -1) {
  if (!(rho_mean > rho_floor)) {
    throw LimiterError("element mean density " + std::to_string(rho_mean) + " is not above the floor", element);
  }
  double rho_min = std::numeric_limits<double>::infinity();
  for (const auto& U : points) rho_min = std::min(rho_min, U.rho());
  if (rho_min >= rho_floor) return 1.0;
  const double theta = std::min(1.0, (rho_mean - rho_floor) / (rho_mean - rho_min));
  for (auto& c : coeffs) c.q[0] *= theta;
  coeffs[0].q[0] += (1.0 - theta) * rho_mean * constant_coefficient;
  for (auto& U : points) U.q[0] = rho_mean + theta * (U.q[0] - rho_mean);
  return theta;
}

/// Entropy constraint function p - max(exp(s0) rho^gamma, p_floor); concave in U for rho > 0.
template <int Dim>
inline double entropy_margin(const ConservedState<Dim>& U, double exp_s0, const GasModel& gas,
                             double p_floor = kPressureFloor) {
  const double rho_term = exp_s0 > 0.0 ? exp_s0 * std::pow(U.rho(), gas.gamma) : 0.0;
  return pressure(U, gas) - std::max(rho_term, p_floor);
}

/// exp(s0 - s_ref), the coefficient of rho^gamma in the constraint p >= exp(...) rho^gamma.
inline double entropy_bound_coefficient(double s0, const GasModel& gas) {
  if (s0 == kNoEntropyBound) return 0.0;
  return std::exp(s0 - gas.s_ref);
}

/// Linear scaling U <- U + eps (mean - U) restoring the entropy constraint at every point.
/// Returns eps in [0, 1).
template <int Dim>
double apply_entropy_limiter(std::span<ConservedState<Dim>> coeffs, std::span<ConservedState<Dim>> points,
                             const ConservedState<Dim>& mean, double constant_coefficient, double s0,
                             const GasModel& gas, int element = -1) {
  const double a = entropy_bound_coefficient(s0, gas);
  if (!(mean.rho() > kDensityFloor)) {
    throw LimiterError("element mean density " + std::to_string(mean.rho()) + " is not positive", element);
  }
  const double gmean = entropy_margin(mean, a, gas);
  if (!(gmean > 0.0)) {
    throw LimiterError("element mean violates the entropy bound (s(mean) = " +
                           std::to_string(is_admissible(mean, gas) ? entropy(mean, gas) : -INFINITY) +
                           ", bound " + std::to_string(s0) + ")",
                       element);
  }
  // Deficits within roundoff of the worst point's pressure scale are left alone.
  double tau = 0.0, scale = 0.0;
  for (const auto& U : points) {
    const double g = entropy_margin(U, a, gas);
    if (g < tau) tau = g, scale = pressure(U, gas) - g;
  }
  if (tau >= -kBoundRoundoff * scale) return 0.0;
  double eps = tau / (tau - gmean);
  if (gmean / (gmean - tau) < kSecantResolution) {
    // Near-vacuum points push the secant step below double resolution of 1 - eps. Each point's
    // margin is concave along the segment, so the feasible set is [eps*, 1]; use max(eps*, 1 - resolution).
    auto feasible = [&](double t) {
      for (const auto& U : points)
        if (!(entropy_margin<Dim>(U + t * (mean - U), a, gas) > 0.0)) return false;
      return true;
    };
    double lo = 1.0 - kSecantResolution, hi = 1.0;
    if (feasible(lo)) {
      hi = lo;
    } else {
      for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
      }
    }
    if (hi < 1.0) eps = hi;
  }
  for (std::size_t m = 0; m < coeffs.size(); ++m) coeffs[m] *= (1.0 - eps);
  coeffs[0] += (eps * constant_coefficient) * mean;
  for (auto& U : points) U = U + eps * (mean - U);
  return eps;
}

// ---------------------------------------------------------------------------
// Whole-solution limiting

enum class MeanViolationPolicy {
  fatal,  // throw
  relax,  // lower that element's bound to s(mean) for the stage and count it
};

struct LimiterOptions {
  bool enabled = true;
  double rho_floor = kDensityFloor;
  MeanViolationPolicy mean_violation = MeanViolationPolicy::fatal;
};

struct LimiterReport {
  std::vector<double> epsilon;
  std::vector<double> density_theta;
  int active = 0;            // elements with eps > 0
  int density_active = 0;    // elements with theta < 1
  int relaxed = 0;           // elements whose bound was lowered to the mean's entropy
  double worst_mean_deficit = 0.0;  // max over elements of s0 - s(mean), when positive

  void reset(int n) {
    epsilon.assign(n, 0.0);
    density_theta.assign(n, 1.0);
    active = density_active = relaxed = 0;
    worst_mean_deficit = 0.0;
  }
  void merge_max(const LimiterReport& o) {
    if (epsilon.size() != o.epsilon.size()) {
      *this = o;
      return;
    }
    for (std::size_t i = 0; i < epsilon.size(); ++i) {
      epsilon[i] = std::max(epsilon[i], o.epsilon[i]);
      density_theta[i] = std::min(density_theta[i], o.density_theta[i]);
    }
    active = 0;
    density_active = 0;
    for (std::size_t i = 0; i < epsilon.size(); ++i) {
      active += epsilon[i] > 0.0;
      density_active += density_theta[i] < 1.0;
    }
    relaxed += o.relaxed;
    worst_mean_deficit = std::max(worst_mean_deficit, o.worst_mean_deficit);
  }
};

/// Density positivity then entropy limiting on every element with bounds[e].
template <int Dim>
void limit_solution(const Discretization<Dim>& disc, DgSolution<Dim>& sol, std::span<const double> bounds,
                    const LimiterOptions& opt, LimiterReport& report) {
  const int ne = disc.num_elements();
  report.reset(ne);
  if (!opt.enabled) return;
  const GasModel& gas = disc.gas();
  std::exception_ptr error;
  int error_elem = -1;
  int relaxed = 0;
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : relaxed) reduction(max : worst)
  for (int e = 0; e < ne; ++e) {
    const auto& ref = disc.ref(e);
    const int nv = ref.num_volume_points(), ns = ref.num_surface_points();
    thread_local std::vector<ConservedState<Dim>> pts;
    pts.resize(nv + ns);
    auto c = disc.coeffs(sol, e);
    disc.evaluate_element_points(c, e, pts.data(), pts.data() + nv);
    const ConservedState<Dim> mean = disc.element_average(sol, e);
    const int id = static_cast<int>(disc.mesh().elements[e].id);
    try {
      report.density_theta[e] =
          enforce_density_positivity<Dim>(c, pts, mean.rho(), ref.constant_coefficient(), opt.rho_floor, id);
      double s0 = bounds[e];
      const double a = entropy_bound_coefficient(s0, gas);
      if (!(entropy_margin(mean, a, gas) > 0.0) && is_admissible(mean, gas)) {
        // A mean on the bound up to roundoff gets the bound lowered by the same margin.
        const double deficit = s0 - entropy(mean, gas);
        const double slack = kBoundRoundoff * (1.0 + std::abs(s0));
        if (deficit <= slack) {
          s0 = std::min(s0, entropy(mean, gas)) - slack;
        } else {
          worst = std::max(worst, deficit);
          if (opt.mean_violation == MeanViolationPolicy::relax) {
            s0 = std::min(s0, entropy(mean, gas)) - slack;
            ++relaxed;
          }
        }
      }
      report.epsilon[e] = apply_entropy_limiter<Dim>(c, pts, mean, ref.constant_coefficient(), s0, gas, id);
    } catch (...) {
#pragma omp critical
      {
        if (!error || e < error_elem) {
          error = std::current_exception();
          error_elem = e;
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
  report.relaxed = relaxed;
  report.worst_mean_deficit = worst;
  for (int e = 0; e < ne; ++e) {
    report.active += report.epsilon[e] > 0.0;
    report.density_active += report.density_theta[e] < 1.0;
  }
}

}  // namespace ebdg
