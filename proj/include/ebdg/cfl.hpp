#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "dg.hpp"
#include "lp.hpp"

namespace ebdg {

enum class SurfaceRepresentation {
  // Surface values written through any exact combination of volume-point values.
  full,
  // Surface values written through the Lagrange basis on the interpolation subset only.
  interpolation_subset,
};

struct ThetaDecomposition {
  std::vector<double> theta_surface;  // per flat surface point
  std::vector<double> theta_volume;   // per volume point
  /// Coefficient of volume point v in the representation of surface point s, row-major (s, v).
  std::vector<double> surface_coupling;
};

struct CflResult {
  double value = 0.0;
  ThetaDecomposition theta;
  double certificate_violation = 0.0;  // worst constraint violation of the returned point
};

/// Largest t such that the element mean splits into non-negative volume parts and surface
/// parts theta_s >= t * surface_weight[s]. volume_share[v] is the volume point's share of the
/// mean (w_v |J_v| / V_e); surface_weight is w_s on the reference element or zeta_s per element.
inline CflResult optimize_cfl_eb(const ReferenceElement& ref, std::span<const double> volume_share,
                                 std::span<const double> surface_weight,
                                 SurfaceRepresentation mode = SurfaceRepresentation::full) {
  const int np = ref.num_basis();
  const int nq = ref.num_volume_points();
  const int ns = ref.num_surface_points();
  if (static_cast<int>(volume_share.size()) != nq || static_cast<int>(surface_weight.size()) != ns) {
    throw std::invalid_argument("optimize_cfl_eb: weight vectors do not match the element's rules");
  }
  for (double w : surface_weight)
    if (!(w > 0.0)) throw std::invalid_argument("optimize_cfl_eb: surface weights must be positive");
  for (double w : volume_share)
    if (!(w > 0.0)) throw std::invalid_argument("optimize_cfl_eb: volume weights must be positive");

  // Particular representation: Lagrange values on the interpolation subset.
  Eigen::MatrixXd ell = Eigen::MatrixXd::Zero(ns, nq);
  const auto& subset = ref.interpolation_points();
  for (int s = 0; s < ns; ++s) {
    const Eigen::VectorXd l = ref.lagrange(ref.surface_point(s));
    for (int n = 0; n < np; ++n) ell(s, subset[n]) = l(n);
  }
  // Null space of the basis-by-point table: volume-point combinations that vanish on every
  // degree-p polynomial. Only the sum over surface points of the free parts enters the
  // volume constraints, so a single free vector Z suffices.
  Eigen::MatrixXd null_space(nq, 0);
  if (mode == SurfaceRepresentation::full && nq > np) {
    Eigen::MatrixXd Phi(np, nq);
    for (int v = 0; v < nq; ++v)
      for (int m = 0; m < np; ++m) Phi(m, v) = ref.phi_volume(v, m);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Phi);
    null_space = lu.kernel();
    if (lu.rank() != np) throw std::runtime_error("optimize_cfl_eb: volume points do not determine degree-p polynomials");
  }
  const int nz = static_cast<int>(null_space.cols());

  // Variables: theta_s (ns), t, Z+ (nz), Z- (nz).
  const int n = ns + 1 + 2 * nz;
  const int m = ns + nq;
  const int it = ns;
  std::vector<double> c(n, 0.0), A(static_cast<std::size_t>(m) * n, 0.0), b(m, 0.0);
  c[it] = 1.0;
  for (int s = 0; s < ns; ++s) {
    A[s * n + s] = -1.0;
    A[s * n + it] = surface_weight[s];
  }
  for (int v = 0; v < nq; ++v) {
    const int row = ns + v;
    for (int s = 0; s < ns; ++s) A[row * n + s] = ell(s, v);
    for (int j = 0; j < nz; ++j) {
      A[row * n + ns + 1 + j] = null_space(v, j);
      A[row * n + ns + 1 + nz + j] = -null_space(v, j);
    }
    b[row] = volume_share[v];
  }
  const LpResult lp = solve_lp_max(c, A, b);
  if (lp.status != LpResult::Status::optimal) {
    throw std::runtime_error("optimize_cfl_eb: linear program did not reach an optimum");
  }

  CflResult out;
  out.value = lp.x[it];
  out.theta.theta_surface.assign(lp.x.begin(), lp.x.begin() + ns);
  Eigen::VectorXd Z = Eigen::VectorXd::Zero(nz);
  for (int j = 0; j < nz; ++j) Z(j) = lp.x[ns + 1 + j] - lp.x[ns + 1 + nz + j];

  // Spread the free part over the surface points in proportion to theta, so each surface
  // point gets an explicit exact representation for the certificate.
  double theta_sum = 0.0;
  for (double th : out.theta.theta_surface) theta_sum += th;
  out.theta.surface_coupling.assign(static_cast<std::size_t>(ns) * nq, 0.0);
  const Eigen::VectorXd free_part = nz > 0 ? Eigen::VectorXd(null_space * Z) : Eigen::VectorXd::Zero(nq);
  for (int s = 0; s < ns; ++s) {
    const double th = out.theta.theta_surface[s];
    for (int v = 0; v < nq; ++v) {
      double a = th * ell(s, v);
      if (theta_sum > 0.0) a += free_part(v) * th / theta_sum;
      out.theta.surface_coupling[s * nq + v] = th > 0.0 ? a / th : ell(s, v);
    }
  }
  out.theta.theta_volume.assign(nq, 0.0);
  double viol = 0.0;
  for (int v = 0; v < nq; ++v) {
    double tv = volume_share[v];
    for (int s = 0; s < ns; ++s) tv -= out.theta.theta_surface[s] * out.theta.surface_coupling[s * nq + v];
    out.theta.theta_volume[v] = tv;
    viol = std::max(viol, -tv);
  }
  for (int s = 0; s < ns; ++s) viol = std::max(viol, out.value * surface_weight[s] - out.theta.theta_surface[s]);
  // Each surface representation must reproduce degree-p polynomials exactly.
  for (int s = 0; s < ns; ++s) {
    for (int mm = 0; mm < np; ++mm) {
      double acc = 0.0;
      for (int v = 0; v < nq; ++v) acc += out.theta.surface_coupling[s * nq + v] * ref.phi_volume(v, mm);
      viol = std::max(viol, std::abs(acc - ref.phi_surface(s, mm)) * out.theta.theta_surface[s]);
    }
  }
  out.certificate_violation = viol;
  if (viol > 1e-10) {
    throw std::runtime_error("optimize_cfl_eb: optimizer certificate violated by " + std::to_string(viol));
  }
  return out;
}

/// CFL^EB of a reference element: volume shares w_v / V_ref, surface weights w_s.
inline CflResult optimize_cfl_eb(const ReferenceElement& ref,
                                 SurfaceRepresentation mode = SurfaceRepresentation::full) {
  const auto& vol = ref.volume_rule();
  std::vector<double> share(vol.weights);
  for (double& w : share) w /= reference_volume(ref.shape());
  std::vector<double> sw(ref.num_surface_points());
  for (int s = 0; s < ref.num_surface_points(); ++s) sw[s] = ref.surface_weight(s);
  return optimize_cfl_eb(ref, share, sw, mode);
}

inline double optimize_cfl_eb(Shape shape, int p, SurfaceRepresentation mode = SurfaceRepresentation::full) {
  return optimize_cfl_eb(ReferenceElement(shape, p), mode).value;
}

/// CFL^EB per (shape, p), computed on first use.
class CflTable {
 public:
  explicit CflTable(SurfaceRepresentation mode = SurfaceRepresentation::full) : mode_(mode) {}

  double operator()(Shape shape, int p) const {
    const auto key = std::make_pair(shape, p);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    const double v = optimize_cfl_eb(shape, p, mode_);
    if (!(v > 0.0 && v <= 1.0)) throw std::runtime_error("CflTable: value out of (0, 1] for " + to_string(shape));
    table_.emplace(key, v);
    return v;
  }

  void set(Shape shape, int p, double value) { table_[{shape, p}] = value; }

 private:
  SurfaceRepresentation mode_;
  mutable std::map<std::pair<Shape, int>, double> table_;
};

/// CFL^EB of one physical element from its own weights: volume shares w_v |J_v| / V_e and
/// surface weights zeta_s. The admissible step is then dt <= 0.5 * value / lambda_e.
template <int Dim>
double element_cfl_eb(const Discretization<Dim>& disc, int e,
                      SurfaceRepresentation mode = SurfaceRepresentation::full) {
  const auto& g = disc.geometry(e);
  std::vector<double> share(g.weight_volume);
  for (double& w : share) w /= g.volume;
  return optimize_cfl_eb(disc.ref(e), share, g.zeta, mode).value;
}

struct TimeStepOptions {
  double safety = 0.8;
  /// Per-element LP values; when empty the reference table and L_e are used.
  std::vector<double> element_cfl;
};

struct TimeStepResult {
  double dt = 0.0;
  std::vector<double> lambda;  // per element
  int limiting_element = -1;
};

/// dt = safety * min_e 0.5 CFL^EB L_e / lambda_e with lambda_e = tau * max nu over the
/// interior and exterior traces at the element's surface points.
template <int Dim>
TimeStepResult time_step(const Discretization<Dim>& disc, const Traces<Dim>& tr, const CflTable& table,
                         const TimeStepOptions& opt = {}) {
  const GasModel& gas = disc.gas();
  const double tau = time_step_speed_factor(Dim, gas.gamma);
  const int ne = disc.num_elements();
  TimeStepResult res;
  res.lambda.assign(ne, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < ne; ++e) {
    const auto& ref = disc.ref(e);
    double nu = 0.0;
    for (int s = 0; s < ref.num_surface_points(); ++s) {
      const int flat = disc.surface_offset(e) + s;
      for (const auto* U : {&tr.surface[flat], &tr.exterior[flat]}) {
        if (!is_admissible(*U, gas)) {
          throw AdmissibilityError("inadmissible trace while computing the time step",
                                   static_cast<int>(disc.mesh().elements[e].id), s);
        }
        nu = std::max(nu, max_wave_speed(*U, gas));
      }
    }
    res.lambda[e] = tau * nu;
    const double limit = opt.element_cfl.empty()
                             ? 0.5 * table(ref.shape(), ref.order()) * disc.geometry(e).length / res.lambda[e]
                             : 0.5 * opt.element_cfl[e] / res.lambda[e];
    if (limit < best) {
      best = limit;
      res.limiting_element = e;
    }
  }
  res.dt = opt.safety * best;
  if (!(res.dt > 0.0) || !std::isfinite(res.dt)) throw std::runtime_error("time_step: non-positive time step");
  return res;
}

}  // namespace ebdg
