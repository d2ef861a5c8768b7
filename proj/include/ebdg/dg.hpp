#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "euler.hpp"
#include "geometry.hpp"

namespace ebdg {

enum class BcKind { periodic, supersonic_inflow, outflow_extrapolate, slip_wall, farfield };

inline std::string to_string(BcKind k) {
  switch (k) {
    case BcKind::periodic: return "periodic";
    case BcKind::supersonic_inflow: return "supersonic_inflow";
    case BcKind::outflow_extrapolate: return "outflow_extrapolate";
    case BcKind::slip_wall: return "slip_wall";
    case BcKind::farfield: return "farfield";
  }
  return "?";
}

inline BcKind bc_kind_from_string(const std::string& s) {
  if (s == "periodic") return BcKind::periodic;
  if (s == "supersonic_inflow" || s == "inflow") return BcKind::supersonic_inflow;
  if (s == "outflow_extrapolate" || s == "outflow") return BcKind::outflow_extrapolate;
  if (s == "slip_wall" || s == "wall") return BcKind::slip_wall;
  if (s == "farfield") return BcKind::farfield;
  throw std::invalid_argument("unknown boundary condition kind '" + s + "'");
}

template <int Dim>
struct BoundaryCondition {
  BcKind kind = BcKind::outflow_extrapolate;
  ConservedState<Dim> state{};
  /// Optional space/time dependent prescribed state for inflow/farfield.
  std::function<ConservedState<Dim>(const Vec<Dim>&, double)> profile;

  /// Whether ghost states on this boundary enter the exterior set of the entropy bound.
  bool ghost_bounds_entropy() const { return kind == BcKind::supersonic_inflow || kind == BcKind::farfield; }
};

template <int Dim>
inline ConservedState<Dim> ghost_state(const BoundaryCondition<Dim>& bc, const ConservedState<Dim>& U,
                                       const std::type_identity_t<Vec<Dim>>& n, const std::type_identity_t<Vec<Dim>>& x = {}, double t = 0.0) {
  switch (bc.kind) {
    case BcKind::slip_wall: {
      ConservedState<Dim> G = U;
      double mn = 0.0;
      for (int d = 0; d < Dim; ++d) mn += U.momentum(d) * n[d];
      for (int d = 0; d < Dim; ++d) G.q[1 + d] = U.momentum(d) - 2.0 * mn * n[d];
      return G;
    }
    case BcKind::outflow_extrapolate: return U;
    case BcKind::supersonic_inflow:
    case BcKind::farfield: return bc.profile ? bc.profile(x, t) : bc.state;
    case BcKind::periodic: break;
  }
  throw ContractError("ghost_state: periodic boundaries have no ghost state");
}

/// Modal coefficients of every element, N_p states per element.
template <int Dim>
struct DgSolution {
  std::vector<ConservedState<Dim>> coeffs;

  DgSolution& axpy(double a, const DgSolution& x) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += a * x.coeffs[i];
    return *this;
  }
  bool all_finite() const {
    for (const auto& c : coeffs)
      for (double v : c.q)
        if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Point values of a solution: every element's volume and surface quadrature points,
/// plus the exterior trace (neighbor value or ghost) at each surface point.
template <int Dim>
struct Traces {
  std::vector<ConservedState<Dim>> volume;
  std::vector<ConservedState<Dim>> surface;
  std::vector<ConservedState<Dim>> exterior;
  std::vector<char> exterior_bounds_entropy;
  std::vector<ConservedState<Dim>> surface_flux;  // omega * numerical flux, outward
};

template <int Dim>
class Discretization {
 public:
  using State = ConservedState<Dim>;
  using BcMap = std::map<std::string, BoundaryCondition<Dim>>;

  Discretization(Mesh<Dim> mesh, int p, GasModel gas, BcMap bcs = {})
      : mesh_(std::move(mesh)), p_(p), gas_(gas) {
    if (gas.gamma <= 1.0) throw std::invalid_argument("gamma must exceed 1");
    bind_boundaries(bcs);
    build_elements();
    build_faces();
  }

  const Mesh<Dim>& mesh() const { return mesh_; }
  const GasModel& gas() const { return gas_; }
  int order() const { return p_; }
  int num_elements() const { return mesh_.num_elements(); }
  const ReferenceElement& ref(int e) const { return *refs_[e]; }
  const ElementGeometry<Dim>& geometry(int e) const { return geo_[e]; }
  int coeff_offset(int e) const { return coeff_off_[e]; }
  int volume_offset(int e) const { return vol_off_[e]; }
  int surface_offset(int e) const { return surf_off_[e]; }
  int num_coeffs() const { return coeff_off_.back(); }
  int num_volume_points() const { return vol_off_.back(); }
  int num_surface_points() const { return surf_off_.back(); }
  const BoundaryCondition<Dim>& boundary(int b) const { return bcs_[b]; }
  void set_boundary(const std::string& name, BoundaryCondition<Dim> bc) {
    const int b = mesh_.find_boundary(name);
    if (b < 0) throw std::invalid_argument("unknown boundary '" + name + "'");
    bcs_[b] = std::move(bc);
  }

  DgSolution<Dim> zero_solution() const {
    DgSolution<Dim> s;
    s.coeffs.assign(num_coeffs(), State{});
    return s;
  }

  std::span<State> coeffs(DgSolution<Dim>& s, int e) const {
    return {s.coeffs.data() + coeff_off_[e], static_cast<std::size_t>(refs_[e]->num_basis())};
  }
  std::span<const State> coeffs(const DgSolution<Dim>& s, int e) const {
    return {s.coeffs.data() + coeff_off_[e], static_cast<std::size_t>(refs_[e]->num_basis())};
  }

  /// Value of element e's expansion at reference point r.
  State evaluate(const DgSolution<Dim>& s, int e, const RefPoint& r) const {
    const auto& ref = *refs_[e];
    double phi[64];
    ref.eval_basis_unchecked(r, phi, nullptr);
    const auto c = coeffs(s, e);
    State U{};
    for (int m = 0; m < ref.num_basis(); ++m) U += phi[m] * c[m];
    return U;
  }

  /// Element average: sum_v w_v |J_v| U(r_v) / V_e.
  State element_average(const DgSolution<Dim>& s, int e) const {
    const auto c = coeffs(s, e);
    const double* w = avg_weights_.data() + coeff_off_[e];
    State U{};
    for (std::size_t m = 0; m < c.size(); ++m) U += w[m] * c[m];
    return U;
  }
  std::span<const double> average_weights(int e) const {
    return {avg_weights_.data() + coeff_off_[e], static_cast<std::size_t>(refs_[e]->num_basis())};
  }

  /// Coefficients of the constant function with value U on element e.
  void set_constant(std::span<State> c, int e, const State& U) const {
    for (auto& x : c) x = State{};
    c[0] = refs_[e]->constant_coefficient() * U;
  }

  /// Point values of element e at its volume and surface quadrature points.
  void evaluate_element_points(std::span<const State> c, int e, State* vol, State* surf) const {
    const auto& ref = *refs_[e];
    const int np = ref.num_basis();
    for (int v = 0; v < ref.num_volume_points(); ++v) {
      const auto phi = ref.phi_volume_row(v);
      State U = phi[0] * c[0];
      for (int m = 1; m < np; ++m) U += phi[m] * c[m];
      vol[v] = U;
    }
    for (int s = 0; s < ref.num_surface_points(); ++s) {
      const auto phi = ref.phi_surface_row(s);
      State U = phi[0] * c[0];
      for (int m = 1; m < np; ++m) U += phi[m] * c[m];
      surf[s] = U;
    }
  }

  void resize(Traces<Dim>& tr) const {
    tr.volume.resize(num_volume_points());
    tr.surface.resize(num_surface_points());
    tr.exterior.resize(num_surface_points());
    tr.exterior_bounds_entropy.assign(num_surface_points(), 0);
    tr.surface_flux.resize(num_surface_points());
  }

  /// Fills volume/surface point values and exterior traces. Ghost states use time t.
  void evaluate_traces(const DgSolution<Dim>& s, Traces<Dim>& tr, double t) const {
    resize(tr);
    const int ne = num_elements();
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) {
      evaluate_element_points(coeffs(s, e), e, tr.volume.data() + vol_off_[e], tr.surface.data() + surf_off_[e]);
    }
    const int nf = static_cast<int>(faces_.size());
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nf; ++f) {
      const auto& fd = faces_[f];
      for (std::size_t q = 0; q < fd.left.size(); ++q) {
        const int a = fd.left[q];
        if (fd.boundary < 0) {
          const int b = fd.right[q];
          tr.exterior[a] = tr.surface[b];
          tr.exterior[b] = tr.surface[a];
          tr.exterior_bounds_entropy[a] = tr.exterior_bounds_entropy[b] = 1;
        } else {
          const auto& bc = bcs_[fd.boundary];
          tr.exterior[a] = ghost_state<Dim>(bc, tr.surface[a], point_normal_[a], point_x_[a], t);
          tr.exterior_bounds_entropy[a] = bc.ghost_bounds_entropy() ? 1 : 0;
        }
      }
    }
  }

  /// Semi-discrete right-hand side dU/dt in modal coefficients. Traces must have been
  /// evaluated for s (evaluate_traces); this routine fills tr.surface_flux.
  void residual_from_traces(const DgSolution<Dim>& s, Traces<Dim>& tr, DgSolution<Dim>& out) const {
    (void)s;
    out.coeffs.resize(num_coeffs());
    const int nf = static_cast<int>(faces_.size());
    // Face fluxes: once per face with side-0 weights and normals; side 1 receives the negative.
    std::vector<std::string> errors;
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nf; ++f) {
      const auto& fd = faces_[f];
      for (std::size_t q = 0; q < fd.left.size(); ++q) {
        const int a = fd.left[q];
        const State& UL = tr.surface[a];
        const State& UR = tr.exterior[a];
        const auto& n = point_normal_[a];
        if (!is_admissible(UL, gas_) || !is_admissible(UR, gas_)) {
          const int e = fd.elem0;
#pragma omp critical
          errors.push_back("inadmissible trace on face " + std::to_string(f) + " of element " +
                           std::to_string(mesh_.elements[e].id) + " (rho=" +
                           std::to_string(is_admissible(UL, gas_) ? UR.rho() : UL.rho()) + ", p=" +
                           std::to_string(pressure(is_admissible(UL, gas_) ? UR : UL, gas_)) + ")");
          continue;
        }
        const double lambda = std::max(max_wave_speed(UL, gas_), max_wave_speed(UR, gas_));
        State F = lax_friedrichs_flux<Dim>(UL, UR, n, lambda, gas_);
        F *= point_omega_[a];
        tr.surface_flux[a] = F;
        if (fd.boundary < 0) tr.surface_flux[fd.right[q]] = -1.0 * F;
      }
    }
    if (!errors.empty()) throw AdmissibilityError(errors.front());
    const int ne = num_elements();
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) element_residual(e, tr, coeffs(out, e));
  }

  void residual(const DgSolution<Dim>& s, double t, DgSolution<Dim>& out, Traces<Dim>& tr) const {
    evaluate_traces(s, tr, t);
    check_volume_admissible(tr);
    residual_from_traces(s, tr, out);
  }

  DgSolution<Dim> residual(const DgSolution<Dim>& s, double t = 0.0) const {
    Traces<Dim> tr;
    DgSolution<Dim> out;
    residual(s, t, out, tr);
    return out;
  }

  /// L2 projection of f(x) onto the element bases.
  template <class F>
  DgSolution<Dim> l2_project(F&& f) const {
    DgSolution<Dim> s = zero_solution();
    for (int e = 0; e < num_elements(); ++e) {
      const auto& ref = *refs_[e];
      const auto& g = geo_[e];
      const int np = ref.num_basis();
      std::vector<State> rhs(np);
      for (int v = 0; v < ref.num_volume_points(); ++v) {
        const State U = f(g.x_volume[v]);
        for (int m = 0; m < np; ++m) rhs[m] += (g.weight_volume[v] * ref.phi_volume(v, m)) * U;
      }
      const double* Minv = minv_.data() + minv_off_[e];
      auto c = coeffs(s, e);
      for (int m = 0; m < np; ++m) {
        State acc{};
        for (int k = 0; k < np; ++k) acc += Minv[m * np + k] * rhs[k];
        c[m] = acc;
      }
    }
    return s;
  }

  /// Physical coordinates, unit normals, and omega = w |J^d| of surface points (flat index).
  const Vec<Dim>& surface_x(int flat) const { return point_x_[flat]; }
  const Vec<Dim>& surface_normal(int flat) const { return point_normal_[flat]; }

  /// Mass-matrix inverse of element e, row-major N_p x N_p.
  std::span<const double> mass_inverse(int e) const {
    const int np = refs_[e]->num_basis();
    return {minv_.data() + minv_off_[e], static_cast<std::size_t>(np * np)};
  }

  void check_volume_admissible(const Traces<Dim>& tr) const {
    for (int e = 0; e < num_elements(); ++e) {
      for (int v = 0; v < refs_[e]->num_volume_points(); ++v) {
        const State& U = tr.volume[vol_off_[e] + v];
        if (!is_admissible(U, gas_)) {
          throw AdmissibilityError("inadmissible volume point state (rho=" + std::to_string(U.rho()) +
                                       ", p=" + std::to_string(pressure(U, gas_)) + ")",
                                   static_cast<int>(mesh_.elements[e].id), v);
        }
      }
    }
  }

 private:
  struct FaceData {
    int elem0 = -1, elem1 = -1;
    int boundary = -1;
    std::vector<int> left;   // flat surface indices, side 0
    std::vector<int> right;  // matched flat surface indices, side 1
  };

  void bind_boundaries(const BcMap& bcs) {
    bcs_.assign(mesh_.boundary_names.size(), BoundaryCondition<Dim>{});
    std::vector<bool> bound(mesh_.boundary_names.size(), false);
    for (const auto& [name, bc] : bcs) {
      const int b = mesh_.find_boundary(name);
      if (b < 0) continue;  // boundary absent (e.g. already made periodic)
      if (bc.kind == BcKind::periodic) continue;
      bcs_[b] = bc;
      bound[b] = true;
    }
    std::vector<int> used(mesh_.boundary_names.size(), 0);
    for (const auto& f : mesh_.faces)
      if (f.is_boundary()) used[f.boundary] = 1;
    std::string missing;
    for (std::size_t b = 0; b < bound.size(); ++b) {
      if (used[b] && !bound[b]) missing += (missing.empty() ? "" : ", ") + mesh_.boundary_names[b];
    }
    if (!missing.empty()) throw std::invalid_argument("no boundary condition for: " + missing);
    for (std::size_t b = 0; b < bcs_.size(); ++b) {
      const auto& bc = bcs_[b];
      if ((bc.kind == BcKind::supersonic_inflow || bc.kind == BcKind::farfield) && !bc.profile &&
          !is_admissible(bc.state, gas_)) {
        throw std::invalid_argument("boundary '" + mesh_.boundary_names[b] + "' prescribes an inadmissible state");
      }
    }
  }

  void build_elements() {
    const int ne = mesh_.num_elements();
    std::map<Shape, std::shared_ptr<ReferenceElement>> cache;
    refs_.resize(ne);
    geo_.resize(ne);
    coeff_off_.assign(ne + 1, 0);
    vol_off_.assign(ne + 1, 0);
    surf_off_.assign(ne + 1, 0);
    minv_off_.assign(ne + 1, 0);
    vol_op_off_.assign(ne + 1, 0);
    surf_op_off_.assign(ne + 1, 0);
    for (int e = 0; e < ne; ++e) {
      const Shape shape = mesh_.elements[e].shape;
      if (spatial_dim(shape) != Dim) throw MeshError("element dimension does not match mesh dimension");
      auto& r = cache[shape];
      if (!r) r = std::make_shared<ReferenceElement>(shape, p_);
      refs_[e] = r;
      const int np = r->num_basis(), nv = r->num_volume_points(), ns = r->num_surface_points();
      coeff_off_[e + 1] = coeff_off_[e] + np;
      vol_off_[e + 1] = vol_off_[e] + nv;
      surf_off_[e + 1] = surf_off_[e] + ns;
      minv_off_[e + 1] = minv_off_[e] + np * np;
      vol_op_off_[e + 1] = vol_op_off_[e] + np * nv * Dim;
      surf_op_off_[e + 1] = surf_op_off_[e] + np * ns;
    }
    minv_.resize(minv_off_[ne]);
    vol_op_.resize(vol_op_off_[ne]);
    surf_op_.resize(surf_op_off_[ne]);
    avg_weights_.resize(coeff_off_[ne]);
    point_x_.resize(surf_off_[ne]);
    point_normal_.resize(surf_off_[ne]);
    point_omega_.resize(surf_off_[ne]);
    for (int e = 0; e < ne; ++e) {
      const auto& ref = *refs_[e];
      geo_[e] = build_element_geometry(mesh_, e, ref);
      const auto& g = geo_[e];
      const int np = ref.num_basis(), nv = ref.num_volume_points(), ns = ref.num_surface_points();
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(np, np);
      for (int v = 0; v < nv; ++v)
        for (int i = 0; i < np; ++i)
          for (int j = 0; j < np; ++j) M(i, j) += g.weight_volume[v] * ref.phi_volume(v, i) * ref.phi_volume(v, j);
      Eigen::MatrixXd Minv;
      if (g.affine) {
        Minv = Eigen::MatrixXd::Identity(np, np) / g.det_volume[0];
      } else {
        Minv = M.llt().solve(Eigen::MatrixXd::Identity(np, np));
      }
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) minv_[minv_off_[e] + i * np + j] = Minv(i, j);
      // Volume operator: Minv * (W_v grad phi(x_v)), grad in physical coordinates.
      Eigen::MatrixXd G(np, nv * Dim);
      for (int v = 0; v < nv; ++v) {
        const auto& inv = g.inv_jacobian[v];
        for (int m = 0; m < np; ++m) {
          const auto& gr = ref.grad_volume(v, m);
          for (int d = 0; d < Dim; ++d) {
            double gx = 0.0;
            for (int j = 0; j < Dim; ++j) gx += gr[j] * inv[j][d];
            G(m, v * Dim + d) = g.weight_volume[v] * gx;
          }
        }
      }
      const Eigen::MatrixXd MG = Minv * G;
      for (int m = 0; m < np; ++m)
        for (int k = 0; k < nv * Dim; ++k) vol_op_[vol_op_off_[e] + m * nv * Dim + k] = MG(m, k);
      Eigen::MatrixXd S(np, ns);
      for (int s = 0; s < ns; ++s)
        for (int m = 0; m < np; ++m) S(m, s) = ref.phi_surface(s, m);
      const Eigen::MatrixXd MS = Minv * S;
      for (int m = 0; m < np; ++m)
        for (int s = 0; s < ns; ++s) surf_op_[surf_op_off_[e] + m * ns + s] = MS(m, s);
      for (int m = 0; m < np; ++m) {
        double w = 0.0;
        for (int v = 0; v < nv; ++v) w += g.weight_volume[v] * ref.phi_volume(v, m);
        avg_weights_[coeff_off_[e] + m] = w / g.volume;
      }
      for (int s = 0; s < ns; ++s) {
        point_x_[surf_off_[e] + s] = g.x_surface[s];
        point_normal_[surf_off_[e] + s] = g.normal[s];
        point_omega_[surf_off_[e] + s] = g.weight_surface[s];
      }
    }
  }

  void build_faces() {
    faces_.clear();
    for (const auto& f : mesh_.faces) {
      FaceData fd;
      fd.elem0 = f.elem[0];
      fd.elem1 = f.elem[1];
      fd.boundary = f.boundary;
      const auto& r0 = *refs_[f.elem[0]];
      const int nq = r0.num_edge_points(f.edge[0]);
      const double h = geo_[f.elem[0]].length;
      for (int q = 0; q < nq; ++q) fd.left.push_back(surf_off_[f.elem[0]] + r0.surface_index(f.edge[0], q));
      if (!f.is_boundary()) {
        const auto& r1 = *refs_[f.elem[1]];
        if (r1.num_edge_points(f.edge[1]) != nq) throw MeshError("face point counts differ across a face");
        std::vector<bool> taken(nq, false);
        for (int q = 0; q < nq; ++q) {
          const auto& xa = point_x_[fd.left[q]];
          int best = -1;
          double best_d = std::numeric_limits<double>::infinity();
          for (int j = 0; j < nq; ++j) {
            if (taken[j]) continue;
            const auto& xb = point_x_[surf_off_[f.elem[1]] + r1.surface_index(f.edge[1], j)];
            double d2 = 0.0;
            for (int d = 0; d < Dim; ++d) d2 += (xb[d] + f.offset[d] - xa[d]) * (xb[d] + f.offset[d] - xa[d]);
            if (d2 < best_d) best_d = d2, best = j;
          }
          if (std::sqrt(best_d) > 1e-9 * h) {
            throw MeshError("surface points do not match across the face between elements " +
                            std::to_string(mesh_.elements[f.elem[0]].id) + " and " +
                            std::to_string(mesh_.elements[f.elem[1]].id));
          }
          taken[best] = true;
          fd.right.push_back(surf_off_[f.elem[1]] + r1.surface_index(f.edge[1], best));
        }
        for (int q = 0; q < nq; ++q) {
          const auto& na = point_normal_[fd.left[q]];
          const auto& nb = point_normal_[fd.right[q]];
          double s2 = 0.0;
          for (int d = 0; d < Dim; ++d) s2 += (na[d] + nb[d]) * (na[d] + nb[d]);
          if (std::sqrt(s2) > 1e-10) throw MeshError("normals are not opposite across a face");
        }
      }
      faces_.push_back(std::move(fd));
    }
  }

  void element_residual(int e, const Traces<Dim>& tr, std::span<State> out) const {
    const auto& ref = *refs_[e];
    const int np = ref.num_basis(), nv = ref.num_volume_points(), ns = ref.num_surface_points();
    const State* vol = tr.volume.data() + vol_off_[e];
    const State* sflux = tr.surface_flux.data() + surf_off_[e];
    const double* G = vol_op_.data() + vol_op_off_[e];
    const double* S = surf_op_.data() + surf_op_off_[e];
    thread_local std::vector<std::array<State, Dim>> F;
    F.resize(nv);
    for (int v = 0; v < nv; ++v) F[v] = flux(vol[v], gas_);
    for (int m = 0; m < np; ++m) {
      State acc{};
      const double* Gm = G + m * nv * Dim;
      for (int v = 0; v < nv; ++v)
        for (int d = 0; d < Dim; ++d) acc += Gm[v * Dim + d] * F[v][d];
      const double* Sm = S + m * ns;
      for (int s = 0; s < ns; ++s) acc -= Sm[s] * sflux[s];
      out[m] = acc;
    }
  }

  Mesh<Dim> mesh_;
  int p_;
  GasModel gas_;
  std::vector<BoundaryCondition<Dim>> bcs_;
  std::vector<std::shared_ptr<ReferenceElement>> refs_;
  std::vector<ElementGeometry<Dim>> geo_;
  std::vector<int> coeff_off_, vol_off_, surf_off_, minv_off_, vol_op_off_, surf_op_off_;
  std::vector<double> minv_, vol_op_, surf_op_, avg_weights_;
  std::vector<Vec<Dim>> point_x_, point_normal_;
  std::vector<double> point_omega_;
  std::vector<FaceData> faces_;
};

}  // namespace ebdg
