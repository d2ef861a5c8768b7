#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dg.hpp"
#include "driver.hpp"
#include "geometry.hpp"

namespace ebdg {

// ---------------------------------------------------------------------------
// Exact data

/// States on both sides of a normal shock of Mach number ma = u_s / c_1 moving in +x into
/// gas at rest with density rho1 and pressure p1.
struct NormalShock {
  PrimitiveState<1> pre;
  PrimitiveState<1> post;
  double speed = 0.0;
};

inline NormalShock normal_shock(double ma, double rho1 = 1.4, double p1 = 1.0, const GasModel& gas = {}) {
  if (!(ma >= 1.0)) throw std::invalid_argument("normal_shock: Mach number must be at least 1");
  if (!(rho1 > 0.0) || !(p1 > 0.0)) throw std::invalid_argument("normal_shock: pre-shock state must be positive");
  const double g = gas.gamma;
  const double c1 = std::sqrt(g * p1 / rho1);
  const double m2 = ma * ma;
  NormalShock s;
  s.speed = ma * c1;
  s.pre = {rho1, {0.0}, p1};
  const double rho2 = rho1 * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
  s.post = {rho2, {s.speed * (1.0 - rho1 / rho2)}, p1 * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0))};
  return s;
}

/// Translating sine wave: rho = 1 + 0.1 sin(2 pi (x - t)), u = 1, p = 1.
inline PrimitiveState<1> advect1d_exact(double x, double t) {
  return {1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * (x - t)), {1.0}, 1.0};
}

/// Traveling jump: post-shock state behind x = u_s t, pre-shock state ahead.
inline PrimitiveState<1> shock1d_exact(double x, double t, const NormalShock& s) {
  return x < s.speed * t ? s.post : s.pre;
}

// ---------------------------------------------------------------------------
// Meshes

/// nx-by-ny mesh of [0,1]^2 with 9-node quadrilaterals whose interior nodes are displaced
/// by amplitude * sin(pi X) sin(pi Y) in both directions; the outer boundary stays straight.
/// Boundaries "bottom", "right", "top", "left".
inline Mesh<2> curved_quad_mesh(int nx, int ny, double amplitude) {
  if (nx < 1 || ny < 1) throw MeshError("curved_quad_mesh: bad counts");
  Mesh<2> m;
  const int gx = 2 * nx + 1, gy = 2 * ny + 1;
  auto id = [gx](int i, int j) { return j * gx + i; };
  for (int j = 0; j < gy; ++j) {
    for (int i = 0; i < gx; ++i) {
      const double X = static_cast<double>(i) / (gx - 1), Y = static_cast<double>(j) / (gy - 1);
      const double d = amplitude * std::sin(std::numbers::pi * X) * std::sin(std::numbers::pi * Y);
      m.nodes.push_back({X + d, Y + d});
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = 2 * i, b = 2 * j;
      m.elements.push_back({Shape::quad,
                            {id(a, b), id(a + 2, b), id(a + 2, b + 2), id(a, b + 2), id(a + 1, b), id(a + 2, b + 1),
                             id(a + 1, b + 2), id(a, b + 1), id(a + 1, b + 1)},
                            j * nx + i});
    }
  }
  std::map<std::vector<int>, int> bnd;
  const int bb = m.boundary_index("bottom"), br = m.boundary_index("right"), bt = m.boundary_index("top"),
            bl = m.boundary_index("left");
  auto key = [](int a, int c) { return std::vector<int>{std::min(a, c), std::max(a, c)}; };
  for (int i = 0; i < nx; ++i) {
    bnd[key(id(2 * i, 0), id(2 * i + 2, 0))] = bb;
    bnd[key(id(2 * i, gy - 1), id(2 * i + 2, gy - 1))] = bt;
  }
  for (int j = 0; j < ny; ++j) {
    bnd[key(id(0, 2 * j), id(0, 2 * j + 2))] = bl;
    bnd[key(id(gx - 1, 2 * j), id(gx - 1, 2 * j + 2))] = br;
  }
  m.build_faces(bnd);
  return m;
}

/// O-mesh around a cylinder of radius r0 out to radius r1: nr radial layers with geometric
/// growth and ntheta sectors, 16-node (cubic) quadrilaterals with nodes on the exact circles.
/// Boundaries "wall" (r = r0) and "farfield" (r = r1).
inline Mesh<2> cylinder_mesh(int nr, int ntheta, double r0 = 1.0, double r1 = 20.0) {
  if (nr < 1 || ntheta < 3 || !(r1 > r0) || !(r0 > 0.0)) throw MeshError("cylinder_mesh: bad parameters");
  Mesh<2> m;
  std::vector<double> radius(nr + 1);
  for (int i = 0; i <= nr; ++i) radius[i] = r0 * std::pow(r1 / r0, static_cast<double>(i) / nr);
  const double dtheta = 2.0 * std::numbers::pi / ntheta;
  auto point = [](double r, double th) { return Vec<2>{r * std::cos(th), r * std::sin(th)}; };
  auto corner = [ntheta](int i, int j) { return i * ntheta + (j % ntheta); };
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j < ntheta; ++j) m.nodes.push_back(point(radius[i], j * dtheta));
  const auto& ref_nodes = GeometricBasis::node_coordinates(Shape::quad, 16);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ntheta; ++j) {
      Mesh<2>::Element el{Shape::quad, {corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)},
                          i * ntheta + j};
      // Reference xi runs outward in r, eta counterclockwise in theta.
      for (std::size_t k = 4; k < ref_nodes.size(); ++k) {
        const double r = radius[i] + ref_nodes[k][0] * (radius[i + 1] - radius[i]);
        const double th = (j + ref_nodes[k][1]) * dtheta;
        el.nodes.push_back(static_cast<int>(m.nodes.size()));
        m.nodes.push_back(point(r, th));
      }
      m.elements.push_back(std::move(el));
    }
  }
  std::map<std::vector<int>, int> bnd;
  const int bw = m.boundary_index("wall"), bf = m.boundary_index("farfield");
  auto key = [](int a, int c) { return std::vector<int>{std::min(a, c), std::max(a, c)}; };
  for (int j = 0; j < ntheta; ++j) {
    bnd[key(corner(0, j), corner(0, j + 1))] = bw;
    bnd[key(corner(nr, j), corner(nr, j + 1))] = bf;
  }
  m.build_faces(bnd);
  return m;
}

// ---------------------------------------------------------------------------
// Case setups

struct CaseParams {
  int p = 2;
  double h = 0.0;    // element size; 0 selects the case default
  double mach = 2.0;  // shock1d only
  int level = 1;      // cylinder only
  GasModel gas;
  Scheme scheme = Scheme::ssprk33;
  double safety = 0.8;
  /// When absent each case picks its own (global for the discontinuous cases, local otherwise).
  std::optional<BoundStrategy> strategy;
  /// Global bound value, or the floor of the local bounds. When absent, each case uses
  /// the minimum entropy of its initial data (advect1d: see advect1d_case).
  std::optional<double> entropy_bound;
};

template <int Dim>
struct CaseSetup {
  std::string name;
  std::shared_ptr<const Discretization<Dim>> disc;
  DgSolution<Dim> initial;
  RunOptions options;
  /// Exact conserved state at (x, t); empty where no exact solution is known.
  std::function<ConservedState<Dim>(const Vec<Dim>&, double)> exact;
  double h = 0.0;
};

namespace detail {

inline int cells_for(double length, double h) {
  const double n = length / h;
  const long r = std::lround(n);
  if (r < 1 || std::abs(n - r) > 1e-8 * n) {
    throw std::invalid_argument("element size " + std::to_string(h) + " does not divide the domain length " +
                                std::to_string(length));
  }
  return static_cast<int>(r);
}

/// Fills the bound-related run options: the bound (given or the default) limits the projected
/// data and then floors the local estimates or serves as the global value.
template <int Dim>
void set_entropy_bound(CaseSetup<Dim>& c, const CaseParams& prm, double default_bound,
                       BoundStrategy default_strategy = BoundStrategy::local) {
  const double b = prm.entropy_bound.value_or(default_bound);
  c.options.strategy = prm.strategy.value_or(default_strategy);
  c.options.global_bound = b;
  c.options.bound_floor = b;
  c.options.limit_initial = true;
  c.options.initial_bound = b;
}

template <int Dim>
void set_common(CaseSetup<Dim>& c, const CaseParams& prm) {
  c.options.scheme = prm.scheme;
  c.options.safety = prm.safety;
}

}  // namespace detail

/// Periodic [0,1], one period of the translating sine wave.
inline CaseSetup<1> advect1d_case(const CaseParams& prm) {
  CaseSetup<1> c;
  c.name = "advect1d";
  c.h = prm.h > 0.0 ? prm.h : 0.05;
  const int n = detail::cells_for(1.0, c.h);
  const GasModel gas = prm.gas;
  c.disc = std::make_shared<const Discretization<1>>(uniform_line_mesh(0.0, 1.0, n, true), prm.p, gas);
  c.exact = [gas](const Vec<1>& x, double t) { return conservative_from_primitive<1>(advect1d_exact(x[0], t), gas); };
  c.initial = c.disc->l2_project([&](const Vec<1>& x) { return c.exact(x, 0.0); });
  detail::set_common(c, prm);
  c.options.t_end = 1.0;
  // exp(s) >= 0.874, just below the initial minimum p / rho^gamma = 1.1^-1.4 = 0.87509.
  // A floor at the exact minimum clips the crest of the wave every step.
  detail::set_entropy_bound(c, prm, std::log(0.874));
  return c;
}

/// Shock of Mach number prm.mach starting at x = 0 on [-0.1, 1.1], run until the exact front
/// reaches x = 1. Both ends hold their initial states as far-field data.
inline CaseSetup<1> shock1d_case(const CaseParams& prm) {
  CaseSetup<1> c;
  c.name = "shock1d";
  c.h = prm.h > 0.0 ? prm.h : 0.01;
  const int n = detail::cells_for(1.2, c.h);
  const GasModel gas = prm.gas;
  const NormalShock s = normal_shock(prm.mach, 1.4, 1.0, gas);
  const auto pre = conservative_from_primitive<1>(s.pre, gas), post = conservative_from_primitive<1>(s.post, gas);
  Discretization<1>::BcMap bcs;
  bcs["left"] = {BcKind::farfield, post, {}};
  bcs["right"] = {BcKind::farfield, pre, {}};
  c.disc = std::make_shared<const Discretization<1>>(uniform_line_mesh(-0.1, 1.1, n), prm.p, gas, bcs);
  c.exact = [s, gas](const Vec<1>& x, double t) { return conservative_from_primitive<1>(shock1d_exact(x[0], t, s), gas); };
  c.initial = c.disc->l2_project([&](const Vec<1>& x) { return c.exact(x, 0.0); });
  detail::set_common(c, prm);
  c.options.t_end = 1.0 / s.speed;
  detail::set_entropy_bound(c, prm, std::min(entropy(pre, gas), entropy(post, gas)), BoundStrategy::global);
  return c;
}

/// Periodic [0,1] with a dense slab (rho 1, p 1) on 0.25 < x < 0.75 inside rho 0.125, p 0.1.
/// Runs for a fixed number of steps; used for conservation checks.
inline CaseSetup<1> shock_tube_periodic_case(const CaseParams& prm, long steps = 10000) {
  CaseSetup<1> c;
  c.name = "shocktube_periodic";
  c.h = prm.h > 0.0 ? prm.h : 0.01;
  const int n = detail::cells_for(1.0, c.h);
  const GasModel gas = prm.gas;
  const auto inner = conservative_from_primitive<1>(1.0, {0.0}, 1.0, gas);
  const auto outer = conservative_from_primitive<1>(0.125, {0.0}, 0.1, gas);
  c.disc = std::make_shared<const Discretization<1>>(uniform_line_mesh(0.0, 1.0, n, true), prm.p, gas);
  c.initial = c.disc->l2_project([&](const Vec<1>& x) { return x[0] > 0.25 && x[0] < 0.75 ? inner : outer; });
  detail::set_common(c, prm);
  c.options.t_end = std::numeric_limits<double>::infinity();
  c.options.max_steps = steps;
  detail::set_entropy_bound(c, prm, std::min(entropy(inner, gas), entropy(outer, gas)), BoundStrategy::global);
  return c;
}

/// Double Mach reflection on [0,4]x[0,1]: Mach 10 shock at 60 degrees to a reflecting wall
/// that starts at x = 1/6, exact post-shock data on the top boundary, run to t = 0.25.
inline CaseSetup<2> dmr_case(const CaseParams& prm) {
  CaseSetup<2> c;
  c.name = "dmr";
  c.h = prm.h > 0.0 ? prm.h : 1.0 / 30.0;
  const int nx = detail::cells_for(4.0, c.h), ny = detail::cells_for(1.0, c.h);
  const GasModel gas = prm.gas;
  const double x0 = 1.0 / 6.0, sqrt3 = std::sqrt(3.0);
  const double angle = std::numbers::pi / 6.0;
  const auto pre = conservative_from_primitive<2>(1.4, {0.0, 0.0}, 1.0, gas);
  const auto post =
      conservative_from_primitive<2>(8.0, {8.25 * std::cos(angle), -8.25 * std::sin(angle)}, 116.5, gas);
  Mesh<2> mesh = rectangle_quad_mesh(0.0, 4.0, 0.0, 1.0, nx, ny);
  mesh.retag_boundary("bottom", "bottom_inflow", [x0](const Vec<2>& x) { return x[0] < x0; });
  Discretization<2>::BcMap bcs;
  bcs["bottom"] = {BcKind::slip_wall, {}, {}};
  bcs["bottom_inflow"] = {BcKind::supersonic_inflow, post, {}};
  bcs["left"] = {BcKind::supersonic_inflow, post, {}};
  bcs["right"] = {BcKind::outflow_extrapolate, {}, {}};
  bcs["top"] = {BcKind::supersonic_inflow, {}, [=](const Vec<2>& x, double t) {
                  return x[0] < x0 + (1.0 + 20.0 * t) / sqrt3 ? post : pre;
                }};
  c.disc = std::make_shared<const Discretization<2>>(std::move(mesh), prm.p, gas, bcs);
  c.initial = c.disc->l2_project([&](const Vec<2>& x) { return x[0] < x0 + x[1] / sqrt3 ? post : pre; });
  detail::set_common(c, prm);
  c.options.t_end = 0.25;
  detail::set_entropy_bound(c, prm, std::min(entropy(pre, gas), entropy(post, gas)), BoundStrategy::global);
  return c;
}

/// Free-stream state of the cylinder case: rho 1.4, p 1 (sound speed 1), Mach 0.38 along x.
inline ConservedState<2> cylinder_free_stream(const GasModel& gas = {}) {
  const double rho = 1.4, p = 1.0;
  const double c = std::sqrt(gas.gamma * p / rho);
  return conservative_from_primitive<2>(rho, {0.38 * c, 0.0}, p, gas);
}

/// Subsonic flow past a unit cylinder, far field at radius 20, initialized with the free
/// stream. Level k uses 4 * 2^k radial layers and 8 * 2^k sectors of cubic quadrilaterals.
inline CaseSetup<2> cylinder_case(const CaseParams& prm, long max_steps = 2000) {
  if (prm.level < 1) throw std::invalid_argument("cylinder level must be at least 1");
  CaseSetup<2> c;
  c.name = "cylinder";
  const GasModel gas = prm.gas;
  const auto inf = cylinder_free_stream(gas);
  const int nr = 4 << prm.level, nt = 8 << prm.level;
  Discretization<2>::BcMap bcs;
  bcs["wall"] = {BcKind::slip_wall, {}, {}};
  bcs["farfield"] = {BcKind::farfield, inf, {}};
  c.disc = std::make_shared<const Discretization<2>>(cylinder_mesh(nr, nt), prm.p, gas, bcs);
  c.h = 2.0 * std::numbers::pi / nt;
  c.initial = c.disc->l2_project([&](const Vec<2>&) { return inf; });
  detail::set_common(c, prm);
  c.options.t_end = std::numeric_limits<double>::infinity();
  c.options.max_steps = max_steps;
  c.options.steady_tolerance = 1e-8;
  detail::set_entropy_bound(c, prm, entropy(inf, gas));
  return c;
}

/// Constant state on the curved 9-node fixture mesh with far-field data equal to that state.
inline CaseSetup<2> freestream_case(const CaseParams& prm, long steps = 100) {
  CaseSetup<2> c;
  c.name = "freestream";
  c.h = prm.h > 0.0 ? prm.h : 0.25;
  const int n = detail::cells_for(1.0, c.h);
  const GasModel gas = prm.gas;
  const auto U = conservative_from_primitive<2>(1.4, {0.3, -0.2}, 1.0, gas);
  Discretization<2>::BcMap bcs;
  for (const char* b : {"bottom", "right", "top", "left"}) bcs[b] = {BcKind::farfield, U, {}};
  c.disc = std::make_shared<const Discretization<2>>(curved_quad_mesh(n, n, 0.3 * c.h), prm.p, gas, bcs);
  c.exact = [U](const Vec<2>&, double) { return U; };
  c.initial = c.disc->zero_solution();
  for (int e = 0; e < c.disc->num_elements(); ++e) c.disc->set_constant(c.disc->coeffs(c.initial, e), e, U);
  detail::set_common(c, prm);
  c.options.t_end = std::numeric_limits<double>::infinity();
  c.options.max_steps = steps;
  detail::set_entropy_bound(c, prm, entropy(U, gas));
  return c;
}

// ---------------------------------------------------------------------------
// Error norms and convergence

/// Per-component L2 norms of sol - exact(., t), integrated with a rule of degree 2p + 3 (capped)
/// independent of the solver's own points, where a projection is collocated.
template <int Dim, class F>
ConservedState<Dim> l2_errors(const Discretization<Dim>& disc, const DgSolution<Dim>& sol, F&& exact, double t) {
  ConservedState<Dim> acc{};
  const ReferenceElement* cached = nullptr;
  QuadratureRule rule;
  std::vector<std::vector<double>> phi;
  for (int e = 0; e < disc.num_elements(); ++e) {
    const auto& ref = disc.ref(e);
    if (&ref != cached) {
      cached = &ref;
      rule = volume_rule(ref.shape(), std::min(2 * ref.order() + 3, kMaxQuadratureOrder));
      phi.clear();
      for (const auto& r : rule.points) phi.push_back(ref.eval_basis(r));
    }
    const auto c = disc.coeffs(sol, e);
    for (std::size_t v = 0; v < rule.size(); ++v) {
      const auto jac = geometric_jacobian(disc.mesh(), e, rule.points[v]);
      ConservedState<Dim> U{};
      for (std::size_t m = 0; m < c.size(); ++m) U += phi[v][m] * c[m];
      const auto d = U - exact(jac.x, t);
      for (int k = 0; k < Dim + 2; ++k) acc.q[k] += rule.weights[v] * std::abs(jac.det) * d.q[k] * d.q[k];
    }
  }
  for (double& v : acc.q) v = std::sqrt(v);
  return acc;
}

/// Discrete L2 norm of s - s_ref_value over the volume quadrature.
template <int Dim>
double entropy_l2_deviation(const Discretization<Dim>& disc, const DgSolution<Dim>& sol, double s_value) {
  double acc = 0.0;
  std::vector<ConservedState<Dim>> vol, surf;
  for (int e = 0; e < disc.num_elements(); ++e) {
    const auto& ref = disc.ref(e);
    const auto& g = disc.geometry(e);
    vol.resize(ref.num_volume_points());
    surf.resize(ref.num_surface_points());
    disc.evaluate_element_points(disc.coeffs(sol, e), e, vol.data(), surf.data());
    for (int v = 0; v < ref.num_volume_points(); ++v) {
      const double d = entropy(vol[v], disc.gas()) - s_value;
      acc += g.weight_volume[v] * d * d;
    }
  }
  return std::sqrt(acc);
}

/// Location of the interface with the largest jump in element-mean density, for a 1D mesh
/// whose elements are ordered left to right.
inline double shock_front_position(const Discretization<1>& disc, const DgSolution<1>& sol) {
  const auto& mesh = disc.mesh();
  double best = -1.0, where = std::numeric_limits<double>::quiet_NaN();
  for (int e = 0; e + 1 < disc.num_elements(); ++e) {
    const double jump = std::abs(disc.element_average(sol, e + 1).rho() - disc.element_average(sol, e).rho());
    if (jump > best) {
      best = jump;
      where = mesh.nodes[mesh.elements[e].nodes[1]][0];
    }
  }
  return where;
}

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();  // NaN on the first level
};

/// rate_i = log(err_{i-1} / err_i) / log(h_{i-1} / h_i).
inline std::vector<ConvergenceRow> convergence_table(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw std::invalid_argument("convergence_table: size mismatch");
  std::vector<ConvergenceRow> rows(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    rows[i].h = h[i];
    rows[i].error = err[i];
    if (i > 0) rows[i].rate = std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]);
  }
  return rows;
}

/// Density L2 error of advect1d after one period at each element size.
inline std::vector<ConvergenceRow> advect1d_convergence(CaseParams prm, const std::vector<double>& sizes) {
  if (sizes.size() < 3) throw std::invalid_argument("convergence study needs at least three levels");
  std::vector<double> err;
  for (double h : sizes) {
    prm.h = h;
    const auto c = advect1d_case(prm);
    RunOptions opt = c.options;
    opt.track_invariants = false;
    const auto st = run(*c.disc, c.initial, opt);
    if (st.failed) throw std::runtime_error("advect1d run failed at h = " + std::to_string(h) + ": " + st.failure);
    err.push_back(l2_errors(*c.disc, st.solution, c.exact, st.time).q[0]);
  }
  return convergence_table(sizes, err);
}

}  // namespace ebdg
