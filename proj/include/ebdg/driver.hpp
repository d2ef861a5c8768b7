#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "cfl.hpp"
#include "dg.hpp"
#include "limiter.hpp"
#include "timeint.hpp"

namespace ebdg {

struct RunOptions {
  Scheme scheme = Scheme::ssprk33;
  double t_end = 0.0;
  long max_steps = -1;  // negative: unlimited
  double safety = 0.8;
  LimiterOptions limiter;
  BoundStrategy strategy = BoundStrategy::local;
  double global_bound = kNoEntropyBound;
  /// Floor for the local strategy's bounds.
  double bound_floor = kNoEntropyBound;
  /// Limit the projected initial condition against initial_bound before the first step.
  bool limit_initial = false;
  double initial_bound = kNoEntropyBound;
  /// Stop when ||d rho/dt||_2 drops below this fraction of its first-step value (0: off).
  double steady_tolerance = 0.0;
  bool per_element_cfl = false;
  SurfaceRepresentation cfl_mode = SurfaceRepresentation::full;
  /// Record min point entropy and the mean-vs-bound margin every step.
  bool track_invariants = true;
  /// Written with the offending element's coefficients when a step fails.
  std::string dump_path;
};

template <int Dim>
struct StepRecord {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  int active = 0;          // elements with eps > 0 in any stage
  int final_active = 0;    // elements with eps > 0 in the last stage
  int density_active = 0;  // elements with theta_rho < 1 in any stage
  int relaxed = 0;
  double min_entropy = std::numeric_limits<double>::quiet_NaN();
  /// min_e [ s(mean_e at t + dt) - s_e^0(t) ]
  double mean_margin = std::numeric_limits<double>::quiet_NaN();
  ConservedState<Dim> totals{};
};

template <int Dim>
struct RunState {
  double time = 0.0;
  long steps = 0;
  DgSolution<Dim> solution;
  EntropyBoundState bounds;
  LimiterReport last_report;
  std::vector<StepRecord<Dim>> history;
  double initial_min_entropy = std::numeric_limits<double>::quiet_NaN();
  ConservedState<Dim> initial_totals{};
  bool failed = false;
  bool steady = false;
  std::string failure;
  int failure_element = -1;
};

/// Sum over elements of V_e times the element mean.
template <int Dim>
ConservedState<Dim> conserved_totals(const Discretization<Dim>& disc, const DgSolution<Dim>& sol) {
  ConservedState<Dim> tot{};
  for (int e = 0; e < disc.num_elements(); ++e) tot += disc.geometry(e).volume * disc.element_average(sol, e);
  return tot;
}

/// Minimum entropy over every element's volume and surface points.
template <int Dim>
double min_point_entropy(const Discretization<Dim>& disc, const Traces<Dim>& tr) {
  const GasModel& gas = disc.gas();
  double m = std::numeric_limits<double>::infinity();
  for (const auto& U : tr.volume) m = std::min(m, entropy(U, gas));
  for (const auto& U : tr.surface) m = std::min(m, entropy(U, gas));
  return m;
}

template <int Dim>
void write_state_dump(const Discretization<Dim>& disc, const RunState<Dim>& st, const std::string& path) {
  std::ofstream out(path);
  if (!out) return;
  out << std::setprecision(17);
  out << "# failure at step " << st.steps << " time " << st.time << "\n# " << st.failure << "\n";
  const auto& mesh = disc.mesh();
  for (int e = 0; e < disc.num_elements(); ++e) {
    if (st.failure_element >= 0 && mesh.elements[e].id != st.failure_element) continue;
    out << "element " << mesh.elements[e].id << " bound "
        << (st.bounds.current.empty() ? kNoEntropyBound : st.bounds.current[e]) << "\n";
    for (const auto& c : disc.coeffs(st.solution, e)) {
      for (double v : c.q) out << ' ' << v;
      out << '\n';
    }
  }
}

/// Runs the entropy-bounded DG loop from `initial` until opt.t_end (or max_steps/steady state).
/// on_step is called after each completed step.
template <int Dim>
RunState<Dim> run(const Discretization<Dim>& disc, DgSolution<Dim> initial, const RunOptions& opt,
                  const std::type_identity_t<std::function<void(const RunState<Dim>&)>>& on_step = {}) {
  RunState<Dim> st;
  st.solution = std::move(initial);
  st.bounds.strategy = opt.strategy;
  st.bounds.global_value = opt.global_bound;
  st.bounds.floor = opt.bound_floor;
  const int ne = disc.num_elements();
  CflTable table(opt.cfl_mode);
  TimeStepOptions ts_opt;
  ts_opt.safety = opt.safety;
  if (opt.per_element_cfl) {
    ts_opt.element_cfl.resize(ne);
    for (int e = 0; e < ne; ++e) ts_opt.element_cfl[e] = element_cfl_eb(disc, e, opt.cfl_mode);
  }
  Traces<Dim> tr, stage_tr;
  LimiterReport stage_report, step_report;
  std::vector<double> stage_bounds;

  auto fail = [&](const std::exception& ex) {
    st.failed = true;
    st.failure = ex.what();
    if (auto* ae = dynamic_cast<const AdmissibilityError*>(&ex)) st.failure_element = ae->element();
    if (!opt.dump_path.empty()) write_state_dump(disc, st, opt.dump_path);
  };

  try {
    if (opt.limit_initial && opt.limiter.enabled) {
      std::vector<double> b(ne, opt.initial_bound);
      limit_solution(disc, st.solution, b, opt.limiter, st.last_report);
    }
    disc.evaluate_traces(st.solution, tr, st.time);
    disc.check_volume_admissible(tr);
    st.initial_totals = conserved_totals(disc, st.solution);
    if (opt.track_invariants) st.initial_min_entropy = min_point_entropy(disc, tr);
  } catch (const std::exception& ex) {
    fail(ex);
    return st;
  }

  auto rhs = [&](const DgSolution<Dim>& u, double t, DgSolution<Dim>& out) { disc.residual(u, t, out, stage_tr); };
  auto limit = [&](DgSolution<Dim>& u, int) {
    if (!opt.limiter.enabled) return;
    limit_solution(disc, u, stage_bounds, opt.limiter, stage_report);
    step_report.merge_max(stage_report);
  };

  double first_rate = -1.0;
  const double t_tol = std::isfinite(opt.t_end) ? 1e-14 * std::max(1.0, std::abs(opt.t_end)) : 0.0;
  while (st.time < opt.t_end - t_tol && (opt.max_steps < 0 || st.steps < opt.max_steps)) {
    try {
      disc.evaluate_traces(st.solution, tr, st.time);
      if (opt.limiter.enabled) estimate_entropy_bounds(disc, tr, st.bounds);
      stage_bounds = opt.limiter.enabled ? st.bounds.current : std::vector<double>(ne, kNoEntropyBound);
      const auto ts = time_step(disc, tr, table, ts_opt);
      double dt = ts.dt;
      if (st.time + dt > opt.t_end) dt = opt.t_end - st.time;
      DgSolution<Dim> before;
      if (opt.steady_tolerance > 0.0) before = st.solution;
      step_report = LimiterReport{};
      step_report.reset(ne);
      advance(st.solution, st.time, dt, opt.scheme, rhs, limit);
      if (!st.solution.all_finite()) throw std::runtime_error("non-finite coefficients after step");
      st.time += dt;
      ++st.steps;
      st.last_report = step_report;

      StepRecord<Dim> rec;
      rec.step = st.steps;
      rec.time = st.time;
      rec.dt = dt;
      rec.active = step_report.active;
      rec.final_active = opt.limiter.enabled ? stage_report.active : 0;
      rec.density_active = step_report.density_active;
      rec.relaxed = step_report.relaxed;
      rec.totals = conserved_totals(disc, st.solution);
      if (opt.track_invariants) {
        disc.evaluate_traces(st.solution, stage_tr, st.time);
        rec.min_entropy = min_point_entropy(disc, stage_tr);
        double margin = std::numeric_limits<double>::infinity();
        for (int e = 0; e < ne; ++e) {
          const auto mean = disc.element_average(st.solution, e);
          margin = std::min(margin, entropy(mean, disc.gas()) - stage_bounds[e]);
        }
        rec.mean_margin = margin;
      }
      st.history.push_back(rec);

      if (opt.steady_tolerance > 0.0) {
        double r2 = 0.0;
        for (int e = 0; e < ne; ++e) {
          const double d = (disc.element_average(st.solution, e).rho() - disc.element_average(before, e).rho()) / dt;
          r2 += disc.geometry(e).volume * d * d;
        }
        const double rate = std::sqrt(r2);
        if (first_rate < 0.0) first_rate = rate;
        if (first_rate > 0.0 && rate < opt.steady_tolerance * first_rate) {
          st.steady = true;
          if (on_step) on_step(st);
          break;
        }
      }
      if (on_step) on_step(st);
    } catch (const std::exception& ex) {
      fail(ex);
      return st;
    }
  }
  return st;
}

}  // namespace ebdg
