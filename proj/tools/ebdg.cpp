// ebdg: command-line front end (run, cfl-table, convergence).

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <ebdg/cases.hpp>
#include <ebdg/config.hpp>
#include <ebdg/gmsh.hpp>
#include <ebdg/output.hpp>

namespace {

using namespace ebdg;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// "1..4" or "1,2,3".
std::vector<int> parse_orders(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
    for (int p = a; p <= b; ++p) out.push_back(p);
  } else {
    for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
  }
  if (out.empty()) throw std::invalid_argument("no orders in '" + s + "'");
  return out;
}

CaseSetup<2> mesh_case(const RunConfig& cfg) {
  CaseSetup<2> c;
  c.name = cfg.mesh_path;
  Mesh<2> mesh = load_gmsh(cfg.mesh_path);
  const auto U = conservative_from_primitive<2>(cfg.init_rho, {cfg.init_u, cfg.init_v}, cfg.init_p, cfg.gas);
  Discretization<2>::BcMap bcs;
  std::vector<std::string> problems;
  for (const auto& name : mesh.boundary_names) {
    auto it = cfg.boundaries.find(name);
    if (it == cfg.boundaries.end()) {
      problems.push_back("boundary." + name + ": tag used by the mesh has no condition");
      continue;
    }
    bcs[name] = {bc_kind_from_string(it->second), U, {}};
  }
  for (const auto& [name, kind] : cfg.boundaries) {
    if (mesh.find_boundary(name) < 0) problems.push_back("boundary." + name + ": tag not present in " + cfg.mesh_path);
  }
  if (!problems.empty()) throw ConfigError(problems);
  c.disc = std::make_shared<const Discretization<2>>(std::move(mesh), cfg.p, cfg.gas, bcs);
  c.initial = c.disc->zero_solution();
  for (int e = 0; e < c.disc->num_elements(); ++e) c.disc->set_constant(c.disc->coeffs(c.initial, e), e, U);
  c.options.scheme = cfg.scheme;
  c.options.safety = cfg.safety;
  c.options.t_end = std::numeric_limits<double>::infinity();
  const double s = entropy(U, cfg.gas);
  c.options.strategy = cfg.strategy.value_or(BoundStrategy::local);
  c.options.global_bound = c.options.bound_floor = c.options.initial_bound = cfg.bound.value_or(s);
  c.options.limit_initial = true;
  return c;
}

template <int Dim>
int execute(CaseSetup<Dim> c, const RunConfig& cfg) {
  apply_run_settings(cfg, c.options);
  const std::string dir = cfg.output_dir;
  HistoryCsv<Dim> history(dir + "/history.csv");
  auto write_fields = [&](const RunState<Dim>& st) {
    if (!cfg.vtk) return;
    char name[64];
    std::snprintf(name, sizeof name, "/fields_%06ld.vtk", st.steps);
    write_vtk(*c.disc, st.solution, dir + name, &st.last_report, &st.bounds.current, st.time);
  };
  if (cfg.vtk) write_vtk(*c.disc, c.initial, dir + "/fields_initial.vtk");
  c.options.dump_path = dir + "/failure_dump.txt";
  const auto t0 = std::chrono::steady_clock::now();
  auto st = run(*c.disc, c.initial, c.options, [&](const RunState<Dim>& s) {
    history.write(s.history.back());
    if (cfg.cadence > 0 && s.steps % cfg.cadence == 0) write_fields(s);
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cfg.cadence == 0 || st.steps % cfg.cadence != 0) write_fields(st);

  int max_active = 0;
  for (const auto& r : st.history) max_active = std::max(max_active, r.active);
  double err = std::numeric_limits<double>::quiet_NaN();
  if (c.exact && !st.failed) err = l2_errors(*c.disc, st.solution, c.exact, st.time).q[0];

  std::cout << std::setprecision(17);
  std::cout << "case,p,h,elements,steps,time,l2_density_error,max_active,min_entropy_drop,seconds,status\n";
  const double drop = st.history.empty() ? 0.0 : [&] {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : st.history) m = std::min(m, r.min_entropy);
    return st.initial_min_entropy - m;
  }();
  std::cout << c.name << ',' << c.disc->order() << ',' << c.h << ',' << c.disc->num_elements() << ',' << st.steps
            << ',' << st.time << ',' << err << ',' << max_active << ',' << drop << ',' << secs << ','
            << (st.failed ? "failed" : st.steady ? "steady" : "ok") << '\n';
  if (st.failed) {
    std::cerr << "run failed at step " << st.steps << ": " << st.failure << " (state dump: " << c.options.dump_path
              << ")\n";
    return 1;
  }
  return 0;
}

int cmd_run(const RunConfig& cfg) {
  validate(cfg);
  if (const int n = resolve_threads(cfg); n > 0) omp_set_num_threads(n);
  if (!cfg.uses_case()) return execute(mesh_case(cfg), cfg);
  const CaseParams prm = case_params(cfg);
  const std::string& n = cfg.case_name;
  if (n == "advect1d") return execute(advect1d_case(prm), cfg);
  if (n == "shock1d") return execute(shock1d_case(prm), cfg);
  if (n == "shocktube_periodic") return execute(shock_tube_periodic_case(prm), cfg);
  if (n == "dmr") return execute(dmr_case(prm), cfg);
  if (n == "cylinder") return execute(cylinder_case(prm), cfg);
  if (n == "freestream") return execute(freestream_case(prm), cfg);
  throw ConfigError({"case: unknown case '" + n + "'"});
}

int cmd_cfl_table(const std::string& shapes, const std::string& orders, const std::string& mode) {
  const auto rep = mode == "subset" ? SurfaceRepresentation::interpolation_subset : SurfaceRepresentation::full;
  if (mode != "full" && mode != "subset") throw std::invalid_argument("unknown mode '" + mode + "' (full, subset)");
  std::cout << "shape,p,cfl_eb\n" << std::setprecision(6) << std::fixed;
  for (const auto& s : split(shapes, ',')) {
    const Shape shape = shape_from_string(s);
    for (int p : parse_orders(orders)) std::cout << to_string(shape) << ',' << p << ',' << optimize_cfl_eb(shape, p, rep) << '\n';
  }
  return 0;
}

int cmd_convergence(RunConfig cfg, const std::string& sizes) {
  if (cfg.case_name.empty()) cfg.case_name = "advect1d";
  validate(cfg);
  if (cfg.case_name != "advect1d") throw std::invalid_argument("convergence studies are defined for advect1d only");
  if (const int n = resolve_threads(cfg); n > 0) omp_set_num_threads(n);
  std::vector<double> h;
  for (const auto& t : split(sizes, ',')) h.push_back(parse_number(t));
  const auto rows = advect1d_convergence(case_params(cfg), h);
  std::cout << "h,l2_density_error,rate\n";
  for (const auto& r : rows) {
    std::cout << std::setprecision(6) << r.h << ',' << std::scientific << std::setprecision(4) << r.error << ','
              << std::fixed << std::setprecision(3);
    if (std::isnan(r.rate)) std::cout << "-";
    else std::cout << r.rate;
    std::cout << std::defaultfloat << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-bounded discontinuous Galerkin solver for the compressible Euler equations"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  // Options shared by run and convergence; they override the configuration file.
  std::string config_path, case_name, h_text, scheme, strategy, out_dir, sizes = "1/10,1/20,1/40,1/80,1/160";
  std::optional<int> p, level, threads;
  std::optional<double> mach, safety, t_end, bound;
  std::optional<long> max_steps, cadence;
  bool no_vtk = false, no_limiter = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--case", case_name, "built-in case");
    sub->add_option("--p", p, "polynomial order");
    sub->add_option("--h", h_text, "element size, e.g. 0.025 or 1/40");
    sub->add_option("--scheme", scheme, "forward_euler, ssprk33 or rk4_classic");
    sub->add_option("--safety", safety, "time-step safety factor");
    sub->add_option("--strategy", strategy, "entropy bound strategy: local or global");
    sub->add_option("--bound", bound, "entropy bound value (global) or floor (local)");
    sub->add_option("--threads", threads, "worker threads (EBDG_NUM_THREADS overrides)");
    sub->add_flag("--no-limiter", no_limiter, "disable the entropy limiter");
  };
  auto* run_cmd = app.add_subcommand("run", "run a case or a mesh configuration");
  add_common(run_cmd);
  run_cmd->add_option("--mach", mach, "shock Mach number (shock1d)");
  run_cmd->add_option("--level", level, "mesh level (cylinder)");
  run_cmd->add_option("--t-end", t_end, "end time");
  run_cmd->add_option("--max-steps", max_steps, "step limit");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--cadence", cadence, "steps between field files (0: final only)");
  run_cmd->add_flag("--no-vtk", no_vtk, "skip field files");

  std::string shapes = "line,quad,triangle", orders = "1..4", mode = "full";
  auto* cfl_cmd = app.add_subcommand("cfl-table", "optimal CFL^EB per element type and order as CSV");
  cfl_cmd->add_option("--shapes", shapes, "comma-separated shapes");
  cfl_cmd->add_option("--orders", orders, "orders, e.g. 1..4 or 1,3");
  cfl_cmd->add_option("--mode", mode, "surface representation: full or subset");

  auto* conv_cmd = app.add_subcommand("convergence", "multi-level advect1d study");
  add_common(conv_cmd);
  conv_cmd->add_option("--sizes", sizes, "comma-separated element sizes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cfl_cmd->parsed()) return cmd_cfl_table(shapes, orders, mode);

    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    std::vector<std::string> problems;
    auto note = [&](const std::string& key, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& ex) {
        problems.push_back(key + ": " + ex.what());
      }
    };
    if (!case_name.empty()) cfg.case_name = case_name, cfg.mesh_path.clear();
    if (p) cfg.p = *p;
    if (!h_text.empty()) note("--h", [&] { cfg.h = parse_number(h_text); });
    if (!scheme.empty()) note("--scheme", [&] { cfg.scheme = scheme_from_string(scheme); });
    if (safety) cfg.safety = *safety;
    if (!strategy.empty()) note("--strategy", [&] { cfg.strategy = bound_strategy_from_string(strategy); });
    if (bound) cfg.bound = *bound;
    if (threads) cfg.threads = *threads;
    if (no_limiter) cfg.limiter = false;
    if (mach) cfg.mach = *mach;
    if (level) cfg.level = *level;
    if (t_end) cfg.t_end = *t_end;
    if (max_steps) cfg.max_steps = *max_steps;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (cadence) cfg.cadence = *cadence;
    if (no_vtk) cfg.vtk = false;
    if (!problems.empty()) throw ConfigError(problems);

    if (run_cmd->parsed()) return cmd_run(cfg);
    return cmd_convergence(cfg, sizes);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
