#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "driver.hpp"

namespace ebdg {

class OutputError : public std::runtime_error {
 public:
  explicit OutputError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

inline std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw OutputError(parent.string(), "cannot create directory: " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw OutputError(path, "cannot open for writing");
  out << std::setprecision(17);
  return out;
}

/// Reference points of the plotting lattice (n sub-intervals per direction) and the
/// sub-cells over them as VTK cells.
struct PlotLattice {
  std::vector<RefPoint> points;
  std::vector<std::vector<int>> cells;
  int vtk_type = 0;
};

inline PlotLattice plot_lattice(Shape shape, int n) {
  PlotLattice L;
  switch (shape) {
    case Shape::line:
      for (int i = 0; i <= n; ++i) L.points.push_back({-1.0 + 2.0 * i / n, 0.0});
      for (int i = 0; i < n; ++i) L.cells.push_back({i, i + 1});
      L.vtk_type = 3;  // VTK_LINE
      break;
    case Shape::quad:
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) L.points.push_back({double(i) / n, double(j) / n});
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int a = j * (n + 1) + i;
          L.cells.push_back({a, a + 1, a + n + 2, a + n + 1});
        }
      L.vtk_type = 9;  // VTK_QUAD
      break;
    case Shape::triangle: {
      std::vector<std::vector<int>> id(n + 1, std::vector<int>(n + 1, -1));
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i + j <= n; ++i) {
          id[i][j] = static_cast<int>(L.points.size());
          L.points.push_back({-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n});
        }
      for (int j = 0; j < n; ++j)
        for (int i = 0; i + j < n; ++i) {
          L.cells.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
          if (i + j + 1 < n) L.cells.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
        }
      L.vtk_type = 5;  // VTK_TRIANGLE
      break;
    }
  }
  return L;
}

/// Legacy ASCII VTK of the solution. Every element is split into sub-cells on a lattice
/// with max(p, 1) intervals per direction; cell data repeat the element's values (mean rho,
/// u, p, Mach, s, eps, s_e^0) and point data sample the polynomial at the lattice points.
template <int Dim>
void write_vtk(const Discretization<Dim>& disc, const DgSolution<Dim>& sol, const std::string& path,
               const LimiterReport* report = nullptr, const std::vector<double>* bounds = nullptr,
               double time = 0.0) {
  const GasModel& gas = disc.gas();
  const int ne = disc.num_elements();
  const int n = std::max(disc.order(), 1);
  std::vector<Vec<Dim>> px;
  std::vector<ConservedState<Dim>> pu;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_type, cell_elem;
  for (int e = 0; e < ne; ++e) {
    const auto L = plot_lattice(disc.ref(e).shape(), n);
    const int base = static_cast<int>(px.size());
    for (const auto& r : L.points) {
      px.push_back(geometric_jacobian(disc.mesh(), e, r).x);
      pu.push_back(disc.evaluate(sol, e, r));
    }
    for (auto c : L.cells) {
      for (int& i : c) i += base;
      cells.push_back(std::move(c));
      cell_type.push_back(L.vtk_type);
      cell_elem.push_back(e);
    }
  }

  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\nebdg t=" << time << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << px.size() << " double\n";
  for (const auto& x : px) {
    out << x[0] << ' ' << (Dim > 1 ? x[Dim - 1] : 0.0) << " 0\n";
  }
  std::size_t total = 0;
  for (const auto& c : cells) total += c.size() + 1;
  out << "CELLS " << cells.size() << ' ' << total << '\n';
  for (const auto& c : cells) {
    out << c.size();
    for (int i : c) out << ' ' << i;
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (int t : cell_type) out << t << '\n';

  // Cell data.
  std::vector<ConservedState<Dim>> means(ne);
  for (int e = 0; e < ne; ++e) means[e] = disc.element_average(sol, e);
  auto cell_scalar = [&](const char* name, auto&& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e : cell_elem) out << f(e) << '\n';
  };
  auto velocity = [](const ConservedState<Dim>& U) {
    Vec<Dim> u = U.momentum();
    for (auto& v : u) v /= U.rho();
    return u;
  };
  auto safe = [&](auto&& f, const ConservedState<Dim>& U) {
    return is_admissible(U, gas) ? f(U) : std::numeric_limits<double>::quiet_NaN();
  };
  out << "CELL_DATA " << cells.size() << '\n';
  cell_scalar("element", [&](int e) { return double(disc.mesh().elements[e].id); });
  cell_scalar("mean_rho", [&](int e) { return means[e].rho(); });
  cell_scalar("mean_p", [&](int e) { return safe([&](const auto& U) { return pressure(U, gas); }, means[e]); });
  cell_scalar("mean_mach", [&](int e) {
    return safe([&](const auto& U) { return norm<Dim>(velocity(U)) / sound_speed(U, gas); }, means[e]);
  });
  cell_scalar("mean_s", [&](int e) { return safe([&](const auto& U) { return entropy(U, gas); }, means[e]); });
  cell_scalar("epsilon", [&](int e) { return report && !report->epsilon.empty() ? report->epsilon[e] : 0.0; });
  cell_scalar("s_bound", [&](int e) {
    return bounds && !bounds->empty() ? (*bounds)[e] : std::numeric_limits<double>::quiet_NaN();
  });
  out << "VECTORS mean_u double\n";
  for (int e : cell_elem) {
    const auto u = velocity(means[e]);
    out << u[0] << ' ' << (Dim > 1 ? u[Dim - 1] : 0.0) << " 0\n";
  }

  // Point data.
  out << "POINT_DATA " << px.size() << '\n';
  auto point_scalar = [&](const char* name, auto&& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& U : pu) out << f(U) << '\n';
  };
  point_scalar("rho", [](const auto& U) { return U.rho(); });
  point_scalar("p", [&](const auto& U) { return safe([&](const auto& V) { return pressure(V, gas); }, U); });
  point_scalar("s", [&](const auto& U) { return safe([&](const auto& V) { return entropy(V, gas); }, U); });
  if (!out) throw OutputError(path, "write failed");
}

/// Per-step CSV: time, conserved totals, min point entropy, activation counts.
template <int Dim>
class HistoryCsv {
 public:
  explicit HistoryCsv(const std::string& path) : path_(path), out_(open_output(path)) {
    out_ << "step,time,dt,mass";
    for (int d = 0; d < Dim; ++d) out_ << ",momentum_" << "xy"[d];
    out_ << ",energy,min_entropy,mean_margin,active,final_active,density_active,relaxed\n";
  }

  void write(const StepRecord<Dim>& r) {
    out_ << r.step << ',' << r.time << ',' << r.dt;
    for (double v : r.totals.q) out_ << ',' << v;
    out_ << ',' << r.min_entropy << ',' << r.mean_margin << ',' << r.active << ',' << r.final_active << ','
         << r.density_active << ',' << r.relaxed << '\n';
    if (!out_) throw OutputError(path_, "write failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace ebdg
