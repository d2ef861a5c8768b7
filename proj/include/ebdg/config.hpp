#pragma once

#include <toml.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cases.hpp"

namespace ebdg {

/// Carries every problem found in a configuration, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& p : v) s += "\n  " + p;
    return s;
  }
  std::vector<std::string> problems_;
};

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"advect1d", "shock1d", "shocktube_periodic", "dmr", "cylinder",
                                              "freestream"};
  return names;
}

struct RunConfig {
  // Built-in case, or a Gmsh mesh with boundary kinds and a uniform initial state.
  std::string case_name;
  std::string mesh_path;
  std::map<std::string, std::string> boundaries;  // tag -> kind
  double init_rho = 1.0, init_u = 0.0, init_v = 0.0, init_p = 1.0;

  int p = 2;
  double h = 0.0;  // 0: case default
  double mach = 2.0;
  int level = 1;
  Scheme scheme = Scheme::ssprk33;
  double safety = 0.8;
  std::optional<double> t_end;
  long max_steps = -1;
  bool per_element_cfl = false;
  GasModel gas;

  bool limiter = true;
  std::optional<BoundStrategy> strategy;
  std::optional<double> bound;
  MeanViolationPolicy mean_violation = MeanViolationPolicy::fatal;
  double rho_floor = kDensityFloor;

  std::string output_dir = "out";
  long cadence = 0;  // steps between field files; 0: final state only
  bool vtk = true;
  int threads = 0;   // 0: runtime default

  bool uses_case() const { return !case_name.empty(); }
};

/// Parses "a/b" or a decimal number.
inline double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else {
      std::size_t u2 = 0;
      const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
      const double a = std::stod(num, &used), b = std::stod(den, &u2);
      if (used == num.size() && u2 == den.size() && b != 0.0) return a / b;
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("not a number: '" + text + "'");
}

inline BoundStrategy bound_strategy_from_string(const std::string& s) {
  if (s == "local") return BoundStrategy::local;
  if (s == "global") return BoundStrategy::global;
  throw std::invalid_argument("unknown bound strategy '" + s + "' (local, global)");
}

inline MeanViolationPolicy mean_violation_from_string(const std::string& s) {
  if (s == "fatal") return MeanViolationPolicy::fatal;
  if (s == "relax") return MeanViolationPolicy::relax;
  throw std::invalid_argument("unknown mean-violation policy '" + s + "' (fatal, relax)");
}

namespace detail {

class TableReader {
 public:
  TableReader(const toml::table& t, std::string prefix, std::vector<std::string>& problems)
      : t_(t), prefix_(std::move(prefix)), problems_(problems) {}

  template <class Fn>
  void get_number(const char* key, Fn&& set) {
    const auto* node = take(key);
    if (!node) return;
    if (const auto* v = node->as_floating_point()) return set(v->get());
    if (const auto* v = node->as_integer()) return set(static_cast<double>(v->get()));
    if (const auto* v = node->as_string()) {
      try {
        return set(parse_number(v->get()));
      } catch (const std::exception&) {
      }
    }
    problem(key, "expected a number");
  }
  void get(const char* key, double& out) { get_number(key, [&](double v) { out = v; }); }
  void get(const char* key, std::optional<double>& out) { get_number(key, [&](double v) { out = v; }); }
  void get(const char* key, int& out) { get_integer(key, [&](long v) { out = static_cast<int>(v); }); }
  void get(const char* key, long& out) { get_integer(key, [&](long v) { out = v; }); }
  void get(const char* key, bool& out) {
    const auto* node = take(key);
    if (!node) return;
    if (const auto* v = node->as_boolean()) {
      out = v->get();
      return;
    }
    problem(key, "expected true or false");
  }
  void get(const char* key, std::string& out) {
    const auto* node = take(key);
    if (!node) return;
    if (const auto* v = node->as_string()) {
      out = v->get();
      return;
    }
    problem(key, "expected a string");
  }
  template <class T, class Parse>
  void get_enum(const char* key, T& out, Parse&& parse) {
    std::string s;
    if (!t_.contains(key)) return;
    get(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const std::exception& ex) {
      problem(key, ex.what());
    }
  }

  void mark(const char* key) { seen_[key] = true; }

  /// Reports every key not consumed so far.
  void finish() {
    for (const auto& [k, v] : t_) {
      const std::string key(k.str());
      if (!seen_.count(key)) problems_.push_back("unknown key '" + prefix_ + key + "'");
    }
  }

  void problem(const std::string& key, const std::string& what) { problems_.push_back(prefix_ + key + ": " + what); }

 private:
  template <class Fn>
  void get_integer(const char* key, Fn&& set) {
    const auto* node = take(key);
    if (!node) return;
    if (const auto* v = node->as_integer()) return set(static_cast<long>(v->get()));
    problem(key, "expected an integer");
  }
  const toml::node* take(const char* key) {
    seen_[key] = true;
    return t_.get(key);
  }

  const toml::table& t_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::map<std::string, bool> seen_;
};

}  // namespace detail

/// Checks value ranges and combinations; throws ConfigError listing every problem.
inline void validate(const RunConfig& c, std::vector<std::string> problems = {}) {
  if (c.uses_case() == !c.mesh_path.empty()) problems.push_back("give exactly one of 'case' and 'mesh.path'");
  if (c.uses_case()) {
    bool known = false;
    for (const auto& n : case_names()) known |= n == c.case_name;
    if (!known) problems.push_back("case: unknown case '" + c.case_name + "'");
  } else if (!c.mesh_path.empty()) {
    if (!c.t_end && c.max_steps < 0) problems.push_back("mesh runs need 't_end' or 'max_steps'");
    for (const auto& [tag, kind] : c.boundaries) {
      try {
        if (bc_kind_from_string(kind) == BcKind::periodic) problems.push_back("boundary." + tag + ": periodic is set by the mesh");
      } catch (const std::exception& ex) {
        problems.push_back("boundary." + tag + ": " + ex.what());
      }
    }
    if (!(c.init_rho > 0.0) || !(c.init_p > 0.0)) problems.push_back("initial: rho and p must be positive");
  }
  if (c.p < 1 || c.p > 4) problems.push_back("p: must be in 1..4");
  if (c.h < 0.0 || !std::isfinite(c.h)) problems.push_back("h: must be positive");
  if (!(c.mach >= 1.0)) problems.push_back("mach: must be at least 1");
  if (c.level < 1) problems.push_back("level: must be at least 1");
  if (!(c.safety > 0.0 && c.safety <= 1.0)) problems.push_back("safety: must be in (0, 1]");
  if (c.t_end && !(*c.t_end >= 0.0)) problems.push_back("t_end: must be non-negative");
  if (!(c.gas.gamma > 1.0)) problems.push_back("gas.gamma: must exceed 1");
  if (c.bound && !std::isfinite(*c.bound)) problems.push_back("limiter.bound: must be finite");
  if (!(c.rho_floor > 0.0)) problems.push_back("limiter.rho_floor: must be positive");
  if (c.cadence < 0) problems.push_back("output.cadence: must be non-negative");
  if (c.threads < 0) problems.push_back("threads: must be non-negative");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

/// Reads a configuration from TOML text into `c` (keys absent from the text keep their
/// current values). Unknown keys, bad values and bad combinations are all reported together.
inline void read_config(const std::string& text, RunConfig& c, const std::string& source = "<config>") {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& ex) {
    std::ostringstream msg;
    msg << source << ":" << ex.source().begin.line << ": " << ex.description();
    throw ConfigError({msg.str()});
  }
  std::vector<std::string> problems;
  detail::TableReader top(root, "", problems);
  top.get("case", c.case_name);
  top.get("p", c.p);
  top.get("h", c.h);
  top.get("mach", c.mach);
  top.get("level", c.level);
  top.get_enum("scheme", c.scheme, scheme_from_string);
  top.get("safety", c.safety);
  top.get("t_end", c.t_end);
  top.get("max_steps", c.max_steps);
  top.get("per_element_cfl", c.per_element_cfl);
  top.get("threads", c.threads);

  auto section = [&](const char* name, auto&& body) {
    top.mark(name);
    const auto* node = root.get(name);
    if (!node) return;
    const auto* t = node->as_table();
    if (!t) {
      problems.push_back(std::string(name) + ": expected a table");
      return;
    }
    detail::TableReader r(*t, std::string(name) + ".", problems);
    body(r, *t);
    r.finish();
  };
  section("gas", [&](detail::TableReader& r, const toml::table&) {
    r.get("gamma", c.gas.gamma);
    r.get("s_ref", c.gas.s_ref);
  });
  section("limiter", [&](detail::TableReader& r, const toml::table&) {
    r.get("enabled", c.limiter);
    std::optional<BoundStrategy> strategy;
    r.get_enum("strategy", strategy, [](const std::string& s) { return std::optional(bound_strategy_from_string(s)); });
    if (strategy) c.strategy = strategy;
    r.get("bound", c.bound);
    r.get_enum("mean_violation", c.mean_violation, mean_violation_from_string);
    r.get("rho_floor", c.rho_floor);
  });
  section("mesh", [&](detail::TableReader& r, const toml::table&) { r.get("path", c.mesh_path); });
  section("boundary", [&](detail::TableReader& r, const toml::table& t) {
    for (const auto& [k, v] : t) {
      std::string kind;
      const std::string key(k.str());
      r.get(key.c_str(), kind);
      if (!kind.empty()) c.boundaries[key] = kind;
    }
  });
  section("initial", [&](detail::TableReader& r, const toml::table&) {
    r.get("rho", c.init_rho);
    r.get("u", c.init_u);
    r.get("v", c.init_v);
    r.get("p", c.init_p);
  });
  section("output", [&](detail::TableReader& r, const toml::table&) {
    r.get("directory", c.output_dir);
    r.get("cadence", c.cadence);
    r.get("vtk", c.vtk);
  });
  top.finish();
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open configuration file"});
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  read_config(ss.str(), c, path);
  return c;
}

/// Worker count: EBDG_NUM_THREADS when set, else the configured value (0: runtime default).
inline int resolve_threads(const RunConfig& c) {
  if (const char* env = std::getenv("EBDG_NUM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 0) throw ConfigError({"EBDG_NUM_THREADS: expected a non-negative integer"});
    return static_cast<int>(n);
  }
  return c.threads;
}

inline CaseParams case_params(const RunConfig& c) {
  CaseParams prm;
  prm.p = c.p;
  prm.h = c.h;
  prm.mach = c.mach;
  prm.level = c.level;
  prm.gas = c.gas;
  prm.scheme = c.scheme;
  prm.safety = c.safety;
  prm.strategy = c.strategy;
  prm.entropy_bound = c.bound;
  return prm;
}

/// Copies the run-level settings of the configuration over a case's defaults.
inline void apply_run_settings(const RunConfig& c, RunOptions& opt) {
  if (c.t_end) opt.t_end = *c.t_end;
  if (c.max_steps >= 0) opt.max_steps = c.max_steps;
  opt.per_element_cfl = c.per_element_cfl;
  opt.limiter.enabled = c.limiter;
  opt.limiter.mean_violation = c.mean_violation;
  opt.limiter.rho_floor = c.rho_floor;
}

}  // namespace ebdg
