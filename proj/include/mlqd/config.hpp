/**
 * @file config.hpp
 * @brief Run configuration: key = value files, command-line overrides and
 *        validation.
 *
 * File format: one `key = value` pair per line, `#` starts a comment. Lists
 * are comma separated. Keys:
 *   problem, groups, grids, cycle, schedule, lmax, cells, length, dirs,
 *   dt, tend, eps, eps_inner, max_outer, newton, out, snapshots, deterministic
 */
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "cycles.hpp"
#include "error.hpp"
#include "problem.hpp"

namespace mlqd {

struct RunConfig {
  std::string problem = "fc";
  int groups = 256;
  std::vector<int> grids;       ///< empty means {groups, 1}
  CycleKind cycle = CycleKind::V;
  std::vector<int> schedule;    ///< custom visits, 1-based grid indices
  int lmax = 4;
  int cells = 10;
  double length = 4.0;
  int dirs = 16;
  double dt = 2e-2;
  double tend = 3.0;
  double eps = 1e-6;
  double eps_inner = 1e-7;
  int max_outer = 200;
  int newton = 1;
  std::string out = "out";
  std::vector<double> snapshots{0.2, 0.4, 0.6, 1.0, 2.0, 3.0};
  bool deterministic = true;

  [[nodiscard]] std::vector<int> effective_grids() const {
    return grids.empty() ? std::vector<int>{groups, 1} : grids;
  }

  bool operator==(const RunConfig &) const = default;
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  const std::string t = trim(s);
  if (t.empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] inline void bad_value(const std::string &key, const std::string &value) {
  throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
}

template <class T> T parse_number(const std::string &key, const std::string &value) {
  const std::string v = trim(value);
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, value);
  return out;
}

template <class T>
std::vector<T> parse_number_list(const std::string &key, const std::string &value) {
  std::vector<T> out;
  for (const auto &item : split_list(value)) out.push_back(parse_number<T>(key, item));
  return out;
}

inline bool parse_bool(const std::string &key, const std::string &value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, value);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T> std::string join(const std::vector<T> &v, const char *sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) out += format_double(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

} // namespace detail

/// Sets one key; throws ConfigError naming the key on unknown keys or
/// unparsable values.
inline void apply_key(RunConfig &c, const std::string &key_in, const std::string &value) {
  using namespace detail;
  const std::string key = trim(key_in);
  if (key == "problem") c.problem = trim(value);
  else if (key == "groups") c.groups = parse_number<int>(key, value);
  else if (key == "grids") c.grids = parse_number_list<int>(key, value);
  else if (key == "cycle") {
    try {
      c.cycle = parse_cycle_kind(trim(value));
    } catch (const ConfigError &) {
      bad_value(key, value);
    }
  } else if (key == "schedule") c.schedule = parse_number_list<int>(key, value);
  else if (key == "lmax") c.lmax = parse_number<int>(key, value);
  else if (key == "cells") c.cells = parse_number<int>(key, value);
  else if (key == "length") c.length = parse_number<double>(key, value);
  else if (key == "dirs") c.dirs = parse_number<int>(key, value);
  else if (key == "dt") c.dt = parse_number<double>(key, value);
  else if (key == "tend") c.tend = parse_number<double>(key, value);
  else if (key == "eps") c.eps = parse_number<double>(key, value);
  else if (key == "eps_inner") c.eps_inner = parse_number<double>(key, value);
  else if (key == "max_outer") c.max_outer = parse_number<int>(key, value);
  else if (key == "newton") c.newton = parse_number<int>(key, value);
  else if (key == "out") c.out = trim(value);
  else if (key == "snapshots") c.snapshots = parse_number_list<double>(key, value);
  else if (key == "deterministic") c.deterministic = parse_bool(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

/// Applies key = value text on top of `base`.
inline RunConfig parse_config_text(const std::string &text, RunConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_key(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

inline RunConfig parse_config_file(const std::string &path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

/// Serializes every key; parse_config_text(to_config_text(c)) == c.
inline std::string to_config_text(const RunConfig &c) {
  using detail::format_double;
  using detail::join;
  std::ostringstream o;
  o << "problem = " << c.problem << "\n"
    << "groups = " << c.groups << "\n"
    << "grids = " << join(c.grids) << "\n"
    << "cycle = " << to_string(c.cycle) << "\n"
    << "schedule = " << join(c.schedule) << "\n"
    << "lmax = " << c.lmax << "\n"
    << "cells = " << c.cells << "\n"
    << "length = " << format_double(c.length) << "\n"
    << "dirs = " << c.dirs << "\n"
    << "dt = " << format_double(c.dt) << "\n"
    << "tend = " << format_double(c.tend) << "\n"
    << "eps = " << format_double(c.eps) << "\n"
    << "eps_inner = " << format_double(c.eps_inner) << "\n"
    << "max_outer = " << c.max_outer << "\n"
    << "newton = " << c.newton << "\n"
    << "out = " << c.out << "\n"
    << "snapshots = " << join(c.snapshots) << "\n"
    << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
  return o.str();
}

inline CycleSchedule make_schedule(const RunConfig &c) {
  const std::size_t n = c.effective_grids().size();
  if (c.cycle == CycleKind::Custom && c.schedule.empty())
    throw ConfigError("config key 'schedule': required for cycle = custom");
  try {
    return CycleSchedule::make(c.cycle, n, c.lmax, c.schedule);
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("config key 'schedule': ") + e.what());
  }
}

/// Checks every constraint before any solve; the message names the key.
inline void validate(const RunConfig &c) {
  auto fail = [](const std::string &key, const std::string &why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (c.problem != "fc") fail("problem", "only 'fc' is available");
  if (c.groups < 3) fail("groups", "must be >= 3");
  const std::vector<int> g = c.effective_grids();
  if (g.size() < 2) fail("grids", "need at least two grids");
  if (g.front() != c.groups) fail("grids", "first count must equal groups");
  if (g.back() != 1) fail("grids", "last count must be 1");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] < g[i - 1])) fail("grids", "counts must be strictly decreasing");
  if (c.lmax < 1) fail("lmax", "must be >= 1");
  if (c.cells < 1) fail("cells", "must be >= 1");
  if (!(c.length > 0.0)) fail("length", "must be positive");
  if (c.dirs < 2 || c.dirs % 2) fail("dirs", "must be even and >= 2");
  if (!(c.dt > 0.0)) fail("dt", "must be positive");
  if (!(c.tend >= c.dt)) fail("tend", "must be >= dt");
  if (!(c.eps > 0.0 && c.eps < 1.0)) fail("eps", "must lie in (0, 1)");
  if (!(c.eps_inner > 0.0 && c.eps_inner <= c.eps)) fail("eps_inner", "must lie in (0, eps]");
  if (c.max_outer < 1) fail("max_outer", "must be >= 1");
  if (c.newton < 1) fail("newton", "must be >= 1");
  if (c.out.empty()) fail("out", "must not be empty");
  for (double t : c.snapshots)
    if (!(t >= 0.0)) fail("snapshots", "times must be >= 0");
  if (c.cycle != CycleKind::Custom && !c.schedule.empty())
    fail("schedule", "only allowed with cycle = custom");
  make_schedule(c);
}

struct ParsedArgs {
  RunConfig config;
  bool help = false;
  std::string help_text;
};

/// Command line: --config FILE is read first; other flags override it.
inline ParsedArgs parse_args(int argc, const char *const *argv) {
  CLI::App app{"Multigroup thermal radiative transfer with multilevel quasidiffusion"};
  std::string config_path, cycle, grids, schedule, out, snapshots;
  std::optional<int> lmax, groups, cells;
  std::optional<double> dt, tend;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--cycle", cycle, "cycle kind: V, W, F or custom");
  app.add_option("--grids", grids, "group counts of the hierarchy, e.g. 256,32,1");
  app.add_option("--schedule", schedule, "custom schedule, 1-based grid indices");
  app.add_option("--lmax", lmax, "max inner cycles per transport iteration");
  app.add_option("--dt", dt, "time step [ns]");
  app.add_option("--tend", tend, "end time [ns]");
  app.add_option("--groups", groups, "number of fine groups");
  app.add_option("--cells", cells, "number of spatial cells");
  app.add_option("--out", out, "output directory");
  app.add_option("--snapshots", snapshots, "profile times [ns], comma separated");
  app.add_option("--set", sets, "extra key=value pairs")->take_all();

  ParsedArgs res;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    res.help = true;
    res.help_text = app.help();
    return res;
  } catch (const CLI::ParseError &e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }

  RunConfig c;
  if (!config_path.empty()) c = parse_config_file(config_path, c);
  for (const auto &kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("command line: --set expects key=value");
    apply_key(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (groups) c.groups = *groups;
  if (!grids.empty()) apply_key(c, "grids", grids);
  if (!cycle.empty()) apply_key(c, "cycle", cycle);
  if (!schedule.empty()) apply_key(c, "schedule", schedule);
  if (lmax) c.lmax = *lmax;
  if (dt) c.dt = *dt;
  if (tend) c.tend = *tend;
  if (cells) c.cells = *cells;
  if (!out.empty()) c.out = out;
  if (app.count("--snapshots")) apply_key(c, "snapshots", snapshots);
  validate(c);
  res.config = std::move(c);
  return res;
}

inline Problem make_problem(const RunConfig &c) {
  FcParameters p;
  p.n_groups = c.groups;
  p.n_cells = c.cells;
  p.length = c.length;
  p.n_dirs = c.dirs;
  return fc_problem(p);
}

inline MlqdSolver make_solver(const RunConfig &c) {
  validate(c);
  ConvergenceCriteria crit;
  crit.eps = c.eps;
  crit.eps_inner = c.eps_inner;
  crit.max_outer = c.max_outer;
  SolverOptions opt;
  opt.n_newton = c.newton;
  return MlqdSolver(make_problem(c), c.effective_grids(), make_schedule(c), crit, opt);
}

} // namespace mlqd
