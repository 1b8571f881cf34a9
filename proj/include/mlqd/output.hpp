/**
 * @file output.hpp
 * @brief CSV outputs: profiles, per-step stats, run totals, convergence
 *        history.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "cycles.hpp"
#include "error.hpp"

namespace mlqd {

inline const char *profiles_header() { return "time_ns,x_cm,T_keV,E_total"; }
inline const char *stats_header() { return "step,t_ns,M_ti,M_c,M_lo"; }
inline const char *totals_header() { return "cycle,n_grids,grids,lmax,N_ti,N_c,N_lo"; }
inline const char *conv_hist_header() { return "step,t_ns,s,l,k,dT_inf"; }

/// Table row such as "V,2,256;1,4,365,1547,397579".
inline std::string totals_row(const RunConfig &c, const RunTotals &t) {
  const std::vector<int> g = c.effective_grids();
  return std::string(to_string(c.cycle)) + "," + std::to_string(g.size()) + "," +
         detail::join(g, ";") + "," + std::to_string(c.lmax) + "," + std::to_string(t.N_ti) +
         "," + std::to_string(t.N_c) + "," + std::to_string(t.N_lo);
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path &p, const char *header) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  f << header << "\n";
  return f;
}

inline void close_csv(std::ofstream &f, const std::filesystem::path &p) {
  f.close();
  if (!f) throw IoError("error writing '" + p.string() + "'");
}

} // namespace detail

/// Writes stats.csv, totals.csv and conv_hist.csv; profiles.csv only when
/// the trajectory has snapshots.
inline void write_outputs(const Trajectory &traj, const RunConfig &config,
                          const std::string &out_dir) {
  namespace fs = std::filesystem;
  using detail::format_double;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + out_dir + "'");

  if (!traj.snapshots.empty()) {
    const fs::path p = dir / "profiles.csv";
    auto f = detail::open_csv(p, profiles_header());
    for (const auto &s : traj.snapshots)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        f << format_double(s.t) << "," << format_double(s.x[i]) << "," << format_double(s.T[i])
          << "," << format_double(s.E_total[i]) << "\n";
    detail::close_csv(f, p);
  }
  {
    const fs::path p = dir / "stats.csv";
    auto f = detail::open_csv(p, stats_header());
    for (const auto &s : traj.steps)
      f << s.step << "," << format_double(s.t) << "," << s.M_ti << "," << s.M_c << "," << s.M_lo
        << "\n";
    detail::close_csv(f, p);
  }
  {
    const fs::path p = dir / "totals.csv";
    auto f = detail::open_csv(p, totals_header());
    f << totals_row(config, traj.totals) << "\n";
    detail::close_csv(f, p);
  }
  {
    const fs::path p = dir / "conv_hist.csv";
    auto f = detail::open_csv(p, conv_hist_header());
    for (const auto &r : traj.history)
      f << r.step << "," << format_double(r.t) << "," << r.s << "," << r.l << "," << r.k << ","
        << format_double(r.dT_inf) << "\n";
    detail::close_csv(f, p);
  }
}

} // namespace mlqd
