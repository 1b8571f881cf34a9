/**
 * @file cycles.hpp
 * @brief Outer transport iterations and inner multigrid low-order cycles,
 *        cycle schedules, convergence tests and iteration accounting.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "grey.hpp"
#include "grids.hpp"
#include "loqd.hpp"
#include "moments.hpp"
#include "opacity_table.hpp"
#include "problem.hpp"
#include "transport.hpp"

namespace mlqd {

enum class CycleKind { V, W, F, Custom };

inline const char *to_string(CycleKind k) {
  switch (k) {
  case CycleKind::V: return "V";
  case CycleKind::W: return "W";
  case CycleKind::F: return "F";
  case CycleKind::Custom: return "custom";
  }
  return "?";
}

inline CycleKind parse_cycle_kind(const std::string &s) {
  if (s == "V" || s == "v") return CycleKind::V;
  if (s == "W" || s == "w") return CycleKind::W;
  if (s == "F" || s == "f") return CycleKind::F;
  if (s == "custom") return CycleKind::Custom;
  throw ConfigError("cycle: unknown kind '" + s + "' (expected V, W, F or custom)");
}

/**
 * Grids visited after each grey temperature evaluation. Grid indices are
 * 1-based: 1 is the fine grid, n_grids the grey grid; visits lie strictly
 * between. At most l_max cycles run per transport iteration.
 */
struct CycleSchedule {
  CycleKind kind = CycleKind::V;
  std::size_t n_grids = 2;
  std::vector<int> visits;
  int l_max = 4;

  static CycleSchedule make(CycleKind kind, std::size_t n_grids, int l_max,
                            std::vector<int> custom = {}) {
    CycleSchedule s;
    s.kind = kind;
    s.n_grids = n_grids;
    s.l_max = l_max;
    switch (kind) {
    case CycleKind::V: break;
    case CycleKind::W:
      if (n_grids >= 3) s.visits = {2};
      break;
    case CycleKind::F:
      for (int g = static_cast<int>(n_grids) - 1; g >= 2; --g) s.visits.push_back(g);
      break;
    case CycleKind::Custom: s.visits = std::move(custom); break;
    }
    s.validate();
    return s;
  }

  void validate() const {
    if (n_grids < 2) throw ConfigError("cycle: need at least two grids");
    if (l_max < 1) throw ConfigError("cycle: lmax must be >= 1");
    for (int g : visits)
      if (g <= 1 || g >= static_cast<int>(n_grids))
        throw ConfigError("cycle: visited grid " + std::to_string(g) + " outside (1, " +
                          std::to_string(n_grids) + ")");
  }

  [[nodiscard]] std::size_t K() const { return visits.size(); }

  /// Low-order solves per cycle: n^1 + sum_k n^{gamma_k} + (K + 1).
  [[nodiscard]] long cost(const std::vector<std::size_t> &counts) const {
    long c = static_cast<long>(counts.front());
    for (int g : visits) c += static_cast<long>(counts[static_cast<std::size_t>(g - 1)]);
    return c + static_cast<long>(K()) + 1;
  }
};

struct ConvergenceCriteria {
  double eps = 1e-6;        ///< outer relative tolerance
  double eps_inner = 1e-7;  ///< inner relative tolerance
  int max_outer = 200;

  void validate() const {
    if (!(eps_inner > 0.0) || !(eps_inner <= eps) || !(eps < 1.0))
      throw ConfigError("criteria: need 0 < eps_inner <= eps < 1");
    if (max_outer < 1) throw ConfigError("criteria: max_outer must be >= 1");
  }
};

struct SolverOptions {
  int n_newton = 1;
};

struct StepStats {
  int step = 0;
  double t = 0.0;
  long M_ti = 0;
  long M_c = 0;
  long M_lo = 0;
};

struct RunTotals {
  long N_ti = 0;
  long N_c = 0;
  long N_lo = 0;

  void add(const StepStats &s) {
    N_ti += s.M_ti;
    N_c += s.M_c;
    N_lo += s.M_lo;
  }
};

/// l and k are -1 on the row that closes transport iteration s.
struct ConvergenceRecord {
  int step = 0;
  double t = 0.0;
  int s = 0;
  int l = -1;
  int k = -1;
  double dT_inf = 0.0;
};

struct SolverState {
  int step = 0;
  double time = 0.0;
  std::vector<double> T;
  AngularIntensity intensity;
  ClosureData closures;
  MomentField fine;  ///< fine-grid low-order moments
  MomentField grey;  ///< last grey moments
};

struct StepResult {
  SolverState state;
  StepStats stats;
  EnergyBalance balance;
  std::vector<ConvergenceRecord> history;
};

namespace detail {

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double inf_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace detail

class MlqdSolver {
 public:
  MlqdSolver(Problem problem, const std::vector<int> &grid_counts, CycleSchedule schedule,
             ConvergenceCriteria criteria = {}, SolverOptions options = {})
      : pr_(std::move(problem)), schedule_(std::move(schedule)), criteria_(criteria),
        options_(options) {
    pr_.validate();
    hierarchy_ = build_hierarchy(pr_.fine_grid, grid_counts);
    if (schedule_.n_grids != hierarchy_.size())
      throw ConfigError("cycle: schedule has " + std::to_string(schedule_.n_grids) +
                        " grids, hierarchy has " + std::to_string(hierarchy_.size()));
    schedule_.validate();
    criteria_.validate();
    if (options_.n_newton < 1) throw ConfigError("solver: n_newton must be >= 1");
    inflow_ = inflow_moments(pr_.I0.inflow(), pr_.quadrature, pr_.constants);
  }

  [[nodiscard]] const Problem &problem() const { return pr_; }
  [[nodiscard]] const FrequencyGridHierarchy &hierarchy() const { return hierarchy_; }
  [[nodiscard]] const CycleSchedule &schedule() const { return schedule_; }
  [[nodiscard]] const ConvergenceCriteria &criteria() const { return criteria_; }
  [[nodiscard]] long cost_per_cycle() const { return schedule_.cost(hierarchy_.group_counts()); }

  /// Isotropic start: f = 1/3, C = -+1/2, F = 0.
  [[nodiscard]] SolverState initial_state() const {
    SolverState s;
    s.T = pr_.T0;
    s.intensity = pr_.I0;
    s.closures = ClosureData(pr_.fine_grid.n_groups(), pr_.mesh.n_cells());
    s.fine = compute_moments(pr_.I0, pr_.quadrature, pr_.constants);
    std::fill(s.fine.F.data().begin(), s.fine.F.data().end(), 0.0);
    s.grey = sum_moments(s.fine, {IndexRange{0, s.fine.n_intervals()}});
    return s;
  }

  [[nodiscard]] StepResult run_time_step(const SolverState &prev, double dt) const {
    if (!(dt > 0.0)) throw ConfigError("run_time_step: dt must be positive");
    StepContext ctx(*this, prev, dt);
    StepResult res;
    res.stats.step = prev.step + 1;
    res.stats.t = prev.time + dt;
    const int step = res.stats.step;

    std::vector<double> T = prev.T;
    ClosureData closures = prev.closures;
    AngularIntensity intensity = prev.intensity;
    MomentField fine = prev.fine;
    MomentField grey = prev.grey;
    std::vector<double> E_old(prev.grey.E.row(0).begin(), prev.grey.E.row(0).end());
    double last_dT = 0.0;

    for (int s = 0;; ++s) {
      if (s >= criteria_.max_outer) {
        std::ostringstream msg;
        msg << "time step " << step << " (t = " << res.stats.t << " ns) did not converge in "
            << criteria_.max_outer << " transport iterations; last |dT|_inf = " << last_dT;
        throw ConvergenceError(msg.str());
      }
      std::vector<double> T_r(T.size());
      for (std::size_t i = 0; i < T.size(); ++i)
        T_r[i] = radiation_temperature(grey.E(0, i), pr_.constants);
      OpacityTable opac = evaluate_opacities(pr_.fine_grid, T, T_r, pr_.opacity, pr_.constants);
      if (s > 0) {
        ++res.stats.M_ti;
        intensity = transport_solve(opac, prev.intensity, dt, pr_.mesh, pr_.quadrature,
                                    pr_.constants);
        closures = compute_qd_factors(intensity, pr_.quadrature);
      }

      FrechetHistory hist;
      std::vector<double> T_tilde = T;
      for (int l = 0; l < schedule_.l_max; ++l) {
        CycleOutput out = run_cycle(ctx, T_tilde, T_r, closures, hist,
                                    l == 0 ? &opac : nullptr, {step, res.stats.t, s, l},
                                    res.history);
        ++res.stats.M_c;
        res.stats.M_lo += out.solves;
        const bool t_ok = detail::inf_diff(out.T, T_tilde) <=
                          criteria_.eps_inner * detail::inf_norm(out.T);
        const bool e_ok = detail::inf_diff(out.grey.E.row(0), grey.E.row(0)) <=
                          criteria_.eps_inner * detail::inf_norm(out.grey.E.row(0));
        T_tilde = std::move(out.T);
        fine = std::move(out.fine);
        grey = std::move(out.grey);
        if (t_ok && e_ok) break;
      }

      const std::vector<double> E_new(grey.E.row(0).begin(), grey.E.row(0).end());
      last_dT = detail::inf_diff(T_tilde, T);
      const double dE = detail::inf_diff(E_new, E_old);
      res.history.push_back({step, res.stats.t, s, -1, -1, last_dT});
      T = std::move(T_tilde);
      E_old = E_new;
      if (last_dT <= criteria_.eps * detail::inf_norm(T) &&
          dE <= criteria_.eps * detail::inf_norm(E_new))
        break;
    }

    res.balance =
        energy_balance(T, prev.T, grey, ctx.grey_prev.moments, dt, pr_.mesh, pr_.material);
    res.state.step = step;
    res.state.time = res.stats.t;
    res.state.T = std::move(T);
    res.state.intensity = std::move(intensity);
    res.state.closures = std::move(closures);
    res.state.fine = std::move(fine);
    res.state.grey = std::move(grey);
    return res;
  }

 private:
  struct StepContext {
    const SolverState &prev;
    double dt;
    GreyPrevious grey_prev;
    std::vector<std::optional<MomentField>> level_prev;

    StepContext(const MlqdSolver &solver, const SolverState &p, double dt_)
        : prev(p), dt(dt_), level_prev(solver.hierarchy_.size()) {
      grey_prev.T = p.T;
      grey_prev.moments = sum_moments(p.fine, {IndexRange{0, p.fine.n_intervals()}});
      for (int g : solver.schedule_.visits) {
        const auto lev = static_cast<std::size_t>(g - 1);
        if (!level_prev[lev]) level_prev[lev] = restrict_moments(p.fine, solver.hierarchy_, lev);
      }
    }
  };

  struct CycleOutput {
    std::vector<double> T;
    MomentField fine;
    MomentField grey;
    long solves = 0;
  };

  struct CycleTag {
    int step;
    double t;
    int s;
    int l;
  };

  struct GreyStage {
    std::vector<double> T;
    MomentField moments;
  };

  GreyStage grey_stage(const StepContext &ctx, const LoqdCoefficients &level_co,
                       const MomentField &level_sol, std::span<const double> T_stage,
                       FrechetHistory &hist) const {
    const GreyCoefficients grey = form_grey(level_sol, level_co, pr_.constants);
    const FrechetDiagonal D =
        frechet_advance(hist, T_stage, grey.sigma_E.row(0), pr_.constants.T_floor);
    const std::vector<double> E_star = level_sol.total_E();
    GreyResult r = solve_grey_meb(grey, D, ctx.grey_prev, T_stage, E_star, ctx.dt,
                                  options_.n_newton, pr_.mesh, pr_.material, pr_.constants);
    return {std::move(r.T), std::move(r.moments)};
  }

  CycleOutput run_cycle(const StepContext &ctx, const std::vector<double> &T_in,
                        const std::vector<double> &T_r, const ClosureData &closures,
                        FrechetHistory &hist, const OpacityTable *opac_in, CycleTag tag,
                        std::vector<ConvergenceRecord> &history) const {
    const PhysicalConstants &k = pr_.constants;
    CycleOutput out;
    std::optional<OpacityTable> opac_local;
    if (!opac_in) opac_local = evaluate_opacities(pr_.fine_grid, T_in, T_r, pr_.opacity, k);
    const OpacityTable &opac = opac_in ? *opac_in : *opac_local;

    const LoqdCoefficients fine_co =
        build_fine_coefficients(opac, closures, inflow_, pr_.mesh, k);
    out.fine = solve_level(fine_co, ctx.prev.fine, ctx.dt, pr_.mesh, k);
    out.solves += static_cast<long>(fine_co.n_intervals());

    GreyStage st = grey_stage(ctx, fine_co, out.fine, T_in, hist);
    ++out.solves;
    history.push_back({tag.step, tag.t, tag.s, tag.l, 0, detail::inf_diff(st.T, T_in)});

    for (std::size_t kk = 0; kk < schedule_.K(); ++kk) {
      const auto lev = static_cast<std::size_t>(schedule_.visits[kk] - 1);
      const OpacityTable opac_k =
          evaluate_opacities(pr_.fine_grid, st.T, T_r, pr_.opacity, k);
      const LoqdCoefficients fine_co_k =
          build_fine_coefficients(opac_k, closures, inflow_, pr_.mesh, k);
      const LoqdCoefficients lev_co = restrict_coefficients(out.fine, fine_co_k, hierarchy_, lev, k);
      const MomentField lev_sol = solve_level(lev_co, *ctx.level_prev[lev], ctx.dt, pr_.mesh, k);
      out.solves += static_cast<long>(lev_co.n_intervals());
      GreyStage next = grey_stage(ctx, lev_co, lev_sol, st.T, hist);
      ++out.solves;
      history.push_back({tag.step, tag.t, tag.s, tag.l, static_cast<int>(kk + 1),
                         detail::inf_diff(next.T, st.T)});
      st = std::move(next);
    }
    out.T = std::move(st.T);
    out.grey = std::move(st.moments);
    return out;
  }

  Problem pr_;
  FrequencyGridHierarchy hierarchy_;
  CycleSchedule schedule_;
  ConvergenceCriteria criteria_;
  SolverOptions options_;
  InflowMoments inflow_;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> T;
  std::vector<double> E_total;
};

struct Trajectory {
  std::vector<StepStats> steps;
  RunTotals totals;
  std::vector<ConvergenceRecord> history;
  std::vector<EnergyBalance> balances;
  std::vector<Snapshot> snapshots;
  SolverState final_state;
};

inline Snapshot take_snapshot(const SolverState &s, const SpatialMesh &mesh) {
  Snapshot snap;
  snap.t = s.time;
  for (std::size_t i = 0; i < mesh.n_cells(); ++i) snap.x.push_back(mesh.center(i));
  snap.T = s.T;
  snap.E_total = s.fine.total_E();
  return snap;
}

/// Fixed-dt run over round(t_end/dt) steps. A snapshot is taken at the first
/// step within dt/2 of each requested time (t = 0 gives the initial state).
inline Trajectory run_simulation(const MlqdSolver &solver, double dt, double t_end,
                                 const std::vector<double> &snapshot_times = {},
                                 const std::function<void(const StepResult &)> &on_step = {}) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("run_simulation: dt and t_end must be positive");
  const long n_steps = std::lround(t_end / dt);
  if (n_steps < 1) throw ConfigError("run_simulation: t_end shorter than dt");
  Trajectory traj;
  std::vector<bool> taken(snapshot_times.size(), false);
  auto maybe_snap = [&](const SolverState &s) {
    for (std::size_t q = 0; q < snapshot_times.size(); ++q)
      if (!taken[q] && std::abs(s.time - snapshot_times[q]) <= 0.5 * dt) {
        traj.snapshots.push_back(take_snapshot(s, solver.problem().mesh));
        taken[q] = true;
      }
  };
  SolverState state = solver.initial_state();
  maybe_snap(state);
  for (long j = 0; j < n_steps; ++j) {
    StepResult r = solver.run_time_step(state, dt);
    r.state.time = static_cast<double>(j + 1) * dt;
    r.stats.t = r.state.time;
    traj.steps.push_back(r.stats);
    traj.totals.add(r.stats);
    traj.history.insert(traj.history.end(), r.history.begin(), r.history.end());
    traj.balances.push_back(r.balance);
    if (on_step) on_step(r);
    state = std::move(r.state);
    maybe_snap(state);
  }
  traj.final_state = std::move(state);
  return traj;
}

} // namespace mlqd
