#include <cmath>

#include <gtest/gtest.h>

#include "mlqd/mlqd.hpp"

using namespace mlqd;

namespace {

Problem small_fc() { return fc_problem({16, 10, 4.0, 8, 1.0, 1e-3}); }

MlqdSolver make(const Problem &pr, const std::vector<int> &grids, CycleKind kind, int l_max,
                ConvergenceCriteria crit = {}) {
  return MlqdSolver(pr, grids, CycleSchedule::make(kind, grids.size(), l_max), crit);
}

std::vector<std::size_t> counts(std::initializer_list<std::size_t> c) { return c; }

} // namespace

TEST(CycleSchedule, VisitsPerKind) {
  EXPECT_TRUE(CycleSchedule::make(CycleKind::V, 3, 4).visits.empty());
  EXPECT_EQ(CycleSchedule::make(CycleKind::W, 3, 2).visits, (std::vector<int>{2}));
  EXPECT_TRUE(CycleSchedule::make(CycleKind::W, 2, 2).visits.empty());
  EXPECT_EQ(CycleSchedule::make(CycleKind::F, 5, 2).visits, (std::vector<int>{4, 3, 2}));
  EXPECT_EQ(CycleSchedule::make(CycleKind::Custom, 4, 1, {2, 3, 2}).K(), 3u);
}

TEST(CycleSchedule, Validation) {
  EXPECT_THROW(CycleSchedule::make(CycleKind::V, 1, 1), ConfigError);
  EXPECT_THROW(CycleSchedule::make(CycleKind::V, 2, 0), ConfigError);
  EXPECT_THROW(CycleSchedule::make(CycleKind::Custom, 3, 1, {3}), ConfigError);
  EXPECT_THROW(CycleSchedule::make(CycleKind::Custom, 3, 1, {1}), ConfigError);
  EXPECT_THROW(parse_cycle_kind("X"), ConfigError);
  EXPECT_EQ(parse_cycle_kind("f"), CycleKind::F);
  EXPECT_STREQ(to_string(CycleKind::W), "W");
}

TEST(CycleSchedule, CostPerCycle) {
  struct Row {
    CycleKind kind;
    std::vector<std::size_t> grids;
    long cost;
  };
  const std::vector<Row> rows{
      {CycleKind::V, counts({256, 1}), 257},
      {CycleKind::W, counts({256, 32, 1}), 290},
      {CycleKind::F, counts({256, 32, 16, 1}), 307},
      {CycleKind::F, counts({256, 32, 16, 4, 1}), 312},
      {CycleKind::F, counts({256, 128, 64, 32, 16, 1}), 501},
      {CycleKind::F, counts({256, 128, 32, 16, 8, 4, 1}), 450},
      {CycleKind::F, counts({256, 64, 32, 16, 4, 1}), 377},
      {CycleKind::F, counts({256, 64, 32, 16, 8, 4, 1}), 386},
  };
  for (const Row &r : rows)
    EXPECT_EQ(CycleSchedule::make(r.kind, r.grids.size(), 2).cost(r.grids), r.cost);
}

TEST(Criteria, Validation) {
  EXPECT_NO_THROW(ConvergenceCriteria{}.validate());
  EXPECT_THROW((ConvergenceCriteria{1e-6, 1e-5, 10}.validate()), ConfigError);
  EXPECT_THROW((ConvergenceCriteria{1e-6, 1e-7, 0}.validate()), ConfigError);
}

TEST(Solver, RejectsMismatchedSchedule) {
  EXPECT_THROW(MlqdSolver(small_fc(), {16, 4, 1}, CycleSchedule::make(CycleKind::V, 2, 2)),
               ConfigError);
  const MlqdSolver s = make(small_fc(), {16, 1}, CycleKind::V, 2);
  EXPECT_THROW(s.run_time_step(s.initial_state(), 0.0), ConfigError);
}

TEST(Solver, EquilibriumNeedsNoSweeps) {
  const double T = 0.4;
  const Problem pr = equilibrium_problem(T, 16, 6, 2.0, 8, OpacityModel::fleck_cummings(27.0), 0.02);
  const MlqdSolver s = make(pr, {16, 4, 1}, CycleKind::F, 3);
  const Trajectory tr = run_simulation(s, 0.05, 0.5);
  ASSERT_EQ(tr.steps.size(), 10u);
  for (const StepStats &st : tr.steps) {
    EXPECT_EQ(st.M_ti, 0);
    EXPECT_EQ(st.M_c, 1);
  }
  for (double t : tr.final_state.T) EXPECT_NEAR(t, T, 1e-10 * T);
  const double E_eq = pr.constants.a_R * std::pow(T, 4);
  for (double e : tr.final_state.fine.total_E()) EXPECT_NEAR(e, E_eq, 1e-10 * E_eq);
}

TEST(Solver, IterationAccounting) {
  const Problem pr = small_fc();
  for (auto [grids, kind] : {std::pair{std::vector<int>{16, 1}, CycleKind::V},
                             std::pair{std::vector<int>{16, 4, 1}, CycleKind::W},
                             std::pair{std::vector<int>{16, 8, 4, 2, 1}, CycleKind::F}}) {
    const MlqdSolver s = make(pr, grids, kind, 2);
    const Trajectory tr = run_simulation(s, 0.02, 0.1);
    EXPECT_EQ(tr.totals.N_lo, tr.totals.N_c * s.cost_per_cycle());
    long ti = 0, c = 0;
    for (const StepStats &st : tr.steps) {
      ti += st.M_ti;
      c += st.M_c;
      EXPECT_GE(st.M_ti, 1);
      EXPECT_LE(st.M_c, 2 * (st.M_ti + 1));
      EXPECT_GE(st.M_c, st.M_ti + 1);
    }
    EXPECT_EQ(ti, tr.totals.N_ti);
    EXPECT_EQ(c, tr.totals.N_c);
    long outer_rows = 0, inner_rows = 0;
    for (const ConvergenceRecord &r : tr.history) {
      if (r.l < 0) ++outer_rows;
      else {
        ++inner_rows;
        EXPECT_LE(r.k, static_cast<int>(s.schedule().K()));
      }
    }
    EXPECT_EQ(outer_rows, tr.totals.N_ti + static_cast<long>(tr.steps.size()));
    EXPECT_EQ(inner_rows, tr.totals.N_c * static_cast<long>(s.schedule().K() + 1));
  }
}

TEST(Solver, SingleCyclePerPassWhenLmaxIsOne) {
  const MlqdSolver s = make(small_fc(), {16, 4, 1}, CycleKind::F, 1);
  const Trajectory tr = run_simulation(s, 0.02, 0.1);
  for (const StepStats &st : tr.steps) EXPECT_EQ(st.M_c, st.M_ti + 1);
}

TEST(Solver, Deterministic) {
  const MlqdSolver s = make(small_fc(), {16, 4, 1}, CycleKind::W, 2);
  const Trajectory a = run_simulation(s, 0.02, 0.1);
  const Trajectory b = run_simulation(s, 0.02, 0.1);
  EXPECT_EQ(a.final_state.T, b.final_state.T);
  EXPECT_EQ(a.totals.N_lo, b.totals.N_lo);
  EXPECT_EQ(a.final_state.fine.E.data(), b.final_state.fine.E.data());
}

TEST(Solver, TwoGridStepMatchesDirectLoop) {
  const Problem pr = small_fc();
  const PhysicalConstants &k = pr.constants;
  const ConvergenceCriteria crit;
  const int l_max = 3;
  const double dt = 0.02;
  const MlqdSolver s = make(pr, {16, 1}, CycleKind::V, l_max, crit);
  const SolverState s0 = s.initial_state();
  const StepResult lib = s.run_time_step(s0, dt);

  auto max_diff = [](const std::vector<double> &a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
  auto max_abs = [](std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  };
  const InflowMoments inflow = inflow_moments(pr.I0.inflow(), pr.quadrature, k);
  const GreyPrevious gprev{s0.T, sum_moments(s0.fine, {IndexRange{0, 16}})};
  std::vector<double> T = s0.T;
  ClosureData closures = s0.closures;
  MomentField grey = s0.grey;
  std::vector<double> E_old(grey.E.row(0).begin(), grey.E.row(0).end());
  long sweeps = 0, cycles = 0;
  for (int pass = 0; pass < crit.max_outer; ++pass) {
    std::vector<double> T_r;
    for (std::size_t i = 0; i < T.size(); ++i) T_r.push_back(radiation_temperature(grey.E(0, i), k));
    const OpacityTable opac = evaluate_opacities(pr.fine_grid, T, T_r, pr.opacity, k);
    if (pass > 0) {
      ++sweeps;
      closures = compute_qd_factors(transport_solve(opac, pr.I0, dt, pr.mesh, pr.quadrature, k),
                                    pr.quadrature);
    }
    FrechetHistory hist;
    std::vector<double> T_tilde = T;
    for (int l = 0; l < l_max; ++l) {
      ++cycles;
      const OpacityTable o = evaluate_opacities(pr.fine_grid, T_tilde, T_r, pr.opacity, k);
      const LoqdCoefficients co = build_fine_coefficients(o, closures, inflow, pr.mesh, k);
      const MomentField fine = solve_level(co, s0.fine, dt, pr.mesh, k);
      const GreyCoefficients g = form_grey(fine, co, k);
      const FrechetDiagonal D = frechet_advance(hist, T_tilde, g.sigma_E.row(0), k.T_floor);
      const GreyResult r = solve_grey_meb(g, D, gprev, T_tilde, fine.total_E(), dt, 1, pr.mesh,
                                          pr.material, k);
      const bool t_ok = max_diff(r.T, T_tilde) <= crit.eps_inner * max_abs(r.T);
      const bool e_ok = max_diff(std::vector<double>(r.moments.E.row(0).begin(), r.moments.E.row(0).end()),
                                 grey.E.row(0)) <= crit.eps_inner * max_abs(r.moments.E.row(0));
      T_tilde = r.T;
      grey = r.moments;
      if (t_ok && e_ok) break;
    }
    const std::vector<double> E_new(grey.E.row(0).begin(), grey.E.row(0).end());
    const double dT = max_diff(T_tilde, T);
    const double dE = max_diff(E_new, E_old);
    T = T_tilde;
    E_old = E_new;
    if (dT <= crit.eps * max_abs(T) && dE <= crit.eps * max_abs(E_new)) break;
  }
  EXPECT_EQ(lib.stats.M_ti, sweeps);
  EXPECT_EQ(lib.stats.M_c, cycles);
  for (std::size_t i = 0; i < T.size(); ++i) EXPECT_NEAR(lib.state.T[i], T[i], 1e-14 * T[i]);
}

TEST(Solver, OuterCapRaisesConvergenceError) {
  const MlqdSolver s = make(small_fc(), {16, 1}, CycleKind::V, 2, {1e-6, 1e-7, 1});
  try {
    (void)s.run_time_step(s.initial_state(), 0.02);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError &e) {
    EXPECT_NE(std::string(e.what()).find("time step 1"), std::string::npos);
  }
}

TEST(Solver, EnergyBalancePerStep) {
  const MlqdSolver s = make(small_fc(), {16, 4, 1}, CycleKind::F, 2);
  const Trajectory tr = run_simulation(s, 0.02, 0.2);
  for (const EnergyBalance &b : tr.balances) EXPECT_LE(b.relative(), 1e-8);
}

TEST(Solver, TemperatureWaveEntersFromDrivenSide) {
  const MlqdSolver s = make(small_fc(), {16, 4, 1}, CycleKind::F, 2);
  const Trajectory tr = run_simulation(s, 0.02, 0.4);
  const std::vector<double> &T = tr.final_state.T;
  for (std::size_t i = 0; i + 1 < T.size(); ++i) EXPECT_GE(T[i], T[i + 1]);
  EXPECT_GT(T[0], 0.1);
  EXPECT_LT(T[0], 1.0);
}

TEST(Simulation, SnapshotsAtRequestedTimes) {
  const Problem pr = small_fc();
  const MlqdSolver s = make(pr, {16, 1}, CycleKind::V, 2);
  int calls = 0;
  const Trajectory tr = run_simulation(s, 0.02, 0.1, {0.0, 0.06, 5.0}, [&](const StepResult &) { ++calls; });
  EXPECT_EQ(calls, 5);
  ASSERT_EQ(tr.snapshots.size(), 2u);
  EXPECT_EQ(tr.snapshots[0].t, 0.0);
  EXPECT_EQ(tr.snapshots[0].T, pr.T0);
  EXPECT_NEAR(tr.snapshots[1].t, 0.06, 1e-15);
  EXPECT_EQ(tr.snapshots[1].x.size(), 10u);
  EXPECT_THROW(run_simulation(s, 0.02, 0.001), ConfigError);
  EXPECT_THROW(run_simulation(s, -1.0, 0.1), ConfigError);
}
