#include <cstdio>
#include <exception>
#include <iostream>

#include "mlqd/mlqd.hpp"

int main(int argc, char **argv) {
  try {
    const mlqd::ParsedArgs args = mlqd::parse_args(argc, argv);
    if (args.help) {
      std::cout << args.help_text;
      return 0;
    }
    const mlqd::RunConfig &cfg = args.config;
    const mlqd::MlqdSolver solver = mlqd::make_solver(cfg);
    long unbalanced = 0;
    const mlqd::Trajectory traj =
        mlqd::run_simulation(solver, cfg.dt, cfg.tend, cfg.snapshots,
                             [&](const mlqd::StepResult &r) {
                               if (r.balance.relative() > 1e-8) ++unbalanced;
                             });
    mlqd::write_outputs(traj, cfg, cfg.out);
    std::cout << mlqd::totals_header() << "\n" << mlqd::totals_row(cfg, traj.totals) << "\n";
    if (unbalanced > 0)
      std::cerr << "warning: " << unbalanced
                << " step(s) with relative energy balance residual above 1e-8\n";
    return 0;
  } catch (const mlqd::Error &e) {
    std::cerr << "mlqd: " << mlqd::to_string(e.kind()) << ": " << e.what() << "\n";
    switch (e.kind()) {
    case mlqd::ErrorKind::Config: return 2;
    case mlqd::ErrorKind::IO: return 3;
    case mlqd::ErrorKind::Convergence: return 4;
    default: return 5;
    }
  } catch (const std::exception &e) {
    std::cerr << "mlqd: internal error: " << e.what() << "\n";
    return 1;
  }
}
