/**
 * @file grey.hpp
 * @brief Effective grey problem and the Newton solve of grey LOQD + material
 *        energy balance (MEB).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "grids.hpp"
#include "loqd.hpp"
#include "moments.hpp"
#include "phys.hpp"

namespace mlqd {

/// Grey coefficients are level coefficients with a single interval.
using GreyCoefficients = LoqdCoefficients;

/// Averages a level solution into the one-interval grey problem.
inline GreyCoefficients form_grey(const MomentField &level_solution,
                                  const LoqdCoefficients &level_coeffs,
                                  const PhysicalConstants &k) {
  return average_coefficients(level_solution, level_coeffs,
                              {IndexRange{0, level_coeffs.n_intervals()}}, k);
}

struct FrechetDiagonal {
  std::vector<double> D;  ///< d sigma_E / dT per cell [1/(cm keV)]
};

/// Grey temperature and opacity at the last low-order stage.
struct FrechetHistory {
  bool valid = false;
  std::vector<double> T;
  std::vector<double> sigma_E;

  void reset() { valid = false; }
};

inline FrechetDiagonal frechet_update(std::span<const double> T_prev,
                                      std::span<const double> sigma_prev,
                                      std::span<const double> T_cur,
                                      std::span<const double> sigma_cur, double T_floor) {
  FrechetDiagonal out{std::vector<double>(T_cur.size(), 0.0)};
  for (std::size_t i = 0; i < T_cur.size(); ++i) {
    const double dT = T_cur[i] - T_prev[i];
    if (std::abs(dT) < 1e-12 * std::max(T_cur[i], T_floor)) continue;
    const double d = (sigma_cur[i] - sigma_prev[i]) / dT;
    if (std::isfinite(d)) out.D[i] = d;
  }
  return out;
}

/// Current stage's diagonal from the history (zero without history), then
/// records the stage.
inline FrechetDiagonal frechet_advance(FrechetHistory &hist, std::span<const double> T,
                                       std::span<const double> sigma_E, double T_floor) {
  FrechetDiagonal D{std::vector<double>(T.size(), 0.0)};
  if (hist.valid) D = frechet_update(hist.T, hist.sigma_E, T, sigma_E, T_floor);
  hist.valid = true;
  hist.T.assign(T.begin(), T.end());
  hist.sigma_E.assign(sigma_E.begin(), sigma_E.end());
  return D;
}

struct GreyPrevious {
  std::vector<double> T;   ///< material temperature at t^{j-1}
  MomentField moments;     ///< one-interval grey moments at t^{j-1}
};

struct GreyResult {
  std::vector<double> T;
  MomentField moments;
  std::size_t floored_cells = 0;  ///< cells clipped to T_floor in the last step
  std::size_t clipped_cells = 0;  ///< cells whose Frechet entry was limited
};

/**
 * Nonlinear grey model around the stage temperature T*:
 *   sigma_E(T) = sigma_E* + D (T - T*),  S(T) = S* (T/T*)^q,
 * with S* = 2 sigma_B* B* the grey emission at T* and q = T* S'/S* its
 * logarithmic slope, S' = sum of 2 sigma_B,g dB_g/dT over the groups.
 */
struct GreyNonlinearModel {
  const GreyCoefficients &grey;
  const FrechetDiagonal &D;
  std::span<const double> T_star;

  [[nodiscard]] double sigma_E(std::size_t i, double T) const {
    return std::max(0.0, grey.sigma_E(0, i) + D.D[i] * (T - T_star[i]));
  }
  [[nodiscard]] double exponent(std::size_t i) const {
    const double s = 2.0 * grey.sigma_B(0, i) * grey.B(0, i);
    const double ds = grey.emission_dT(0, i);
    if (!(s > 0.0) || !(ds > 0.0)) return 4.0;
    return T_star[i] * ds / s;
  }
  [[nodiscard]] double emission(std::size_t i, double T) const {
    return 2.0 * grey.sigma_B(0, i) * grey.B(0, i) * std::pow(T / T_star[i], exponent(i));
  }
  [[nodiscard]] double emission_dT(std::size_t i, double T) const {
    return exponent(i) * emission(i, T) / T;
  }
};

namespace detail {

inline IntervalSystem grey_system(const GreyCoefficients &grey, const GreyPrevious &prev,
                                  const PhysicalConstants &k) {
  return interval_system(grey, 0, prev.moments, k);
}

inline void check_grey_inputs(const GreyCoefficients &grey, const FrechetDiagonal &D,
                              const GreyPrevious &prev, std::span<const double> T_star,
                              double dt, int n_newton) {
  if (grey.n_intervals() != 1) throw ConfigError("solve_grey_meb: grey problem needs one interval");
  const std::size_t nx = grey.n_cells();
  if (D.D.size() != nx || prev.T.size() != nx || T_star.size() != nx ||
      prev.moments.n_cells() != nx || prev.moments.n_intervals() != 1)
    throw ConfigError("solve_grey_meb: inconsistent array sizes");
  if (!(dt > 0.0)) throw ConfigError("solve_grey_meb: dt must be positive");
  if (n_newton < 1) throw ConfigError("solve_grey_meb: n_newton must be >= 1");
  for (double t : T_star)
    if (!(t > 0.0)) throw DomainError("solve_grey_meb: stage temperature must be positive");
}

} // namespace detail

/**
 * n_newton Newton steps on grey LOQD + MEB starting from (T*, E*). Per step
 * the MEB increment is eliminated cell-locally:
 *   Gamma dT = c sigma_n E - R,  Gamma = c_v/dt - kappa,
 *   kappa = c D E_n - S'(T_n),   R = S(T_n) + c_v/dt (T_n - T^{j-1}),
 * which turns the balance equation into one with absorption
 * c sigma_n (c_v/dt)/Gamma and source S(T_n) + kappa R/Gamma.
 */
inline GreyResult solve_grey_meb(const GreyCoefficients &grey, const FrechetDiagonal &D,
                                 const GreyPrevious &prev, std::span<const double> T_star,
                                 std::span<const double> E_star, double dt, int n_newton,
                                 const SpatialMesh &mesh, const MaterialModel &material,
                                 const PhysicalConstants &k) {
  detail::check_grey_inputs(grey, D, prev, T_star, dt, n_newton);
  const std::size_t nx = grey.n_cells();
  const double c = k.c;
  const double cvdt = material.c_v / dt;
  const GreyNonlinearModel model{grey, D, T_star};
  IntervalSystem sys = detail::grey_system(grey, prev, k);

  GreyResult res;
  res.T.assign(T_star.begin(), T_star.end());
  std::vector<double> E_n(E_star.begin(), E_star.end());
  std::vector<double> gamma(nx), R(nx), sigma_n(nx);
  for (int step = 0; step < n_newton; ++step) {
    res.floored_cells = 0;
    res.clipped_cells = 0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double T = res.T[i];
      const double dS = model.emission_dT(i, T);
      double coupling = c * D.D[i] * E_n[i];
      const double limit = 0.5 * (cvdt + dS);
      if (coupling > limit) {
        coupling = limit;
        ++res.clipped_cells;
      }
      const double kappa = coupling - dS;
      sigma_n[i] = model.sigma_E(i, T);
      gamma[i] = cvdt - kappa;
      R[i] = model.emission(i, T) + cvdt * (T - prev.T[i]);
      if (!(gamma[i] > 0.0) || !std::isfinite(gamma[i]))
        throw NumericalError("solve_grey_meb: singular linearization in cell " + std::to_string(i));
      sys.alpha[i] = c * sigma_n[i] * cvdt / gamma[i];
      sys.source[i] = model.emission(i, T) + kappa * R[i] / gamma[i];
    }
    IntervalSolution sol;
    try {
      sol = solve_interval(sys, mesh, dt, k);
    } catch (const NumericalError &e) {
      throw NumericalError(std::string("grey solve: ") + e.what());
    }
    for (std::size_t i = 0; i < nx; ++i) {
      const double dT = (c * sigma_n[i] * sol.E[i] - R[i]) / gamma[i];
      double T_new = res.T[i] + dT;
      if (!std::isfinite(T_new)) throw NumericalError("solve_grey_meb: non-finite temperature");
      if (T_new < k.T_floor) {
        T_new = k.T_floor;
        ++res.floored_cells;
      }
      res.T[i] = T_new;
    }
    E_n = sol.E;
    res.moments = MomentField(1, nx);
    store_solution(sol, 0, res.moments);
  }
  return res;
}

/**
 * Max-norm residual of the nonlinear grey system at (T, moments): grey
 * balance equations with sigma_E(T), S(T), the first-moment and boundary
 * equations, and the MEB, each scaled by its largest term.
 */
inline double grey_meb_residual(const GreyCoefficients &grey, const FrechetDiagonal &D,
                                const GreyPrevious &prev, std::span<const double> T_star,
                                std::span<const double> T, const MomentField &moments, double dt,
                                const SpatialMesh &mesh, const MaterialModel &material,
                                const PhysicalConstants &k) {
  const std::size_t nx = grey.n_cells();
  const GreyNonlinearModel model{grey, D, T_star};
  IntervalSystem sys = detail::grey_system(grey, prev, k);
  for (std::size_t i = 0; i < nx; ++i) {
    sys.alpha[i] = k.c * model.sigma_E(i, T[i]);
    sys.source[i] = model.emission(i, T[i]);
  }
  IntervalSolution sol;
  sol.E.assign(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) sol.E[i] = moments.E(0, i);
  sol.E_left = moments.E_left[0];
  sol.E_right = moments.E_right[0];
  sol.F.assign(nx + 1, 0.0);
  for (std::size_t f = 0; f <= nx; ++f) sol.F[f] = moments.F(0, f);
  const std::vector<double> r = interval_residuals(sys, sol, mesh, dt, k);
  double out = *std::max_element(r.begin(), r.end());
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = material.c_v * (T[i] - prev.T[i]) / dt;
    const double b = k.c * model.sigma_E(i, T[i]) * sol.E[i];
    const double s = model.emission(i, T[i]);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(s)});
    if (scale > 0.0) out = std::max(out, std::abs(a - b + s) / scale);
  }
  return out;
}

/// Material plus radiation energy change against the net boundary influx.
struct EnergyBalance {
  double residual = 0.0;  ///< signed, energy per (cm^2 ns)
  double influx = 0.0;    ///< scale: max |boundary flux|
  [[nodiscard]] double relative() const {
    return influx > 0.0 ? std::abs(residual) / influx : std::abs(residual);
  }
};

inline EnergyBalance energy_balance(std::span<const double> T, std::span<const double> T_prev,
                                    const MomentField &grey, const MomentField &grey_prev,
                                    double dt, const SpatialMesh &mesh,
                                    const MaterialModel &material) {
  const std::size_t nx = mesh.n_cells();
  EnergyBalance b;
  for (std::size_t i = 0; i < nx; ++i) {
    const double dx = mesh.width(i);
    b.residual += dx * (material.eps(T[i]) - material.eps(T_prev[i])) / dt;
    b.residual += dx * (grey.E(0, i) - grey_prev.E(0, i)) / dt;
  }
  b.residual += grey.F(0, nx) - grey.F(0, 0);
  b.influx = std::max(std::abs(grey.F(0, 0)), std::abs(grey.F(0, nx)));
  return b;
}

} // namespace mlqd
