/**
 * @file loqd.hpp
 * @brief Low-order quasidiffusion (LOQD) equations on any frequency level:
 *        assembly, banded solve, residuals, and solution-weighted
 *        restriction of coefficients between levels.
 *
 * Discrete unknowns per interval: cell energies E_i, boundary-face energies
 * E_{1/2}, E_{n+1/2} and face fluxes F_{k+1/2}, k = 0..n. Equations:
 *   - cell balance       dx/dt (E - E^p) + F_{i+1/2} - F_{i-1/2} + dx alpha E = dx S
 *   - first moment over the dual cell of each interior face, and over the
 *     boundary half cells [x_{1/2}, x_1], [x_n, x_{n+1/2}]:
 *       d/(c dt) (F - F^p) + c[(f_+ + d eta_hat) E_+ - (f_- + d eta_check) E_-]
 *         + sigma_R d F = 0
 *   - boundary relations F = c C E_face + K, K = F_in - c C E_in.
 * alpha = c sigma_E and S = 2 sigma_B B on every level.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "array2d.hpp"
#include "error.hpp"
#include "grids.hpp"
#include "moments.hpp"
#include "opacity_table.hpp"
#include "phys.hpp"
#include "transport.hpp"
#include "tridiag.hpp"

namespace mlqd {

/// Coefficients of the LOQD equations for every interval of one level.
struct LoqdCoefficients {
  Array2D sigma_E;   ///< (interval, cell)
  Array2D sigma_B;   ///< (interval, cell)
  Array2D B;         ///< (interval, cell) Planck integral of the interval
  Array2D emission_dT; ///< (interval, cell) d(2 sigma_B B)/dT
  Array2D f;         ///< (interval, cell)
  std::vector<double> f_left, f_right;
  Array2D sigma_R;   ///< (interval, face)
  Array2D eta_hat;   ///< (interval, face), multiplies E on the + side
  Array2D eta_check; ///< (interval, face), multiplies E on the - side
  std::vector<double> C_minus, C_plus;
  std::vector<double> bc_left, bc_right;  ///< K at x = 0 and x = X

  LoqdCoefficients() = default;
  LoqdCoefficients(std::size_t n_intervals, std::size_t n_cells)
      : sigma_E(n_intervals, n_cells), sigma_B(n_intervals, n_cells), B(n_intervals, n_cells),
        emission_dT(n_intervals, n_cells), f(n_intervals, n_cells), f_left(n_intervals), f_right(n_intervals),
        sigma_R(n_intervals, n_cells + 1), eta_hat(n_intervals, n_cells + 1),
        eta_check(n_intervals, n_cells + 1), C_minus(n_intervals), C_plus(n_intervals),
        bc_left(n_intervals), bc_right(n_intervals) {}

  [[nodiscard]] std::size_t n_intervals() const { return sigma_E.rows(); }
  [[nodiscard]] std::size_t n_cells() const { return sigma_E.cols(); }
};

/// One interval's system in the generic form used by the assembler.
struct IntervalSystem {
  std::vector<double> alpha;    ///< absorption rate per cell [1/ns]
  std::vector<double> source;   ///< emission density per cell
  std::vector<double> f;
  double f_left = 1.0 / 3.0, f_right = 1.0 / 3.0;
  std::vector<double> sigma_R;  ///< faces
  std::vector<double> eta_hat, eta_check;
  double C_minus = -0.5, C_plus = 0.5;
  double bc_left = 0.0, bc_right = 0.0;
  std::vector<double> E_prev;   ///< cells
  std::vector<double> F_prev;   ///< faces
};

struct IntervalSolution {
  std::vector<double> E;
  double E_left = 0.0, E_right = 0.0;
  std::vector<double> F;
};

/// Incoming partial moments of the boundary intensities.
struct InflowMoments {
  std::vector<double> E_left, F_left, E_right, F_right;
};

inline InflowMoments inflow_moments(const BoundaryIntensity &in, const AngularQuadrature &quad,
                                    const PhysicalConstants &k) {
  const std::size_t ng = in.left.rows();
  InflowMoments m{std::vector<double>(ng), std::vector<double>(ng), std::vector<double>(ng),
                  std::vector<double>(ng)};
  for (std::size_t g = 0; g < ng; ++g)
    for (std::size_t d = 0; d < quad.size(); ++d) {
      const double mu = quad.mu[d];
      if (mu > 0.0) {
        m.E_left[g] += quad.w[d] * in.left(g, d) / k.c;
        m.F_left[g] += quad.w[d] * mu * in.left(g, d);
      } else {
        m.E_right[g] += quad.w[d] * in.right(g, d) / k.c;
        m.F_right[g] += quad.w[d] * mu * in.right(g, d);
      }
    }
  return m;
}

/// Width-weighted face values; boundary faces take the adjacent cell value.
inline std::vector<double> face_rosseland(std::span<const double> cell, const SpatialMesh &mesh) {
  const std::size_t nx = mesh.n_cells();
  std::vector<double> out(nx + 1);
  out[0] = cell[0];
  out[nx] = cell[nx - 1];
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    const double w0 = mesh.width(i);
    const double w1 = mesh.width(i + 1);
    out[i + 1] = (cell[i] * w0 + cell[i + 1] * w1) / (w0 + w1);
  }
  return out;
}

namespace detail {

/// Width of the control volume of the first-moment equation at face k.
inline double moment_width(const SpatialMesh &mesh, std::size_t k) {
  const std::size_t nx = mesh.n_cells();
  if (k == 0) return 0.5 * mesh.width(0);
  if (k == nx) return 0.5 * mesh.width(nx - 1);
  return mesh.dual_width(k - 1);
}

} // namespace detail

/**
 * Eliminates the fluxes and returns the tridiagonal system in
 * u = (E_{1/2}, E_1, ..., E_n, E_{n+1/2}).
 */
inline TridiagonalSystem assemble_interval(const IntervalSystem &sys, const SpatialMesh &mesh,
                                           double dt, const PhysicalConstants &k) {
  const std::size_t nx = mesh.n_cells();
  const double c = k.c;
  const double tau = 1.0 / (c * dt);
  // F_face = phi + beta * u_face + gamma * u_{face+1}
  std::vector<double> phi(nx + 1), beta(nx + 1), gamma(nx + 1);
  phi[0] = sys.bc_left;
  beta[0] = c * sys.C_minus;
  gamma[0] = 0.0;
  phi[nx] = sys.bc_right;
  beta[nx] = 0.0;
  gamma[nx] = c * sys.C_plus;
  for (std::size_t face = 1; face < nx; ++face) {
    const double d = mesh.dual_width(face - 1);
    const double denom = d * (tau + sys.sigma_R[face]);
    phi[face] = d * tau * sys.F_prev[face] / denom;
    beta[face] = c * (sys.f[face - 1] + d * sys.eta_check[face]) / denom;
    gamma[face] = -c * (sys.f[face] + d * sys.eta_hat[face]) / denom;
  }

  TridiagonalSystem t(nx + 2);
  {
    const double h = detail::moment_width(mesh, 0);
    const double a = h * (tau + sys.sigma_R[0]);
    t.diag[0] = a * c * sys.C_minus - c * (sys.f_left + h * sys.eta_check[0]);
    t.upper[0] = c * (sys.f[0] + h * sys.eta_hat[0]);
    t.rhs[0] = h * tau * sys.F_prev[0] - a * sys.bc_left;
  }
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t r = i + 1;
    const double dx = mesh.width(i);
    t.lower[r] = -beta[r - 1];
    t.diag[r] = dx / dt + dx * sys.alpha[i] + beta[r] - gamma[r - 1];
    t.upper[r] = gamma[r];
    t.rhs[r] = dx * sys.source[i] + dx / dt * sys.E_prev[i] - phi[r] + phi[r - 1];
  }
  {
    const double h = detail::moment_width(mesh, nx);
    const double a = h * (tau + sys.sigma_R[nx]);
    t.lower[nx + 1] = -c * (sys.f[nx - 1] + h * sys.eta_check[nx]);
    t.diag[nx + 1] = a * c * sys.C_plus + c * (sys.f_right + h * sys.eta_hat[nx]);
    t.rhs[nx + 1] = h * tau * sys.F_prev[nx] - a * sys.bc_right;
  }
  return t;
}

inline IntervalSolution recover_fluxes(const IntervalSystem &sys, const std::vector<double> &u,
                                       const SpatialMesh &mesh, double dt,
                                       const PhysicalConstants &k) {
  const std::size_t nx = mesh.n_cells();
  const double c = k.c;
  const double tau = 1.0 / (c * dt);
  IntervalSolution s;
  s.E_left = u[0];
  s.E_right = u[nx + 1];
  s.E.assign(u.begin() + 1, u.begin() + 1 + nx);
  s.F.resize(nx + 1);
  // Every flux, boundary faces included, from its first-moment equation.
  for (std::size_t face = 0; face <= nx; ++face) {
    const double d = detail::moment_width(mesh, face);
    const double e_plus = face == nx ? s.E_right : s.E[face];
    const double e_minus = face == 0 ? s.E_left : s.E[face - 1];
    const double f_plus = face == nx ? sys.f_right : sys.f[face];
    const double f_minus = face == 0 ? sys.f_left : sys.f[face - 1];
    const double grad = (f_plus + d * sys.eta_hat[face]) * e_plus -
                        (f_minus + d * sys.eta_check[face]) * e_minus;
    s.F[face] = (d * tau * sys.F_prev[face] - c * grad) / (d * (tau + sys.sigma_R[face]));
  }
  return s;
}

inline IntervalSolution solve_interval(const IntervalSystem &sys, const SpatialMesh &mesh,
                                       double dt, const PhysicalConstants &k) {
  if (!(dt > 0.0)) throw ConfigError("loqd: dt must be positive");
  return recover_fluxes(sys, solve_tridiagonal(assemble_interval(sys, mesh, dt, k)), mesh, dt, k);
}

/// Residual of every discrete equation relative to its largest term, in the
/// order: n cell balances, n+1 first-moment equations, 2 boundary relations.
inline std::vector<double> interval_residuals(const IntervalSystem &sys, const IntervalSolution &s,
                                              const SpatialMesh &mesh, double dt,
                                              const PhysicalConstants &k) {
  const std::size_t nx = mesh.n_cells();
  const double c = k.c;
  const double tau = 1.0 / (c * dt);
  std::vector<double> out;
  out.reserve(2 * nx + 3);
  auto rel = [](std::initializer_list<double> terms) {
    double sum = 0.0, scale = 0.0;
    for (double t : terms) {
      sum += t;
      scale = std::max(scale, std::abs(t));
    }
    return scale > 0.0 ? std::abs(sum) / scale : 0.0;
  };
  for (std::size_t i = 0; i < nx; ++i) {
    const double dx = mesh.width(i);
    out.push_back(rel({dx / dt * s.E[i], -dx / dt * sys.E_prev[i], s.F[i + 1], -s.F[i],
                       dx * sys.alpha[i] * s.E[i], -dx * sys.source[i]}));
  }
  for (std::size_t face = 0; face <= nx; ++face) {
    const double d = detail::moment_width(mesh, face);
    const double e_plus = face == nx ? s.E_right : s.E[face];
    const double e_minus = face == 0 ? s.E_left : s.E[face - 1];
    const double f_plus = face == nx ? sys.f_right : sys.f[face];
    const double f_minus = face == 0 ? sys.f_left : sys.f[face - 1];
    out.push_back(rel({d * tau * s.F[face], -d * tau * sys.F_prev[face],
                       c * (f_plus + d * sys.eta_hat[face]) * e_plus,
                       -c * (f_minus + d * sys.eta_check[face]) * e_minus,
                       sys.sigma_R[face] * d * s.F[face]}));
  }
  out.push_back(rel({s.F[0], -c * sys.C_minus * s.E_left, -sys.bc_left}));
  out.push_back(rel({s.F[nx], -c * sys.C_plus * s.E_right, -sys.bc_right}));
  return out;
}

/// Extracts interval p of a level into the generic form.
inline IntervalSystem interval_system(const LoqdCoefficients &co, std::size_t p,
                                      const MomentField &prev, const PhysicalConstants &k) {
  const std::size_t nx = co.n_cells();
  IntervalSystem s;
  s.alpha.resize(nx);
  s.source.resize(nx);
  s.f.resize(nx);
  s.E_prev.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    s.alpha[i] = k.c * co.sigma_E(p, i);
    s.source[i] = 2.0 * co.sigma_B(p, i) * co.B(p, i);
    s.f[i] = co.f(p, i);
    s.E_prev[i] = prev.E(p, i);
  }
  s.f_left = co.f_left[p];
  s.f_right = co.f_right[p];
  s.sigma_R.resize(nx + 1);
  s.eta_hat.resize(nx + 1);
  s.eta_check.resize(nx + 1);
  s.F_prev.resize(nx + 1);
  for (std::size_t face = 0; face <= nx; ++face) {
    s.sigma_R[face] = co.sigma_R(p, face);
    s.eta_hat[face] = co.eta_hat(p, face);
    s.eta_check[face] = co.eta_check(p, face);
    s.F_prev[face] = prev.F(p, face);
  }
  s.C_minus = co.C_minus[p];
  s.C_plus = co.C_plus[p];
  s.bc_left = co.bc_left[p];
  s.bc_right = co.bc_right[p];
  return s;
}

/// Assembles and solves the system of interval p.
inline IntervalSolution assemble_solve_group(const LoqdCoefficients &co, std::size_t p,
                                             const MomentField &prev, double dt,
                                             const SpatialMesh &mesh, const PhysicalConstants &k) {
  try {
    return solve_interval(interval_system(co, p, prev, k), mesh, dt, k);
  } catch (const NumericalError &e) {
    throw NumericalError(std::string(e.what()) + " (interval " + std::to_string(p) + ")");
  }
}

inline void store_solution(const IntervalSolution &s, std::size_t p, MomentField &out) {
  for (std::size_t i = 0; i < s.E.size(); ++i) out.E(p, i) = s.E[i];
  out.E_left[p] = s.E_left;
  out.E_right[p] = s.E_right;
  for (std::size_t face = 0; face < s.F.size(); ++face) out.F(p, face) = s.F[face];
}

/// Solves all intervals of a level.
inline MomentField solve_level(const LoqdCoefficients &co, const MomentField &prev, double dt,
                               const SpatialMesh &mesh, const PhysicalConstants &k) {
  MomentField out(co.n_intervals(), co.n_cells());
  for (std::size_t p = 0; p < co.n_intervals(); ++p)
    store_solution(assemble_solve_group(co, p, prev, dt, mesh, k), p, out);
  return out;
}

/// Fine-grid coefficients from group opacities and transport closures.
inline LoqdCoefficients build_fine_coefficients(const OpacityTable &opac,
                                                const ClosureData &closures,
                                                const InflowMoments &inflow,
                                                const SpatialMesh &mesh,
                                                const PhysicalConstants &k) {
  const std::size_t ng = opac.sigma_E.rows();
  const std::size_t nx = mesh.n_cells();
  LoqdCoefficients co(ng, nx);
  co.sigma_E = opac.sigma_E;
  co.sigma_B = opac.sigma_B;
  co.B = opac.B;
  co.emission_dT = opac.emission_dT;
  co.f = closures.f;
  co.f_left = closures.f_left;
  co.f_right = closures.f_right;
  co.C_minus = closures.C_minus;
  co.C_plus = closures.C_plus;
  for (std::size_t g = 0; g < ng; ++g) {
    const std::span<const double> cell(&opac.sigma_R.data()[g * nx], nx);
    const std::vector<double> faces = face_rosseland(cell, mesh);
    for (std::size_t face = 0; face <= nx; ++face) co.sigma_R(g, face) = faces[face];
    co.bc_left[g] = inflow.F_left[g] - k.c * closures.C_minus[g] * inflow.E_left[g];
    co.bc_right[g] = inflow.F_right[g] - k.c * closures.C_plus[g] * inflow.E_right[g];
  }
  return co;
}

namespace detail {

constexpr double weight_floor = 1e-300;

inline double weighted_or_mean(double num, double den, double plain_sum, std::size_t count) {
  if (den > weight_floor && std::isfinite(num)) return num / den;
  return plain_sum / static_cast<double>(count);
}

} // namespace detail

/**
 * Averages the coefficients of `src` with the solution `sol` on the same
 * level into one interval per entry of `partition` (ranges of src intervals).
 * Weights: E for f, sigma_E and C; B for sigma_B; |F| for sigma_R. The
 * compensation flux xi collects the sigma_R spread and any compensation
 * already present in `src`, and is split upwind into eta_hat / eta_check.
 */
inline LoqdCoefficients average_coefficients(const MomentField &sol, const LoqdCoefficients &src,
                                             const std::vector<IndexRange> &partition,
                                             const PhysicalConstants &k) {
  const std::size_t nx = src.n_cells();
  const std::size_t np = partition.size();
  const double c = k.c;
  LoqdCoefficients out(np, nx);
  for (std::size_t P = 0; P < np; ++P) {
    const IndexRange r = partition[P];
    const std::size_t count = r.size();
    for (std::size_t i = 0; i < nx; ++i) {
      double wE = 0.0, wB = 0.0, fE = 0.0, sE = 0.0, sB = 0.0, dS = 0.0;
      double f_sum = 0.0, sE_sum = 0.0, sB_sum = 0.0;
      for (std::size_t p = r.begin; p < r.end; ++p) {
        const double e = sol.E(p, i);
        const double b = src.B(p, i);
        wE += e;
        wB += b;
        fE += src.f(p, i) * e;
        sE += src.sigma_E(p, i) * e;
        sB += src.sigma_B(p, i) * b;
        dS += src.emission_dT(p, i);
        f_sum += src.f(p, i);
        sE_sum += src.sigma_E(p, i);
        sB_sum += src.sigma_B(p, i);
      }
      out.f(P, i) = detail::weighted_or_mean(fE, wE, f_sum, count);
      out.sigma_E(P, i) = detail::weighted_or_mean(sE, wE, sE_sum, count);
      out.sigma_B(P, i) = detail::weighted_or_mean(sB, wB, sB_sum, count);
      out.B(P, i) = wB;
      out.emission_dT(P, i) = dS;
    }
    {
      double wl = 0.0, wr = 0.0, fl = 0.0, fr = 0.0, cl = 0.0, cr = 0.0;
      double fl_sum = 0.0, fr_sum = 0.0, cl_sum = 0.0, cr_sum = 0.0;
      double kl = 0.0, kr = 0.0;
      for (std::size_t p = r.begin; p < r.end; ++p) {
        wl += sol.E_left[p];
        wr += sol.E_right[p];
        fl += src.f_left[p] * sol.E_left[p];
        fr += src.f_right[p] * sol.E_right[p];
        cl += src.C_minus[p] * sol.E_left[p];
        cr += src.C_plus[p] * sol.E_right[p];
        fl_sum += src.f_left[p];
        fr_sum += src.f_right[p];
        cl_sum += src.C_minus[p];
        cr_sum += src.C_plus[p];
        kl += src.bc_left[p];
        kr += src.bc_right[p];
      }
      out.f_left[P] = detail::weighted_or_mean(fl, wl, fl_sum, count);
      out.f_right[P] = detail::weighted_or_mean(fr, wr, fr_sum, count);
      out.C_minus[P] = detail::weighted_or_mean(cl, wl, cl_sum, count);
      out.C_plus[P] = detail::weighted_or_mean(cr, wr, cr_sum, count);
      out.bc_left[P] = kl;
      out.bc_right[P] = kr;
    }
    for (std::size_t face = 0; face <= nx; ++face) {
      double wF = 0.0, sR = 0.0, inv_sum = 0.0;
      for (std::size_t p = r.begin; p < r.end; ++p) {
        const double a = std::abs(sol.F(p, face));
        wF += a;
        sR += src.sigma_R(p, face) * a;
        inv_sum += 1.0 / src.sigma_R(p, face);
      }
      const double sigma_bar = (wF > detail::weight_floor && std::isfinite(sR))
                                   ? sR / wF
                                   : static_cast<double>(count) / inv_sum;
      out.sigma_R(P, face) = sigma_bar;

      double xi = 0.0, e_plus = 0.0, e_minus = 0.0;
      for (std::size_t p = r.begin; p < r.end; ++p) {
        const double ep = face == nx ? sol.E_right[p] : sol.E(p, face);
        const double em = face == 0 ? sol.E_left[p] : sol.E(p, face - 1);
        xi += (src.sigma_R(p, face) - sigma_bar) * sol.F(p, face) +
              c * (src.eta_hat(p, face) * ep - src.eta_check(p, face) * em);
        e_plus += ep;
        e_minus += em;
      }
      if (xi > 0.0 && e_plus > detail::weight_floor) out.eta_hat(P, face) = xi / (c * e_plus);
      else if (xi < 0.0 && e_minus > detail::weight_floor)
        out.eta_check(P, face) = -xi / (c * e_minus);
    }
  }
  return out;
}

/// Level coefficients from the fine solution and fine coefficients.
inline LoqdCoefficients restrict_coefficients(const MomentField &fine_solution,
                                              const LoqdCoefficients &fine_coeffs,
                                              const FrequencyGridHierarchy &h, std::size_t level,
                                              const PhysicalConstants &k) {
  std::vector<IndexRange> partition(h.n_groups(level));
  for (std::size_t p = 0; p < partition.size(); ++p) partition[p] = h.fine_members(level, p);
  return average_coefficients(fine_solution, fine_coeffs, partition, k);
}

/// Sums moments over each interval of `partition`.
inline MomentField sum_moments(const MomentField &m, const std::vector<IndexRange> &partition) {
  const std::size_t nx = m.n_cells();
  MomentField out(partition.size(), nx);
  for (std::size_t P = 0; P < partition.size(); ++P)
    for (std::size_t p = partition[P].begin; p < partition[P].end; ++p) {
      for (std::size_t i = 0; i < nx; ++i) out.E(P, i) += m.E(p, i);
      out.E_left[P] += m.E_left[p];
      out.E_right[P] += m.E_right[p];
      for (std::size_t face = 0; face <= nx; ++face) out.F(P, face) += m.F(p, face);
    }
  return out;
}

inline MomentField restrict_moments(const MomentField &fine, const FrequencyGridHierarchy &h,
                                    std::size_t level) {
  std::vector<IndexRange> partition(h.n_groups(level));
  for (std::size_t p = 0; p < partition.size(); ++p) partition[p] = h.fine_members(level, p);
  return sum_moments(fine, partition);
}

struct ConservationMismatch {
  double E = 0.0;
  double F = 0.0;
};

/**
 * Largest relative mismatch between a level solution and the summed fine
 * solution. Values are compared relative to max(|value|, 1e-10 * field
 * scale) so near-zero fluxes do not dominate.
 */
inline ConservationMismatch conservation_check(const MomentField &fine, const MomentField &coarse,
                                               const FrequencyGridHierarchy &h, std::size_t level) {
  const MomentField summed = restrict_moments(fine, h, level);
  ConservationMismatch out;
  double e_scale = 0.0, f_scale = 0.0;
  for (double v : coarse.E.data()) e_scale = std::max(e_scale, std::abs(v));
  for (double v : coarse.F.data()) f_scale = std::max(f_scale, std::abs(v));
  auto rel = [](double a, double b, double scale) {
    const double den = std::max({std::abs(a), 1e-10 * scale, 1e-300});
    return std::abs(a - b) / den;
  };
  for (std::size_t p = 0; p < coarse.n_intervals(); ++p) {
    for (std::size_t i = 0; i < coarse.n_cells(); ++i)
      out.E = std::max(out.E, rel(coarse.E(p, i), summed.E(p, i), e_scale));
    out.E = std::max(out.E, rel(coarse.E_left[p], summed.E_left[p], e_scale));
    out.E = std::max(out.E, rel(coarse.E_right[p], summed.E_right[p], e_scale));
    for (std::size_t face = 0; face <= coarse.n_cells(); ++face)
      out.F = std::max(out.F, rel(coarse.F(p, face), summed.F(p, face), f_scale));
  }
  return out;
}

} // namespace mlqd
