/**
 * @file transport.hpp
 * @brief Multigroup discrete-ordinates sweeps with the simple corner balance
 *        (SCB) spatial scheme and implicit Euler in time, plus extraction of
 *        the quasidiffusion closure data from the corner intensities.
 */
#pragma once

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

namespace mlqd {

/// Boundary data: left[g][m] is used for mu_m > 0, right[g][m] for mu_m < 0.
struct BoundaryIntensity {
  Array2D left;
  Array2D right;
};

enum Corner : std::size_t { kLeft = 0, kRight = 1 };

class AngularIntensity {
 public:
  AngularIntensity() = default;
  AngularIntensity(std::size_t n_groups, std::size_t n_dirs, std::size_t n_cells)
      : ng_(n_groups), nd_(n_dirs), nx_(n_cells), psi_(n_groups * n_dirs * n_cells * 2, 0.0),
        inflow_{Array2D(n_groups, n_dirs), Array2D(n_groups, n_dirs)} {}

  double &operator()(std::size_t g, std::size_t m, std::size_t i, std::size_t c) {
    return psi_[((g * nd_ + m) * nx_ + i) * 2 + c];
  }
  double operator()(std::size_t g, std::size_t m, std::size_t i, std::size_t c) const {
    return psi_[((g * nd_ + m) * nx_ + i) * 2 + c];
  }
  /// Cell-average intensity, mean of the two corners.
  [[nodiscard]] double average(std::size_t g, std::size_t m, std::size_t i) const {
    return 0.5 * ((*this)(g, m, i, kLeft) + (*this)(g, m, i, kRight));
  }

  [[nodiscard]] std::size_t n_groups() const { return ng_; }
  [[nodiscard]] std::size_t n_dirs() const { return nd_; }
  [[nodiscard]] std::size_t n_cells() const { return nx_; }

  BoundaryIntensity &inflow() { return inflow_; }
  [[nodiscard]] const BoundaryIntensity &inflow() const { return inflow_; }

  /// Intensity leaving/entering face x_{1/2} in direction m.
  [[nodiscard]] double left_face(std::size_t g, std::size_t m, double mu) const {
    return mu > 0.0 ? inflow_.left(g, m) : (*this)(g, m, 0, kLeft);
  }
  [[nodiscard]] double right_face(std::size_t g, std::size_t m, double mu) const {
    return mu < 0.0 ? inflow_.right(g, m) : (*this)(g, m, nx_ - 1, kRight);
  }

 private:
  std::size_t ng_ = 0, nd_ = 0, nx_ = 0;
  std::vector<double> psi_;
  BoundaryIntensity inflow_;
};

/// Quasidiffusion closure data for every group.
struct ClosureData {
  Array2D f;                     ///< (group, cell) Eddington factor
  std::vector<double> f_left;    ///< at x_{1/2}
  std::vector<double> f_right;   ///< at x_{n+1/2}
  std::vector<double> C_minus;   ///< boundary factor at x = 0, in [-1, 0)
  std::vector<double> C_plus;    ///< boundary factor at x = X, in (0, 1]

  ClosureData() = default;
  ClosureData(std::size_t n_groups, std::size_t n_cells)
      : f(n_groups, n_cells, 1.0 / 3.0), f_left(n_groups, 1.0 / 3.0),
        f_right(n_groups, 1.0 / 3.0), C_minus(n_groups, -0.5), C_plus(n_groups, 0.5) {}
};

struct SweepInputs {
  std::span<const double> sigma;   ///< total opacity per cell [1/cm]
  std::span<const double> source;  ///< emission per direction per cell
  double dt = 0.0;
};

/**
 * Sweeps one group in every direction. Per cell and direction the two corner
 * balances (left and right half cells, interior face value (L+R)/2, upwind
 * inflow) form a 2x2 system solved in closed form.
 */
inline void sweep_group(std::size_t g, const SweepInputs &in, const AngularIntensity &prev,
                        const SpatialMesh &mesh, const AngularQuadrature &quad,
                        const PhysicalConstants &k, AngularIntensity &out) {
  const std::size_t nx = mesh.n_cells();
  if (!(in.dt > 0.0)) throw ConfigError("sweep_group: dt must be positive");
  const double tau = 1.0 / (k.c * in.dt);
  for (std::size_t m = 0; m < quad.size(); ++m) {
    const double mu = quad.mu[m];
    const double amu = std::abs(mu);
    const double half_mu = 0.5 * amu;
    if (mu > 0.0) {
      double inflow = out.inflow().left(g, m);
      for (std::size_t i = 0; i < nx; ++i) {
        const double h = 0.5 * mesh.width(i);
        if (!(h > 0.0)) throw ConfigError("sweep_group: non-positive cell width");
        const double s = in.sigma[i] + tau;
        const double r_up = h * (in.source[i] + tau * prev(g, m, i, kLeft)) + amu * inflow;
        const double r_down = h * (in.source[i] + tau * prev(g, m, i, kRight));
        const double a = half_mu + s * h;
        const double det = a * a + half_mu * half_mu;
        const double psi_up = (a * r_up - half_mu * r_down) / det;
        const double psi_down = (half_mu * r_up + a * r_down) / det;
        out(g, m, i, kLeft) = psi_up;
        out(g, m, i, kRight) = psi_down;
        inflow = psi_down;
      }
    } else {
      double inflow = out.inflow().right(g, m);
      for (std::size_t ii = nx; ii-- > 0;) {
        const double h = 0.5 * mesh.width(ii);
        if (!(h > 0.0)) throw ConfigError("sweep_group: non-positive cell width");
        const double s = in.sigma[ii] + tau;
        const double r_up = h * (in.source[ii] + tau * prev(g, m, ii, kRight)) + amu * inflow;
        const double r_down = h * (in.source[ii] + tau * prev(g, m, ii, kLeft));
        const double a = half_mu + s * h;
        const double det = a * a + half_mu * half_mu;
        const double psi_up = (a * r_up - half_mu * r_down) / det;
        const double psi_down = (half_mu * r_up + a * r_down) / det;
        out(g, m, ii, kRight) = psi_up;
        out(g, m, ii, kLeft) = psi_down;
        inflow = psi_down;
      }
    }
  }
}

/// One high-order solve: all groups, opacities sigma_E and sources
/// sigma_B*B_g from `opac` (evaluated at the current temperature).
inline AngularIntensity transport_solve(const OpacityTable &opac, const AngularIntensity &prev,
                                        double dt, const SpatialMesh &mesh,
                                        const AngularQuadrature &quad,
                                        const PhysicalConstants &k) {
  const std::size_t ng = prev.n_groups();
  const std::size_t nx = mesh.n_cells();
  AngularIntensity out(ng, quad.size(), nx);
  out.inflow() = prev.inflow();
  std::vector<double> source(nx);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t i = 0; i < nx; ++i) source[i] = opac.sigma_B(g, i) * opac.B(g, i);
    const std::span<const double> sigma(&opac.sigma_E.data()[g * nx], nx);
    sweep_group(g, {sigma, source, dt}, prev, mesh, quad, k, out);
  }
  return out;
}

/// Eddington and boundary factors. Zero-intensity groups fall back to the
/// isotropic values f = 1/3, C = -+1/2.
inline ClosureData compute_qd_factors(const AngularIntensity &I, const AngularQuadrature &quad) {
  const std::size_t ng = I.n_groups();
  const std::size_t nx = I.n_cells();
  ClosureData out(ng, nx);
  constexpr double tiny = 1e-300;
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t i = 0; i < nx; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t m = 0; m < quad.size(); ++m) {
        const double psi = I.average(g, m, i);
        num += quad.w[m] * quad.mu[m] * quad.mu[m] * psi;
        den += quad.w[m] * psi;
      }
      out.f(g, i) = den > tiny ? num / den : 1.0 / 3.0;
    }
    double fl_num = 0.0, fl_den = 0.0, fr_num = 0.0, fr_den = 0.0;
    double cm_num = 0.0, cm_den = 0.0, cp_num = 0.0, cp_den = 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m) {
      const double mu = quad.mu[m];
      const double w = quad.w[m];
      const double psi_l = I.left_face(g, m, mu);
      const double psi_r = I.right_face(g, m, mu);
      fl_num += w * mu * mu * psi_l;
      fl_den += w * psi_l;
      fr_num += w * mu * mu * psi_r;
      fr_den += w * psi_r;
      if (mu < 0.0) {
        cm_num += w * mu * psi_l;
        cm_den += w * psi_l;
      } else {
        cp_num += w * mu * psi_r;
        cp_den += w * psi_r;
      }
    }
    out.f_left[g] = fl_den > tiny ? fl_num / fl_den : 1.0 / 3.0;
    out.f_right[g] = fr_den > tiny ? fr_num / fr_den : 1.0 / 3.0;
    out.C_minus[g] = cm_den > tiny ? cm_num / cm_den : -0.5;
    out.C_plus[g] = cp_den > tiny ? cp_num / cp_den : 0.5;
  }
  return out;
}

/// E_g (cells and boundary faces) and F_g at faces. Interior face fluxes use
/// the exit corner of the upwind cell in each direction.
inline MomentField compute_moments(const AngularIntensity &I, const AngularQuadrature &quad,
                                   const PhysicalConstants &k) {
  const std::size_t ng = I.n_groups();
  const std::size_t nx = I.n_cells();
  MomentField out(ng, nx);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t i = 0; i < nx; ++i) {
      double sum = 0.0;
      for (std::size_t m = 0; m < quad.size(); ++m) sum += quad.w[m] * I.average(g, m, i);
      out.E(g, i) = sum / k.c;
    }
    double el = 0.0, er = 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m) {
      const double mu = quad.mu[m];
      el += quad.w[m] * I.left_face(g, m, mu);
      er += quad.w[m] * I.right_face(g, m, mu);
    }
    out.E_left[g] = el / k.c;
    out.E_right[g] = er / k.c;
    for (std::size_t face = 0; face <= nx; ++face) {
      double flux = 0.0;
      for (std::size_t m = 0; m < quad.size(); ++m) {
        const double mu = quad.mu[m];
        double psi;
        if (face == 0) psi = I.left_face(g, m, mu);
        else if (face == nx) psi = I.right_face(g, m, mu);
        else psi = mu > 0.0 ? I(g, m, face - 1, kRight) : I(g, m, face, kLeft);
        flux += quad.w[m] * mu * psi;
      }
      out.F(g, face) = flux;
    }
  }
  return out;
}

} // namespace mlqd
