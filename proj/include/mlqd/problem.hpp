/**
 * @file problem.hpp
 * @brief Problem definitions: the Fleck-Cummings slab and an infinite-medium
 *        equilibrium case.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"
#include "grids.hpp"
#include "phys.hpp"
#include "transport.hpp"

namespace mlqd {

struct Problem {
  PhysicalConstants constants;
  MaterialModel material;
  OpacityModel opacity;
  FrequencyGrid fine_grid;
  SpatialMesh mesh;
  AngularQuadrature quadrature;
  std::vector<double> T0;      ///< initial material temperature per cell
  AngularIntensity I0;         ///< initial corner intensities and boundary inflow

  void validate() const {
    constants.validate();
    fine_grid.validate();
    mesh.validate();
    if (quadrature.size() < 2) throw ConfigError("Problem: quadrature needs at least 2 directions");
    if (T0.size() != mesh.n_cells()) throw ConfigError("Problem: T0 size does not match mesh");
    for (double t : T0)
      if (!(t >= constants.T_floor)) throw ConfigError("Problem: T0 below T_floor");
    if (!(material.c_v > 0.0)) throw ConfigError("Problem: c_v must be positive");
    if (!opacity.sigma) throw ConfigError("Problem: opacity model missing");
    if (I0.n_groups() != fine_grid.n_groups() || I0.n_dirs() != quadrature.size() ||
        I0.n_cells() != mesh.n_cells())
      throw ConfigError("Problem: initial intensity shape mismatch");
  }
};

/// Group intensities B_g(T) per direction, isotropic in every cell corner.
inline AngularIntensity isotropic_intensity(const FrequencyGrid &grid,
                                            const std::vector<double> &T,
                                            std::size_t n_dirs, const PhysicalConstants &k) {
  AngularIntensity I(grid.n_groups(), n_dirs, T.size());
  for (std::size_t g = 0; g < grid.n_groups(); ++g)
    for (std::size_t i = 0; i < T.size(); ++i) {
      const double b = planck_group(T[i], grid.lower(g), grid.upper(g), k);
      for (std::size_t m = 0; m < n_dirs; ++m) {
        I(g, m, i, kLeft) = b;
        I(g, m, i, kRight) = b;
      }
    }
  return I;
}

/// Sets black-body inflow at T_left / T_right; a non-positive temperature
/// means vacuum.
inline void set_blackbody_inflow(AngularIntensity &I, const FrequencyGrid &grid,
                                 const AngularQuadrature &quad, double T_left, double T_right,
                                 const PhysicalConstants &k) {
  for (std::size_t g = 0; g < grid.n_groups(); ++g) {
    const double bl = T_left > 0.0 ? planck_group(T_left, grid.lower(g), grid.upper(g), k) : 0.0;
    const double br =
        T_right > 0.0 ? planck_group(T_right, grid.lower(g), grid.upper(g), k) : 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m) {
      I.inflow().left(g, m) = quad.mu[m] > 0.0 ? bl : 0.0;
      I.inflow().right(g, m) = quad.mu[m] < 0.0 ? br : 0.0;
    }
  }
}

struct FcParameters {
  int n_groups = 256;
  int n_cells = 10;
  double length = 4.0;       ///< cm
  int n_dirs = 16;           ///< total directions, split evenly over mu < 0 and mu > 0
  double T_drive = 1.0;      ///< keV
  double T_initial = 1e-3;   ///< keV
};

/// Fleck-Cummings test: sigma = 27/nu^3 (1 - exp(-nu/T)), c_v = 0.5917 a_R
/// T_b^3, black-body drive at x = 0, vacuum at x = X.
inline Problem fc_problem(const FcParameters &p) {
  if (p.n_dirs < 2 || p.n_dirs % 2 != 0)
    throw ConfigError("fc_problem: n_dirs must be even and >= 2");
  if (!(p.T_initial > 0.0) || !(p.T_drive > 0.0))
    throw ConfigError("fc_problem: temperatures must be positive");
  Problem pr;
  pr.material.c_v = 0.5917 * pr.constants.a_R * p.T_drive * p.T_drive * p.T_drive;
  pr.opacity = OpacityModel::fleck_cummings(27.0);
  pr.fine_grid = build_fc_frequency_grid(p.n_groups);
  pr.mesh = SpatialMesh::uniform(p.n_cells, p.length);
  pr.quadrature = double_gauss_legendre(p.n_dirs / 2);
  pr.T0.assign(static_cast<std::size_t>(p.n_cells), p.T_initial);
  pr.I0 = isotropic_intensity(pr.fine_grid, pr.T0, pr.quadrature.size(), pr.constants);
  set_blackbody_inflow(pr.I0, pr.fine_grid, pr.quadrature, p.T_drive, 0.0, pr.constants);
  pr.validate();
  return pr;
}

/// Uniform medium at temperature T with black-body inflow at T on both
/// sides, which is a stationary state of the discrete equations.
inline Problem equilibrium_problem(double T, int n_groups, int n_cells, double length,
                                   int n_dirs, const OpacityModel &opacity, double c_v) {
  Problem pr;
  pr.material.c_v = c_v;
  pr.opacity = opacity;
  pr.fine_grid = build_fc_frequency_grid(n_groups);
  pr.mesh = SpatialMesh::uniform(n_cells, length);
  pr.quadrature = double_gauss_legendre(n_dirs / 2);
  pr.T0.assign(static_cast<std::size_t>(n_cells), T);
  pr.I0 = isotropic_intensity(pr.fine_grid, pr.T0, pr.quadrature.size(), pr.constants);
  set_blackbody_inflow(pr.I0, pr.fine_grid, pr.quadrature, T, T, pr.constants);
  pr.validate();
  return pr;
}

} // namespace mlqd
