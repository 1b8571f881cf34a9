/**
 * @file opacity_table.hpp
 * @brief Per-group, per-cell opacities and emission on one frequency grid.
 */
#pragma once

#include <cstddef>
#include <span>

#include "array2d.hpp"
#include "grids.hpp"
#include "phys.hpp"

namespace mlqd {

struct OpacityTable {
  Array2D sigma_E;  ///< (group, cell) [1/cm]
  Array2D sigma_B;
  Array2D sigma_R;  ///< cell values; faces are formed by the LOQD assembly
  Array2D B;        ///< group Planck integral B_g(T_i)
  Array2D emission_dT;  ///< d(2 sigma_B,g B_g)/dT at T_i
};

/// Evaluates group opacities at cell temperatures T and radiation
/// temperatures T_r.
inline OpacityTable evaluate_opacities(const FrequencyGrid &grid, std::span<const double> T,
                                       std::span<const double> T_r,
                                       const OpacityModel &opacity,
                                       const PhysicalConstants &k) {
  const std::size_t ng = grid.n_groups();
  const std::size_t nx = T.size();
  OpacityTable t{Array2D(ng, nx), Array2D(ng, nx), Array2D(ng, nx), Array2D(ng, nx),
                 Array2D(ng, nx)};
  for (std::size_t g = 0; g < ng; ++g) {
    const double a = grid.lower(g);
    const double b = grid.upper(g);
    for (std::size_t i = 0; i < nx; ++i) {
      const GroupOpacities o = group_opacities(T[i], T_r[i], a, b, opacity);
      t.sigma_E(g, i) = o.sigma_E;
      t.sigma_B(g, i) = o.sigma_B;
      t.sigma_R(g, i) = o.sigma_R;
      t.B(g, i) = planck_group(T[i], a, b, k);
      t.emission_dT(g, i) =
          2.0 * (o.dsigma_B * t.B(g, i) + o.sigma_dB * planck_dT_group(T[i], a, b, k));
    }
  }
  return t;
}

} // namespace mlqd
