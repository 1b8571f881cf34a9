/**
 * @file moments.hpp
 * @brief Angular moments E (cells and boundary faces) and F (faces) per
 *        frequency interval.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "array2d.hpp"

namespace mlqd {

struct MomentField {
  Array2D E;                   ///< (interval, cell)
  std::vector<double> E_left;  ///< at x_{1/2}
  std::vector<double> E_right; ///< at x_{n+1/2}
  Array2D F;                   ///< (interval, face), face k is x_{k+1/2}

  MomentField() = default;
  MomentField(std::size_t n_intervals, std::size_t n_cells)
      : E(n_intervals, n_cells), E_left(n_intervals, 0.0), E_right(n_intervals, 0.0),
        F(n_intervals, n_cells + 1) {}

  [[nodiscard]] std::size_t n_intervals() const { return E.rows(); }
  [[nodiscard]] std::size_t n_cells() const { return E.cols(); }

  [[nodiscard]] std::vector<double> total_E() const {
    std::vector<double> out(n_cells(), 0.0);
    for (std::size_t p = 0; p < n_intervals(); ++p)
      for (std::size_t i = 0; i < n_cells(); ++i) out[i] += E(p, i);
    return out;
  }
  [[nodiscard]] std::vector<double> total_F() const {
    std::vector<double> out(n_cells() + 1, 0.0);
    for (std::size_t p = 0; p < n_intervals(); ++p)
      for (std::size_t k = 0; k <= n_cells(); ++k) out[k] += F(p, k);
    return out;
  }
};

} // namespace mlqd
