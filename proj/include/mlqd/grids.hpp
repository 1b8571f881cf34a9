/**
 * @file grids.hpp
 * @brief Photon-frequency grids and nested hierarchies, the spatial mesh and
 *        the double Gauss-Legendre angular set.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"

namespace mlqd {

struct FrequencyGrid {
  std::vector<double> edges;  ///< edges[0] = 0, strictly increasing [keV]
  /// The last edge stands in for infinity in Planck integrals.
  bool top_is_infinite = true;

  [[nodiscard]] std::size_t n_groups() const { return edges.empty() ? 0 : edges.size() - 1; }
  [[nodiscard]] double lower(std::size_t g) const { return edges[g]; }
  [[nodiscard]] double upper(std::size_t g) const {
    if (top_is_infinite && g + 1 == n_groups()) return std::numeric_limits<double>::infinity();
    return edges[g + 1];
  }

  void validate() const {
    if (edges.size() < 2) throw ConfigError("FrequencyGrid: need at least one group");
    if (edges.front() != 0.0) throw ConfigError("FrequencyGrid: first edge must be 0");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1]))
        throw ConfigError("FrequencyGrid: edges must be strictly increasing");
  }
};

/// Fleck-Cummings group structure: [0, 1e-4], n-2 log-spaced groups up to
/// 10 keV, and [10, 1e7].
inline FrequencyGrid build_fc_frequency_grid(int n_groups, double nu_a = 1e-4,
                                             double nu_b = 10.0, double nu_max = 1e7) {
  if (n_groups < 3)
    throw ConfigError("build_fc_frequency_grid: n_groups must be >= 3, got " +
                      std::to_string(n_groups));
  FrequencyGrid grid;
  grid.edges.reserve(n_groups + 1);
  grid.edges.push_back(0.0);
  const int interior = n_groups - 2;
  const double la = std::log10(nu_a);
  const double lb = std::log10(nu_b);
  for (int k = 0; k <= interior; ++k) {
    if (k == 0) grid.edges.push_back(nu_a);
    else if (k == interior) grid.edges.push_back(nu_b);
    else grid.edges.push_back(std::pow(10.0, la + (lb - la) * k / interior));
  }
  grid.edges.push_back(nu_max);
  return grid;
}

/// Index range [begin, end) of contiguous intervals.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  [[nodiscard]] std::size_t size() const { return end - begin; }
  bool operator==(const IndexRange &) const = default;
};

/**
 * Nested frequency grids. Levels are stored 0-based here (level 0 is the
 * fine grid, level size()-1 the single grey interval); the public grid index
 * gamma used by cycle schedules is 1-based, gamma = level + 1.
 */
class FrequencyGridHierarchy {
 public:
  [[nodiscard]] std::size_t size() const { return levels_.size(); }
  [[nodiscard]] const FrequencyGrid &level(std::size_t l) const { return levels_[l]; }
  [[nodiscard]] const FrequencyGrid &fine() const { return levels_.front(); }
  [[nodiscard]] std::size_t n_groups(std::size_t l) const { return levels_[l].n_groups(); }

  /// Intervals of level l-1 merged into interval p of level l.
  [[nodiscard]] IndexRange children(std::size_t l, std::size_t p) const {
    return children_[l][p];
  }
  /// Fine groups inside interval p of level l.
  [[nodiscard]] IndexRange fine_members(std::size_t l, std::size_t p) const {
    return fine_members_[l][p];
  }
  [[nodiscard]] std::vector<std::size_t> group_counts() const {
    std::vector<std::size_t> out;
    for (const auto &g : levels_) out.push_back(g.n_groups());
    return out;
  }

  friend FrequencyGridHierarchy build_hierarchy(const FrequencyGrid &,
                                                const std::vector<int> &);

 private:
  std::vector<FrequencyGrid> levels_;
  std::vector<std::vector<IndexRange>> children_;
  std::vector<std::vector<IndexRange>> fine_members_;
};

/// Successive uniform coarsening. Runs are as even as possible; when the
/// count does not divide, the longer runs sit at the high-frequency end.
inline FrequencyGridHierarchy build_hierarchy(const FrequencyGrid &fine,
                                              const std::vector<int> &counts) {
  fine.validate();
  if (counts.size() < 2) throw ConfigError("grids: hierarchy needs at least two grids");
  if (counts.front() != static_cast<int>(fine.n_groups()))
    throw ConfigError("grids: first group count " + std::to_string(counts.front()) +
                      " does not match fine grid (" + std::to_string(fine.n_groups()) + ")");
  if (counts.back() != 1) throw ConfigError("grids: last group count must be 1");
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (!(counts[i] < counts[i - 1]) || counts[i] < 1)
      throw ConfigError("grids: group counts must be strictly decreasing, got " +
                        std::to_string(counts[i - 1]) + " then " + std::to_string(counts[i]));

  FrequencyGridHierarchy h;
  h.levels_.push_back(fine);
  h.children_.emplace_back();
  std::vector<IndexRange> identity(fine.n_groups());
  for (std::size_t g = 0; g < fine.n_groups(); ++g) identity[g] = {g, g + 1};
  h.fine_members_.push_back(identity);

  for (std::size_t l = 1; l < counts.size(); ++l) {
    const FrequencyGrid &prev = h.levels_[l - 1];
    const std::size_t n_prev = prev.n_groups();
    const std::size_t n_new = counts[l];
    const std::size_t base = n_prev / n_new;
    const std::size_t extra = n_prev % n_new;
    FrequencyGrid grid;
    grid.top_is_infinite = fine.top_is_infinite;
    grid.edges.push_back(prev.edges.front());
    std::vector<IndexRange> kids(n_new);
    std::vector<IndexRange> members(n_new);
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < n_new; ++p) {
      const std::size_t run = base + (p >= n_new - extra ? 1 : 0);
      kids[p] = {cursor, cursor + run};
      cursor += run;
      grid.edges.push_back(prev.edges[cursor]);
      members[p] = {h.fine_members_[l - 1][kids[p].begin].begin,
                    h.fine_members_[l - 1][kids[p].end - 1].end};
    }
    h.levels_.push_back(std::move(grid));
    h.children_.push_back(std::move(kids));
    h.fine_members_.push_back(std::move(members));
  }
  return h;
}

struct SpatialMesh {
  std::vector<double> faces;  ///< x_{1/2} .. x_{n+1/2} [cm]

  [[nodiscard]] std::size_t n_cells() const { return faces.size() - 1; }
  [[nodiscard]] double width(std::size_t i) const { return faces[i + 1] - faces[i]; }
  [[nodiscard]] double center(std::size_t i) const { return 0.5 * (faces[i] + faces[i + 1]); }
  /// Width of the dual cell around interior face i+1/2 (between cells i, i+1).
  [[nodiscard]] double dual_width(std::size_t i) const {
    return 0.5 * (width(i) + width(i + 1));
  }
  [[nodiscard]] double length() const { return faces.back() - faces.front(); }

  static SpatialMesh uniform(int n_cells, double length) {
    if (n_cells < 1) throw ConfigError("SpatialMesh: need at least one cell");
    if (!(length > 0.0)) throw ConfigError("SpatialMesh: length must be positive");
    SpatialMesh m;
    m.faces.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) m.faces[i] = length * i / n_cells;
    return m;
  }

  void validate() const {
    if (faces.size() < 2) throw ConfigError("SpatialMesh: need at least one cell");
    for (std::size_t i = 1; i < faces.size(); ++i)
      if (!(faces[i] > faces[i - 1]))
        throw ConfigError("SpatialMesh: faces must be strictly increasing");
  }
};

/// Discrete ordinates in slab geometry. Directions are ordered with all
/// mu < 0 first (ascending), then mu > 0 (ascending).
struct AngularQuadrature {
  std::vector<double> mu;
  std::vector<double> w;

  [[nodiscard]] std::size_t size() const { return mu.size(); }
};

/// Gauss-Legendre on each half range [0,1] and [-1,0].
inline AngularQuadrature double_gauss_legendre(int n_per_half) {
  if (n_per_half < 1) throw ConfigError("double_gauss_legendre: n_per_half must be >= 1");
  const GaussRule rule = gauss_legendre(n_per_half);
  AngularQuadrature q;
  q.mu.resize(2 * n_per_half);
  q.w.resize(2 * n_per_half);
  for (int k = 0; k < n_per_half; ++k) {
    const double mu = 0.5 * (1.0 + rule.nodes[k]);
    const double w = 0.5 * rule.weights[k];
    q.mu[n_per_half + k] = mu;
    q.w[n_per_half + k] = w;
    q.mu[n_per_half - 1 - k] = -mu;
    q.w[n_per_half - 1 - k] = w;
  }
  return q;
}

} // namespace mlqd
