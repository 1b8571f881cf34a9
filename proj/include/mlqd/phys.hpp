/**
 * @file phys.hpp
 * @brief Physical constants, Planck group integrals and group-averaged
 *        opacities.
 *
 * Units: lengths in cm, time in ns, temperatures and photon energies in keV,
 * energy densities in jerks/cm^3 (1 jerk = 1e9 J). Photon frequency is
 * carried as the photon energy h*nu in keV throughout.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"

namespace mlqd {

struct PhysicalConstants {
  double c = 29.9792458;     ///< speed of light [cm/ns]
  double a_R = 0.01372016;   ///< radiation constant [jerk/(cm^3 keV^4)]
  double T_floor = 1.0e-6;   ///< temperature floor [keV]

  /// Prefactor of B(nu,T) = P * nu^3 / (exp(nu/T) - 1) per keV of photon
  /// energy. This is 4*pi/(h^3 c^2) expressed through a_R = 8 pi^5/(15 h^3 c^3),
  /// so the full-spectrum integral is exactly c*a_R*T^4/2.
  [[nodiscard]] double planck_prefactor() const {
    return 15.0 * a_R * c / (2.0 * std::pow(std::numbers::pi, 4));
  }

  void validate() const {
    if (!(c > 0.0) || !(a_R > 0.0) || !(T_floor > 0.0))
      throw ConfigError("PhysicalConstants: c, a_R and T_floor must be positive");
  }
};

/// Spectral opacity sigma(nu, T) [1/cm].
struct OpacityModel {
  std::function<double(double, double)> sigma;
  std::function<double(double, double)> sigma_dT;  ///< optional d sigma/dT

  double operator()(double nu, double T) const { return sigma(nu, T); }

  /// d sigma/dT; central difference when no derivative is supplied.
  [[nodiscard]] double dT(double nu, double T) const {
    if (sigma_dT) return sigma_dT(nu, T);
    const double h = 1e-5 * T;
    return (sigma(nu, T + h) - sigma(nu, T - h)) / (2.0 * h);
  }

  /// sigma = coefficient/nu^3 * (1 - exp(-nu/T)).
  static OpacityModel fleck_cummings(double coefficient = 27.0) {
    return {[coefficient](double nu, double T) {
              return coefficient / (nu * nu * nu) * -std::expm1(-nu / T);
            },
            [coefficient](double nu, double T) {
              return -coefficient / (nu * nu * T * T) * std::exp(-nu / T);
            }};
  }

  static OpacityModel constant(double sigma0) {
    return {[sigma0](double, double) { return sigma0; }, [](double, double) { return 0.0; }};
  }
};

/// Linear material energy eps(T) = c_v T.
struct MaterialModel {
  double c_v = 1.0;  ///< [jerk/(cm^3 keV)]

  [[nodiscard]] double eps(double T) const { return c_v * T; }
  [[nodiscard]] double eps_inverse(double e) const { return e / c_v; }
};

/// Spectral black-body emission 2*pi*B_nu per keV of photon energy.
inline double planck_B(double nu, double T, const PhysicalConstants &k) {
  if (!std::isfinite(nu) || !std::isfinite(T))
    throw DomainError("planck_B: non-finite argument");
  if (nu < 0.0 || T <= 0.0) throw DomainError("planck_B: requires nu >= 0, T > 0");
  if (nu == 0.0) return 0.0;
  const double x = nu / T;
  if (x > 700.0) return 0.0;
  return k.planck_prefactor() * nu * nu * nu / std::expm1(x);
}

namespace detail {

constexpr double pi4_15 = std::numbers::pi * std::numbers::pi *
                          std::numbers::pi * std::numbers::pi / 15.0;
constexpr double planck_switch = 2.0;

/// Coefficients of x^(2k+3) in the small-x expansion of int_0^x t^3/(e^t-1),
/// using B_2k/(2k)! = (-1)^(k+1) 2 zeta(2k) / (2 pi)^(2k).
inline const std::array<double, 24> &planck_series_coefficients() {
  static const std::array<double, 24> coeffs = [] {
    std::array<double, 24> out{};
    const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    double scale = 1.0;
    for (int k = 1; k <= 24; ++k) {
      scale /= two_pi_sq;
      const double zeta = std::riemann_zeta(2.0 * k);
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      out[k - 1] = sign * 2.0 * zeta * scale / (2.0 * k + 3.0);
    }
    return out;
  }();
  return coeffs;
}

/// int_0^x t^3/(e^t-1) dt for 0 <= x < planck_switch.
inline double planck_lower_series(double x) {
  const double x2 = x * x;
  double sum = x2 * x / 3.0 - x2 * x2 / 8.0;
  double power = x2 * x;
  for (double c : planck_series_coefficients()) {
    power *= x2;
    const double term = c * power;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

/// int_x^inf t^3/(e^t-1) dt for x >= planck_switch.
inline double planck_upper_series(double x) {
  if (x > 745.0) return 0.0;
  const double x2 = x * x;
  double sum = 0.0;
  for (int n = 1; n < 200; ++n) {
    const double dn = n;
    const double term = std::exp(-dn * x) *
        (x2 * x / dn + 3.0 * x2 / (dn * dn) + 6.0 * x / (dn * dn * dn) +
         6.0 / (dn * dn * dn * dn));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

inline double planck_lower(double x) {
  if (std::isinf(x)) return pi4_15;
  return x < planck_switch ? planck_lower_series(x) : pi4_15 - planck_upper_series(x);
}

inline double planck_upper(double x) {
  if (std::isinf(x)) return 0.0;
  return x < planck_switch ? pi4_15 - planck_lower_series(x) : planck_upper_series(x);
}

/// x^4/(e^x - 1), zero at 0 and at infinity.
inline double boundary_term(double x) {
  if (x == 0.0 || x > 700.0) return 0.0;
  return x * x * x * x / std::expm1(x);
}

/// int_0^x t^4 e^t/(e^t-1)^2 dt, by parts: 4 P(x) - x^4/(e^x-1).
inline double planck_dT_lower(double x) {
  if (std::isinf(x)) return 4.0 * pi4_15;
  return 4.0 * planck_lower(x) - boundary_term(x);
}

inline double planck_dT_upper(double x) {
  if (std::isinf(x)) return 0.0;
  return 4.0 * planck_upper(x) + boundary_term(x);
}

inline void check_interval(double T, double a, double b, const char *who) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw DomainError(std::string(who) + ": temperature must be positive and finite");
  if (!(a >= 0.0) || !(b > a))
    throw DomainError(std::string(who) + ": interval must satisfy 0 <= a < b");
}

constexpr int opacity_quadrature_order = 16;
constexpr double weight_cutoff = 60.0;  // e-folds of the Planck weight kept
constexpr double max_log_panel = 0.5;

inline const GaussRule &opacity_rule() {
  static const GaussRule rule = gauss_legendre(opacity_quadrature_order);
  return rule;
}

/// Quadrature node with its Planck and Planck-derivative weights, both scaled
/// by exp(a/Tw) so that Wien-tail groups keep a finite, nonzero weight.
struct WeightedNode {
  double nu;
  double w_planck;
  double w_deriv;
};

/// Nodes on [a, b]: linear Gauss-Legendre for a = 0, log-spaced panels
/// otherwise. The upper limit is cut where the weight has decayed by
/// weight_cutoff e-folds.
inline std::vector<WeightedNode> weighted_nodes(double a, double b, double Tw) {
  const GaussRule &rule = opacity_rule();
  std::vector<WeightedNode> out;
  const double b_eff = std::min(b, a + weight_cutoff * Tw);
  auto push = [&](double nu, double jac) {
    const double x = nu / Tw;
    const double shifted = std::exp(-(nu - a) / Tw);
    const double one_minus = -std::expm1(-x);
    const double nu3 = nu * nu * nu;
    out.push_back({nu, jac * nu3 * shifted / one_minus,
                   jac * nu3 * nu * shifted / (one_minus * one_minus)});
  };
  if (a == 0.0) {
    const double half = 0.5 * b_eff;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      push(half * (1.0 + rule.nodes[q]), half * rule.weights[q]);
    return out;
  }
  const double la = std::log(a);
  const double lb = std::log(b_eff);
  const int panels = std::max(1, static_cast<int>(std::ceil((lb - la) / max_log_panel)));
  const double width = (lb - la) / panels;
  out.reserve(panels * rule.nodes.size());
  for (int p = 0; p < panels; ++p) {
    const double lo = la + p * width;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = lo + 0.5 * width * (1.0 + rule.nodes[q]);
      const double nu = std::exp(u);
      push(nu, 0.5 * width * rule.weights[q] * nu);
    }
  }
  return out;
}

inline double fallback_sigma(double a, double b, double T, const OpacityModel &sigma) {
  const double top = std::isfinite(b) ? b : a + 1.0;
  const double mid = a > 0.0 ? std::sqrt(a * top) : 0.5 * top;
  return sigma(mid, T);
}

constexpr double min_weight = 1e-300;

inline double planck_mean(double T_sigma, double T_weight, double a, double b,
                          const OpacityModel &sigma) {
  double num = 0.0;
  double den = 0.0;
  for (const auto &n : weighted_nodes(a, b, T_weight)) {
    num += n.w_planck * sigma(n.nu, T_sigma);
    den += n.w_planck;
  }
  if (!(den > min_weight) || !std::isfinite(num)) return fallback_sigma(a, b, T_sigma, sigma);
  return num / den;
}

inline double rosseland_mean(double T_sigma, double T_weight, double a, double b,
                             const OpacityModel &sigma) {
  double num = 0.0;
  double den = 0.0;
  for (const auto &n : weighted_nodes(a, b, T_weight)) {
    num += n.w_deriv;
    den += n.w_deriv / sigma(n.nu, T_sigma);
  }
  if (!(den > min_weight) || !std::isfinite(num) || !(num > 0.0))
    return fallback_sigma(a, b, T_sigma, sigma);
  return num / den;
}

} // namespace detail

/// Group integral of planck_B over [a, b]; b may be +infinity.
inline double planck_group(double T, double a, double b, const PhysicalConstants &k) {
  detail::check_interval(T, a, b, "planck_group");
  const double xa = a / T;
  const double xb = b / T;
  double integral;
  if (xa >= detail::planck_switch)
    integral = detail::planck_upper(xa) - detail::planck_upper(xb);
  else
    integral = detail::planck_lower(xb) - detail::planck_lower(xa);
  const double T2 = T * T;
  return k.planck_prefactor() * T2 * T2 * std::max(integral, 0.0);
}

/// Group integral of dB/dT at T = T_r over [a, b]; b may be +infinity.
inline double planck_dT_group(double T_r, double a, double b, const PhysicalConstants &k) {
  detail::check_interval(T_r, a, b, "planck_dT_group");
  const double xa = a / T_r;
  const double xb = b / T_r;
  double integral;
  if (xa >= detail::planck_switch)
    integral = detail::planck_dT_upper(xa) - detail::planck_dT_upper(xb);
  else
    integral = detail::planck_dT_lower(xb) - detail::planck_dT_lower(xa);
  return k.planck_prefactor() * T_r * T_r * T_r * std::max(integral, 0.0);
}

/// Planck-weighted group opacity at the material temperature.
inline double sigma_B_group(double T, double a, double b, const OpacityModel &sigma) {
  detail::check_interval(T, a, b, "sigma_B_group");
  return detail::planck_mean(T, T, a, b, sigma);
}

/// Opacity at T averaged with the Planck spectrum at the radiation temperature.
inline double sigma_E_group(double T, double T_r, double a, double b,
                            const OpacityModel &sigma) {
  detail::check_interval(T, a, b, "sigma_E_group");
  detail::check_interval(T_r, a, b, "sigma_E_group");
  return detail::planck_mean(T, T_r, a, b, sigma);
}

/// Rosseland (harmonic, dB/dT-weighted) group opacity.
inline double sigma_R_group(double T, double T_r, double a, double b,
                            const OpacityModel &sigma) {
  detail::check_interval(T, a, b, "sigma_R_group");
  detail::check_interval(T_r, a, b, "sigma_R_group");
  return detail::rosseland_mean(T, T_r, a, b, sigma);
}

struct GroupOpacities {
  double sigma_B;
  double sigma_E;
  double sigma_R;
  double dsigma_B;  ///< Planck mean of d sigma/dT at T
  double sigma_dB;  ///< mean of sigma weighted with dB/dT at T
};

/// All three group means for one interval, sharing the node set at T_r
/// between the Planck (sigma_E) and Rosseland means.
inline GroupOpacities group_opacities(double T, double T_r, double a, double b,
                                      const OpacityModel &sigma) {
  detail::check_interval(T, a, b, "group_opacities");
  detail::check_interval(T_r, a, b, "group_opacities");
  GroupOpacities out{};
  {
    double num_b = 0.0, num_db = 0.0, den_b = 0.0, num_s = 0.0, den_s = 0.0;
    for (const auto &n : detail::weighted_nodes(a, b, T)) {
      const double s = sigma(n.nu, T);
      num_b += n.w_planck * s;
      num_db += n.w_planck * sigma.dT(n.nu, T);
      den_b += n.w_planck;
      num_s += n.w_deriv * s;
      den_s += n.w_deriv;
    }
    if (den_b > detail::min_weight && std::isfinite(num_b)) {
      out.sigma_B = num_b / den_b;
      out.dsigma_B = num_db / den_b;
    } else {
      out.sigma_B = detail::fallback_sigma(a, b, T, sigma);
      out.dsigma_B = 0.0;
    }
    out.sigma_dB = (den_s > detail::min_weight && std::isfinite(num_s))
                       ? num_s / den_s
                       : out.sigma_B;
  }
  double num_e = 0.0, den_e = 0.0, num_r = 0.0, den_r = 0.0;
  for (const auto &n : detail::weighted_nodes(a, b, T_r)) {
    const double s = sigma(n.nu, T);
    num_e += n.w_planck * s;
    den_e += n.w_planck;
    num_r += n.w_deriv;
    den_r += n.w_deriv / s;
  }
  out.sigma_E = (den_e > detail::min_weight && std::isfinite(num_e))
                    ? num_e / den_e
                    : detail::fallback_sigma(a, b, T, sigma);
  out.sigma_R = (den_r > detail::min_weight && num_r > 0.0 && std::isfinite(num_r))
                    ? num_r / den_r
                    : detail::fallback_sigma(a, b, T, sigma);
  return out;
}

/// Effective radiation temperature (E/a_R)^(1/4), floored.
inline double radiation_temperature(double E, const PhysicalConstants &k) {
  if (!(E > 0.0)) return k.T_floor;
  return std::max(std::sqrt(std::sqrt(E / k.a_R)), k.T_floor);
}

} // namespace mlqd
