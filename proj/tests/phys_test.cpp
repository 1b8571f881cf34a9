#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace mlqd;

namespace {

const PhysicalConstants K;
constexpr double kInf = std::numeric_limits<double>::infinity();

double planck_oracle(double T, double a, double b) {
  return oracle::integrate([&](double nu) { return oracle::planck_spectrum(nu, T, K); }, a, b);
}

double planck_dT_oracle(double T, double a, double b) {
  return oracle::integrate([&](double nu) { return oracle::planck_spectrum_dT(nu, T, K); }, a, b);
}

} // namespace

TEST(PlanckB, LimitsAndDirectValue) {
  EXPECT_EQ(planck_B(0.0, 1.0, K), 0.0);
  EXPECT_EQ(planck_B(1e4, 1.0, K), 0.0);
  using boost::multiprecision::cpp_bin_float_50;
  const cpp_bin_float_50 pi = boost::math::constants::pi<cpp_bin_float_50>();
  const cpp_bin_float_50 pref = cpp_bin_float_50(15) * cpp_bin_float_50("0.01372016") *
                                cpp_bin_float_50("29.9792458") / (2 * pow(pi, 4));
  const double expected = static_cast<double>(pref / (exp(cpp_bin_float_50(1)) - 1));
  EXPECT_NEAR(planck_B(1.0, 1.0, K), expected, 1e-15 * expected);
}

TEST(PlanckB, RejectsBadInput) {
  EXPECT_THROW(planck_B(std::nan(""), 1.0, K), DomainError);
  EXPECT_THROW(planck_B(1.0, kInf, K), DomainError);
  EXPECT_THROW(planck_B(1.0, 0.0, K), DomainError);
  EXPECT_THROW(planck_B(-1.0, 1.0, K), DomainError);
}

TEST(PlanckGroup, StefanBoltzmannOverFcGrid) {
  const FrequencyGrid grid = build_fc_frequency_grid(256);
  for (double T : {1e-3, 0.05, 0.3, 1.0, 3.0}) {
    double sum = 0.0;
    for (std::size_t g = 0; g < grid.n_groups(); ++g)
      sum += planck_group(T, grid.lower(g), grid.upper(g), K);
    const double exact = 0.5 * K.c * K.a_R * std::pow(T, 4);
    EXPECT_NEAR(sum, exact, 1e-10 * exact) << "T = " << T;
  }
}

TEST(PlanckGroup, ArbitraryPartitionSumsToTotal) {
  const std::vector<double> edges{0.0, 0.01, 0.37, 1.9, 2.0, 2.1, 7.5, 40.0};
  for (double T : {0.2, 1.0, 2.5}) {
    double sum = 0.0;
    for (std::size_t g = 0; g + 1 < edges.size(); ++g)
      sum += planck_group(T, edges[g], edges[g + 1], K);
    sum += planck_group(T, edges.back(), kInf, K);
    const double exact = 0.5 * K.c * K.a_R * std::pow(T, 4);
    EXPECT_NEAR(sum, exact, 1e-12 * exact);
  }
}

TEST(PlanckGroup, MatchesAdaptiveQuadrature) {
  for (auto [T, a, b] : {std::tuple{1.0, 0.1, 10.0}, {1.0, 1.0, 2.0}, {0.3, 0.0, 0.5},
                         {1.0, 1.9, 2.1}, {0.05, 1.0, 1.5}, {2.0, 1e-4, 1.2e-4}}) {
    const double ref = planck_oracle(T, a, b);
    EXPECT_NEAR(planck_group(T, a, b, K), ref, 1e-12 * ref) << T << " " << a << " " << b;
  }
}

TEST(PlanckGroup, WienTailAndErrors) {
  EXPECT_LT(planck_group(1.0, 710.0, 720.0, K), 1e-290);
  EXPECT_THROW(planck_group(0.0, 0.0, 1.0, K), DomainError);
  EXPECT_THROW(planck_group(-1.0, 0.0, 1.0, K), DomainError);
  EXPECT_THROW(planck_group(1.0, 2.0, 1.0, K), DomainError);
}

TEST(PlanckDerivative, FullRangeAndQuadrature) {
  for (double T : {0.1, 1.0, 2.0}) {
    const double exact = 2.0 * K.c * K.a_R * T * T * T;
    EXPECT_NEAR(planck_dT_group(T, 0.0, kInf, K), exact, 1e-12 * exact);
    double sum = 0.0;
    const FrequencyGrid grid = build_fc_frequency_grid(64);
    for (std::size_t g = 0; g < grid.n_groups(); ++g)
      sum += planck_dT_group(T, grid.lower(g), grid.upper(g), K);
    EXPECT_NEAR(sum, exact, 1e-10 * exact);
  }
  const double ref = planck_dT_oracle(1.0, 0.1, 10.0);
  EXPECT_NEAR(planck_dT_group(1.0, 0.1, 10.0, K), ref, 1e-12 * ref);
  EXPECT_LT(planck_dT_group(1.0, 710.0, 720.0, K), 1e-290);
}

TEST(PlanckDerivative, AgreesWithDifferenceQuotient) {
  const double T = 0.7, h = 1e-5;
  const double fd = (planck_group(T + h, 0.5, 3.0, K) - planck_group(T - h, 0.5, 3.0, K)) / (2 * h);
  EXPECT_NEAR(planck_dT_group(T, 0.5, 3.0, K), fd, 1e-8 * fd);
}

TEST(GroupOpacity, ConstantOpacityIsExact) {
  const OpacityModel s = OpacityModel::constant(2.5);
  for (auto [a, b] : {std::pair{0.0, 1e-4}, {0.3, 0.9}, {10.0, kInf}}) {
    EXPECT_DOUBLE_EQ(sigma_B_group(1.0, a, b, s), 2.5);
    EXPECT_DOUBLE_EQ(sigma_E_group(1.0, 0.4, a, b, s), 2.5);
    EXPECT_NEAR(sigma_R_group(1.0, 0.4, a, b, s), 2.5, 1e-14);
  }
}

TEST(GroupOpacity, FleckCummingsMeansMatchQuadrature) {
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  for (auto [T, Tr, a, b] : {std::tuple{1.0, 1.0, 1.0, 2.0}, {1.0, 0.5, 1.0, 2.0},
                             {0.2, 0.6, 0.05, 0.3}, {1.0, 1.0, 0.1, 10.0}}) {
    auto planck_at = [&](double Tw) {
      return [&, Tw](double nu) { return oracle::planck_spectrum(nu, Tw, K); };
    };
    const double num_B = oracle::integrate([&](double nu) { return s(nu, T) * planck_at(T)(nu); }, a, b);
    const double den_B = oracle::integrate(planck_at(T), a, b);
    EXPECT_NEAR(sigma_B_group(T, a, b, s), num_B / den_B, 1e-11 * num_B / den_B);
    const double num_E = oracle::integrate([&](double nu) { return s(nu, T) * planck_at(Tr)(nu); }, a, b);
    const double den_E = oracle::integrate(planck_at(Tr), a, b);
    EXPECT_NEAR(sigma_E_group(T, Tr, a, b, s), num_E / den_E, 1e-11 * num_E / den_E);
    const double num_R =
        oracle::integrate([&](double nu) { return oracle::planck_spectrum_dT(nu, Tr, K); }, a, b);
    const double den_R = oracle::integrate(
        [&](double nu) { return oracle::planck_spectrum_dT(nu, Tr, K) / s(nu, T); }, a, b);
    EXPECT_NEAR(sigma_R_group(T, Tr, a, b, s), num_R / den_R, 1e-11 * num_R / den_R);
  }
}

TEST(GroupOpacity, MeansLieWithinIntervalRange) {
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  const FrequencyGrid grid = build_fc_frequency_grid(32);
  for (std::size_t g = 1; g + 1 < grid.n_groups(); ++g) {
    const double a = grid.lower(g), b = grid.upper(g);
    const double hi = s(a, 0.5), lo = s(b, 0.5);
    for (double v : {sigma_B_group(0.5, a, b, s), sigma_E_group(0.5, 0.2, a, b, s),
                     sigma_R_group(0.5, 0.2, a, b, s)}) {
      EXPECT_GE(v, lo * (1 - 1e-12));
      EXPECT_LE(v, hi * (1 + 1e-12));
    }
  }
}

TEST(GroupOpacity, PlanckAndEmissionMeansShareNodes) {
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  for (auto [a, b] : {std::pair{0.1, 0.2}, {1.0, 3.0}, {10.0, kInf}})
    EXPECT_EQ(sigma_E_group(0.8, 0.8, a, b, s), sigma_B_group(0.8, a, b, s));
}

TEST(GroupOpacity, HarmonicMeanOfPiecewiseConstant) {
  // sigma = 1 below e, 3 above; [1, e^2] is split on a panel edge at e.
  const double a = 1.0, m = std::numbers::e, b = m * m;
  const OpacityModel s{[m](double nu, double) { return nu < m ? 1.0 : 3.0; }, {}};
  const double w1 = planck_dT_group(1.0, a, m, K), w2 = planck_dT_group(1.0, m, b, K);
  EXPECT_NEAR(sigma_R_group(1.0, 1.0, a, b, s), (w1 + w2) / (w1 / 1.0 + w2 / 3.0), 1e-13);
  const OpacityModel eq{[](double nu, double) { return nu < 1.0 ? 1.0 : 3.0; }, {}};
  EXPECT_GT(sigma_B_group(1.0, 0.5, 2.0, eq), sigma_R_group(1.0, 1.0, 0.5, 2.0, eq));
}

TEST(GroupOpacity, SplittingInvariantOnlyForConstantOpacity) {
  const double T = 0.6, a = 0.2, m = 0.9, b = 2.5;
  auto recombined = [&](const OpacityModel &s) {
    const double b1 = planck_group(T, a, m, K), b2 = planck_group(T, m, b, K);
    return (sigma_B_group(T, a, m, s) * b1 + sigma_B_group(T, m, b, s) * b2) / (b1 + b2);
  };
  const OpacityModel c = OpacityModel::constant(4.0);
  EXPECT_NEAR(recombined(c), sigma_B_group(T, a, b, c), 1e-14);
  const OpacityModel fc = OpacityModel::fleck_cummings(27.0);
  EXPECT_NEAR(recombined(fc), sigma_B_group(T, a, b, fc), 1e-10 * sigma_B_group(T, a, b, fc));
  const double rr = sigma_R_group(T, T, a, b, fc);
  const double r1 = sigma_R_group(T, T, a, m, fc), r2 = sigma_R_group(T, T, m, b, fc);
  EXPECT_GT(std::abs(0.5 * (r1 + r2) - rr), 1e-3 * rr);
}

TEST(GroupOpacity, WienTailGroupStaysFinite) {
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  const double v = sigma_B_group(1e-3, 5.0, 10.0, s);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LE(v, s(5.0, 1e-3) * (1 + 1e-12));
  EXPECT_GE(v, s(10.0, 1e-3));
}

TEST(GroupOpacity, TemperatureDerivatives) {
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  const double nu = 0.8, T = 0.5, h = 1e-6;
  EXPECT_NEAR(s.dT(nu, T), (s(nu, T + h) - s(nu, T - h)) / (2 * h), 1e-6 * std::abs(s.dT(nu, T)));
  const OpacityModel no_derivative{s.sigma, {}};
  EXPECT_NEAR(no_derivative.dT(nu, T), s.dT(nu, T), 1e-6 * std::abs(s.dT(nu, T)));
  EXPECT_EQ(OpacityModel::constant(3.0).dT(nu, T), 0.0);
}

TEST(OpacityTable, EmissionSlopeMatchesDifferenceQuotient) {
  const FrequencyGrid grid = build_fc_frequency_grid(16);
  const OpacityModel s = OpacityModel::fleck_cummings(27.0);
  const double T = 0.4, h = 1e-6;
  const std::vector<double> Ts{T}, Tp{T + h}, Tm{T - h}, Tr{0.3};
  const OpacityTable t = evaluate_opacities(grid, Ts, Tr, s, K);
  const OpacityTable tp = evaluate_opacities(grid, Tp, Tr, s, K);
  const OpacityTable tm = evaluate_opacities(grid, Tm, Tr, s, K);
  for (std::size_t g = 0; g < grid.n_groups(); ++g) {
    const double fd = (2 * tp.sigma_B(g, 0) * tp.B(g, 0) - 2 * tm.sigma_B(g, 0) * tm.B(g, 0)) / (2 * h);
    EXPECT_NEAR(t.emission_dT(g, 0), fd, 1e-6 * std::abs(fd) + 1e-300) << "group " << g;
  }
}

TEST(RadiationTemperature, Examples) {
  EXPECT_DOUBLE_EQ(radiation_temperature(K.a_R, K), 1.0);
  EXPECT_DOUBLE_EQ(radiation_temperature(16.0 * K.a_R, K), 2.0);
  EXPECT_EQ(radiation_temperature(0.0, K), K.T_floor);
  EXPECT_EQ(radiation_temperature(-1.0, K), K.T_floor);
}

TEST(Material, LinearEnergyInverts) {
  const MaterialModel m{0.5917 * K.a_R};
  for (double T : {1e-3, 0.4, 2.0}) EXPECT_NEAR(m.eps_inverse(m.eps(T)), T, 1e-16 * T);
  EXPECT_LT(m.eps(0.1), m.eps(0.2));
}
