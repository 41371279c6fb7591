#include <cmath>

#include <gtest/gtest.h>

#include "spinmem/chain.hpp"
#include "spinmem/spinwave.hpp"

using namespace spinmem;

TEST(Ladder, HandValues) {
  EXPECT_NEAR(ladder_prefactor(1, Sign::plus, -1.5, 1.5), -2 * std::sqrt(3.0), 1e-14);
  EXPECT_EQ(ladder_prefactor(1, Sign::plus, -0.5, 1.5), 0.0);
  EXPECT_NEAR(ladder_prefactor(2, Sign::plus, -1.5, 1.5), 2 * std::sqrt(3.0), 1e-14);
  EXPECT_EQ(ladder_prefactor(2, Sign::plus, 0.5, 1.5), 0.0);
  EXPECT_EQ(ladder_prefactor(2, Sign::plus, 1.5, 1.5), 0.0);
  EXPECT_EQ(ladder_prefactor(1, Sign::minus, -1.5, 1.5), 0.0);
  EXPECT_THROW(ladder_prefactor(1, Sign::plus, 0.0, 1.5), Error);
  EXPECT_THROW(ladder_prefactor(3, Sign::plus, 0.5, 1.5), Error);
}

TEST(Ladder, MatchesSpinMatrices) {
  // oracle: <m+zeta| op |m> from explicit I+ and Iz matrix elements
  for (double spin : {1.5, 2.5, 3.5}) {
    const auto cp = [&](double m) { return std::sqrt(std::max(0.0, spin * (spin + 1) - m * (m + 1))); };
    for (double m = -spin; m <= spin + 1e-9; m += 1.0) {
      const double expect1 = m + 1 <= spin ? cp(m) * (m + 1) + m * cp(m) : 0.0;
      const double expect2 = m + 2 <= spin ? cp(m) * cp(m + 1) : 0.0;
      EXPECT_NEAR(ladder_prefactor(1, Sign::plus, m, spin), expect1, 1e-12);
      EXPECT_NEAR(ladder_prefactor(2, Sign::plus, m, spin), expect2, 1e-12);
      // lowering is the transpose of raising
      if (m + 1 <= spin) {
        EXPECT_NEAR(ladder_prefactor(1, Sign::minus, m + 1, spin), expect1, 1e-12);
      }
      if (m + 2 <= spin) {
        EXPECT_NEAR(ladder_prefactor(2, Sign::minus, m + 2, spin), expect2, 1e-12);
      }
    }
  }
}

TEST(Ladder, DarkTransitionIdentityForSpinThreeHalves) {
  for (int zeta : {1, 2})
    for (double m = -1.5; m <= 1.5; m += 1.0) {
      const double next = m + zeta;
      const double p2 = next <= 1.5 ? ladder_prefactor(zeta, Sign::plus, next, 1.5) : 0.0;
      EXPECT_EQ(ladder_prefactor(zeta, Sign::plus, m, 1.5) * p2, 0.0);
      // no level can be both raised and lowered
      EXPECT_EQ(ladder_prefactor(zeta, Sign::plus, m, 1.5) * ladder_prefactor(zeta, Sign::minus, m, 1.5), 0.0);
    }
}

TEST(Modes, UniformAnglesReproduceBathWeights) {
  std::vector<double> w{3, 1, 2, 0.5};
  const auto bath = bath_from_weights(w);
  const BathParams p;
  for (int z : {1, 2}) {
    const auto m = mode_couplings(bath, p, z);
    double sum = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      EXPECT_NEAR(m.a_mode[j], bath.a[j], 1e-15);
      sum += m.a_mode[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    const double f = z == 1 ? std::sin(2 * p.theta) : std::pow(std::sin(p.theta), 2);
    EXPECT_NEAR(m.A_zeta, 0.5 * p.A_total * p.B_Q * f / p.omega_Zn, 1e-12 * std::abs(m.A_zeta));
  }
}

TEST(Modes, PerSiteAnglesFollowDefinition) {
  std::vector<double> w{1, 2, 3};
  const auto bath = bath_from_weights(w);
  QuadrupoleField f;
  f.B_Q_site = {1.0, 2.0, 1.5};
  f.theta_site = {0.3, 0.7, 1.1};
  const double A_total = 100.0, omega = 40.0;
  const auto m = mode_couplings(bath, A_total, omega, 1, f);
  double A1 = 0;
  std::vector<double> raw;
  for (int j = 0; j < 3; ++j) {
    raw.push_back(A_total * bath.a[j] * f.B_Q_site[j] * std::sin(2 * f.theta_site[j]) / omega);
    A1 += 0.5 * raw.back();
  }
  EXPECT_NEAR(m.A_zeta, A1, 1e-12 * A1);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.a_mode[j], raw[j] / (2 * A1), 1e-14);
}

TEST(Modes, ZeemanScaling) {
  const auto bath = uniform_bath(10);
  QuadrupoleField f;
  const auto a = mode_couplings(bath, 1000.0, 50.0, 2, f);
  const auto b = mode_couplings(bath, 1000.0, 100.0, 2, f);
  EXPECT_NEAR(b.A_zeta, a.A_zeta / 2, 1e-12);
}

TEST(Modes, DecoupledModeThrows) {
  const auto bath = uniform_bath(4);
  QuadrupoleField f;
  f.theta = pi / 2;
  EXPECT_THROW(mode_couplings(bath, 1000.0, 50.0, 1, f), Error);
  f.theta = 0.0;
  EXPECT_THROW(mode_couplings(bath, 1000.0, 50.0, 2, f), Error);
}

TEST(Collective, FactorsForSpinThreeHalves) {
  EXPECT_NEAR(std::abs(collective_factor(1, 1.5)), 2 * std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(collective_factor(2, 1.5), 2 * std::sqrt(3.0), 1e-14);
  EXPECT_LT(collective_factor(1, 1.5), 0.0);
  EXPECT_EQ(collective_rate(2, 1.5, 1.0, 0.0), 0.0);
}

TEST(Collective, MatchesChainRateAtFullPolarisation) {
  std::vector<double> w{1, 2, 3, 4, 5};
  const auto bath = bath_from_weights(w);
  const BathParams p;
  for (int z : {1, 2}) {
    const auto mode = mode_couplings(bath, p, z);
    const auto r = omega_rates(fully_polarised(1.5, 5), mode);
    EXPECT_NEAR(r.omega_plus, std::abs(collective_factor(z, 1.5)) * std::sqrt(mode.sum_a_sq), 1e-13);
    EXPECT_NEAR(r.G_plus, collective_rate(z, 1.5, effective_coupling(mode.A_zeta), mode.sum_a_sq), 1e-9);
  }
}

TEST(Collective, SqrtNEnhancement) {
  // with a_j = 1/N and A_zeta fixed, g grows as sqrt(N) relative to a single-site coupling A/N
  for (int n : {10, 100, 1000}) {
    const double g = collective_rate(2, 1.5, 1.0, 1.0 / n);
    EXPECT_NEAR(g / (1.0 / n), 2 * std::sqrt(3.0) * std::sqrt(static_cast<double>(n)), 1e-9);
  }
}
