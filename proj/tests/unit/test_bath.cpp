#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "spinmem/bath.hpp"

using namespace spinmem;

TEST(Bath, SingleSiteLatticeIsNormalised) {
  BathParams p;
  p.Lx = p.Ly = p.Lz = 0.1;
  p.lattice_spacing = 1.0;
  const auto b = build_gaussian_bath(p);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_DOUBLE_EQ(b.a[0], 1.0);
  EXPECT_DOUBLE_EQ(b.inv_participation, 1.0);
}

TEST(Bath, MirrorPairSplitsEvenly) {
  BathParams p;
  p.Lx = 0.2;
  p.Ly = p.Lz = 0.1;
  p.lattice_spacing = 1.0;
  p.lattice_offset = {0.5, 0.0, 0.0};  // sites at x = +-0.5 only
  const auto b = build_gaussian_bath(p);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b.a[0], 0.5, 1e-15);
  EXPECT_NEAR(b.a[1], 0.5, 1e-15);
}

TEST(Bath, EmptyBoxThrows) {
  BathParams p;
  p.Lx = p.Ly = p.Lz = 0.1;
  p.lattice_spacing = 1.0;
  p.lattice_offset = {0.5, 0.0, 0.0};
  EXPECT_THROW(build_gaussian_bath(p), Error);
}

TEST(Bath, InvalidParamsThrow) {
  BathParams p;
  p.spin = 1.0;
  EXPECT_THROW(p.validate(), Error);
  p = BathParams{};
  p.B_Q = 60.0;
  EXPECT_THROW(p.validate(), Error);
  p = BathParams{};
  p.box_sigmas = 3.0;
  EXPECT_THROW(p.validate(), Error);
  p = BathParams{};
  p.Lz = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Bath, DefaultBathMatchesDirectSummation) {
  const BathParams p;
  const auto b = build_gaussian_bath(p);
  EXPECT_NEAR(static_cast<double>(b.size()), 5e4, 1e4);
  // oracle: straightforward triple loop over the lattice with long double accumulation
  long double sum = 0, sq = 0;
  const int nx = static_cast<int>(std::floor(p.box_sigmas * p.Lx / p.lattice_spacing + 1e-9));
  const int nz = static_cast<int>(std::floor(p.box_sigmas * p.Lz / p.lattice_spacing + 1e-9));
  for (int i = -nx; i <= nx; ++i)
    for (int j = -nx; j <= nx; ++j)
      for (int k = -nz; k <= nz; ++k) {
        const long double x = i * p.lattice_spacing, y = j * p.lattice_spacing, z = k * p.lattice_spacing;
        const long double w = std::exp(-(x * x) / (2 * p.Lx * p.Lx) - (y * y) / (2 * p.Ly * p.Ly) -
                                       (z * z) / (2 * p.Lz * p.Lz));
        sum += w;
        sq += w * w;
      }
  const double expected = static_cast<double>(sq / (sum * sum));
  EXPECT_NEAR(b.inv_participation, expected, 1e-6 * expected);
  EXPECT_NEAR(std::accumulate(b.a.begin(), b.a.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(b.inv_participation, 1.0 / static_cast<double>(b.size()));
  EXPECT_LE(b.inv_participation, 1.0);
  for (double a : b.a) EXPECT_GT(a, 0.0);
}

TEST(Bath, InverseParticipationDecreasesWithWidth) {
  BathParams p;
  p.Lx = p.Ly = 3.0;
  double last = 2.0;
  for (double L : {3.0, 4.0, 5.0, 6.0}) {
    p.Lx = p.Ly = L;
    const auto b = build_gaussian_bath(p);
    EXPECT_LT(b.inv_participation, last);
    last = b.inv_participation;
  }
}

TEST(Bath, SiteFloorDropsTinySites) {
  std::vector<double> w{1.0, 0.5, 1e-12};
  const auto b = bath_from_weights(w, 1e-9);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b.a[0], 2.0 / 3.0, 1e-15);
}

TEST(SpinTemperature, ZeroPolarisationIsInfiniteTemperature) {
  EXPECT_EQ(solve_spin_temperature(0.0, 1.5), 0.0);
  for (double p : level_probabilities(0.0, 1.5)) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(SpinTemperature, HalfPolarisationMatchesScalarRoot) {
  const double beta = solve_spin_temperature(0.5, 1.5);
  // independent check: bisection on the magnetisation written out for I = 3/2
  const auto mag = [](double b) {
    double num = 0, den = 0;
    for (double m : {-1.5, -0.5, 0.5, 1.5}) {
      num += m * std::exp(-b * m);
      den += std::exp(-b * m);
    }
    return num / den;
  };
  double lo = 0, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mag(mid) > -0.75 ? lo : hi) = mid;
  }
  EXPECT_NEAR(beta, 0.5 * (lo + hi), 1e-10);
  EXPECT_NEAR(mean_level(beta, 1.5), -0.75, 1e-10);
}

TEST(SpinTemperature, NearFullPolarisation) {
  const double beta = solve_spin_temperature(0.999999, 1.5);
  EXPECT_GT(beta, 10.0);
  EXPECT_GT(level_probabilities(beta, 1.5)[0], 0.999998);
  for (double P : {0.1, 0.3, 0.7, 0.9, 0.99, -0.4})
    EXPECT_NEAR(mean_level(solve_spin_temperature(P, 2.5), 2.5), -2.5 * P, 1e-10);
}

TEST(SpinTemperature, FullPolarisationIsRejected) {
  EXPECT_THROW(solve_spin_temperature(1.0, 1.5), Error);
  EXPECT_THROW(solve_spin_temperature(1.2, 1.5), Error);
}

TEST(Thermal, FullPolarisationIsDeterministic) {
  const auto M = sample_thermal_configuration(1.0, 1.5, 100, 7);
  for (double m : M.m) EXPECT_EQ(m, -1.5);
  EXPECT_DOUBLE_EQ(M.polarisation(), 1.0);
}

TEST(Thermal, UniformLevelsAtZeroPolarisation) {
  const std::size_t n = 100000;
  const auto M = sample_thermal_configuration(0.0, 1.5, n, 11);
  std::array<int, 4> count{};
  for (double m : M.m) ++count[static_cast<int>(m + 1.5)];
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int c : count) EXPECT_NEAR(c, n / 4.0, 3 * sd);
}

TEST(Thermal, HalfPolarisationSample) {
  const auto M = sample_thermal_configuration(0.5, 1.5, 50000, 3);
  EXPECT_NEAR(M.polarisation(), 0.5, 0.005);
  M.validate();
}

TEST(Thermal, ReproducibleGivenSeed) {
  const auto a = sample_thermal_configuration(0.3, 1.5, 1000, 99);
  const auto b = sample_thermal_configuration(0.3, 1.5, 1000, 99);
  const auto c = sample_thermal_configuration(0.3, 1.5, 1000, 100);
  EXPECT_EQ(a.m, b.m);
  EXPECT_NE(a.m, c.m);
}

TEST(Thermal, MeanMagnetisationWithinStandardErrors) {
  const double P = 0.6, spin = 1.5;
  const auto p = level_probabilities(solve_spin_temperature(P, spin), spin);
  double var = 0;
  for (int i = 0; i < 4; ++i) var += p[i] * std::pow(-spin + i + spin * P, 2);
  const std::size_t n = 10000;
  const auto M = sample_thermal_configuration(P, spin, n, 5);
  const double mean = std::accumulate(M.m.begin(), M.m.end(), 0.0) / n;
  EXPECT_NEAR(mean, -spin * P, 4 * std::sqrt(var / n));
}

TEST(Configuration, RejectsInvalidLevel) {
  NuclearConfiguration M{1.5, {-1.5, 0.25}};
  EXPECT_THROW(M.validate(), Error);
  M.m = {-1.5, 2.5};
  EXPECT_THROW(M.validate(), Error);
}
