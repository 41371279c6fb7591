#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spinmem/dynamics.hpp"

using namespace spinmem;

namespace {

constexpr cplx I(0.0, 1.0);

std::pair<cplx, cplx> random_amplitudes(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  cplx a(n(rng), n(rng)), b(n(rng), n(rng));
  const double norm = std::sqrt(std::norm(a) + std::norm(b));
  return {a / norm, b / norm};
}

}  // namespace

TEST(Evolve, MatchesThreeStateClosedForm) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ut(0.0, 10.0), ug(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double g = ug(rng), t = ut(rng);
    const auto [alpha, beta] = random_amplitudes(rng);
    const ChainPropagator prop(uniform_chain(g, 0.0, 1));
    const auto& c = prop.chain();
    const auto out = evolve(prop, initial_state(c, alpha, beta), t);
    Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(c.hybrid_dim());
    expect[0] = alpha * std::cos(g * t);
    expect[c.nuclear_dim() + c.plus_index(1)] = -I * alpha * std::sin(g * t);
    expect[c.nuclear_dim()] = beta;
    EXPECT_LT((out.amp - expect).norm(), 1e-10);
    EXPECT_NEAR(out.time, t, 0.0);
  }
}

TEST(Evolve, IdentityAtZeroAndUnitarity) {
  const ChainPropagator prop(uniform_chain(1.0, 0.3, 16));
  std::mt19937_64 rng(3);
  const auto [a, b] = random_amplitudes(rng);
  const auto s = initial_state(prop.chain(), a, b);
  EXPECT_LT((evolve(prop, s, 0.0).amp - s.amp).norm(), 1e-14);
  for (double t : {0.1, 1.0, 2.5, 5.0}) EXPECT_NEAR(evolve(prop, s, t).norm(), 1.0, 1e-10);
  auto d = evolve(prop, to_density(s), 2.5);
  EXPECT_NO_THROW(d.validate());
  EXPECT_NEAR(d.rho.trace().real(), 1.0, 1e-10);
}

TEST(Evolve, Linearity) {
  const ChainPropagator prop(uniform_chain(1.0, 0.3, 16));
  const auto& c = prop.chain();
  const cplx a(0.3, 0.4), b(-0.5, 0.2);
  HybridState s1{hybrid_basis_state(c, 0, 0), 0.0}, s2{hybrid_basis_state(c, 1, 0), 0.0};
  HybridState mix{a * s1.amp + b * s2.amp, 0.0};
  const double t = 2.1;
  const auto lhs = evolve(prop, mix, t).amp;
  const Eigen::VectorXcd rhs = a * evolve(prop, s1, t).amp + b * evolve(prop, s2, t).amp;
  EXPECT_LT((lhs - rhs).norm(), 1e-10);
}

TEST(Evolve, TruncationExceededThrows) {
  const ChainPropagator prop(uniform_chain(1.0, 0.8, 2));
  const auto s = initial_state(prop.chain(), 1.0, 0.0);
  EXPECT_THROW(evolve(prop, s, 3.0), TruncationError);
  EXPECT_THROW(evolve(prop, to_density(s), 3.0), TruncationError);
}

TEST(Density, ValidateRejectsBadMatrices) {
  HybridDensity d{Eigen::MatrixXcd::Identity(2, 2), 0.0};
  EXPECT_THROW(d.validate(), Error);
  d.rho(0, 0) = 1.5;
  d.rho(1, 1) = -0.5;
  EXPECT_THROW(d.validate(), Error);
  d.rho = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  d.rho(0, 1) = I;
  EXPECT_THROW(d.validate(), Error);
}

TEST(Protocol, IdealTransferIsPerfect) {
  std::mt19937_64 rng(5);
  for (double g : {0.7, 2.0}) {
    const ChainPropagator prop(uniform_chain(g, 0.0, 1));
    const double T = pi / (2 * g);
    for (int i = 0; i < 20; ++i) {
      const auto [a, b] = random_amplitudes(rng);
      EXPECT_NEAR(write_read_cycle(prop, a, b, T, T), 1.0, 1e-9);
    }
    EXPECT_NEAR(average_fidelity(prop, T, T).mean, 1.0, 1e-9);
  }
}

TEST(Protocol, NoEvolutionGivesDownPopulation) {
  const ChainPropagator prop(uniform_chain(1.0, 0.3, 8));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto [a, b] = random_amplitudes(rng);
    EXPECT_NEAR(write_read_cycle(prop, a, b, 0.0, 0.0), std::norm(b), 1e-12);
  }
  // mean of |beta|^2 over the six cardinal states: (0 + 1 + 4 * 1/2) / 6
  EXPECT_NEAR(average_fidelity(prop, 0.0, 0.0).mean, 0.5, 1e-12);
}

TEST(Protocol, DownStateIsStationaryWithoutLeakage) {
  const ChainPropagator prop(uniform_chain(1.3, 0.0, 1));
  for (double t : {0.0, pi / 2.6}) EXPECT_NEAR(write_read_cycle(prop, 0.0, 1.0, t, t), 1.0, 1e-12);
}

TEST(Protocol, DensityRouteMatchesPureRoute) {
  const ChainPropagator prop(uniform_chain(1.0, 0.35, 20));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto [a, b] = random_amplitudes(rng);
    const double t1 = 1.2 + 0.1 * i, t2 = 1.9 - 0.05 * i;
    const double f = write_read_cycle(prop, a, b, t1, t2);
    EXPECT_NEAR(f, write_read_cycle_density(prop, a, b, t1, t2), 1e-12);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-12);
  }
  EXPECT_THROW(write_read_cycle(prop, 1.0, 1.0, 1.0, 1.0), Error);
}

TEST(Protocol, LeakageReducesFidelity) {
  const ChainPropagator prop(uniform_chain(1.0, 0.3, 24));
  const auto r = average_fidelity(prop, pi / 2, pi / 2);
  EXPECT_LT(r.mean, 1.0);
  for (double f : r.per_state) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Optimiser, NoLeakageFindsIdealTimes) {
  const ChainPropagator prop(uniform_chain(1.7, 0.0, 1));
  const auto best = optimize_transfer_times(prop);
  const double T = pi / (2 * 1.7);
  EXPECT_NEAR(best.t1 / T, 1.0, 1e-4);
  EXPECT_NEAR(best.t2 / T, 1.0, 1e-4);
  EXPECT_NEAR(best.fidelity, 1.0, 1e-9);
}

TEST(Optimiser, ModerateLeakageLengthensTransfer) {
  const int k = select_truncation(0.3, 1.6 * pi, 1e-8);
  const ChainPropagator prop(uniform_chain(1.0, 0.3, k));
  const auto best = optimize_transfer_times(prop);
  const double T = pi / 2;
  EXPECT_GT(best.t1 / T, 1.0);
  EXPECT_LT(best.t1 / T, 1.2);
  EXPECT_LT(best.fidelity, 1.0);
  // the optimum is at least as good as the naive times
  EXPECT_GE(best.fidelity, average_fidelity(prop, T, T).mean);
}

TEST(Optimiser, OptimumDecreasesWithLeakage) {
  double last = 2.0;
  for (double leak : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) {
    const int k = select_truncation(leak, 1.6 * pi, 1e-8);
    const double f = optimize_transfer_times(ChainPropagator(uniform_chain(1.0, leak, k))).fidelity;
    EXPECT_LE(f, last + 1e-9) << leak;
    last = f;
  }
}

TEST(Optimiser, FlatLandscapeThrows) {
  EXPECT_THROW(optimize_transfer_times(ChainPropagator(uniform_chain(0.0, 0.0, 1))), Error);
}

TEST(Sweep, FullPolarisationGivesUnitFidelity) {
  const auto bath = uniform_bath(200);
  const BathParams params;
  for (int zeta : {1, 2}) {
    const auto mode = mode_couplings(bath, params, zeta);
    const auto r = fidelity_vs_polarisation(bath, mode, 1.5, {1.0}, 10, 1);
    EXPECT_NEAR(r.fidelity_mean[0], 1.0, 1e-9);
    EXPECT_EQ(r.fidelity_std[0], 0.0);
    EXPECT_NEAR(r.t1_ratio_mean[0], 1.0, 1e-4);
  }
}

TEST(Sweep, HigherModeIsMoreRobust) {
  const auto bath = uniform_bath(400);
  const BathParams params;
  const std::vector<double> P{0.5, 0.8};
  const auto z1 = fidelity_vs_polarisation(bath, mode_couplings(bath, params, 1), 1.5, P, 6, 7, 2);
  const auto z2 = fidelity_vs_polarisation(bath, mode_couplings(bath, params, 2), 1.5, P, 6, 7, 2);
  for (std::size_t i = 0; i < P.size(); ++i) {
    EXPECT_GE(z2.fidelity_mean[i], z1.fidelity_mean[i]);
    EXPECT_GE(z2.fidelity_mean[i], 0.88);
  }
  EXPECT_GT(z2.fidelity_mean[1], z2.fidelity_mean[0]);
}

TEST(Sweep, CouplingScalesInverselyWithZeeman) {
  const auto bath = uniform_bath(300);
  BathParams params;
  const std::vector<double> omega{10.0, 20.0, 40.0};
  const auto g = coupling_vs_zeeman(bath, params, 2, omega, {0.0, 0.5, 1.0}, 20, 3);
  for (std::size_t p = 0; p < 3; ++p) {
    EXPECT_NEAR(g[0][p] / g[1][p], 2.0, 1e-12);
    EXPECT_NEAR(g[0][p] / g[2][p], 4.0, 1e-12);
  }
  // full polarisation is the top of the band
  EXPECT_GT(g[0][2], g[0][1]);
  EXPECT_GT(g[0][2], g[0][0]);
  params.B_Q *= 2;
  const auto g2 = coupling_vs_zeeman(bath, params, 2, omega, {0.0, 0.5, 1.0}, 20, 3);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_NEAR(g2[1][p], 2 * g[1][p], 1e-9 * g[1][p]);
}
