// spinmem: the figure sweeps and the oracle check, driven by a RunConfig.
#pragma once

#include <string>
#include <vector>

#include <fmt/format.h>

#include "spinmem/bath.hpp"
#include "spinmem/chain.hpp"
#include "spinmem/config.hpp"
#include "spinmem/dynamics.hpp"
#include "spinmem/inhomogeneity.hpp"
#include "spinmem/oracle.hpp"
#include "spinmem/pulse.hpp"
#include "spinmem/spinwave.hpp"
#include "spinmem/sweep.hpp"

namespace spinmem {

inline SweepResult with_metadata(SweepResult r, const RunConfig& c) {
  r.metadata["experiment"] = c.experiment;
  r.metadata["config_hash"] = config_hash(c);
  r.metadata["seed"] = std::to_string(c.seed);
  r.metadata["version"] = version_string;
  return r;
}

inline SweepResult run_fig2a(const RunConfig& c) {
  const auto bath = build_gaussian_bath(c.bath);
  std::vector<ModeCouplings> modes;
  for (int z : {1, 2}) modes.push_back(mode_couplings(bath, c.bath, z));
  const auto sweep = ensemble_leakage(modes, c.bath.spin, c.polarisation_grid, c.samples(), c.seed, c.threads);
  SweepResult r;
  r.x_name = "P";
  r.x = sweep.P;
  r.add_column("leak_z1_mean", sweep.mean[0]);
  r.add_column("leak_z2_mean", sweep.mean[1]);
  r.add_column("leak_z1_rsd", sweep.rsd[0]);
  r.add_column("leak_z2_rsd", sweep.rsd[1]);
  return with_metadata(r, c);
}

inline SweepResult run_fig2b(const RunConfig& c) {
  const auto bath = build_gaussian_bath(c.bath);
  const auto omegas = c.omegas();
  SweepResult r;
  r.x_name = "omega_Zn";
  r.x = omegas;
  for (int z : c.zeta) {
    const auto g = coupling_vs_zeeman(bath, c.bath, z, omegas, c.fig2b_polarisations, c.samples(), c.seed);
    for (std::size_t ip = 0; ip < c.fig2b_polarisations.size(); ++ip) {
      std::vector<double> col;
      for (const auto& row : g) col.push_back(row[ip]);
      r.add_column(fmt::format("G_plus_z{}_P{:g}", z, c.fig2b_polarisations[ip]), col);
    }
  }
  return with_metadata(r, c);
}

inline ProtocolOptions protocol_options(const RunConfig& c) {
  ProtocolOptions o;
  o.model = c.chain_model == "closed_form" ? ChainModel::closed_form : ChainModel::uniform;
  o.truncation_tol = c.truncation_tol;
  return o;
}

inline SweepResult run_fig2c(const RunConfig& c) {
  const auto bath = build_gaussian_bath(c.bath);
  SweepResult r;
  r.x_name = "P";
  r.x = c.polarisation_grid;
  for (int z : c.zeta) {
    const auto mode = mode_couplings(bath, c.bath, z);
    const auto s = fidelity_vs_polarisation(bath, mode, c.bath.spin, c.polarisation_grid, c.samples(),
                                            c.seed + static_cast<std::uint64_t>(z), c.threads, protocol_options(c));
    r.add_column(fmt::format("F_z{}_mean", z), s.fidelity_mean);
    r.add_column(fmt::format("F_z{}_std", z), s.fidelity_std);
    r.add_column(fmt::format("t1_z{}_ratio", z), s.t1_ratio_mean);
    r.add_column(fmt::format("t2_z{}_ratio", z), s.t2_ratio_mean);
    r.add_column(fmt::format("t_z{}_ratio_min", z), s.t_ratio_min);
    r.add_column(fmt::format("t_z{}_ratio_max", z), s.t_ratio_max);
  }
  return with_metadata(r, c);
}

inline ShiftConvention shift_convention(const RunConfig& c) {
  return c.shift_convention == "transition" ? ShiftConvention::transition : ShiftConvention::zeta_squared;
}

inline SweepResult run_fig2d(const RunConfig& c) {
  const auto bath = uniform_bath(static_cast<std::size_t>(c.fig2d_sites));
  const auto sigmas = c.sigmas();
  SweepResult r;
  r.x_name = "sigma_over_G";
  r.x = sigmas;
  for (int z : c.zeta) {
    const auto s = transfer_fidelity_vs_sigma(bath.a, sigmas, z, c.n_realisations, c.seed, c.threads, c.bath.spin,
                                              shift_convention(c));
    r.add_column(fmt::format("F_z{}_mean", z), s.mean);
    r.add_column(fmt::format("F_z{}_std", z), s.spread);
  }
  return with_metadata(r, c);
}

inline SweepResult run_pulse_spectrum(const RunConfig& c) {
  SweepResult r;
  r.x_name = "l";
  std::vector<double> P, Q;
  for (int l = 1; l <= c.l_max; ++l) {
    const auto f = fourier_coefficients(l);
    r.x.push_back(l);
    P.push_back(f.P);
    Q.push_back(f.Q);
  }
  r.add_column("P_l", P);
  r.add_column("Q_l", Q);
  return with_metadata(r, c);
}

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool below = true;  // pass when value < threshold (else value >= threshold)

  bool pass() const { return below ? value < threshold : value >= threshold; }
};

/// Small-N cross-validation: chain vs full space (ideal and thermal), pulsed vs secular.
inline std::vector<OracleCheck> run_oracle_checks(std::uint64_t seed) {
  std::vector<OracleCheck> out;
  const auto bath5 = uniform_bath(5);
  QuadrupoleField field;
  const auto mode = mode_couplings(bath5, 1000.0, 50.0, 2, field);
  const double g = omega_rates(fully_polarised(1.5, 5), mode).G_plus;
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(2.0 * pi * i / 20.0 / g);
  out.push_back({"chain vs full space, P=1", chain_vs_exact_report(fully_polarised(1.5, 5), mode, grid, 0.6, 0.8),
                 1e-10, true});
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    auto M = sample_thermal_configuration(0.5, 1.5, 5, derive_seed(seed, 1, i));
    const double gp = omega_rates(M, mode).G_plus;
    std::vector<double> tg;
    for (int k = 0; k <= 20; ++k) tg.push_back(2.0 * pi * k / 20.0 / gp);
    worst = std::max(worst, chain_vs_exact_report(M, mode, tg, 0.6, cplx(0.0, 0.8)));
  }
  out.push_back({"chain vs full space, P=0.5", worst, 1e-8, true});

  PulsedSystem sys;
  sys.M = fully_polarised(1.5, 3);
  sys.omega_Zn = 50.0;
  sys.B_Q = 25.0;
  const auto unit = uniform_bath(3);
  QuadrupoleField field2;
  field2.B_Q = sys.B_Q;
  field2.theta = sys.theta;
  const auto probe = mode_couplings(unit, 1.0, sys.omega_Zn, 2, field2);
  const double g_unit = collective_rate(2, 1.5, effective_coupling(probe.A_zeta), probe.sum_a_sq);
  const double A_total = (sys.omega_Zn / 50.0) / g_unit;
  sys.A.assign(3, A_total / 3.0);
  const double tau = resonance_delay(2, sys.omega_Zn, 3);
  const int periods = static_cast<int>(std::lround((pi / (2.0 * sys.omega_Zn / 50.0)) / (2.0 * tau)));
  const auto res = floquet_report(sys, 2, tau, periods);
  out.push_back({"pulsed vs effective overlap", res.overlap, 0.99, false});
  const auto off = floquet_report(sys, 2, pi / (4.0 * sys.omega_Zn), static_cast<int>(std::lround(res.time / (pi / (2.0 * sys.omega_Zn)))));
  out.push_back({"off-resonant / resonant transfer", off.max_excitation / res.excitation, 0.05, true});
  return out;
}

}  // namespace spinmem
