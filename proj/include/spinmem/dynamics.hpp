// spinmem: hybrid electron-chain dynamics and the write/read memory protocol.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "spinmem/bath.hpp"
#include "spinmem/chain.hpp"
#include "spinmem/core.hpp"
#include "spinmem/parallel.hpp"
#include "spinmem/spinwave.hpp"
#include "spinmem/sweep.hpp"

namespace spinmem {

inline constexpr double default_boundary_tol = 1e-6;

struct HybridState {
  Eigen::VectorXcd amp;
  double time = 0.0;

  double norm() const { return amp.norm(); }
};

struct HybridDensity {
  Eigen::MatrixXcd rho;
  double time = 0.0;

  void validate(double tol = 1e-10) const {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw Error("density matrix is not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > tol) throw Error("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol) throw Error("density matrix has a negative eigenvalue");
  }
};

/// alpha |up, M> + beta |down, M>.
inline HybridState initial_state(const ChainBasis& chain, cplx alpha, cplx beta) {
  HybridState s;
  s.amp = alpha * hybrid_basis_state(chain, 0, 0) + beta * hybrid_basis_state(chain, 1, 0);
  return s;
}

inline HybridDensity to_density(const HybridState& s) { return {s.amp * s.amp.adjoint(), s.time}; }

namespace detail {

inline void check_boundary(double occupation, double tol) {
  if (occupation > tol)
    throw TruncationError("truncation exceeded: boundary occupation " + std::to_string(occupation));
}

}  // namespace detail

/// Propagates for a time t, checking the boundary occupation halfway and at the end.
inline HybridState evolve(const ChainPropagator& prop, const HybridState& s, double t,
                          double tol = default_boundary_tol) {
  detail::check_boundary(prop.boundary_occupation(prop.apply(s.amp, 0.5 * t)), tol);
  HybridState out{prop.apply(s.amp, t), s.time + t};
  detail::check_boundary(prop.boundary_occupation(out.amp), tol);
  return out;
}

inline HybridDensity evolve(const ChainPropagator& prop, const HybridDensity& s, double t,
                            double tol = default_boundary_tol) {
  detail::check_boundary(prop.boundary_occupation(prop.apply_density(s.rho, 0.5 * t)), tol);
  HybridDensity out{prop.apply_density(s.rho, t), s.time + t};
  detail::check_boundary(prop.boundary_occupation(out.rho), tol);
  return out;
}

inline void check_amplitudes(cplx alpha, cplx beta) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10)
    throw Error("electron amplitudes must satisfy |alpha|^2 + |beta|^2 = 1");
}

/// Write for t1, trace out the electron, re-initialise it in |down>, read for t2 and
/// return <phi'| rho_e |phi'> with phi' = alpha |up> - beta |down>. The nuclear state
/// after writing is carried as its two electron-conditioned pure components.
inline double write_read_cycle(const ChainPropagator& prop, cplx alpha, cplx beta, double t1, double t2,
                               double tol = default_boundary_tol) {
  check_amplitudes(alpha, beta);
  const int n = prop.chain().nuclear_dim();
  const auto written = evolve(prop, initial_state(prop.chain(), alpha, beta), t1, tol);
  double fidelity = 0.0;
  for (int e = 0; e < 2; ++e) {
    const Eigen::VectorXcd part = written.amp.segment(e * n, n);
    if (part.squaredNorm() == 0.0) continue;
    HybridState reset{Eigen::VectorXcd::Zero(2 * n), 0.0};
    reset.amp.segment(n, n) = part;
    const auto read = evolve(prop, reset, t2, tol);
    for (int s = 0; s < n; ++s)
      fidelity += std::norm(std::conj(alpha) * read.amp[s] - std::conj(beta) * read.amp[n + s]);
  }
  return fidelity;
}

/// Same protocol carried out on the density matrix.
inline double write_read_cycle_density(const ChainPropagator& prop, cplx alpha, cplx beta, double t1,
                                       double t2, double tol = default_boundary_tol) {
  check_amplitudes(alpha, beta);
  const int n = prop.chain().nuclear_dim();
  const auto written = evolve(prop, to_density(initial_state(prop.chain(), alpha, beta)), t1, tol);
  const Eigen::MatrixXcd rho_n = written.rho.topLeftCorner(n, n) + written.rho.bottomRightCorner(n, n);
  HybridDensity reset{Eigen::MatrixXcd::Zero(2 * n, 2 * n), 0.0};
  reset.rho.bottomRightCorner(n, n) = rho_n;
  const auto read = evolve(prop, reset, t2, tol);
  Eigen::Matrix2cd rho_e;
  rho_e(0, 0) = read.rho.topLeftCorner(n, n).trace();
  rho_e(0, 1) = read.rho.topRightCorner(n, n).trace();
  rho_e(1, 0) = read.rho.bottomLeftCorner(n, n).trace();
  rho_e(1, 1) = read.rho.bottomRightCorner(n, n).trace();
  const Eigen::Vector2cd phi(alpha, -beta);
  return (phi.adjoint() * rho_e * phi)(0, 0).real();
}

/// (alpha, beta) = (1,0), (0,1), (1,+-1)/sqrt2, (1,+-i)/sqrt2.
inline std::array<std::pair<cplx, cplx>, 6> cardinal_states() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  return {{{1.0, 0.0}, {0.0, 1.0}, {r, r}, {r, -r}, {r, r * i}, {r, -r * i}}};
}

struct FidelityReport {
  double t1 = 0.0, t2 = 0.0;
  std::array<double, 6> per_state{};
  double mean = 0.0;
};

inline FidelityReport average_fidelity(const ChainPropagator& prop, double t1, double t2,
                                       double tol = default_boundary_tol) {
  FidelityReport r{t1, t2, {}, 0.0};
  const auto states = cardinal_states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    r.per_state[i] = write_read_cycle(prop, states[i].first, states[i].second, t1, t2, tol);
    r.mean += r.per_state[i] / 6.0;
  }
  return r;
}

struct TransferOptimum {
  double t1 = 0.0, t2 = 0.0, fidelity = 0.0;
  double t_ideal = 0.0;  // pi / (2 G_+)
};

/// Coordinate search (t1, then t2, two passes) for the largest six-state fidelity with
/// both times in [0.8, 1.6] pi/(2 G_+): a 33-point scan followed by Brent refinement.
inline TransferOptimum optimize_transfer_times(const ChainPropagator& prop, double tol = default_boundary_tol) {
  const double g = prop.chain().G_plus;
  if (!(g > 0)) throw Error("flat fidelity landscape: G_+ = 0");
  const double T = pi / (2.0 * g);
  const double lo = 0.8 * T, hi = 1.6 * T;
  constexpr int grid = 33;
  constexpr int bits = 17;  // Brent tolerance 2^-16 ~ 1.5e-5 relative
  TransferOptimum best{T, T, average_fidelity(prop, T, T, tol).mean, T};
  for (int pass = 0; pass < 2; ++pass) {
    for (int coord = 0; coord < 2; ++coord) {
      const auto f = [&](double t) {
        return coord == 0 ? average_fidelity(prop, t, best.t2, tol).mean
                          : average_fidelity(prop, best.t1, t, tol).mean;
      };
      int arg = 0;
      double fmax = -1.0;
      for (int i = 0; i < grid; ++i) {
        const double v = f(lo + (hi - lo) * i / (grid - 1));
        if (v > fmax) {
          fmax = v;
          arg = i;
        }
      }
      const double a = lo + (hi - lo) * std::max(0, arg - 1) / (grid - 1);
      const double b = lo + (hi - lo) * std::min(grid - 1, arg + 1) / (grid - 1);
      std::uintmax_t iters = 100;
      const auto [t, neg] = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b,
                                                                  bits, iters);
      double& slot = coord == 0 ? best.t1 : best.t2;
      if (-neg >= fmax && -neg >= best.fidelity) {
        slot = t;
        best.fidelity = -neg;
      } else if (fmax > best.fidelity) {
        slot = lo + (hi - lo) * arg / (grid - 1);
        best.fidelity = fmax;
      }
    }
  }
  return best;
}

/// How the per-sample chain links are computed in the Monte Carlo sweeps.
enum class ChainModel { uniform, closed_form };

struct ProtocolOptions {
  ChainModel model = ChainModel::uniform;
  double truncation_tol = 1e-8;
  double horizon = 1.6 * pi;  // t1 + t2 at most 2 * 1.6 * pi / (2 G_+), in units of 1/G_+
  int truncation_cap = 64;
  int ell_star = 3;
};

struct SampleOptimum {
  TransferOptimum best;
  ChainRates rates;
  int k_star = 0;
};

/// Build the chain for one configuration, pick its depth, optimise the protocol times.
inline SampleOptimum optimise_sample(const NuclearConfiguration& M, const ModeCouplings& mode,
                                     const ProtocolOptions& opt = {}) {
  SampleOptimum s;
  s.rates = omega_rates(M, mode, opt.ell_star);
  s.k_star = select_truncation(s.rates.leakage, opt.horizon, opt.truncation_tol, opt.truncation_cap);
  const ChainBasis chain = opt.model == ChainModel::closed_form
                               ? closed_form_chain(M, mode, s.k_star, opt.ell_star)
                               : uniform_chain(s.rates.G_plus, s.rates.G_minus, s.k_star, mode.zeta);
  s.best = optimize_transfer_times(ChainPropagator(chain));
  return s;
}

struct PolarisationSweep {
  std::vector<double> P;
  std::vector<double> fidelity_mean, fidelity_std;
  std::vector<double> t1_ratio_mean, t2_ratio_mean;  // t* / (pi / 2 G_+)
  std::vector<double> t_ratio_max;                   // largest t* / (pi / 2 G_+) of any sample
  std::vector<double> t_ratio_min;
};

/// Monte Carlo over thermal configurations at each polarisation: mean and spread of the
/// optimised six-state fidelity, plus the optimal times.
inline PolarisationSweep fidelity_vs_polarisation(const HyperfineBath& bath, const ModeCouplings& mode,
                                                  double spin, const std::vector<double>& P_grid,
                                                  int n_samples, std::uint64_t seed, int threads = 1,
                                                  const ProtocolOptions& opt = {}) {
  if (n_samples < 1) throw Error("need at least one sample per polarisation");
  PolarisationSweep out;
  out.P = P_grid;
  for (std::size_t ip = 0; ip < P_grid.size(); ++ip) {
    const double P = P_grid[ip];
    const int n = P >= 1.0 ? 1 : n_samples;  // the fully polarised state is deterministic
    std::vector<SampleOptimum> res(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const auto M = sample_thermal_configuration(P, spin, bath.size(), derive_seed(seed, ip, i));
      res[i] = optimise_sample(M, mode, opt);
    });
    double sum = 0.0, sq = 0.0, r1 = 0.0, r2 = 0.0, rmax = 0.0, rmin = 1e300;
    for (const auto& r : res) {
      sum += r.best.fidelity;
      sq += r.best.fidelity * r.best.fidelity;
      const double a = r.best.t1 / r.best.t_ideal, b = r.best.t2 / r.best.t_ideal;
      r1 += a;
      r2 += b;
      rmax = std::max({rmax, a, b});
      rmin = std::min({rmin, a, b});
    }
    const double mean = sum / n;
    out.fidelity_mean.push_back(mean);
    out.fidelity_std.push_back(n > 1 ? std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1))) : 0.0);
    out.t1_ratio_mean.push_back(r1 / n);
    out.t2_ratio_mean.push_back(r2 / n);
    out.t_ratio_max.push_back(rmax);
    out.t_ratio_min.push_back(rmin);
  }
  return out;
}

/// Mean G_+ (MHz) over thermal configurations for each nuclear Zeeman energy, with the
/// angular prefactors set to 1. Rows follow omega_grid, columns follow P_list.
inline std::vector<std::vector<double>> coupling_vs_zeeman(const HyperfineBath& bath, const BathParams& params,
                                                           int zeta, const std::vector<double>& omega_grid,
                                                           const std::vector<double>& P_list, int n_samples,
                                                           std::uint64_t seed) {
  if (n_samples < 1) throw Error("need at least one sample per polarisation");
  QuadrupoleField field = QuadrupoleField::from(params);
  field.unit_angular = true;
  std::vector<std::vector<double>> out(omega_grid.size(), std::vector<double>(P_list.size(), 0.0));
  // G_+ scales as 1/omega exactly, so the configurations are drawn once per P
  const auto reference = mode_couplings(bath, params.A_total, 1.0, zeta, field);
  for (std::size_t ip = 0; ip < P_list.size(); ++ip) {
    const int n = P_list[ip] >= 1.0 ? 1 : n_samples;
    double g1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto M = sample_thermal_configuration(P_list[ip], params.spin, bath.size(), derive_seed(seed, ip, i));
      g1 += omega_rates(M, reference).G_plus / n;
    }
    for (std::size_t iw = 0; iw < omega_grid.size(); ++iw) {
      if (!(omega_grid[iw] > 0)) throw Error("nuclear Zeeman energy must be positive");
      out[iw][ip] = g1 / omega_grid[iw];
    }
  }
  return out;
}

}  // namespace spinmem
