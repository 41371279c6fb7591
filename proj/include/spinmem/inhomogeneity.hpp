// spinmem: inhomogeneous quadrupolar shifts at full polarisation.
//
// With every nucleus in m = -I the written excitation lives in the single-excitation
// space {|up, 0>, |down, j>, |down, 0>}, where |down, j> has site j raised by zeta.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinmem/core.hpp"
#include "spinmem/dynamics.hpp"
#include "spinmem/expmv.hpp"
#include "spinmem/parallel.hpp"
#include "spinmem/spinwave.hpp"

namespace spinmem {

struct QuadrupoleShifts {
  std::vector<double> delta_q;  // MHz
  double sigma = 0.0;
  double mean = 0.0;
};

/// Independent normal shifts, drawn as mean + sigma z from standard normals z so that
/// the same seed gives the same z for every sigma.
inline QuadrupoleShifts sample_shifts(double sigma, double mean, std::size_t n, std::uint64_t seed) {
  if (!(sigma >= 0)) throw Error("shift spread must be non-negative");
  QuadrupoleShifts s{std::vector<double>(n), sigma, mean};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  for (double& d : s.delta_q) d = mean + sigma * z(rng);
  return s;
}

/// Which multiple of Delta_Q shifts the energy of a raised site.
enum class ShiftConvention {
  zeta_squared,  // zeta^2 Delta_Q
  transition,    // (zeta^2 - 2 I zeta) Delta_Q
};

inline double shift_factor(int zeta, double spin, ShiftConvention c) {
  mode_from_order(zeta);
  return c == ShiftConvention::zeta_squared ? zeta * zeta : zeta * zeta - 2.0 * spin * zeta;
}

/// <1| exp(-i H_Q t) |1> = sum_j a_j^2 exp(-i kappa Delta_j t) / sum_j a_j^2.
inline cplx survival_amplitude(const QuadrupoleShifts& shifts, std::span<const double> a, int zeta, double t,
                               double spin = 1.5, ShiftConvention c = ShiftConvention::zeta_squared) {
  if (a.size() != shifts.delta_q.size()) throw Error("shift and weight arrays differ in size");
  const double kappa = shift_factor(zeta, spin, c);
  cplx sum = 0.0;
  double norm = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    sum += a[j] * a[j] * std::polar(1.0, -kappa * shifts.delta_q[j] * t);
    norm += a[j] * a[j];
  }
  return sum / norm;
}

/// |<1|exp(-i H_Q t)|1>|^2 averaged over shift realisations (mean 0, spread sigma).
inline std::vector<double> mean_survival_population(std::span<const double> a, double sigma, int zeta,
                                                    const std::vector<double>& t_grid, int n_realisations,
                                                    std::uint64_t seed, double spin = 1.5,
                                                    ShiftConvention c = ShiftConvention::zeta_squared) {
  if (n_realisations < 1) throw Error("need at least one realisation");
  std::vector<double> out(t_grid.size(), 0.0);
  for (int r = 0; r < n_realisations; ++r) {
    const auto shifts = sample_shifts(sigma, 0.0, a.size(), derive_seed(seed, 0, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      out[i] += std::norm(survival_amplitude(shifts, a, zeta, t_grid[i], spin, c)) / n_realisations;
  }
  return out;
}

/// Electron plus one collective excitation. Basis order: |up,0>, |down,1..N>, |down,0>.
/// H = G sum_j c_j (|down,j><up,0| + h.c.) + sum_j kappa Delta_j |down,j><down,j| with
/// c_j = a_j / sqrt(sum a^2).
class SingleExcitationModel {
 public:
  SingleExcitationModel(std::span<const double> a, std::span<const double> delta_q, double G, double kappa)
      : G_(G) {
    if (a.size() != delta_q.size()) throw Error("shift and weight arrays differ in size");
    double sq = 0.0;
    for (double x : a) sq += x * x;
    if (!(sq > 0)) throw Error("bright mode has zero weight");
    c_.resize(static_cast<Eigen::Index>(a.size()));
    diag_.resize(static_cast<Eigen::Index>(a.size()));
    for (std::size_t j = 0; j < a.size(); ++j) {
      c_[j] = a[j] / std::sqrt(sq);
      diag_[j] = kappa * delta_q[j];
    }
    norm_bound_ = std::abs(G) + diag_.cwiseAbs().maxCoeff();
  }

  Eigen::Index sites() const { return c_.size(); }
  Eigen::Index dim() const { return c_.size() + 2; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    const Eigen::Index n = sites();
    Eigen::VectorXcd out(dim());
    out[0] = G_ * c_.dot(v.segment(1, n));
    out.segment(1, n) = G_ * c_.cast<cplx>() * v[0] + diag_.cast<cplx>().cwiseProduct(v.segment(1, n));
    out[n + 1] = 0.0;
    return out;
  }

  Eigen::VectorXcd evolve(const Eigen::VectorXcd& v, double t) const {
    return expmv([this](const Eigen::VectorXcd& x) { return apply(x); }, norm_bound_, v, t);
  }

  Eigen::MatrixXd dense_hamiltonian() const {
    const Eigen::Index n = sites();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
    h.block(1, 0, n, 1) = G_ * c_;
    h.block(0, 1, 1, n) = G_ * c_.transpose();
    h.diagonal().segment(1, n) = diag_;
    return h;
  }

  /// Six-state average of the write/read protocol. Only two propagations are needed:
  /// x = U(t1)|up,0> and y = U(t2)|down, w> where w is the site part of x.
  FidelityReport average_fidelity(double t1, double t2) const {
    const Eigen::Index n = sites();
    Eigen::VectorXcd start = Eigen::VectorXcd::Zero(dim());
    start[0] = 1.0;
    const Eigen::VectorXcd x = evolve(start, t1);
    Eigen::VectorXcd reset = Eigen::VectorXcd::Zero(dim());
    reset.segment(1, n) = x.segment(1, n);
    const Eigen::VectorXcd y = evolve(reset, t2);
    const double dark = y.segment(1, n).squaredNorm();
    FidelityReport r{t1, t2, {}, 0.0};
    const auto states = cardinal_states();
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto [alpha, beta] = states[i];
      const double a2 = std::norm(alpha), b2 = std::norm(beta);
      r.per_state[i] = a2 * b2 * std::norm(x[0]) + std::norm(a2 * y[0] - b2) + a2 * b2 * dark;
      r.mean += r.per_state[i] / 6.0;
    }
    return r;
  }

 private:
  double G_;
  Eigen::VectorXd c_, diag_;
  double norm_bound_ = 0.0;
};

struct SigmaSweep {
  std::vector<double> sigma;  // units of G_+
  std::vector<double> mean, spread;
};

/// Fidelity at P = 1 with t1 = t2 = pi/(2 G_+) for shift spreads sigma (in units of
/// G_+). Realisation r uses the same standard-normal draws at every sigma.
inline SigmaSweep transfer_fidelity_vs_sigma(std::span<const double> a, const std::vector<double>& sigma_grid,
                                             int zeta, int n_realisations, std::uint64_t seed, int threads = 1,
                                             double spin = 1.5,
                                             ShiftConvention c = ShiftConvention::zeta_squared) {
  if (n_realisations < 1) throw Error("need at least one realisation");
  const double kappa = shift_factor(zeta, spin, c);
  const double t = pi / 2.0;
  SigmaSweep out;
  out.sigma = sigma_grid;
  for (double sigma : sigma_grid) {
    if (!(sigma >= 0)) throw Error("shift spread must be non-negative");
    std::vector<double> f(n_realisations);
    parallel_for(n_realisations, threads, [&](std::size_t r) {
      const auto shifts = sample_shifts(sigma, 0.0, a.size(), derive_seed(seed, 0, r));
      f[r] = SingleExcitationModel(a, shifts.delta_q, 1.0, kappa).average_fidelity(t, t).mean;
    });
    double sum = 0.0;
    for (double x : f) sum += x;
    const double mean = sum / n_realisations;
    double var = 0.0;
    for (double x : f) var += (x - mean) * (x - mean);
    out.mean.push_back(mean);
    out.spread.push_back(n_realisations > 1 ? std::sqrt(var / (n_realisations - 1)) : 0.0);
  }
  return out;
}

struct DarkModeReport {
  double max_dark = 0.0;       // max over alpha != 1 of |<0|Phi^-|alpha>|
  double bright = 0.0;         // <0|Phi^-|1>
  double total_weight = 0.0;   // sum over alpha of |<0|Phi^-|alpha>|^2
};

/// Completes nu_1 = a/|a| to an orthonormal basis with a Householder reflection and
/// evaluates the lowering element of every mode. The reflection is never formed.
inline DarkModeReport dark_mode_check(std::span<const double> a, int zeta, double spin = 1.5) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.size());
  if (n == 0) throw Error("empty weight vector");
  const Eigen::Map<const Eigen::VectorXd> av(a.data(), n);
  const double norm = av.norm();
  if (!(norm > 0)) throw Error("bright mode has zero weight");
  const double p = ladder_prefactor(zeta, Sign::minus, -spin + zeta, spin);
  Eigen::VectorXd w = av / norm;
  const double sgn = w[0] >= 0 ? 1.0 : -1.0;
  w[0] += sgn;
  // mode alpha = H e_alpha; <0|Phi^-|alpha> = p (H a)_alpha, and H nu_1 = -sgn e_1
  const Eigen::VectorXd ha = av - 2.0 * w * (w.dot(av) / w.squaredNorm());
  DarkModeReport r;
  r.bright = -sgn * p * ha[0];
  for (Eigen::Index i = 1; i < n; ++i) r.max_dark = std::max(r.max_dark, std::abs(p * ha[i]));
  r.total_weight = (p * ha).squaredNorm();
  return r;
}

}  // namespace spinmem
