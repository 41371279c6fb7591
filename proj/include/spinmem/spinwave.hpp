// spinmem: spin-wave operators, mode weights and collective rates.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spinmem/bath.hpp"
#include "spinmem/core.hpp"

namespace spinmem {

/// Matrix element of the zeta-quantum raising (sign = plus) or lowering operator on
/// |m>: P_+^(1)(m) = (2m+1) sqrt(I(I+1) - m(m+1)) for zeta = 1, and the product of two
/// single-step ladder factors for zeta = 2. Zero if the target level does not exist.
inline double ladder_prefactor(int zeta, Sign sign, double m, double spin) {
  mode_from_order(zeta);
  require_supported_spin(spin);
  if (!is_level(m, spin)) throw Error("invalid Zeeman level for ladder prefactor");
  const double s = value(sign);
  const double target = m + s * zeta;
  if (target > spin + 1e-9 || target < -spin - 1e-9) return 0.0;
  const double j2 = spin * (spin + 1.0);
  const auto step = [&](double x) { return std::sqrt(std::max(0.0, j2 - x * (x + s))); };
  if (zeta == 1) return (2.0 * m + s) * step(m);
  return step(m) * step(m + s);
}

/// Per-site quadrupolar field. Empty per-site vectors mean the scalar value applies
/// everywhere. With `unit_angular` the angular factors sin(2 theta), sin^2(theta) are
/// replaced by 1.
struct QuadrupoleField {
  double B_Q = 1.5;
  double theta = 0.9553166181245093;
  std::vector<double> B_Q_site;
  std::vector<double> theta_site;
  bool unit_angular = false;

  static QuadrupoleField from(const BathParams& p) {
    QuadrupoleField q;
    q.B_Q = p.B_Q;
    q.theta = p.theta;
    return q;
  }

  double b(std::size_t j) const { return B_Q_site.empty() ? B_Q : B_Q_site[j]; }
  double th(std::size_t j) const { return theta_site.empty() ? theta : theta_site[j]; }
};

/// Angular factor f_zeta(theta): sin(2 theta) for zeta = 1, sin^2(theta) for zeta = 2.
inline double angular_factor(int zeta, double theta) {
  if (zeta == 1) return std::sin(2.0 * theta);
  const double s = std::sin(theta);
  return s * s;
}

struct ModeCouplings {
  int zeta = 2;
  double A_zeta = 0.0;          // MHz, may be negative (sign of the angular factor)
  std::vector<double> a_mode;   // sums to 1
  double sum_a_sq = 0.0;
};

/// A_zeta = 1/2 sum_j A^j B_Q^j f_zeta(theta^j) / omega_Zn with A^j = A_total a_j, and the
/// normalised site weights a_{zeta,j}.
inline ModeCouplings mode_couplings(const HyperfineBath& bath, double A_total, double omega_Zn,
                                    int zeta, const QuadrupoleField& field) {
  mode_from_order(zeta);
  if (!(omega_Zn > 0)) throw Error("nuclear Zeeman energy must be positive");
  const std::size_t n = bath.size();
  if ((!field.B_Q_site.empty() && field.B_Q_site.size() != n) ||
      (!field.theta_site.empty() && field.theta_site.size() != n))
    throw Error("per-site quadrupole arrays must match the bath size");
  ModeCouplings out;
  out.zeta = zeta;
  out.a_mode.resize(n);
  double total = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double bare = A_total * bath.a[j] * field.b(j) / omega_Zn;
    const double f = field.unit_angular ? 1.0 : angular_factor(zeta, field.th(j));
    out.a_mode[j] = bare * f;
    total += out.a_mode[j];
    scale += std::abs(bare);
  }
  // compare against the coupling with unit angular factor so roundoff in sin(2 theta) counts as zero
  if (scale == 0.0 || std::abs(total) <= 1e-12 * scale)
    throw Error("mode decoupled: angular prefactor vanishes for zeta = " + std::to_string(zeta));
  out.A_zeta = 0.5 * total;
  double sq = 0.0;
  for (double& x : out.a_mode) {
    x /= total;
    sq += x * x;
  }
  out.sum_a_sq = sq;
  return out;
}

inline ModeCouplings mode_couplings(const HyperfineBath& bath, const BathParams& p, int zeta) {
  return mode_couplings(bath, p.A_total, p.omega_Zn, zeta, QuadrupoleField::from(p));
}

/// F_1 = (1 - 2I) sqrt(2I), F_2 = 2 sqrt(I(2I - 1)).
inline double collective_factor(int zeta, double spin) {
  mode_from_order(zeta);
  if (zeta == 1) return (1.0 - 2.0 * spin) * std::sqrt(2.0 * spin);
  return 2.0 * std::sqrt(spin * (2.0 * spin - 1.0));
}

/// g_zeta = |F_zeta| A'_zeta sqrt(sum a^2). The sign of F_1 is a global phase.
inline double collective_rate(int zeta, double spin, double A_zeta_prime, double sum_a_sq) {
  if (sum_a_sq < 0 || sum_a_sq > 1.0 + 1e-12) throw Error("sum of squared weights must lie in [0, 1]");
  return std::abs(collective_factor(zeta, spin)) * std::abs(A_zeta_prime) * std::sqrt(sum_a_sq);
}

}  // namespace spinmem
