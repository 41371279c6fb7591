// spinmem: electron pulse sequence, its modulation functions and Fourier content.
//
// The cycle is y(pi/2) -- x(-pi) -- y(pi/2) x(pi/2) -- y(pi) -- x(pi/2), with free
// evolution of tau/4 at each "--". Two cycles form one period 2 tau of the
// modulation functions h_x, h_y that replace S_z in the toggling frame.
#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "spinmem/core.hpp"

namespace spinmem {

/// Values of h_x on the eight quarter-tau segments of one 2 tau period.
inline constexpr std::array<int, 8> modulation_x_quarters{0, 0, -1, +1, 0, 0, +1, -1};

/// h_y(t) = h_x(t + tau/2), i.e. the x table rotated by two segments.
inline constexpr std::array<int, 8> modulation_y_quarters{-1, +1, 0, 0, +1, -1, 0, 0};

/// (h_x(t), h_y(t)) for t >= 0; periodic in 2 tau.
inline std::pair<int, int> modulation_value(double t, double tau) {
  if (!(tau > 0)) throw Error("pulse delay must be positive");
  if (t < 0) throw Error("modulation functions are defined for t >= 0");
  double s = std::fmod(t / tau, 2.0);
  auto q = static_cast<int>(std::floor(4.0 * s));
  if (q > 7) q = 7;
  if (q < 0) q = 0;
  return {modulation_x_quarters[q], modulation_y_quarters[q]};
}

/// Cosine and sine Fourier coefficients of a modulation function, normalised as
/// P_l = (1/tau) int_0^{2tau} h cos(pi l t / tau) dt and likewise Q_l with sin.
struct FourierPair {
  double P = 0.0;
  double Q = 0.0;
};

/// Exact Fourier coefficient of a function that is constant on each quarter-tau
/// segment, from the closed-form antiderivative on every segment.
inline FourierPair fourier_coefficients(std::span<const int, 8> quarters, int l) {
  if (l < 1) throw Error("Fourier index must be >= 1");
  FourierPair out;
  const double k = pi * l;
  for (int q = 0; q < 8; ++q) {
    if (quarters[q] == 0) continue;
    const double a = 0.25 * q;
    const double b = 0.25 * (q + 1);
    out.P += quarters[q] * (std::sin(k * b) - std::sin(k * a)) / k;
    out.Q += quarters[q] * (std::cos(k * a) - std::cos(k * b)) / k;
  }
  // exact zeros (even l) come out as O(1e-17) residues of the sines
  if (std::abs(out.P) < 1e-15) out.P = 0.0;
  if (std::abs(out.Q) < 1e-15) out.Q = 0.0;
  return out;
}

/// Fourier coefficients of h_x.
inline FourierPair fourier_coefficients(int l) { return fourier_coefficients(modulation_x_quarters, l); }

/// Rescaled flip-flop coupling A' for the resonance harmonic ell_star. For ell_star = 3
/// this is (2 + sqrt 2) / (3 pi) * A.
inline double effective_coupling(double A_zeta, int ell_star = 3) {
  if (ell_star < 1 || ell_star % 2 == 0) throw Error("resonance harmonic must be a positive odd integer");
  if (ell_star == 3) return (2.0 + std::sqrt(2.0)) / (3.0 * pi) * A_zeta;
  return std::abs(fourier_coefficients(ell_star).P) * std::sqrt(2.0) / 2.0 * A_zeta;
}

/// Pulse delay tau = ell pi / (zeta omega_Zn + delta) tuning harmonic ell onto the
/// zeta-quantum nuclear transition.
inline double resonance_delay(int zeta, double omega_Zn, int ell, double delta = 0.0) {
  if (ell < 1 || ell % 2 == 0) throw Error("resonance harmonic must be a positive odd integer");
  const double denom = zeta * omega_Zn + delta;
  if (!(denom > 0)) throw Error("resonant transition frequency must be positive");
  return ell * pi / denom;
}

/// Quadrupolar energy shift Delta_Q = B_Q (sin^2(theta)/2 - cos^2(theta)).
inline double quadrupole_shift(double B_Q, double theta) {
  const double s = std::sin(theta), c = std::cos(theta);
  return B_Q * (0.5 * s * s - c * c);
}

/// Shift of the m = -I -> -I + zeta transition, (zeta^2 - 2 I zeta) Delta_Q.
inline double transition_shift(int zeta, double spin, double delta_Q) {
  return (zeta * zeta - 2.0 * spin * zeta) * delta_Q;
}

struct PulseSchedule {
  double tau = 0.0;
  int ell_star = 3;
  int zeta = 2;
  double delta = 0.0;

  static PulseSchedule tuned(int zeta, double omega_Zn, int ell_star = 3, double delta = 0.0) {
    return {resonance_delay(zeta, omega_Zn, ell_star, delta), ell_star, zeta, delta};
  }
};

/// One element of the pulse cycle: an ideal rotation exp(-i angle S_axis) or a free
/// evolution lasting `quarters` times tau/4.
struct CycleStep {
  enum class Kind { rotate_x, rotate_y, free } kind;
  double angle = 0.0;
};

/// The cycle in the order the steps act on the state.
inline std::vector<CycleStep> pulse_cycle() {
  using K = CycleStep::Kind;
  return {{K::rotate_y, pi / 2}, {K::free}, {K::rotate_x, -pi}, {K::free},
          {K::rotate_y, pi / 2}, {K::rotate_x, pi / 2}, {K::free}, {K::rotate_y, pi},
          {K::free}, {K::rotate_x, pi / 2}};
}

}  // namespace spinmem
