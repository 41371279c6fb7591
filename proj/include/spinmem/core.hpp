// spinmem: central-spin quantum memory simulator.
//
// Common definitions shared by every module. Energies and rates are angular
// frequencies in MHz (rad/us) and times are in microseconds, so that a phase
// is simply rate * time.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spinmem {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truncated chain was populated at its boundary beyond tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Nuclear spin-wave mode: zeta = 1 flips a nucleus by one quantum, zeta = 2 by two.
enum class Mode : int { single = 1, double_ = 2 };

inline int order(Mode mode) { return static_cast<int>(mode); }

inline Mode mode_from_order(int zeta) {
  if (zeta == 1) return Mode::single;
  if (zeta == 2) return Mode::double_;
  throw Error("spin-wave mode must be 1 or 2, got " + std::to_string(zeta));
}

/// Direction of a collective transition (raising or lowering the nuclear spin).
enum class Sign : int { plus = +1, minus = -1 };

inline int value(Sign s) { return static_cast<int>(s); }

/// True when `spin` is a half-integer >= 3/2 (the only spins with a quadrupole moment
/// that this simulator supports).
inline bool is_supported_spin(double spin) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-12) return false;
  const auto n = static_cast<long>(rounded);
  return n >= 3 && n % 2 == 1;
}

inline void require_supported_spin(double spin) {
  if (!is_supported_spin(spin))
    throw Error("nuclear spin must be a half-integer >= 3/2, got " + std::to_string(spin));
}

/// Number of Zeeman levels 2I+1.
inline int level_count(double spin) { return static_cast<int>(std::lround(2.0 * spin)) + 1; }

/// True when m is one of -I, -I+1, ..., I.
inline bool is_level(double m, double spin) {
  const double offset = m + spin;
  const double rounded = std::round(offset);
  return std::abs(offset - rounded) < 1e-12 && rounded >= -0.5 && rounded <= 2.0 * spin + 0.5;
}

}  // namespace spinmem
