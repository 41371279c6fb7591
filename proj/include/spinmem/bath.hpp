// spinmem: hyperfine coupling distributions and thermal nuclear states.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "spinmem/core.hpp"

namespace spinmem {

/// Physical inputs for a single-species nuclear bath. Lengths in nm, energies in MHz.
struct BathParams {
  double Lx = 10.0;
  double Ly = 10.0;
  double Lz = 1.0;
  double lattice_spacing = 1.0;
  double spin = 1.5;
  double A_total = 65000.0;  // sum of the collinear hyperfine constants A^j
  double B_Q = 1.5;
  double theta = 0.9553166181245093;  // arctan(sqrt 2): the quadrupolar shift vanishes here
  double omega_Zn = 50.0;
  double omega_Ze = 0.0;  // only used by the pulsed oracle frame
  double box_sigmas = 4.0;
  double site_floor = 1e-9;  // relative to max(a)
  std::array<double, 3> lattice_offset{0.0, 0.0, 0.0};  // in units of the spacing

  void validate() const {
    if (!(Lx > 0 && Ly > 0 && Lz > 0 && lattice_spacing > 0))
      throw Error("bath lengths and lattice spacing must be positive");
    require_supported_spin(spin);
    if (!(omega_Zn > 0)) throw Error("nuclear Zeeman energy must be positive");
    if (!(std::abs(B_Q) / omega_Zn < 1.0))
      throw Error("quadrupolar strength must satisfy |B_Q|/omega_Zn < 1");
    if (!(box_sigmas >= 4.0)) throw Error("lattice box must cover at least 4 standard deviations");
    if (!(site_floor >= 0.0 && site_floor < 1.0)) throw Error("site floor must lie in [0, 1)");
  }
};

/// Normalised hyperfine coefficients a_j = A^j / sum A.
struct HyperfineBath {
  std::vector<double> a;
  double inv_participation = 0.0;  // sum_j a_j^2

  std::size_t size() const { return a.size(); }
};

/// Builds a bath from arbitrary positive weights: sites below `floor * max` are
/// dropped and the rest renormalised to unit sum.
inline HyperfineBath bath_from_weights(std::span<const double> weights, double floor = 0.0) {
  if (weights.empty()) throw Error("bath has no sites");
  const double peak = *std::max_element(weights.begin(), weights.end());
  if (!(peak > 0)) throw Error("bath weights must be positive");
  HyperfineBath bath;
  bath.a.reserve(weights.size());
  for (double w : weights) {
    if (w < 0) throw Error("bath weights must be non-negative");
    if (w > 0 && w >= floor * peak) bath.a.push_back(w);
  }
  const double total = std::accumulate(bath.a.begin(), bath.a.end(), 0.0);
  double sq = 0.0;
  for (double& x : bath.a) {
    x /= total;
    sq += x * x;
  }
  bath.inv_participation = sq;
  return bath;
}

inline HyperfineBath uniform_bath(std::size_t n) {
  std::vector<double> w(n, 1.0);
  return bath_from_weights(w);
}

namespace detail {

inline std::vector<double> lattice_axis(double half_extent, double spacing, double offset) {
  const double eps = 1e-12 * std::max(1.0, half_extent / spacing);
  const auto lo = static_cast<long>(std::ceil(-half_extent / spacing - offset - eps));
  const auto hi = static_cast<long>(std::floor(half_extent / spacing - offset + eps));
  std::vector<double> pts;
  for (long i = lo; i <= hi; ++i) pts.push_back((static_cast<double>(i) + offset) * spacing);
  return pts;
}

}  // namespace detail

/// Samples a Gaussian electron density on a simple cubic lattice and returns the
/// normalised hyperfine coefficients a_j proportional to the density at each site.
inline HyperfineBath build_gaussian_bath(const BathParams& p) {
  p.validate();
  const std::array<double, 3> widths{p.Lx, p.Ly, p.Lz};
  std::array<std::vector<double>, 3> factors;
  for (int ax = 0; ax < 3; ++ax) {
    const auto pts =
        detail::lattice_axis(p.box_sigmas * widths[ax], p.lattice_spacing, p.lattice_offset[ax]);
    for (double x : pts) factors[ax].push_back(std::exp(-x * x / (2.0 * widths[ax] * widths[ax])));
  }
  if (factors[0].empty() || factors[1].empty() || factors[2].empty())
    throw Error("lattice box contains no sites");
  std::vector<double> w;
  w.reserve(factors[0].size() * factors[1].size() * factors[2].size());
  for (double fx : factors[0])
    for (double fy : factors[1])
      for (double fz : factors[2]) w.push_back(fx * fy * fz);
  return bath_from_weights(w, p.site_floor);
}

/// A nuclear product state |m_1, ..., m_N>.
struct NuclearConfiguration {
  double spin = 1.5;
  std::vector<double> m;

  std::size_t size() const { return m.size(); }

  /// -sum m / (N I): +1 when every nucleus sits in m = -I.
  double polarisation() const {
    if (m.empty()) return 0.0;
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    return -total / (static_cast<double>(m.size()) * spin);
  }

  void validate() const {
    require_supported_spin(spin);
    for (double x : m)
      if (!is_level(x, spin)) throw Error("invalid Zeeman level in nuclear configuration");
  }
};

inline NuclearConfiguration fully_polarised(double spin, std::size_t n) {
  require_supported_spin(spin);
  return NuclearConfiguration{spin, std::vector<double>(n, -spin)};
}

/// Single-site Boltzmann weights p(m) ~ exp(-beta m), indexed from m = -I upwards.
inline std::vector<double> level_probabilities(double beta, double spin) {
  const int levels = level_count(spin);
  std::vector<double> p(levels);
  // shift the exponent by its maximum so large beta stays finite
  const double shift = beta >= 0 ? beta * spin : -beta * spin;
  for (int i = 0; i < levels; ++i) {
    const double m = -spin + i;
    p[i] = std::exp(-beta * m - shift);
  }
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= z;
  return p;
}

inline double mean_level(double beta, double spin) {
  const auto p = level_probabilities(beta, spin);
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * (-spin + static_cast<double>(i));
  return mean;
}

/// Inverse spin temperature at which the single-site mean magnetisation equals -I P.
inline double solve_spin_temperature(double polarisation, double spin) {
  require_supported_spin(spin);
  if (!(polarisation < 1.0) || !(polarisation > -1.0))
    throw Error("polarisation must lie strictly inside (-1, 1); use fully_polarised() for P = 1");
  if (polarisation == 0.0) return 0.0;
  const double target = -spin * polarisation;
  const auto residual = [&](double beta) { return mean_level(beta, spin) - target; };
  // mean_level decreases monotonically in beta; grow the bracket until it changes sign
  double lo = polarisation > 0 ? 0.0 : -1.0;
  double hi = polarisation > 0 ? 1.0 : 0.0;
  while (residual(lo) * residual(hi) > 0) {
    if (polarisation > 0)
      hi *= 2.0;
    else
      lo *= 2.0;
    if (std::abs(hi - lo) > 1e6) throw Error("spin temperature bracket diverged");
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

/// Draws N independent sites from the thermal distribution at polarisation P.
template <class Engine>
NuclearConfiguration sample_thermal_configuration(double polarisation, double spin, std::size_t n,
                                                  Engine& rng) {
  if (polarisation >= 1.0) return fully_polarised(spin, n);
  if (polarisation <= -1.0) return NuclearConfiguration{spin, std::vector<double>(n, spin)};
  const double beta = solve_spin_temperature(polarisation, spin);
  const auto p = level_probabilities(beta, spin);
  std::discrete_distribution<int> draw(p.begin(), p.end());
  NuclearConfiguration config{spin, std::vector<double>(n)};
  for (double& m : config.m) m = -spin + draw(rng);
  return config;
}

inline NuclearConfiguration sample_thermal_configuration(double polarisation, double spin,
                                                         std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_thermal_configuration(polarisation, spin, n, rng);
}

}  // namespace spinmem
