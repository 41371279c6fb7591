// spinmem: action of exp(-i H t) on a vector by scaled Taylor series.
#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "spinmem/core.hpp"

namespace spinmem {

/// exp(-i t H) v for Hermitian H given as a matrix-vector product. `norm_bound` must
/// bound ||H||; the interval is split so that every substep has |dt| ||H|| <= 1.
template <class Apply>
Eigen::VectorXcd expmv(Apply&& apply_h, double norm_bound, Eigen::VectorXcd v, double t,
                       double tol = 1e-16) {
  if (!(norm_bound >= 0)) throw Error("operator norm bound must be non-negative");
  if (t == 0.0 || norm_bound == 0.0) return v;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * norm_bound)));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = v;
    const double scale = v.norm();
    for (int k = 1; k < 80; ++k) {
      term = apply_h(term);
      term *= cplx(0.0, -dt / k);
      v += term;
      if (term.norm() <= tol * scale) break;
    }
  }
  return v;
}

}  // namespace spinmem
