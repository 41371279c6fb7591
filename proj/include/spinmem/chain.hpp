// spinmem: chain-of-states reduction of the collective flip-flop dynamics.
//
// Starting from a product state M, alternate applications of Phi^+ and Phi^- generate
// two chains of collective nuclear states. The "+" chain starts with Phi^+ (it is
// reached from |up, M>), the "-" chain with Phi^- (from |down, M>). Odd states carry a
// net magnetisation of +zeta or -zeta relative to M, even states none.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "spinmem/bath.hpp"
#include "spinmem/core.hpp"
#include "spinmem/parallel.hpp"
#include "spinmem/pulse.hpp"
#include "spinmem/spinwave.hpp"

namespace spinmem {

struct ChainRates {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double G_plus = 0.0;   // MHz
  double G_minus = 0.0;  // MHz
  double leakage = 0.0;  // G_minus / G_plus
};

namespace detail {

inline int level_index(double m, double spin) { return static_cast<int>(std::lround(m + spin)); }

struct PrefactorTable {
  std::vector<double> plus, minus;
};

inline PrefactorTable prefactor_table(int zeta, double spin) {
  PrefactorTable t;
  for (int i = 0; i < level_count(spin); ++i) {
    t.plus.push_back(ladder_prefactor(zeta, Sign::plus, -spin + i, spin));
    t.minus.push_back(ladder_prefactor(zeta, Sign::minus, -spin + i, spin));
  }
  return t;
}

inline void check_configuration(const NuclearConfiguration& M, const ModeCouplings& mode) {
  if (M.size() != mode.a_mode.size())
    throw Error("nuclear configuration and mode weights differ in size");
  M.validate();
}

}  // namespace detail

/// Omega_+- = sqrt(sum_j [a_{zeta,j} P_+-(m_j)]^2) and the rates G_+- = A'_zeta Omega_+-.
inline ChainRates omega_rates(const NuclearConfiguration& M, const ModeCouplings& mode,
                              int ell_star = 3) {
  detail::check_configuration(M, mode);
  const auto table = detail::prefactor_table(mode.zeta, M.spin);
  double up = 0.0, down = 0.0;
  for (std::size_t j = 0; j < M.size(); ++j) {
    const int i = detail::level_index(M.m[j], M.spin);
    const double u = mode.a_mode[j] * table.plus[i];
    const double v = mode.a_mode[j] * table.minus[i];
    up += u * u;
    down += v * v;
  }
  if (!(up > 0)) throw Error("no upward transitions: every site sits at the top of its ladder");
  ChainRates r;
  r.omega_plus = std::sqrt(up);
  r.omega_minus = std::sqrt(down);
  const double a_prime = effective_coupling(std::abs(mode.A_zeta), ell_star);
  r.G_plus = a_prime * r.omega_plus;
  r.G_minus = a_prime * r.omega_minus;
  r.leakage = r.omega_minus / r.omega_plus;
  return r;
}

/// Ordered distinct-index sums O_{p,q} = sum over distinct (i_1..i_p, j_1..j_q) of
/// u_{i_1}..u_{i_p} v_{j_1}..v_{j_q}, with u_j = [a_{zeta,j} P_+(m_j)]^2 and
/// v_j = [a_{zeta,j} P_-(m_j)]^2. Stored divided by U^p V^q (U = sum u, V = sum v).
class AlternatingSums {
 public:
  AlternatingSums(const NuclearConfiguration& M, const ModeCouplings& mode, int pmax, int qmax)
      : pmax_(pmax), qmax_(qmax) {
    detail::check_configuration(M, mode);
    const auto table = detail::prefactor_table(mode.zeta, M.spin);
    std::vector<double> u(M.size()), v(M.size());
    for (std::size_t j = 0; j < M.size(); ++j) {
      const int i = detail::level_index(M.m[j], M.spin);
      u[j] = std::pow(mode.a_mode[j] * table.plus[i], 2);
      v[j] = std::pow(mode.a_mode[j] * table.minus[i], 2);
      U_ += u[j];
      V_ += v[j];
    }
    const double su = U_ > 0 ? U_ : 1.0;
    const double sv = V_ > 0 ? V_ : 1.0;
    // elementary distinct-index sums e_{p,q} of the rescaled weights
    std::vector<double> e((pmax + 1) * (qmax + 1), 0.0);
    const auto at = [&](int p, int q) -> double& { return e[p * (qmax + 1) + q]; };
    at(0, 0) = 1.0;
    for (std::size_t j = 0; j < M.size(); ++j) {
      const double uj = u[j] / su, vj = v[j] / sv;
      if (uj == 0.0 && vj == 0.0) continue;
      for (int p = pmax; p >= 0; --p)
        for (int q = qmax; q >= 0; --q) {
          double add = 0.0;
          if (p > 0) add += at(p - 1, q) * uj;
          if (q > 0) add += at(p, q - 1) * vj;
          at(p, q) += add;
        }
    }
    scaled_.resize(e.size());
    for (int p = 0; p <= pmax; ++p)
      for (int q = 0; q <= qmax; ++q) scaled_[p * (qmax + 1) + q] = factorial(p) * factorial(q) * at(p, q);
  }

  double U() const { return U_; }
  double V() const { return V_; }

  /// O_{p,q} / (U^p V^q).
  double scaled(int p, int q) const {
    if (p < 0 || q < 0 || p > pmax_ || q > qmax_) throw Error("alternating sum index out of range");
    return scaled_[p * (qmax_ + 1) + q];
  }

  /// (u-slot, v-slot) counts of chain level k on a branch.
  static std::pair<int, int> slots(int k, Sign branch) {
    const int odd_share = (k + 1) / 2, even_share = k / 2;
    return branch == Sign::plus ? std::pair{odd_share, even_share} : std::pair{even_share, odd_share};
  }

  /// Squared link between levels k and k + 1, O_{k+1} / O_k.
  double link_squared(int k, Sign branch) const {
    const auto [p, q] = slots(k, branch);
    const auto [p1, q1] = slots(k + 1, branch);
    const double den = scaled(p, q);
    if (den == 0.0) return 0.0;
    const double ratio = scaled(p1, q1) / den;
    return ratio * (p1 > p ? U_ : V_);
  }

 private:
  static double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  }

  int pmax_, qmax_;
  double U_ = 0.0, V_ = 0.0;
  std::vector<double> scaled_;
};

/// Closed-form I = 3/2 chain element <M^(k')|Phi|M^(k)> in units of A'_zeta. Zero unless
/// |k - k'| = 1.
inline double exact_chain_element(const NuclearConfiguration& M, const ModeCouplings& mode, int k,
                                  int k_prime, Sign branch) {
  if (std::abs(M.spin - 1.5) > 1e-12) throw Error("closed-form chain elements require I = 3/2");
  if (k < 0 || k_prime < 0) throw Error("chain level must be non-negative");
  if (std::abs(k - k_prime) != 1) return 0.0;
  const int lo = std::min(k, k_prime);
  const auto [p, q] = AlternatingSums::slots(lo + 1, branch);
  const AlternatingSums sums(M, mode, p, q);
  return std::sqrt(sums.link_squared(lo, branch));
}

/// Reduced description of an I = 3/2 configuration: every site is a two-level system
/// (its level m_j and m_j +- zeta), because a level that can be raised cannot be lowered.
struct ReducedSpace {
  std::vector<std::size_t> site;
  std::vector<double> weight;  // a_{zeta,j} P_+(m_j) (raising sites) or a_{zeta,j} P_-(m_j)
  std::vector<char> raising;
  int zeta = 2;

  std::size_t dim() const { return std::size_t{1} << site.size(); }

  /// Phi^+ (sign = plus) or Phi^- on a vector indexed by the flipped-site bitmask.
  Eigen::VectorXd apply(const Eigen::VectorXd& v, Sign sign) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    const bool up = sign == Sign::plus;
    for (std::size_t s = 0; s < dim(); ++s) {
      if (v[s] == 0.0) continue;
      for (std::size_t j = 0; j < site.size(); ++j) {
        const std::size_t bit = std::size_t{1} << j;
        const bool flipped = (s & bit) != 0;
        // a raising site goes up when unflipped; a lowering site goes back up when flipped
        if ((raising[j] != 0) != flipped ? up : !up) out[s ^ bit] += weight[j] * v[s];
      }
    }
    return out;
  }
};

inline ReducedSpace reduced_space(const NuclearConfiguration& M, const ModeCouplings& mode,
                                  std::size_t max_active = 16) {
  detail::check_configuration(M, mode);
  if (std::abs(M.spin - 1.5) > 1e-12) throw Error("reduced two-level space requires I = 3/2");
  const auto table = detail::prefactor_table(mode.zeta, M.spin);
  ReducedSpace r;
  r.zeta = mode.zeta;
  for (std::size_t j = 0; j < M.size(); ++j) {
    const int i = detail::level_index(M.m[j], M.spin);
    if (mode.a_mode[j] == 0.0) continue;
    const bool up = table.plus[i] != 0.0;
    r.site.push_back(j);
    r.raising.push_back(up ? 1 : 0);
    r.weight.push_back(mode.a_mode[j] * (up ? table.plus[i] : table.minus[i]));
  }
  if (r.site.size() > max_active) throw Error("too many active sites for the reduced space");
  return r;
}

/// Orthonormal chain vectors in the reduced space (only for Lanczos chains).
struct ChainVectors {
  ReducedSpace space;
  std::vector<Eigen::VectorXd> plus, minus;  // index k, level 0 is |M> in both
};

/// Where a nuclear chain state sits: level k and branch (+1, -1, or 0 for shared states).
struct ChainLabel {
  int k = 0;
  int branch = 0;
};

/// Truncated union chain. plus_links[k-1] couples level k-1 and k on the + branch (MHz),
/// likewise minus_links. Outward links connect level k_star to the first dropped level.
struct ChainBasis {
  int zeta = 2;
  int k_star = 1;
  std::vector<double> plus_links, minus_links;
  double plus_outward = 0.0, minus_outward = 0.0;
  bool shared_even = true;
  double G_plus = 0.0, G_minus = 0.0;
  std::shared_ptr<const ChainVectors> vectors;

  bool shared(int k) const { return k == 0 || (shared_even && k % 2 == 0); }

  int nuclear_dim() const {
    int n = 1;
    for (int k = 1; k <= k_star; ++k) n += shared(k) ? 1 : 2;
    return n;
  }

  int hybrid_dim() const { return 2 * nuclear_dim(); }

  int plus_index(int k) const {
    if (k < 0 || k > k_star) throw Error("chain level out of range");
    int n = 0;
    for (int i = 1; i <= k; ++i) n += shared(i - 1) ? 1 : 2;
    return n;
  }

  int minus_index(int k) const { return plus_index(k) + (shared(k) ? 0 : 1); }

  std::vector<ChainLabel> labels() const {
    std::vector<ChainLabel> out{{0, 0}};
    for (int k = 1; k <= k_star; ++k) {
      if (shared(k)) {
        out.push_back({k, 0});
      } else {
        out.push_back({k, +1});
        out.push_back({k, -1});
      }
    }
    return out;
  }

  /// Bookkeeping magnetisation relative to M, in units of the bare Zeeman quantum.
  int net_magnetisation(int nuclear_index) const {
    const auto lab = labels().at(nuclear_index);
    return lab.k % 2 == 1 ? lab.branch * zeta : 0;
  }

  /// Matrix of Phi^+ (times A') on the nuclear chain states.
  Eigen::MatrixXd phi_plus() const {
    const int n = nuclear_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= k_star; ++k) {
      const double bp = plus_links[k - 1], bm = minus_links[k - 1];
      if (k % 2 == 1) {
        m(plus_index(k), plus_index(k - 1)) += bp;
        m(minus_index(k - 1), minus_index(k)) += bm;
      } else {
        m(plus_index(k - 1), plus_index(k)) += bp;
        m(minus_index(k), minus_index(k - 1)) += bm;
      }
    }
    return m;
  }

  /// A'(Phi^+ S^- + Phi^- S^+) in the basis index = e * nuclear_dim + s, e = 0 for up.
  Eigen::MatrixXd hamiltonian() const {
    const int n = nuclear_dim();
    const Eigen::MatrixXd p = phi_plus();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    h.bottomLeftCorner(n, n) = p;
    h.topRightCorner(n, n) = p.transpose();
    return h;
  }

  /// Nuclear states at depth k_star with a nonzero link to the dropped part of the chain.
  std::vector<int> boundary_states() const {
    std::vector<int> out;
    if (shared(k_star)) {
      if (plus_outward != 0.0 || minus_outward != 0.0) out.push_back(plus_index(k_star));
    } else {
      if (plus_outward != 0.0) out.push_back(plus_index(k_star));
      if (minus_outward != 0.0) out.push_back(minus_index(k_star));
    }
    return out;
  }

  void validate() const {
    if (k_star < 1) throw Error("chain depth must be >= 1");
    if (static_cast<int>(plus_links.size()) != k_star || static_cast<int>(minus_links.size()) != k_star)
      throw Error("chain link arrays must have k_star entries");
  }
};

/// Chain with the uniform rates G_+ (raising) and G_- (lowering) on every link.
inline ChainBasis uniform_chain(double G_plus, double G_minus, int k_star, int zeta = 2) {
  if (k_star < 1) throw Error("chain depth must be >= 1");
  if (G_plus < 0 || G_minus < 0) throw Error("chain rates must be non-negative");
  ChainBasis c;
  c.zeta = zeta;
  c.k_star = k_star;
  c.G_plus = G_plus;
  c.G_minus = G_minus;
  const auto plus_link = [&](int k) { return k % 2 == 1 ? G_plus : G_minus; };
  const auto minus_link = [&](int k) { return k % 2 == 1 ? G_minus : G_plus; };
  for (int k = 1; k <= k_star; ++k) {
    c.plus_links.push_back(plus_link(k));
    c.minus_links.push_back(minus_link(k));
  }
  c.plus_outward = plus_link(k_star + 1);
  c.minus_outward = minus_link(k_star + 1);
  return c;
}

inline ChainBasis uniform_chain(const NuclearConfiguration& M, const ModeCouplings& mode, int k_star,
                                int ell_star = 3) {
  const auto r = omega_rates(M, mode, ell_star);
  return uniform_chain(r.G_plus, r.G_minus, k_star, mode.zeta);
}

/// Union chain with every link taken from the closed-form I = 3/2 elements.
inline ChainBasis closed_form_chain(const NuclearConfiguration& M, const ModeCouplings& mode, int k_star,
                                    int ell_star = 3) {
  if (std::abs(M.spin - 1.5) > 1e-12) throw Error("closed-form chain elements require I = 3/2");
  if (k_star < 1) throw Error("chain depth must be >= 1");
  const auto r = omega_rates(M, mode, ell_star);
  const double a_prime = effective_coupling(std::abs(mode.A_zeta), ell_star);
  const int most = (k_star + 2) / 2;
  const AlternatingSums sums(M, mode, most, most);
  ChainBasis c;
  c.zeta = mode.zeta;
  c.k_star = k_star;
  c.G_plus = r.G_plus;
  c.G_minus = r.G_minus;
  for (int k = 1; k <= k_star; ++k) {
    c.plus_links.push_back(a_prime * std::sqrt(sums.link_squared(k - 1, Sign::plus)));
    c.minus_links.push_back(a_prime * std::sqrt(sums.link_squared(k - 1, Sign::minus)));
  }
  c.plus_outward = a_prime * std::sqrt(sums.link_squared(k_star, Sign::plus));
  c.minus_outward = a_prime * std::sqrt(sums.link_squared(k_star, Sign::minus));
  return c;
}

/// Exact chain by Lanczos recursion in the reduced two-level space (I = 3/2, small N).
/// Each branch spans the exact Krylov space of |up, M> or |down, M>, so even levels are
/// not shared between branches. A branch that closes early has zero links beyond.
inline ChainBasis lanczos_chain(const NuclearConfiguration& M, const ModeCouplings& mode, int k_star,
                                int ell_star = 3) {
  if (k_star < 1) throw Error("chain depth must be >= 1");
  const auto r = omega_rates(M, mode, ell_star);
  const double a_prime = effective_coupling(std::abs(mode.A_zeta), ell_star);
  auto vec = std::make_shared<ChainVectors>();
  vec->space = reduced_space(M, mode);
  const auto& space = vec->space;
  const double scale = r.omega_plus + r.omega_minus;

  const auto run = [&](Sign first, std::vector<Eigen::VectorXd>& states) {
    std::vector<double> links;
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
    v0[0] = 1.0;
    states.push_back(v0);
    bool closed = false;
    for (int k = 1; k <= k_star + 1; ++k) {
      if (closed) {
        links.push_back(0.0);
        if (k <= k_star) states.push_back(Eigen::VectorXd::Zero(v0.size()));
        continue;
      }
      const Sign op = (k % 2 == 1) == (first == Sign::plus) ? Sign::plus : Sign::minus;
      Eigen::VectorXd w = space.apply(states[k - 1], op);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& s : states) w -= s.dot(w) * s;
      const double b = w.norm();
      if (b <= 1e-12 * scale) {
        closed = true;
        links.push_back(0.0);
        if (k <= k_star) states.push_back(Eigen::VectorXd::Zero(v0.size()));
        continue;
      }
      links.push_back(b);
      if (k <= k_star) states.push_back(w / b);
    }
    return links;
  };

  const auto plus = run(Sign::plus, vec->plus);
  const auto minus = run(Sign::minus, vec->minus);
  ChainBasis c;
  c.zeta = mode.zeta;
  c.k_star = k_star;
  c.shared_even = false;
  c.G_plus = r.G_plus;
  c.G_minus = r.G_minus;
  for (int k = 0; k < k_star; ++k) {
    c.plus_links.push_back(a_prime * plus[k]);
    c.minus_links.push_back(a_prime * minus[k]);
  }
  c.plus_outward = a_prime * plus[k_star];
  c.minus_outward = a_prime * minus[k_star];
  c.vectors = std::move(vec);
  return c;
}

/// Exact propagation on a chain by eigendecomposition of its hybrid Hamiltonian.
class ChainPropagator {
 public:
  explicit ChainPropagator(ChainBasis chain) : chain_(std::move(chain)) {
    chain_.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(chain_.hamiltonian());
    if (eig.info() != Eigen::Success) throw Error("chain eigendecomposition failed");
    vecs_ = eig.eigenvectors();
    vals_ = eig.eigenvalues();
    const int n = chain_.nuclear_dim();
    for (int s : chain_.boundary_states()) {
      boundary_.push_back(s);
      boundary_.push_back(n + s);
    }
  }

  const ChainBasis& chain() const { return chain_; }
  int dim() const { return static_cast<int>(vals_.size()); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const {
    if (psi.size() != vals_.size()) throw Error("state dimension does not match the chain");
    // real eigenvectors: transform real and imaginary parts separately
    Eigen::MatrixXd parts(psi.size(), 2);
    parts.col(0) = psi.real();
    parts.col(1) = psi.imag();
    Eigen::MatrixXd c = vecs_.transpose() * parts;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const cplx z = cplx(c(i, 0), c(i, 1)) * std::polar(1.0, -vals_[i] * t);
      c(i, 0) = z.real();
      c(i, 1) = z.imag();
    }
    const Eigen::MatrixXd out = vecs_ * c;
    Eigen::VectorXcd r(psi.size());
    r.real() = out.col(0);
    r.imag() = out.col(1);
    return r;
  }

  /// U(t) rho U(t)^dagger.
  Eigen::MatrixXcd apply_density(const Eigen::MatrixXcd& rho, double t) const {
    if (rho.rows() != vals_.size() || rho.cols() != vals_.size())
      throw Error("density dimension does not match the chain");
    const Eigen::MatrixXcd v = vecs_.cast<cplx>();
    Eigen::VectorXcd ph(vals_.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, -vals_[i] * t);
    const Eigen::MatrixXcd u = v * ph.asDiagonal() * v.transpose();
    return u * rho * u.adjoint();
  }

  double boundary_occupation(const Eigen::VectorXcd& psi) const {
    double occ = 0.0;
    for (int i : boundary_) occ += std::norm(psi[i]);
    return occ;
  }

  double boundary_occupation(const Eigen::MatrixXcd& rho) const {
    double occ = 0.0;
    for (int i : boundary_) occ += rho(i, i).real();
    return occ;
  }

 private:
  ChainBasis chain_;
  Eigen::MatrixXd vecs_;
  Eigen::VectorXd vals_;
  std::vector<int> boundary_;
};

/// Basis vector |e, s> of a chain (e = 0 up, 1 down).
inline Eigen::VectorXcd hybrid_basis_state(const ChainBasis& chain, int electron, int nuclear_index) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(chain.hybrid_dim());
  v[electron * chain.nuclear_dim() + nuclear_index] = 1.0;
  return v;
}

/// Smallest depth whose boundary stays below `tol` over [0, horizon] (in units of
/// 1/G_+) from |up, M> and |down, M>, confirmed by comparing with a chain twice as deep.
inline int select_truncation(double leakage, double horizon, double tol, int cap = 64) {
  if (!(tol > 0)) throw Error("truncation tolerance must be positive");
  if (!(leakage >= 0)) throw Error("leakage must be non-negative");
  if (!(horizon >= 0)) throw Error("horizon must be non-negative");
  constexpr int samples = 48;
  const auto end_states = [&](const ChainPropagator& p) {
    std::vector<Eigen::VectorXcd> out;
    for (int e = 0; e < 2; ++e) out.push_back(p.apply(hybrid_basis_state(p.chain(), e, 0), horizon));
    return out;
  };
  for (int k = 1; k <= cap; ++k) {
    const ChainPropagator prop(uniform_chain(1.0, leakage, k));
    double worst = 0.0;
    for (int e = 0; e < 2 && worst < tol; ++e) {
      const auto psi0 = hybrid_basis_state(prop.chain(), e, 0);
      for (int i = 1; i <= samples; ++i)
        worst = std::max(worst, prop.boundary_occupation(prop.apply(psi0, horizon * i / samples)));
    }
    if (worst >= tol) continue;
    const ChainPropagator deep(uniform_chain(1.0, leakage, 2 * k));
    const auto a = end_states(prop);
    const auto b = end_states(deep);
    const int n = prop.chain().nuclear_dim(), nd = deep.chain().nuclear_dim();
    double deviation = 0.0;
    for (int s = 0; s < 2; ++s) {
      cplx overlap = 0.0;
      for (int e = 0; e < 2; ++e)
        for (int i = 0; i < n; ++i) overlap += std::conj(b[s][e * nd + i]) * a[s][e * n + i];
      deviation = std::max(deviation, 1.0 - std::abs(overlap));
    }
    if (deviation < tol) return k;
  }
  throw TruncationError("truncation exceeded: no chain depth up to " + std::to_string(cap) +
                        " converges");
}

struct LeakageSweep {
  std::vector<double> P;
  std::vector<int> zeta;
  std::vector<std::vector<double>> mean;  // [mode][point]
  std::vector<std::vector<double>> rsd;   // per-sample standard deviation / mean
};

/// Mean and relative spread of G_-/G_+ over thermal configurations. Every sample is
/// evaluated for all modes on the same configuration.
inline LeakageSweep ensemble_leakage(const std::vector<ModeCouplings>& modes, double spin,
                                     const std::vector<double>& P_grid, int n_samples,
                                     std::uint64_t seed, int threads = 1) {
  if (n_samples < 100) throw Error("ensemble leakage needs at least 100 samples per point");
  if (modes.empty()) throw Error("no spin-wave modes given");
  const std::size_t n_sites = modes.front().a_mode.size();
  LeakageSweep out;
  out.P = P_grid;
  for (const auto& m : modes) out.zeta.push_back(m.zeta);
  out.mean.assign(modes.size(), {});
  out.rsd.assign(modes.size(), {});
  for (std::size_t ip = 0; ip < P_grid.size(); ++ip) {
    std::vector<std::vector<double>> leak(modes.size(), std::vector<double>(n_samples));
    parallel_for(n_samples, threads, [&](std::size_t i) {
      const auto M = sample_thermal_configuration(P_grid[ip], spin, n_sites, derive_seed(seed, ip, i));
      for (std::size_t z = 0; z < modes.size(); ++z) leak[z][i] = omega_rates(M, modes[z]).leakage;
    });
    for (std::size_t z = 0; z < modes.size(); ++z) {
      double sum = 0.0;
      for (double x : leak[z]) sum += x;
      const double mean = sum / n_samples;
      double var = 0.0;
      for (double x : leak[z]) var += (x - mean) * (x - mean);
      var /= n_samples - 1;
      out.mean[z].push_back(mean);
      out.rsd[z].push_back(mean > 0 ? std::sqrt(var) / mean : 0.0);
    }
  }
  return out;
}

}  // namespace spinmem
