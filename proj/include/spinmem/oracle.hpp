// spinmem: brute-force checks in the full electron x (2I+1)^N product space.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinmem/bath.hpp"
#include "spinmem/chain.hpp"
#include "spinmem/core.hpp"
#include "spinmem/expmv.hpp"
#include "spinmem/pulse.hpp"
#include "spinmem/spinwave.hpp"

namespace spinmem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Product basis: index = e * D + sum_j l_j d^j, with e = 0 for up, l_j = m_j + I and
/// d = 2I + 1, D = d^N.
class FullSpace {
 public:
  FullSpace(int n_sites, double spin, int max_sites = 6) : n_(n_sites), spin_(spin) {
    require_supported_spin(spin);
    if (n_sites < 1 || n_sites > max_sites)
      throw Error("full-space oracle supports 1.." + std::to_string(max_sites) + " sites");
    d_ = level_count(spin);
    D_ = 1;
    for (int j = 0; j < n_sites; ++j) D_ *= d_;
  }

  int sites() const { return n_; }
  double spin() const { return spin_; }
  Eigen::Index nuclear_dim() const { return D_; }
  Eigen::Index dim() const { return 2 * D_; }

  Eigen::Index nuclear_index(const std::vector<double>& m) const {
    if (static_cast<int>(m.size()) != n_) throw Error("configuration size does not match the oracle space");
    Eigen::Index idx = 0, stride = 1;
    for (int j = 0; j < n_; ++j) {
      if (!is_level(m[j], spin_)) throw Error("invalid Zeeman level");
      idx += stride * detail::level_index(m[j], spin_);
      stride *= d_;
    }
    return idx;
  }

  int level(Eigen::Index nuclear, int site) const {
    for (int j = 0; j < site; ++j) nuclear /= d_;
    return static_cast<int>(nuclear % d_);
  }

  /// Single-site operators as d x d matrices (rows/cols indexed by l = m + I).
  Eigen::MatrixXd iz() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
    for (int l = 0; l < d_; ++l) m(l, l) = -spin_ + l;
    return m;
  }

  Eigen::MatrixXd iplus() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
    for (int l = 0; l + 1 < d_; ++l) {
      const double mm = -spin_ + l;
      m(l + 1, l) = std::sqrt(spin_ * (spin_ + 1.0) - mm * (mm + 1.0));
    }
    return m;
  }

  /// sum_j w_j op_j on the nuclear space.
  SparseMatrix nuclear_sum(const Eigen::MatrixXd& op, const std::vector<double>& w) const {
    if (static_cast<int>(w.size()) != n_) throw Error("site weights do not match the oracle space");
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::Index stride = 1;
    for (int j = 0; j < n_; ++j) {
      for (Eigen::Index s = 0; s < D_; ++s) {
        const int l = level(s, j);
        for (int l2 = 0; l2 < d_; ++l2) {
          const double v = op(l2, l) * w[j];
          if (v != 0.0) trip.emplace_back(s + (l2 - l) * stride, s, v);
        }
      }
      stride *= d_;
    }
    SparseMatrix m(D_, D_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  /// electron (2 x 2) tensor nuclear.
  SparseMatrix electron_tensor(const Eigen::Matrix2d& e, const SparseMatrix& nuc) const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        if (e(a, b) == 0.0) continue;
        for (Eigen::Index r = 0; r < nuc.outerSize(); ++r)
          for (SparseMatrix::InnerIterator it(nuc, r); it; ++it)
            trip.emplace_back(a * D_ + it.row(), b * D_ + it.col(), e(a, b) * it.value());
      }
    SparseMatrix m(dim(), dim());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  /// Phi_zeta^+ with site weights w: sum_j w_j (I+ Iz + Iz I+)_j or sum_j w_j (I+^2)_j.
  SparseMatrix phi_plus(int zeta, const std::vector<double>& w) const {
    mode_from_order(zeta);
    const Eigen::MatrixXd ip = iplus(), z = iz();
    const Eigen::MatrixXd op = zeta == 1 ? Eigen::MatrixXd(ip * z + z * ip) : Eigen::MatrixXd(ip * ip);
    return nuclear_sum(op, w);
  }

  Eigen::VectorXcd product_state(cplx alpha, cplx beta, const std::vector<double>& m) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim());
    const Eigen::Index s = nuclear_index(m);
    v[s] = alpha;
    v[D_ + s] = beta;
    return v;
  }

 private:
  int n_;
  double spin_;
  int d_ = 0;
  Eigen::Index D_ = 1;
};

inline double infinity_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

/// A'(Phi^+ S^- + Phi^- S^+) on the full space.
inline SparseMatrix effective_hamiltonian(const FullSpace& space, const ModeCouplings& mode, int ell_star = 3) {
  const double a_prime = effective_coupling(std::abs(mode.A_zeta), ell_star);
  const SparseMatrix phi = space.phi_plus(mode.zeta, mode.a_mode);
  Eigen::Matrix2d s_minus = Eigen::Matrix2d::Zero();
  s_minus(1, 0) = 1.0;
  const SparseMatrix lower = space.electron_tensor(s_minus, phi);
  SparseMatrix h = lower + SparseMatrix(lower.transpose());
  return a_prime * h;
}

struct FullStateVector {
  Eigen::VectorXcd amp;
  int sites = 0;
  double spin = 1.5;
};

/// exp(-i H t) psi for a sparse real symmetric H.
inline Eigen::VectorXcd sparse_evolve(const SparseMatrix& h, const Eigen::VectorXcd& psi, double t) {
  return expmv([&](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(h.cast<cplx>() * v); },
               infinity_norm(h), psi, t);
}

inline FullStateVector exact_effective_evolution(const NuclearConfiguration& M, const ModeCouplings& mode,
                                                 cplx alpha, cplx beta, double t, int ell_star = 3) {
  const FullSpace space(static_cast<int>(M.size()), M.spin);
  const SparseMatrix h = effective_hamiltonian(space, mode, ell_star);
  return {sparse_evolve(h, space.product_state(alpha, beta, M.m), t), space.sites(), space.spin()};
}

/// Maps a chain state to the full product basis. Needs the Lanczos vectors, which exist
/// only for lanczos_chain(); on shared even levels the up component takes the + branch
/// vector and the down component the - branch vector.
class ChainEmbedding {
 public:
  ChainEmbedding(const ChainBasis& chain, const NuclearConfiguration& M)
      : chain_(chain), space_(static_cast<int>(M.size()), M.spin) {
    if (!chain.vectors) throw Error("chain has no explicit state vectors (use lanczos_chain)");
    const auto& red = chain.vectors->space;
    base_.resize(red.dim());
    for (std::size_t s = 0; s < red.dim(); ++s) {
      std::vector<double> m = M.m;
      for (std::size_t j = 0; j < red.site.size(); ++j)
        if (s & (std::size_t{1} << j)) m[red.site[j]] += red.raising[j] ? red.zeta : -red.zeta;
      base_[s] = space_.nuclear_index(m);
    }
  }

  const FullSpace& space() const { return space_; }

  Eigen::VectorXcd embed(const Eigen::VectorXcd& hybrid) const {
    const int n = chain_.nuclear_dim();
    const auto labels = chain_.labels();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(space_.dim());
    for (int e = 0; e < 2; ++e)
      for (int i = 0; i < n; ++i) {
        const cplx c = hybrid[e * n + i];
        if (c == 0.0) continue;
        const auto lab = labels[i];
        const bool plus = lab.branch > 0 || (lab.branch == 0 && e == 0);
        const auto& vec = plus ? chain_.vectors->plus[lab.k] : chain_.vectors->minus[lab.k];
        for (Eigen::Index s = 0; s < vec.size(); ++s)
          if (vec[s] != 0.0) out[e * space_.nuclear_dim() + base_[s]] += c * vec[s];
      }
    return out;
  }

 private:
  const ChainBasis& chain_;
  FullSpace space_;
  std::vector<Eigen::Index> base_;
};

/// Which link values drive the chain side of the comparison.
enum class ChainLinks { exact, uniform };

/// max over the grid of 1 - |<psi_exact|psi_chain>|, starting from (alpha|up>+beta|down>)|M>.
/// The chain is the exact Lanczos chain (depth up to `k_cap`); with ChainLinks::uniform
/// its links are replaced by the alternating G_+, G_- pattern before propagation.
inline double chain_vs_exact_report(const NuclearConfiguration& M, const ModeCouplings& mode,
                                    const std::vector<double>& t_grid, cplx alpha, cplx beta,
                                    ChainLinks links = ChainLinks::exact, int k_cap = 64, int ell_star = 3) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10)
    throw Error("electron amplitudes must satisfy |alpha|^2 + |beta|^2 = 1");
  const auto red = reduced_space(M, mode);
  const int depth = static_cast<int>(std::min<std::size_t>(k_cap, red.dim() + 1));
  ChainBasis chain = lanczos_chain(M, mode, depth, ell_star);
  if (links == ChainLinks::uniform) {
    const auto u = uniform_chain(chain.G_plus, chain.G_minus, depth, mode.zeta);
    chain.plus_links = u.plus_links;
    chain.minus_links = u.minus_links;
    chain.plus_outward = u.plus_outward;
    chain.minus_outward = u.minus_outward;
  }
  const ChainPropagator prop(chain);
  const ChainEmbedding embedding(prop.chain(), M);
  const SparseMatrix h = effective_hamiltonian(embedding.space(), mode, ell_star);
  const Eigen::VectorXcd psi0 = embedding.space().product_state(alpha, beta, M.m);
  Eigen::VectorXcd chain0 = Eigen::VectorXcd::Zero(chain.hybrid_dim());
  chain0[0] = alpha;
  chain0[chain.nuclear_dim()] = beta;
  double worst = 0.0;
  for (double t : t_grid) {
    const Eigen::VectorXcd exact = sparse_evolve(h, psi0, t);
    const Eigen::VectorXcd approx = embedding.embed(prop.apply(chain0, t));
    worst = std::max(worst, 1.0 - std::abs(exact.dot(approx)));
  }
  return worst;
}

/// Write/read protocol in the full space with the effective Hamiltonian.
inline double exact_protocol_fidelity(const NuclearConfiguration& M, const ModeCouplings& mode, cplx alpha,
                                      cplx beta, double t1, double t2, int ell_star = 3) {
  const FullSpace space(static_cast<int>(M.size()), M.spin);
  const SparseMatrix h = effective_hamiltonian(space, mode, ell_star);
  const Eigen::Index D = space.nuclear_dim();
  const Eigen::VectorXcd written = sparse_evolve(h, space.product_state(alpha, beta, M.m), t1);
  double f = 0.0;
  for (int e = 0; e < 2; ++e) {
    Eigen::VectorXcd reset = Eigen::VectorXcd::Zero(space.dim());
    reset.segment(D, D) = written.segment(e * D, D);
    if (reset.squaredNorm() == 0.0) continue;
    const Eigen::VectorXcd read = sparse_evolve(h, reset, t2);
    for (Eigen::Index s = 0; s < D; ++s) f += std::norm(std::conj(alpha) * read[s] - std::conj(beta) * read[D + s]);
  }
  return f;
}

/// Inputs of the pulsed oracle: per-site collinear hyperfine constants A^j (MHz), the
/// quadrupolar field and the nuclear Zeeman energy. The electron is treated in its
/// rotating frame, so its Zeeman energy does not appear.
struct PulsedSystem {
  NuclearConfiguration M;
  std::vector<double> A;
  double B_Q = 1.5;
  double theta = 0.9553166181245093;
  double omega_Zn = 50.0;
  bool overhauser = true;
};

/// Dense operators of the pulsed oracle.
class PulsedOracle {
 public:
  explicit PulsedOracle(const PulsedSystem& sys) : sys_(sys), space_(static_cast<int>(sys.M.size()), sys.M.spin, 4) {
    if (sys.A.size() != sys.M.size()) throw Error("hyperfine constants must match the configuration");
    const int n = space_.sites();
    std::vector<double> ones(n, 1.0), w1(n), w2(n);
    for (int j = 0; j < n; ++j) {
      const double pre = sys.A[j] * sys.B_Q / (2.0 * sys.omega_Zn);
      w1[j] = pre * angular_factor(1, sys.theta);
      w2[j] = pre * angular_factor(2, sys.theta);
    }
    Eigen::Matrix2d sz = Eigen::Matrix2d::Zero(), id = Eigen::Matrix2d::Identity();
    sz(0, 0) = 0.5;
    sz(1, 1) = -0.5;
    const SparseMatrix zeeman = space_.nuclear_sum(space_.iz(), ones);
    h0_ = Eigen::MatrixXd(space_.electron_tensor(id, sys.omega_Zn * zeeman));
    const SparseMatrix p1 = space_.phi_plus(1, w1), p2 = space_.phi_plus(2, w2);
    const SparseMatrix v = p1 + SparseMatrix(p1.transpose()) + p2 + SparseMatrix(p2.transpose());
    Eigen::MatrixXd h = h0_ + Eigen::MatrixXd(space_.electron_tensor(sz, v));
    if (sys.overhauser) h += Eigen::MatrixXd(space_.electron_tensor(2.0 * sz, space_.nuclear_sum(space_.iz(), sys.A)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    free_vecs_ = eig.eigenvectors();
    free_vals_ = eig.eigenvalues();
  }

  const FullSpace& space() const { return space_; }

  /// exp(-i H_free t).
  Eigen::MatrixXcd free_propagator(double t) const {
    Eigen::VectorXcd ph(free_vals_.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, -free_vals_[i] * t);
    const Eigen::MatrixXcd v = free_vecs_.cast<cplx>();
    return v * ph.asDiagonal() * v.transpose();
  }

  /// exp(+i omega_Zn sum Iz t): removes the nuclear Larmor rotation.
  Eigen::VectorXcd to_rotating_frame(const Eigen::VectorXcd& psi, double t) const {
    Eigen::VectorXcd out = psi;
    for (Eigen::Index i = 0; i < psi.size(); ++i) out[i] *= std::polar(1.0, h0_(i, i) * t);
    return out;
  }

  /// Ideal electron rotation exp(-i angle S_axis) as a 2 x 2 matrix.
  static Eigen::Matrix2cd rotation(CycleStep::Kind axis, double angle) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    Eigen::Matrix2cd r;
    if (axis == CycleStep::Kind::rotate_x)
      r << c, cplx(0, -s), cplx(0, -s), c;
    else
      r << c, -s, s, c;
    return r;
  }

  Eigen::MatrixXcd electron_operator(const Eigen::Matrix2cd& e) const {
    const Eigen::Index D = space_.nuclear_dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(space_.dim(), space_.dim());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out.block(a * D, b * D, D, D).diagonal().setConstant(e(a, b));
    return out;
  }

  /// Unitary of one period 2 tau (two pulse cycles).
  Eigen::MatrixXcd period_unitary(double tau) const {
    const Eigen::MatrixXcd seg = free_propagator(tau / 4.0);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(space_.dim(), space_.dim());
    for (int rep = 0; rep < 2; ++rep)
      for (const auto& step : pulse_cycle()) {
        if (step.kind == CycleStep::Kind::free)
          u = seg * u;
        else
          u = electron_operator(rotation(step.kind, step.angle)) * u;
      }
    return u;
  }

 private:
  PulsedSystem sys_;
  FullSpace space_;
  Eigen::MatrixXd h0_;
  Eigen::MatrixXd free_vecs_;
  Eigen::VectorXd free_vals_;
};

/// Lab-frame state after n_periods periods of 2 tau, from psi0.
inline FullStateVector exact_pulsed_evolution(const PulsedOracle& oracle, const Eigen::VectorXcd& psi0,
                                              double tau, int n_periods) {
  if (n_periods < 0) throw Error("number of periods must be non-negative");
  const Eigen::MatrixXcd u = oracle.period_unitary(tau);
  Eigen::VectorXcd psi = psi0;
  for (int i = 0; i < n_periods; ++i) psi = u * psi;
  return {psi, oracle.space().sites(), oracle.space().spin()};
}

/// Electron toggling-frame coefficients: over the eight quarter-tau segments of one
/// period, R^dagger S_z R = h_x S_x + h_y S_y + h_z S_z with R the pulses applied so far.
struct TogglingFunctions {
  std::array<double, 8> hx{}, hy{}, hz{};
  Eigen::Matrix2cd net;  // product of all pulses over the period
};

inline TogglingFunctions toggling_functions() {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 0.5, 0.5, 0;
  sy << 0, cplx(0, -0.5), cplx(0, 0.5), 0;
  sz << 0.5, 0, 0, -0.5;
  TogglingFunctions f;
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Identity();
  int seg = 0;
  for (int rep = 0; rep < 2; ++rep)
    for (const auto& step : pulse_cycle()) {
      if (step.kind != CycleStep::Kind::free) {
        r = PulsedOracle::rotation(step.kind, step.angle) * r;
        continue;
      }
      const Eigen::Matrix2cd t = r.adjoint() * sz * r;
      f.hx[seg] = 2.0 * (sx * t).trace().real();
      f.hy[seg] = 2.0 * (sy * t).trace().real();
      f.hz[seg] = 2.0 * (sz * t).trace().real();
      ++seg;
    }
  f.net = r;
  return f;
}

/// Secular (period-averaged) coupling of the resonant mode in the toggling frame:
/// H_eff = A_zeta (Phi^+ (x) L + Phi^- (x) L^dagger) with L = sum_a c_a S_a and
/// c_a = (1/2tau) int h_a(t) exp(i zeta omega t) dt. L = A'|u><v| for a flip-flop.
struct SecularCoupling {
  Eigen::Matrix2cd L;           // per unit A_zeta
  double strength = 0.0;        // largest singular value of L (A'/A_zeta)
  double residual = 0.0;        // second singular value (0 for a pure flip-flop)
  Eigen::Matrix2cd frame;       // R with R|up> = v, R|down> = u
};

inline SecularCoupling secular_coupling(int zeta, double omega_Zn, double tau) {
  const auto h = toggling_functions();
  cplx cx = 0.0, cy = 0.0;
  const double w = zeta * omega_Zn;
  for (int q = 0; q < 8; ++q) {
    const double a = q * tau / 4.0, b = (q + 1) * tau / 4.0;
    const cplx integral = (std::polar(1.0, w * b) - std::polar(1.0, w * a)) / cplx(0.0, w);
    cx += h.hx[q] * integral / (2.0 * tau);
    cy += h.hy[q] * integral / (2.0 * tau);
  }
  Eigen::Matrix2cd sx, sy;
  sx << 0, 0.5, 0.5, 0;
  sy << 0, cplx(0, -0.5), cplx(0, 0.5), 0;
  SecularCoupling s;
  s.L = cx * sx + cy * sy;
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(s.L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.strength = svd.singularValues()[0];
  s.residual = svd.singularValues()[1];
  const Eigen::Vector2cd u = svd.matrixU().col(0), v = svd.matrixV().col(0);
  s.frame.col(0) = v;
  s.frame.col(1) = u;
  return s;
}

struct FloquetReport {
  double overlap = 0.0;             // |<pulsed|effective>| at the final stroboscopic time
  double min_overlap = 1.0;         // over all stroboscopic times
  double excitation = 0.0;          // final |change of sum Iz| / zeta
  double max_excitation = 0.0;
  double coupling_ratio = 0.0;      // secular strength / ((2+sqrt2)/(3pi))
  int periods = 0;
  double time = 0.0;
};

/// Runs the pulsed oracle from R (alpha|up> + beta|down>)|M>, where R is the frame of
/// the secular coupling, and compares with R exp(-i H_std t)(alpha|up>+beta|down>)|M>
/// (H_std = A'(Phi^+ S^- + h.c.)) at every period, after removing the Larmor rotation.
inline FloquetReport floquet_report(const PulsedSystem& sys, int zeta, double tau, int n_periods,
                                    cplx alpha = 1.0, cplx beta = 0.0) {
  const PulsedOracle oracle(sys);
  const auto& space = oracle.space();
  const int n = space.sites();
  HyperfineBath bath;
  double total = 0.0;
  for (double x : sys.A) total += x;
  bath.a = sys.A;
  for (double& x : bath.a) x /= total;
  QuadrupoleField field;
  field.B_Q = sys.B_Q;
  field.theta = sys.theta;
  const auto mode = mode_couplings(bath, total, sys.omega_Zn, zeta, field);
  auto sec = secular_coupling(zeta, sys.omega_Zn, tau);
  if (mode.A_zeta < 0) sec.frame.col(1) *= -1.0;
  const SparseMatrix hstd = effective_hamiltonian(space, mode);
  const Eigen::MatrixXcd frame = oracle.electron_operator(sec.frame);
  const Eigen::VectorXcd chi0 = space.product_state(alpha, beta, sys.M.m);
  const Eigen::VectorXcd psi0 = frame * chi0;
  const Eigen::MatrixXcd u = oracle.period_unitary(tau);
  std::vector<double> ones(n, 1.0);
  const Eigen::MatrixXd iz_total = Eigen::MatrixXd(space.electron_tensor(Eigen::Matrix2d::Identity(),
                                                                          space.nuclear_sum(space.iz(), ones)));
  const double mz0 = (psi0.adjoint() * iz_total * psi0)(0, 0).real();
  FloquetReport r;
  r.periods = n_periods;
  r.coupling_ratio = sec.strength / ((2.0 + std::sqrt(2.0)) / (3.0 * pi));
  Eigen::VectorXcd psi = psi0;
  for (int p = 1; p <= n_periods; ++p) {
    psi = u * psi;
    const double t = 2.0 * tau * p;
    const Eigen::VectorXcd pulsed = oracle.to_rotating_frame(psi, t);
    const Eigen::VectorXcd effective = frame * sparse_evolve(hstd, chi0, t);
    r.overlap = std::abs(effective.dot(pulsed));
    r.min_overlap = std::min(r.min_overlap, r.overlap);
    r.excitation = std::abs((psi.adjoint() * iz_total * psi)(0, 0).real() - mz0) / zeta;
    r.max_excitation = std::max(r.max_excitation, r.excitation);
    r.time = t;
  }
  return r;
}

}  // namespace spinmem
