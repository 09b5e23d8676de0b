#pragma once

// Truncated multimode Fock-space state vectors and the gates that act on them.
//
// A state of M modes with per-mode cutoff D lives in a (D+1)^M dimensional
// space. Basis indices are row-major in the occupations: mode 0 is the most
// significant digit, so |n_0, ..., n_{M-1}> sits at sum_k n_k (D+1)^{M-1-k}.

#include "cvqft/errors.hpp"
#include "cvqft/gates.hpp"
#include "cvqft/lattice.hpp"
#include "cvqft/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace cvqft {

/// Upper bound on the number of stored amplitudes (16.7M, about 270 MB).
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 24;
inline constexpr std::size_t kDefaultPad = 4;
inline constexpr double kDefaultPhaseGuard = 10.0;

/// (D+1)^M, or throws MemoryGuard if it exceeds `limit`.
inline std::size_t fock_dimension(std::size_t modes, std::size_t cutoff, std::size_t limit = kMaxAmplitudes) {
  std::size_t dim = 1;
  for (std::size_t k = 0; k < modes; ++k) {
    if (dim > limit / (cutoff + 1)) {
      throw MemoryGuard(std::to_string(modes) + " modes at cutoff " + std::to_string(cutoff) +
                        " exceed the limit of " + std::to_string(limit) + " amplitudes");
    }
    dim *= cutoff + 1;
  }
  return dim;
}

struct FockState {
  std::size_t mode_count = 0;
  std::size_t cutoff = 0;
  ComplexVector amplitudes;
  /// Probability discarded by non-unitary truncated operations so far.
  double leakage = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
  std::size_t levels() const { return cutoff + 1; }

  std::size_t stride(std::size_t mode) const {
    std::size_t s = 1;
    for (std::size_t k = mode + 1; k < mode_count; ++k) s *= levels();
    return s;
  }

  std::vector<int> occupation(std::size_t index) const {
    std::vector<int> occ(mode_count);
    for (std::size_t k = mode_count; k-- > 0;) {
      occ[k] = static_cast<int>(index % levels());
      index /= levels();
    }
    return occ;
  }

  std::size_t index_of(const std::vector<int>& occ) const {
    if (occ.size() != mode_count) throw ShapeMismatch("occupation vector has the wrong length");
    std::size_t idx = 0;
    for (int n : occ) {
      if (n < 0 || static_cast<std::size_t>(n) > cutoff) {
        throw ValidationError("occupation " + std::to_string(n) + " outside [0, " + std::to_string(cutoff) + "]");
      }
      idx = idx * levels() + static_cast<std::size_t>(n);
    }
    return idx;
  }

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

inline FockState basis_state(std::size_t modes, std::size_t cutoff, const std::vector<int>& occ) {
  FockState s;
  s.mode_count = modes;
  s.cutoff = cutoff;
  s.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(fock_dimension(modes, cutoff)));
  s.amplitudes(static_cast<Eigen::Index>(s.index_of(occ))) = 1.0;
  return s;
}

inline FockState vacuum(std::size_t modes, std::size_t cutoff) {
  return basis_state(modes, cutoff, std::vector<int>(modes, 0));
}

/// Ladder and quadrature matrices on a padded single-mode space of
/// D + 1 + pad levels. Products are formed here and then cut back to the
/// physical D + 1 levels, so boundary effects stay in the padding.
class QuadratureOps {
 public:
  explicit QuadratureOps(std::size_t cutoff, std::size_t pad = kDefaultPad)
      : cutoff_(cutoff), pad_(pad) {
    const auto n = static_cast<Eigen::Index>(cutoff + 1 + pad);
    ladder_ = RealMatrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) ladder_(k - 1, k) = std::sqrt(static_cast<double>(k));
    q_ = (ladder_ + ladder_.transpose()).cast<cplx>() / std::numbers::sqrt2;
    p_ = (ladder_ - ladder_.transpose()).cast<cplx>() / (kI * std::numbers::sqrt2);
  }

  std::size_t cutoff() const { return cutoff_; }
  std::size_t pad() const { return pad_; }
  std::size_t padded_levels() const { return cutoff_ + 1 + pad_; }

  const RealMatrix& ladder() const { return ladder_; }
  const ComplexMatrix& q_matrix() const { return q_; }
  const ComplexMatrix& p_matrix() const { return p_; }

  ComplexMatrix truncate(const ComplexMatrix& padded) const {
    const auto d = static_cast<Eigen::Index>(cutoff_ + 1);
    return padded.topLeftCorner(d, d);
  }

  ComplexMatrix q_truncated() const { return truncate(q_); }
  ComplexMatrix q2_truncated() const { return truncate(q_ * q_); }
  ComplexMatrix p2_truncated() const { return truncate(p_ * p_); }
  ComplexMatrix q4_truncated() const {
    const ComplexMatrix q2 = q_ * q_;
    return truncate(q2 * q2);
  }

  /// max-abs of [Q, P] - i I over the rows and columns not touched by the
  /// boundary of the padded space.
  double interior_commutator_residual() const {
    const ComplexMatrix c = q_ * p_ - p_ * q_;
    const auto n = c.rows() - 1;
    return (c.topLeftCorner(n, n) - kI * ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  }

  /// Top-left block of exp(r (A^dagger^2 - A^2) / 2) computed on the padded space.
  ComplexMatrix squeeze_block(double r) const {
    const RealMatrix a2 = ladder_ * ladder_;
    const RealMatrix gen = 0.5 * r * (a2.transpose() - a2);
    // gen is real antisymmetric, i gen is Hermitian: exp(gen) = exp(-i (i gen)).
    const ComplexMatrix herm = kI * gen.cast<cplx>();
    return truncate(expi_hermitian(herm, -1.0));
  }

 private:
  std::size_t cutoff_;
  std::size_t pad_;
  RealMatrix ladder_;
  ComplexMatrix q_;
  ComplexMatrix p_;
};

namespace detail {

inline void check_mode(const FockState& s, std::size_t mode) {
  if (mode >= s.mode_count) {
    throw ValidationError("mode " + std::to_string(mode) + " out of range for " + std::to_string(s.mode_count) +
                          " modes");
  }
}

/// Indices whose digits for every mode in `modes` are zero.
inline std::vector<std::size_t> base_indices(const FockState& s, const std::vector<std::size_t>& modes) {
  std::vector<std::size_t> strides;
  for (std::size_t m : modes) strides.push_back(s.stride(m));
  std::vector<std::size_t> out;
  out.reserve(s.dimension());
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    bool zero = true;
    for (std::size_t st : strides) {
      if ((idx / st) % s.levels() != 0) {
        zero = false;
        break;
      }
    }
    if (zero) out.push_back(idx);
  }
  return out;
}

/// Applies `op` (acting on the local occupation index) to every fibre of
/// the state along `modes`. Local index is row-major in `modes`.
inline void apply_local(FockState& s, const std::vector<std::size_t>& modes, const ComplexMatrix& op) {
  for (std::size_t m : modes) check_mode(s, m);
  std::size_t local = 1;
  for (std::size_t k = 0; k < modes.size(); ++k) local *= s.levels();
  if (static_cast<std::size_t>(op.rows()) != local || static_cast<std::size_t>(op.cols()) != local) {
    throw ShapeMismatch("local operator has size " + std::to_string(op.rows()) + ", expected " +
                        std::to_string(local));
  }
  std::vector<std::size_t> offsets(local, 0);
  for (std::size_t l = 0; l < local; ++l) {
    std::size_t rem = l;
    std::size_t off = 0;
    for (std::size_t k = modes.size(); k-- > 0;) {
      off += (rem % s.levels()) * s.stride(modes[k]);
      rem /= s.levels();
    }
    offsets[l] = off;
  }
  const auto bases = base_indices(s, modes);
  ComplexMatrix block(static_cast<Eigen::Index>(local), static_cast<Eigen::Index>(bases.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t l = 0; l < local; ++l) {
      block(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b)) =
          s.amplitudes(static_cast<Eigen::Index>(bases[b] + offsets[l]));
    }
  }
  const ComplexMatrix result = op * block;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t l = 0; l < local; ++l) {
      s.amplitudes(static_cast<Eigen::Index>(bases[b] + offsets[l])) =
          result(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b));
    }
  }
}

/// Number-conserving two-mode unitary exp(sum_ab G_ab A_a^dagger A_b) for a
/// 2x2 anti-Hermitian G, restricted to the (D+1)^2 box. The exponential is
/// exact inside each sector of fixed a + b (up to 2D); only the part of a
/// sector that leaves the box is dropped, so sectors with a + b <= D are
/// mapped exactly unitarily.
inline ComplexMatrix passive_two_mode_unitary(const Eigen::Matrix2cd& g, std::size_t cutoff) {
  const auto lv = static_cast<Eigen::Index>(cutoff + 1);
  ComplexMatrix out = ComplexMatrix::Zero(lv * lv, lv * lv);
  for (Eigen::Index total = 0; total <= 2 * (lv - 1); ++total) {
    // sector basis |a, total - a>, a = 0..total
    const Eigen::Index n = total + 1;
    ComplexMatrix gen = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a <= total; ++a) {
      const Eigen::Index b = total - a;
      gen(a, a) = g(0, 0) * static_cast<double>(a) + g(1, 1) * static_cast<double>(b);
      // A_0^dagger A_1 : (a, b) -> (a + 1, b - 1)
      if (b > 0) gen(a + 1, a) += g(0, 1) * std::sqrt(static_cast<double>((a + 1) * b));
      // A_1^dagger A_0 : (a, b) -> (a - 1, b + 1)
      if (a > 0) gen(a - 1, a) += g(1, 0) * std::sqrt(static_cast<double>(a * (b + 1)));
    }
    // exp(gen) with gen anti-Hermitian: exp(i H) for H = -i gen.
    const ComplexMatrix herm = -kI * gen;
    const ComplexMatrix u = expi_hermitian(0.5 * (herm + herm.adjoint()), 1.0);
    const Eigen::Index lo = std::max<Eigen::Index>(0, total - (lv - 1));
    const Eigen::Index hi = std::min<Eigen::Index>(total, lv - 1);
    for (Eigen::Index a = lo; a <= hi; ++a) {
      for (Eigen::Index ap = lo; ap <= hi; ++ap) {
        out(ap * lv + (total - ap), a * lv + (total - a)) = u(ap, a);
      }
    }
  }
  return out;
}

inline ComplexMatrix swap_matrix(std::size_t cutoff) {
  const auto lv = static_cast<Eigen::Index>(cutoff + 1);
  ComplexMatrix p = ComplexMatrix::Zero(lv * lv, lv * lv);
  for (Eigen::Index a = 0; a < lv; ++a)
    for (Eigen::Index b = 0; b < lv; ++b) p(b * lv + a, a * lv + b) = 1.0;
  return p;
}

inline void apply_nonunitary_local(FockState& s, std::size_t mode, const ComplexMatrix& op) {
  const double before = s.norm_squared();
  apply_local(s, {mode}, op);
  const double lost = before - s.norm_squared();
  if (lost > 0.0) s.leakage += lost;
}

}  // namespace detail

/// Applies the unitary of one Gaussian gate, or its inverse when `adjoint`.
///
/// Phase shifts and swaps are exact. Rotations and pair mixers are exact on
/// every two-mode sector with a + b <= D and drop the amplitude that higher
/// sectors would push past the cutoff. Squeezers are exponentiated on the
/// padded single-mode space and cut back to D + 1 levels. Lost norm is added
/// to leakage in both cases.
inline void apply_gate(FockState& s, const GaussianGate& gate, bool adjoint = false, std::size_t pad = kDefaultPad) {
  validate_gate(gate, s.mode_count);
  const double sign = adjoint ? -1.0 : 1.0;
  if (const auto* sq = std::get_if<Squeeze>(&gate)) {
    if (sq->r == 0.0) return;
    detail::apply_nonunitary_local(s, sq->mode, QuadratureOps(s.cutoff, pad).squeeze_block(sign * sq->r));
    return;
  }
  if (const auto* ph = std::get_if<PhaseShift>(&gate)) {
    ComplexMatrix d = ComplexMatrix::Zero(static_cast<Eigen::Index>(s.levels()), static_cast<Eigen::Index>(s.levels()));
    for (std::size_t n = 0; n < s.levels(); ++n) {
      d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) =
          std::polar(1.0, sign * ph->phi * static_cast<double>(n));
    }
    detail::apply_local(s, {ph->mode}, d);
    return;
  }
  if (const auto* sw = std::get_if<Swap>(&gate)) {
    detail::apply_local(s, {sw->i, sw->j}, detail::swap_matrix(s.cutoff));
    return;
  }
  Eigen::Matrix2cd g;
  std::size_t i = 0, j = 0;
  if (const auto* r = std::get_if<TwoModeRotation>(&gate)) {
    g << 0.0, r->theta, -r->theta, 0.0;
    i = r->i;
    j = r->j;
  } else {
    const auto& pm = std::get<PairMix>(gate);
    const double phi = std::numbers::pi / 4.0;
    g << 0.0, kI * phi, kI * phi, 0.0;
    i = pm.i;
    j = pm.j;
  }
  const double before = s.norm_squared();
  detail::apply_local(s, {i, j}, detail::passive_two_mode_unitary(sign * g, s.cutoff));
  const double lost = before - s.norm_squared();
  if (lost > 0.0) s.leakage += lost;
}

/// U |psi>, gates[0] first.
inline void apply_circuit(FockState& s, const GaussianCircuit& c, std::size_t pad = kDefaultPad) {
  if (c.mode_count != s.mode_count) throw ShapeMismatch("circuit and state have different mode counts");
  for (const auto& g : c.gates) apply_gate(s, g, false, pad);
}

/// U^dagger |psi>: daggered gates in reverse order.
inline void apply_circuit_adjoint(FockState& s, const GaussianCircuit& c, std::size_t pad = kDefaultPad) {
  if (c.mode_count != s.mode_count) throw ShapeMismatch("circuit and state have different mode counts");
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) apply_gate(s, *it, true, pad);
}

inline void check_phase_guard(double gamma, std::size_t cutoff, double guard) {
  const double d = static_cast<double>(cutoff);
  if (!(std::abs(gamma) * d * d < guard)) {
    throw PhaseGuard("|gamma| D^2 = " + std::to_string(std::abs(gamma) * d * d) + " is not below " +
                     std::to_string(guard));
  }
}

/// exp(i gamma Q^4) on one mode, with Q^4 truncated before exponentiation.
inline void apply_quartic_phase(FockState& s, std::size_t mode, double gamma, double guard = kDefaultPhaseGuard,
                                std::size_t pad = kDefaultPad) {
  detail::check_mode(s, mode);
  check_phase_guard(gamma, s.cutoff, guard);
  if (gamma == 0.0) return;
  detail::apply_local(s, {mode}, expi_hermitian(QuadratureOps(s.cutoff, pad).q4_truncated(), gamma));
}

/// exp(i dt (delta_m / 2) sum_n Q_n^2).
inline void apply_counterterm(FockState& s, double delta_m, double dt, std::size_t pad = kDefaultPad) {
  if (delta_m == 0.0 || dt == 0.0) return;
  const ComplexMatrix u = expi_hermitian(QuadratureOps(s.cutoff, pad).q2_truncated(), dt * delta_m / 2.0);
  for (std::size_t m = 0; m < s.mode_count; ++m) detail::apply_local(s, {m}, u);
}

/// Single-mode generator lambda/24 Q^4 + delta_m/2 Q^2 of the interaction
/// plus counter-term, truncated to D + 1 levels.
inline ComplexMatrix local_potential(std::size_t cutoff, double lambda, double delta_m, std::size_t pad = kDefaultPad) {
  const QuadratureOps ops(cutoff, pad);
  return (lambda / 24.0) * ops.q4_truncated() + (delta_m / 2.0) * ops.q2_truncated();
}

/// exp(i dt (H_int + H_ct)) = prod_n exp(i dt (lambda/24 Q_n^4 + delta_m/2 Q_n^2)).
inline void apply_local_potential(FockState& s, double lambda, double delta_m, double dt,
                                  double guard = kDefaultPhaseGuard, std::size_t pad = kDefaultPad) {
  check_phase_guard(dt * lambda / 24.0, s.cutoff, guard);
  if (dt == 0.0 || (lambda == 0.0 && delta_m == 0.0)) return;
  const ComplexMatrix u = expi_hermitian(local_potential(s.cutoff, lambda, delta_m, pad), dt);
  for (std::size_t m = 0; m < s.mode_count; ++m) detail::apply_local(s, {m}, u);
}

/// A_mode^dagger |psi>, renormalized.
inline void create_single_photon(FockState& s, std::size_t mode) {
  detail::check_mode(s, mode);
  const std::size_t st = s.stride(mode);
  const auto lv = s.levels();
  double top = 0.0;
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    if ((idx / st) % lv == s.cutoff) top = std::max(top, std::abs(s.amplitudes(static_cast<Eigen::Index>(idx))));
  }
  if (top > 1e-6) {
    throw CutoffSaturated("mode " + std::to_string(mode) + " has amplitude " + std::to_string(top) +
                          " at the cutoff level");
  }
  ComplexMatrix raise = ComplexMatrix::Zero(static_cast<Eigen::Index>(lv), static_cast<Eigen::Index>(lv));
  for (std::size_t n = 1; n < lv; ++n) {
    raise(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n - 1)) = std::sqrt(static_cast<double>(n));
  }
  detail::apply_local(s, {mode}, raise);
  const double norm = s.amplitudes.norm();
  if (norm == 0.0) throw CutoffSaturated("raising produced the zero vector");
  s.amplitudes /= norm;
}

/// Copy of the state in a larger cutoff, zero padded.
inline FockState embed(const FockState& s, std::size_t new_cutoff) {
  if (new_cutoff < s.cutoff) throw ValidationError("embed: new cutoff below the current one");
  FockState out;
  out.mode_count = s.mode_count;
  out.cutoff = new_cutoff;
  out.leakage = s.leakage;
  out.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(fock_dimension(s.mode_count, new_cutoff)));
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    out.amplitudes(static_cast<Eigen::Index>(out.index_of(s.occupation(idx)))) =
        s.amplitudes(static_cast<Eigen::Index>(idx));
  }
  return out;
}

inline cplx inner_product(const FockState& a, const FockState& b) {
  if (a.mode_count != b.mode_count || a.cutoff != b.cutoff) {
    throw ShapeMismatch("states differ in mode count or cutoff");
  }
  return a.amplitudes.dot(b.amplitudes);
}

struct OccupationProbability {
  std::vector<int> occupation;
  double probability;
};

/// |amplitude|^2 for every basis vector with probability >= `threshold`.
inline std::vector<OccupationProbability> number_distribution(const FockState& s, double threshold = 0.0) {
  std::vector<OccupationProbability> out;
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    const double p = std::norm(s.amplitudes(static_cast<Eigen::Index>(idx)));
    if (p >= threshold) out.push_back({s.occupation(idx), p});
  }
  return out;
}

// Exact moments. The state is embedded one level higher so that a single
// A^dagger acts without truncation.

namespace detail {

/// A_mode v (lowering) or A_mode^dagger v (raising) on a state of cutoff D
/// whose top level is empty; exact.
inline ComplexVector ladder_apply(const FockState& s, std::size_t mode, bool raise) {
  FockState t = s;
  ComplexMatrix op = ComplexMatrix::Zero(static_cast<Eigen::Index>(s.levels()), static_cast<Eigen::Index>(s.levels()));
  for (std::size_t n = 1; n < s.levels(); ++n) {
    const double v = std::sqrt(static_cast<double>(n));
    if (raise) op(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n - 1)) = v;
    else op(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = v;
  }
  apply_local(t, {mode}, op);
  return t.amplitudes;
}

}  // namespace detail

/// <psi| a_k^dagger a_k |psi> / <psi|psi> for a_k = sum_n alpha_kn A_n + beta_kn A_n^dagger.
inline RealVector bogoliubov_occupations(const FockState& s, const BogoliubovTransform& t) {
  if (static_cast<std::size_t>(t.alpha.rows()) != s.mode_count) throw ShapeMismatch("transform size");
  const FockState e = embed(s, s.cutoff + 1);
  const double norm2 = e.norm_squared();
  std::vector<ComplexVector> lower, upper;
  for (std::size_t n = 0; n < s.mode_count; ++n) {
    lower.push_back(detail::ladder_apply(e, n, false));
    upper.push_back(detail::ladder_apply(e, n, true));
  }
  RealVector occ(t.alpha.rows());
  for (Eigen::Index k = 0; k < t.alpha.rows(); ++k) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(e.dimension()));
    for (std::size_t n = 0; n < s.mode_count; ++n) {
      v += t.alpha(k, static_cast<Eigen::Index>(n)) * lower[n] + t.beta(k, static_cast<Eigen::Index>(n)) * upper[n];
    }
    occ(k) = v.squaredNorm() / norm2;
  }
  return occ;
}

/// <psi| H0 |psi> / <psi|psi> with untruncated ladder operators.
inline double free_energy_expectation(const FockState& s, const LatticeSpec& spec, bool subtract_vacuum_energy = false) {
  if (spec.mode_count() != s.mode_count) throw ShapeMismatch("lattice and state have different mode counts");
  const RealMatrix v = build_coupling_matrix(spec);
  const FockState e = embed(s, s.cutoff + 1);
  const double norm2 = e.norm_squared();
  std::vector<ComplexVector> q, p;
  for (std::size_t n = 0; n < s.mode_count; ++n) {
    const ComplexVector lo = detail::ladder_apply(e, n, false);
    const ComplexVector up = detail::ladder_apply(e, n, true);
    q.push_back((lo + up) / std::numbers::sqrt2);
    p.push_back((lo - up) / (kI * std::numbers::sqrt2));
  }
  double energy = 0.0;
  for (std::size_t n = 0; n < s.mode_count; ++n) {
    energy += 0.5 * p[n].squaredNorm();
    for (std::size_t m = 0; m < s.mode_count; ++m) {
      const double vnm = v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      if (vnm != 0.0) energy += 0.5 * vnm * q[n].dot(q[m]).real();
    }
  }
  energy /= norm2;
  if (subtract_vacuum_energy) energy -= 0.5 * dispersion_omegas(spec).sum();
  return energy;
}

/// Dimension at or below which free evolution uses a dense eigendecomposition.
inline constexpr std::size_t kDenseEvolutionLimit = 2000;

/// Truncated H0 = sum_n (P_n^2 + V_nn Q_n^2) / 2 + sum_{n<m} V_nm Q_n Q_m, as
/// a real symmetric sparse matrix on (D+1)^M, with its exponential.
class FreeHamiltonian {
 public:
  FreeHamiltonian(const LatticeSpec& spec, std::size_t cutoff, bool subtract_vacuum_energy = false,
                  std::size_t pad = kDefaultPad)
      : modes_(spec.mode_count()), cutoff_(cutoff) {
    const RealMatrix v = build_coupling_matrix(spec);
    const std::size_t dim = fock_dimension(modes_, cutoff_);
    const QuadratureOps ops(cutoff_, pad);
    const RealMatrix q = ops.q_truncated().real();
    const RealMatrix q2 = ops.q2_truncated().real();
    const RealMatrix p2 = ops.p2_truncated().real();
    const double shift = subtract_vacuum_energy ? 0.5 * dispersion_omegas(spec).sum() : 0.0;

    FockState probe;
    probe.mode_count = modes_;
    probe.cutoff = cutoff_;
    std::vector<std::size_t> strides(modes_);
    for (std::size_t k = 0; k < modes_; ++k) strides[k] = probe.stride(k);
    const auto lv = static_cast<Eigen::Index>(cutoff_ + 1);

    std::vector<Eigen::Triplet<double, Eigen::Index>> trip;
    for (std::size_t ucol = 0; ucol < dim; ++ucol) {
      const auto col = static_cast<Eigen::Index>(ucol);
      const auto occ = probe.occupation(ucol);
      if (shift != 0.0) trip.emplace_back(col, col, -shift);
      for (std::size_t n = 0; n < modes_; ++n) {
        const Eigen::Index c = occ[n];
        const double vnn = v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index r = 0; r < lv; ++r) {
          const double val = 0.5 * (p2(r, c) + vnn * q2(r, c));
          if (val != 0.0) trip.emplace_back(col + (r - c) * static_cast<Eigen::Index>(strides[n]), col, val);
        }
        for (std::size_t m = n + 1; m < modes_; ++m) {
          const double vnm = v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
          if (vnm == 0.0) continue;
          const Eigen::Index cm = occ[m];
          for (Eigen::Index rn : {c - 1, c + 1}) {
            if (rn < 0 || rn >= lv) continue;
            for (Eigen::Index rm : {cm - 1, cm + 1}) {
              if (rm < 0 || rm >= lv) continue;
              const double val = vnm * q(rn, c) * q(rm, cm);
              const Eigen::Index row = col + (rn - c) * static_cast<Eigen::Index>(strides[n]) +
                                       (rm - cm) * static_cast<Eigen::Index>(strides[m]);
              trip.emplace_back(row, col, val);
            }
          }
        }
      }
    }
    matrix_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    matrix_.setFromTriplets(trip.begin(), trip.end());
    complex_ = matrix_.cast<cplx>();
  }

  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return matrix_; }
  const SparseComplex& complex_matrix() const { return complex_; }

  RealMatrix dense() const { return RealMatrix(matrix_); }

  /// |psi> -> exp(-i t H0) |psi>.
  void evolve(FockState& s, double t) const {
    if (s.mode_count != modes_ || s.cutoff != cutoff_) throw ShapeMismatch("state does not match the Hamiltonian");
    if (t == 0.0) return;
    if (dimension() <= kDenseEvolutionLimit) {
      if (!eig_) eig_ = std::make_shared<Eigen::SelfAdjointEigenSolver<RealMatrix>>(dense());
      const RealMatrix& vecs = eig_->eigenvectors();
      ComplexVector coeff = vecs.transpose().cast<cplx>() * s.amplitudes;
      for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::exp(-kI * (t * eig_->eigenvalues()(k)));
      s.amplitudes = vecs.cast<cplx>() * coeff;
    } else {
      s.amplitudes = expi_apply(complex_, -t, s.amplitudes);
    }
  }

 private:
  std::size_t modes_;
  std::size_t cutoff_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
  SparseComplex complex_;
  mutable std::shared_ptr<Eigen::SelfAdjointEigenSolver<RealMatrix>> eig_;
};

/// exp(-i t H0) |psi>.
inline void apply_free_evolution(FockState& s, const LatticeSpec& spec, double t, bool subtract_vacuum_energy = false) {
  if (spec.mode_count() != s.mode_count) throw ShapeMismatch("lattice and state have different mode counts");
  FreeHamiltonian(spec, s.cutoff, subtract_vacuum_energy).evolve(s, t);
}

}  // namespace cvqft
