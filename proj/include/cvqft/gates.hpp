#pragma once

// Gaussian gate set and the Bogoliubov (alpha, beta) pair it acts through.
//
// Every gate G is described by its Heisenberg action G^dagger A G on the
// mode operators. A circuit applies gates[0] first; its composed action is
// a = M_last ... M_first (A, A^dagger).

#include "cvqft/errors.hpp"
#include "cvqft/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace cvqft {

/// A_i -> cos(theta) A_i + sin(theta) A_j, A_j -> -sin(theta) A_i + cos(theta) A_j.
struct TwoModeRotation {
  std::size_t i;
  std::size_t j;
  double theta;
};

/// Mode relabelling i <-> j.
struct Swap {
  std::size_t i;
  std::size_t j;
};

/// A -> cosh(r) A + sinh(r) A^dagger; unitary exp(r (A^dagger^2 - A^2) / 2).
struct Squeeze {
  std::size_t mode;
  double r;
};

/// A_i -> (A_i + i A_j) / sqrt 2, A_j -> (i A_i + A_j) / sqrt 2.
struct PairMix {
  std::size_t i;
  std::size_t j;
};

/// A -> exp(i phi) A; unitary exp(i phi A^dagger A).
struct PhaseShift {
  std::size_t mode;
  double phi;
};

using GaussianGate = std::variant<TwoModeRotation, Swap, Squeeze, PairMix, PhaseShift>;

inline std::string gate_name(const GaussianGate& g) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TwoModeRotation>) return "rot";
        else if constexpr (std::is_same_v<T, Swap>) return "swap";
        else if constexpr (std::is_same_v<T, Squeeze>) return "squeeze";
        else if constexpr (std::is_same_v<T, PairMix>) return "pairmix";
        else return "phase";
      },
      g);
}

inline std::vector<std::size_t> gate_modes(const GaussianGate& g) {
  return std::visit(
      [](const auto& x) -> std::vector<std::size_t> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Squeeze> || std::is_same_v<T, PhaseShift>) return {x.mode};
        else return {x.i, x.j};
      },
      g);
}

inline bool is_two_mode(const GaussianGate& g) { return gate_modes(g).size() == 2; }

inline void validate_gate(const GaussianGate& g, std::size_t mode_count) {
  const auto modes = gate_modes(g);
  for (std::size_t m : modes) {
    if (m >= mode_count) {
      throw ValidationError(gate_name(g) + ": mode index " + std::to_string(m) + " out of range for " +
                            std::to_string(mode_count) + " modes");
    }
  }
  if (modes.size() == 2 && modes[0] == modes[1]) {
    throw ValidationError(gate_name(g) + ": two-mode gate needs distinct modes");
  }
}

/// 2x2 passive mode map u of a two-mode number-conserving gate:
/// (A_i, A_j)^T -> u (A_i, A_j)^T.
inline Eigen::Matrix2cd passive_block(const GaussianGate& g) {
  Eigen::Matrix2cd u;
  if (const auto* r = std::get_if<TwoModeRotation>(&g)) {
    const double c = std::cos(r->theta), s = std::sin(r->theta);
    u << c, s, -s, c;
  } else if (std::holds_alternative<Swap>(g)) {
    u << 0, 1, 1, 0;
  } else if (std::holds_alternative<PairMix>(g)) {
    const double h = 1.0 / std::numbers::sqrt2;
    u << cplx(h, 0), cplx(0, h), cplx(0, h), cplx(h, 0);
  } else {
    throw ValidationError("passive_block: not a two-mode gate");
  }
  return u;
}

struct GaussianCircuit {
  std::size_t mode_count = 0;
  std::vector<GaussianGate> gates;

  void validate() const {
    for (const auto& g : gates) validate_gate(g, mode_count);
  }
};

/// a = alpha A + beta A^dagger.
struct BogoliubovTransform {
  ComplexMatrix alpha;
  ComplexMatrix beta;

  static BogoliubovTransform identity(std::size_t m) {
    const auto n = static_cast<Eigen::Index>(m);
    return {ComplexMatrix::Identity(n, n), ComplexMatrix::Zero(n, n)};
  }

  /// max-abs residual of alpha alpha^dagger - beta beta^dagger = I.
  double commutator_residual() const {
    const auto n = alpha.rows();
    return (alpha * alpha.adjoint() - beta * beta.adjoint() - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  }

  /// max-abs residual of alpha beta^T being symmetric.
  double symmetry_residual() const {
    const ComplexMatrix ab = alpha * beta.transpose();
    return (ab - ab.transpose()).cwiseAbs().maxCoeff();
  }
};

inline double max_abs_difference(const BogoliubovTransform& x, const BogoliubovTransform& y) {
  return std::max((x.alpha - y.alpha).cwiseAbs().maxCoeff(), (x.beta - y.beta).cwiseAbs().maxCoeff());
}

/// Left-multiply the pair by one gate's action (local row operations).
inline void apply_gate_action(BogoliubovTransform& t, const GaussianGate& g) {
  if (const auto* sq = std::get_if<Squeeze>(&g)) {
    const auto k = static_cast<Eigen::Index>(sq->mode);
    const double c = std::cosh(sq->r), s = std::sinh(sq->r);
    // new a_k = c a_k + s a_k^dagger
    const ComplexVector a = t.alpha.row(k).transpose();
    const ComplexVector b = t.beta.row(k).transpose();
    t.alpha.row(k) = (c * a + s * b.conjugate()).transpose();
    t.beta.row(k) = (c * b + s * a.conjugate()).transpose();
    return;
  }
  if (const auto* ph = std::get_if<PhaseShift>(&g)) {
    const auto k = static_cast<Eigen::Index>(ph->mode);
    const cplx z = std::polar(1.0, ph->phi);
    t.alpha.row(k) *= z;
    t.beta.row(k) *= z;
    return;
  }
  const auto modes = gate_modes(g);
  const auto i = static_cast<Eigen::Index>(modes[0]);
  const auto j = static_cast<Eigen::Index>(modes[1]);
  const Eigen::Matrix2cd u = passive_block(g);
  for (ComplexMatrix* m : {&t.alpha, &t.beta}) {
    const Eigen::RowVectorXcd ri = m->row(i);
    const Eigen::RowVectorXcd rj = m->row(j);
    m->row(i) = u(0, 0) * ri + u(0, 1) * rj;
    m->row(j) = u(1, 0) * ri + u(1, 1) * rj;
  }
}

inline BogoliubovTransform circuit_to_bogoliubov(const GaussianCircuit& circuit) {
  circuit.validate();
  auto t = BogoliubovTransform::identity(circuit.mode_count);
  for (const auto& g : circuit.gates) apply_gate_action(t, g);
  return t;
}

}  // namespace cvqft
