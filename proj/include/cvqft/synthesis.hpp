#pragma once

// Ground-state preparation circuit for the free lattice field.
//
// The target a_k = U^dagger A_k U diagonalizes H0. It is reached in three
// stages of two-mode or single-mode gates:
//   1. a real rotation A' = O A onto the cos/sin normal modes (Givens chain),
//   2. a pi/2 phase on each sine mode, then one squeezer per mode
//      (e^{2 r} = omega for cosine and self-conjugate modes,
//       e^{-2 r} = omega for sine modes),
//   3. a -pi/4 rotation on each (k, -k) pair to recover plane waves.

#include "cvqft/errors.hpp"
#include "cvqft/gates.hpp"
#include "cvqft/lattice.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace cvqft {

/// alpha = (sqrt(Omega) + sqrt(Omega)^{-1}) e^dagger / 2,
/// beta  = (sqrt(Omega) - sqrt(Omega)^{-1}) e^dagger / 2.
inline BogoliubovTransform target_bogoliubov(const DispersionData& disp) {
  const ComplexMatrix ed = disp.plane_wave_basis.adjoint();
  const RealVector root = disp.omegas.array().sqrt();
  const RealVector c = 0.5 * (root.array() + root.array().inverse());
  const RealVector s = 0.5 * (root.array() - root.array().inverse());
  return {c.cast<cplx>().asDiagonal() * ed, s.cast<cplx>().asDiagonal() * ed};
}

/// Decomposes a real orthogonal O into rotations followed by PhaseShift(k, pi)
/// sign flips, such that composing the gates in order gives A -> O A.
inline std::vector<GaussianGate> givens_decompose(const RealMatrix& o, double tol = 1e-10) {
  const auto m = o.rows();
  if (o.cols() != m) throw NotOrthogonal("matrix is not square");
  const double err = (o * o.transpose() - RealMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
  if (!(err <= tol)) throw NotOrthogonal("||O O^T - I||_max = " + std::to_string(err));

  // Left-eliminate X = O^T: Q_L ... Q_1 O^T = D, hence O = D Q_L ... Q_1 and
  // the chain applies Q_1 first and the diagonal signs last.
  RealMatrix x = o.transpose();
  std::vector<GaussianGate> gates;
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = m - 1; r > c; --r) {
      const double xr = x(r, c);
      if (std::abs(xr) <= 1e-15) continue;
      const double xc = x(c, c);
      const double theta = std::atan2(xr, xc);
      const double cs = std::cos(theta), sn = std::sin(theta);
      const Eigen::RowVectorXd rc = x.row(c);
      const Eigen::RowVectorXd rr = x.row(r);
      x.row(c) = cs * rc + sn * rr;
      x.row(r) = -sn * rc + cs * rr;
      gates.emplace_back(TwoModeRotation{static_cast<std::size_t>(c), static_cast<std::size_t>(r), theta});
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (x(k, k) < 0.0) gates.emplace_back(PhaseShift{static_cast<std::size_t>(k), std::numbers::pi});
  }
  return gates;
}

struct SynthesisResult {
  GaussianCircuit circuit;
  std::size_t rotation_gates = 0;
  std::size_t phase_gates = 0;
  std::size_t squeeze_gates = 0;
  std::size_t untangle_gates = 0;
  /// Squeezing parameter assigned to each mode (0 where no gate was emitted).
  std::vector<double> squeeze_r;
  /// max-abs difference between the composed circuit and the target.
  double residual = 0.0;
};

inline SynthesisResult synthesize_ground_circuit(const DispersionData& disp, double tol = 1e-9) {
  const auto m = static_cast<std::size_t>(disp.omegas.size());
  SynthesisResult out;
  out.circuit.mode_count = m;
  auto& gates = out.circuit.gates;

  std::vector<double> phase(m, 0.0);
  for (const auto& g : givens_decompose(disp.real_basis)) {
    if (const auto* ph = std::get_if<PhaseShift>(&g)) {
      phase[ph->mode] += ph->phi;
    } else {
      gates.push_back(g);
      ++out.rotation_gates;
    }
  }

  std::vector<bool> sine(m, false);
  for (std::size_t k = 0; k < m; ++k) {
    if (disp.partner[k] < k) {
      sine[k] = true;
      phase[k] += std::numbers::pi / 2.0;
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double phi = std::remainder(phase[k], 2.0 * std::numbers::pi);
    if (phi != 0.0) {
      gates.emplace_back(PhaseShift{k, phi});
      ++out.phase_gates;
    }
  }

  out.squeeze_r.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double r = 0.5 * std::log(disp.omegas(static_cast<Eigen::Index>(k)));
    out.squeeze_r[k] = sine[k] ? -r : r;
    if (out.squeeze_r[k] != 0.0) {
      gates.emplace_back(Squeeze{k, out.squeeze_r[k]});
      ++out.squeeze_gates;
    }
  }

  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t p = disp.partner[k];
    if (p > k) {
      gates.emplace_back(TwoModeRotation{k, p, -std::numbers::pi / 4.0});
      ++out.untangle_gates;
    }
  }

  out.residual = max_abs_difference(circuit_to_bogoliubov(out.circuit), target_bogoliubov(disp));
  if (!(out.residual <= tol)) {
    throw SynthesisMismatch("composed circuit differs from target by " + std::to_string(out.residual));
  }
  return out;
}

}  // namespace cvqft
