#pragma once

// Heralded single-photon preparation from squeezed vacuum.
//
// Squeeze by s, tap the beam on a transmittance-T splitter, keep the branch
// in which the detector clicks (operator sqrt(1-T) T^{n/2} A), then undo a
// squeeze of s'. With T = tanh s' / tanh s the output is |1>.

#include "cvqft/errors.hpp"
#include "cvqft/fock.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace cvqft {

inline double matched_transmittance(double s, double s_prime) { return std::tanh(s_prime) / std::tanh(s); }

struct PhotonSubtractionResult {
  FockState state;  // normalized, single mode
  double transmittance = 0.0;
  double success_probability = 0.0;
  double fidelity = 0.0;
  /// 1 - fidelity, accumulated from the non-|1> weights to avoid cancellation.
  double infidelity = 0.0;
};

/// S^dagger(s') T^{n/2} A S(s) |0> at cutoff D. `transmittance` overrides the
/// matched value tanh s' / tanh s (used to study mismatch).
inline PhotonSubtractionResult photon_subtraction_protocol(double s, double s_prime, std::size_t cutoff,
                                                           std::optional<double> transmittance = std::nullopt,
                                                           std::size_t pad = kDefaultPad) {
  if (!(s_prime > 0.0) || !(s_prime < s)) {
    throw ParameterOrder("need 0 < s' < s, got s = " + std::to_string(s) + ", s' = " + std::to_string(s_prime));
  }
  if (cutoff < 2) throw ValidationError("photon subtraction needs cutoff >= 2");
  const double t = transmittance.value_or(matched_transmittance(s, s_prime));
  if (!(t > 0.0 && t < 1.0)) throw ParameterOrder("transmittance must lie in (0, 1)");

  FockState psi = vacuum(1, cutoff);
  apply_gate(psi, Squeeze{0, s}, false, pad);

  const auto lv = static_cast<Eigen::Index>(cutoff + 1);
  ComplexMatrix tap = ComplexMatrix::Zero(lv, lv);
  for (Eigen::Index n = 1; n < lv; ++n) {
    // T^{n/2} after lowering |n> to |n-1>
    tap(n - 1, n) = std::pow(t, 0.5 * static_cast<double>(n - 1)) * std::sqrt(static_cast<double>(n));
  }
  detail::apply_local(psi, {0}, tap);
  apply_gate(psi, Squeeze{0, s_prime}, true, pad);

  PhotonSubtractionResult out;
  out.transmittance = t;
  const double norm2 = psi.norm_squared();
  out.success_probability = (1.0 - t) * norm2;
  double off = 0.0;
  for (Eigen::Index n = 0; n < lv; ++n) {
    if (n != 1) off += std::norm(psi.amplitudes(n));
  }
  out.infidelity = off / norm2;
  out.fidelity = std::norm(psi.amplitudes(1)) / norm2;
  psi.amplitudes /= std::sqrt(norm2);
  psi.leakage = 0.0;
  out.state = psi;
  return out;
}

}  // namespace cvqft
