#pragma once

// Discretized free scalar field: coupling matrix, dispersion relation and
// normal-mode bases on a periodic hypercubic lattice (lattice spacing 1).
//
// Modes are labelled by n in Z_N^d flattened row-major: the first coordinate
// is the most significant digit. Momentum modes use the same flattening with
// k_i in {0, ..., N-1} standing for the wave number 2 pi k_i / N.

#include "cvqft/errors.hpp"
#include "cvqft/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvqft {

/// Largest mode count for which dense M x M matrices are built.
inline constexpr std::size_t kMaxDenseModes = 4096;

struct LatticeSpec {
  int dim = 1;
  int sites = 2;
  double mass = 1.0;
  double lambda = 0.0;
  /// Mass used when `mass == 0`; defaults to 1/N.
  std::optional<double> zero_mode_shift;
  /// Diagnostic: drop the nearest-neighbour term so V = m^2 I.
  bool drop_gradient_term = false;

  std::size_t mode_count() const {
    std::size_t m = 1;
    for (int i = 0; i < dim; ++i) m *= static_cast<std::size_t>(sites);
    return m;
  }

  double effective_mass() const {
    if (mass != 0.0) return mass;
    return zero_mode_shift.value_or(1.0 / static_cast<double>(sites));
  }

  bool mass_shifted() const { return mass == 0.0; }

  void validate() const {
    if (dim < 1 || dim > 3) {
      throw ValidationError("dim must be in [1, 3], got " + std::to_string(dim));
    }
    if (sites < 2) {
      throw ValidationError("sites must be >= 2, got " + std::to_string(sites));
    }
    if (!(mass >= 0.0) || !std::isfinite(mass)) {
      throw ValidationError("mass must be a finite real >= 0");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw ValidationError("lambda must be a finite real >= 0");
    }
    if (zero_mode_shift && !(*zero_mode_shift > 0.0)) {
      throw ValidationError("zero_mode_shift must be > 0");
    }
  }
};

inline std::vector<int> mode_coordinates(const LatticeSpec& spec, std::size_t index) {
  std::vector<int> coords(static_cast<std::size_t>(spec.dim));
  for (int i = spec.dim - 1; i >= 0; --i) {
    coords[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(spec.sites));
    index /= static_cast<std::size_t>(spec.sites);
  }
  return coords;
}

inline std::size_t mode_index(const LatticeSpec& spec, std::span<const int> coords) {
  std::size_t index = 0;
  for (int c : coords) {
    const int wrapped = ((c % spec.sites) + spec.sites) % spec.sites;
    index = index * static_cast<std::size_t>(spec.sites) + static_cast<std::size_t>(wrapped);
  }
  return index;
}

/// Index of the momentum -k.
inline std::size_t conjugate_mode(const LatticeSpec& spec, std::size_t index) {
  auto coords = mode_coordinates(spec, index);
  for (int& c : coords) c = -c;
  return mode_index(spec, coords);
}

/// omega_k^2 = m_eff^2 + 4 sum_i sin^2(pi k_i / N).
inline double omega_squared(const LatticeSpec& spec, std::size_t index) {
  const double m = spec.effective_mass();
  double w2 = m * m;
  if (spec.drop_gradient_term) return w2;
  for (int k : mode_coordinates(spec, index)) {
    // fold so that omega_k == omega_{-k} bit for bit
    const int folded = std::min(k, spec.sites - k);
    const double s = std::sin(std::numbers::pi * folded / spec.sites);
    w2 += 4.0 * s * s;
  }
  return w2;
}

/// Dispersion frequencies in mode order, straight from the closed form.
inline RealVector dispersion_omegas(const LatticeSpec& spec) {
  spec.validate();
  const std::size_t m = spec.mode_count();
  RealVector w(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) w(static_cast<Eigen::Index>(k)) = std::sqrt(omega_squared(spec, k));
  return w;
}

namespace detail {
inline void check_dense(const LatticeSpec& spec) {
  spec.validate();
  if (spec.mode_count() > kMaxDenseModes) {
    throw MemoryGuard("mode count " + std::to_string(spec.mode_count()) + " exceeds dense limit " +
                      std::to_string(kMaxDenseModes));
  }
}

inline double phase_dot(const LatticeSpec& spec, const std::vector<int>& k, const std::vector<int>& n) {
  long acc = 0;
  for (std::size_t i = 0; i < k.size(); ++i) acc += static_cast<long>(k[i]) * n[i];
  acc %= spec.sites;
  return 2.0 * std::numbers::pi * static_cast<double>(acc) / spec.sites;
}
}  // namespace detail

/// V such that H0 = P^T P / 2 + Q^T V Q / 2, periodic in every direction.
inline RealMatrix build_coupling_matrix(const LatticeSpec& spec) {
  detail::check_dense(spec);
  const std::size_t m = spec.mode_count();
  const double meff = spec.effective_mass();
  RealMatrix v = RealMatrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) * (meff * meff);
  if (spec.drop_gradient_term) return v;
  for (std::size_t n = 0; n < m; ++n) {
    const auto coords = mode_coordinates(spec, n);
    for (int axis = 0; axis < spec.dim; ++axis) {
      // (Q_n - Q_{n+e})^2 / 2 for every bond; N = 2 double-counts the bond.
      auto next = coords;
      next[static_cast<std::size_t>(axis)] += 1;
      const std::size_t j = mode_index(spec, next);
      const auto a = static_cast<Eigen::Index>(n);
      const auto b = static_cast<Eigen::Index>(j);
      v(a, a) += 1.0;
      v(b, b) += 1.0;
      v(a, b) -= 1.0;
      v(b, a) -= 1.0;
    }
  }
  return v;
}

struct DispersionData {
  RealVector omegas;
  /// Column k is the plane wave e_k^n = M^{-1/2} exp(i k.n).
  ComplexMatrix plane_wave_basis;
  /// Real orthogonal eigenbasis, one eigenvector per row. For k != -k the
  /// row of the smaller index holds the cosine wave and the partner row the
  /// sine wave; self-conjugate momenta hold their (real) plane wave.
  RealMatrix real_basis;
  /// partner[k] is the index of -k.
  std::vector<std::size_t> partner;
};

inline DispersionData dispersion(const LatticeSpec& spec) {
  detail::check_dense(spec);
  const std::size_t m = spec.mode_count();
  const auto dim = static_cast<Eigen::Index>(m);
  DispersionData out;
  out.omegas = dispersion_omegas(spec);
  out.plane_wave_basis.resize(dim, dim);
  out.real_basis.resize(dim, dim);
  out.partner.resize(m);

  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<std::vector<int>> coords(m);
  for (std::size_t n = 0; n < m; ++n) coords[n] = mode_coordinates(spec, n);

  for (std::size_t k = 0; k < m; ++k) {
    out.partner[k] = conjugate_mode(spec, k);
    for (std::size_t n = 0; n < m; ++n) {
      const double ph = detail::phase_dot(spec, coords[k], coords[n]);
      out.plane_wave_basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = std::polar(norm, ph);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t p = out.partner[k];
    if (p < k) continue;
    for (std::size_t n = 0; n < m; ++n) {
      const double ph = detail::phase_dot(spec, coords[k], coords[n]);
      const auto col = static_cast<Eigen::Index>(n);
      if (p == k) {
        out.real_basis(static_cast<Eigen::Index>(k), col) = norm * std::cos(ph);
      } else {
        out.real_basis(static_cast<Eigen::Index>(k), col) = std::numbers::sqrt2 * norm * std::cos(ph);
        out.real_basis(static_cast<Eigen::Index>(p), col) = std::numbers::sqrt2 * norm * std::sin(ph);
      }
    }
  }
  return out;
}

/// G(omega) = i [V - omega^2 I]^{-1}.
inline ComplexMatrix free_green_function(const LatticeSpec& spec, double omega) {
  const RealMatrix v = build_coupling_matrix(spec);
  const RealVector w = dispersion_omegas(spec);
  const double w2 = omega * omega;
  const double gap = (w.array().square() - w2).abs().minCoeff();
  if (gap < 1e-8) {
    throw PoleProximity("omega^2 = " + std::to_string(w2) + " lies within 1e-8 of a normal-mode frequency");
  }
  const auto m = v.rows();
  const RealMatrix shifted = v - w2 * RealMatrix::Identity(m, m);
  const RealMatrix inv = shifted.partialPivLu().inverse();
  return kI * inv.cast<cplx>();
}

}  // namespace cvqft
