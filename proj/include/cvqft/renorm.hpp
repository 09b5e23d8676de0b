#pragma once

// One-loop mass shift Sigma of the lattice phi^4 theory, the bare mass that
// cancels it, and the adiabatic switching schedule for the coupling.

#include "cvqft/errors.hpp"
#include "cvqft/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace cvqft {

/// Sigma = (lambda / 4M) sum_k 1 / omega_k over the M lattice momenta.
///
/// Only the closed-form dispersion is used, so this scales to N ~ 1e6.
inline double sigma_discrete(const LatticeSpec& spec) {
  spec.validate();
  if (spec.lambda == 0.0) return 0.0;
  const std::size_t m = spec.mode_count();
  double acc = 0.0;
  double carry = 0.0;  // Kahan summation
  for (std::size_t k = 0; k < m; ++k) {
    const double term = 1.0 / std::sqrt(omega_squared(spec, k)) - carry;
    const double next = acc + term;
    carry = (next - acc) - term;
    acc = next;
  }
  return spec.lambda / (4.0 * static_cast<double>(m)) * acc;
}

namespace detail {

inline double inverse_lattice_momentum(const std::vector<double>& k) {
  double s = 0.0;
  for (double x : k) {
    const double h = std::sin(0.5 * x);
    s += 4.0 * h * h;
  }
  return 1.0 / std::sqrt(s);
}

/// Midpoint sum of f over the cube centred at `centre` with half-width
/// `half`, split into `n`^d cells; the cell holding the centre is handled by
/// the caller when `skip_centre` is set.
inline double cube_midpoint_sum(int dim, int n, double half, bool skip_centre) {
  const double h = 2.0 * half / n;
  const double vol = std::pow(h, dim);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> k(static_cast<std::size_t>(dim));
  const int mid = n / 2;
  double acc = 0.0;
  while (true) {
    bool centre = true;
    for (int i = 0; i < dim; ++i) {
      k[static_cast<std::size_t>(i)] = -half + (idx[static_cast<std::size_t>(i)] + 0.5) * h;
      centre = centre && idx[static_cast<std::size_t>(i)] == mid;
    }
    if (!(skip_centre && centre)) acc += inverse_lattice_momentum(k) * vol;
    int pos = dim - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return acc;
}

/// Integral of 1 / |2 sin(k/2)| over the cube [-half, half]^d around the
/// origin, by repeated 3^d subdivision of the singular central cell.
inline double singular_cell_integral(int dim, double half) {
  double acc = 0.0;
  for (int level = 0; level < 60; ++level) {
    const double part = cube_midpoint_sum(dim, 3, half, true);
    acc += part;
    half /= 3.0;
    if (part < 1e-16 * acc) break;
  }
  return acc;
}

inline double c_d_at(int dim, int n) {
  const double pi = std::numbers::pi;
  const double h = 2.0 * pi / n;
  const double integral = cube_midpoint_sum(dim, n, pi, true) + singular_cell_integral(dim, 0.5 * h);
  return 0.25 * integral / std::pow(2.0 * pi, dim);
}

}  // namespace detail

/// C_d = (1/4) (2 pi)^{-d} int_{[-pi,pi]^d} dk / sqrt(sum_i 4 sin^2(k_i/2)) at m = 0.
///
/// Tensor midpoint rule on an odd grid (so the origin is a cell centre); the
/// origin cell is refined geometrically. Converged when the result at
/// 2n+1 points per axis differs by at most `tolerance`.
inline double c_d_constant(int dim, int resolution = 65, double tolerance = 0.005) {
  if (dim != 2 && dim != 3) throw DimensionUnsupported("C_d is defined for d = 2 and 3, got " + std::to_string(dim));
  if (resolution < 64) throw ValidationError("resolution must be >= 64 points per axis");
  const int n = resolution % 2 == 0 ? resolution + 1 : resolution;
  const double coarse = detail::c_d_at(dim, n);
  const double fine = detail::c_d_at(dim, 2 * n + 1);
  if (!(std::abs(fine - coarse) <= tolerance)) {
    throw QuadratureNotConverged("C_" + std::to_string(dim) + " changed by " + std::to_string(std::abs(fine - coarse)) +
                                 " between " + std::to_string(n) + " and " + std::to_string(2 * n + 1) + " points");
  }
  return fine;
}

/// Continuum Sigma: (lambda / 8 pi) log(64 / m^2) for d = 1, C_d lambda for d = 2, 3.
inline double sigma_continuum(double mass, double lambda, int dim) {
  if (dim == 1) {
    if (!(mass > 0.0)) throw ValidationError("d = 1 continuum Sigma needs m > 0");
    return lambda / (8.0 * std::numbers::pi) * std::log(64.0 / (mass * mass));
  }
  if (dim == 2 || dim == 3) return c_d_constant(dim) * lambda;
  throw DimensionUnsupported("Sigma is implemented for d <= 3, got " + std::to_string(dim));
}

/// m0^2 = m^2 - Sigma.
inline double bare_mass(const LatticeSpec& spec) {
  const double m = spec.effective_mass();
  return m * m - sigma_discrete(spec);
}

/// Sign convention for the counter-term along the schedule.
enum class DeltaMassSign {
  /// delta_m = -Sigma(lambda(t)): cancels the one-loop shift. Selected by --dm-sign appendix.
  Cancelling,
  /// delta_m = +Sigma(lambda(t)). Selected by --dm-sign section4.
  Additive,
};

struct ScheduleSample {
  double t;
  double lambda;
  double delta_m;
};

struct CouplingSchedule {
  double total = 0.0;    // T: evolution runs over [-T, T]
  double plateau = 0.0;  // T1: lambda is constant on [-T1, T1]
  double dt = 0.0;
  double lambda_max = 0.0;
  double mass = 0.0;
  int dim = 1;
  DeltaMassSign sign = DeltaMassSign::Cancelling;
  /// Sigma per unit lambda.
  double sigma_slope = 0.0;
  std::vector<ScheduleSample> samples;

  std::size_t steps() const { return samples.size(); }

  double lambda_at(double t) const {
    const double ramp = (total - std::abs(t)) / (total - plateau);
    return lambda_max * std::clamp(ramp, 0.0, 1.0);
  }

  double delta_m_at(double t) const {
    const double sigma = sigma_slope * lambda_at(t);
    return sign == DeltaMassSign::Cancelling ? -sigma : sigma;
  }
};

/// Piecewise-linear ramp 0 -> lambda_max on [-T, -T1], plateau, and mirror
/// ramp-down, sampled at the midpoints of the 2T/dt Trotter steps.
inline CouplingSchedule coupling_schedule(double total, double plateau, double dt, double lambda_max, double mass,
                                          int dim = 1, DeltaMassSign sign = DeltaMassSign::Cancelling) {
  if (!(plateau > 0.0) || !(plateau < total) || !std::isfinite(total)) {
    throw BadInterval("need 0 < T1 < T, got T = " + std::to_string(total) + ", T1 = " + std::to_string(plateau));
  }
  if (!(dt > 0.0)) throw BadInterval("dt must be positive");
  const double ratio = 2.0 * total / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw BadInterval("dt = " + std::to_string(dt) + " does not divide 2T = " + std::to_string(2.0 * total));
  }
  if (!(lambda_max >= 0.0)) throw ValidationError("lambda_max must be >= 0");

  CouplingSchedule s;
  s.total = total;
  s.plateau = plateau;
  s.dt = dt;
  s.lambda_max = lambda_max;
  s.mass = mass;
  s.dim = dim;
  s.sign = sign;
  s.sigma_slope = lambda_max == 0.0 ? 0.0 : sigma_continuum(mass, 1.0, dim);
  const auto n = static_cast<std::size_t>(steps);
  s.samples.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    // symmetric about t = 0 by construction: t_j = -t_{n-1-j}
    const double t = dt * (static_cast<double>(j) + 0.5 - 0.5 * static_cast<double>(n));
    s.samples.push_back({t, s.lambda_at(t), s.delta_m_at(t)});
  }
  return s;
}

}  // namespace cvqft
