#pragma once

// End-to-end amplitude: prepare a_k^dagger ... |Omega> with the inverse
// ground circuit, evolve with the switched-on interaction by Trotter steps,
// undo the circuit, and read off one occupation amplitude.
//
// Step j uses lambda_j, delta_m_j sampled at the slice midpoint and applies
//   order 1:  psi <- e^{i dt H0} e^{i dt V_j} psi
//   order 2:  psi <- e^{i dt H0 / 2} e^{i dt V_j} e^{i dt H0 / 2} psi
// with V_j = sum_n (lambda_j / 24 Q_n^4 + delta_m_j / 2 Q_n^2). The exact
// oracle replaces each step by e^{i dt (H0 + V_j)}. `conjugate_exponent`
// flips every i to -i.

#include "cvqft/errors.hpp"
#include "cvqft/fock.hpp"
#include "cvqft/renorm.hpp"
#include "cvqft/synthesis.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace cvqft {

struct ScatteringSpec {
  LatticeSpec lattice;
  std::vector<std::size_t> in_modes;
  std::vector<std::size_t> out_modes;
  CouplingSchedule schedule;
  std::size_t cutoff = 8;
  bool subtract_vacuum_energy = false;
  int trotter_order = 1;
  bool conjugate_exponent = false;
  double phase_guard = kDefaultPhaseGuard;

  void validate() const {
    lattice.validate();
    const std::size_t m = lattice.mode_count();
    auto check = [&](const std::vector<std::size_t>& modes, const char* what) {
      std::vector<std::size_t> count(m, 0);
      for (std::size_t k : modes) {
        if (k >= m) {
          throw ValidationError(std::string(what) + ": mode " + std::to_string(k) + " out of range for " +
                                std::to_string(m) + " modes");
        }
        if (++count[k] > cutoff) {
          throw ValidationError(std::string(what) + ": " + std::to_string(count[k]) + " particles in mode " +
                                std::to_string(k) + " exceed cutoff " + std::to_string(cutoff));
        }
      }
    };
    check(in_modes, "in_modes");
    check(out_modes, "out_modes");
    if (trotter_order != 1 && trotter_order != 2) throw ValidationError("trotter_order must be 1 or 2");
    if (schedule.samples.empty()) throw ValidationError("schedule has no steps");
    fock_dimension(m, cutoff);
  }

  /// Occupation vector of the out-state.
  std::vector<int> out_occupation() const {
    std::vector<int> occ(lattice.mode_count(), 0);
    for (std::size_t k : out_modes) ++occ[k];
    return occ;
  }
};

struct AmplitudeResult {
  cplx amplitude{0.0, 0.0};
  std::vector<OccupationProbability> distribution;
  double leakage = 0.0;
  double norm_squared = 0.0;
  std::size_t steps = 0;
  std::size_t cutoff = 0;
  std::size_t dimension = 0;
};

/// Holds everything that is reused across the steps of one run.
class ScatteringEngine {
 public:
  explicit ScatteringEngine(ScatteringSpec spec)
      : spec_(std::move(spec)),
        synthesis_((spec_.validate(), synthesize_ground_circuit(dispersion(spec_.lattice)))),
        h0_(spec_.lattice, spec_.cutoff, spec_.subtract_vacuum_energy) {}

  const ScatteringSpec& spec() const { return spec_; }
  const SynthesisResult& synthesis() const { return synthesis_; }
  const FreeHamiltonian& free_hamiltonian() const { return h0_; }

  double sign() const { return spec_.conjugate_exponent ? -1.0 : 1.0; }

  FockState prepare_in_state() const {
    FockState s = vacuum(spec_.lattice.mode_count(), spec_.cutoff);
    for (std::size_t k : spec_.in_modes) create_single_photon(s, k);
    apply_circuit_adjoint(s, synthesis_.circuit);
    return s;
  }

  /// e^{i sign dt V} on every mode.
  void apply_potential(FockState& s, const ScheduleSample& sample, double dt) const {
    apply_local_potential(s, sample.lambda, sample.delta_m, sign() * dt, spec_.phase_guard);
  }

  /// e^{i sign t H0}.
  void apply_free(FockState& s, double t) const { h0_.evolve(s, -sign() * t); }

  void trotter_step(FockState& s, const ScheduleSample& sample) const {
    const double dt = spec_.schedule.dt;
    if (spec_.trotter_order == 2) {
      apply_free(s, 0.5 * dt);
      apply_potential(s, sample, dt);
      apply_free(s, 0.5 * dt);
    } else {
      apply_potential(s, sample, dt);
      apply_free(s, dt);
    }
  }

  void trotter_evolve(FockState& s) const {
    for (const auto& sample : spec_.schedule.samples) trotter_step(s, sample);
  }

  /// Sparse H0 + V_j for one slice of the schedule.
  SparseComplex slice_generator(const ScheduleSample& sample) const {
    const ComplexMatrix local = local_potential(spec_.cutoff, sample.lambda, sample.delta_m);
    return h0_.complex_matrix() + local_sum(local);
  }

  /// prod_j e^{i sign dt (H0 + V_j)} applied in schedule order.
  void exact_evolve(FockState& s) const {
    for (const auto& sample : spec_.schedule.samples) {
      s.amplitudes = expi_apply(slice_generator(sample), sign() * spec_.schedule.dt, s.amplitudes);
    }
  }

  AmplitudeResult uncompute_and_measure(FockState s) const {
    apply_circuit(s, synthesis_.circuit);
    AmplitudeResult r;
    r.amplitude = s.amplitudes(static_cast<Eigen::Index>(s.index_of(spec_.out_occupation())));
    r.distribution = number_distribution(s);
    r.leakage = s.leakage;
    r.norm_squared = s.norm_squared();
    r.steps = spec_.schedule.steps();
    r.cutoff = spec_.cutoff;
    r.dimension = s.dimension();
    return r;
  }

  AmplitudeResult run() const {
    FockState s = prepare_in_state();
    trotter_evolve(s);
    return uncompute_and_measure(std::move(s));
  }

  AmplitudeResult run_exact() const {
    if (h0_.dimension() > kMaxOracleDimension) {
      throw MemoryGuard("oracle dimension " + std::to_string(h0_.dimension()) + " exceeds " +
                        std::to_string(kMaxOracleDimension));
    }
    FockState s = prepare_in_state();
    exact_evolve(s);
    return uncompute_and_measure(std::move(s));
  }

  static constexpr std::size_t kMaxOracleDimension = 6561;

 private:
  /// sum_n I (x) ... (x) op_n (x) ... (x) I as a sparse matrix.
  SparseComplex local_sum(const ComplexMatrix& op) const {
    const std::size_t modes = spec_.lattice.mode_count();
    const std::size_t dim = h0_.dimension();
    FockState probe;
    probe.mode_count = modes;
    probe.cutoff = spec_.cutoff;
    std::vector<Eigen::Triplet<cplx, Eigen::Index>> trip;
    for (std::size_t ucol = 0; ucol < dim; ++ucol) {
      const auto col = static_cast<Eigen::Index>(ucol);
      const auto occ = probe.occupation(ucol);
      for (std::size_t n = 0; n < modes; ++n) {
        const auto stride = static_cast<Eigen::Index>(probe.stride(n));
        const Eigen::Index c = occ[n];
        for (Eigen::Index r = 0; r < op.rows(); ++r) {
          if (op(r, c) != cplx(0.0)) trip.emplace_back(col + (r - c) * stride, col, op(r, c));
        }
      }
    }
    SparseComplex out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

  ScatteringSpec spec_;
  SynthesisResult synthesis_;
  FreeHamiltonian h0_;
};

inline FockState prepare_in_state(const ScatteringSpec& spec) { return ScatteringEngine(spec).prepare_in_state(); }

inline void trotter_evolve(FockState& state, const ScatteringSpec& spec) { ScatteringEngine(spec).trotter_evolve(state); }

inline AmplitudeResult uncompute_and_measure(const FockState& state, const ScatteringSpec& spec) {
  return ScatteringEngine(spec).uncompute_and_measure(state);
}

inline AmplitudeResult scattering_amplitude(const ScatteringSpec& spec) { return ScatteringEngine(spec).run(); }

inline cplx exact_amplitude_oracle(const ScatteringSpec& spec) { return ScatteringEngine(spec).run_exact().amplitude; }

}  // namespace cvqft
