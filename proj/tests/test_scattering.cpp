#include "catch_amalgamated.hpp"

#include "cvqft/scattering.hpp"

#include <cmath>

using namespace cvqft;
using Catch::Approx;

namespace {

ScatteringSpec make_spec(int sites, double mass, std::size_t cutoff, std::vector<std::size_t> in,
                         std::vector<std::size_t> out, double lambda, double dt, int order = 1) {
  ScatteringSpec s;
  s.lattice.sites = sites;
  s.lattice.mass = mass;
  s.in_modes = std::move(in);
  s.out_modes = std::move(out);
  s.cutoff = cutoff;
  s.trotter_order = order;
  s.schedule = coupling_schedule(1.0, 0.5, dt, lambda, mass);
  return s;
}

double measured_order(const std::vector<double>& errors) {
  // least-squares slope of log err against log dt, dt halving each time
  const double n = static_cast<double>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = -static_cast<double>(i) * std::log(2.0);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> oracle_errors(std::vector<std::size_t> in, std::vector<std::size_t> out, int order) {
  std::vector<double> errs;
  for (double dt : {0.1, 0.05, 0.025}) {
    const ScatteringEngine e(make_spec(2, 1.0, 6, in, out, 0.1, dt, order));
    errs.push_back(std::abs(e.run().amplitude - e.run_exact().amplitude));
  }
  return errs;
}

}  // namespace

TEST_CASE("prepared in-states", "[scattering][prepare]") {
  const auto spec = make_spec(2, 1.0, 10, {}, {}, 0.0, 0.1);
  const ScatteringEngine e(spec);
  const auto target = target_bogoliubov(dispersion(spec.lattice));

  const FockState omega = e.prepare_in_state();
  CHECK(bogoliubov_occupations(omega, target).maxCoeff() < 1e-3);

  auto one_spec = spec;
  one_spec.in_modes = {1};
  const FockState one = ScatteringEngine(one_spec).prepare_in_state();
  const RealVector occ = bogoliubov_occupations(one, target);
  CHECK(occ(1) == Approx(1.0).margin(5e-3));
  CHECK(occ.sum() == Approx(1.0).margin(5e-3));
  CHECK(std::abs(inner_product(omega, one)) < 1e-6);

  auto two_spec = spec;
  two_spec.in_modes = {1, 1};
  const FockState two = ScatteringEngine(two_spec).prepare_in_state();
  CHECK(bogoliubov_occupations(two, target)(1) == Approx(2.0).margin(2e-2));
}

TEST_CASE("prepared occupations converge with the cutoff", "[scattering][prepare]") {
  double previous_one = 1.0;
  double previous_two = 1.0;
  for (std::size_t d : {8u, 10u, 12u, 14u}) {
    auto spec = make_spec(2, 1.0, d, {1}, {}, 0.0, 0.1);
    const auto target = target_bogoliubov(dispersion(spec.lattice));
    const double e1 = std::abs(bogoliubov_occupations(ScatteringEngine(spec).prepare_in_state(), target)(1) - 1.0);
    spec.in_modes = {1, 1};
    const double e2 = std::abs(bogoliubov_occupations(ScatteringEngine(spec).prepare_in_state(), target)(1) - 2.0);
    CHECK(e1 < previous_one);
    CHECK(e2 < previous_two);
    previous_one = e1;
    previous_two = e2;
  }
}

TEST_CASE("free theory evolution is a phase", "[scattering][free]") {
  auto spec = make_spec(2, 1.0, 10, {1}, {1}, 0.0, 0.1);
  const ScatteringEngine e(spec);
  FockState a = e.prepare_in_state();
  FockState b = a;
  const FockState start = a;
  e.trotter_evolve(a);
  e.apply_free(b, 2.0);
  CHECK((a.amplitudes - b.amplitudes).norm() < 1e-10);
  CHECK(a.norm_squared() == Approx(start.norm_squared()).margin(1e-12));
  CHECK(std::abs(inner_product(start, a)) / start.norm_squared() == Approx(1.0).margin(1e-3));

  const auto r = e.run();
  CHECK(std::abs(r.amplitude) == Approx(1.0).margin(1e-3));
  CHECK(std::abs(r.amplitude - e.run_exact().amplitude) < 1e-10);
  double total = 0.0;
  for (const auto& x : r.distribution) total += x.probability;
  CHECK(total + r.leakage == Approx(1.0).margin(1e-9));

  // a different total photon number has the opposite parity: exactly zero
  spec.out_modes = {1, 0};
  CHECK(std::abs(scattering_amplitude(spec).amplitude) < 1e-6);
}

TEST_CASE("free amplitude approaches one as the cutoff grows", "[scattering][free]") {
  double previous = 1.0;
  for (std::size_t d : {6u, 8u, 10u, 12u}) {
    const double gap = 1.0 - std::abs(scattering_amplitude(make_spec(2, 1.0, d, {1}, {1}, 0.0, 0.1)).amplitude);
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("trotter evolution is unitary", "[scattering]") {
  const ScatteringEngine e(make_spec(2, 1.0, 6, {0, 1}, {0, 1}, 0.4, 0.05, 2));
  FockState s = e.prepare_in_state();
  const double before = s.norm_squared();
  e.trotter_evolve(s);
  CHECK(s.norm_squared() == Approx(before).margin(1e-12));
}

TEST_CASE("one step agrees with the slice exponential to second order", "[scattering]") {
  std::vector<double> errs;
  for (double dt : {0.04, 0.02, 0.01}) {
    auto spec = make_spec(2, 1.0, 6, {0}, {0}, 0.5, dt);
    const ScatteringEngine e(spec);
    const ScheduleSample sample{0.0, 0.5, -0.05};
    FockState a = e.prepare_in_state();
    FockState b = a;
    e.trotter_step(a, sample);
    b.amplitudes = expi_apply(e.slice_generator(sample), dt, b.amplitudes);
    errs.push_back((a.amplitudes - b.amplitudes).norm());
  }
  CHECK(measured_order(errs) == Approx(2.0).margin(0.2));
}

TEST_CASE("slice generators are Hermitian", "[scattering][oracle]") {
  const ScatteringEngine e(make_spec(2, 1.0, 5, {0}, {0}, 0.3, 0.1));
  for (const auto& sample : e.spec().schedule.samples) {
    const SparseComplex h = e.slice_generator(sample);
    const SparseComplex diff = h - SparseComplex(h.adjoint());
    double worst = 0.0;
    for (Eigen::Index r = 0; r < diff.outerSize(); ++r)
      for (SparseComplex::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("transition amplitude converges at the splitting order", "[scattering][oracle]") {
  // (0,0) -> (1,1) conserves lattice momentum on N=2
  CHECK(measured_order(oracle_errors({0, 0}, {1, 1}, 1)) == Approx(1.0).margin(0.1));
  CHECK(measured_order(oracle_errors({0, 0}, {1, 1}, 2)) == Approx(2.0).margin(0.1));
}

TEST_CASE("forward amplitude: first-order error cancels on a symmetric schedule", "[scattering][oracle]") {
  // Over a palindromic schedule the first-order product is
  // e^{i dt H0/2} (symmetric product) e^{-i dt H0/2}; on out = in the two end
  // factors reduce to cancelling phases, leaving a second-order error.
  CHECK(measured_order(oracle_errors({0, 0}, {0, 0}, 1)) == Approx(2.0).margin(0.1));
}

TEST_CASE("time reversal relates swapped amplitudes", "[scattering]") {
  // On N=2 every prepared state is real in the occupation basis, H0 and V
  // are real symmetric, and the symmetric splitting over a palindromic
  // schedule is a complex-symmetric product.
  const auto forward = make_spec(2, 1.0, 6, {0, 0}, {1, 1}, 0.3, 0.1, 2);
  auto backward = forward;
  std::swap(backward.in_modes, backward.out_modes);
  const cplx a = scattering_amplitude(forward).amplitude;
  const cplx b = scattering_amplitude(backward).amplitude;
  CHECK(std::abs(a) > 1e-3);
  CHECK(std::abs(a - b) < 1e-12);

  auto flipped = forward;
  flipped.conjugate_exponent = true;
  CHECK(std::abs(scattering_amplitude(flipped).amplitude - std::conj(a)) < 1e-12);
}

TEST_CASE("vacuum energy subtraction only changes a global phase", "[scattering]") {
  auto spec = make_spec(2, 1.0, 6, {0, 0}, {1, 1}, 0.2, 0.1);
  const cplx a = scattering_amplitude(spec).amplitude;
  spec.subtract_vacuum_energy = true;
  const cplx b = scattering_amplitude(spec).amplitude;
  CHECK(std::abs(std::abs(a) - std::abs(b)) < 1e-12);
  const double shift = 0.5 * dispersion_omegas(spec.lattice).sum();
  CHECK(std::abs(a - b * std::exp(kI * (2.0 * shift))) < 1e-10);
}

TEST_CASE("scattering runs are deterministic", "[scattering]") {
  const auto spec = make_spec(2, 1.0, 6, {0, 0}, {1, 1}, 0.1, 0.05, 2);
  const auto a = scattering_amplitude(spec);
  const auto b = scattering_amplitude(spec);
  CHECK(a.amplitude == b.amplitude);
  CHECK(a.leakage == b.leakage);
}

TEST_CASE("scattering spec validation", "[scattering]") {
  CHECK_THROWS_AS(ScatteringEngine(make_spec(2, 1.0, 6, {2}, {0}, 0.1, 0.1)), ValidationError);
  CHECK_THROWS_AS(ScatteringEngine(make_spec(2, 1.0, 2, {0, 0, 0}, {0}, 0.1, 0.1)), ValidationError);
  CHECK_THROWS_AS(ScatteringEngine(make_spec(2, 1.0, 6, {0}, {0}, 0.1, 0.1, 3)), ValidationError);
  CHECK_THROWS_AS(scattering_amplitude(make_spec(2, 1.0, 6, {0}, {0}, 2000.0, 0.1)), PhaseGuard);
  CHECK_THROWS_AS(ScatteringEngine(make_spec(4, 1.0, 9, {0}, {0}, 0.1, 0.1)).run_exact(), MemoryGuard);
}
