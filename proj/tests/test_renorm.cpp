#include "catch_amalgamated.hpp"

#include "cvqft/renorm.hpp"

#include <cmath>
#include <numbers>

using namespace cvqft;
using Catch::Approx;

namespace {

LatticeSpec lattice(int dim, int n, double m, double lambda) {
  LatticeSpec s;
  s.dim = dim;
  s.sites = n;
  s.mass = m;
  s.lambda = lambda;
  return s;
}

double relative_gap(int n) {
  const double d = sigma_discrete(lattice(1, n, 0.01, 1.0));
  const double c = sigma_continuum(0.01, 1.0, 1);
  return std::abs(d - c) / c;
}

}  // namespace

TEST_CASE("discrete Sigma by hand", "[renorm]") {
  CHECK(sigma_discrete(lattice(1, 5, 1.0, 0.0)) == 0.0);
  CHECK(sigma_discrete(lattice(1, 2, 1.0, 1.0)) == Approx((1.0 + 1.0 / std::sqrt(5.0)) / 8.0).epsilon(1e-14));
  const double one = sigma_discrete(lattice(1, 17, 0.6, 0.3));
  const double two = sigma_discrete(lattice(1, 17, 0.6, 0.6));
  CHECK(two == Approx(2.0 * one).epsilon(1e-14));
}

TEST_CASE("continuum Sigma in one dimension", "[renorm]") {
  CHECK(sigma_continuum(8.0, 1.0, 1) == 0.0);
  CHECK(sigma_continuum(0.01, 1.0, 1) == Approx(std::log(640000.0) / (8.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(sigma_continuum(0.01, 1.0, 1) == Approx(0.531944).margin(1e-6));
  CHECK_THROWS_AS(sigma_continuum(0.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(sigma_continuum(1.0, 1.0, 4), DimensionUnsupported);
}

TEST_CASE("lattice sum approaches the continuum log", "[renorm]") {
  const double g2 = relative_gap(100);
  const double g3 = relative_gap(1000);
  const double g4 = relative_gap(10000);
  const double g5 = relative_gap(100000);
  const double g6 = relative_gap(1000000);
  CHECK(g6 < 0.02);
  CHECK(g3 < g2);
  CHECK(g4 < g2);
  // once m N >> 1 the sum has converged to the lattice integral and the
  // gap is the O(m^2) remainder of the log formula
  CHECK(std::abs(g5 - g4) < 1e-12);
  CHECK(std::abs(g6 - g5) < 1e-12);
  CHECK(g6 < 10.0 * 0.01 * 0.01);
}

TEST_CASE("C_d by quadrature", "[renorm][quadrature]") {
  const double c2 = c_d_constant(2);
  const double c3 = c_d_constant(3);
  CHECK(c2 == Approx(0.16).margin(0.01));
  CHECK(c3 == Approx(0.11).margin(0.01));
  CHECK(std::abs(c_d_constant(2, 128) - c2) < 0.002);
  CHECK(std::abs(c_d_constant(3, 128) - c3) < 0.002);
  CHECK(sigma_continuum(1.0, 2.0, 2) == Approx(2.0 * c2).epsilon(1e-12));
}

TEST_CASE("C_d agrees with the large-lattice mode sum", "[renorm][quadrature]") {
  // (1/4M) sum_k 1/omega_k with m -> 0 is a Riemann sum of the same integral.
  CHECK(sigma_discrete(lattice(2, 1000, 1e-3, 1.0)) == Approx(c_d_constant(2)).margin(0.005));
  CHECK(sigma_discrete(lattice(3, 100, 1e-2, 1.0)) == Approx(c_d_constant(3)).margin(0.01));
}

TEST_CASE("C_d argument checks", "[renorm][quadrature]") {
  CHECK_THROWS_AS(c_d_constant(1), DimensionUnsupported);
  CHECK_THROWS_AS(c_d_constant(4), DimensionUnsupported);
  CHECK_THROWS_AS(c_d_constant(2, 32), ValidationError);
  CHECK_THROWS_AS(c_d_constant(3, 64, 1e-9), QuadratureNotConverged);
}

TEST_CASE("bare mass", "[renorm]") {
  CHECK(bare_mass(lattice(1, 8, 1.3, 0.0)) == Approx(1.69));
  CHECK(bare_mass(lattice(1, 1000, 0.05, 0.5)) < 0.0);
  const double expected = 1e-4 - sigma_continuum(0.01, 0.1, 1);
  CHECK(bare_mass(lattice(1, 1000000, 0.01, 0.1)) == Approx(expected).epsilon(0.02));
  CHECK(bare_mass(lattice(1, 1000000, 0.01, 0.1)) == Approx(1e-4 - 0.0531).epsilon(0.02));
}

TEST_CASE("coupling schedule shape", "[renorm][schedule]") {
  const auto s = coupling_schedule(2.0, 1.0, 0.1, 0.4, 0.5);
  CHECK(s.steps() == 40);
  CHECK(s.lambda_at(-2.0) == 0.0);
  CHECK(s.delta_m_at(-2.0) == 0.0);
  CHECK(s.lambda_at(-1.0) == Approx(0.4));
  CHECK(s.lambda_at(-1.5) == Approx(0.2));
  CHECK(s.lambda_at(0.3) == Approx(0.4));
  CHECK(s.lambda_at(1.75) == Approx(0.1));
  for (std::size_t j = 0; j < s.steps(); ++j) {
    const auto& a = s.samples[j];
    const auto& b = s.samples[s.steps() - 1 - j];
    CHECK(a.t == -b.t);
    CHECK(a.lambda == b.lambda);
  }
  CHECK(s.samples.front().t == Approx(-1.95));
  CHECK(s.samples.front().lambda == Approx(0.02));
}

TEST_CASE("counter-term follows -Sigma(lambda(t))", "[renorm][schedule]") {
  const auto a = coupling_schedule(1.0, 0.5, 0.05, 0.1, 0.5);
  const double plateau_sigma = sigma_continuum(0.5, 0.1, 1);
  CHECK(a.delta_m_at(0.0) == Approx(-plateau_sigma));
  for (const auto& x : a.samples) CHECK(x.delta_m == Approx(-sigma_continuum(0.5, x.lambda, 1)).margin(1e-15));
  const auto b = coupling_schedule(1.0, 0.5, 0.05, 0.1, 0.5, 1, DeltaMassSign::Additive);
  CHECK(b.delta_m_at(0.0) == Approx(plateau_sigma));
  const auto c = coupling_schedule(1.0, 0.5, 0.05, 0.1, 0.5, 2);
  CHECK(c.delta_m_at(0.0) == Approx(-0.1 * c_d_constant(2)));
}

TEST_CASE("schedule interval checks", "[renorm][schedule]") {
  CHECK_THROWS_AS(coupling_schedule(1.0, 1.0, 0.1, 0.1, 1.0), BadInterval);
  CHECK_THROWS_AS(coupling_schedule(1.0, 0.0, 0.1, 0.1, 1.0), BadInterval);
  CHECK_THROWS_AS(coupling_schedule(1.0, 0.5, 0.3, 0.1, 1.0), BadInterval);
  CHECK_THROWS_AS(coupling_schedule(1.0, 0.5, -0.1, 0.1, 1.0), BadInterval);
  CHECK_NOTHROW(coupling_schedule(1.0, 0.5, 0.025, 0.1, 1.0));
}
