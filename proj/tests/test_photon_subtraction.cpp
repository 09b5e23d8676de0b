#include "catch_amalgamated.hpp"

#include "cvqft/photon_subtraction.hpp"

#include <cmath>

using namespace cvqft;
using Catch::Approx;

TEST_CASE("matched transmittance", "[photon]") {
  CHECK(matched_transmittance(0.2, 0.1) == Approx(0.504967).margin(1e-6));
}

TEST_CASE("heralded state is a single photon", "[photon]") {
  const auto r = photon_subtraction_protocol(0.2, 0.1, 30);
  CHECK(r.fidelity > 0.999);
  CHECK(r.infidelity < 1e-10);
  CHECK(r.fidelity + r.infidelity == Approx(1.0).margin(1e-12));
  CHECK(r.state.norm_squared() == Approx(1.0).margin(1e-12));
  CHECK(r.success_probability > 0.0);
  CHECK(r.success_probability < 1.0 - r.transmittance);
}

TEST_CASE("success probability from the squeezed-vacuum oracle", "[photon]") {
  // (1-T) ||T^{n/2} A S(s)|0>||^2 = (1-T) sum_n T^{2n-1} 2n |c_2n|^2 with
  // |c_2n|^2 = tanh(s)^{2n} (2n)! / (4^n n!^2 cosh s), summed directly.
  const double s = 0.2, sp = 0.1;
  const double t = matched_transmittance(s, sp);
  double expected = 0.0;
  for (int n = 1; n < 60; ++n) {
    const double c2 = std::exp(2 * n * std::log(std::tanh(s)) + std::lgamma(2.0 * n + 1) - n * std::log(4.0) -
                               2 * std::lgamma(n + 1.0)) /
                      std::cosh(s);
    expected += std::pow(t, 2 * n - 1) * 2.0 * n * c2;
  }
  expected *= 1.0 - t;
  const auto r = photon_subtraction_protocol(s, sp, 40);
  CHECK(r.success_probability == Approx(expected).epsilon(1e-10));
}

TEST_CASE("fidelity improves with the cutoff", "[photon]") {
  double previous_infidelity = 1.0;
  for (std::size_t d : {10u, 20u, 30u}) {
    const auto r = photon_subtraction_protocol(0.2, 0.1, d);
    CHECK(r.infidelity <= previous_infidelity);
    previous_infidelity = r.infidelity;
  }
  // a heavier squeeze makes the cutoff dependence visible
  const auto low = photon_subtraction_protocol(1.2, 0.9, 10);
  const auto high = photon_subtraction_protocol(1.2, 0.9, 30);
  CHECK(low.infidelity > high.infidelity);
}

TEST_CASE("mismatched transmittance lowers the fidelity", "[photon]") {
  const auto matched = photon_subtraction_protocol(0.2, 0.1, 30);
  const auto off = photon_subtraction_protocol(0.2, 0.1, 30, 0.9 * matched_transmittance(0.2, 0.1));
  CHECK(off.fidelity < matched.fidelity);
  CHECK(off.infidelity > 1e-6);
}

TEST_CASE("parameter order", "[photon]") {
  CHECK_THROWS_AS(photon_subtraction_protocol(0.1, 0.2, 10), ParameterOrder);
  CHECK_THROWS_AS(photon_subtraction_protocol(0.2, 0.2, 10), ParameterOrder);
  CHECK_THROWS_AS(photon_subtraction_protocol(0.2, 0.0, 10), ParameterOrder);
}
