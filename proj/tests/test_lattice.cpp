#include "catch_amalgamated.hpp"

#include "cvqft/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace cvqft;
using Catch::Approx;

namespace {

LatticeSpec chain(int n, double m) {
  LatticeSpec s;
  s.dim = 1;
  s.sites = n;
  s.mass = m;
  return s;
}

std::vector<double> sorted_eigenvalues(const RealMatrix& v) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(v);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> sorted_formula(const LatticeSpec& s) {
  const RealVector w = dispersion_omegas(s);
  std::vector<double> out;
  for (Eigen::Index k = 0; k < w.size(); ++k) out.push_back(w(k) * w(k));
  std::sort(out.begin(), out.end());
  return out;
}

// Spectral sum  sum_n -i / (omega^2 - omega_n^2) e_n e_n^dagger.
ComplexMatrix green_spectral(const DispersionData& d, double omega) {
  const auto m = d.omegas.size();
  ComplexMatrix g = ComplexMatrix::Zero(m, m);
  for (Eigen::Index n = 0; n < m; ++n) {
    const double denom = omega * omega - d.omegas(n) * d.omegas(n);
    g += (-kI / denom) * d.plane_wave_basis.col(n) * d.plane_wave_basis.col(n).adjoint();
  }
  return g;
}

}  // namespace

TEST_CASE("coupling matrix for N=4 matches the hand-expanded Hamiltonian", "[lattice]") {
  RealMatrix expected(4, 4);
  expected << 3, -1, 0, -1,
             -1, 3, -1, 0,
              0, -1, 3, -1,
             -1, 0, -1, 3;
  const RealMatrix v = build_coupling_matrix(chain(4, 1.0));
  CHECK((v - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("N=2 double-counts the periodic bond", "[lattice]") {
  auto s = chain(2, 0.0);
  s.zero_mode_shift = 0.5;
  const auto ev = sorted_eigenvalues(build_coupling_matrix(s));
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == Approx(0.25).margin(1e-12));
  CHECK(ev[1] == Approx(4.25).margin(1e-12));
}

TEST_CASE("dropping the gradient term leaves decoupled oscillators", "[lattice]") {
  for (int n : {2, 5, 8}) {
    auto s = chain(n, 1.0);
    s.drop_gradient_term = true;
    const RealMatrix v = build_coupling_matrix(s);
    CHECK(v.isIdentity(0.0));
  }
}

TEST_CASE("spec validation", "[lattice]") {
  CHECK_THROWS_AS(build_coupling_matrix(chain(1, 1.0)), ValidationError);
  LatticeSpec s;
  s.dim = 4;
  s.sites = 2;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.dim = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  auto neg = chain(4, -1.0);
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  auto shift = chain(4, 0.0);
  shift.zero_mode_shift = 0.0;
  CHECK_THROWS_AS(shift.validate(), ValidationError);
}

TEST_CASE("mode indexing is row-major and -k is an involution", "[lattice]") {
  LatticeSpec s;
  s.dim = 3;
  s.sites = 3;
  for (std::size_t i = 0; i < s.mode_count(); ++i) {
    const auto c = mode_coordinates(s, i);
    CHECK(mode_index(s, c) == i);
    CHECK(conjugate_mode(s, conjugate_mode(s, i)) == i);
  }
  const std::vector<int> c{1, 2, 0};
  CHECK(mode_index(s, c) == 1 * 9 + 2 * 3 + 0);
}

TEST_CASE("dispersion for N=4, m=1", "[lattice]") {
  const auto d = dispersion(chain(4, 1.0));
  const std::vector<double> expected{1, 3, 5, 3};
  for (Eigen::Index k = 0; k < 4; ++k) {
    CHECK(d.omegas(k) * d.omegas(k) == Approx(expected[static_cast<std::size_t>(k)]).margin(1e-12));
  }
  CHECK(d.omegas(1) == d.omegas(3));
}

TEST_CASE("d=2, N=3 has maximum omega^2 = 7", "[lattice]") {
  LatticeSpec s;
  s.dim = 2;
  s.sites = 3;
  s.mass = 1.0;
  const RealVector w = dispersion_omegas(s);
  CHECK(w.array().square().maxCoeff() == Approx(7.0).margin(1e-12));
  const auto ev = sorted_eigenvalues(build_coupling_matrix(s));
  CHECK(ev.back() == Approx(7.0).margin(1e-10));
}

TEST_CASE("bases are orthonormal eigenbases of V", "[lattice]") {
  for (int dim : {1, 2}) {
    for (int n : {2, 3, 4, 5, 8, 16, 32}) {
      if (dim == 2 && n > 16) continue;
      LatticeSpec s;
      s.dim = dim;
      s.sites = n;
      s.mass = 0.7;
      const auto d = dispersion(s);
      const RealMatrix v = build_coupling_matrix(s);
      const auto m = static_cast<Eigen::Index>(s.mode_count());
      INFO("dim=" << dim << " N=" << n);
      CHECK((d.plane_wave_basis.adjoint() * d.plane_wave_basis - ComplexMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((d.real_basis * d.real_basis.transpose() - RealMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
      const ComplexMatrix ve = v.cast<cplx>() * d.plane_wave_basis;
      const RealVector w2 = d.omegas.array().square();
      double residual = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        residual = std::max(residual, (ve.col(k) - w2(k) * d.plane_wave_basis.col(k)).norm());
      }
      CHECK(residual < 1e-10);
      const RealMatrix diag = d.real_basis * v * d.real_basis.transpose();
      CHECK((diag - RealMatrix(w2.asDiagonal())).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("formula matches the eigensolver as sorted multisets", "[lattice]") {
  for (int n = 2; n <= 64; ++n) {
    for (double m : {0.5, 1.0, 2.0}) {
      const auto s = chain(n, m);
      const auto a = sorted_formula(s);
      const auto b = sorted_eigenvalues(build_coupling_matrix(s));
      for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) < 1e-10);
    }
  }
  LatticeSpec s;
  s.dim = 2;
  s.sites = 12;
  s.mass = 0.5;
  const auto a = sorted_formula(s);
  const auto b = sorted_eigenvalues(build_coupling_matrix(s));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("massless chain uses the 1/N shift and stays invertible", "[lattice]") {
  for (int n : {4, 10, 33}) {
    const auto s = chain(n, 0.0);
    CHECK(s.effective_mass() == Approx(1.0 / n));
    const RealVector w = dispersion_omegas(s);
    CHECK(w.minCoeff() > 0.0);
    const auto ev = sorted_eigenvalues(build_coupling_matrix(s));
    CHECK(ev.front() == Approx(1.0 / (n * n)).margin(1e-12));
  }
}

TEST_CASE("green function at omega = 0 is i V^-1", "[lattice][green]") {
  const auto s = chain(5, 1.3);
  const RealMatrix v = build_coupling_matrix(s);
  const ComplexMatrix g = free_green_function(s, 0.0);
  const ComplexMatrix expected = kI * v.inverse().cast<cplx>();
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("green function: matrix inverse and spectral sum agree", "[lattice][green]") {
  const auto s = chain(6, 0.8);
  const auto d = dispersion(s);
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> dist(0.0, 2.5);
  int tested = 0;
  while (tested < 100) {
    const double omega = dist(rng);
    if ((d.omegas.array().square() - omega * omega).abs().minCoeff() < 1e-3) continue;
    const ComplexMatrix direct = free_green_function(s, omega);
    const ComplexMatrix spectral = green_spectral(d, omega);
    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    REQUIRE((direct - spectral).cwiseAbs().maxCoeff() / scale < 1e-10);
    ++tested;
  }
}

TEST_CASE("green function diverges as 1/|omega^2 - omega_k^2| near a pole", "[lattice][green]") {
  const auto s = chain(4, 1.0);  // omega^2 = 3 is a pole
  std::vector<double> xs, ys;
  for (double eps : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    const double omega = std::sqrt(3.0 + eps);
    const double norm = free_green_function(s, omega).norm();
    xs.push_back(std::log(eps));
    ys.push_back(std::log(norm));
  }
  // least-squares slope of log ||G|| against log eps
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == Approx(-1.0).margin(0.02));
  CHECK_THROWS_AS(free_green_function(s, std::sqrt(3.0)), PoleProximity);
}
