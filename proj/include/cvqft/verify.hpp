#pragma once

// The acceptance suite: nine numbered checks, each a pure function that
// returns its measured numbers and a verdict. The summary JSON carries no
// timings or host data, so it is reproducible byte for byte.

#include "cvqft/fock.hpp"
#include "cvqft/io.hpp"
#include "cvqft/lattice.hpp"
#include "cvqft/photon_subtraction.hpp"
#include "cvqft/renorm.hpp"
#include "cvqft/scattering.hpp"
#include "cvqft/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace cvqft {

struct CheckResult {
  int id = 0;
  std::string group;
  std::string title;
  bool passed = false;
  std::string detail;
  json metrics = json::object();
};

struct VerifyOptions {
  /// Comma-separated check ids or group names (substring match); empty runs all.
  std::string filter;
  DeltaMassSign dm_sign = DeltaMassSign::Cancelling;
};

struct CheckInfo {
  int id;
  const char* group;
  const char* title;
};

inline const std::vector<CheckInfo>& check_catalogue() {
  static const std::vector<CheckInfo> list{
      {1, "dispersion", "coupling-matrix eigenvalues match the dispersion formula"},
      {2, "decomposition", "N=4 rotation product and squeezer signs"},
      {3, "synthesis", "ground circuit round-trip and gate-count scaling"},
      {4, "ground-state", "truncated Fock ground state occupations and gaps"},
      {5, "photon-subtraction", "heralded single photon fidelity"},
      {6, "renorm", "mass shift, C_d constants and counter-term sign"},
      {7, "trotter", "splitting order against the exact slice oracle"},
      {8, "free-theory", "free evolution is diagonal in the particle basis"},
      {9, "determinism", "repeated runs give identical summaries"},
  };
  return list;
}

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline std::string fixed(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

/// Least-squares slope of log y against log x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline LatticeSpec chain(int sites, double mass, double lambda = 0.0) {
  LatticeSpec s;
  s.sites = sites;
  s.mass = mass;
  s.lambda = lambda;
  return s;
}

inline bool selected(const CheckInfo& info, const std::string& filter) {
  if (filter.empty()) return true;
  std::stringstream in(filter);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    if (token == std::to_string(info.id)) return true;
    if (std::string(info.group).find(token) != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

inline CheckResult check_dispersion() {
  CheckResult r;
  double worst = 0.0;
  for (int n = 2; n <= 64; ++n) {
    for (double m : {0.5, 1.0, 2.0}) {
      const RealMatrix v = build_coupling_matrix(detail::chain(n, m));
      RealVector eig = Eigen::SelfAdjointEigenSolver<RealMatrix>(v, Eigen::EigenvaluesOnly).eigenvalues();
      std::vector<double> got(eig.data(), eig.data() + eig.size());
      std::vector<double> want;
      for (int k = 0; k < n; ++k) {
        const double s = std::sin(k * std::numbers::pi / n);
        want.push_back(m * m + 4.0 * s * s);
      }
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  r.passed = worst < 1e-10;
  r.metrics = {{"max_abs_error", worst}, {"tolerance", 1e-10}};
  r.detail = "max |eig(V) - (m^2 + 4 sin^2(n pi/N))| = " + detail::sci(worst) + " over N=2..64, m in {0.5,1,2}";
  return r;
}

/// The printed N=4 cos/sin rotation, rows (uniform, cos 1, alternating, sin 1).
inline RealMatrix printed_n4_rotation() {
  const double h = std::numbers::sqrt2;
  RealMatrix o(4, 4);
  o << 1, 1, 1, 1, h, 0, -h, 0, 1, -1, 1, -1, 0, h, 0, -h;
  return 0.5 * o;
}

inline CheckResult check_decomposition() {
  CheckResult r;
  const double q = std::numbers::pi / 4.0;
  // R02(pi/4) S01 R13(pi/4) R02(pi/4) as an operator product: the rightmost
  // factor acts first.
  const GaussianCircuit product{4, {TwoModeRotation{0, 2, q}, TwoModeRotation{1, 3, q}, Swap{0, 1},
                                    TwoModeRotation{0, 2, q}}};
  const BogoliubovTransform t = circuit_to_bogoliubov(product);
  const RealMatrix o = printed_n4_rotation();
  const double product_error = (t.alpha - o.cast<cplx>()).cwiseAbs().maxCoeff();
  const double product_det = t.alpha.real().determinant();

  const auto disp = dispersion(detail::chain(4, 1.0));
  const double basis_error = (disp.real_basis - o).cwiseAbs().maxCoeff();
  const auto res = synthesize_ground_circuit(disp);
  const double r1 = res.squeeze_r[1];
  const double r3 = res.squeeze_r[3];

  const bool product_ok = product_error < 1e-12;
  const bool squeeze_ok = r3 == -r1 && r1 != 0.0;
  r.passed = product_ok && squeeze_ok && basis_error < 1e-12;
  r.metrics = {{"product_max_error", product_error},
               {"product_determinant", product_det},
               {"printed_determinant", o.determinant()},
               {"real_basis_max_error", basis_error},
               {"synthesized_rotation_residual", res.residual},
               {"r1", r1},
               {"r3", r3}};
  r.detail = "product vs printed O: max error " + detail::sci(product_error) + " (det " +
             detail::fixed(product_det, 1) + " vs " + detail::fixed(o.determinant(), 1) + ")" +
             (product_ok ? "" : " FAIL") + "; r3 = -r1: " + (squeeze_ok ? "yes" : "no") + " (r1 = " +
             detail::fixed(r1, 6) + ")";
  return r;
}

inline CheckResult check_synthesis() {
  CheckResult r;
  double worst = 0.0;
  for (int n : {2, 3, 4, 6, 8, 16}) {
    worst = std::max(worst, synthesize_ground_circuit(dispersion(detail::chain(n, 1.0))).residual);
  }
  std::vector<double> ns, counts;
  for (int n = 4; n <= 64; ++n) {
    ns.push_back(n);
    counts.push_back(static_cast<double>(synthesize_ground_circuit(dispersion(detail::chain(n, 1.0))).circuit.gates.size()));
  }
  const double slope = detail::log_slope(ns, counts);
  r.passed = worst < 1e-9 && slope <= 2.1;
  r.metrics = {{"max_residual", worst}, {"gate_count_exponent", slope}, {"gates_at_64", counts.back()}};
  r.detail = "max round-trip residual " + detail::sci(worst) + " (N in {2,3,4,6,8,16}); gate-count exponent " +
             detail::fixed(slope, 3) + " over N=4..64";
  return r;
}

inline CheckResult check_ground_state() {
  CheckResult r;
  constexpr std::size_t cutoff = 10;
  double worst_occ = 0.0;
  double worst_gap = 0.0;
  json cases = json::array();
  for (int n : {2, 3, 4}) {
    for (double m : {1.0, 2.0}) {
      const auto spec = detail::chain(n, m);
      const auto disp = dispersion(spec);
      const auto res = synthesize_ground_circuit(disp);
      const auto target = target_bogoliubov(disp);
      FockState omega = vacuum(res.circuit.mode_count, cutoff);
      apply_circuit_adjoint(omega, res.circuit);
      const double occ = bogoliubov_occupations(omega, target).maxCoeff();
      const double e0 = free_energy_expectation(omega, spec);
      double gap = 0.0;
      for (std::size_t k = 0; k < res.circuit.mode_count; ++k) {
        FockState one = vacuum(res.circuit.mode_count, cutoff);
        create_single_photon(one, k);
        apply_circuit_adjoint(one, res.circuit);
        gap = std::max(gap, std::abs(free_energy_expectation(one, spec) - e0 - disp.omegas(static_cast<Eigen::Index>(k))));
      }
      worst_occ = std::max(worst_occ, occ);
      worst_gap = std::max(worst_gap, gap);
      cases.push_back({{"sites", n}, {"mass", m}, {"max_occupation", occ}, {"max_gap_error", gap}});
    }
  }
  const bool occ_ok = worst_occ < 1e-3;
  const bool gap_ok = worst_gap < 1e-3;
  r.passed = occ_ok && gap_ok;
  r.metrics = {{"cutoff", cutoff}, {"max_occupation", worst_occ}, {"max_gap_error", worst_gap}, {"cases", cases}};
  r.detail = "D=10: max <a^dagger a> = " + detail::sci(worst_occ) + (occ_ok ? "" : " FAIL") +
             "; max |E_k - E_0 - omega_k| = " + detail::sci(worst_gap) + (gap_ok ? "" : " FAIL") + " (limit 1e-3)";
  return r;
}

inline CheckResult check_photon_subtraction() {
  CheckResult r;
  std::vector<double> fid, infid;
  for (std::size_t d : {10u, 20u, 30u}) {
    const auto p = photon_subtraction_protocol(0.2, 0.1, d);
    fid.push_back(p.fidelity);
    infid.push_back(p.infidelity);
  }
  const bool monotone = fid[0] <= fid[1] && fid[1] <= fid[2];
  r.passed = fid[2] > 0.999 && monotone;
  r.metrics = {{"transmittance", matched_transmittance(0.2, 0.1)},
               {"fidelity", fid},
               {"infidelity", infid},
               {"cutoffs", {10, 20, 30}}};
  r.detail = "T = " + detail::fixed(matched_transmittance(0.2, 0.1), 6) + "; 1 - fidelity at D=10,20,30: " +
             detail::sci(infid[0]) + ", " + detail::sci(infid[1]) + ", " + detail::sci(infid[2]) +
             (monotone ? "" : " (not monotone)");
  return r;
}

inline CheckResult check_renorm(DeltaMassSign sign) {
  CheckResult r;
  const double discrete = sigma_discrete(detail::chain(1000000, 0.01, 1.0));
  const double continuum = sigma_continuum(0.01, 1.0, 1);
  const double rel = std::abs(discrete - continuum) / continuum;
  const double c2 = c_d_constant(2);
  const double c3 = c_d_constant(3);

  // On the plateau the physical mass must come out as m^2 + delta_m = m^2 - Sigma.
  const double m = 0.5, lambda = 0.1;
  const auto schedule = coupling_schedule(1.0, 0.5, 0.1, lambda, m, 1, sign);
  const double sigma = sigma_continuum(m, lambda, 1);
  const double sign_error = std::abs(schedule.delta_m_at(0.0) + sigma) / sigma;

  const bool a_ok = rel < 0.02;
  const bool b_ok = std::abs(c2 - 0.16) <= 0.01 && std::abs(c3 - 0.11) <= 0.01;
  const bool c_ok = sign_error < 1e-12;
  r.passed = a_ok && b_ok && c_ok;
  r.metrics = {{"sigma_discrete", discrete}, {"sigma_continuum", continuum}, {"relative_gap", rel},
               {"c2", c2},           {"c3", c3},                   {"plateau_delta_m", schedule.delta_m_at(0.0)},
               {"plateau_sigma", sigma}};
  r.detail = "Sigma(N=1e6) rel. gap " + detail::sci(rel) + (a_ok ? "" : " FAIL") + "; C2 = " + detail::fixed(c2) +
             ", C3 = " + detail::fixed(c3) + (b_ok ? "" : " FAIL") + "; counter-term sign " + (c_ok ? "ok" : "WRONG");
  return r;
}

inline CheckResult check_trotter() {
  CheckResult r;
  auto spec_for = [](double dt, int order) {
    ScatteringSpec s;
    s.lattice = detail::chain(2, 1.0, 0.1);
    s.in_modes = {0, 0};
    s.out_modes = {1, 1};
    s.cutoff = 6;
    s.trotter_order = order;
    s.schedule = coupling_schedule(1.0, 0.5, dt, 0.1, 1.0);
    return s;
  };
  const std::vector<double> dts{0.1, 0.05, 0.025};
  json errors = json::object();
  double order[2] = {0.0, 0.0};
  for (int o : {1, 2}) {
    std::vector<double> errs;
    for (double dt : dts) {
      const ScatteringEngine e(spec_for(dt, o));
      errs.push_back(std::abs(e.run().amplitude - e.run_exact().amplitude));
    }
    order[o - 1] = detail::log_slope(dts, errs);
    errors["order" + std::to_string(o)] = errs;
  }
  r.passed = std::abs(order[0] - 1.0) <= 0.3 && std::abs(order[1] - 2.0) <= 0.3;
  r.metrics = {{"dt", dts}, {"errors", errors}, {"order_first", order[0]}, {"order_symmetric", order[1]}};
  r.detail = "(0,0)->(1,1) amplitude error order: first-order " + detail::fixed(order[0], 3) + ", symmetric " +
             detail::fixed(order[1], 3);
  return r;
}

inline CheckResult check_free_theory() {
  CheckResult r;
  ScatteringSpec s;
  s.lattice = detail::chain(2, 1.0, 0.0);
  s.in_modes = {1};
  s.out_modes = {1};
  s.cutoff = 10;
  s.schedule = coupling_schedule(1.0, 0.5, 0.1, 0.0, 1.0);
  const ScatteringEngine same(s);
  const AmplitudeResult res = same.run();
  double total = res.leakage;
  for (const auto& x : res.distribution) total += x.probability;
  s.out_modes = {1, 0};
  const double other = std::abs(scattering_amplitude(s).amplitude);
  const double modulus = std::abs(res.amplitude);

  r.passed = std::abs(modulus - 1.0) <= 1e-3 && other < 1e-6 && std::abs(total - 1.0) <= 1e-6;
  r.metrics = {{"amplitude_modulus", modulus}, {"other_number_amplitude", other}, {"probability_plus_leakage", total}};
  r.detail = "|A(out=in)| = " + detail::fixed(modulus, 6) + ", |A(other number)| = " + detail::sci(other) +
             ", sum p + leakage - 1 = " + detail::sci(total - 1.0);
  return r;
}

inline CheckResult run_check(int id, const VerifyOptions& options) {
  CheckResult r;
  switch (id) {
    case 1: r = check_dispersion(); break;
    case 2: r = check_decomposition(); break;
    case 3: r = check_synthesis(); break;
    case 4: r = check_ground_state(); break;
    case 5: r = check_photon_subtraction(); break;
    case 6: r = check_renorm(options.dm_sign); break;
    case 7: r = check_trotter(); break;
    case 8: r = check_free_theory(); break;
    default: throw ValidationError("no check with id " + std::to_string(id));
  }
  const auto& info = check_catalogue()[static_cast<std::size_t>(id - 1)];
  r.id = id;
  r.group = info.group;
  r.title = info.title;
  return r;
}

inline json check_to_json(const CheckResult& r) {
  return json{{"id", r.id}, {"group", r.group}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail},
              {"metrics", r.metrics}};
}

inline json summary_to_json(const std::vector<CheckResult>& checks, const VerifyOptions& options) {
  json list = json::array();
  int failed = 0;
  for (const auto& c : checks) {
    list.push_back(check_to_json(c));
    if (!c.passed) ++failed;
  }
  return json{{"filter", options.filter},
              {"dm_sign", options.dm_sign == DeltaMassSign::Cancelling ? "appendix" : "section4"},
              {"checks", std::move(list)},
              {"total", checks.size()},
              {"passed", static_cast<int>(checks.size()) - failed},
              {"failed", failed},
              {"all_passed", failed == 0}};
}

/// Ids selected by the filter, in order.
inline std::vector<int> selected_checks(const VerifyOptions& options) {
  std::vector<int> ids;
  for (const auto& info : check_catalogue()) {
    if (detail::selected(info, options.filter)) ids.push_back(info.id);
  }
  return ids;
}

/// Check 9: serialize the other selected checks twice and compare the bytes.
inline CheckResult check_determinism(const std::vector<CheckResult>& first, const VerifyOptions& options) {
  std::vector<CheckResult> second;
  for (const auto& c : first) second.push_back(run_check(c.id, options));
  const std::string a = summary_to_json(first, options).dump(2);
  const std::string b = summary_to_json(second, options).dump(2);
  CheckResult r;
  r.id = 9;
  r.group = check_catalogue()[8].group;
  r.title = check_catalogue()[8].title;
  r.passed = a == b;
  r.metrics = {{"bytes", a.size()}, {"checks_compared", first.size()}};
  r.detail = std::to_string(first.size()) + " checks re-run, " + std::to_string(a.size()) + " bytes " +
             (r.passed ? "identical" : "DIFFER");
  return r;
}

/// One line per check: "[PASS] 3 synthesis: ...".
inline std::string format_check_line(const CheckResult& r) {
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.group + ": " + r.detail;
}

}  // namespace cvqft
