#pragma once

// Command-line front end. `run_cli` parses arguments, dispatches one
// subcommand and returns the process exit code:
//   0 success, 1 acceptance failure, 2 usage or configuration error.
// Results go to --out (or the config's "out", or `out`); notes and
// summaries go to `err`.

#include "cvqft/errors.hpp"
#include "cvqft/fock.hpp"
#include "cvqft/io.hpp"
#include "cvqft/lattice.hpp"
#include "cvqft/renorm.hpp"
#include "cvqft/scattering.hpp"
#include "cvqft/synthesis.hpp"
#include "cvqft/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cvqft {

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Values gathered from the command line; unset ones leave the config alone.
struct Overrides {
  std::string config_path;
  std::string out_path;
  std::string format;
  bool oracle = false;
  int trotter_order = 0;
  bool subtract_vacuum_energy = false;
  std::string dm_sign;
  std::string filter;
  std::string stage = "prepared";
};

inline std::string num(double x) { return json(x).dump(); }

inline std::string occupation_columns(std::size_t modes) {
  std::string s;
  for (std::size_t k = 0; k < modes; ++k) s += "n" + std::to_string(k) + ",";
  return s;
}

inline std::string occupation_cells(const std::vector<int>& occ) {
  std::string s;
  for (int n : occ) s += std::to_string(n) + ",";
  return s;
}

inline RunConfig load(const Overrides& o) {
  RunConfig c = load_config(o.config_path);
  if (!o.out_path.empty()) c.out = o.out_path;
  if (!o.format.empty()) c.format = o.format;
  if (o.trotter_order != 0) c.trotter_order = o.trotter_order;
  if (o.subtract_vacuum_energy) c.subtract_vacuum_energy = true;
  if (!o.dm_sign.empty()) c.dm_sign = o.dm_sign == "section4" ? DeltaMassSign::Additive : DeltaMassSign::Cancelling;
  return c;
}

inline void emit(const std::string& text, const std::optional<std::string>& path, std::ostream& out) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw ConfigError("out: cannot write '" + *path + "'");
  file << text;
}

inline void emit(const RunConfig& c, const json& j, const std::string& csv, std::ostream& out) {
  emit(c.format == "csv" ? csv : j.dump(2) + "\n", c.out, out);
}

inline json lattice_to_json(const LatticeSpec& s) {
  json j{{"dim", s.dim}, {"sites", s.sites}, {"mass", s.mass}, {"lambda", s.lambda}};
  if (s.zero_mode_shift) j["zero_mode_shift"] = *s.zero_mode_shift;
  if (s.drop_gradient_term) j["drop_gradient_term"] = true;
  return j;
}

inline int cmd_dispersion(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto disp = dispersion(c.lattice);
  const RealMatrix v = build_coupling_matrix(c.lattice);
  json modes = json::array();
  std::string csv = "k,omega_squared,omega,residual\n";
  for (std::size_t k = 0; k < c.lattice.mode_count(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const double w = disp.omegas(col);
    const ComplexVector e = disp.plane_wave_basis.col(col);
    const double residual = (v.cast<cplx>() * e - (w * w) * e).cwiseAbs().maxCoeff();
    modes.push_back({{"k", k}, {"coords", mode_coordinates(c.lattice, k)}, {"omega_squared", w * w}, {"omega", w},
                     {"residual", residual}});
    csv += std::to_string(k) + "," + num(w * w) + "," + num(w) + "," + num(residual) + "\n";
  }
  json j{{"lattice", lattice_to_json(c.lattice)}, {"effective_mass", c.lattice.effective_mass()}, {"modes", modes}};
  if (c.lattice.mass_shifted()) {
    const std::string note = "m = 0: zero mode regularized with m_eff = " + num(c.lattice.effective_mass());
    j["note"] = note;
    err << "note: " << note << "\n";
  }
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_synthesize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto res = synthesize_ground_circuit(dispersion(c.lattice));
  json j = circuit_to_json(res.circuit);
  j["summary"] = {{"gate_count", res.circuit.gates.size()},
                  {"rotation_gates", res.rotation_gates},
                  {"phase_gates", res.phase_gates},
                  {"squeeze_gates", res.squeeze_gates},
                  {"untangle_gates", res.untangle_gates},
                  {"residual", res.residual}};
  std::string csv = "index,gate,mode_a,mode_b,parameter\n";
  for (std::size_t i = 0; i < res.circuit.gates.size(); ++i) {
    const json g = gate_to_json(res.circuit.gates[i]);
    const auto& m = g["modes"];
    std::string param;
    for (const char* key : {"theta", "r", "phi"}) {
      if (g.contains(key)) param = num(g[key].get<double>());
    }
    csv += std::to_string(i) + "," + g["gate"].get<std::string>() + "," + m[0].dump() + "," +
           (m.size() > 1 ? m[1].dump() : "") + "," + param + "\n";
  }
  err << "gates: " << res.circuit.gates.size() << " (rotation " << res.rotation_gates << ", phase "
      << res.phase_gates << ", squeeze " << res.squeeze_gates << ", untangle " << res.untangle_gates
      << "); residual " << detail::sci(res.residual) << "\n";
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_ground_state(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto disp = dispersion(c.lattice);
  const auto res = synthesize_ground_circuit(disp);
  const auto target = target_bogoliubov(disp);
  const std::size_t m = res.circuit.mode_count;
  FockState omega = vacuum(m, c.cutoff);
  apply_circuit_adjoint(omega, res.circuit);
  const RealVector occ = bogoliubov_occupations(omega, target);
  const double e0 = free_energy_expectation(omega, c.lattice, c.subtract_vacuum_energy);

  json modes = json::array();
  std::string csv = "k,omega,occupation,energy_gap,gap_error\n";
  double worst_gap = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    FockState one = vacuum(m, c.cutoff);
    create_single_photon(one, k);
    apply_circuit_adjoint(one, res.circuit);
    const double w = disp.omegas(static_cast<Eigen::Index>(k));
    const double gap = free_energy_expectation(one, c.lattice, c.subtract_vacuum_energy) - e0;
    worst_gap = std::max(worst_gap, std::abs(gap - w));
    const double n = occ(static_cast<Eigen::Index>(k));
    modes.push_back({{"k", k}, {"omega", w}, {"occupation", n}, {"energy_gap", gap}, {"gap_error", gap - w}});
    csv += std::to_string(k) + "," + num(w) + "," + num(n) + "," + num(gap) + "," + num(gap - w) + "\n";
  }
  const json j{{"lattice", lattice_to_json(c.lattice)},
               {"cutoff", c.cutoff},
               {"dimension", omega.dimension()},
               {"leakage", omega.leakage},
               {"vacuum_energy", e0},
               {"max_occupation", occ.maxCoeff()},
               {"max_gap_error", worst_gap},
               {"modes", modes}};
  err << "D=" << c.cutoff << ": max occupation " << detail::sci(occ.maxCoeff()) << ", max gap error "
      << detail::sci(worst_gap) << ", leakage " << detail::sci(omega.leakage) << "\n";
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_renorm(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto schedule = c.schedule();
  const double discrete = sigma_discrete(c.lattice);
  const double continuum = sigma_continuum(c.lattice.effective_mass(), c.lattice.lambda, c.lattice.dim);
  json j{{"lattice", lattice_to_json(c.lattice)},
         {"sigma_discrete", discrete},
         {"sigma_continuum", continuum},
         {"bare_mass_squared", bare_mass(c.lattice)},
         {"dm_sign", c.dm_sign == DeltaMassSign::Cancelling ? "appendix" : "section4"}};
  if (c.lattice.dim > 1) j["c_d"] = c_d_constant(c.lattice.dim);
  json samples = json::array();
  std::string csv = "t,lambda,delta_m\n";
  for (const auto& s : schedule.samples) {
    samples.push_back({{"t", s.t}, {"lambda", s.lambda}, {"delta_m", s.delta_m}});
    csv += num(s.t) + "," + num(s.lambda) + "," + num(s.delta_m) + "\n";
  }
  j["schedule"] = {{"total", schedule.total}, {"plateau", schedule.plateau}, {"dt", schedule.dt},
                   {"steps", schedule.steps()}, {"samples", samples}};
  err << "Sigma: discrete " << num(discrete) << ", continuum " << num(continuum) << "; m0^2 = "
      << num(bare_mass(c.lattice)) << "\n";
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_scatter(const RunConfig& c, bool oracle, std::ostream& out, std::ostream& err) {
  const ScatteringSpec spec = c.scattering_spec();
  const ScatteringEngine engine(spec);
  const AmplitudeResult r = engine.run();
  json j = result_to_json(r, c.distribution_threshold);
  j["meta"]["trotter_order"] = c.trotter_order;
  j["meta"]["dt"] = c.dt;
  j["meta"]["subtract_vacuum_energy"] = c.subtract_vacuum_energy;
  j["meta"]["conjugate_exponent"] = c.conjugate_exponent;
  j["meta"]["dm_sign"] = c.dm_sign == DeltaMassSign::Cancelling ? "appendix" : "section4";
  err << "amplitude " << num(r.amplitude.real()) << (r.amplitude.imag() < 0 ? " - " : " + ")
      << num(std::abs(r.amplitude.imag())) << "i, |A| = " << num(std::abs(r.amplitude)) << "\n";
  if (oracle) {
    const cplx exact = engine.run_exact().amplitude;
    RunConfig half = c;
    half.dt = 0.5 * c.dt;
    const ScatteringEngine fine(half.scattering_spec());
    const double error = std::abs(r.amplitude - exact);
    const double error_half = std::abs(fine.run().amplitude - fine.run_exact().amplitude);
    j["oracle"] = {{"amplitude", complex_to_json(exact)},
                   {"error", error},
                   {"error_half_dt", error_half},
                   {"ratio", error / error_half},
                   {"observed_order", std::log2(error / error_half)}};
    err << "oracle error " << detail::sci(error) << ", at dt/2 " << detail::sci(error_half) << ", ratio "
        << detail::fixed(error / error_half, 3) << "\n";
  }
  std::string csv = occupation_columns(spec.lattice.mode_count()) + "p\n";
  for (const auto& x : r.distribution) {
    if (x.probability >= c.distribution_threshold && x.probability > 0.0) {
      csv += occupation_cells(x.occupation) + num(x.probability) + "\n";
    }
  }
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_dump_state(const RunConfig& c, const std::string& stage, std::ostream& out, std::ostream& err) {
  const ScatteringEngine engine(c.scattering_spec());
  FockState s = engine.prepare_in_state();
  if (stage == "evolved" || stage == "final") engine.trotter_evolve(s);
  if (stage == "final") apply_circuit(s, engine.synthesis().circuit);
  json j = state_to_json(s);
  j["stage"] = stage;
  std::string csv = "index," + occupation_columns(s.mode_count) + "re,im\n";
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    const cplx a = s.amplitudes(static_cast<Eigen::Index>(idx));
    if (a == cplx(0.0)) continue;
    csv += std::to_string(idx) + "," + occupation_cells(s.occupation(idx)) + num(a.real()) + "," + num(a.imag()) + "\n";
  }
  err << stage << " state: dimension " << s.dimension() << ", norm^2 " << num(s.norm_squared()) << ", leakage "
      << detail::sci(s.leakage) << "\n";
  emit(c, j, csv, out);
  return kExitOk;
}

inline int cmd_verify(const Overrides& o, std::ostream& out, std::ostream& err) {
  VerifyOptions options;
  options.filter = o.filter;
  std::optional<std::string> path;
  if (!o.config_path.empty()) {
    const RunConfig c = load(o);
    options.dm_sign = c.dm_sign;
    path = c.out;
  } else {
    if (o.dm_sign == "section4") options.dm_sign = DeltaMassSign::Additive;
    if (!o.out_path.empty()) path = o.out_path;
  }
  if (o.format == "csv") throw ConfigError("format: verify writes JSON only");
  const auto ids = selected_checks(options);
  if (ids.empty()) throw ConfigError("filter: no check matches \"" + options.filter + "\"");

  std::vector<CheckResult> results;
  std::vector<CheckResult> others;
  for (int id : ids) {
    CheckResult r = id == 9 ? check_determinism(others, options) : run_check(id, options);
    err << format_check_line(r) << "\n";
    if (id != 9) others.push_back(r);
    results.push_back(std::move(r));
  }
  const json summary = summary_to_json(results, options);
  emit(summary.dump(2) + "\n", path, out);
  return summary["all_passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli;
  CLI::App app{"Lattice scalar field scattering on simulated continuous-variable hardware", "cvqft"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config_path, "JSON run configuration");
    if (config_required) opt->required();
    opt->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_path, "write the result here instead of stdout");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_physics = [&](CLI::App* sub) {
    sub->add_option("--trotter-order", o.trotter_order, "1 (first order) or 2 (symmetric)")
        ->check(CLI::IsMember({1, 2}));
    sub->add_flag("--subtract-vacuum-energy", o.subtract_vacuum_energy, "drop the sum omega_k / 2 from H0");
  };
  auto add_sign = [&](CLI::App* sub) {
    sub->add_option("--dm-sign", o.dm_sign, "counter-term sign: appendix (-Sigma) or section4 (+Sigma)")
        ->check(CLI::IsMember({"appendix", "section4"}));
  };

  auto* dispersion_cmd = app.add_subcommand("dispersion", "normal-mode frequencies and eigen-residuals");
  add_common(dispersion_cmd, true);
  auto* synth_cmd = app.add_subcommand("synthesize", "ground-state Gaussian circuit as a gate list");
  add_common(synth_cmd, true);
  auto* ground_cmd = app.add_subcommand("ground-state", "prepared vacuum occupations and single-particle gaps");
  add_common(ground_cmd, true);
  ground_cmd->add_flag("--subtract-vacuum-energy", o.subtract_vacuum_energy, "drop the sum omega_k / 2 from H0");
  auto* renorm_cmd = app.add_subcommand("renorm", "mass shift, bare mass and coupling schedule");
  add_common(renorm_cmd, true);
  add_sign(renorm_cmd);
  auto* scatter_cmd = app.add_subcommand("scatter", "scattering amplitude for the configured in/out states");
  add_common(scatter_cmd, true);
  add_physics(scatter_cmd);
  add_sign(scatter_cmd);
  scatter_cmd->add_flag("--oracle", o.oracle, "compare with the exact slice oracle at dt and dt/2");
  auto* dump_cmd = app.add_subcommand("dump-state", "amplitudes of the state at one pipeline stage");
  add_common(dump_cmd, true);
  add_physics(dump_cmd);
  add_sign(dump_cmd);
  dump_cmd->add_option("--stage", o.stage, "prepared, evolved or final")
      ->check(CLI::IsMember({"prepared", "evolved", "final"}));
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
  add_common(verify_cmd, false);
  add_sign(verify_cmd);
  verify_cmd->add_option("--filter", o.filter, "comma-separated check ids or group names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(o, out, err);
    const RunConfig c = load(o);
    if (dispersion_cmd->parsed()) return cmd_dispersion(c, out, err);
    if (synth_cmd->parsed()) return cmd_synthesize(c, out, err);
    if (ground_cmd->parsed()) return cmd_ground_state(c, out, err);
    if (renorm_cmd->parsed()) return cmd_renorm(c, out, err);
    if (scatter_cmd->parsed()) return cmd_scatter(c, o.oracle, out, err);
    if (dump_cmd->parsed()) return cmd_dump_state(c, o.stage, out, err);
  } catch (const MemoryGuard& e) {
    err << "error: cutoff: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cvqft
