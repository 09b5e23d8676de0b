#pragma once

// JSON serialization of circuits, matrices, states and amplitude results,
// and the strict run-configuration reader used by the command-line tool.
//
// Doubles are written by nlohmann::json in shortest round-trip form, so a
// circuit read back from its own output is bit-identical.

#include "cvqft/errors.hpp"
#include "cvqft/fock.hpp"
#include "cvqft/gates.hpp"
#include "cvqft/renorm.hpp"
#include "cvqft/scattering.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cvqft {

using json = nlohmann::json;

inline json complex_to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json gate_to_json(const GaussianGate& g) {
  json j;
  j["gate"] = gate_name(g);
  j["modes"] = gate_modes(g);
  if (const auto* r = std::get_if<TwoModeRotation>(&g)) j["theta"] = r->theta;
  if (const auto* s = std::get_if<Squeeze>(&g)) j["r"] = s->r;
  if (const auto* p = std::get_if<PhaseShift>(&g)) j["phi"] = p->phi;
  return j;
}

inline json circuit_to_json(const GaussianCircuit& c) {
  json gates = json::array();
  for (const auto& g : c.gates) gates.push_back(gate_to_json(g));
  return json{{"mode_count", c.mode_count}, {"gates", std::move(gates)}};
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline json matrix_to_json(const RealMatrix& m) { return matrix_to_json(ComplexMatrix(m.cast<cplx>())); }

inline json bogoliubov_to_json(const BogoliubovTransform& t) {
  return json{{"alpha", matrix_to_json(t.alpha)}, {"beta", matrix_to_json(t.beta)}};
}

/// Amplitudes with |a| > threshold, in basis-index order.
inline json state_to_json(const FockState& s, double threshold = 0.0) {
  json amps = json::array();
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    const cplx a = s.amplitudes(static_cast<Eigen::Index>(idx));
    if (!(std::abs(a) > threshold)) continue;
    amps.push_back(json{{"index", idx}, {"occ", s.occupation(idx)}, {"re", a.real()}, {"im", a.imag()}});
  }
  return json{{"mode_count", s.mode_count},
              {"cutoff", s.cutoff},
              {"dimension", s.dimension()},
              {"leakage", s.leakage},
              {"norm_squared", s.norm_squared()},
              {"amplitudes", std::move(amps)}};
}

inline json result_to_json(const AmplitudeResult& r, double threshold = 0.0) {
  json dist = json::array();
  double total = 0.0;
  for (const auto& x : r.distribution) {
    total += x.probability;
    if (x.probability >= threshold && x.probability > 0.0) dist.push_back(json{{"occ", x.occupation}, {"p", x.probability}});
  }
  return json{{"amplitude", complex_to_json(r.amplitude)},
              {"leakage", r.leakage},
              {"distribution", std::move(dist)},
              {"meta",
               {{"steps", r.steps},
                {"cutoff", r.cutoff},
                {"dimension", r.dimension},
                {"norm_squared", r.norm_squared},
                {"distribution_total", total},
                {"distribution_threshold", threshold}}}};
}

namespace detail {

/// Walks one JSON object, rejecting unknown keys and reporting every problem
/// with the dotted path of the offending field.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; });
      if (!known) fail(field(it.key()), "unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  ConfigReader child(const std::string& key) const {
    static const json empty = json::object();
    return has(key) ? ConfigReader(j_.at(key), field(key)) : ConfigReader(empty, field(key));
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field(key), "must be finite");
    return x;
  }

  long long integer(const std::string& key, long long fallback, long long lo, long long hi) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
      fail(field(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
    }
    return x;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) fail(field(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<const char*> options) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) fail(field(key), "expected a string");
    const auto s = j_.at(key).get<std::string>();
    std::string list;
    for (const char* o : options) {
      if (s == o) return s;
      list += list.empty() ? o : std::string(", ") + o;
    }
    fail(field(key), "must be one of {" + list + "}, got \"" + s + "\"");
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!j_.at(key).is_string()) fail(field(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<std::size_t> index_list(const std::string& key) const {
    std::vector<std::size_t> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of mode indices");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string where = field(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_number_integer() || v[i].get<long long>() < 0) fail(where, "expected a non-negative integer");
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

}  // namespace detail

inline GaussianGate gate_from_json(const json& j, const std::string& path = "gate") {
  const detail::ConfigReader r(j, path);
  r.allow({"gate", "modes", "theta", "r", "phi"});
  if (!r.has("gate")) detail::ConfigReader::fail(r.field("gate"), "missing");
  const auto name = r.choice("gate", "", {"rot", "swap", "squeeze", "pairmix", "phase"});
  const auto modes = r.index_list("modes");
  const bool single = name == "squeeze" || name == "phase";
  if (modes.size() != (single ? 1u : 2u)) {
    detail::ConfigReader::fail(r.field("modes"), "expected " + std::string(single ? "1" : "2") + " mode indices");
  }
  auto need = [&](const char* key) {
    if (!r.has(key)) detail::ConfigReader::fail(r.field(key), "missing");
    return r.number(key, 0.0);
  };
  if (name == "rot") return TwoModeRotation{modes[0], modes[1], need("theta")};
  if (name == "swap") return Swap{modes[0], modes[1]};
  if (name == "squeeze") return Squeeze{modes[0], need("r")};
  if (name == "pairmix") return PairMix{modes[0], modes[1]};
  return PhaseShift{modes[0], need("phi")};
}

inline GaussianCircuit circuit_from_json(const json& j) {
  const detail::ConfigReader r(j, "");
  r.allow({"mode_count", "gates"});
  GaussianCircuit c;
  c.mode_count = static_cast<std::size_t>(r.integer("mode_count", 0, 1, std::numeric_limits<int>::max()));
  if (!j.contains("gates") || !j.at("gates").is_array()) detail::ConfigReader::fail("gates", "expected an array");
  for (std::size_t i = 0; i < j.at("gates").size(); ++i) {
    c.gates.push_back(gate_from_json(j.at("gates")[i], "gates[" + std::to_string(i) + "]"));
  }
  c.validate();
  return c;
}

/// Everything a single command-line run needs. Mirrors ScatteringSpec with
/// the schedule given by its parameters rather than its samples.
struct RunConfig {
  LatticeSpec lattice;
  std::vector<std::size_t> in_modes;
  std::vector<std::size_t> out_modes;
  std::size_t cutoff = 8;
  double total = 1.0;
  double plateau = 0.5;
  double dt = 0.1;
  DeltaMassSign dm_sign = DeltaMassSign::Cancelling;
  int trotter_order = 1;
  bool subtract_vacuum_energy = false;
  bool conjugate_exponent = false;
  double phase_guard = kDefaultPhaseGuard;
  std::optional<std::string> out;
  std::string format = "json";
  int verbosity = 0;
  /// Reserved; nothing on the main path is random.
  long long seed = 0;
  double distribution_threshold = 1e-12;

  CouplingSchedule schedule() const {
    return coupling_schedule(total, plateau, dt, lattice.lambda, lattice.effective_mass(), lattice.dim, dm_sign);
  }

  ScatteringSpec scattering_spec() const {
    ScatteringSpec s;
    s.lattice = lattice;
    s.in_modes = in_modes;
    s.out_modes = out_modes;
    s.schedule = schedule();
    s.cutoff = cutoff;
    s.subtract_vacuum_energy = subtract_vacuum_energy;
    s.trotter_order = trotter_order;
    s.conjugate_exponent = conjugate_exponent;
    s.phase_guard = phase_guard;
    return s;
  }

  /// Cross-field checks, reported against the field a user would edit.
  void validate() const {
    using detail::ConfigReader;
    const std::size_t m = lattice.mode_count();
    for (const auto* list : {&in_modes, &out_modes}) {
      const char* name = list == &in_modes ? "in_modes" : "out_modes";
      std::vector<std::size_t> count(m, 0);
      for (std::size_t i = 0; i < list->size(); ++i) {
        const std::size_t k = (*list)[i];
        const std::string where = std::string(name) + "[" + std::to_string(i) + "]";
        if (k >= m) ConfigReader::fail(where, "mode " + std::to_string(k) + " out of range for " + std::to_string(m) + " modes");
        if (++count[k] > cutoff) ConfigReader::fail(name, "more particles in mode " + std::to_string(k) + " than cutoff " + std::to_string(cutoff));
      }
    }
    if (!(plateau > 0.0 && plateau < total)) ConfigReader::fail("schedule.plateau", "need 0 < plateau < total");
    const double ratio = 2.0 * total / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      ConfigReader::fail("schedule.dt", "must divide 2 * total");
    }
  }
};

inline RunConfig parse_config(const json& j) {
  using detail::ConfigReader;
  const ConfigReader root(j, "");
  root.allow({"lattice", "in_modes", "out_modes", "cutoff", "schedule", "trotter_order", "subtract_vacuum_energy",
              "conjugate_exponent", "phase_guard", "out", "format", "verbosity", "seed", "distribution_threshold"});
  RunConfig c;

  const ConfigReader lat = root.child("lattice");
  lat.allow({"dim", "sites", "mass", "lambda", "zero_mode_shift", "drop_gradient_term"});
  c.lattice.dim = static_cast<int>(lat.integer("dim", 1, 1, 3));
  c.lattice.sites = static_cast<int>(lat.integer("sites", 2, 2, 1 << 20));
  c.lattice.mass = lat.number("mass", 1.0);
  if (c.lattice.mass < 0.0) ConfigReader::fail("lattice.mass", "must be >= 0");
  c.lattice.lambda = lat.number("lambda", 0.0);
  if (c.lattice.lambda < 0.0) ConfigReader::fail("lattice.lambda", "must be >= 0");
  if (lat.has("zero_mode_shift")) {
    c.lattice.zero_mode_shift = lat.number("zero_mode_shift", 0.0);
    if (!(*c.lattice.zero_mode_shift > 0.0)) ConfigReader::fail("lattice.zero_mode_shift", "must be > 0");
  }
  c.lattice.drop_gradient_term = lat.boolean("drop_gradient_term", false);

  c.in_modes = root.index_list("in_modes");
  c.out_modes = root.index_list("out_modes");
  c.cutoff = static_cast<std::size_t>(root.integer("cutoff", 8, 1, 256));

  const ConfigReader sch = root.child("schedule");
  sch.allow({"total", "plateau", "dt", "dm_sign"});
  c.total = sch.number("total", 1.0);
  if (!(c.total > 0.0)) ConfigReader::fail("schedule.total", "must be > 0");
  c.plateau = sch.number("plateau", 0.5 * c.total);
  c.dt = sch.number("dt", 0.1);
  if (!(c.dt > 0.0)) ConfigReader::fail("schedule.dt", "must be > 0");
  c.dm_sign = sch.choice("dm_sign", "appendix", {"appendix", "section4"}) == "appendix" ? DeltaMassSign::Cancelling
                                                                                         : DeltaMassSign::Additive;

  c.trotter_order = static_cast<int>(root.integer("trotter_order", 1, 1, 2));
  c.subtract_vacuum_energy = root.boolean("subtract_vacuum_energy", false);
  c.conjugate_exponent = root.boolean("conjugate_exponent", false);
  c.phase_guard = root.number("phase_guard", kDefaultPhaseGuard);
  if (!(c.phase_guard > 0.0)) ConfigReader::fail("phase_guard", "must be > 0");
  c.out = root.text("out");
  c.format = root.choice("format", "json", {"json", "csv"});
  c.verbosity = static_cast<int>(root.integer("verbosity", 0, 0, 3));
  c.seed = root.integer("seed", 0, 0, std::numeric_limits<long long>::max());
  c.distribution_threshold = root.number("distribution_threshold", 1e-12);
  if (c.distribution_threshold < 0.0) ConfigReader::fail("distribution_threshold", "must be >= 0");

  c.validate();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace cvqft
