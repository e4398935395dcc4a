#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "cnqg/checkpoint.hpp"
#include "cnqg/initial_data.hpp"
#include "cnqg/solver.hpp"

namespace cnqg {

// Everything a run needs beyond the solver parameters: grid shape, initial
// data recipe, output locations, and cadences.
struct RunManifest {
  int dim = 2;
  int modes = 128;
  double length = 25.6;
  std::string init = "gaussian-bump";  // gaussian-bump | multi-bump |
                                       // negative-bump | random-smooth
  double amplitude = 1.0;
  double width = 1.0;          // bump width / support radius
  std::uint64_t seed = 12345;  // multi-bump and random-smooth
  std::string out_dir = ".";
  int checkpoint_every = 0;  // steps between checkpoints; 0 disables
  double window_a = 0.0;     // decay-fit window [a, b]; b = 0 means t_end
  double window_b = 0.0;
  int trials = 100;  // property-suite randomized trials

  SolverConfig solver;

  PhysicalField build_initial_data() const {
    const Grid g = Grid::uniform(dim, modes, length);
    if (init == "gaussian-bump") return gaussian_bump(g, amplitude, width);
    if (init == "multi-bump") return multi_bump(g, amplitude, width, seed);
    if (init == "negative-bump")
      return negate(compact_bump(g, amplitude, width));
    if (init == "random-smooth") return random_smooth(g, seed, amplitude);
    throw ConfigError("unknown init shape '" + init + "'");
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception &) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("key '" + key + "': trailing junk in '" + value + "'");
  return v;
}

inline long parse_int(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception &) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("key '" + key + "': trailing junk in '" + value + "'");
  return v;
}

}  // namespace detail

// Applies one key=value assignment; both file lines and CLI overrides land
// here so precedence is purely call order.
inline void apply_config_entry(RunManifest &m, const std::string &key,
                               const std::string &value) {
  SolverConfig &s = m.solver;
  if (key == "N") {
    m.dim = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "M") {
    m.modes = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "L") {
    m.length = detail::parse_double(key, value);
  } else if (key == "alpha") {
    s.alpha = detail::parse_double(key, value);
  } else if (key == "nu") {
    s.nu = detail::parse_double(key, value);
  } else if (key == "eps") {
    s.eps = detail::parse_double(key, value);
  } else if (key == "t_end") {
    s.t_end = detail::parse_double(key, value);
  } else if (key == "dt_max") {
    s.dt_max = detail::parse_double(key, value);
  } else if (key == "cfl") {
    s.cfl = detail::parse_double(key, value);
  } else if (key == "dealias_fraction") {
    s.dealias_fraction = detail::parse_double(key, value);
  } else if (key == "record_every") {
    s.record_every = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "scheme") {
    if (value == "if-euler")
      s.scheme = Scheme::IfEuler;
    else if (value == "etdrk2")
      s.scheme = Scheme::Etdrk2;
    else
      throw ConfigError("key 'scheme': expected if-euler or etdrk2, got '" +
                        value + "'");
  } else if (key == "clip_negative") {
    s.clip_negative = detail::parse_int(key, value) != 0;
  } else if (key == "init") {
    m.init = value;
  } else if (key == "amplitude") {
    m.amplitude = detail::parse_double(key, value);
  } else if (key == "width") {
    m.width = detail::parse_double(key, value);
  } else if (key == "seed") {
    m.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
  } else if (key == "out") {
    m.out_dir = value;
  } else if (key == "checkpoint_every") {
    m.checkpoint_every = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "window_a") {
    m.window_a = detail::parse_double(key, value);
  } else if (key == "window_b") {
    m.window_b = detail::parse_double(key, value);
  } else if (key == "trials") {
    m.trials = static_cast<int>(detail::parse_int(key, value));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline void validate_manifest(const RunManifest &m) {
  if (m.dim < 1 || m.dim > kMaxDim)
    throw ConfigError("key 'N': dimension must be in [1, 3]");
  if (m.modes < 8 || m.modes % 2 != 0)
    throw ConfigError("key 'M': modes must be even and >= 8");
  if (!(m.length > 0.0)) throw ConfigError("key 'L': length must be > 0");
  if (!(m.amplitude != 0.0)) throw ConfigError("key 'amplitude': must be nonzero");
  if (!(m.width > 0.0)) throw ConfigError("key 'width': must be > 0");
  if (m.trials < 1) throw ConfigError("key 'trials': must be >= 1");
  if (m.checkpoint_every < 0)
    throw ConfigError("key 'checkpoint_every': must be >= 0");
  try {
    m.solver.validate();
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
}

// key=value file, one entry per line; '#' starts a comment; unknown keys are
// errors. Defaults: dt_max = t_end / 200 when unset.
inline RunManifest parse_config(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  RunManifest m;
  m.solver.dt_max = 0.0;  // sentinel: default to t_end / 200 below
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    apply_config_entry(m, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
  if (m.solver.dt_max <= 0.0) m.solver.dt_max = m.solver.t_end / 200.0;
  return m;
}

}  // namespace cnqg
