#pragma once

// Run configuration: INI-style `key = value` lines under `[section]` headers,
// `#` comments. Every key is optional (documented defaults); unknown keys and
// sections are errors. The digest is SHA-256 of the canonical form (all
// keys, sorted, values normalized), so it does not depend on key order,
// comments or spelling of numbers.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/integrator.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/shock_profile.hpp"

namespace nsp {

struct RunConfig {
  // [domain]
  GridSpec grid = GridSpec::make(50.0, 1024);
  // [shock]
  double rho_minus = 1.2;
  double rho_plus = 1.0;
  double T = 1.0;
  Frame frame = Frame::ShockStationary;
  // [profile]
  double profile_tol = 1e-10;
  int profile_max_iter = 30;
  // [sim]
  SolverConfig sim{};
  // [perturb]
  PerturbSpec perturb{};
  // [io]
  std::string out_dir = "out";
  bool snapshots = false;

  /// Source line of each key that was set explicitly (for error messages).
  std::map<std::string, int> lines;
  std::string path;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string frame_name(Frame f) { return f == Frame::Symmetric ? "symmetric" : "stationary"; }

inline std::string modes_string(const std::vector<TransverseMode>& modes) {
  std::string s;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(modes[i].k2) + ":" + std::to_string(modes[i].k3) + ":" + format_double(modes[i].weight);
  }
  return s;
}

inline std::string targets_string(const TargetFields& t) {
  std::vector<std::string> v;
  if (t.z) v.push_back("z");
  for (int c = 0; c < 3; ++c)
    if (t.r[c]) v.push_back("r" + std::to_string(c + 1));
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

// Key table: setter from text (throws std::invalid_argument on bad syntax)
// and canonical getter.
struct KeyDef {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

inline long long parse_int(const std::string& v) {
  std::size_t pos = 0;
  const long long n = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return n;
}

inline std::size_t parse_count(const std::string& v) {
  const long long n = parse_int(v);
  if (n < 0) throw std::invalid_argument("negative count");
  return static_cast<std::size_t>(n);
}

inline bool parse_bool(const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("not a boolean");
}

inline const std::map<std::string, KeyDef>& key_table() {
  using R = RunConfig;
  static const std::map<std::string, KeyDef> t = [] {
    std::map<std::string, KeyDef> k;
    auto num = [&](const std::string& name, double R::*field) {
      k[name] = {[field](R& c, const std::string& v) { c.*field = parse_double(v); },
                 [field](const R& c) { return format_double(c.*field); }};
    };
    auto sim_num = [&](const std::string& name, double SolverConfig::*field) {
      k[name] = {[field](R& c, const std::string& v) { c.sim.*field = parse_double(v); },
                 [field](const R& c) { return format_double(c.sim.*field); }};
    };
    k["domain.L"] = {[](R& c, const std::string& v) { c.grid.L = parse_double(v); },
                     [](const R& c) { return format_double(c.grid.L); }};
    k["domain.N1"] = {[](R& c, const std::string& v) { c.grid.n1 = parse_count(v); },
                      [](const R& c) { return std::to_string(c.grid.n1); }};
    k["domain.N2"] = {[](R& c, const std::string& v) { c.grid.n2 = parse_count(v); },
                      [](const R& c) { return std::to_string(c.grid.n2); }};
    k["domain.N3"] = {[](R& c, const std::string& v) { c.grid.n3 = parse_count(v); },
                      [](const R& c) { return std::to_string(c.grid.n3); }};
    num("shock.rho_minus", &R::rho_minus);
    num("shock.rho_plus", &R::rho_plus);
    num("shock.T", &R::T);
    k["shock.frame"] = {[](R& c, const std::string& v) {
                          if (v == "stationary") c.frame = Frame::ShockStationary;
                          else if (v == "symmetric") c.frame = Frame::Symmetric;
                          else throw std::invalid_argument("expected stationary or symmetric");
                        },
                        [](const R& c) { return frame_name(c.frame); }};
    num("profile.tol", &R::profile_tol);
    k["profile.max_iter"] = {[](R& c, const std::string& v) { c.profile_max_iter = static_cast<int>(parse_int(v)); },
                             [](const R& c) { return std::to_string(c.profile_max_iter); }};
    sim_num("sim.t_final", &SolverConfig::t_final);
    sim_num("sim.dt_max", &SolverConfig::dt_max);
    sim_num("sim.cfl_adv", &SolverConfig::cfl_adv);
    sim_num("sim.cfl_visc", &SolverConfig::cfl_visc);
    sim_num("sim.output_every", &SolverConfig::output_every);
    sim_num("sim.eps4", &SolverConfig::eps4);
    k["sim.eps4_on_departure"] = {[](R& c, const std::string& v) { c.sim.eps4_on_departure = parse_bool(v); },
                                  [](const R& c) { return std::string(c.sim.eps4_on_departure ? "true" : "false"); }};
    k["sim.dealias"] = {[](R& c, const std::string& v) { c.sim.dealias = parse_bool(v); },
                        [](const R& c) { return std::string(c.sim.dealias ? "true" : "false"); }};
    k["sim.poisson_tol"] = {[](R& c, const std::string& v) { c.sim.poisson.tol = parse_double(v); },
                            [](const R& c) { return format_double(c.sim.poisson.tol); }};
    k["perturb.amplitude"] = {[](R& c, const std::string& v) { c.perturb.amplitude = parse_double(v); },
                              [](const R& c) { return format_double(c.perturb.amplitude); }};
    k["perturb.x1_width"] = {[](R& c, const std::string& v) { c.perturb.x1_width = parse_double(v); },
                             [](const R& c) { return format_double(c.perturb.x1_width); }};
    k["perturb.x1_center"] = {[](R& c, const std::string& v) { c.perturb.x1_center = parse_double(v); },
                              [](const R& c) { return format_double(c.perturb.x1_center); }};
    k["perturb.seed"] = {[](R& c, const std::string& v) {
                           const long long s = parse_int(v);
                           if (s < 0) throw std::invalid_argument("negative seed");
                           c.perturb.seed = static_cast<std::uint64_t>(s);
                         },
                         [](const R& c) { return std::to_string(c.perturb.seed); }};
    // modes = k2:k3:weight[, ...]
    k["perturb.modes"] = {[](R& c, const std::string& v) {
                            std::vector<TransverseMode> modes;
                            for (const auto& item : split(v, ',')) {
                              const auto parts = split(item, ':');
                              if (parts.size() != 3) throw std::invalid_argument("expected k2:k3:weight");
                              modes.push_back({static_cast<int>(parse_int(parts[0])),
                                               static_cast<int>(parse_int(parts[1])), parse_double(parts[2])});
                            }
                            c.perturb.transverse_modes = std::move(modes);
                          },
                          [](const R& c) { return modes_string(c.perturb.transverse_modes); }};
    // targets = z, r1, r2, r3 (any subset)
    k["perturb.targets"] = {[](R& c, const std::string& v) {
                              TargetFields t{false, {false, false, false}};
                              for (const auto& item : split(v, ',')) {
                                if (item == "z") t.z = true;
                                else if (item == "r1") t.r[0] = true;
                                else if (item == "r2") t.r[1] = true;
                                else if (item == "r3") t.r[2] = true;
                                else throw std::invalid_argument("unknown target '" + item + "'");
                              }
                              c.perturb.target_fields = t;
                            },
                            [](const R& c) { return targets_string(c.perturb.target_fields); }};
    k["io.out_dir"] = {[](R& c, const std::string& v) { c.out_dir = v; }, [](const R& c) { return c.out_dir; }};
    k["io.snapshots"] = {[](R& c, const std::string& v) { c.snapshots = parse_bool(v); },
                         [](const R& c) { return std::string(c.snapshots ? "true" : "false"); }};
    return k;
  }();
  return t;
}

inline std::string where(const RunConfig& c, const std::string& key) {
  const auto it = c.lines.find(key);
  if (it == c.lines.end()) return c.path + ": " + key + " (default)";
  return c.path + ":" + std::to_string(it->second) + ": " + key;
}

}  // namespace detail

/// Re-validates every numeric constraint of the owning modules.
/// Throws ValidationError naming the key and its source line.
inline void validate(const RunConfig& c) {
  auto fail = [&](const std::string& key, const std::string& why) {
    throw Error(Errc::ValidationError, detail::where(c, key) + ": " + why);
  };
  const GridSpec& g = c.grid;
  if (!(g.L > 0.0) || !std::isfinite(g.L)) fail("domain.L", "must be positive");
  if (g.n1 < 8) fail("domain.N1", "must be >= 8");
  if (g.n1 % 2 != 0) fail("domain.N1", "must be even (the profile is centred between two cells)");
  if (g.n2 < 1 || (g.n2 > 1 && g.n2 % 2 != 0)) fail("domain.N2", "must be 1 or even");
  if (g.n3 < 1 || (g.n3 > 1 && g.n3 % 2 != 0)) fail("domain.N3", "must be 1 or even");
  if (!(c.rho_minus > 0.0)) fail("shock.rho_minus", "must be positive");
  if (!(c.rho_plus > 0.0)) fail("shock.rho_plus", "must be positive");
  if (!(c.rho_minus > c.rho_plus)) fail("shock.rho_plus", "rho_minus > rho_plus required");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) fail("shock.T", "must be positive");
  if (!(c.profile_tol > 0.0)) fail("profile.tol", "must be positive");
  if (c.profile_max_iter < 1) fail("profile.max_iter", "must be >= 1");
  const SolverConfig& s = c.sim;
  if (!(s.dt_max > 0.0)) fail("sim.dt_max", "must be positive");
  if (!(s.cfl_adv > 0.0 && s.cfl_adv <= 1.0)) fail("sim.cfl_adv", "must be in (0, 1]");
  if (!(s.cfl_visc > 0.0 && s.cfl_visc <= 0.5)) fail("sim.cfl_visc", "must be in (0, 0.5]");
  if (!(s.t_final >= 0.0)) fail("sim.t_final", "must be >= 0");
  if (!(s.output_every > 0.0)) fail("sim.output_every", "must be positive");
  if (!(s.eps4 >= 0.0)) fail("sim.eps4", "must be >= 0");
  if (!(s.poisson.tol > 0.0)) fail("sim.poisson_tol", "must be positive");
  const PerturbSpec& p = c.perturb;
  if (!(p.amplitude >= 0.0)) fail("perturb.amplitude", "must be >= 0");
  if (!(p.x1_width > 0.0)) fail("perturb.x1_width", "must be positive");
  if (p.transverse_modes.empty()) fail("perturb.modes", "needs at least one mode");
  const auto& t = p.target_fields;
  if (!(t.z || t.r[0] || t.r[1] || t.r[2])) fail("perturb.targets", "needs at least one field");
  try {
    p.validate(g);
  } catch (const Error& e) {
    fail(e.code() == Errc::UnresolvedMode ? "perturb.modes" : "perturb.x1_center", e.what());
  }
}

/// Parses INI text; `path` is used in messages only.
inline RunConfig parse_config_text(const std::string& text, const std::string& path = "<config>") {
  RunConfig c;
  c.path = path;
  const auto& table = detail::key_table();
  static const std::vector<std::string> sections{"domain", "shock", "profile", "sim", "perturb", "io"};
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const std::string at = path + ":" + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw Error(Errc::ParseError, at + "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw Error(Errc::UnknownKey, at + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, at + "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw Error(Errc::ParseError, at + "empty key");
    if (section.empty()) throw Error(Errc::ParseError, at + "key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    const auto it = table.find(full);
    if (it == table.end()) throw Error(Errc::UnknownKey, at + "unknown key " + full);
    if (c.lines.count(full)) throw Error(Errc::ParseError, at + "duplicate key " + full);
    try {
      it->second.set(c, value);
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, at + "bad value '" + value + "' for " + full);
    }
    c.lines[full] = line;
  }
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Every key with its resolved value, one `section.key = value` per line, sorted.
inline std::string canonical_config(const RunConfig& c) {
  std::string out;
  for (const auto& [key, def] : detail::key_table()) out += key + " = " + def.get(c) + "\n";
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoError, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

inline std::string config_digest(const RunConfig& c) { return sha256_hex(canonical_config(c)); }

}  // namespace nsp
