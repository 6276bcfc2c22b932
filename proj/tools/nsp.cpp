// nsp: command-line entry points profile, simulate, analyze and verify.
// Exit codes: 1 usage, 2 configuration, 3 numerical failure, 4 acceptance failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance_suite.hpp"
#include "nsp/config.hpp"
#include "nsp/diagnostics.hpp"
#include "nsp/parallel.hpp"
#include "nsp/shock_profile.hpp"
#include "nsp/simulation.hpp"
#include "nsp/snapshot.hpp"

namespace fs = std::filesystem;
using namespace nsp;

namespace {

enum Exit { Ok = 0, Usage = 1, Config = 2, Numerical = 3, Acceptance = 4 };

bool is_config_error(Errc c) {
  return c == Errc::ParseError || c == Errc::ValidationError || c == Errc::UnknownKey || c == Errc::IoError;
}

RunConfig load_config(const std::string& path) {
  RunConfig c = parse_config(path);
  std::cout << "config " << path << "\nconfig_digest " << config_digest(c) << std::endl;
  return c;
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::IoError, "cannot open " + p.string() + " for writing");
  return out;
}

std::string num(double v) { return acceptance::fmt("%.17g", v); }

int cmd_profile(const std::string& cfg_path) {
  const RunConfig c = load_config(cfg_path);
  const Profile stationary = build_profile(c);
  const Profile p = profile_in_frame(stationary, c.frame);
  const ProfileReport r = verify_profile(p);
  const fs::path dir = prepare_out_dir(c.out_dir);

  std::ofstream csv = open_out(dir / "profile.csv");
  csv << "xi,rho,u1,E\n";
  for (std::size_t i = 0; i < p.grid.n1; ++i)
    csv << num(p.xi[i]) << ',' << num(p.rho[i]) << ',' << num(p.u1[i]) << ',' << num(p.E[i]) << '\n';

  const GridSpec g1 = GridSpec::make(c.grid.L, c.grid.n1);
  VectorField3 m = make_vector_field(g1);
  m[0] = broadcast(p.m1, g1);
  const auto bytes = encode_snapshot(g1, 0.0, broadcast(p.rho, g1), m, broadcast(p.E, g1));
  std::ofstream snap(dir / "profile.nsps", std::ios::binary);
  snap.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!snap) throw Error(Errc::IoError, "cannot write " + (dir / "profile.nsps").string());

  const EndStates& e = p.endstates;
  const auto lax = check_lax(e).margins;
  std::ostringstream rep;
  rep << "config_digest=" << config_digest(c) << '\n'
      << "frame=" << (c.frame == Frame::Symmetric ? "symmetric" : "stationary") << '\n'
      << "rho_minus=" << num(e.rho_minus) << "\nrho_plus=" << num(e.rho_plus) << '\n'
      << "u_minus=" << num(e.u_minus) << "\nu_plus=" << num(e.u_plus) << '\n'
      << "E_minus=" << num(e.E_minus) << "\nE_plus=" << num(e.E_plus) << '\n'
      << "s=" << num(e.s) << "\nj=" << num(e.j) << "\nT=" << num(e.T) << "\ndelta=" << num(e.delta) << '\n'
      << "lax_margins=" << num(lax[0]) << ',' << num(lax[1]) << ',' << num(lax[2]) << '\n'
      << "newton_iterations=" << p.newton_iterations << '\n'
      << "residual_norm=" << num(r.residual_norm) << '\n'
      << "rho_decreasing=" << r.rho_decreasing << "\nu1_decreasing=" << r.u1_decreasing
      << "\nE_decreasing=" << r.E_decreasing << '\n'
      << "tail_rate_left=" << num(r.tail_rate_left) << "\ntail_rate_right=" << num(r.tail_rate_right) << '\n'
      << "c_under=" << num(r.c_under) << "\nc_bar=" << num(r.c_bar) << '\n'
      << "mass_flux_identity=" << num(r.mass_flux_identity) << "\nmass_flux_error=" << num(r.mass_flux_error)
      << '\n'
      << "rh_residual=" << num(r.rh_residual) << '\n'
      << "boundary_mismatch=" << num(r.boundary_mismatch) << '\n'
      << "truncation_warning=" << p.truncation_warning << '\n';
  std::ofstream rf = open_out(dir / "profile_report.txt");
  rf << rep.str();
  std::cout << rep.str();
  if (p.truncation_warning)
    std::cerr << "warning: TruncationWarning: boundary mismatch " << r.boundary_mismatch << " > 1e-8; increase L\n";
  std::cout << "wrote " << (dir / "profile.csv").string() << ", " << (dir / "profile.nsps").string() << ", "
            << (dir / "profile_report.txt").string() << '\n';
  return Ok;
}

int cmd_simulate(const std::string& cfg_path) {
  const RunConfig c = load_config(cfg_path);
  const fs::path dir = prepare_out_dir(c.out_dir);
  std::ofstream csv = open_out(dir / "diagnostics.csv");
  csv << "# config_digest = " << config_digest(c) << '\n'
      << "# H_t is the backward difference of E over the previous output interval (output_every = "
      << num(c.sim.output_every) << "); it is 0 in the first row\n";
  write_csv_header(csv);

  RunObserver obs;
  long snap_count = 0;
  obs.on_record = [&](const DiagnosticsRecord& d) {
    write_csv_row(csv, d);
    csv.flush();
    std::printf("t = %-10.4g L2_z = %.3e  L2_z_neq = %.3e  L2_Z = %.3e  mass_z = %.1e\n", d.t, d.L2_z, d.L2_z_neq,
                d.L2_Z, d.mass_z);
    std::fflush(stdout);
  };
  if (c.snapshots) {
    obs.on_state = [&](const State& s) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06ld.nsps", snap_count++);
      write_snapshot((dir / name).string(), s);
    };
  }
  obs.warn = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
  const RunResult r = run_simulation(c, obs);
  std::cout << "wrote " << (dir / "diagnostics.csv").string() << " (" << r.records.size() << " rows";
  if (c.snapshots) std::cout << ", " << snap_count << " snapshots";
  std::cout << "), max boundary leak " << r.max_boundary_leak << '\n';
  return Ok;
}

struct CsvTable {
  std::string digest;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    throw Error(Errc::InvalidParam, "no column '" + n + "' in the diagnostics file");
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  CsvTable t;
  std::string line;
  int lineno = 0;
  const std::string tag = "# config_digest = ";
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(tag, 0) == 0) t.digest = line.substr(tag.size());
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.names.empty()) {
      t.names = cells;
      continue;
    }
    if (cells.size() != t.names.size())
      throw Error(Errc::ParseError, path + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(t.names.size()) + " columns");
    std::vector<double> row;
    for (const auto& s : cells) {
      try {
        row.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw Error(Errc::ParseError, path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.names.empty() || t.rows.empty()) throw Error(Errc::ParseError, path + ": no data rows");
  return t;
}

int cmd_analyze(const std::string& path, const std::vector<std::string>& fields, std::vector<double> window,
                bool columns) {
  const CsvTable tab = read_csv(path);
  std::cout << "config_digest " << (tab.digest.empty() ? "unknown" : tab.digest) << '\n';
  const std::size_t it = tab.column("t");
  std::vector<double> t;
  for (const auto& r : tab.rows) t.push_back(r[it]);
  if (window.empty()) window = {0.2 * t.back(), t.back()};
  const std::array<double, 2> w{window[0], window[1]};

  std::vector<DecayFit> fits;
  std::vector<std::vector<double>> series;
  std::printf("# %-12s %14s %12s %10s %10s %10s %8s\n", "field", "C", "c", "r2", "t_start", "t_end", "samples");
  for (const auto& f : fields) {
    const std::size_t col = tab.column(f);
    std::vector<double> v;
    for (const auto& r : tab.rows) v.push_back(r[col]);
    const DecayFit fit = decay_fit(t, v, w);
    std::printf("%-14s %14.6e %12.6g %10.6f %10.4g %10.4g %8zu\n", f.c_str(), fit.C, fit.c, fit.r2, fit.window[0],
                fit.window[1], fit.samples);
    fits.push_back(fit);
    series.push_back(std::move(v));
  }
  if (columns) {
    std::cout << "\n\n# t";
    for (const auto& f : fields) std::cout << ' ' << f << ' ' << f << "_fit";
    std::cout << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::cout << num(t[i]);
      for (std::size_t k = 0; k < fields.size(); ++k)
        std::cout << ' ' << num(series[k][i]) << ' ' << num(fits[k].C * std::exp(-fits[k].c * t[i]));
      std::cout << '\n';
    }
  }
  return Ok;
}

int cmd_verify(bool quick) {
  std::cout << "config_digest " << config_digest(RunConfig{}) << " (defaults; criteria use built-in setups)\n"
            << "acceptance suite" << (quick ? " (quick)" : "") << ", threads " << threads() << std::endl;
  acceptance::Options o;
  o.quick = quick;
  const auto all = acceptance::run_suite(o);
  int failed = 0;
  for (const auto& x : all) failed += x.pass ? 0 : 1;
  std::cout << all.size() - failed << "/" << all.size() << " criteria passed";
  if (failed > 0) std::cout << ", " << failed - acceptance::unexpected_failures(all) << " failure(s) known unattainable";
  std::cout << '\n';
  return failed ? Acceptance : Ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes-Poisson planar shock simulator"};
  app.require_subcommand(1);
  int nthreads = 0;
  app.add_option("--threads", nthreads, "worker threads (default: NSP_THREADS, else hardware count)")
      ->check(CLI::PositiveNumber);

  std::string cfg;
  auto* profile = app.add_subcommand("profile", "solve the shock profile; write CSV, snapshot and report");
  profile->add_option("config", cfg, "config file")->required();

  auto* simulate = app.add_subcommand("simulate", "evolve the perturbed shock; write diagnostics CSV");
  simulate->add_option("config", cfg, "config file")->required();

  std::string csv;
  std::vector<std::string> fields;
  std::vector<double> window;
  bool columns = false;
  auto* analyze = app.add_subcommand("analyze", "fit C exp(-c t) to diagnostics columns");
  analyze->add_option("csv", csv, "diagnostics CSV")->required();
  analyze->add_option("--field", fields, "column(s) to fit (default L2_z_neq)");
  analyze->add_option("--window", window, "fit window t_start t_end (default [0.2 t_end, t_end])")->expected(2);
  analyze->add_flag("--columns", columns, "also print gnuplot-ready columns with the fitted curves");

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_flag("--quick", quick, "reduced grids and run lengths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Ok : Usage;
  }

  set_threads(nthreads > 0 ? nthreads : threads_from_env());
  try {
    if (*profile) return cmd_profile(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*analyze) return cmd_analyze(csv, fields.empty() ? std::vector<std::string>{"L2_z_neq"} : fields, window,
                                     columns);
    if (*verify) return cmd_verify(quick);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (*analyze) return e.code() == Errc::IoError || e.code() == Errc::ParseError ? Config : Numerical;
    return is_config_error(e.code()) ? Config : Numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Numerical;
  }
  return Usage;
}
