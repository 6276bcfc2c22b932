#pragma once

// Run orchestration shared by the CLI and the acceptance suite: build the
// profile from a RunConfig, perturb it, integrate and record diagnostics.

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nsp/config.hpp"
#include "nsp/diagnostics.hpp"
#include "nsp/integrator.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/shock_profile.hpp"

namespace nsp {

/// Shock-stationary profile on the x1 line of the configured grid.
inline Profile build_profile(const RunConfig& c) {
  const EndStates e = solve_rankine_hugoniot(c.rho_minus, c.rho_plus, c.T, Frame::ShockStationary);
  return solve_profile(e, GridSpec::make(c.grid.L, c.grid.n1), c.profile_tol, c.profile_max_iter);
}

/// Profile in the configured frame (for output only; runs use the stationary one).
inline Profile profile_in_frame(const Profile& p, Frame frame) {
  if (frame == Frame::ShockStationary) return p;
  const EndStates& e = p.endstates;
  return galilean_shift(p, 0.5 * (e.u_minus + e.u_plus));
}

struct RunResult {
  Profile profile;
  State final;
  std::vector<DiagnosticsRecord> records;
  /// Largest perturbation value seen within 5 cells of x1 = +-L.
  double max_boundary_leak = 0.0;
};

struct RunObserver {
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const State&)> on_state;
  std::function<void(const std::string&)> warn;
};

inline constexpr double boundary_leak_limit = 1e-8;

/// Runs `c` from the perturbed profile to sim.t_final. Records are taken at
/// t = 0 and every output_every; H_t uses the previous record's potential.
inline RunResult run_simulation(const RunConfig& c, const RunObserver& obs = {}) {
  if (c.frame != Frame::ShockStationary)
    throw Error(Errc::InvalidParam, "simulate runs in the shock-stationary frame; set shock.frame = stationary");
  c.sim.validate();
  RunResult res;
  res.profile = build_profile(c);
  const FarField ff = far_field(res.profile);
  State s0 = build_initial(res.profile, c.grid, c.perturb, c.sim.poisson);

  ScalarField3 prev_E;
  double prev_t = 0.0;
  bool have_prev = false;
  bool warned = false;
  auto observe = [&](const State& s) {
    const DiagnosticsRecord d =
        have_prev ? record(s, res.profile, &prev_E, s.t - prev_t) : record(s, res.profile);
    const double leak = boundary_leak(perturbation_fields(s, res.profile));
    res.max_boundary_leak = std::max(res.max_boundary_leak, leak);
    if (leak > boundary_leak_limit && !warned && obs.warn) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "perturbation reaches the x1 boundary: %.3e within 5 cells at t = %.6g", leak,
                    s.t);
      obs.warn(buf);
      warned = true;
    }
    res.records.push_back(d);
    if (obs.on_record) obs.on_record(d);
    if (obs.on_state) obs.on_state(s);
    prev_E = s.E;
    prev_t = s.t;
    have_prev = true;
  };
  res.final = integrate(std::move(s0), ff, c.sim, observe);
  return res;
}

}  // namespace nsp
