#pragma once

// Explicit SSP-RK3 time stepping of the 3-d NSP system for ions
//
//   rho_t + div m = 0,
//   m_t + div(m (x) m / rho) + T grad rho = Lap(m / rho) - rho grad E,
//   -Lap E = rho - exp(E),
//
// on [-L, L] x T^2. x1 derivatives are central differences with constant
// Dirichlet ghost cells; transverse derivatives are spectral. The electric
// force is evaluated as Lap E grad E - grad exp(E), equal to -rho grad E for the
// solved potential. A fourth-difference term in x1 with coefficient eps4
// damps odd-even modes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/parallel.hpp"
#include "nsp/poisson.hpp"
#include "nsp/shock_profile.hpp"

namespace nsp {

/// Constant data in the x1 ghost cells (index 0 = left, 1 = right).
struct FarField {
  std::array<double, 2> rho{1.0, 1.0};
  std::array<std::array<double, 3>, 2> m{};
  std::array<double, 2> E{0.0, 0.0};
  double T = 1.0;
  /// Optional x1 base state (N1 values each) whose ghosts are the values
  /// above; see SolverConfig::eps4_on_departure.
  std::vector<double> base_rho, base_m1;

  double u(int side, int c) const { return m[side][c] / rho[side]; }
  DirichletPair potential() const { return {E[0], E[1]}; }
  /// Reference speed of the fourth-difference dissipation.
  double reference_speed() const {
    return std::max(std::abs(u(0, 0)), std::abs(u(1, 0))) + std::sqrt(T + 1.0);
  }
};

inline FarField far_field(const EndStates& e) {
  FarField f;
  f.rho = {e.rho_minus, e.rho_plus};
  f.m[0] = {e.rho_minus * e.u_minus, 0.0, 0.0};
  f.m[1] = {e.rho_plus * e.u_plus, 0.0, 0.0};
  f.E = {e.E_minus, e.E_plus};
  f.T = e.T;
  return f;
}

/// Ghost data taken from a solved profile (far-field values up to the
/// truncated tail), which makes the profile a discrete steady state.
inline FarField far_field(const Profile& p) {
  FarField f;
  f.rho = {p.ghost_left.rho, p.ghost_right.rho};
  f.m[0] = {p.ghost_left.m1(), 0.0, 0.0};
  f.m[1] = {p.ghost_right.m1(), 0.0, 0.0};
  f.E = {p.ghost_left.E, p.ghost_right.E};
  f.T = p.endstates.T;
  f.base_rho.assign(p.rho.values().begin(), p.rho.values().end());
  f.base_m1.assign(p.m1.values().begin(), p.m1.values().end());
  return f;
}

struct SolverConfig {
  double dt_max = 0.05;
  double cfl_adv = 0.5;
  double cfl_visc = 0.2;
  double t_final = 10.0;
  double output_every = 1.0;
  double eps4 = 0.01;
  /// Apply the fourth difference to the departure from the far-field base
  /// state (the profile) instead of to the state itself. The profile is then
  /// an exact discrete steady state and no dissipative flux crosses x1 = +-L
  /// while the perturbation is away from the boundaries.
  bool eps4_on_departure = false;
  /// Two-thirds rule on the transverse spectrum of every stage derivative.
  bool dealias = true;
  PoissonConfig poisson{};

  void validate() const {
    auto bad = [](const std::string& why) { throw Error(Errc::InvalidParam, "SolverConfig: " + why); };
    if (!(dt_max > 0.0)) bad("dt_max must be positive");
    if (!(cfl_adv > 0.0 && cfl_adv <= 1.0)) bad("cfl_adv must be in (0, 1]");
    if (!(cfl_visc > 0.0 && cfl_visc <= 0.5)) bad("cfl_visc must be in (0, 0.5]");
    if (!(t_final >= 0.0)) bad("t_final must be >= 0");
    if (!(output_every > 0.0)) bad("output_every must be positive");
    if (!(eps4 >= 0.0)) bad("eps4 must be >= 0");
    poisson.validate();
  }
};

struct State {
  double t = 0.0;
  ScalarField3 rho;
  VectorField3 m;
  ScalarField3 E;
  ScalarField3 lapE;  // compact Laplacian of E from the last Poisson solve

  const GridSpec& grid() const { return rho.grid(); }
};

struct StateRate {
  ScalarField3 drho;
  VectorField3 dm;
};

/// Solves the Poisson problem for `rho` (warm start from E_guess) and returns
/// the complete state.
inline State make_state(double t, ScalarField3 rho, VectorField3 m, const FarField& ff,
                        const ScalarField3& E_guess, const PoissonConfig& pc = {}) {
  PoissonResult pr = solve_nonlinear_poisson(rho, E_guess, ff.potential(), pc);
  return State{t, std::move(rho), std::move(m), std::move(pr.E), std::move(pr.lapE)};
}

/// Cold start: E guess ln(rho).
inline State make_state(double t, ScalarField3 rho, VectorField3 m, const FarField& ff,
                        const PoissonConfig& pc = {}) {
  ScalarField3 guess(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) throw Error(Errc::NonPositiveDensity, "rho <= 0 at index " + std::to_string(i));
    guess[i] = std::log(rho[i]);
  }
  return make_state(t, std::move(rho), std::move(m), ff, guess, pc);
}

/// Broadcast of a 1-d profile onto a (possibly 3-d) grid with the same x1 layout.
inline State profile_state(const Profile& p, const GridSpec& g, const PoissonConfig& pc = {}) {
  if (g.n1 != p.grid.n1 || g.L != p.grid.L) throw Error(Errc::InvalidParam, "profile grid does not match");
  VectorField3 m = make_vector_field(g);
  m[0] = broadcast(p.m1, g);
  return make_state(0.0, broadcast(p.rho, g), std::move(m), far_field(p), broadcast(p.E, g), pc);
}

namespace detail {

// out += -coef * (fourth undivided difference along x1 of f - base), with
// constant ghosts; base (N1 values, broadcast in x') may be null.
inline void add_fourth_difference(const ScalarField3& f, double left, double right, double coef, ScalarField3& out,
                                  const std::vector<double>* base = nullptr) {
  const GridSpec& g = f.grid();
  const std::size_t n1 = g.n1, ns = g.slab();
  if (base && base->size() != n1) throw Error(Errc::InvalidParam, "base state length does not match N1");
  // Ghost rows hold the departure of the ghost value from the base, which
  // is zero when the base carries the same ghosts.
  const double gl = base ? 0.0 : left, gr = base ? 0.0 : right;
  std::array<AlignedVector, 2> ghost{AlignedVector(ns, gl), AlignedVector(ns, gr)};
  parallel_for(n1, [&](std::size_t i) {
    const double* row[5];
    double shift[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (int o = -2; o <= 2; ++o) {
      const long k = static_cast<long>(i) + o;
      if (k < 0) {
        row[o + 2] = ghost[0].data();
      } else if (k >= static_cast<long>(n1)) {
        row[o + 2] = ghost[1].data();
      } else {
        row[o + 2] = f.data() + static_cast<std::size_t>(k) * ns;
        if (base) shift[o + 2] = (*base)[static_cast<std::size_t>(k)];
      }
    }
    const double sb = shift[0] - 4.0 * shift[1] + 6.0 * shift[2] - 4.0 * shift[3] + shift[4];
    double* o = out.data() + i * ns;
    for (std::size_t c = 0; c < ns; ++c)
      o[c] -= coef * (row[0][c] - 4.0 * row[1][c] + 6.0 * row[2][c] - 4.0 * row[3][c] + row[4][c] - sb);
  });
}

inline void add_x1_derivative(const ScalarField3& f, double left, double right, double scale, ScalarField3& out,
                              ScalarField3& tmp) {
  const GridSpec& g = f.grid();
  d1_kernel(f.data(), tmp.data(), g.n1, g.slab(), g.dx1(), X1Boundary::ghost(left, right));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * tmp[i];
}

inline void add_x1_second_derivative(const ScalarField3& f, double left, double right, ScalarField3& out,
                                     ScalarField3& tmp) {
  const GridSpec& g = f.grid();
  d11_kernel(f.data(), tmp.data(), g.n1, g.slab(), g.dx1(), X1Boundary::ghost(left, right));
  out += tmp;
}

}  // namespace detail

/// Transverse modes kept by the two-thirds rule.
inline std::vector<double> dealias_mask(const GridSpec& g) {
  const auto& fft = TransverseFFT::get(g.n2, g.n3);
  std::vector<double> mask(fft.modes(), 1.0);
  for (std::size_t m = 0; m < fft.modes(); ++m) {
    const bool cut2 = g.n2 > 1 && 3 * std::abs(fft.k2(m)) > static_cast<int>(g.n2);
    const bool cut3 = g.n3 > 1 && 3 * std::abs(fft.k3(m)) > static_cast<int>(g.n3);
    if (cut2 || cut3) mask[m] = 0.0;
  }
  return mask;
}

/// Time derivative of (rho, m) for a state whose E solves the Poisson problem.
inline StateRate rhs(const State& s, const FarField& ff, const SolverConfig& cfg) {
  const GridSpec& g = s.grid();
  const std::size_t N = g.size();
  for (std::size_t i = 0; i < N; ++i)
    if (!(s.rho[i] > 0.0)) throw Error(Errc::NonPositiveDensity, "rho <= 0 at index " + std::to_string(i));

  VectorField3 u = make_vector_field(g);
  ScalarField3 expE(g);
  // x1 fluxes m_c m_1 / rho
  VectorField3 flux1 = make_vector_field(g);
  for (std::size_t i = 0; i < N; ++i) {
    const double ir = 1.0 / s.rho[i];
    for (int c = 0; c < 3; ++c) u[c][i] = s.m[c][i] * ir;
    for (int c = 0; c < 3; ++c) flux1[c][i] = s.m[c][i] * u[0][i];
    expE[i] = std::exp(s.E[i]);
  }

  StateRate out{ScalarField3(g), make_vector_field(g)};
  ScalarField3 tmp(g);
  const double T = ff.T;

  // x1 contributions
  detail::add_x1_derivative(s.m[0], ff.m[0][0], ff.m[1][0], -1.0, out.drho, tmp);
  ScalarField3 dE1(g);
  detail::d1_kernel(s.E.data(), dE1.data(), g.n1, g.slab(), g.dx1(), X1Boundary::ghost(ff.E[0], ff.E[1]));
  for (int c = 0; c < 3; ++c) {
    ScalarField3& d = out.dm[c];
    detail::add_x1_derivative(flux1[c], ff.m[0][c] * ff.u(0, 0), ff.m[1][c] * ff.u(1, 0), -1.0, d, tmp);
    detail::add_x1_second_derivative(u[c], ff.u(0, c), ff.u(1, c), d, tmp);
  }
  detail::add_x1_derivative(s.rho, ff.rho[0], ff.rho[1], -T, out.dm[0], tmp);
  detail::add_x1_derivative(expE, std::exp(ff.E[0]), std::exp(ff.E[1]), -1.0, out.dm[0], tmp);
  for (std::size_t i = 0; i < N; ++i) out.dm[0][i] += s.lapE[i] * dE1[i];

  if (cfg.eps4 > 0.0) {
    const double coef = cfg.eps4 * ff.reference_speed() / g.dx1();
    const bool has_base = cfg.eps4_on_departure && !ff.base_rho.empty();
    detail::add_fourth_difference(s.rho, ff.rho[0], ff.rho[1], coef, out.drho, has_base ? &ff.base_rho : nullptr);
    detail::add_fourth_difference(s.m[0], ff.m[0][0], ff.m[1][0], coef, out.dm[0], has_base ? &ff.base_m1 : nullptr);
    for (int c = 1; c < 3; ++c) detail::add_fourth_difference(s.m[c], ff.m[0][c], ff.m[1][c], coef, out.dm[c]);
  }

  if (!g.transverse()) return out;

  // Transverse contributions, slab by slab in spectral space.
  const auto& fft = TransverseFFT::get(g.n2, g.n3);
  const std::size_t nk = fft.modes(), ns = g.slab();
  const std::vector<double> mask = cfg.dealias ? dealias_mask(g) : std::vector<double>(nk, 1.0);
  parallel_for(g.n1, [&](std::size_t i1) {
    const std::size_t off = i1 * ns;
    AlignedCVector scratch(nk);
    AlignedVector prod(ns);
    auto fwd = [&](const double* src) {
      AlignedCVector a(nk);
      fft.forward(src + off, a.data());
      return a;
    };
    auto fwd_product = [&](const ScalarField3& a, const ScalarField3& b) {
      for (std::size_t k = 0; k < ns; ++k) prod[k] = a[off + k] * b[off + k];
      AlignedCVector r(nk);
      fft.forward(prod.data(), r.data());
      return r;
    };
    // T rho + exp(E) enters only through its transverse gradient, so it is
    // folded into the diagonal momentum fluxes before transforming.
    const auto m2 = fwd(s.m[1].data()), m3 = fwd(s.m[2].data());
    const auto u1 = fwd(u[0].data()), u2 = fwd(u[1].data()), u3 = fwd(u[2].data());
    const auto Eh = fwd(s.E.data());
    const auto f12 = fwd_product(s.m[0], u[1]), f13 = fwd_product(s.m[0], u[2]);
    const auto f23 = fwd_product(s.m[1], u[2]);
    auto fwd_diag = [&](int c) {
      for (std::size_t k = 0; k < ns; ++k)
        prod[k] = s.m[c][off + k] * u[c][off + k] + T * s.rho[off + k] + expE[off + k];
      AlignedCVector r(nk);
      fft.forward(prod.data(), r.data());
      return r;
    };
    const auto q2 = fwd_diag(1), q3 = fwd_diag(2);

    // transverse electric field, needed pointwise against Lap E
    AlignedCVector a(nk);
    AlignedVector dE2(ns, 0.0), dE3(ns, 0.0);
    if (g.n2 > 1) {
      for (std::size_t m = 0; m < nk; ++m) a[m] = fft.d2(m) * Eh[m];
      fft.inverse(a.data(), dE2.data(), scratch.data());
    }
    if (g.n3 > 1) {
      for (std::size_t m = 0; m < nk; ++m) a[m] = fft.d3(m) * Eh[m];
      fft.inverse(a.data(), dE3.data(), scratch.data());
    }
    for (std::size_t k = 0; k < ns; ++k) {
      out.dm[1][off + k] += s.lapE[off + k] * dE2[k];
      out.dm[2][off + k] += s.lapE[off + k] * dE3[k];
    }

    // The mass equation is linear in the state, so its x1 part needs no
    // filtering: only the transverse divergence is transformed back.
    for (std::size_t m = 0; m < nk; ++m) a[m] = -mask[m] * (fft.d2(m) * m2[m] + fft.d3(m) * m3[m]);
    fft.inverse(a.data(), prod.data(), scratch.data());
    for (std::size_t k = 0; k < ns; ++k) out.drho[off + k] += prod[k];

    // Add the spectral sums to the transformed x1 part, filter, transform back.
    auto finish = [&](ScalarField3& target, auto&& spectral) {
      fft.forward(target.data() + off, a.data());
      for (std::size_t m = 0; m < nk; ++m) a[m] = mask[m] * (a[m] + spectral(m));
      fft.inverse(a.data(), target.data() + off, scratch.data());
    };
    finish(out.dm[0], [&](std::size_t m) {
      return -(fft.d2(m) * f12[m] + fft.d3(m) * f13[m]) - fft.ksq(m) * u1[m];
    });
    finish(out.dm[1], [&](std::size_t m) {
      return -(fft.d2(m) * q2[m] + fft.d3(m) * f23[m]) - fft.ksq(m) * u2[m];
    });
    finish(out.dm[2], [&](std::size_t m) {
      return -(fft.d2(m) * f23[m] + fft.d3(m) * q3[m]) - fft.ksq(m) * u3[m];
    });
  });
  return out;
}

/// Stable step size: min(dt_max, cfl_adv dx_min / (max|u_i| + sqrt(T+1)),
/// cfl_visc dx_min^2).
inline double cfl_dt(const State& s, double T, const SolverConfig& cfg) {
  const GridSpec& g = s.grid();
  double umax = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    for (int c = 0; c < 3; ++c) umax = std::max(umax, std::abs(s.m[c][i] / s.rho[i]));
  const double h = g.dx_min();
  return std::min({cfg.dt_max, cfg.cfl_adv * h / (umax + std::sqrt(T + 1.0)), cfg.cfl_visc * h * h});
}

namespace detail {

inline void check_positive(const ScalarField3& rho, double t) {
  const GridSpec& g = rho.grid();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      const std::size_t i1 = i / g.slab();
      throw Error(Errc::PositivityLoss, "rho = " + std::to_string(rho[i]) + " at t = " + std::to_string(t) +
                                            ", x1 = " + std::to_string(g.x1(i1)) + " (index " +
                                            std::to_string(i) + ")");
    }
  }
}

// a * x + b * (y + dt * k), componentwise over (rho, m)
inline State combine(double a, const State& x, double b, const State& y, double dt, const StateRate& k) {
  State out;
  out.t = y.t;
  out.rho = ScalarField3(x.grid());
  out.m = make_vector_field(x.grid());
  const std::size_t N = x.rho.size();
  for (std::size_t i = 0; i < N; ++i) out.rho[i] = a * x.rho[i] + b * (y.rho[i] + dt * k.drho[i]);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < N; ++i) out.m[c][i] = a * x.m[c][i] + b * (y.m[c][i] + dt * k.dm[c][i]);
  return out;
}

// Poisson solve for a stage, warm started from the previous stage's E and Lap E.
inline void solve_stage(State& st, const State& prev, const FarField& ff, const SolverConfig& cfg) {
  check_positive(st.rho, st.t);
  try {
    PoissonResult pr = solve_nonlinear_poisson(st.rho, prev.E, ff.potential(), cfg.poisson, &prev.lapE);
    st.E = std::move(pr.E);
    st.lapE = std::move(pr.lapE);
  } catch (const Error& e) {
    throw Error(Errc::PoissonFailure, "at t = " + std::to_string(st.t) + ": " + e.what());
  }
}

}  // namespace detail

/// One SSP-RK3 step of size dt; the Poisson problem is re-solved (warm
/// started) after every stage.
inline State step(const State& s, double dt, const FarField& ff, const SolverConfig& cfg) {
  const StateRate k0 = rhs(s, ff, cfg);
  State s1 = detail::combine(0.0, s, 1.0, s, dt, k0);
  s1.t = s.t + dt;
  detail::solve_stage(s1, s, ff, cfg);

  const StateRate k1 = rhs(s1, ff, cfg);
  State s2 = detail::combine(0.75, s, 0.25, s1, dt, k1);
  s2.t = s.t + 0.5 * dt;
  detail::solve_stage(s2, s1, ff, cfg);

  const StateRate k2 = rhs(s2, ff, cfg);
  State s3 = detail::combine(1.0 / 3.0, s, 2.0 / 3.0, s2, dt, k2);
  s3.t = s.t + dt;
  detail::solve_stage(s3, s2, ff, cfg);
  return s3;
}

inline State step(const State& s, const FarField& ff, const SolverConfig& cfg) {
  return step(s, cfl_dt(s, ff.T, cfg), ff, cfg);
}

/// Advances to cfg.t_final, calling observe(state) at t = 0 and at every
/// multiple of output_every (the step size is clipped to land on them).
inline State integrate(State s, const FarField& ff, const SolverConfig& cfg,
                       const std::function<void(const State&)>& observe = {}) {
  cfg.validate();
  if (observe) observe(s);
  long next = 1;
  const double eps = 1e-12 * std::max(1.0, cfg.t_final);
  while (s.t < cfg.t_final - eps) {
    const double t_out = std::min(cfg.t_final, static_cast<double>(next) * cfg.output_every);
    double dt = cfl_dt(s, ff.T, cfg);
    bool lands = false;
    if (s.t + dt >= t_out - eps) {
      dt = t_out - s.t;
      lands = true;
    }
    s = step(s, dt, ff, cfg);
    if (lands) {
      s.t = t_out;
      if (observe) observe(s);
      ++next;
    }
  }
  return s;
}

}  // namespace nsp
