#pragma once

// Perturbation diagnostics of a running state against the planar profile:
// z = rho - rho~, w = u - u~, H = E - E~, H_t, zero/non-zero transverse mode
// split, anti-derivatives of the zero mode, conserved integrals, decay fits
// and the shock-location shift.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/integrator.hpp"
#include "nsp/shock_profile.hpp"

namespace nsp {

struct PerturbationFields {
  ScalarField3 z;
  VectorField3 w;
  ScalarField3 H;
  std::optional<ScalarField3> Ht;  // present when a previous potential was supplied
  VectorField3 r;                  // m - m~
};

/// Perturbation of `s` against the broadcast profile. H_t is the backward
/// difference (E - prev_E) / dt_prev when prev_E is given.
inline PerturbationFields perturbation_fields(const State& s, const Profile& p, const ScalarField3* prev_E = nullptr,
                                              double dt_prev = 0.0) {
  const GridSpec& g = s.grid();
  if (g.n1 != p.grid.n1 || g.L != p.grid.L) throw Error(Errc::InvalidParam, "profile grid does not match state");
  if (std::abs(p.endstates.s) > 1e-12)
    throw Error(Errc::FrameMismatch, "profile moves with speed " + std::to_string(p.endstates.s) +
                                         " but the state evolves in the shock-stationary frame");
  PerturbationFields f{ScalarField3(g), make_vector_field(g), ScalarField3(g), std::nullopt, make_vector_field(g)};
  const std::size_t ns = g.slab();
  for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
    for (std::size_t k = 0; k < ns; ++k) {
      const std::size_t i = i1 * ns + k;
      const double rho = s.rho[i];
      f.z[i] = rho - p.rho[i1];
      f.w[0][i] = s.m[0][i] / rho - p.u1[i1];
      f.w[1][i] = s.m[1][i] / rho;
      f.w[2][i] = s.m[2][i] / rho;
      f.r[0][i] = s.m[0][i] - p.m1[i1];
      f.r[1][i] = s.m[1][i];
      f.r[2][i] = s.m[2][i];
      f.H[i] = s.E[i] - p.E[i1];
    }
  }
  if (prev_E) {
    if (!(dt_prev > 0.0)) throw Error(Errc::InvalidParam, "dt_prev must be positive when prev_E is given");
    ScalarField3 ht(g);
    for (std::size_t i = 0; i < ht.size(); ++i) ht[i] = (s.E[i] - (*prev_E)[i]) / dt_prev;
    f.Ht = std::move(ht);
  }
  return f;
}

/// Cumulative integral from x1 = -L to each cell centre, and the total
/// (right-end residue, about 0 for mean-free input).
struct Antiderivative {
  ScalarField1 F;
  double residue = 0.0;
};

/// F(x_i) = dx1 (sum_{k<i} f_k + f_i / 2): exact for the piecewise-linear
/// interpolant between cell centres with f = f_0 on the first half cell.
/// Sums are compensated (Neumaier) so the residue is not swamped by round-off.
inline Antiderivative antiderivative(const ScalarField1& f) {
  const GridSpec& g = f.grid();
  const double h = g.dx1();
  Antiderivative a{ScalarField1(g), 0.0};
  double sum = 0.0, comp = 0.0;
  auto add = [&](double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    add(0.5 * f[i]);
    a.F[i] = h * (sum + comp);
    add(0.5 * f[i]);
  }
  a.residue = h * (sum + comp);
  return a;
}

/// Norms of the zero/non-zero transverse mode split of one field.
struct ModeSplit {
  double l2 = 0.0;         // ||f||_{L^2(Omega)}
  double l2_bar = 0.0;     // ||f-bar||_{L^2(-L, L)}
  double l2_neq = 0.0;     // ||f^{!=}||_{L^2(Omega)}
  double grad_t_neq = 0.0; // ||grad_{x'} f^{!=}||_{L^2(Omega)}

  /// | ||f||^2 - ||f-bar||^2 - ||f^{!=}||^2 |, relative to ||f||^2 when that exceeds 1.
  double orthogonality_defect() const {
    return std::abs(l2 * l2 - l2_bar * l2_bar - l2_neq * l2_neq) / std::max(1.0, l2 * l2);
  }
  bool averaging_bound() const { return l2_bar <= l2 * (1.0 + 1e-12) + 1e-300; }
  bool poincare_bound() const { return l2_neq <= grad_t_neq / two_pi + 1e-12; }
};

inline ModeSplit mode_split(const ScalarField3& f) {
  const GridSpec& g = f.grid();
  ModeSplit m;
  m.l2 = l2_norm(f);
  m.l2_bar = l2_norm(transverse_average(f));
  const ScalarField3 neq = nonzero_part(f);
  m.l2_neq = l2_norm(neq);
  double s = 0.0;
  if (g.n2 > 1) s += sum_squares(d2(neq).values());
  if (g.n3 > 1) s += sum_squares(d3(neq).values());
  m.grad_t_neq = std::sqrt(s * g.cell_weight());
  return m;
}

struct DecayFit {
  double C = 0.0;
  double c = 0.0;
  double r2 = 0.0;
  std::array<double, 2> window{0.0, 0.0};
  std::size_t samples = 0;
};

/// Least squares of log(value) against t over samples with t in [t0, t1]:
/// value ~ C exp(-c t). r2 = 0 when the logs are constant.
inline DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, std::array<double, 2> window) {
  if (t.size() != v.size()) throw Error(Errc::InvalidParam, "decay_fit: t and value lengths differ");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window[0] || t[i] > window[1]) continue;
    if (!(v[i] > 0.0))
      throw Error(Errc::NonPositiveValue, "decay_fit: value " + std::to_string(v[i]) + " at t = " + std::to_string(t[i]));
    x.push_back(t[i]);
    y.push_back(std::log(v[i]));
  }
  if (x.size() < 10)
    throw Error(Errc::WindowTooSmall, "decay_fit: " + std::to_string(x.size()) + " samples in window, need 10");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x.data(), x.size()) / n, my = pairwise_sum(y.data(), y.size()) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  DecayFit f;
  f.c = -slope;
  f.C = std::exp(my - slope * mx);
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    sse += e * e;
  }
  const double tiny = 1e-24 * std::max(1.0, my * my) * n;
  f.r2 = syy > tiny ? 1.0 - sse / syy : 0.0;
  f.window = window;
  f.samples = x.size();
  return f;
}

namespace detail {

// Four-point cubic Lagrange interpolation of cell-centred data; points
// beyond the ghost cells take the ghost values.
inline double cubic_at(const ScalarField1& f, double left, double right, double x) {
  const GridSpec& g = f.grid();
  const double h = g.dx1();
  const long n = static_cast<long>(f.size());
  const double s = (x - g.x1(0)) / h;
  const long i = static_cast<long>(std::floor(s));
  const double t = s - static_cast<double>(i);
  auto at = [&](long k) {
    if (k < 0) return left;
    if (k >= n) return right;
    return f[static_cast<std::size_t>(k)];
  };
  const double fm = at(i - 1), f0 = at(i), f1 = at(i + 1), f2 = at(i + 2);
  return -t * (t - 1.0) * (t - 2.0) / 6.0 * fm + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f0 -
         (t + 1.0) * t * (t - 2.0) / 2.0 * f1 + (t + 1.0) * t * (t - 1.0) / 6.0 * f2;
}

}  // namespace detail

/// Shift sigma minimizing ||rho-bar(.) - rho~(. - sigma)||_{L^2} over
/// [-5 dx1, 5 dx1] (golden section; rho~ interpolated by cubics).
inline double shock_shift(const ScalarField1& rho_bar, const Profile& p) {
  const GridSpec& g = p.grid;
  if (rho_bar.size() != g.n1) throw Error(Errc::InvalidParam, "shock_shift: grid mismatch");
  const double h = g.dx1();
  auto J = [&](double sigma) {
    std::vector<double> sq(g.n1);
    for (std::size_t i = 0; i < g.n1; ++i) {
      const double d = rho_bar[i] - detail::cubic_at(p.rho, p.ghost_left.rho, p.ghost_right.rho, g.x1(i) - sigma);
      sq[i] = d * d;
    }
    return pairwise_sum(sq.data(), sq.size());
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -5.0 * h, b = 5.0 * h;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = J(c), fd = J(d);
  while (b - a > 1e-13 * h) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = J(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = J(d);
    }
  }
  return 0.5 * (a + b);
}

inline double shock_shift(const State& s, const Profile& p) { return shock_shift(transverse_average(s.rho), p); }

/// Largest |z|, |w_i| within `cells` cells of either x1 boundary.
inline double boundary_leak(const PerturbationFields& f, std::size_t cells = 5) {
  const GridSpec& g = f.z.grid();
  const std::size_t k = std::min(cells, g.n1);
  double m = 0.0;
  for (const ScalarField3* fld : {&f.z, &f.w[0], &f.w[1], &f.w[2]})
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i1 : {j, g.n1 - 1 - j})
        for (double v : fld->slab(i1)) m = std::max(m, std::abs(v));
  return m;
}

struct DiagnosticsRecord {
  double t = 0.0;
  double Linf_z = 0.0, Linf_w = 0.0, Linf_H = 0.0, Linf_Ht = 0.0;
  double L2_z = 0.0, L2_w = 0.0, H1_z = 0.0, H1_w = 0.0;
  double L2_z_neq = 0.0, L2_w_neq = 0.0, H1_z_neq = 0.0, H1_w_neq = 0.0, L2_H_neq = 0.0, L2_Ht_neq = 0.0;
  double L2_Z = 0.0, L2_R = 0.0;
  double mass_z = 0.0, mass_r1 = 0.0, mass_r2 = 0.0, mass_r3 = 0.0;
  double shock_shift = 0.0;

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n{
        "t",        "Linf_z",   "Linf_w",   "Linf_H",   "Linf_Ht",  "L2_z",     "L2_w",     "H1_z",
        "H1_w",     "L2_z_neq", "L2_w_neq", "H1_z_neq", "H1_w_neq", "L2_H_neq", "L2_Ht_neq", "L2_Z",
        "L2_R",     "mass_z",   "mass_r1",  "mass_r2",  "mass_r3",  "shock_shift"};
    return n;
  }
  std::vector<double> values() const {
    return {t,        Linf_z,   Linf_w,   Linf_H,   Linf_Ht,  L2_z,     L2_w,    H1_z,
            H1_w,     L2_z_neq, L2_w_neq, H1_z_neq, H1_w_neq, L2_H_neq, L2_Ht_neq, L2_Z,
            L2_R,     mass_z,   mass_r1,  mass_r2,  mass_r3,  shock_shift};
  }
  bool all_finite() const {
    const auto v = values();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }
};

namespace detail {

// L^2 and H^1 norms of several fields combined; zero ghosts in x1 (the
// perturbation vanishes in the far field).
inline std::pair<double, double> combined_norms(std::initializer_list<const ScalarField3*> fs) {
  double l2 = 0.0, h1 = 0.0;
  for (const ScalarField3* f : fs) {
    const NormReport r = norms(*f, X1Boundary::ghost(0.0, 0.0));
    l2 += r.l2 * r.l2;
    h1 += r.h1 * r.h1;
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace detail

/// One diagnostics row for state `s`; prev_E / dt_prev give H_t (zero when absent).
inline DiagnosticsRecord record(const State& s, const Profile& p, const ScalarField3* prev_E = nullptr,
                                double dt_prev = 0.0) {
  const PerturbationFields f = perturbation_fields(s, p, prev_E, dt_prev);
  DiagnosticsRecord d;
  d.t = s.t;
  d.Linf_z = linf_norm(f.z);
  d.Linf_w = std::max({linf_norm(f.w[0]), linf_norm(f.w[1]), linf_norm(f.w[2])});
  d.Linf_H = linf_norm(f.H);
  std::tie(d.L2_z, d.H1_z) = detail::combined_norms({&f.z});
  std::tie(d.L2_w, d.H1_w) = detail::combined_norms({&f.w[0], &f.w[1], &f.w[2]});

  const ScalarField3 z_neq = nonzero_part(f.z);
  const VectorField3 w_neq{nonzero_part(f.w[0]), nonzero_part(f.w[1]), nonzero_part(f.w[2])};
  std::tie(d.L2_z_neq, d.H1_z_neq) = detail::combined_norms({&z_neq});
  std::tie(d.L2_w_neq, d.H1_w_neq) = detail::combined_norms({&w_neq[0], &w_neq[1], &w_neq[2]});
  d.L2_H_neq = l2_norm(nonzero_part(f.H));
  if (f.Ht) {
    d.Linf_Ht = linf_norm(*f.Ht);
    d.L2_Ht_neq = l2_norm(nonzero_part(*f.Ht));
  }

  d.L2_Z = l2_norm(antiderivative(transverse_average(f.z)).F);
  double sR = 0.0;
  for (const auto& rc : f.r) {
    const double n = l2_norm(antiderivative(transverse_average(rc)).F);
    sR += n * n;
  }
  d.L2_R = std::sqrt(sR);
  d.mass_z = integral(f.z);
  d.mass_r1 = integral(f.r[0]);
  d.mass_r2 = integral(f.r[1]);
  d.mass_r3 = integral(f.r[2]);
  d.shock_shift = shock_shift(s, p);
  return d;
}

inline void write_csv_header(std::ostream& os) {
  const auto& n = DiagnosticsRecord::names();
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
  os << '\n';
}

/// One row, every value with 17 significant digits.
inline void write_csv_row(std::ostream& os, const DiagnosticsRecord& d) {
  const auto v = d.values();
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << (i ? "," : "") << buf;
  }
  os << '\n';
}

}  // namespace nsp
