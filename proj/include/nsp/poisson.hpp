#pragma once

// Nonlinear Poisson problem  -Lap E = rho - exp(E)  on [-L, L] x T^2 with
// Dirichlet data in x1, and the separable Helmholtz solver it is built on.
// Both use the compact Laplacian of grid.hpp, so the residual certificate is
// taken for the same operator that the tridiagonal solves invert.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/parallel.hpp"

namespace nsp {

struct PoissonConfig {
  double tol = 1e-10;
  int max_newton = 25;
  /// Outer steps between recomputations of the transverse-averaged
  /// preconditioner coefficient (1 = every step).
  int precond_refresh = 1;

  void validate() const {
    if (!(tol > 0.0)) throw Error(Errc::InvalidParam, "PoissonConfig: tol must be positive");
    if (max_newton < 1) throw Error(Errc::InvalidParam, "PoissonConfig: max_newton must be >= 1");
    if (precond_refresh < 1) throw Error(Errc::InvalidParam, "PoissonConfig: precond_refresh must be >= 1");
  }
};

/// Dirichlet values of E (or of the Helmholtz unknown) in the x1 ghost cells.
struct DirichletPair {
  double left = 0.0;
  double right = 0.0;
};

/// Solves the tridiagonal system a x_{i-1} + d_i x_i + a x_{i+1} = f_i
/// (constant off-diagonal a, Thomas algorithm without pivoting; callers pass
/// diagonally dominant systems). `work` needs n entries.
template <class T>
void thomas_constant_offdiag(double a, const double* d, T* f, std::size_t n, double* work) {
  // forward sweep: work holds the modified super-diagonal
  double beta = d[0];
  work[0] = a / beta;
  f[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = d[i] - a * work[i - 1];
    work[i] = a / beta;
    f[i] = (f[i] - a * f[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) f[i] -= work[i] * f[i + 1];
}

/// v solving (-Lap_c + c(x1)) v = rhs with v = bc in the x1 ghost cells and
/// periodic transverse directions: transverse DFT, one tridiagonal solve per
/// wavenumber pair, inverse DFT.
inline ScalarField3 solve_helmholtz_separable(const ScalarField3& rhs, const ScalarField1& c,
                                              DirichletPair bc = {}) {
  const GridSpec& g = rhs.grid();
  const std::size_t n1 = g.n1;
  const double h = g.dx1(), ih2 = 1.0 / (h * h);
  double cmin = c[0];
  for (std::size_t i = 0; i < n1; ++i) cmin = std::min(cmin, c[i]);

  ScalarField3 out(g);
  if (!g.transverse()) {
    if (!(cmin > 0.0)) throw Error(Errc::SingularMode, "c_min = " + std::to_string(cmin) + " at k = 0");
    std::vector<double> d(n1), work(n1);
    for (std::size_t i = 0; i < n1; ++i) {
      d[i] = 2.0 * ih2 + c[i];
      out[i] = rhs[i];
    }
    out[0] += bc.left * ih2;
    out[n1 - 1] += bc.right * ih2;
    thomas_constant_offdiag(-ih2, d.data(), out.data(), n1, work.data());
    return out;
  }

  const auto& fft = TransverseFFT::get(g.n2, g.n3);
  const std::size_t nk = fft.modes(), ns = g.slab();
  for (std::size_t m = 0; m < nk; ++m)
    if (!(cmin + fft.ksq(m) > 0.0))
      throw Error(Errc::SingularMode, "c_min + |k|^2 <= 0 for mode (" + std::to_string(fft.k2(m)) + "," +
                                          std::to_string(fft.k3(m)) + ")");

  AlignedCVector spec(n1 * nk);
  parallel_for(n1, [&](std::size_t i) { fft.forward(rhs.data() + i * ns, spec.data() + i * nk); });
  const double pts = static_cast<double>(fft.points());
  spec[0] += bc.left * ih2 * pts;
  spec[(n1 - 1) * nk] += bc.right * ih2 * pts;

  parallel_for(nk, [&](std::size_t m) {
    std::vector<double> d(n1), work(n1);
    AlignedCVector col(n1);
    for (std::size_t i = 0; i < n1; ++i) {
      d[i] = 2.0 * ih2 + fft.ksq(m) + c[i];
      col[i] = spec[i * nk + m];
    }
    thomas_constant_offdiag(-ih2, d.data(), col.data(), n1, work.data());
    for (std::size_t i = 0; i < n1; ++i) spec[i * nk + m] = col[i];
  });

  parallel_for(n1, [&](std::size_t i) {
    AlignedCVector scratch(nk);
    fft.inverse(spec.data() + i * nk, out.data() + i * ns, scratch.data());
  });
  return out;
}

struct PoissonResult {
  ScalarField3 E;
  ScalarField3 lapE;  // compact Laplacian of E (ghosts = bc), from the certificate
  double residual = 0.0;
  std::vector<double> history;  // max-norm residual before each Newton step and at exit
  int newton_steps = 0;
  int inner_steps = 0;
};

namespace detail {

// r = Lap_c E + rho - exp(E); fills lapE and expE as by-products.
inline double poisson_residual(const ScalarField3& rho, const ScalarField3& E, DirichletPair bc,
                               ScalarField3& lapE, ScalarField3& expE, ScalarField3& r) {
  lapE = laplacian_compact(E, X1Boundary::ghost(bc.left, bc.right));
  const std::size_t n = E.size();
  for (std::size_t i = 0; i < n; ++i) {
    expE[i] = std::exp(E[i]);
    r[i] = lapE[i] + rho[i] - expE[i];
  }
  return linf_norm(r);
}

}  // namespace detail

/// Newton iteration for  Lap E + rho - exp(E) = 0. Each correction solves
/// (-Lap + exp(E)) delta = r by defect correction preconditioned with the
/// separable operator -Lap + cbar(x1), cbar the transverse average of exp(E).
/// Between Newton steps Lap E is advanced with Lap delta = cbar delta - src
/// (src the right-hand side of the last preconditioner solve), which avoids
/// a transform pair per step; the exit residual is always recomputed from
/// scratch, so the returned E carries the certificate
/// max|Lap E + rho - exp(E)| < cfg.tol.
/// `lapE_guess`, if given, is the compact Laplacian of E_guess with the same
/// Dirichlet data (as returned by an earlier solve); a wrong one only costs
/// extra Newton steps.
inline PoissonResult solve_nonlinear_poisson(const ScalarField3& rho, const ScalarField3& E_guess,
                                             DirichletPair bc, const PoissonConfig& cfg,
                                             const ScalarField3* lapE_guess) {
  cfg.validate();
  const GridSpec& g = rho.grid();
  const std::size_t N = rho.size(), ns = g.slab();
  for (std::size_t i = 0; i < N; ++i)
    if (!(rho[i] > 0.0)) throw Error(Errc::NonPositiveDensity, "rho <= 0 at index " + std::to_string(i));
  if (!E_guess.all_finite()) throw Error(Errc::InvalidParam, "non-finite E_guess");
  if (lapE_guess && !(lapE_guess->grid() == g)) throw Error(Errc::InvalidParam, "lapE_guess grid mismatch");

  PoissonResult res;
  res.E = E_guess;
  ScalarField3 expE(g), r(g);
  double rn = 0.0;
  bool exact = false;  // residual r was computed from a fresh Laplacian
  auto recompute = [&] {
    rn = detail::poisson_residual(rho, res.E, bc, res.lapE, expE, r);
    exact = true;
  };
  auto update_residual = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      expE[i] = std::exp(res.E[i]);
      r[i] = res.lapE[i] + rho[i] - expE[i];
      m = std::max(m, std::abs(r[i]));
    }
    rn = m;
    exact = false;
  };
  if (lapE_guess) {
    res.lapE = *lapE_guess;
    update_residual();
  } else {
    res.lapE = ScalarField3(g);
    recompute();
  }
  res.history.push_back(rn);

  ScalarField1 cbar(g);
  ScalarField3 src(g);
  AlignedVector fluct(g.transverse() ? N : 0);
  const double inner_tol = 0.5 * cfg.tol;

  for (;;) {
    if (!std::isfinite(rn)) throw Error(Errc::NonConvergence, "Poisson residual is not finite");
    if (rn < cfg.tol) {
      if (exact) break;
      recompute();
      res.history.push_back(rn);
      continue;
    }
    if (res.newton_steps >= cfg.max_newton)
      throw Error(Errc::NonConvergence, "Poisson residual " + std::to_string(rn) + " after " +
                                            std::to_string(res.newton_steps) + " Newton steps");
    if (res.newton_steps % cfg.precond_refresh == 0) cbar = transverse_average(expE);

    // delta_{k+1} = P^{-1} (r - (exp(E) - cbar) delta_k); the linear residual
    // after the update is (exp(E) - cbar)(delta_k - delta_{k+1}).
    for (std::size_t i = 0; i < N; ++i) src[i] = r[i];
    ScalarField3 delta = solve_helmholtz_separable(src, cbar);
    ++res.inner_steps;
    if (g.transverse()) {
      for (std::size_t i1 = 0; i1 < g.n1; ++i1)
        for (std::size_t k = 0; k < ns; ++k) fluct[i1 * ns + k] = expE[i1 * ns + k] - cbar[i1];
      double lin = 0.0;
      for (std::size_t i = 0; i < N; ++i) lin = std::max(lin, std::abs(fluct[i] * delta[i]));
      for (int inner = 0; inner < 200 && lin >= inner_tol; ++inner) {
        for (std::size_t i = 0; i < N; ++i) src[i] = r[i] - fluct[i] * delta[i];
        ScalarField3 next = solve_helmholtz_separable(src, cbar);
        ++res.inner_steps;
        lin = 0.0;
        for (std::size_t i = 0; i < N; ++i) lin = std::max(lin, std::abs(fluct[i] * (delta[i] - next[i])));
        delta = std::move(next);
      }
    }
    // Guard the exponential against wild first steps from a poor guess.
    const double big = linf_norm(delta);
    const double damp = big > 1.0 ? 1.0 / big : 1.0;
    for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
      const double c = cbar[i1];
      for (std::size_t k = 0; k < ns; ++k) {
        const std::size_t i = i1 * ns + k;
        res.E[i] += damp * delta[i];
        res.lapE[i] += damp * (c * delta[i] - src[i]);
      }
    }
    ++res.newton_steps;
    update_residual();
    res.history.push_back(rn);
  }
  res.residual = rn;
  return res;
}

inline PoissonResult solve_nonlinear_poisson(const ScalarField3& rho, const ScalarField3& E_guess,
                                             DirichletPair bc, const PoissonConfig& cfg = {}) {
  return solve_nonlinear_poisson(rho, E_guess, bc, cfg, nullptr);
}

/// -rho grad E with central differences in x1 (ghost E values from bc) and
/// spectral transverse derivatives.
inline VectorField3 electric_force(const ScalarField3& rho, const ScalarField3& E, DirichletPair bc = {}) {
  VectorField3 f = grad(E, X1Boundary::ghost(bc.left, bc.right));
  for (auto& comp : f)
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = -rho[i] * comp[i];
  return f;
}

/// The same force in the form  Lap E grad E - grad exp(E), which equals
/// -rho grad E whenever E solves the Poisson problem and whose discrete
/// integral over the domain reduces to boundary terms.
inline VectorField3 electric_force_conservative(const ScalarField3& E, const ScalarField3& lapE,
                                                DirichletPair bc) {
  const GridSpec& g = E.grid();
  ScalarField3 expE(g);
  for (std::size_t i = 0; i < E.size(); ++i) expE[i] = std::exp(E[i]);
  VectorField3 gE = grad(E, X1Boundary::ghost(bc.left, bc.right));
  const VectorField3 gX = grad(expE, X1Boundary::ghost(std::exp(bc.left), std::exp(bc.right)));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < E.size(); ++i) gE[c][i] = lapE[i] * gE[c][i] - gX[c][i];
  return gE;
}

}  // namespace nsp
