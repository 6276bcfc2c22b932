#pragma once

// Initial data = planar shock profile + localized perturbation (z0, r0) of
// density and momentum, periodic in x' and with zero total mass.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/integrator.hpp"
#include "nsp/poisson.hpp"
#include "nsp/shock_profile.hpp"

namespace nsp {

/// One transverse harmonic cos(2 pi (k2 x2 + k3 x3) + phase); (0, 0) is the
/// x'-independent part.
struct TransverseMode {
  int k2 = 0;
  int k3 = 0;
  double weight = 1.0;
};

/// Which of (z, r1, r2, r3) receive a perturbation.
struct TargetFields {
  bool z = true;
  std::array<bool, 3> r{false, false, false};
};

struct PerturbSpec {
  /// L^2(Omega) norm of (z0, r0) after the zero-mass projection.
  double amplitude = 1e-2;
  /// Half width of the compactly supported x1 envelope.
  double x1_width = 2.0;
  double x1_center = 0.0;
  std::vector<TransverseMode> transverse_modes{{0, 0, 1.0}};
  std::uint64_t seed = 0;
  TargetFields target_fields{};

  /// Checks the invariants that do not depend on the grid.
  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
      throw Error(Errc::InvalidParam, "PerturbSpec: amplitude must be >= 0");
    if (!(x1_width > 0.0)) throw Error(Errc::InvalidParam, "PerturbSpec: x1_width must be positive");
    if (!std::isfinite(x1_center)) throw Error(Errc::InvalidParam, "PerturbSpec: x1_center must be finite");
    if (transverse_modes.empty()) throw Error(Errc::InvalidParam, "PerturbSpec: no transverse modes");
    const auto& t = target_fields;
    if (!(t.z || t.r[0] || t.r[1] || t.r[2])) throw Error(Errc::InvalidParam, "PerturbSpec: no target fields");
  }

  /// Grid-dependent checks: resolvable modes (|k| <= N/4) and an envelope
  /// (and its wider mass template) supported inside [-L, L].
  void validate(const GridSpec& g) const {
    validate();
    for (const auto& m : transverse_modes) {
      const bool bad2 = std::abs(m.k2) * 4 > static_cast<int>(g.n2);
      const bool bad3 = std::abs(m.k3) * 4 > static_cast<int>(g.n3);
      if (bad2 || bad3)
        throw Error(Errc::UnresolvedMode, "mode (" + std::to_string(m.k2) + "," + std::to_string(m.k3) +
                                              ") exceeds N/4 on a " + std::to_string(g.n2) + "x" +
                                              std::to_string(g.n3) + " transverse grid");
    }
    if (std::abs(x1_center) + 2.0 * x1_width >= g.L)
      throw Error(Errc::InvalidParam, "PerturbSpec: envelope (with its mass template) leaves [-L, L]");
  }
};

/// Smooth compactly supported bump exp(-1/(1 - s^2)), s = (x1 - center)/width.
inline ScalarField1 bump(const GridSpec& g, double center, double width) {
  return sample_line(g, [&](double x) {
    const double s = (x - center) / width;
    return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  });
}

/// Bump of half width `width` scaled so its discrete integral is 1.
inline ScalarField1 mass_template(const GridSpec& g, double center, double width) {
  ScalarField1 b = bump(g, center, width);
  const double mass = integral(b);
  if (!(mass > 0.0)) throw Error(Errc::BadTemplate, "template bump is not resolved by the grid");
  for (std::size_t i = 0; i < b.size(); ++i) b[i] /= mass;
  return b;
}

/// f - (integral of f over Omega) * template, the template broadcast in x'.
inline ScalarField3 zero_mass_projection(const ScalarField3& f, const ScalarField1& tmpl) {
  const GridSpec& g = f.grid();
  if (tmpl.size() != g.n1) throw Error(Errc::InvalidParam, "template length does not match N1");
  const double tmass = integral(tmpl);
  if (!(std::abs(tmass - 1.0) <= 1e-12))
    throw Error(Errc::BadTemplate, "template integral " + std::to_string(tmass) + " != 1");
  // The torus has unit measure, so the x1 template carries mass 1 on Omega.
  const double mass = integral(f);
  ScalarField3 out = f;
  for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
    const double c = mass * tmpl[i1];
    for (double& v : out.slab(i1)) v -= c;
  }
  return out;
}

/// The perturbation itself, before it is added to the profile.
struct Perturbation {
  ScalarField3 z;
  VectorField3 r;
  double l2 = 0.0;  // ||(z, r)||_{L^2(Omega)}, equal to the amplitude
  double h1 = 0.0;  // ||(z, r)||_{H^1(Omega)}
};

inline double perturbation_h1(const ScalarField3& z, const VectorField3& r) {
  const X1Boundary zero = X1Boundary::ghost(0.0, 0.0);
  double s = 0.0;
  for (const ScalarField3* f : {&z, &r[0], &r[1], &r[2]}) {
    const double h = norms(*f, zero).h1;
    s += h * h;
  }
  return std::sqrt(s);
}

/// amplitude * envelope(x1) * Theta(x') on each target field, with
/// independent seeded phases per field and mode, projected to zero mass and
/// rescaled so that ||(z, r)||_{L^2} = amplitude.
inline Perturbation make_perturbation(const GridSpec& g, const PerturbSpec& spec) {
  spec.validate(g);
  Perturbation p{ScalarField3(g), make_vector_field(g), 0.0, 0.0};
  if (spec.amplitude == 0.0) return p;

  const ScalarField1 env = bump(g, spec.x1_center, spec.x1_width);
  const ScalarField1 tmpl = mass_template(g, spec.x1_center, 2.0 * spec.x1_width);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, two_pi);

  auto build = [&](ScalarField3& f) {
    std::vector<double> phase(spec.transverse_modes.size());
    for (double& ph : phase) ph = phase_dist(rng);
    ScalarField3 raw(g);
    for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
      if (env[i1] == 0.0) continue;
      for (std::size_t i2 = 0; i2 < g.n2; ++i2)
        for (std::size_t i3 = 0; i3 < g.n3; ++i3) {
          double theta = 0.0;
          for (std::size_t q = 0; q < spec.transverse_modes.size(); ++q) {
            const auto& m = spec.transverse_modes[q];
            if (m.k2 == 0 && m.k3 == 0) {
              theta += m.weight;
            } else {
              theta += m.weight * std::cos(two_pi * (m.k2 * g.x2(i2) + m.k3 * g.x3(i3)) + phase[q]);
            }
          }
          raw(i1, i2, i3) = env[i1] * theta;
        }
    }
    f = zero_mass_projection(raw, tmpl);
  };

  if (spec.target_fields.z) build(p.z);
  for (int c = 0; c < 3; ++c)
    if (spec.target_fields.r[c]) build(p.r[c]);

  const std::array<const ScalarField3*, 4> all{&p.z, &p.r[0], &p.r[1], &p.r[2]};
  const double raw_l2 = l2_norm(all);
  if (!(raw_l2 > 0.0)) throw Error(Errc::InvalidParam, "PerturbSpec: mode weights give a zero perturbation");
  const double scale = spec.amplitude / raw_l2;
  p.z *= scale;
  for (auto& c : p.r) c *= scale;
  p.l2 = l2_norm(all);
  p.h1 = perturbation_h1(p.z, p.r);
  return p;
}

/// Profile state on grid g plus the perturbation of `spec`, with E solved.
inline State build_initial(const Profile& profile, const GridSpec& g, const PerturbSpec& spec,
                           const PoissonConfig& pc = {}) {
  if (g.n1 != profile.grid.n1 || g.L != profile.grid.L)
    throw Error(Errc::InvalidParam, "profile grid does not match");
  const Perturbation p = make_perturbation(g, spec);
  ScalarField3 rho = broadcast(profile.rho, g);
  VectorField3 m = make_vector_field(g);
  m[0] = broadcast(profile.m1, g);
  rho += p.z;
  for (int c = 0; c < 3; ++c) m[c] += p.r[c];
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      const std::size_t i1 = i / g.slab();
      throw Error(Errc::PositivityLoss, "rho + z0 = " + std::to_string(rho[i]) + " at x1 = " +
                                            std::to_string(g.x1(i1)) + "; amplitude too large");
    }
  }
  return make_state(0.0, std::move(rho), std::move(m), far_field(profile), broadcast(profile.E, g), pc);
}

}  // namespace nsp
