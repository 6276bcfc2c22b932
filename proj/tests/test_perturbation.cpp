#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "nsp/perturbation.hpp"

using namespace nsp;

namespace {

// Direct long-double sum times the cell volume.
double mass_oracle(const ScalarField3& f) {
  const GridSpec& g = f.grid();
  long double s = 0.0L;
  for (double v : f.values()) s += v;
  return static_cast<double>(s) * g.dx1() / static_cast<double>(g.slab());
}

double l2_oracle(std::initializer_list<const ScalarField3*> fs) {
  long double s = 0.0L;
  double dv = 0.0;
  for (const ScalarField3* f : fs) {
    dv = f->grid().dx1() / static_cast<double>(f->grid().slab());
    for (double v : f->values()) s += static_cast<long double>(v) * v;
  }
  return std::sqrt(static_cast<double>(s) * dv);
}

// |coefficient| of exp(2 pi i (q2 x2 + q3 x3)) in slab i1, by a direct sum.
double harmonic_amplitude(const ScalarField3& f, std::size_t i1, int q2, int q3) {
  const GridSpec& g = f.grid();
  std::complex<double> s = 0.0;
  for (std::size_t i2 = 0; i2 < g.n2; ++i2)
    for (std::size_t i3 = 0; i3 < g.n3; ++i3)
      s += f(i1, i2, i3) * std::polar(1.0, -two_pi * (q2 * g.x2(i2) + q3 * g.x3(i3)));
  return std::abs(s) / static_cast<double>(g.slab());
}

Profile test_profile(const GridSpec& g) {
  return solve_profile(solve_rankine_hugoniot(1.1, 1.0, 1.0, Frame::ShockStationary), GridSpec::make(g.L, g.n1));
}

PerturbSpec spec_with(std::vector<TransverseMode> modes, double amplitude = 1e-2) {
  PerturbSpec s;
  s.amplitude = amplitude;
  s.x1_width = 3.0;
  s.transverse_modes = std::move(modes);
  return s;
}

}  // namespace

TEST(ZeroMassProjection, BadTemplate) {
  const GridSpec g = GridSpec::make(10.0, 64, 4, 4);
  ScalarField1 t = mass_template(g, 0.0, 3.0);
  t[32] *= 1.01;
  try {
    zero_mass_projection(ScalarField3(g, 1.0), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadTemplate);
  }
}

TEST(ZeroMassProjection, MeanFreeUnchanged) {
  const GridSpec g = GridSpec::make(10.0, 64, 8, 4);
  const ScalarField3 f = sample(g, [](double x, double y, double) { return std::sin(two_pi * y) / std::cosh(x); });
  const ScalarField3 p = zero_mass_projection(f, mass_template(g, 0.0, 3.0));
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(p[i], f[i], 1e-13);
}

TEST(ZeroMassProjection, AnnihilatesTemplate) {
  const GridSpec g = GridSpec::make(10.0, 64, 4, 4);
  const ScalarField1 t = mass_template(g, 1.0, 3.0);
  const ScalarField3 p = zero_mass_projection(broadcast(t, g), t);
  EXPECT_LT(std::abs(mass_oracle(p)), 1e-14);
  for (double v : p.values()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(ZeroMassProjection, RandomFieldIdempotentAndLinear) {
  const GridSpec g = GridSpec::make(10.0, 64, 8, 8);
  const ScalarField1 t = mass_template(g, -1.0, 4.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField3 f(g), h(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng), h[i] = u(rng);
  const ScalarField3 p = zero_mass_projection(f, t);
  EXPECT_LT(std::abs(mass_oracle(p)), 1e-13 * l2_oracle({&f}));
  const ScalarField3 pp = zero_mass_projection(p, t);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(pp[i], p[i], 1e-15);
  ScalarField3 mix(g);
  for (std::size_t i = 0; i < f.size(); ++i) mix[i] = 2.0 * f[i] - 3.0 * h[i];
  const ScalarField3 pm = zero_mass_projection(mix, t), ph = zero_mass_projection(h, t);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(pm[i], 2.0 * p[i] - 3.0 * ph[i], 1e-13);
}

TEST(BuildInitial, ZeroAmplitudeIsProfileState) {
  const GridSpec g = GridSpec::make(30.0, 128, 4, 4);
  const Profile prof = test_profile(g);
  const State s = build_initial(prof, g, spec_with({{1, 0, 1.0}}, 0.0));
  const State ref = profile_state(prof, g);
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    EXPECT_EQ(s.rho[i], ref.rho[i]);
    EXPECT_EQ(s.m[0][i], ref.m[0][i]);
    EXPECT_EQ(s.m[1][i], 0.0);
    EXPECT_EQ(s.E[i], ref.E[i]);
  }
}

TEST(BuildInitial, NonZeroModeOnly) {
  const GridSpec g = GridSpec::make(30.0, 128, 8, 8);
  PerturbSpec spec = spec_with({{1, 0, 1.0}, {1, 2, 0.5}});
  spec.target_fields.r = {true, true, false};
  const Perturbation p = make_perturbation(g, spec);
  for (const ScalarField3* f : {&p.z, &p.r[0], &p.r[1]}) {
    const ScalarField1 bar = transverse_average(*f);
    for (std::size_t i = 0; i < g.n1; ++i) EXPECT_LT(std::abs(bar[i]), 1e-14);
    EXPECT_LT(std::abs(mass_oracle(*f)), 1e-14);
  }
  EXPECT_EQ(linf_norm(p.r[2]), 0.0);
}

TEST(BuildInitial, MixedSpecProjectedAndNormalized) {
  const GridSpec g = GridSpec::make(30.0, 256, 8, 8);
  const Profile prof = test_profile(g);
  PerturbSpec spec = spec_with({{0, 0, 1.0}, {1, 0, 1.0}});
  spec.target_fields.r = {true, false, false};
  const State s = build_initial(prof, g, spec);
  const State ref = profile_state(prof, g);
  ScalarField3 z(g), r1(g);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = s.rho[i] - ref.rho[i];
    r1[i] = s.m[0][i] - ref.m[0][i];
  }
  EXPECT_LT(std::abs(mass_oracle(z)), 1e-12);
  EXPECT_LT(std::abs(mass_oracle(r1)), 1e-12);
  const double l2 = l2_oracle({&z, &r1});
  EXPECT_NEAR(l2, 1e-2, 0.05e-2);
  const Perturbation p = make_perturbation(g, spec);
  EXPECT_NEAR(p.l2, 1e-2, 1e-15);
  EXPECT_GT(p.h1, p.l2);
}

TEST(BuildInitial, SpectralContentAndPeriodicity) {
  const GridSpec g = GridSpec::make(30.0, 128, 16, 8);
  const Perturbation p = make_perturbation(g, spec_with({{2, 1, 1.0}, {-1, 0, 0.3}}));
  const std::size_t mid = g.n1 / 2;
  for (int q2 = -7; q2 <= 8; ++q2)
    for (int q3 = -3; q3 <= 4; ++q3) {
      const bool listed = (q2 == 2 && q3 == 1) || (q2 == -2 && q3 == -1) || (std::abs(q2) == 1 && q3 == 0);
      const double a = harmonic_amplitude(p.z, mid, q2, q3);
      if (listed) {
        EXPECT_GT(a, 1e-6) << q2 << "," << q3;
      } else {
        EXPECT_LT(a, 1e-15) << q2 << "," << q3;
      }
    }
  // the constructed field is the cell sampling of a smooth periodic function:
  // resampling its trigonometric interpolant at x2 + 1 gives the same values
  for (std::size_t i2 = 0; i2 < g.n2; ++i2) {
    std::complex<double> v = 0.0;
    for (int q2 = -7; q2 <= 8; ++q2) {
      std::complex<double> c = 0.0;
      for (std::size_t j2 = 0; j2 < g.n2; ++j2) c += p.z(mid, j2, 0) * std::polar(1.0, -two_pi * q2 * g.x2(j2));
      v += c / double(g.n2) * std::polar(1.0, two_pi * q2 * (g.x2(i2) + 1.0));
    }
    EXPECT_NEAR(v.real(), p.z(mid, i2, 0), 1e-13);
  }
}

TEST(BuildInitial, UnresolvedModeAndInvalidSpecs) {
  const GridSpec g = GridSpec::make(30.0, 128, 8, 4);
  try {
    make_perturbation(g, spec_with({{0, 2, 1.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnresolvedMode);
  }
  EXPECT_NO_THROW(make_perturbation(g, spec_with({{2, 1, 1.0}})));
  EXPECT_THROW(make_perturbation(g, spec_with({{1, 0, 1.0}}, -1.0)), Error);
  PerturbSpec wide = spec_with({{1, 0, 1.0}});
  wide.x1_width = 20.0;
  EXPECT_THROW(make_perturbation(g, wide), Error);
  PerturbSpec none = spec_with({{1, 0, 1.0}});
  none.target_fields.z = false;
  EXPECT_THROW(make_perturbation(g, none), Error);
}

TEST(BuildInitial, PositivityLoss) {
  const GridSpec g = GridSpec::make(30.0, 128, 4, 4);
  const Profile prof = test_profile(g);
  try {
    build_initial(prof, g, spec_with({{1, 0, 1.0}}, 50.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PositivityLoss);
  }
}

TEST(BuildInitial, SeedControlsPhases) {
  const GridSpec g = GridSpec::make(30.0, 128, 8, 8);
  PerturbSpec a = spec_with({{1, 1, 1.0}});
  PerturbSpec b = a;
  const Perturbation pa = make_perturbation(g, a), pb = make_perturbation(g, b);
  for (std::size_t i = 0; i < pa.z.size(); ++i) ASSERT_EQ(pa.z[i], pb.z[i]);
  b.seed = 17;
  const Perturbation pc = make_perturbation(g, b);
  double diff = 0.0;
  for (std::size_t i = 0; i < pa.z.size(); ++i) diff = std::max(diff, std::abs(pa.z[i] - pc.z[i]));
  EXPECT_GT(diff, 1e-6);
  EXPECT_NEAR(pc.l2, pa.l2, 1e-15);
}
