#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcflow/stationary.hpp"

using namespace mcflow;

namespace {

double slope(double e1, double e2) { return std::log2(e1 / e2); }

}  // namespace

TEST(PolarOps, DivergenceAndCurlAreSecondOrder) {
  // u = grad(x^2 y) + grad_perp(x y^2): div u = 2y, curl u = -(2x)... checked against closed forms
  auto u1 = [](Complex z) { return 2 * z.real() * z.imag() - 2 * z.real() * z.imag(); };
  auto u2 = [](Complex z) { return z.real() * z.real() + z.imag() * z.imag(); };
  std::vector<double> div_err, curl_err;
  for (int n : {16, 32, 64}) {
    const PolarOps ops(polar_grid(0.5, n, 4 * n));
    const PolarVector u = ops.to_polar(ops.sample(u1), ops.sample(u2));
    // wall ghosts are irrelevant away from the walls; compare on interior rows only
    const PolarVector p = ops.pad_velocity(u, WallFriction::constant(ops.nt(), 0.0, 0.0));
    const Field div = ops.divergence(p), curl = ops.curl(p);
    double ed = 0.0, ec = 0.0;
    for (int i = 1; i + 1 < n; ++i)
      for (int j = 0; j < ops.nt(); ++j) {
        const Complex z = std::polar(ops.radii()(i), ops.grid().angle(j));
        ed = std::max(ed, std::abs(div(i, j) - 2.0 * z.imag()));
        ec = std::max(ec, std::abs(curl(i, j) - (0.0 - 2.0 * z.real())));
      }
    div_err.push_back(ed);
    curl_err.push_back(ec);
  }
  EXPECT_NEAR(slope(div_err[1], div_err[2]), 2.0, 0.2);
  EXPECT_NEAR(slope(curl_err[1], curl_err[2]), 2.0, 0.2);
}

TEST(PolarOps, MassRateTelescopes) {
  const PolarOps ops(polar_grid(0.4, 24, 96));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Field rho = ops.constant(1.0), a = ops.zeros(), b = ops.zeros();
  for (int i = 0; i < ops.nr(); ++i)
    for (int j = 0; j < ops.nt(); ++j) rho(i, j) += 0.3 * u(rng), a(i, j) = u(rng), b(i, j) = u(rng);
  for (bool muscl : {false, true}) EXPECT_NEAR(ops.integrate(ops.mass_rate(rho, {a, b}, muscl)), 0.0, 1e-14);
}

TEST(PolarOps, RigidRotationHasZeroDiscreteVorticity) {
  // R u_theta = const satisfies the K = 0 ghost relation exactly
  const PolarOps ops(polar_grid(0.5, 16, 64));
  const PolarVector u{ops.zeros(), ops.sample([](Complex z) { return -1.0 / std::abs(z); })};
  const Field w = ops.curl(ops.pad_velocity(u, WallFriction::constant(ops.nt(), 0.0, 0.0)));
  EXPECT_LE(w.abs().maxCoeff(), 1e-12);
}

TEST(Stationary, FamilyReferenceValues) {
  const StationaryState s = annulus_family(1.0, 3.0, 2.0, 0.5);
  EXPECT_NEAR(s.density(0.5), 0.5, 1e-15);
  EXPECT_NEAR(s.density(Complex(0.0, 1.0)), 1.25, 1e-15);
  for (double R : {0.5, 0.7, 1.0}) EXPECT_NEAR(s.velocity(std::polar(R, 0.4)).norm(), 1.0 / R, 1e-14);
  const Eigen::Vector2d v = s.velocity(Complex(0.3, 0.6));
  const Complex expected = Complex(0.0, 1.0) / Complex(0.3, 0.6);
  EXPECT_NEAR(v(0), expected.real(), 1e-14);
  EXPECT_NEAR(-v(1), expected.imag(), 1e-14);
}

TEST(Stationary, ZeroC1IsTrivial) {
  const StationaryState s = annulus_family(0.0, 3.0, 1.4, 0.5);
  EXPECT_EQ(s.kind, StationaryState::Kind::Trivial);
  EXPECT_NEAR(s.density(0.8), std::pow(0.4 * 3.0 / 1.4, 1.0 / 0.4), 1e-14);
  EXPECT_EQ(s.velocity(0.8).norm(), 0.0);
}

TEST(Stationary, VacuumRejected) {
  EXPECT_THROW(annulus_family(1.0, 2.0, 2.0, 0.5), Error);
  EXPECT_NO_THROW(annulus_family(1.0, 2.0001, 2.0, 0.5));
}

TEST(Stationary, ContinuousResidualVanishes) {
  // high-order finite differences of the closed forms: rho u.grad u + grad rho^gamma = 0
  for (double gamma : {1.4, 2.0, 3.0}) {
    const StationaryState s = annulus_family(0.8, 3.0, gamma, 0.5);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rad(0.55, 0.95), ang(0, kTwoPi);
    for (int n = 0; n < 50; ++n) {
      const Complex z = std::polar(rad(rng), ang(rng));
      const double e = 1e-3;
      auto d = [&](auto f, Complex dir) {
        return (-f(z + 2.0 * e * dir) + 8.0 * f(z + e * dir) - 8.0 * f(z - e * dir) + f(z - 2.0 * e * dir)) / (12 * e);
      };
      const Eigen::Vector2d u = s.velocity(z);
      auto p = [&](Complex q) { return std::pow(s.density(q), gamma); };
      for (int k = 0; k < 2; ++k) {
        auto uk = [&](Complex q) { return s.velocity(q)(k); };
        const double adv = u(0) * d(uk, 1.0) + u(1) * d(uk, Complex(0, 1));
        const double gp = d(p, k == 0 ? Complex(1.0) : Complex(0, 1));
        EXPECT_NEAR(s.density(z) * adv + gp, 0.0, 1e-9);
      }
    }
  }
}

TEST(Stationary, TrivialResidualIsZero) {
  const PhysParams p{0.1, 1.5, 1.4};
  for (double k : {0.0, 0.7}) {
    const ResidualReport r = residual(trivial_state(1.3, 1.4, 0.5), p, k, k, 32);
    EXPECT_EQ(r.mass_sup, 0.0);
    EXPECT_LE(r.momentum_sup, 1e-14);
    EXPECT_EQ(r.slip_sup, 0.0);
    EXPECT_EQ(r.curl_sup, 0.0);
  }
}

TEST(Stationary, FamilyResidualConvergesSecondOrder) {
  const StationaryState s = annulus_family(1.0, 3.0, 2.0, 0.5);
  const PhysParams p{0.1, 1.5, 2.0};
  std::vector<double> e;
  for (int n : {32, 64, 128}) {
    const ResidualReport r = residual(s, p, 0.0, 0.0, n);
    EXPECT_LE(r.mass_sup, 1e-12);
    e.push_back(r.momentum_l2);
  }
  EXPECT_NEAR(slope(e[0], e[1]), 2.0, 0.2);
  EXPECT_NEAR(slope(e[1], e[2]), 2.0, 0.2);
}

TEST(Stationary, FrictionBreaksTheFamily) {
  const StationaryState s = annulus_family(1.0, 3.0, 2.0, 0.5);
  const ResidualReport zero = residual(s, PhysParams{0.1, 1.5, 2.0}, 0.0, 0.0, 64);
  const ResidualReport zero_fine = residual(s, PhysParams{0.1, 1.5, 2.0}, 0.0, 0.0, 128);
  const ResidualReport one = residual(s, PhysParams{0.1, 1.5, 2.0}, 1.0, 1.0, 128);
  // one-sided wall traces are second order
  EXPECT_NEAR(slope(zero.curl_sup, zero_fine.curl_sup), 2.0, 0.2);
  // |K u.n_perp| is 1 on the outer wall and 2 on the inner one
  EXPECT_NEAR(one.curl_sup, 2.0, 2.0 * zero_fine.curl_sup);
}

TEST(Stationary, MassIncreasesWithC2AndMatches) {
  double prev = 0.0;
  for (double c2 : {2.1, 2.5, 3.0, 4.0, 6.0}) {
    const double m = annulus_family(1.0, c2, 2.0, 0.5).mass();
    EXPECT_GT(m, prev);
    prev = m;
  }
  const StationaryState s = match_mass(1.0, 2.0, 0.5, 2.0);
  EXPECT_NEAR(s.mass(), 2.0, 1e-10);
}

TEST(Stationary, Classification) {
  const CircularDomain annulus = CircularDomain::annulus(0.5);
  const CircularDomain eccentric({{Complex(0.2, 0.0), 0.3}});
  const std::vector<std::vector<double>> zero(2, std::vector<double>(16, 0.0));
  std::vector<std::vector<double>> bump = zero;
  bump[1][3] = 0.3;
  EXPECT_EQ(classify(annulus, bump).kind, SteadyCase::A);
  EXPECT_EQ(classify(annulus, zero).kind, SteadyCase::B);
  EXPECT_EQ(classify(eccentric, zero).kind, SteadyCase::C);
  // rigid motions and positive scaling of K
  const SmoothDomain smooth = SmoothDomain::from_circular(annulus);
  const SmoothDomain moved = smooth.transformed(std::polar(2.0, 1.1), Complex(3.0, -1.0));
  EXPECT_EQ(classify(moved, zero).kind, SteadyCase::B);
  std::vector<std::vector<double>> scaled = bump;
  scaled[1][3] = 7.0;
  EXPECT_EQ(classify(moved, scaled).kind, SteadyCase::A);
  EXPECT_EQ(classify(SmoothDomain::from_circular(eccentric).transformed(std::polar(0.5, -0.3), 2.0), zero).kind,
            SteadyCase::C);
}

TEST(LevelSets, AnnulusCirclesHaveConstantSpeed) {
  const CircularDomain annulus = CircularDomain::annulus(0.5);
  const SeriesHarmonic w = harmonic_measure(annulus, 1);
  const LevelSetReport r = level_set_speed_check(w, annulus, {0.6, Complex(0.0, 0.75), -0.9});
  ASSERT_EQ(r.curves.size(), 3u);
  for (const auto& c : r.curves) EXPECT_TRUE(c.closed);
  EXPECT_LE(r.max_variation, 1e-8);
}

TEST(LevelSets, ThreeHoleCriticalLevelWitnessesConflict) {
  const CircularDomain d({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}});
  const SeriesHarmonic w = harmonic_measure(d, 1) + harmonic_measure(d, 2);
  const auto crit = locate_critical_points(w, d).points;
  ASSERT_EQ(crit.size(), 1u);
  const Complex c = crit[0].location;
  // start on the critical level, off the saddle along an asymptotic direction
  Complex z = c + 0.06 * std::polar(1.0, kPi / 4);
  for (int it = 0; it < 20; ++it) {
    const Eigen::Vector2d g = w.gradient(z);
    z -= (w.value(z) - w.value(c)) * Complex(g(0), g(1)) / g.squaredNorm();
  }
  const LevelSetReport r = level_set_speed_check(w, d, {z});
  EXPECT_GE(r.max_variation, 1e-2);
}

TEST(LevelSets, ConstantFieldIsDegenerate) {
  const CircularDomain annulus = CircularDomain::annulus(0.5);
  const SeriesHarmonic one = harmonic_measure(annulus, 0) + harmonic_measure(annulus, 1);
  const LevelSetReport r = level_set_speed_check(one, annulus, {0.7});
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.curves.empty());
}
