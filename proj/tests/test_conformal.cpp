#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcflow/conformal.hpp"
#include "mcflow/laplace.hpp"

using namespace mcflow;

namespace {

// tools/oracles/mobius_modulus.py, c = 0.2, rho = 0.3
constexpr double kMobiusModulus = 0.31385933836549284;

SmoothDomain eccentric() {
  return SmoothDomain(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.2, 0.3)});
}

SmoothDomain blob() {
  auto outer = SmoothCurve::from_function(
      [](double t) { return std::polar(1.0 + 0.15 * std::cos(3 * t) + 0.05 * std::sin(2 * t), t); }, 256);
  auto hole = SmoothCurve::from_function(
      [](double t) { return Complex(0.1, -0.05) + Complex(0.3 * std::cos(t), 0.2 * std::sin(t)); }, 128);
  return SmoothDomain(outer, {hole});
}

std::vector<Complex> interior(const SmoothDomain& d, int n, unsigned seed, double margin = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  std::vector<Complex> out;
  while (int(out.size()) < n) {
    const Complex z(u(rng), u(rng));
    if (!d.contains(z)) continue;
    bool ok = true;
    for (std::size_t j = 0; j < d.num_components() && margin > 0.0; ++j)
      for (const Complex p : d.curve(j).resample(512)) ok = ok && std::abs(p - z) > margin;
    if (ok) out.push_back(z);
  }
  return out;
}

}  // namespace

TEST(CurveDirichlet, AnnulusHarmonicMeasure) {
  CurveDirichlet s(SmoothDomain(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.0, 0.5)}));
  const auto sol = s.solve([](std::size_t j, Complex) { return j == 1 ? 1.0 : 0.0; });
  EXPECT_LE(sol.boundary_residual, 1e-12);
  for (const Complex z : interior(s.domain(), 200, 1))
    EXPECT_NEAR(s.value(sol, z), std::log(std::abs(z)) / std::log(0.5), 1e-10);
}

TEST(CurveDirichlet, MatchesCircularSolverOnEccentricAnnulus) {
  CurveDirichlet s(eccentric());
  const auto sol = s.solve([](std::size_t j, Complex) { return j == 1 ? 1.0 : 0.0; });
  const SeriesHarmonic w = harmonic_measure(CircularDomain({{Complex(0.2, 0.0), 0.3}}), 1);
  double worst = 0.0;
  for (const Complex z : interior(s.domain(), 300, 2)) worst = std::max(worst, std::abs(s.value(sol, z) - w.value(z)));
  EXPECT_LE(worst, 1e-9);
}

TEST(Conformal, ConcentricAnnulusIsRotation) {
  const SmoothDomain d(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.0, 0.5)});
  const AnnulusMap m = to_annulus(d);
  EXPECT_NEAR(m.modulus(), 0.5, 1e-8);
  const Complex rot = m.forward(0.75) / 0.75;
  EXPECT_NEAR(std::abs(rot), 1.0, 1e-10);
  for (const Complex z : interior(d, 50, 3)) EXPECT_LE(std::abs(m.forward(z) - rot * z), 1e-9);
}

TEST(Conformal, EccentricModulusMatchesMobius) {
  const AnnulusMap m = to_annulus(eccentric());
  EXPECT_NEAR(m.modulus(), kMobiusModulus, 1e-8);
  EXPECT_LE(m.boundary_correspondence(), 1e-6);
}

TEST(Conformal, RejectsOtherConnectivity) {
  const SmoothDomain three(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.4, 0.15), SmoothCurve::circle(-0.4, 0.15)});
  EXPECT_THROW(to_annulus(three), Error);
  EXPECT_THROW(to_annulus(SmoothDomain(SmoothCurve::circle(0.0, 1.0), {})), Error);
}

TEST(Conformal, IdentityReport) {
  const AnnulusMap m = AnnulusMap::identity(0.5);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rad(0.51, 0.99), ang(0.0, kTwoPi);
  std::vector<Complex> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(std::polar(rad(rng), ang(rng)));
  const MapReport r = verify_map(m, samples);
  EXPECT_NEAR(r.bilipschitz, 1.0, 1e-10);
  EXPECT_LE(r.cauchy_riemann, 1e-12);
  EXPECT_LE(r.round_trip, 0.0);
}

TEST(Conformal, EccentricReport) {
  const AnnulusMap m = to_annulus(eccentric());
  const MapReport r = verify_map(m, interior(eccentric(), 100, 5, 0.01));
  EXPECT_GT(r.min_derivative, 1e-8);
  EXPECT_LE(r.angle, 1e-6);
  EXPECT_LE(r.cauchy_riemann, 1e-6);
  EXPECT_LE(r.round_trip, 1e-8);
  EXPECT_LE(r.boundary, 1e-6);
  EXPECT_LT(r.bilipschitz, 20.0);
}

TEST(Conformal, SmoothDomainRoundTripAndBoundary) {
  const AnnulusMap m = to_annulus(blob());
  EXPECT_LE(m.construction_residual(), 1e-8);
  EXPECT_LE(m.boundary_correspondence(), 1e-6);
  const MapReport r = verify_map(m, interior(blob(), 100, 6, 0.01));
  EXPECT_LE(r.round_trip, 1e-8);
  EXPECT_LE(r.angle, 1e-6);
  EXPECT_GT(r.min_derivative, 1e-8);
}

TEST(Conformal, ModulusInvariantUnderRigidMotion) {
  const double r0 = to_annulus(blob()).modulus();
  const double r1 = to_annulus(blob().transformed(std::polar(1.0, 0.7), Complex(0.3, -2.0))).modulus();
  EXPECT_NEAR(r0, r1, 1e-10);
}

TEST(Conformal, PullBackOfAnnulusMeasureIsDirectMeasure) {
  // oracle: independent circular-domain solver on the same geometry
  const AnnulusMap m = to_annulus(eccentric());
  const double lr = std::log(m.modulus());
  auto measure = pull_back(m, [lr](Complex zeta) { return std::log(std::abs(zeta)) / lr; });
  const SeriesHarmonic w = harmonic_measure(CircularDomain({{Complex(0.2, 0.0), 0.3}}), 1);
  double worst = 0.0;
  for (const Complex z : interior(eccentric(), 300, 7)) worst = std::max(worst, std::abs(measure(z) - w.value(z)));
  EXPECT_LE(worst, 1e-6);
}

TEST(Conformal, PullBackOnSmoothDomainMatchesFinerSolve) {
  const AnnulusMap m = to_annulus(blob());
  const double lr = std::log(m.modulus());
  auto measure = pull_back(m, [lr](Complex zeta) { return std::log(std::abs(zeta)) / lr; });
  CurveDirichlet direct(blob(), CurveSolverOptions{384, 6});
  const auto sol = direct.solve([](std::size_t j, Complex) { return j == 1 ? 1.0 : 0.0; });
  double worst = 0.0;
  for (const Complex z : interior(blob(), 200, 8)) worst = std::max(worst, std::abs(measure(z) - direct.value(sol, z)));
  EXPECT_LE(worst, 1e-6);
}

TEST(Conformal, PullBackPreservesHarmonicity) {
  const AnnulusMap m = to_annulus(eccentric());
  auto f = pull_back(m, [](Complex zeta) { return (zeta * zeta).real(); });
  const Complex z(-0.5, 0.3);
  double prev = 0.0;
  for (double h : {0.04, 0.02, 0.01}) {
    const double lap = (f(z + h) + f(z - h) + f(z + Complex(0, h)) + f(z - Complex(0, h)) - 4.0 * f(z)) / (h * h);
    if (prev > 0.0) EXPECT_NEAR(prev / std::abs(lap), 4.0, 0.5);
    prev = std::abs(lap);
  }
  auto c = pull_back(m, [](Complex) { return 2.5; });
  EXPECT_EQ(c(z), 2.5);
}

TEST(Conformal, PullBackDerivativeTransport) {
  const AnnulusMap m = to_annulus(eccentric());
  auto g = pull_back(m, [](Complex zeta) { return zeta * zeta; });
  auto dg = pull_back_derivative(m, [](Complex zeta) { return 2.0 * zeta; });
  const Complex z(0.1, -0.6);
  const double h = 1e-5;
  EXPECT_LE(std::abs((g(z + h) - g(z - h)) / (2 * h) - dg(z)), 1e-8);
}
