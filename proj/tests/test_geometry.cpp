#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcflow/geometry.hpp"

using namespace mcflow;

TEST(Gap, ConcentricAnnulus) { EXPECT_DOUBLE_EQ(CircularDomain::annulus(0.5).gap(), 0.5); }

TEST(Gap, TwoHolesBruteForce) {
  const CircularDomain d({{0.3, 0.2}, {-0.3, 0.2}});
  // brute force: sample both circles densely and take the smallest distance
  double best = 1e9;
  for (int a = 0; a < 2000; ++a)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        const Circle ci = d.component(i), cj = d.component(j);
        const Complex p = ci.center + std::polar(ci.radius, kTwoPi * a / 2000);
        for (int b = 0; b < 2000; b += 1) {
          const Complex q = cj.center + std::polar(cj.radius, kTwoPi * b / 2000);
          best = std::min(best, std::abs(p - q));
        }
      }
  EXPECT_NEAR(d.gap(), 0.2, 1e-15);
  EXPECT_NEAR(best, 0.2, 1e-5);
}

TEST(Gap, HoleLeavingDiscIsRejected) {
  EXPECT_THROW(CircularDomain({{0.9, 0.2}}), Error);
  EXPECT_THROW(CircularDomain({{0.3, 0.2}, {-0.05, 0.2}}), Error);
}

TEST(Domain, OuterCircleIsRescaled) {
  const CircularDomain d(Circle{Complex(2.0, 1.0), 2.0}, {{Complex(2.0, 1.0), 1.0}});
  EXPECT_TRUE(d.is_concentric_annulus());
  EXPECT_DOUBLE_EQ(d.holes()[0].radius, 0.5);
}

TEST(BoundaryFrame, UnitCircleAtZero) {
  const auto f = CircularDomain::annulus(0.5).boundary_frame(0, 0.0);
  EXPECT_NEAR(std::abs(f.normal - Complex(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.tangent - Complex(0, -1)), 0.0, 1e-15);
}

TEST(BoundaryFrame, InnerCirclePointsTowardCenter) {
  const auto f = CircularDomain::annulus(0.5).boundary_frame(1, kPi / 2);
  EXPECT_NEAR(std::abs(f.point - Complex(0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.normal - Complex(0, -1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.tangent - Complex(-1, 0)), 0.0, 1e-15);
}

TEST(BoundaryFrame, OrthonormalEverywhere) {
  const CircularDomain d({{0.3, 0.2}, {-0.3, 0.2}});
  for (std::size_t j = 0; j < 3; ++j)
    for (int k = 0; k < 50; ++k) {
      const auto f = d.boundary_frame(j, 0.37 * k);
      EXPECT_NEAR(dot(f.normal, f.tangent), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(f.normal), 1.0, 1e-15);
      EXPECT_NEAR(f.tangent.real(), f.normal.imag(), 1e-15);
      EXPECT_NEAR(f.tangent.imag(), -f.normal.real(), 1e-15);
    }
  EXPECT_THROW(d.boundary_frame(3, 0.0), Error);
}

TEST(BoundaryFrame, EllipseNormalOrthogonalToFiniteDifferenceTangent) {
  const auto ellipse = SmoothCurve::from_function([](double t) { return Complex(std::cos(t), 0.6 * std::sin(t)); }, 128);
  const SmoothDomain d(ellipse, {SmoothCurve::circle(0.1, 0.2)});
  for (int k = 0; k < 40; ++k) {
    const double t = 0.157 * k, e = 1e-5;
    const Complex fd = (Complex(std::cos(t + e), 0.6 * std::sin(t + e)) - Complex(std::cos(t - e), 0.6 * std::sin(t - e))) / (2 * e);
    const auto f = d.boundary_frame(0, t);
    EXPECT_LE(std::abs(dot(f.normal, fd)) / std::abs(fd), 1e-9);
    EXPECT_LE(std::abs(f.tangent + fd / std::abs(fd)), 1e-8);  // n_perp is minus the fluid-left tangent
  }
}

TEST(Projection, Examples) {
  const CircularDomain d = CircularDomain::annulus(0.5);
  EXPECT_NEAR(std::abs(d.project(0.5, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d.project(0.7, 1) - 0.5), 0.0, 1e-15);
  EXPECT_THROW(d.project(0.0, 1), Error);
}

TEST(Projection, Idempotent) {
  const CircularDomain d({{Complex(0.2, 0.1), 0.2}, {Complex(-0.4, -0.3), 0.15}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) {
    const Complex z(u(rng), u(rng));
    if (!d.contains(z)) continue;
    for (std::size_t j = 0; j < 3; ++j) {
      const Complex p = d.project(z, j);
      EXPECT_LE(std::abs(d.project(p, j) - p), 1e-12);
    }
  }
}

TEST(SmoothCurve, TangentMatchesParametrization) {
  auto z = [](double t) { return Complex(std::cos(t) + 0.1 * std::cos(2 * t), 0.7 * std::sin(t)); };
  const auto c = SmoothCurve::from_function(z, 96);
  for (int k = 0; k < 30; ++k) {
    const double t = 0.2 * k;
    const Complex exact(-std::sin(t) - 0.2 * std::sin(2 * t), 0.7 * std::cos(t));
    EXPECT_LE(std::abs(c.derivative(t) - exact), 1e-8);
    EXPECT_LE(std::abs(c.point(t) - z(t)), 1e-12);
  }
  EXPECT_LT(c.second_difference_defect(), 0.2);
  EXPECT_THROW(SmoothCurve(std::vector<Complex>(10, 0.0)), Error);
}

TEST(SmoothDomain, OrientationAndContainment) {
  const SmoothDomain d(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.2, 0.3).reversed()});
  EXPECT_TRUE(d.outer().counterclockwise());
  EXPECT_FALSE(d.holes()[0].counterclockwise());
  EXPECT_TRUE(d.contains(Complex(-0.5, 0.0)));
  EXPECT_FALSE(d.contains(Complex(0.2, 0.0)));
  EXPECT_THROW(SmoothDomain(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.9, 0.3)}), Error);
}

TEST(Grid, PolarAnnulus) {
  const Grid g = build_grid(CircularDomain::annulus(0.5), 64);
  EXPECT_EQ(g.layout, Grid::Layout::Polar);
  EXPECT_EQ(g.n_radial, 64);
  EXPECT_EQ(g.n_angular, 256);
  EXPECT_DOUBLE_EQ(g.h, 0.5 / 64);
  double area = 0.0;
  for (double w : g.weights) area += w;
  EXPECT_NEAR(area, kPi * 0.75, 1e-12);
  for (const auto& b : g.boundary[1]) EXPECT_NEAR(std::abs(b.point), 0.5, 1e-15);
}

TEST(Grid, MaskedThreeHoles) {
  const CircularDomain d({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}, {Complex(0.0, 0.5), 0.15}});
  const Grid g = build_grid(d, 128);
  EXPECT_EQ(g.layout, Grid::Layout::Cartesian);
  for (const auto& z : g.nodes) EXPECT_TRUE(d.contains(z));
  for (std::size_t j = 0; j < d.num_components(); ++j)
    for (const auto& b : g.boundary[j]) EXPECT_LE(d.distance_to(b.point, j), g.h * g.h);
  double area = 0.0;
  for (double w : g.weights) area += w;
  EXPECT_NEAR(area, d.area(), 0.02);
}

TEST(Grid, RefusesSmallGapOrResolution) {
  EXPECT_THROW(build_grid(CircularDomain::annulus(0.5), 4), Error);
  const CircularDomain tight({{Complex(0.3, 0.0), 0.2}, {Complex(-0.12, 0.0), 0.2}});
  EXPECT_THROW(build_grid(tight, 64), Error);
}
