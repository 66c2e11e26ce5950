#include <cmath>

#include <gtest/gtest.h>

#include "mcflow/commutator.hpp"
#include "mcflow/core.hpp"
#include "mcflow/stationary.hpp"

using namespace mcflow;

namespace {

constexpr double kInner = 0.5;

PolarOps annulus_ops(int n) { return PolarOps(polar_grid(kInner, n, 4 * n)); }

FluidState from_polar(const PolarOps& ops, const std::function<double(Complex)>& rho,
                      const std::function<double(Complex)>& radial, const std::function<double(Complex)>& angular) {
  FluidState s;
  s.rho = ops.sample(rho);
  s.u1 = ops.sample([&](Complex z) {
    const double th = std::arg(z);
    return radial(z) * std::cos(th) - angular(z) * std::sin(th);
  });
  s.u2 = ops.sample([&](Complex z) {
    const double th = std::arg(z);
    return radial(z) * std::sin(th) + angular(z) * std::cos(th);
  });
  return s;
}

// u = grad_perp psi, psi = (R - r)^2 (R - 1)^2 (1 + cos(theta)/2), rho = 1
FluidState psi_field(const PolarOps& ops) {
  const double r = kInner;
  return from_polar(
      ops, [](Complex) { return 1.0; },
      [r](Complex z) {
        const double R = std::abs(z);
        return 0.5 * (R - r) * (R - r) * (R - 1.0) * (R - 1.0) / R * std::sin(std::arg(z));
      },
      [r](Complex z) {
        const double R = std::abs(z);
        return 2.0 * (R - r) * (R - 1.0) * (2.0 * R - r - 1.0) * (1.0 + 0.5 * std::cos(std::arg(z)));
      });
}

// rho = 1 and u = grad v with d_R v = 0 on both walls: the inverse returns v
// once v has zero boundary mean.
struct GradientField {
  bool radial_only;
  double kappa = kPi / (1.0 - kInner);
  double mean = (kInner - 1.0) / (1.0 + kInner);
  double v(Complex z) const {
    const double c = std::cos(kappa * (std::abs(z) - kInner));
    return radial_only ? c - mean : c * std::cos(std::arg(z));
  }
  FluidState state(const PolarOps& ops) const {
    return from_polar(
        ops, [](Complex) { return 1.0; },
        [this](Complex z) {
          const double s = -kappa * std::sin(kappa * (std::abs(z) - kInner));
          return radial_only ? s : s * std::cos(std::arg(z));
        },
        [this](Complex z) {
          return radial_only ? 0.0
                             : -std::cos(kappa * (std::abs(z) - kInner)) / std::abs(z) * std::sin(std::arg(z));
        });
  }
};

FluidState steady_state(const PolarOps& ops, const StationaryState& st) {
  FluidState s;
  s.rho = ops.sample([&](Complex z) { return st.density(z); });
  s.u1 = ops.sample([&](Complex z) { return st.velocity(z)(0); });
  s.u2 = ops.sample([&](Complex z) { return st.velocity(z)(1); });
  return s;
}

FluidState scaled(FluidState s, double rho_factor) {
  s.rho *= rho_factor;
  return s;
}

const std::vector<Complex> kProbes = {std::polar(0.6, 0.3), std::polar(0.75, 1.9), std::polar(0.9, 4.0),
                                      std::polar(0.7, 2.5)};

}  // namespace

TEST(SingularQuadrature, LogCellMatchesClosedForm) {
  const Complex lo(0.2, -0.1), hi(0.25, -0.05);
  for (Complex x : {Complex(0.225, -0.075), Complex(0.21, -0.09), Complex(0.249, -0.0501), Complex(0.275, -0.075),
                    Complex(0.3, 0.1), Complex(0.2, -0.1), Complex(0.225, -0.1)}) {
    EXPECT_NEAR(SingularQuadrature::log_cell(x, lo, hi), SingularQuadrature::log_cell_closed_form(x, lo, hi), 1e-10)
        << x;
  }
}

TEST(SingularQuadrature, CutoffIsAPartition) {
  EXPECT_EQ(SingularQuadrature::cutoff(0.2), 1.0);
  EXPECT_EQ(SingularQuadrature::cutoff(1.0), 0.0);
  EXPECT_NEAR(SingularQuadrature::cutoff(0.75), 0.5, 1e-15);
  double prev = 1.0;
  for (double s = 0.5; s <= 1.0; s += 0.01) {
    EXPECT_LE(SingularQuadrature::cutoff(s), prev + 1e-15);
    prev = SingularQuadrature::cutoff(s);
  }
}

TEST(SingularQuadrature, RejectsPatchOutsideTheAnnulus) {
  const PolarOps ops = annulus_ops(16);
  const SingularQuadrature quad(ops);
  try {
    quad.patch_radius(std::polar(0.99, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "commutator.patch_outside");
  }
}

TEST(InvLaplaceDiv, RecoversThePotentialOfAGradient) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  for (bool radial : {true, false}) {
    const GradientField g{radial};
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
      const PolarOps ops = annulus_ops(n);
      const SingularQuadrature quad(ops);
      const auto values = inv_laplace_div(green, quad, g.state(ops), kProbes);
      double e = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < kProbes.size(); ++k) {
        e = std::max(e, std::abs(values[k] - g.v(kProbes[k])));
        scale = std::max(scale, std::abs(g.v(kProbes[k])));
      }
      EXPECT_LE(e, 0.02 * scale) << n;
      err.push_back(e);
    }
    EXPECT_GE(loglog_slope({1.0 / 32, 1.0 / 64, 1.0 / 128}, err), 1.8) << radial;
  }
}

TEST(InvLaplaceDiv, ZeroVelocityGivesZero) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  FluidState s{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  for (double v : inv_laplace_div(green, SingularQuadrature(ops), s, kProbes)) EXPECT_EQ(v, 0.0);
}

TEST(InvLaplaceDiv, IsLinearInTheMomentum) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(24);
  const SingularQuadrature quad(ops);
  const FluidState a = GradientField{true}.state(ops), b = psi_field(ops);
  FluidState sum = a;
  sum.u1 = 2.0 * a.u1 - 3.0 * b.u1;
  sum.u2 = 2.0 * a.u2 - 3.0 * b.u2;
  const auto ia = inv_laplace_div(green, quad, a, kProbes), ib = inv_laplace_div(green, quad, b, kProbes);
  const auto is = inv_laplace_div(green, quad, sum, kProbes);
  for (std::size_t k = 0; k < kProbes.size(); ++k) EXPECT_NEAR(is[k], 2.0 * ia[k] - 3.0 * ib[k], 1e-10);
}

TEST(Kernel, MixedDerivativeMatchesNestedDifferences) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const double eta = 1e-4;
  for (auto [x, y] : {std::pair{std::polar(0.7, 0.2), std::polar(0.85, 1.3)},
                      std::pair{std::polar(0.55, 2.0), std::polar(0.9, 2.6)},
                      std::pair{std::polar(0.95, -1.0), std::polar(0.6, 3.0)}}) {
    KernelDerivatives k = fundamental_derivatives(y, x);
    k += green.H(y, *green.source(x));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Complex ex = i == 0 ? Complex(eta, 0) : Complex(0, eta);
        const Complex ey = j == 0 ? Complex(eta, 0) : Complex(0, eta);
        const double fd = (green.eval_N(y + ey, x + ex) - green.eval_N(y + ey, x - ex) -
                           green.eval_N(y - ey, x + ex) + green.eval_N(y - ey, x - ex)) /
                          (4.0 * eta * eta);
        EXPECT_NEAR(k.mixed(i, j), fd, 1e-5) << i << j;
      }
  }
}

TEST(InnerCommutator, ZeroVelocityGivesZero) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  FluidState s{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  EXPECT_EQ(inner_commutator(green, SingularQuadrature(ops), s, std::polar(0.75, 1.0)), 0.0);
}

TEST(InnerCommutator, MatchesDenseQuadratureAndItsBound) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps coarse = annulus_ops(32), dense = annulus_ops(128);
  const FluidState sc = psi_field(coarse), sd = psi_field(dense);
  for (Complex x : {std::polar(0.75, 0.4), std::polar(0.65, 2.0), std::polar(0.85, -2.5)}) {
    const CommutatorBound c = inner_commutator_bound(green, SingularQuadrature(coarse), sc, x);
    const double d = inner_commutator(green, SingularQuadrature(dense), sd, x);
    EXPECT_LE(std::abs(c.value - d), 0.03 * std::abs(d)) << x;
    EXPECT_LE(std::abs(c.value), c.kernel * c.integral) << x;
    EXPECT_GT(c.kernel, 1.0 / (2.0 * kPi) * 0.5);
  }
}

TEST(InnerCommutator, IsLinearInTheMomentumAtFixedVelocity) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(24);
  const SingularQuadrature quad(ops);
  const FluidState s = psi_field(ops);
  const Complex x = std::polar(0.75, 1.0);
  EXPECT_NEAR(inner_commutator(green, quad, scaled(s, 2.5), x), 2.5 * inner_commutator(green, quad, s, x), 1e-10);
}

TEST(BoundaryTerm, ZeroVelocityGivesZero) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  FluidState s{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  EXPECT_EQ(boundary_term_B(green, ops, s, std::polar(0.75, 1.0)).value, 0.0);
}

TEST(BoundaryTerm, FarBandConstantIsStable) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  std::vector<double> constants;
  for (int n : {32, 64}) {
    const PolarOps ops = annulus_ops(n);
    const BoundaryTerm b = boundary_term_B(green, ops, psi_field(ops), std::polar(0.72, 0.8));
    EXPECT_FALSE(b.near);
    constants.push_back(std::abs(b.value) / b.energy);
  }
  EXPECT_GT(constants[0], 0.0);
  EXPECT_NEAR(constants[0], constants[1], 0.05 * constants[1]);
}

TEST(BoundaryTerm, NearBandMatchesDenseQuadrature) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps coarse = annulus_ops(32), dense = annulus_ops(128);
  const StationaryState st = annulus_family(1.0, 3.0, 1.4, kInner);
  for (Complex x : {std::polar(0.95, 0.7), std::polar(0.55, 2.2)}) {
    for (const auto& [c, d] : {std::pair{psi_field(coarse), psi_field(dense)},
                               std::pair{steady_state(coarse, st), steady_state(dense, st)}}) {
      const BoundaryTerm bc = boundary_term_B(green, coarse, c, x), bd = boundary_term_B(green, dense, d, x);
      EXPECT_TRUE(bc.near);
      EXPECT_LE(std::abs(bc.value - bd.value), 0.05 * std::abs(bd.value)) << x;
      EXPECT_GT(bc.near_bound, 0.0);
    }
  }
}

TEST(BoundaryTerm, IsLinearInTheMomentumAtFixedVelocity) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(24);
  const FluidState s = psi_field(ops);
  for (Complex x : {std::polar(0.75, 1.0), std::polar(0.95, 1.0)})
    EXPECT_NEAR(boundary_term_B(green, ops, scaled(s, 2.5), x).value,
                2.5 * boundary_term_B(green, ops, s, x).value, 1e-10);
}

TEST(BoundaryTerm, SplitIntegrandIsOrderOneSingular) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const StationaryState st = annulus_family(1.0, 3.0, 1.4, kInner);
  for (std::size_t j : {0u, 1u}) {
    const SingularityReport rep = b_integrand_singularity(
        green, j, [&](Complex z) { return st.velocity(z); }, [&](Complex z) { return st.density(z); });
    EXPECT_NEAR(rep.split_slope, -1.0, 0.2) << j;
    EXPECT_NEAR(rep.kernel_slope, -2.0, 0.2) << j;
  }
}

TEST(Remainder, FrictionlessRemainderIsTheBoundaryMean) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(32);
  const PhysParams params;
  const StationaryState st = annulus_family(1.0, 3.0, params.gamma, kInner);
  const FluidState s = steady_state(ops, st);
  const WallFriction k = WallFriction::constant(ops.nt(), 0.0, 0.0);
  // mean pressure by Gauss-Legendre in R
  const GaussRule g = gauss_legendre(40, kInner, 1.0);
  double pbar = 0.0;
  for (int q = 0; q < 40; ++q) pbar += g.weights(q) * 2.0 * kPi * g.nodes(q) * params.pressure(st.density(g.nodes(q)));
  pbar /= kPi * (1.0 - kInner * kInner);
  const double fo = -(params.pressure(st.density(1.0)) - pbar), fi = -(params.pressure(st.density(kInner)) - pbar);
  const WallValues trace{Eigen::ArrayXd::Constant(ops.nt(), fo), Eigen::ArrayXd::Constant(ops.nt(), fi)};
  const double expected = (fo + kInner * fi) / (1.0 + kInner);
  for (Complex x : {std::polar(0.6, 0.1), std::polar(0.9, 2.0)})
    EXPECT_NEAR(remainder_R(green, ops, s, params, k, trace, x), expected, 1e-6);
  // the grid trace of the constitutive flux lands on the same value
  const WallValues grid_trace = wall_values(ops, effective_flux(ops, s, params, k).first);
  EXPECT_NEAR(remainder_R(green, ops, s, params, k, grid_trace, 0.7), expected, 1e-3);
}

TEST(Remainder, RestStateGivesZero) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  const PhysParams params;
  FluidState s{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  const WallFriction k = WallFriction::constant(ops.nt(), 1.0, 1.0);
  const WallValues trace = wall_values(ops, effective_flux(ops, s, params, k).first);
  EXPECT_EQ(remainder_R(green, ops, s, params, k, trace, 0.7), 0.0);
}

TEST(Remainder, FrictionTermFollowsTheTangentialTrace) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(32);
  const PhysParams params;
  const FluidState s = psi_field(ops);
  // u_theta vanishes on the walls: only the mean survives even with friction
  const WallValues zero{Eigen::ArrayXd::Zero(ops.nt()), Eigen::ArrayXd::Zero(ops.nt())};
  const WallFriction k = WallFriction::constant(ops.nt(), 2.0, 1.0);
  EXPECT_NEAR(remainder_R(green, ops, s, params, k, zero, 0.7), 0.0, 1e-12);
  // a swirl with angular structure on the walls gives an x-dependent term
  const FluidState t = from_polar(
      ops, [](Complex) { return 1.0; }, [](Complex) { return 0.0; },
      [](Complex z) { return 1.0 + 0.3 * std::cos(2.0 * std::arg(z)); });
  const double a = remainder_R(green, ops, t, params, k, zero, std::polar(0.7, 0.0));
  const double b = remainder_R(green, ops, t, params, k, zero, std::polar(0.7, 0.8));
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_GT(std::abs(a - b), 1e-4);
}

TEST(NeumannCheck, SteadyResidualsAreSecondOrder) {
  const PhysParams params;
  const StationaryState st = annulus_family(1.0, 3.0, params.gamma, kInner);
  std::vector<double> interior, boundary;
  for (int n : {32, 64, 128}) {
    const PolarOps ops = annulus_ops(n);
    const FluidState s = steady_state(ops, st);
    const NeumannResidual r = neumann_F_check(ops, s, s, params, WallFriction::constant(ops.nt(), 0.0, 0.0));
    interior.push_back(r.interior);
    boundary.push_back(r.boundary);
  }
  const std::vector<double> h = {1.0 / 32, 1.0 / 64, 1.0 / 128};
  EXPECT_GE(loglog_slope(h, interior), 1.8);
  EXPECT_GE(loglog_slope(h, boundary), 1.8);
}

TEST(NeumannCheck, RestStateIsExact) {
  const PolarOps ops = annulus_ops(16);
  FluidState s{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  const NeumannResidual r = neumann_F_check(ops, s, s, PhysParams{}, WallFriction::constant(ops.nt(), 1.0, 1.0));
  EXPECT_EQ(r.interior, 0.0);
  EXPECT_EQ(r.boundary, 0.0);
}

TEST(NeumannSolve, ReproducesTheSteadyFlux) {
  const PhysParams params;
  const StationaryState st = annulus_family(1.0, 3.0, params.gamma, kInner);
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const PolarOps ops = annulus_ops(n);
    const FluidState s = steady_state(ops, st);
    const WallFriction k = WallFriction::constant(ops.nt(), 0.0, 0.0);
    // rho u_dot = -rho c1^2 / R^3 e_R
    PolarVector g{ops.sample([&](Complex z) { return -st.density(z) / std::pow(std::abs(z), 3); }), ops.zeros()};
    const Field f = solve_flux_neumann(ops, g, s, params, k);
    Field exact = ops.sample([&](Complex z) { return -params.pressure(st.density(z)); });
    const WallValues tr = wall_values(ops, exact);
    exact -= ops.wall_integral(tr.outer, tr.inner) / (2.0 * kPi * (1.0 + kInner));
    err.push_back((f - exact).abs().maxCoeff());
  }
  EXPECT_LE(err.back(), 1e-3);
  EXPECT_GE(loglog_slope({1.0 / 16, 1.0 / 32, 1.0 / 64}, err), 1.8);
}

TEST(SamplePoints, CoverBothBands) {
  const auto pts = sample_points(CircularDomain::annulus(kInner));
  ASSERT_EQ(pts.size(), 32u);
  int band = 0;
  for (const auto& p : pts) {
    const double R = std::abs(p.x);
    EXPECT_NEAR(p.component == 0 ? 1.0 - R : R - kInner, p.distance, 1e-12);
    if (p.band) {
      ++band;
      EXPECT_LE(p.distance, 0.5 / 8.0 + 1e-12);
    }
  }
  EXPECT_EQ(band, 16);
  EXPECT_THROW(sample_points(CircularDomain::unit_disc()), Error);
}

TEST(Representation, SteadyFamilyClosesUnderRefinement) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  RepresentationInput in;
  const StationaryState st = annulus_family(1.0, 3.0, in.params.gamma, kInner);
  std::vector<double> err;
  for (int n : {32, 64}) {
    const PolarOps ops = annulus_ops(n);
    in.prev = in.next = steady_state(ops, st);
    in.friction = WallFriction::constant(ops.nt(), 0.0, 0.0);
    const RepresentationReport rep = verify_representation(green, ops, in);
    EXPECT_LE(rep.err_direct_c512, 0.05);
    EXPECT_LE(rep.err_direct_qp11, 0.05);
    err.push_back(rep.err_direct_c512);
  }
  EXPECT_GE(loglog_slope({1.0 / 32, 1.0 / 64}, err), 1.0);
}

TEST(Representation, ManufacturedFlowClosesUnderRefinement) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const ManufacturedFlow flow(kInner);
  std::vector<double> err;
  for (int n : {32, 64}) {
    const PolarOps ops = annulus_ops(n);
    RepresentationInput in;
    in.prev = flow.state(ops, 0.499);
    in.next = flow.state(ops, 0.501);
    in.friction = WallFriction::constant(ops.nt(), 0.0, 0.0);
    in.exact_rho_udot = flow.rho_udot(ops, 0.5);
    const RepresentationReport rep = verify_representation(green, ops, in);
    EXPECT_LE(rep.err_direct_qp11, 0.05);
    err.push_back(rep.err_direct_qp11);
  }
  EXPECT_LT(err[1], err[0]);
}

TEST(Representation, RestStateGivesZeroEverywhere) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  RepresentationInput in;
  in.prev = in.next = FluidState{0.0, ops.constant(1.0), ops.zeros(), ops.zeros()};
  in.friction = WallFriction::constant(ops.nt(), 0.0, 0.0);
  const RepresentationReport rep = verify_representation(green, ops, in, QuadratureOptions{0.1, 1.0});
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.direct, 0.0);
    EXPECT_EQ(row.c512, 0.0);
    EXPECT_EQ(row.qp11, 0.0);
  }
}

TEST(Representation, RejectsDistinctSnapshotsAtOneTime) {
  const NeumannGreen green(CircularDomain::annulus(kInner));
  const PolarOps ops = annulus_ops(16);
  const ManufacturedFlow flow(kInner);
  RepresentationInput in;
  in.prev = flow.state(ops, 0.5);
  in.next = flow.state(ops, 0.6);
  in.next.time = 0.5;
  in.friction = WallFriction::constant(ops.nt(), 0.0, 0.0);
  try {
    verify_representation(green, ops, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "commutator.identical_times");
  }
}

TEST(Manufactured, DensitySolvesContinuity) {
  const PolarOps ops = annulus_ops(16);
  const ManufacturedFlow flow(kInner);
  const double t = 0.5, dt = 1e-4;
  const FluidState a = flow.state(ops, t - dt), b = flow.state(ops, t + dt), m = flow.state(ops, t);
  // d_t rho + div(rho u) = 0 with div(rho u) = (1 + t) div M
  const Field drho = (b.rho - a.rho) / (2.0 * dt);
  const Field div = ops.sample([&](Complex z) { return (1.0 + t) * flow.div_shape(z); });
  EXPECT_LE((drho + div).abs().maxCoeff(), 1e-7);
  EXPECT_GT(m.rho.minCoeff(), 0.5);
}
