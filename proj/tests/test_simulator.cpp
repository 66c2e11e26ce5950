#include <gtest/gtest.h>

#include <cmath>

#include "mcflow/simulator.hpp"
#include "mcflow/stationary.hpp"

using namespace mcflow;

namespace {

SimulationConfig steady_config(int resolution, double final_time) {
  SimulationConfig c;
  c.resolution = resolution;
  c.final_time = final_time;
  c.cadence = final_time;
  c.params.gamma = 2.0;
  c.initial.preset = InitialPreset::SteadyFamily;
  c.initial.c1 = 1.0;
  c.initial.c2 = 3.0;
  return c;
}

SimulationConfig slip_config(int resolution, double final_time, double k) {
  SimulationConfig c;
  c.resolution = resolution;
  c.final_time = final_time;
  c.cadence = final_time / 4;
  c.k_outer = c.k_inner = k;
  c.initial.preset = InitialPreset::RandomSlip;
  c.initial.seed = 11;
  return c;
}

double relative_velocity_change(const PolarSimulator& sim, const FluidState& a, const FluidState& b) {
  const auto& ops = sim.ops();
  return std::sqrt(ops.integrate((a.u1 - b.u1).square() + (a.u2 - b.u2).square()) /
                   ops.integrate(a.u1.square() + a.u2.square()));
}

template <class Fn>
std::string error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Simulator, RestIsAnExactFixedPoint) {
  SimulationConfig c;
  c.resolution = 16;
  c.k_outer = 0.7;
  c.k_inner = 0.3;
  const PolarSimulator sim(c);
  FluidState s = sim.initial_state();
  const FluidState s0 = s;
  for (int k = 0; k < 5; ++k) s = sim.step(s, sim.max_stable_dt(s)).state;
  EXPECT_TRUE((s.rho == s0.rho).all());
  EXPECT_TRUE((s.u1 == s0.u1).all());
  EXPECT_TRUE((s.u2 == s0.u2).all());
}

TEST(Simulator, MassIsConservedPerStep) {
  const RunResult r = PolarSimulator(slip_config(24, 0.5, 0.5)).run();
  EXPECT_FALSE(r.aborted);
  EXPECT_GT(r.steps, 50);
  EXPECT_LE(r.max_mass_drift, 1e-12);
}

TEST(Simulator, SteadyFamilyDriftIsSecondOrder) {
  std::vector<double> drift;
  for (int n : {16, 32, 64}) {
    const PolarSimulator sim(steady_config(n, 1.0));
    const RunResult r = sim.run();
    drift.push_back(relative_velocity_change(sim, sim.initial_state(), r.final_state));
  }
  EXPECT_LE(drift[2], 1e-2);
  EXPECT_GE(std::log2(drift[0] / drift[1]), 1.8);
  EXPECT_GE(std::log2(drift[1] / drift[2]), 1.8);
}

TEST(Simulator, SteadyFamilyKeepsItsSizeWithoutFriction) {
  const PolarSimulator sim(steady_config(32, 5.0));
  const RunResult r = sim.run();
  ASSERT_GE(r.rows.size(), 2u);
  const double a0 = std::sqrt(r.rows.front().a2);
  for (const auto& row : r.rows) EXPECT_NEAR(std::sqrt(row.a2), a0, 0.05 * a0);
}

TEST(Simulator, RefusesStepsAboveTheCflBound) {
  const PolarSimulator sim(slip_config(16, 1.0, 0.5));
  const FluidState s = sim.initial_state();
  EXPECT_EQ(error_code([&] { sim.step(s, 2.0 * sim.max_stable_dt(s)); }), "simulator.cfl_violation");
  EXPECT_NO_THROW(sim.step(s, sim.max_stable_dt(s)));
}

TEST(Simulator, ValidatesExponents) {
  SimulationConfig c;
  c.params.beta = 1.0;
  EXPECT_EQ(error_code([&] { PolarSimulator{c}; }), "simulator.invalid_parameters");
  c.allow_parameter_override = true;
  EXPECT_NO_THROW(PolarSimulator{c});
  c.params.beta = 1.5;
  c.params.gamma = 1.0;
  c.allow_parameter_override = false;
  EXPECT_EQ(error_code([&] { PolarSimulator{c}; }), "simulator.invalid_parameters");
}

TEST(Simulator, RandomSlipDataMeetsTheWallConditions) {
  const PolarSimulator sim(slip_config(64, 1.0, 0.5));
  const FluidState s = sim.initial_state();
  const auto& ops = sim.ops();
  const PolarVector u = ops.to_polar(s.u1, s.u2);
  const double peak = (u.radial.square() + u.angular.square()).sqrt().maxCoeff();
  EXPECT_NEAR(peak, 0.1, 1e-12);
  // u and curl u vanish to third order at both walls
  const double h = ops.dr();
  const double wall = std::max({u.radial.row(0).abs().maxCoeff(), u.angular.row(0).abs().maxCoeff(),
                                u.radial.row(ops.nr() - 1).abs().maxCoeff(), u.angular.row(ops.nr() - 1).abs().maxCoeff()});
  EXPECT_LE(wall, 50.0 * h * h * peak);
  // determinism of the seeded field
  const FluidState again = PolarSimulator(slip_config(64, 1.0, 0.5)).initial_state();
  EXPECT_TRUE((again.u1 == s.u1).all());
}

TEST(Simulator, EnergyBudgetStaysInsideItsBand) {
  for (bool implicit : {true, false}) {
    SimulationConfig c = slip_config(16, 0.5, 0.5);
    c.implicit_viscosity = implicit;
    const RunResult r = PolarSimulator(c).run();
    ASSERT_FALSE(r.budget.empty());
    EXPECT_LE(r.max_budget_excess, 0.0) << "implicit=" << implicit;
  }
}

TEST(Simulator, DecaysWithFriction) {
  SimulationConfig c = slip_config(16, 20.0, 0.5);
  c.cadence = 0.1;
  const RunResult r = PolarSimulator(c).run();
  std::vector<double> t, a;
  for (const auto& row : r.rows) t.push_back(row.t), a.push_back(std::sqrt(row.a2));
  // acoustic transients dominate the first half; the tail is a clean exponential
  const DecayFit fit = fit_decay(t, a, 10.0, 20.0);
  EXPECT_GT(fit.alpha, 0.0);
  EXPECT_GE(fit.r2, 0.99);
  EXPECT_LT(a.back(), 1e-4 * a.front());
  std::vector<double> peak;
  for (const auto& row : r.rows) peak.push_back(row.sup_rho);
  EXPECT_LE(linear_trend(t, peak, 10.0, 20.0), 0.0);
}

TEST(Simulator, IdenticalConfigsGiveIdenticalRows) {
  const SimulationConfig c = slip_config(16, 0.3, 0.5);
  set_thread_count(1);
  const RunResult a = PolarSimulator(c).run();
  set_thread_count(3);
  const RunResult b = PolarSimulator(c).run();
  set_thread_count(1);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].a2, b.rows[k].a2);
    EXPECT_EQ(a.rows[k].b2, b.rows[k].b2);
    EXPECT_EQ(a.rows[k].mass, b.rows[k].mass);
  }
}

TEST(Simulator, DensityFloorHoldsNearVacuum) {
  SimulationConfig c = slip_config(16, 0.2, 0.0);
  c.initial.density_amplitude = 0.999;
  const PolarSimulator sim(c);
  const RunResult r = sim.run();
  EXPECT_GE(r.final_state.rho.minCoeff(), c.floor_factor * sim.rho_hat());
}

TEST(FitDecay, RecoversAnExactExponential) {
  std::vector<double> t, a;
  for (int k = 0; k <= 100; ++k) t.push_back(0.1 * k), a.push_back(3.0 * std::exp(-0.7 * 0.1 * k));
  const DecayFit fit = fit_decay(t, a, 0.0, 10.0);
  EXPECT_NEAR(fit.alpha, 0.7, 1e-6);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-9);
}

TEST(FitDecay, ConstantSeriesHasNoDecay) {
  std::vector<double> t, a;
  for (int k = 0; k < 30; ++k) t.push_back(k), a.push_back(2.5);
  EXPECT_NEAR(fit_decay(t, a, 0.0, 30.0).alpha, 0.0, 1e-14);
}

TEST(FitDecay, TrendIsTheLeastSquaresSlope) {
  std::vector<double> t, v;
  for (int k = 0; k < 40; ++k) t.push_back(0.5 * k), v.push_back(2.0 - 0.25 * 0.5 * k + (k % 2 ? 1e-3 : -1e-3));
  EXPECT_NEAR(linear_trend(t, v, 0.0, 20.0), -0.25, 1e-4);
}

TEST(FitDecay, RejectsBadWindows) {
  std::vector<double> t, a;
  for (int k = 0; k < 30; ++k) t.push_back(k), a.push_back(k == 5 ? 0.0 : 1.0);
  EXPECT_EQ(error_code([&] { fit_decay(t, a, 0.0, 30.0); }), "simulator.nonpositive_series");
  EXPECT_EQ(error_code([&] { fit_decay(t, a, 10.0, 15.0); }), "simulator.short_series");
}

TEST(EffectiveFlux, VanishesAtRest) {
  const PolarSimulator sim(SimulationConfig{});
  const auto [flux, vort] = effective_flux(sim.ops(), sim.initial_state(), sim.config().params, sim.friction());
  EXPECT_EQ(flux.abs().maxCoeff(), 0.0);
  EXPECT_EQ(vort.abs().maxCoeff(), 0.0);
}

TEST(EffectiveFlux, SteadyProfileIsMinusThePressureDeviation) {
  std::vector<double> err;
  for (int n : {32, 64}) {
    const SimulationConfig c = steady_config(n, 1.0);
    const PolarSimulator sim(c);
    const Field flux = effective_flux(sim.ops(), sim.initial_state(), c.params, sim.friction()).first;
    // closed form: P = rho^2 with rho = (3 - 1/(2R^2))/2, mean over the annulus by Simpson
    auto pressure = [](double R) { return std::pow(0.5 * (3.0 - 0.5 / (R * R)), 2); };
    double mean = 0.0;
    const int m = 2000;
    for (int k = 0; k <= m; ++k) {
      const double R = 0.5 + 0.5 * k / m, w = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
      mean += w * pressure(R) * R;
    }
    mean *= (0.5 / m / 3.0) * kTwoPi / (kPi * 0.75);
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      e = std::max(e, (flux.row(i) + (pressure(sim.ops().radii()(i)) - mean)).abs().maxCoeff());
    err.push_back(e);
  }
  EXPECT_LE(err[1], 1e-3);
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.3);
}

TEST(EffectiveFlux, IntegralMatchesTheBulkTerm) {
  const SimulationConfig c = slip_config(32, 1.0, 0.5);
  const PolarSimulator sim(c);
  const FluidState s = sim.initial_state();
  const auto& ops = sim.ops();
  const Field flux = effective_flux(ops, s, c.params, sim.friction()).first;
  const PolarVector pv = ops.pad_velocity(ops.to_polar(s.u1, s.u2), sim.friction());
  const Field bulk = (2.0 * c.params.mu + s.rho.pow(c.params.beta)) * ops.divergence(pv);
  EXPECT_NEAR(ops.integrate(flux), ops.integrate(bulk), 1e-10);
}

TEST(MaterialDerivative, SteadyPairMatchesTheMomentumBalance) {
  std::vector<double> err;
  for (int n : {32, 64}) {
    const SimulationConfig c = steady_config(n, 1.0);
    const PolarSimulator sim(c);
    const FluidState s = sim.initial_state();
    const PolarVector lhs = material_derivative(sim.ops(), s, s, sim.friction());
    const PolarVector rhs = momentum_balance(sim.ops(), s, c.params, sim.friction());
    // fixed band 0.6 <= R <= 0.9; the wall rows carry the first-order closure
    double e = 0.0;
    for (int i = n / 5; i < 4 * n / 5; ++i)
      e = std::max({e, (lhs.radial.row(i) - rhs.radial.row(i)).abs().maxCoeff(),
                    (lhs.angular.row(i) - rhs.angular.row(i)).abs().maxCoeff()});
    err.push_back(e);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
}

TEST(MaterialDerivative, RecoversTheTimeDerivative) {
  const SimulationConfig c = slip_config(32, 1.0, 0.0);
  const PolarSimulator sim(c);
  FluidState prev = sim.initial_state();
  FluidState next = prev;
  const Field w1 = prev.u1, w2 = prev.u2;
  prev.u1.setZero();
  prev.u2.setZero();
  const double dt = 1e-4;
  next.time = dt;
  next.u1 = dt * w1;
  next.u2 = dt * w2;
  const PolarVector m = material_derivative(sim.ops(), prev, next, sim.friction());
  const PolarVector expect = sim.ops().to_polar(prev.rho * w1, prev.rho * w2);
  // the advective part is (dt/2)^2 u.grad u
  EXPECT_LE((m.radial - expect.radial).abs().maxCoeff(), 1e-7);
  EXPECT_LE((m.angular - expect.angular).abs().maxCoeff(), 1e-7);
}

TEST(MaterialDerivative, RejectsMismatchedSnapshots) {
  const PolarSimulator coarse(slip_config(16, 1.0, 0.0)), fine(slip_config(32, 1.0, 0.0));
  const FluidState a = coarse.initial_state(), b = fine.initial_state();
  EXPECT_EQ(error_code([&] { material_derivative(coarse.ops(), a, b, coarse.friction()); }), "simulator.grid_mismatch");
  FluidState c = a;
  c.u1 *= 2.0;
  EXPECT_EQ(error_code([&] { material_derivative(coarse.ops(), a, c, coarse.friction()); }), "simulator.identical_times");
}

namespace {

MaskedConfig three_holes(int resolution, double final_time) {
  MaskedConfig c;
  c.domain = CircularDomain({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}, {Complex(0.05, 0.55), 0.12}});
  c.resolution = resolution;
  c.final_time = final_time;
  c.cadence = final_time / 4;
  c.friction = {0.5, 0.5, 0.5, 0.5};
  c.velocity_amplitude = 0.2;
  c.density_amplitude = 0.1;
  return c;
}

}  // namespace

TEST(MaskedSimulator, RestIsAnExactFixedPoint) {
  MaskedConfig c = three_holes(32, 0.1);
  c.velocity_amplitude = c.density_amplitude = 0.0;
  const MaskedSimulator sim(c);
  FluidState s = sim.initial_state();
  const FluidState s0 = s;
  for (int k = 0; k < 5; ++k) s = sim.step(s, sim.max_stable_dt(s));
  EXPECT_TRUE((s.rho == s0.rho).all());
  EXPECT_TRUE((s.u1 == s0.u1).all());
}

TEST(MaskedSimulator, ConservesMassAndLosesEnergy) {
  const MaskedSimulator sim(three_holes(32, 0.5));
  const MaskedRun r = sim.run();
  EXPECT_FALSE(r.aborted);
  EXPECT_LE(r.max_mass_drift, 1e-12);
  for (std::size_t k = 1; k < r.rows.size(); ++k) EXPECT_LT(r.rows[k].energy, r.rows[k - 1].energy);
  EXPECT_LT(r.rows.back().kinetic, 0.1 * r.rows.front().kinetic);
}

TEST(MaskedSimulator, RefusesStepsAboveTheCflBound) {
  const MaskedSimulator sim(three_holes(32, 0.5));
  const FluidState s = sim.initial_state();
  EXPECT_EQ(error_code([&] { sim.step(s, 1.5 * sim.max_stable_dt(s)); }), "simulator.cfl_violation");
}

TEST(Simulator, RelativeEnergyIsEnergyAboveRest) {
  const PolarSimulator sim(slip_config(16, 0.1, 0.5));
  const FluidState s = sim.initial_state();
  const double g = sim.config().params.gamma;
  const double rest = sim.ops().integrate(sim.ops().constant(1.0)) * std::pow(sim.rho_hat(), g) / (g - 1.0);
  EXPECT_NEAR(sim.relative_energy(s), sim.energy(s) - rest, 1e-12);
  EXPECT_GT(sim.relative_energy(s), 0.0);
  FluidState calm = s;
  calm.rho.setConstant(sim.rho_hat());
  calm.u1.setZero();
  calm.u2.setZero();
  EXPECT_EQ(sim.relative_energy(calm), 0.0);
}
