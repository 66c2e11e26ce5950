#include "mcflow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include <unsupported/Eigen/FFT>

#include "mcflow/stationary.hpp"

namespace mcflow {

namespace {

struct LineFit {
  double slope, intercept, r2;
};

LineFit least_squares(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1,
                      bool logarithmic) {
  if (t.size() != v.size()) throw Error("simulator.invalid_series", "time and value series differ in length");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!std::isfinite(v[i])) throw Error("simulator.invalid_series", "series has non-finite values");
    if (logarithmic && !(v[i] > 0.0)) throw Error("simulator.nonpositive_series", "decay fit needs positive values");
    xs.push_back(t[i]);
    ys.push_back(logarithmic ? std::log(v[i]) : v[i]);
  }
  if (xs.size() < 20) throw Error("simulator.short_series", "fit needs at least 20 samples in the window");
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0};
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& a, double t0, double t1) {
  const LineFit f = least_squares(t, a, t0, t1, true);
  return {-f.slope, f.r2, f.intercept};
}

double linear_trend(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1) {
  return least_squares(t, v, t0, t1, false).slope;
}

Field ViscousStabilizer::solve(const Field& b, double dt, const Eigen::ArrayXd& sigma, double ghost_inner,
                               double ghost_outer) const {
  const PolarOps& ops = *ops_;
  const int n = ops.nr(), m = ops.nt();
  const double dr = ops.dr(), dth = ops.dtheta(), rin = ops.grid().inner_radius;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::vector<std::complex<double>>> spec(n);
  std::vector<double> row(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) row[j] = b(i, j);
    fft.fwd(spec[i], row);
  }
  std::vector<double> lo(n), di(n), up(n), cp(n);
  std::vector<std::complex<double>> dp(n);
  const int modes = m / 2 + 1;
  for (int mode = 0; mode < modes; ++mode) {
    const double lam = (2.0 - 2.0 * std::cos(mode * dth)) / (dth * dth);
    for (int i = 0; i < n; ++i) {
      const double R = ops.radii()(i);
      const double rm = rin + i * dr, rp = rin + (i + 1) * dr;
      const double s = dt * sigma(i);
      lo[i] = -s * rm / (R * dr * dr);
      up[i] = -s * rp / (R * dr * dr);
      di[i] = 1.0 + s * ((rm + rp) / (R * dr * dr) + (lam + 1.0) / (R * R));
    }
    di[0] += lo[0] * ghost_inner;
    di[n - 1] += up[n - 1] * ghost_outer;
    // Thomas sweep
    cp[0] = up[0] / di[0];
    dp[0] = spec[0][mode] / di[0];
    for (int i = 1; i < n; ++i) {
      const double den = di[i] - lo[i] * cp[i - 1];
      cp[i] = up[i] / den;
      dp[i] = (spec[i][mode] - lo[i] * dp[i - 1]) / den;
    }
    spec[n - 1][mode] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) spec[i][mode] = dp[i] - cp[i] * spec[i + 1][mode];
  }
  Field out(n, m);
  for (int i = 0; i < n; ++i) {
    fft.inv(row, spec[i], m);
    for (int j = 0; j < m; ++j) out(i, j) = row[j];
  }
  return out;
}

namespace {

void validate(const SimulationConfig& c) {
  auto bad = [](const std::string& what) { throw Error("simulator.invalid_config", what); };
  if (!(c.inner_radius > 0.0 && c.inner_radius < 1.0)) bad("inner radius must lie in (0, 1)");
  if (c.resolution < 8) bad("resolution must be at least 8");
  if (!(c.final_time > 0.0) || !(c.cadence > 0.0)) bad("final time and cadence must be positive");
  if (!(c.safety > 0.0 && c.safety <= 1.0)) bad("safety factor must lie in (0, 1]");
  if (c.k_outer < 0.0 || c.k_inner < 0.0) bad("friction must be non-negative");
  if (!(c.params.mu > 0.0)) bad("mu must be positive");
  const bool physical = c.params.beta > 4.0 / 3.0 && c.params.gamma > 1.0;
  if (!physical) {
    if (!c.allow_parameter_override)
      throw Error("simulator.invalid_parameters", "need beta > 4/3 and gamma > 1");
    std::cerr << "warning: beta > 4/3 and gamma > 1 violated; continuing under override\n";
  }
  if (!(c.params.gamma > 1.0)) bad("gamma must exceed 1 for the energy to be defined");
}

double smooth_bump(double R, double r) {
  const double s = std::sin(kPi * (R - r) / (1.0 - r));
  return s * s;
}

double area(const PolarOps& ops) { return ops.integrate(ops.constant(1.0)); }

// |grad u|^2 pointwise from the padded polar velocity.
Field grad_u_squared(const PolarOps& ops, const PolarVector& padded) {
  const auto [u1, u2] = ops.to_cartesian(padded);
  const PolarVector g1 = ops.gradient(u1), g2 = ops.gradient(u2);
  return g1.radial.square() + g1.angular.square() + g2.radial.square() + g2.angular.square();
}

}  // namespace

PolarSimulator::PolarSimulator(SimulationConfig config)
    : config_(std::move(config)),
      ops_((validate(config_), polar_grid(config_.inner_radius, config_.resolution, 4 * config_.resolution))),
      friction_(WallFriction::constant(4 * config_.resolution, config_.k_outer, config_.k_inner)),
      stabilizer_(ops_) {
  const FluidState s = initial_state();
  rho_hat_ = mass(s) / area(ops_);
  floor_ = config_.floor_factor * rho_hat_;
}

FluidState PolarSimulator::initial_state() const {
  const InitialData& in = config_.initial;
  const double r = config_.inner_radius;
  FluidState s;
  s.rho = ops_.constant(in.rho_hat);
  PolarVector u{ops_.zeros(), ops_.zeros()};
  switch (in.preset) {
    case InitialPreset::Rest:
      break;
    case InitialPreset::SteadyFamily:
    case InitialPreset::PerturbedSteady: {
      const StationaryState st = annulus_family(in.c1, in.c2, config_.params.gamma, r);
      s.rho = ops_.sample([&](Complex z) { return st.density(z); });
      u.angular = ops_.sample([&](Complex z) { return -in.c1 / std::abs(z); });
      if (in.preset == InitialPreset::PerturbedSteady)
        for (int i = 0; i < ops_.nr(); ++i)
          for (int j = 0; j < ops_.nt(); ++j)
            s.rho(i, j) *= 1.0 + in.density_amplitude * ops_.cosines()(j) * smooth_bump(ops_.radii()(i), r);
      break;
    }
    case InitialPreset::RandomSlip: {
      for (int i = 0; i < ops_.nr(); ++i)
        for (int j = 0; j < ops_.nt(); ++j)
          s.rho(i, j) *= 1.0 + in.density_amplitude * ops_.cosines()(j) * smooth_bump(ops_.radii()(i), r);
      // u = grad_perp psi + grad chi, psi = B^3 T(theta), chi = B^3 S(theta),
      // B = (R - r)(1 - R): u and curl u vanish on both walls, so any K is met.
      std::mt19937_64 rng(in.seed);
      std::normal_distribution<double> normal;
      const int modes = std::max(in.modes, 1);
      std::vector<double> tc(modes + 1), ts(modes + 1), sc(modes + 1), ss(modes + 1);
      for (int m = 0; m <= modes; ++m) tc[m] = normal(rng), ts[m] = normal(rng), sc[m] = normal(rng), ss[m] = normal(rng);
      for (int j = 0; j < ops_.nt(); ++j) {
        const double th = ops_.grid().angle(j);
        double T = 0, dT = 0, S = 0, dS = 0;
        for (int m = 0; m <= modes; ++m) {
          const double c = std::cos(m * th), sn = std::sin(m * th);
          T += tc[m] * c + ts[m] * sn;
          dT += m * (-tc[m] * sn + ts[m] * c);
          S += sc[m] * c + ss[m] * sn;
          dS += m * (-sc[m] * sn + ss[m] * c);
        }
        for (int i = 0; i < ops_.nr(); ++i) {
          const double R = ops_.radii()(i);
          const double B = (R - r) * (1.0 - R), dB = 1.0 + r - 2.0 * R;
          const double B3 = B * B * B, dB3 = 3.0 * B * B * dB;
          u.radial(i, j) = -B3 * dT / R + dB3 * S;
          u.angular(i, j) = dB3 * T + B3 * dS / R;
        }
      }
      const double peak = (u.radial.square() + u.angular.square()).sqrt().maxCoeff();
      if (peak > 0.0) {
        u.radial *= in.velocity_amplitude / peak;
        u.angular *= in.velocity_amplitude / peak;
      }
      break;
    }
  }
  std::tie(s.u1, s.u2) = ops_.to_cartesian(u);
  return s;
}

double PolarSimulator::max_stable_dt(const FluidState& s) const {
  const PhysParams& p = config_.params;
  const double h = std::min(ops_.dr(), ops_.radii()(0) * ops_.dtheta());
  const double umax = (s.u1.square() + s.u2.square()).sqrt().maxCoeff();
  const double rmax = s.rho.maxCoeff(), rmin = s.rho.minCoeff();
  const double cmax = std::sqrt(p.gamma * std::pow(rmax, p.gamma - 1.0));
  double dt = config_.safety * h / (umax + cmax);
  if (!config_.implicit_viscosity)
    dt = std::min(dt, config_.safety * h * h * rmin / (2.0 * (2.0 * p.mu + p.lambda(rmax))));
  return dt;
}

PolarSimulator::Rates PolarSimulator::rates(const FluidState& s) const {
  const PolarVector u = ops_.to_polar(s.u1, s.u2);
  const MomentumTerms t = momentum_terms(ops_, s.rho, u, config_.params, friction_);
  Rates r;
  r.dissipation = dissipation_from(s.rho, t);
  {
    // sigma_max * rho_max / mu * int |V u|^2 / rho: per unit dt, an upper bound on the
    // energy the stabiliser withholds from the viscous decay
    const PhysParams& p = config_.params;
    const double rmax = s.rho.maxCoeff();
    const double sigma = 1.1 * (2.0 * p.mu + p.lambda(rmax)) / s.rho.minCoeff();
    const Field v2 = (t.viscous.radial.square() + t.viscous.angular.square()) / s.rho;
    r.withheld = config_.implicit_viscosity ? sigma * rmax / p.mu * ops_.integrate(v2) : 0.0;
  }
  const double g = config_.params.gamma;
  r.rho = ops_.mass_rate(s.rho, u, config_.muscl, (g * s.rho.pow(g - 1.0)).sqrt());
  r.u.radial = (t.viscous.radial - t.pressure_gradient.radial) / s.rho - t.advection.radial;
  r.u.angular = (t.viscous.angular - t.pressure_gradient.angular) / s.rho - t.advection.angular;
  return r;
}

FluidState PolarSimulator::advance(const FluidState& s, const Rates& r, double dt, const Eigen::ArrayXd& sigma,
                                   long& floors) const {
  PolarVector du{dt * r.u.radial, dt * r.u.angular};
  if (config_.implicit_viscosity) {
    const double k_out = friction_.outer.mean(), k_in = friction_.inner.mean();
    du.radial = stabilizer_.solve(du.radial, dt, sigma, -1.0, -1.0);
    du.angular = stabilizer_.solve(du.angular, dt, sigma, ops_.ghost_factor(false, k_in), ops_.ghost_factor(true, k_out));
  }
  const auto [d1, d2] = ops_.to_cartesian(du);
  FluidState out;
  out.time = s.time + dt;
  out.u1 = s.u1 + d1;
  out.u2 = s.u2 + d2;
  out.rho = s.rho + dt * r.rho;
  for (Eigen::Index k = 0; k < out.rho.size(); ++k)
    if (out.rho(k) < floor_) out.rho(k) = floor_, ++floors;
  return out;
}

PolarSimulator::StepResult PolarSimulator::step(const FluidState& s, double dt) const {
  if (!(dt > 0.0)) throw Error("simulator.invalid_step", "time step must be positive");
  const double limit = max_stable_dt(s);
  if (dt > limit * (1.0 + 1e-12))
    throw Error("simulator.cfl_violation", "dt = " + std::to_string(dt) + " exceeds the stable bound " + std::to_string(limit));
  Eigen::ArrayXd sigma(ops_.nr());
  const PhysParams& p = config_.params;
  for (int i = 0; i < ops_.nr(); ++i) {
    double worst = 0.0;
    for (int j = 0; j < ops_.nt(); ++j) worst = std::max(worst, (2.0 * p.mu + p.lambda(s.rho(i, j))) / s.rho(i, j));
    sigma(i) = 1.1 * worst;
  }
  StepResult res;
  const Rates r1 = rates(s);
  res.dissipation = r1.dissipation;
  res.withheld = r1.withheld;
  const FluidState mid = advance(s, r1, dt, sigma, res.floor_events);
  const Rates r2 = rates(mid);
  Rates avg{0.5 * (r1.rho + r2.rho), {0.5 * (r1.u.radial + r2.u.radial), 0.5 * (r1.u.angular + r2.u.angular)}};
  res.state = advance(s, avg, dt, sigma, res.floor_events);
  return res;
}

double PolarSimulator::energy(const FluidState& s) const {
  const double g = config_.params.gamma;
  const Field e = 0.5 * s.rho * (s.u1.square() + s.u2.square()) + s.rho.pow(g) / (g - 1.0);
  return ops_.integrate(e);
}

double PolarSimulator::relative_energy(const FluidState& s) const {
  const double g = config_.params.gamma, ph = std::pow(rho_hat_, g);
  const Field x = (s.rho - rho_hat_) / rho_hat_;
  // P(rho) - P(rho_hat) - P'(rho_hat)(rho - rho_hat), free of the cancellation against the rest state
  const Field excess = x.unaryExpr([g](double v) { return std::expm1(g * std::log1p(v)) - g * v; });
  return ops_.integrate(0.5 * s.rho * (s.u1.square() + s.u2.square()) + ph * excess / (g - 1.0));
}

double PolarSimulator::dissipation(const FluidState& s) const {
  return dissipation_from(s.rho, momentum_terms(ops_, s.rho, ops_.to_polar(s.u1, s.u2), config_.params, friction_));
}

double PolarSimulator::dissipation_from(const Field& rho, const MomentumTerms& t) const {
  const PhysParams& p = config_.params;
  const Field stiff = 2.0 * p.mu + rho.pow(p.beta);
  const auto [ut_out, ut_in] = ops_.wall_tangential(t.velocity);
  return ops_.integrate(stiff * t.divergence.square() + p.mu * t.vorticity.square()) +
         p.mu * ops_.wall_integral(friction_.outer * ut_out.square(), friction_.inner * ut_in.square());
}

double PolarSimulator::grad_u_l2(const FluidState& s) const {
  const PolarVector pv = ops_.pad_velocity(ops_.to_polar(s.u1, s.u2), friction_);
  return std::sqrt(ops_.integrate(grad_u_squared(ops_, pv)));
}

double PolarSimulator::a2(const FluidState& s) const {
  const PhysParams& p = config_.params;
  const PolarVector pv = ops_.pad_velocity(ops_.to_polar(s.u1, s.u2), friction_);
  const Field div = ops_.divergence(pv);
  const Field lam = s.rho.unaryExpr([&](double r) { return p.lambda(r); });
  const Field dev = (s.rho + rho_hat_).pow(p.gamma - 1.0) * (s.rho - rho_hat_).square();
  const auto [ut_out, ut_in] = ops_.wall_tangential(pv);
  return ops_.integrate(lam * div.square() + grad_u_squared(ops_, pv) + dev) +
         ops_.wall_integral(friction_.outer * ut_out.square(), friction_.inner * ut_in.square());
}

RunResult PolarSimulator::run(const std::function<void(const FluidState&, const DiagnosticsRow&)>& on_output) const {
  RunResult res;
  FluidState s = initial_state(), prev;
  const double h2 = ops_.dr() * ops_.dr();
  const double eps = 1e-12 * config_.final_time;
  double sup_rho_running = s.rho.maxCoeff();
  double next_out = 0.0;
  double e_s = relative_energy(s), e_prev = 0.0, d_prev = 0.0, w_prev = 0.0, dt_prev = 0.0;
  bool have_prev = false;

  // budget of the step prev -> s, closed once the dissipation at s is known
  auto budget = [&](double d_s, double w_s, DiagnosticsRow& row) {
    if (!have_prev) return;
    const double residual = (e_s - e_prev) / dt_prev + 0.5 * (d_prev + d_s);
    const double withheld = dt_prev * 0.5 * (w_prev + w_s), trunc = h2 * (e_s + d_s);
    const double band = withheld + config_.band_constant * trunc;
    res.budget.push_back({s.time, dt_prev, residual, withheld, trunc, d_s});
    res.max_budget_residual = std::max(res.max_budget_residual, residual);
    res.max_budget_excess = std::max(res.max_budget_excess, residual - band);
    row.budget_residual = residual;
    row.budget_band = band;
  };
  auto fill_row = [&](DiagnosticsRow& row, const FluidState& a, const FluidState& b) {
    row.t = s.time;
    row.dt = b.time - a.time;
    row.mass = mass(s);
    row.a2 = a2(s);
    const PolarVector m = material_derivative(ops_, a, b, friction_);
    row.b2 = ops_.integrate((m.radial.square() + m.angular.square()) / (0.5 * (a.rho + b.rho)));
    row.sup_rho = s.rho.maxCoeff();
    sup_rho_running = std::max(sup_rho_running, row.sup_rho);
    row.r_t = 1.0 + sup_rho_running;
    row.rho_dev_l2 = ops_.norm_l2(s.rho - rho_hat_);
    row.grad_u_l2 = grad_u_l2(s);
    row.energy = energy(s);
    row.dissipation = dissipation(s);
    const Field flux = effective_flux(ops_, s, config_.params, friction_).first;
    row.flux_mean = ops_.integrate(flux) / area(ops_);
    row.flux_sup = flux.abs().maxCoeff();
    row.floor_events = res.floor_events;
    if (on_output) on_output(s, row);
    res.rows.push_back(row);
  };

  while (s.time < config_.final_time - eps) {
    const bool output_now = s.time >= next_out - eps;
    if (output_now) next_out += config_.cadence;
    const double target = std::min(next_out, config_.final_time);
    const double dt = std::min(max_stable_dt(s), std::max(target - s.time, eps));
    StepResult sr = step(s, dt);
    ++res.steps;
    res.floor_events += sr.floor_events;
    DiagnosticsRow row;
    budget(sr.dissipation, sr.withheld, row);
    if (output_now) fill_row(row, s, sr.state);
    const double m0 = mass(s), m1 = mass(sr.state);
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(m1 - m0) / std::abs(m0));
    prev = std::move(s);
    s = std::move(sr.state);
    e_prev = e_s;
    e_s = relative_energy(s);
    d_prev = sr.dissipation;
    w_prev = sr.withheld;
    dt_prev = dt;
    have_prev = true;
    const double umax = (s.u1.square() + s.u2.square()).sqrt().maxCoeff();
    const double rmax = s.rho.maxCoeff();
    if (!std::isfinite(umax) || !std::isfinite(rmax) || umax > 1e6 || rmax > 1e6) {
      res.aborted = true;
      res.abort_reason = "blow-up at t = " + std::to_string(s.time);
      break;
    }
  }
  if (!res.aborted && have_prev) {
    DiagnosticsRow row;
    const StepResult probe = step(s, std::min(max_stable_dt(s), dt_prev));
    budget(probe.dissipation, probe.withheld, row);
    fill_row(row, prev, s);
  }
  res.final_state = std::move(s);
  return res;
}

std::pair<Field, Field> effective_flux(const PolarOps& ops, const FluidState& s, const PhysParams& params,
                                       const WallFriction& k) {
  const PolarVector pv = ops.pad_velocity(ops.to_polar(s.u1, s.u2), k);
  const Field div = ops.divergence(pv), w = ops.curl(pv);
  const Field pressure = s.rho.unaryExpr([&](double r) { return params.pressure(r); });
  const double pbar = ops.integrate(pressure) / ops.integrate(ops.constant(1.0));
  const Field stiff = s.rho.unaryExpr([&](double r) { return 2.0 * params.mu + params.lambda(r); });
  return {stiff * div - (pressure - pbar), w};
}

namespace {

// Second-order upwind derivative along a periodic or padded line.
inline double upwind(double speed, double fm2, double fm1, double f0, double fp1, double fp2, double h) {
  return speed >= 0.0 ? (3.0 * f0 - 4.0 * fm1 + fm2) / (2.0 * h) : (-3.0 * f0 + 4.0 * fp1 - fp2) / (2.0 * h);
}

}  // namespace

PolarVector material_derivative(const PolarOps& ops, const FluidState& prev, const FluidState& next,
                                const WallFriction& k) {
  if (prev.rho.rows() != ops.nr() || prev.rho.cols() != ops.nt() || next.rho.rows() != ops.nr() ||
      next.rho.cols() != ops.nt() || prev.u1.rows() != next.u1.rows() || prev.u1.cols() != next.u1.cols())
    throw Error("simulator.grid_mismatch", "snapshots live on different grids");
  const double dt = next.time - prev.time;
  const bool same = (prev.u1 == next.u1).all() && (prev.u2 == next.u2).all() && (prev.rho == next.rho).all();
  if (dt == 0.0 && !same) throw Error("simulator.identical_times", "distinct snapshots share one time");
  FluidState mid;
  mid.rho = 0.5 * (prev.rho + next.rho);
  mid.u1 = 0.5 * (prev.u1 + next.u1);
  mid.u2 = 0.5 * (prev.u2 + next.u2);
  const PolarVector pv = ops.pad_velocity(ops.to_polar(mid.u1, mid.u2), k);
  const auto [c1, c2] = ops.to_cartesian(pv);  // padded Cartesian components
  const int n = ops.nr(), m = ops.nt();
  const double dr = ops.dr(), dth = ops.dtheta();
  Field a1(n, m), a2(n, m);
  for (int j = 0; j < m; ++j) {
    const int jm = (j + m - 1) % m, jmm = (j + m - 2) % m, jp = (j + 1) % m, jpp = (j + 2) % m;
    for (int i = 0; i < n; ++i) {
      const int p = i + 1;  // padded row
      const double ur = pv.radial(p, j), ut = pv.angular(p, j), R = ops.radii()(i);
      auto deriv = [&](const Field& f) {
        double fr;
        if (p - 2 >= 0 && p + 2 <= n + 1)
          fr = upwind(ur, f(p - 2, j), f(p - 1, j), f(p, j), f(p + 1, j), f(p + 2, j), dr);
        else
          fr = (f(p + 1, j) - f(p - 1, j)) / (2.0 * dr);
        const double ft = upwind(ut, f(p, jmm), f(p, jm), f(p, j), f(p, jp), f(p, jpp), dth);
        return ur * fr + ut / R * ft;
      };
      a1(i, j) = deriv(c1);
      a2(i, j) = deriv(c2);
    }
  }
  Field t1 = ops.zeros(), t2 = ops.zeros();
  if (dt != 0.0) {
    t1 = (next.u1 - prev.u1) / dt;
    t2 = (next.u2 - prev.u2) / dt;
  }
  PolarVector acc = ops.to_polar(mid.rho * (t1 + a1), mid.rho * (t2 + a2));
  return acc;
}

PolarVector momentum_balance(const PolarOps& ops, const FluidState& s, const PhysParams& params,
                             const WallFriction& k) {
  const MomentumTerms t = momentum_terms(ops, s.rho, ops.to_polar(s.u1, s.u2), params, k);
  return {t.viscous.radial - t.pressure_gradient.radial, t.viscous.angular - t.pressure_gradient.angular};
}

}  // namespace mcflow
