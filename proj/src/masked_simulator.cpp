#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "mcflow/simulator.hpp"

namespace mcflow {

namespace {

constexpr int kPad = 2;

// Outward unit normal (away from the fluid) at the point of circle j nearest z,
// plus the curvature shift of the Robin coefficient.
std::pair<Complex, double> wall_normal(const CircularDomain& d, std::size_t j, Complex z) {
  const Circle c = d.component(j);
  Complex radial = z - c.center;
  radial /= std::abs(radial);
  if (j == 0) return {radial, 1.0 / c.radius};
  return {-radial, -1.0 / c.radius};
}

// Signed distance to circle j, positive on the fluid side.
double fluid_distance(const CircularDomain& d, std::size_t j, Complex z) {
  const Circle c = d.component(j);
  const double rr = std::abs(z - c.center);
  return j == 0 ? c.radius - rr : rr - c.radius;
}

}  // namespace

MaskedSimulator::MaskedSimulator(MaskedConfig config) : config_(std::move(config)) {
  const PhysParams& p = config_.params;
  if (config_.resolution < 16) throw Error("simulator.invalid_config", "masked resolution must be at least 16");
  if (!(p.mu > 0.0) || !(p.gamma > 1.0)) throw Error("simulator.invalid_config", "need mu > 0 and gamma > 1");
  if (!(p.beta > 4.0 / 3.0)) {
    if (!config_.allow_parameter_override)
      throw Error("simulator.invalid_parameters", "need beta > 4/3 and gamma > 1");
    std::cerr << "warning: beta > 4/3 violated; continuing under override\n";
  }
  if (!config_.friction.empty() && config_.friction.size() != config_.domain.num_components())
    throw Error("simulator.invalid_config", "friction needs one value per boundary component");
  if (config_.friction.empty()) config_.friction.assign(config_.domain.num_components(), 0.0);
  for (double k : config_.friction)
    if (k < 0.0) throw Error("simulator.invalid_config", "friction must be non-negative");

  const int n = config_.resolution + 2 * kPad;
  const double h = 2.0 / config_.resolution;
  if (config_.domain.gap() < 4.0 * h) throw Error("geometry.gap_too_small", "domain gap is below 4h");
  grid_.layout = Grid::Layout::Cartesian;
  grid_.h = h;
  grid_.nx = grid_.ny = n;
  grid_.origin = Complex(-1.0 + (0.5 - kPad) * h, -1.0 + (0.5 - kPad) * h);
  grid_.kind.assign(std::size_t(n) * n, NodeKind::Exterior);
  grid_.active_index.assign(grid_.kind.size(), -1);
  fluid_.setConstant(n, n, false);
  area_ = Field::Zero(n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Complex c = grid_.origin + h * Complex(ix, iy);
      if (!config_.domain.contains(c)) continue;
      fluid_(iy, ix) = true;
      area_(iy, ix) = h * h;
      const std::size_t cell = std::size_t(iy) * n + ix;
      grid_.kind[cell] = config_.domain.distance_to_boundary(c) < h ? NodeKind::Cut : NodeKind::Interior;
      grid_.active_index[cell] = static_cast<int>(grid_.nodes.size());
      grid_.nodes.push_back(c);
      grid_.weights.push_back(h * h);
    }

  // ghost cells: exterior cells touching a fluid cell through a face
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  for (int iy = 1; iy + 1 < n; ++iy)
    for (int ix = 1; ix + 1 < n; ++ix) {
      if (fluid_(iy, ix)) continue;
      bool touches = false;
      for (int q = 0; q < 4; ++q) touches = touches || fluid_(iy + dy[q], ix + dx[q]);
      if (!touches) continue;
      const Complex e = grid_.origin + h * Complex(ix, iy);
      const std::size_t j = config_.domain.nearest_component(e);
      const auto [normal, curvature] = wall_normal(config_.domain, j, e);
      const double dg = -fluid_distance(config_.domain, j, e);
      const Complex mirror = e - 2.0 * dg * normal;
      // fluid cell nearest the mirror point
      int best = -1;
      double best_d = 1e300;
      for (int by = std::max(0, iy - 3); by <= std::min(n - 1, iy + 3); ++by)
        for (int bx = std::max(0, ix - 3); bx <= std::min(n - 1, ix + 3); ++bx) {
          if (!fluid_(by, bx)) continue;
          const double dist = std::abs(grid_.origin + h * Complex(bx, by) - mirror);
          if (dist < best_d) best_d = dist, best = bx * n + by;
        }
      if (best < 0) throw Error("simulator.invalid_grid", "ghost cell without a fluid partner");
      const Complex src = grid_.origin + h * Complex(best / n, best % n);
      const double ds = std::max(fluid_distance(config_.domain, j, src), 0.25 * h);
      const double keff = config_.friction[j] + curvature;
      const double factor = std::clamp((1.0 - keff * dg) / (1.0 + keff * ds), -1.0, 1.0);
      ghosts_.push_back({ix * n + iy, best, normal, factor});
    }
  floor_ = config_.floor_factor * config_.rho_hat;
}

void MaskedSimulator::fill_ghosts(Field& u1, Field& u2, Field& rho) const {
  for (const Ghost& g : ghosts_) {
    const Complex us(u1(g.source), u2(g.source));
    const double un = dot(us, g.normal);
    const Complex ut = us - un * g.normal;
    const Complex ug = g.tangential * ut - un * g.normal;
    u1(g.cell) = ug.real();
    u2(g.cell) = ug.imag();
    rho(g.cell) = rho(g.source);
  }
}

FluidState MaskedSimulator::initial_state() const {
  const int n = grid_.nx;
  const double h = grid_.h;
  FluidState s;
  s.rho = Field::Zero(n, n);
  s.u1 = Field::Zero(n, n);
  s.u2 = Field::Zero(n, n);
  // stream function of a few Gaussian vortices, cut off near every wall
  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::pair<Complex, double>> vortices;
  while (vortices.size() < 4) {
    const Complex c(uni(rng), uni(rng));
    if (config_.domain.contains(c) && config_.domain.distance_to_boundary(c) > 0.1) vortices.push_back({c, uni(rng)});
  }
  const double width = 0.25 * config_.domain.gap() + 0.05;
  auto psi = [&](Complex z) {
    if (!config_.domain.contains(z)) return 0.0;
    double v = 0.0;
    for (const auto& [c, a] : vortices) v += a * std::exp(-std::norm(z - c) / 0.08);
    double cut = 1.0;
    for (std::size_t j = 0; j < config_.domain.num_components(); ++j) {
      const double d = std::max(fluid_distance(config_.domain, j, z), 0.0) / width;
      cut *= d < 1.0 ? d * d * (3.0 - 2.0 * d) : 1.0;
    }
    return v * cut * cut;
  };
  double peak = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      if (!fluid_(iy, ix)) continue;
      const Complex z = grid_.origin + h * Complex(ix, iy);
      s.rho(iy, ix) = config_.rho_hat * (1.0 + config_.density_amplitude * std::cos(kPi * z.real()) * psi(z));
      s.u1(iy, ix) = -(psi(z + Complex(0, h)) - psi(z - Complex(0, h))) / (2.0 * h);
      s.u2(iy, ix) = (psi(z + h) - psi(z - h)) / (2.0 * h);
      peak = std::max(peak, std::hypot(s.u1(iy, ix), s.u2(iy, ix)));
    }
  if (peak > 0.0) {
    s.u1 *= config_.velocity_amplitude / peak;
    s.u2 *= config_.velocity_amplitude / peak;
  }
  return s;
}

double MaskedSimulator::max_stable_dt(const FluidState& s) const {
  const PhysParams& p = config_.params;
  double umax = 0.0, rmax = 0.0, rmin = 1e300;
  for (Eigen::Index k = 0; k < s.rho.size(); ++k) {
    if (!fluid_(k)) continue;
    umax = std::max(umax, std::hypot(s.u1(k), s.u2(k)));
    rmax = std::max(rmax, s.rho(k));
    rmin = std::min(rmin, s.rho(k));
  }
  const double h = grid_.h;
  const double cmax = std::sqrt(p.gamma * std::pow(rmax, p.gamma - 1.0));
  return config_.safety * std::min(h / (umax + cmax), h * h * rmin / (2.0 * (2.0 * p.mu + p.lambda(rmax))));
}

MaskedSimulator::Rates MaskedSimulator::rates(const FluidState& in) const {
  const PhysParams& p = config_.params;
  const int n = grid_.nx;
  const double h = grid_.h;
  Field u1 = in.u1, u2 = in.u2, rho = in.rho;
  fill_ghosts(u1, u2, rho);
  Field pressure = Field::Zero(n, n), bulk = Field::Zero(n, n), sound = Field::Zero(n, n);
  for (int iy = 1; iy + 1 < n; ++iy)
    for (int ix = 1; ix + 1 < n; ++ix) {
      if (!fluid_(iy, ix)) continue;
      const double div = (u1(iy, ix + 1) - u1(iy, ix - 1) + u2(iy + 1, ix) - u2(iy - 1, ix)) / (2.0 * h);
      bulk(iy, ix) = (p.mu + p.lambda(rho(iy, ix))) * div;
      pressure(iy, ix) = p.pressure(rho(iy, ix));
      sound(iy, ix) = std::sqrt(p.gamma * std::pow(rho(iy, ix), p.gamma - 1.0));
    }
  for (const Ghost& g : ghosts_) bulk(g.cell) = bulk(g.source), pressure(g.cell) = pressure(g.source);

  Rates r{Field::Zero(n, n), Field::Zero(n, n), Field::Zero(n, n)};
  // mass: local Lax-Friedrichs across faces shared by two fluid cells
  auto face = [&](int a, int b, double un) {
    const double c = std::max(sound(a), sound(b));
    const double flux = h * (0.5 * un * (rho(a) + rho(b)) - 0.5 * (std::abs(un) + c) * (rho(b) - rho(a)));
    r.rho(a) -= flux / (h * h);
    r.rho(b) += flux / (h * h);
  };
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix + 1 < n; ++ix) {
      const int a = ix * n + iy, b = (ix + 1) * n + iy;  // column-major storage
      if (fluid_(iy, ix) && fluid_(iy, ix + 1)) face(a, b, 0.5 * (u1(iy, ix) + u1(iy, ix + 1)));
    }
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy + 1 < n; ++iy) {
      const int a = ix * n + iy, b = ix * n + iy + 1;
      if (fluid_(iy, ix) && fluid_(iy + 1, ix)) face(a, b, 0.5 * (u2(iy, ix) + u2(iy + 1, ix)));
    }
  // momentum: grad((mu + lambda) div u) + mu lap u - grad P - rho u.grad u
  for (int iy = 1; iy + 1 < n; ++iy)
    for (int ix = 1; ix + 1 < n; ++ix) {
      if (!fluid_(iy, ix)) continue;
      auto dx = [&](const Field& f) { return (f(iy, ix + 1) - f(iy, ix - 1)) / (2.0 * h); };
      auto dy = [&](const Field& f) { return (f(iy + 1, ix) - f(iy - 1, ix)) / (2.0 * h); };
      auto lap = [&](const Field& f) {
        return (f(iy, ix + 1) + f(iy, ix - 1) + f(iy + 1, ix) + f(iy - 1, ix) - 4.0 * f(iy, ix)) / (h * h);
      };
      const double a = u1(iy, ix), b = u2(iy, ix), rr = rho(iy, ix);
      r.u1(iy, ix) = (dx(bulk) + p.mu * lap(u1) - dx(pressure)) / rr - (a * dx(u1) + b * dy(u1));
      r.u2(iy, ix) = (dy(bulk) + p.mu * lap(u2) - dy(pressure)) / rr - (a * dx(u2) + b * dy(u2));
    }
  return r;
}

FluidState MaskedSimulator::step(const FluidState& s, double dt, long* floor_events) const {
  if (!(dt > 0.0)) throw Error("simulator.invalid_step", "time step must be positive");
  const double limit = max_stable_dt(s);
  if (dt > limit * (1.0 + 1e-12))
    throw Error("simulator.cfl_violation", "dt = " + std::to_string(dt) + " exceeds the stable bound " + std::to_string(limit));
  long floors = 0;
  auto advance = [&](const FluidState& base, const Rates& r, double tau) {
    FluidState out{base.time + tau, base.rho + tau * r.rho, base.u1 + tau * r.u1, base.u2 + tau * r.u2};
    for (Eigen::Index k = 0; k < out.rho.size(); ++k)
      if (fluid_(k) && out.rho(k) < floor_) out.rho(k) = floor_, ++floors;
    return out;
  };
  const Rates r1 = rates(s);
  const FluidState mid = advance(s, r1, dt);
  const Rates r2 = rates(mid);
  const Rates avg{0.5 * (r1.rho + r2.rho), 0.5 * (r1.u1 + r2.u1), 0.5 * (r1.u2 + r2.u2)};
  FluidState out = advance(s, avg, dt);
  if (floor_events) *floor_events += floors;
  return out;
}

double MaskedSimulator::mass(const FluidState& s) const { return (area_ * s.rho).sum(); }

double MaskedSimulator::kinetic_energy(const FluidState& s) const {
  return (area_ * 0.5 * s.rho * (s.u1.square() + s.u2.square())).sum();
}

double MaskedSimulator::energy(const FluidState& s) const {
  const double g = config_.params.gamma;
  return kinetic_energy(s) + (area_ * s.rho.pow(g)).sum() / (g - 1.0);
}

MaskedRun MaskedSimulator::run(const std::function<void(const FluidState&, const MaskedRow&)>& on_output) const {
  MaskedRun res;
  FluidState s = initial_state();
  const double eps = 1e-12 * config_.final_time;
  double next_out = 0.0;
  auto emit = [&](const FluidState& st) {
    MaskedRow row{st.time, mass(st), energy(st), kinetic_energy(st), st.rho.maxCoeff(),
                  (st.u1.square() + st.u2.square()).sqrt().maxCoeff()};
    if (on_output) on_output(st, row);
    res.rows.push_back(row);
  };
  while (s.time < config_.final_time - eps) {
    if (s.time >= next_out - eps) {
      emit(s);
      next_out += config_.cadence;
    }
    const double dt = std::min(max_stable_dt(s), std::max(std::min(next_out, config_.final_time) - s.time, eps));
    FluidState next = step(s, dt, &res.floor_events);
    ++res.steps;
    const double m0 = mass(s), m1 = mass(next);
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(m1 - m0) / std::abs(m0));
    s = std::move(next);
    const double umax = (s.u1.square() + s.u2.square()).sqrt().maxCoeff();
    if (!std::isfinite(umax) || umax > 1e6 || s.rho.maxCoeff() > 1e6) {
      res.aborted = true;
      res.abort_reason = "blow-up at t = " + std::to_string(s.time);
      break;
    }
  }
  if (!res.aborted) emit(s);
  res.final_state = std::move(s);
  return res;
}

}  // namespace mcflow
