#include "mcflow/stationary.hpp"

#include <algorithm>
#include <cmath>

namespace mcflow {

double StationaryState::density(Complex z) const {
  if (kind == Kind::Trivial) return rho_hat;
  const double base = (gamma - 1.0) / gamma * (c2 - c1 * c1 / (2.0 * std::norm(z)));
  return std::pow(std::max(base, 0.0), 1.0 / (gamma - 1.0));
}

Eigen::Vector2d StationaryState::velocity(Complex z) const {
  if (kind == Kind::Trivial) return Eigen::Vector2d::Zero();
  const double r2 = std::norm(z);
  return {c1 * z.imag() / r2, -c1 * z.real() / r2};
}

double StationaryState::mass() const {
  if (kind == Kind::Trivial) return rho_hat * kPi * (1.0 - inner_radius * inner_radius);
  // composite Simpson in R of 2 pi R rho(R)
  const int n = 4096;
  const double h = (1.0 - inner_radius) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double R = inner_radius + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * R * density(R);
  }
  return kTwoPi * acc * h / 3.0;
}

double StationaryState::min_density() const {
  return kind == Kind::Trivial ? rho_hat : density(inner_radius);
}

StationaryState trivial_state(double rho_hat, double gamma, double inner_radius) {
  if (!(rho_hat > 0.0)) throw Error("stationary.vacuum", "trivial state needs positive density");
  if (!(gamma > 1.0)) throw Error("stationary.invalid_parameters", "gamma must exceed 1");
  StationaryState s;
  s.rho_hat = rho_hat;
  s.gamma = gamma;
  s.inner_radius = inner_radius;
  return s;
}

StationaryState annulus_family(double c1, double c2, double gamma, double inner_radius) {
  if (!(gamma > 1.0)) throw Error("stationary.invalid_parameters", "gamma must exceed 1");
  if (!(inner_radius > 0.0 && inner_radius < 1.0))
    throw Error("stationary.invalid_parameters", "inner radius must lie in (0, 1)");
  if (c1 == 0.0) {
    if (!(c2 > 0.0)) throw Error("stationary.vacuum", "c2 must be positive for a nonvacuum state");
    StationaryState s = trivial_state(std::pow((gamma - 1.0) * c2 / gamma, 1.0 / (gamma - 1.0)), gamma, inner_radius);
    s.c2 = c2;
    return s;
  }
  // the density increases with R, so the inner wall is the minimum
  if (!(c2 - c1 * c1 / (2.0 * inner_radius * inner_radius) > 0.0))
    throw Error("stationary.vacuum", "parameters make the density vanish on the inner circle");
  StationaryState s;
  s.kind = StationaryState::Kind::AnnulusRotating;
  s.c1 = c1;
  s.c2 = c2;
  s.gamma = gamma;
  s.inner_radius = inner_radius;
  return s;
}

StationaryState match_mass(double c1, double gamma, double inner_radius, double target_mass) {
  if (!(target_mass > 0.0)) throw Error("stationary.invalid_parameters", "target mass must be positive");
  double lo = c1 * c1 / (2.0 * inner_radius * inner_radius), hi = lo + 1.0;
  while (annulus_family(c1, hi, gamma, inner_radius).mass() < target_mass) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid > lo && annulus_family(c1, mid, gamma, inner_radius).mass() < target_mass)
      lo = mid;
    else
      hi = mid;
  }
  return annulus_family(c1, hi, gamma, inner_radius);
}

ResidualReport residual(const StationaryState& state, const PhysParams& params, double k_outer, double k_inner,
                        int resolution) {
  const PolarOps ops(polar_grid(state.inner_radius, resolution, 4 * resolution));
  const Field rho = ops.sample([&](Complex z) { return state.density(z); });
  const Field u1 = ops.sample([&](Complex z) { return state.velocity(z)(0); });
  const Field u2 = ops.sample([&](Complex z) { return state.velocity(z)(1); });
  const PolarVector u = ops.to_polar(u1, u2);
  const WallFriction k = WallFriction::constant(ops.nt(), k_outer, k_inner);
  PhysParams p = params;
  p.gamma = state.gamma;
  const MomentumTerms t = momentum_terms(ops, rho, u, p, k);

  ResidualReport r;
  r.h = ops.dr();
  const Field mass = -ops.mass_rate(rho, u, true);
  r.mass_l2 = ops.norm_l2(mass);
  r.mass_sup = mass.abs().maxCoeff();
  const Field mr = rho * t.advection.radial + t.pressure_gradient.radial - t.viscous.radial;
  const Field mt = rho * t.advection.angular + t.pressure_gradient.angular - t.viscous.angular;
  const Field mag = (mr * mr + mt * mt).sqrt();
  r.momentum_l2 = ops.norm_l2(mag);
  r.momentum_sup = mag.maxCoeff();

  // boundary residuals from one-sided traces only
  for (bool outer : {true, false}) {
    const WallTrace ur = wall_trace(ops, u.radial, outer);
    const WallTrace ut = wall_trace(ops, u.angular, outer);
    const double R = outer ? 1.0 : state.inner_radius;
    r.slip_sup = std::max(r.slip_sup, ur.value.abs().maxCoeff());
    const int m = ops.nt();
    for (int j = 0; j < m; ++j) {
      const double dth = (ur.value((j + 1) % m) - ur.value((j + m - 1) % m)) / (2.0 * ops.dtheta());
      const double curl = -(ut.d_radial(j) + ut.value(j) / R - dth / R);
      const double tangential = outer ? -ut.value(j) : ut.value(j);  // u.n_perp
      const double kk = outer ? k_outer : k_inner;
      r.curl_sup = std::max(r.curl_sup, std::abs(curl + kk * tangential));
    }
  }
  return r;
}

char case_letter(SteadyCase c) { return c == SteadyCase::A ? 'a' : c == SteadyCase::B ? 'b' : 'c'; }

namespace {

double max_friction(const std::vector<std::vector<double>>& friction) {
  double m = 0.0;
  for (const auto& v : friction)
    for (double x : v) {
      if (x < 0.0) throw Error("stationary.invalid_friction", "friction coefficient must be nonnegative");
      m = std::max(m, x);
    }
  return m;
}

Classification decide(double kmax, bool concentric) {
  if (kmax > 0.0) return {SteadyCase::A, "K is not identically zero: the trivial state is the only steady state"};
  if (concentric)
    return {SteadyCase::B,
            "K = 0 on a concentric annulus: two-parameter family u1 - i u2 = i C1 / z, "
            "rho^(gamma-1) = (gamma-1)/gamma (C2 - C1^2 / (2|z|^2)), including the trivial state"};
  return {SteadyCase::C, "K = 0 on a domain that is not a concentric annulus: trivial state only"};
}

// Algebraic least-squares circle fit; returns centre, radius and max radial deviation.
std::tuple<Complex, double, double> fit_circle(const std::vector<Complex>& pts) {
  Eigen::MatrixXd a(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a(i, 0) = 2.0 * pts[i].real();
    a(i, 1) = 2.0 * pts[i].imag();
    a(i, 2) = 1.0;
    b(i) = std::norm(pts[i]);
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  const Complex c(x(0), x(1));
  const double r = std::sqrt(x(2) + std::norm(c));
  double dev = 0.0;
  for (const Complex p : pts) dev = std::max(dev, std::abs(std::abs(p - c) - r));
  return {c, r, dev};
}

}  // namespace

Classification classify(const CircularDomain& domain, const std::vector<std::vector<double>>& friction) {
  if (friction.size() != domain.num_components())
    throw Error("stationary.invalid_friction", "need friction samples for every boundary component");
  return decide(max_friction(friction), domain.is_concentric_annulus(1e-8));
}

Classification classify(const SmoothDomain& domain, const std::vector<std::vector<double>>& friction) {
  if (friction.size() != domain.num_components())
    throw Error("stationary.invalid_friction", "need friction samples for every boundary component");
  bool concentric = false;
  if (domain.num_components() == 2) {
    const auto [c0, r0, d0] = fit_circle(domain.curve(0).resample(256));
    const auto [c1, r1, d1] = fit_circle(domain.curve(1).resample(256));
    concentric = d0 <= 1e-8 * r0 && d1 <= 1e-8 * r1 && std::abs(c0 - c1) <= 1e-8 * r0;
  }
  return decide(max_friction(friction), concentric);
}

LevelCurve trace_level_curve(const SeriesHarmonic& w, const CircularDomain& domain, Complex start,
                             const LevelSetOptions& options) {
  std::vector<Complex> critical;
  for (const auto& c : locate_critical_points(w, domain).points) critical.push_back(c.location);
  const double s = options.step / 4.0;
  auto direction = [&](Complex z) {
    const Eigen::Vector2d g = w.perp_gradient(z);
    const double n = g.norm();
    return n > 0.0 ? Complex(g(0), g(1)) / n : Complex(0.0);
  };
  auto near_critical = [&](Complex z) {
    return std::any_of(critical.begin(), critical.end(),
                       [&](Complex c) { return std::abs(z - c) < options.critical_radius; });
  };
  LevelCurve curve;
  curve.level = w.value(start);
  Complex z = start;
  double travelled = 0.0;
  curve.points.push_back(z);
  for (int step = 0; step < options.max_steps; ++step) {
    if (near_critical(z) || !domain.in_closure(z)) {
      curve.terminated = true;
      break;
    }
    const Complex k1 = direction(z), k2 = direction(z + 0.5 * s * k1), k3 = direction(z + 0.5 * s * k2),
                  k4 = direction(z + s * k3);
    Complex next = z + s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int it = 0; it < 3; ++it) {
      const Eigen::Vector2d g = w.gradient(next);
      const double g2 = g.squaredNorm();
      if (g2 == 0.0) break;
      next -= (w.value(next) - curve.level) * Complex(g(0), g(1)) / g2;
    }
    travelled += std::abs(next - z);
    z = next;
    curve.points.push_back(z);
    if (travelled > 20.0 * s && std::abs(z - start) < 1.5 * s) {
      curve.closed = true;
      break;
    }
  }
  curve.min_speed = std::numeric_limits<double>::infinity();
  for (const Complex p : curve.points) {
    const double sp = w.gradient(p).norm();
    curve.min_speed = std::min(curve.min_speed, sp);
    curve.max_speed = std::max(curve.max_speed, sp);
  }
  curve.variation = curve.max_speed > 0.0 ? (curve.max_speed - curve.min_speed) / curve.max_speed : 0.0;
  return curve;
}

LevelSetReport level_set_speed_check(const SeriesHarmonic& w, const CircularDomain& domain,
                                     const std::vector<Complex>& starts, const LevelSetOptions& options) {
  LevelSetReport rep;
  if (w.is_constant()) {
    rep.degenerate = true;
    rep.notice = "constant field: no level curves";
    return rep;
  }
  for (const Complex z : starts) {
    LevelCurve c = trace_level_curve(w, domain, z, options);
    rep.max_variation = std::max(rep.max_variation, c.variation);
    if (c.terminated && rep.notice.empty()) rep.notice = "trace terminated near a critical point or the boundary";
    rep.curves.push_back(std::move(c));
  }
  return rep;
}

}  // namespace mcflow
