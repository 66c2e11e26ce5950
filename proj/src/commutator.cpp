#include "mcflow/commutator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/FFT>

#include "mcflow/core.hpp"
#include "mcflow/quadrature.hpp"

namespace mcflow {

namespace {

KernelDerivatives kernel_at(const NeumannGreen& green, const GreenSource& src, Complex y, Complex x) {
  KernelDerivatives k = fundamental_derivatives(y, x);
  k += green.H(y, src);
  return k;
}

double wall_distance(const PolarOps& ops, Complex x) {
  const double R = std::abs(x);
  return std::min(R - ops.grid().inner_radius, 1.0 - R);
}

Field momentum(const Field& rho, const Field& u) { return rho * u; }

FluidState midpoint(const FluidState& a, const FluidState& b) {
  FluidState m;
  m.time = 0.5 * (a.time + b.time);
  m.rho = 0.5 * (a.rho + b.rho);
  m.u1 = 0.5 * (a.u1 + b.u1);
  m.u2 = 0.5 * (a.u2 + b.u2);
  return m;
}

// d/dtheta of a periodic sample, by FFT.
Eigen::ArrayXd spectral_derivative(const Eigen::ArrayXd& f) {
  const int m = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(f.data(), f.data() + m), out;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int k = 0; k < m; ++k) {
    int wave = k <= m / 2 ? k : k - m;
    if (m % 2 == 0 && k == m / 2) wave = 0;
    spec[k] *= std::complex<double>(0.0, wave);
  }
  fft.inv(out, spec);
  return Eigen::Map<Eigen::ArrayXd>(out.data(), m);
}

// Integral of log|e(t) - x| for t in [0, 1], graded toward the foot point.
double log_along_edge(Complex p, Complex q, Complex x, int nodes) {
  const Complex e = q - p;
  const double len2 = std::norm(e), len = std::sqrt(len2);
  const double t0 = std::clamp(-dot(e, p - x) / len2, 0.0, 1.0);
  const double dist = std::abs(p + t0 * e - x);
  const double step = std::max(dist / len, 1e-15);
  const GaussRule rule = gauss_legendre(nodes);
  double total = 0.0;
  auto piece = [&](double a, double b) {
    for (int k = 0; k < nodes; ++k) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes(k);
      total += 0.5 * (b - a) * rule.weights(k) * std::log(std::abs(p + t * e - x));
    }
  };
  for (int side : {-1, 1}) {
    const double end = side > 0 ? 1.0 : 0.0;
    double a = t0, w = step;
    while (side * (end - a) > 0.0) {
      const double b = side > 0 ? std::min(a + w, end) : std::max(a - w, end);
      piece(std::min(a, b), std::max(a, b));
      a = b;
      w *= 2.0;
    }
  }
  return total;
}

double log_antiderivative(double X, double Y) {
  double g = 0.0;
  const double r2 = X * X + Y * Y;
  if (r2 > 0.0) g += X * Y * std::log(r2) - 3.0 * X * Y;
  if (X != 0.0) g += X * X * std::atan(Y / X);
  if (Y != 0.0) g += Y * Y * std::atan(X / Y);
  return 0.5 * g;
}

}  // namespace

SingularQuadrature::SingularQuadrature(const PolarOps& ops, QuadratureOptions options)
    : ops_(&ops), options_(options) {
  if (options.patch_radius <= 0.0 || options.radial < 1 || options.angular < 4)
    throw Error("commutator.invalid_quadrature", "patch size and node counts must be positive");
  half_ = gauss_legendre(options.radial, 0.0, 0.5);
}

double SingularQuadrature::patch_radius(Complex x) const {
  const double radius = std::min(options_.patch_radius, 0.9 * wall_distance(*ops_, x));
  if (radius < options_.min_patch_cells * ops_->dr())
    throw Error("commutator.patch_outside", "singular patch about the target leaves the annulus");
  return radius;
}

double SingularQuadrature::cutoff(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double t = 2.0 * s - 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

double SingularQuadrature::interpolate(const Field& f, Complex z) const {
  const PolarOps& ops = *ops_;
  const int n = ops.nr(), m = ops.nt();
  const double a = (std::abs(z) - ops.grid().inner_radius) / ops.dr() - 0.5;
  const int i0 = std::clamp(static_cast<int>(std::floor(a)), 0, n - 2);
  const double fa = a - i0;
  double th = std::arg(z);
  if (th < 0.0) th += 2.0 * kPi;
  const double b = th / ops.dtheta() - 0.5;
  const int jf = static_cast<int>(std::floor(b));
  const double fb = b - jf;
  const int j0 = ((jf % m) + m) % m, j1 = (j0 + 1) % m;
  const double lo = (1.0 - fb) * f(i0, j0) + fb * f(i0, j1);
  const double hi = (1.0 - fb) * f(i0 + 1, j0) + fb * f(i0 + 1, j1);
  return (1.0 - fa) * lo + fa * hi;
}

std::vector<double> SingularQuadrature::integrate(Complex x, const std::vector<const Field*>& fields, int outputs,
                                                  const Integrand& integrand) const {
  const PolarOps& ops = *ops_;
  const double radius = patch_radius(x);
  const std::size_t nf = fields.size();
  std::vector<double> total(outputs, 0.0), local(outputs), vals(nf);
  const double cell = ops.dr() * ops.dtheta();
  for (int i = 0; i < ops.nr(); ++i) {
    const double R = ops.radii()(i);
    for (int j = 0; j < ops.nt(); ++j) {
      const Complex y(R * ops.cosines()(j), R * ops.sines()(j));
      const double s = std::abs(y - x) / radius;
      if (s <= 0.5) continue;
      const double w = R * cell * (1.0 - cutoff(s));
      for (std::size_t k = 0; k < nf; ++k) vals[k] = (*fields[k])(i, j);
      std::fill(local.begin(), local.end(), 0.0);
      integrand(y, vals.data(), local.data());
      for (int o = 0; o < outputs; ++o) total[o] += w * local[o];
    }
  }
  for (int half = 0; half < 2; ++half) {
    for (int k = 0; k < options_.radial; ++k) {
      const double unit = half_.nodes(k) + 0.5 * half, rho = radius * unit;
      const double w = radius * half_.weights(k) * rho * cutoff(unit) * kTwoPi / options_.angular;
      if (w == 0.0) continue;
      for (int a = 0; a < options_.angular; ++a) {
        const Complex y = x + std::polar(rho, kTwoPi * (a + 0.5) / options_.angular);
        for (std::size_t f = 0; f < nf; ++f) vals[f] = interpolate(*fields[f], y);
        std::fill(local.begin(), local.end(), 0.0);
        integrand(y, vals.data(), local.data());
        for (int o = 0; o < outputs; ++o) total[o] += w * local[o];
      }
    }
  }
  return total;
}

double SingularQuadrature::log_cell(Complex x, Complex lo, Complex hi, int nodes) {
  const Complex corner[4] = {lo, Complex(hi.real(), lo.imag()), hi, Complex(lo.real(), hi.imag())};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const Complex p = corner[e], q = corner[(e + 1) % 4];
    const double c = (std::conj(p - x) * (q - p)).imag();
    if (std::abs(c) < 1e-300) continue;
    total += 0.5 * c * (log_along_edge(p, q, x, nodes) - 0.5);
  }
  return total;
}

double SingularQuadrature::log_cell_closed_form(Complex x, Complex lo, Complex hi) {
  const double a1 = lo.real() - x.real(), b1 = hi.real() - x.real();
  const double a2 = lo.imag() - x.imag(), b2 = hi.imag() - x.imag();
  return log_antiderivative(b1, b2) - log_antiderivative(a1, b2) - log_antiderivative(b1, a2) +
         log_antiderivative(a1, a2);
}

std::vector<double> inv_laplace_div(const NeumannGreen& green, const SingularQuadrature& quad, const FluidState& s,
                                    const std::vector<Complex>& points) {
  const Field m1 = momentum(s.rho, s.u1), m2 = momentum(s.rho, s.u2);
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t p) {
    const Complex x = points[p];
    const auto src = green.source(x);
    out[p] = quad.integrate(x, {&m1, &m2}, 1, [&](Complex y, const double* v, double* o) {
      const KernelDerivatives k = kernel_at(green, *src, y, x);
      o[0] = -(k.grad_field(0) * v[0] + k.grad_field(1) * v[1]);
    })[0];
  });
  return out;
}

double inner_commutator(const NeumannGreen& green, const SingularQuadrature& quad, const FluidState& s, Complex x) {
  return inner_commutator_bound(green, quad, s, x).value;
}

CommutatorBound inner_commutator_bound(const NeumannGreen& green, const SingularQuadrature& quad,
                                       const FluidState& s, Complex x) {
  const Field m1 = momentum(s.rho, s.u1), m2 = momentum(s.rho, s.u2);
  const Eigen::Vector2d ux(quad.interpolate(s.u1, x), quad.interpolate(s.u2, x));
  const auto src = green.source(x);
  CommutatorBound b;
  const auto r = quad.integrate(x, {&s.u1, &s.u2, &m1, &m2, &s.rho}, 2, [&](Complex y, const double* v, double* o) {
    const KernelDerivatives k = kernel_at(green, *src, y, x);
    const Eigen::Vector2d diff(ux(0) - v[0], ux(1) - v[1]), m(v[2], v[3]);
    o[0] = -diff.dot(k.mixed * m);
    const double d2 = std::norm(y - x);
    o[1] = diff.norm() / d2 * std::hypot(v[2], v[3]);
    b.kernel = std::max(b.kernel, d2 * k.mixed.operatorNorm());
  });
  b.value = r[0];
  b.integral = r[1];
  return b;
}

BoundaryTerm boundary_term_B(const NeumannGreen& green, const PolarOps& ops, const FluidState& s, Complex x) {
  const CircularDomain& dom = green.domain();
  BoundaryTerm t;
  t.component = dom.nearest_component(x);
  t.projection = dom.project(x, t.component);
  t.near = dom.distance_to(x, t.component) <= dom.gap() / 4.0;
  const auto src = green.source(x);

  // u(x_j): tangential wall value, linear in theta between wall nodes
  Eigen::Vector2d uj = Eigen::Vector2d::Zero();
  if (t.near) {
    const PolarVector pv = ops.to_polar(s.u1, s.u2);
    const WallValues ut = wall_values(ops, pv.angular);
    const Eigen::ArrayXd& trace = t.component == 0 ? ut.outer : ut.inner;
    double th = std::arg(x);
    if (th < 0.0) th += 2.0 * kPi;
    const int m = ops.nt();
    const double b = th / ops.dtheta() - 0.5;
    const int jf = static_cast<int>(std::floor(b));
    const double fb = b - jf;
    const int j0 = ((jf % m) + m) % m, j1 = (j0 + 1) % m;
    const double tangential = (1.0 - fb) * trace(j0) + fb * trace(j1);
    uj << -std::sin(th) * tangential, std::cos(th) * tangential;
  }

  const double cell = ops.dr() * ops.dtheta();
  double split = 0.0, tangent = 0.0;
  for (int i = 0; i < ops.nr(); ++i) {
    const double R = ops.radii()(i);
    for (int j = 0; j < ops.nt(); ++j) {
      const Complex y(R * ops.cosines()(j), R * ops.sines()(j));
      const double w = R * cell;
      const KernelDerivatives h = green.H(y, *src);
      const Eigen::Matrix2d kern = h.mixed + h.hess_field;
      const Eigen::Vector2d u(s.u1(i, j), s.u2(i, j));
      const Eigen::Vector2d m = s.rho(i, j) * u;
      split += w * (u - uj).dot(kern * m);
      tangent += w * uj.dot(kern * m);
      t.energy += w * m.dot(u);
      if (t.near) {
        const double dj = std::abs(y - t.projection);
        t.near_bound += w * ((u - uj).norm() / (dj * dj) * m.norm() + m.dot(u) / dj);
      }
    }
  }
  t.value = split + tangent;
  return t;
}

SingularityReport b_integrand_singularity(const NeumannGreen& green, std::size_t component,
                                          const std::function<Eigen::Vector2d(Complex)>& u,
                                          const std::function<double(Complex)>& rho, int levels, double angle) {
  const CircularDomain& dom = green.domain();
  const Circle c = dom.component(component);
  const Complex dir = std::polar(1.0, angle);
  const double sign = component == 0 ? -1.0 : 1.0;  // into the fluid
  SingularityReport rep;
  for (int level = 0; level < levels; ++level) {
    const double delta = dom.gap() / 4.0 / std::pow(2.0, level);
    const Complex xj = c.center + c.radius * dir;
    const Complex x = xj + sign * delta * dir;
    const auto src = green.source(x);
    const Eigen::Vector2d uj = u(xj);
    double split = 0.0, kernel = 0.0;
    for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      for (int a = 0; a < 64; ++a) {
        const Complex y = xj + scale * delta * std::polar(1.0, 2.0 * kPi * (a + 0.5) / 64.0);
        if (!dom.contains(y)) continue;
        const KernelDerivatives h = green.H(y, *src);
        const Eigen::Matrix2d kern = h.mixed + h.hess_field;
        const Eigen::Vector2d uy = u(y), m = rho(y) * uy;
        split = std::max(split, std::abs((uy - uj).dot(kern * m)) + std::abs(uj.dot(kern * m)));
        kernel = std::max(kernel, kern.operatorNorm());
      }
    }
    rep.distances.push_back(delta);
    rep.split_sup.push_back(split);
    rep.kernel_sup.push_back(kernel);
  }
  rep.split_slope = loglog_slope(rep.distances, rep.split_sup);
  rep.kernel_slope = loglog_slope(rep.distances, rep.kernel_sup);
  return rep;
}

WallValues wall_values(const PolarOps& ops, const Field& f) {
  return {wall_trace(ops, f, true).value, wall_trace(ops, f, false).value};
}

WallValues friction_flux(const PolarOps& ops, const FluidState& s, const WallFriction& k) {
  const int m = ops.nt();
  if (k.is_zero()) return {Eigen::ArrayXd::Zero(m), Eigen::ArrayXd::Zero(m)};
  const PolarVector pv = ops.to_polar(s.u1, s.u2);
  const WallValues ut = wall_values(ops, pv.angular);
  // u . n_perp is -u_theta outside and u_theta inside; n_perp . grad is
  // -d_theta / 1 and d_theta / r respectively.
  const Eigen::ArrayXd outer = spectral_derivative(-k.outer * ut.outer);
  const Eigen::ArrayXd inner = spectral_derivative(k.inner * ut.inner);
  return {-outer, inner / ops.grid().inner_radius};
}

double remainder_R(const NeumannGreen& green, const PolarOps& ops, const FluidState& s, const PhysParams& params,
                   const WallFriction& k, const WallValues& f_boundary, Complex x) {
  const double mean = ops.wall_integral(f_boundary.outer, f_boundary.inner) / green.boundary_length();
  if (k.is_zero()) return mean;
  const WallValues w = friction_flux(ops, s, k);
  const auto src = green.source(x);
  const int m = ops.nt();
  Eigen::ArrayXd no(m), ni(m);
  const double rin = ops.grid().inner_radius;
  for (int j = 0; j < m; ++j) {
    const Complex e(ops.cosines()(j), ops.sines()(j));
    no(j) = kernel_at(green, *src, e, x).value;
    ni(j) = kernel_at(green, *src, rin * e, x).value;
  }
  return mean - params.mu * ops.wall_integral(no * w.outer, ni * w.inner);
}

Field solve_flux_neumann(const PolarOps& ops, const PolarVector& g, const FluidState& s, const PhysParams& params,
                         const WallFriction& k) {
  const int n = ops.nr(), m = ops.nt();
  const double dr = ops.dr(), dth = ops.dtheta(), rin = ops.grid().inner_radius;
  const WallValues w = friction_flux(ops, s, k);
  auto idx = [m](int i, int j) { return i * m + j; };
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * m);
  for (int i = 0; i < n; ++i) {
    const double R = ops.radii()(i), rm = rin + i * dr, rp = rin + (i + 1) * dr;
    for (int j = 0; j < m; ++j) {
      const int c = idx(i, j), jp = (j + 1) % m, jm = (j + m - 1) % m;
      double diag = 0.0, b = 0.0;
      if (i + 1 < n) {
        const double a = rp * dth / dr;
        trip.emplace_back(c, idx(i + 1, j), a);
        diag -= a;
        b += rp * dth * 0.5 * (g.radial(i, j) + g.radial(i + 1, j));
      } else {
        b -= params.mu * w.outer(j) * rp * dth;
      }
      if (i > 0) {
        const double a = rm * dth / dr;
        trip.emplace_back(c, idx(i - 1, j), a);
        diag -= a;
        b -= rm * dth * 0.5 * (g.radial(i - 1, j) + g.radial(i, j));
      } else {
        b -= params.mu * w.inner(j) * rm * dth;
      }
      const double a = dr / (R * dth);
      trip.emplace_back(c, idx(i, jp), a);
      trip.emplace_back(c, idx(i, jm), a);
      diag -= 2.0 * a;
      b += dr * 0.5 * (g.angular(i, jp) - g.angular(i, jm));
      if (c == 0) continue;  // pinned
      trip.emplace_back(c, c, diag);
      rhs(c) = b;
    }
  }
  // Row 0 pins F; drop its neighbour entries.
  trip.erase(std::remove_if(trip.begin(), trip.end(), [](const auto& t) { return t.row() == 0; }), trip.end());
  trip.emplace_back(0, 0, 1.0);
  Eigen::SparseMatrix<double> A(n * m, n * m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error("commutator.solve_failed", "flux Neumann system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  Field f(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) f(i, j) = x(idx(i, j));
  const WallValues tr = wall_values(ops, f);
  return f - ops.wall_integral(tr.outer, tr.inner) / (2.0 * kPi * (1.0 + rin));
}

NeumannResidual neumann_F_check(const PolarOps& ops, const FluidState& prev, const FluidState& next,
                                const PhysParams& params, const WallFriction& k) {
  const FluidState mid = midpoint(prev, next);
  const Field f = effective_flux(ops, mid, params, k).first;
  const PolarVector g = material_derivative(ops, prev, next, k);
  const int n = ops.nr(), m = ops.nt();
  const double dr = ops.dr(), dth = ops.dtheta(), rin = ops.grid().inner_radius;
  NeumannResidual res;
  const double band = (1.0 - rin) / 8.0;
  for (int i = 1; i < n - 1; ++i) {
    if (ops.radii()(i) < rin + band || ops.radii()(i) > 1.0 - band) continue;
    const double R = ops.radii()(i), rm = rin + i * dr, rp = rin + (i + 1) * dr;
    for (int j = 0; j < m; ++j) {
      const int jp = (j + 1) % m, jm = (j + m - 1) % m;
      const double lap = (rp * (f(i + 1, j) - f(i, j)) - rm * (f(i, j) - f(i - 1, j))) / (R * dr * dr) +
                         (f(i, jp) - 2.0 * f(i, j) + f(i, jm)) / (R * R * dth * dth);
      const double div = (ops.radii()(i + 1) * g.radial(i + 1, j) - ops.radii()(i - 1) * g.radial(i - 1, j)) /
                             (2.0 * dr * R) +
                         (g.angular(i, jp) - g.angular(i, jm)) / (2.0 * R * dth);
      res.interior = std::max(res.interior, std::abs(lap - div));
      res.interior_scale = std::max(res.interior_scale, std::abs(div));
    }
  }
  const WallValues w = friction_flux(ops, mid, k);
  for (bool outer : {true, false}) {
    const WallTrace ft = wall_trace(ops, f, outer), gt = wall_trace(ops, g.radial, outer);
    const double sign = outer ? 1.0 : -1.0;
    const Eigen::ArrayXd& fric = outer ? w.outer : w.inner;
    for (int j = 0; j < m; ++j) {
      const double dn = sign * ft.d_radial(j);
      res.boundary = std::max(res.boundary, std::abs(dn - sign * gt.value(j) - params.mu * fric(j)));
      res.boundary_scale = std::max(res.boundary_scale, std::abs(dn));
    }
  }
  return res;
}

std::vector<SamplePoint> sample_points(const CircularDomain& annulus) {
  if (!annulus.is_concentric_annulus())
    throw Error("commutator.unsupported_domain", "sample points are laid out on a concentric annulus");
  const double r = annulus.holes()[0].radius, d = 1.0 - r;
  std::vector<SamplePoint> pts;
  auto place = [&](std::size_t comp, double dist, double angle, bool band) {
    const double R = comp == 0 ? 1.0 - dist : r + dist;
    pts.push_back({std::polar(R, angle), comp, dist, band});
  };
  for (std::size_t comp = 0; comp < 2; ++comp)
    for (int k = 0; k < 8; ++k)
      place(comp, d / 8.0 + (k + 0.5) / 8.0 * (d / 2.0 - d / 8.0), 2.0 * kPi * (k + 0.5 * comp) / 8.0 + 0.37, false);
  for (std::size_t comp = 0; comp < 2; ++comp)
    for (int k = 0; k < 8; ++k)
      place(comp, (0.6 + 0.4 * k / 7.0) * d / 8.0, 2.0 * kPi * (k + 0.25) / 8.0 + 0.11 * comp, true);
  return pts;
}

RepresentationReport verify_representation(const NeumannGreen& green, const PolarOps& ops,
                                           const RepresentationInput& in, QuadratureOptions options) {
  const CircularDomain& dom = green.domain();
  if (!dom.is_concentric_annulus() || std::abs(dom.holes()[0].center) > 1e-12 ||
      std::abs(dom.holes()[0].radius - ops.grid().inner_radius) > 1e-12)
    throw Error("commutator.unsupported_domain", "representation check runs on the concentric annulus of the grid");
  const double dt = in.next.time - in.prev.time;
  const bool same = (in.prev.rho == in.next.rho).all() && (in.prev.u1 == in.next.u1).all() &&
                    (in.prev.u2 == in.next.u2).all();
  if (dt == 0.0 && !same) throw Error("commutator.identical_times", "distinct snapshots share one time");
  if (dt < 0.0) throw Error("commutator.identical_times", "snapshots out of order");

  const FluidState mid = midpoint(in.prev, in.next);
  const Field direct = in.exact_rho_udot ? solve_flux_neumann(ops, *in.exact_rho_udot, mid, in.params, in.friction)
                                         : effective_flux(ops, mid, in.params, in.friction).first;
  const WallValues f_trace = wall_values(ops, direct);
  const auto [g1, g2] = ops.to_cartesian(material_derivative(ops, in.prev, in.next, in.friction));
  const Field m1 = momentum(mid.rho, mid.u1), m2 = momentum(mid.rho, mid.u2);
  const Field p1 = momentum(in.prev.rho, in.prev.u1), p2 = momentum(in.prev.rho, in.prev.u2);
  const Field n1 = momentum(in.next.rho, in.next.u1), n2 = momentum(in.next.rho, in.next.u2);
  const SingularQuadrature quad(ops, options);

  RepresentationReport rep;
  rep.scale = direct.abs().maxCoeff();
  const std::vector<SamplePoint> pts = sample_points(dom);
  rep.rows.resize(pts.size());

  // d/dt of the inverse is the material derivative: its time part by
  // differencing the snapshots at fixed x, the convective part from
  // grad_x of int N div(rho u), which needs only an order-one kernel.
  const Field div_m = ops.divergence(ops.pad_velocity(ops.to_polar(m1, m2), in.friction));
  const Field dm1 = dt > 0.0 ? Field((n1 - p1) / dt) : ops.zeros();
  const Field dm2 = dt > 0.0 ? Field((n2 - p2) / dt) : ops.zeros();

  parallel_for(pts.size(), [&](std::size_t p) {
    RepresentationRow& row = rep.rows[p];
    const Complex x = pts[p].x;
    row.point = pts[p];
    row.direct = quad.interpolate(direct, x);
    const Eigen::Vector2d ux(quad.interpolate(mid.u1, x), quad.interpolate(mid.u2, x));
    const auto src = green.source(x);
    const auto r = quad.integrate(x, {&g1, &g2, &mid.u1, &mid.u2, &m1, &m2, &div_m, &dm1, &dm2}, 4,
                                  [&](Complex y, const double* v, double* o) {
                                    const KernelDerivatives k = kernel_at(green, *src, y, x);
                                    o[0] = -(k.grad_field(0) * v[0] + k.grad_field(1) * v[1]);
                                    const Eigen::Vector2d diff(ux(0) - v[2], ux(1) - v[3]), m(v[4], v[5]);
                                    o[1] = -diff.dot(k.mixed * m);
                                    o[2] = ux.dot(k.grad_source) * v[6];
                                    o[3] = -(k.grad_field(0) * v[7] + k.grad_field(1) * v[8]);
                                  });
    row.remainder = remainder_R(green, ops, mid, in.params, in.friction, f_trace, x);
    row.c512 = r[0] + row.remainder;
    row.commutator = r[1];
    row.transport = r[3] + r[2];
    row.boundary = boundary_term_B(green, ops, mid, x).value;
    row.qp11 = row.transport - row.commutator + row.boundary + row.remainder;
  });

  const double scale = rep.scale > 0.0 ? rep.scale : 1.0;
  for (const auto& row : rep.rows) {
    rep.err_direct_c512 = std::max(rep.err_direct_c512, std::abs(row.direct - row.c512) / scale);
    rep.err_direct_qp11 = std::max(rep.err_direct_qp11, std::abs(row.direct - row.qp11) / scale);
    rep.err_c512_qp11 = std::max(rep.err_c512_qp11, std::abs(row.c512 - row.qp11) / scale);
  }
  return rep;
}

ManufacturedFlow::ManufacturedFlow(double inner_radius, double amplitude, double eps)
    : r_(inner_radius), amplitude_(amplitude), eps_(eps) {}

Eigen::Vector2d ManufacturedFlow::momentum_shape(Complex z) const {
  const double R = std::abs(z), th = std::arg(z), c = std::cos(th), s = std::sin(th);
  const double b = (R - r_) * (R - r_) * (R - 1.0) * (R - 1.0);
  const double db = 2.0 * (R - r_) * (R - 1.0) * (2.0 * R - r_ - 1.0);
  const double kappa = kPi / (1.0 - r_);
  const double radial = amplitude_ * 0.5 * b / R * s - eps_ * kappa * std::sin(kappa * (R - r_)) * c;
  const double angular = amplitude_ * db * (1.0 + 0.5 * c) - eps_ * std::cos(kappa * (R - r_)) / R * s;
  return {radial * c - angular * s, radial * s + angular * c};
}

double ManufacturedFlow::div_shape(Complex z) const {
  const double R = std::abs(z), th = std::arg(z);
  const double kappa = kPi / (1.0 - r_), q = kappa * (R - r_);
  const double f = std::cos(q), df = -kappa * std::sin(q), ddf = -kappa * kappa * std::cos(q);
  return eps_ * (ddf + df / R - f / (R * R)) * std::cos(th);
}

FluidState ManufacturedFlow::state(const PolarOps& ops, double t) const {
  const double a = 1.0 + t, A = t + 0.5 * t * t;
  FluidState s;
  s.time = t;
  s.rho = ops.sample([&](Complex z) { return 1.0 - A * div_shape(z); });
  s.u1 = ops.sample([&](Complex z) { return a * momentum_shape(z)(0) / (1.0 - A * div_shape(z)); });
  s.u2 = ops.sample([&](Complex z) { return a * momentum_shape(z)(1) / (1.0 - A * div_shape(z)); });
  return s;
}

PolarVector ManufacturedFlow::rho_udot(const PolarOps& ops, double t) const {
  // rho u_dot = d_t m + div(m u) with m = a M, rho = 1 - A div M
  const double a = 1.0 + t, A = t + 0.5 * t * t, eta = 1e-4;
  auto value = [&](Complex z) {
    Eigen::Matrix2d dm;  // dm(j, i) = d_i M_j
    Eigen::Vector2d dd;
    for (int i = 0; i < 2; ++i) {
      const Complex e = i == 0 ? Complex(eta, 0.0) : Complex(0.0, eta);
      dm.col(i) = (8.0 * (momentum_shape(z + e) - momentum_shape(z - e)) - momentum_shape(z + 2.0 * e) +
                   momentum_shape(z - 2.0 * e)) /
                  (12.0 * eta);
      dd(i) = (8.0 * (div_shape(z + e) - div_shape(z - e)) - div_shape(z + 2.0 * e) + div_shape(z - 2.0 * e)) /
              (12.0 * eta);
    }
    const Eigen::Vector2d M = momentum_shape(z);
    const double D = div_shape(z), rho = 1.0 - A * D;
    const Eigen::Vector2d grad_rho = -A * dd;
    return Eigen::Vector2d(M + a * a * ((D * M + dm * M) / rho - M * M.dot(grad_rho) / (rho * rho)));
  };
  Field v1 = ops.zeros(), v2 = ops.zeros();
  for (int i = 0; i < ops.nr(); ++i)
    for (int j = 0; j < ops.nt(); ++j) {
      const double R = ops.radii()(i);
      const Eigen::Vector2d v = value(Complex(R * ops.cosines()(j), R * ops.sines()(j)));
      v1(i, j) = v(0);
      v2(i, j) = v(1);
    }
  return ops.to_polar(v1, v2);
}

}  // namespace mcflow
