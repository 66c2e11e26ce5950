#include "mcflow/polar_ops.hpp"

#include <algorithm>
#include <cmath>

namespace mcflow {

WallFriction WallFriction::constant(int n_angular, double outer_value, double inner_value) {
  return {Eigen::ArrayXd::Constant(n_angular, outer_value), Eigen::ArrayXd::Constant(n_angular, inner_value)};
}

bool WallFriction::is_zero() const { return (outer == 0.0).all() && (inner == 0.0).all(); }
double WallFriction::max() const { return std::max(outer.maxCoeff(), inner.maxCoeff()); }

double PhysParams::lambda(double rho) const { return std::pow(rho, beta); }
double PhysParams::pressure(double rho) const { return std::pow(rho, gamma); }

PolarOps::PolarOps(const Grid& grid) : grid_(grid) {
  if (grid_.layout != Grid::Layout::Polar) throw Error("simulator.invalid_grid", "polar operators need a polar grid");
  radius_.resize(nr());
  for (int i = 0; i < nr(); ++i) radius_(i) = grid_.radius(i);
  cos_.resize(nt());
  sin_.resize(nt());
  for (int j = 0; j < nt(); ++j) cos_(j) = std::cos(grid_.angle(j)), sin_(j) = std::sin(grid_.angle(j));
  weight_row_ = radius_ * dr() * dtheta();
}

Field PolarOps::sample(const std::function<double(Complex)>& f) const {
  Field out(nr(), nt());
  for (int j = 0; j < nt(); ++j)
    for (int i = 0; i < nr(); ++i) out(i, j) = f(std::polar(radius_(i), grid_.angle(j)));
  return out;
}

PolarVector PolarOps::to_polar(const Field& u1, const Field& u2) const {
  PolarVector v{Field(nr(), nt()), Field(nr(), nt())};
  for (int j = 0; j < nt(); ++j) {
    v.radial.col(j) = u1.col(j) * cos_(j) + u2.col(j) * sin_(j);
    v.angular.col(j) = -u1.col(j) * sin_(j) + u2.col(j) * cos_(j);
  }
  return v;
}

std::pair<Field, Field> PolarOps::to_cartesian(const PolarVector& v) const {
  Field u1(v.radial.rows(), nt()), u2(v.radial.rows(), nt());
  for (int j = 0; j < nt(); ++j) {
    u1.col(j) = v.radial.col(j) * cos_(j) - v.angular.col(j) * sin_(j);
    u2.col(j) = v.radial.col(j) * sin_(j) + v.angular.col(j) * cos_(j);
  }
  return {u1, u2};
}

Field PolarOps::pad(const Field& f) const {
  const int n = nr();
  Field p(n + 2, nt());
  p.middleRows(1, n) = f;
  p.row(0) = 3.0 * f.row(0) - 3.0 * f.row(1) + f.row(2);
  p.row(n + 1) = 3.0 * f.row(n - 1) - 3.0 * f.row(n - 2) + f.row(n - 3);
  return p;
}

double PolarOps::ghost_factor(bool outer, double k) const {
  const double h = dr();
  if (outer) {
    const double c = -(k + 1.0);  // wall radius 1
    return (1.0 + 0.5 * c * h) / (1.0 - 0.5 * c * h);
  }
  const double c = k - 1.0 / grid_.inner_radius;
  return (1.0 - 0.5 * c * h) / (1.0 + 0.5 * c * h);
}

PolarVector PolarOps::pad_velocity(const PolarVector& v, const WallFriction& k) const {
  const int n = nr();
  PolarVector p{Field(n + 2, nt()), Field(n + 2, nt())};
  p.radial.middleRows(1, n) = v.radial;
  p.angular.middleRows(1, n) = v.angular;
  p.radial.row(0) = -v.radial.row(0);
  p.radial.row(n + 1) = -v.radial.row(n - 1);
  for (int j = 0; j < nt(); ++j) {
    p.angular(0, j) = ghost_factor(false, k.inner(j)) * v.angular(0, j);
    p.angular(n + 1, j) = ghost_factor(true, k.outer(j)) * v.angular(n - 1, j);
  }
  return p;
}

namespace {

// Central theta difference at row i.
inline double dth(const Field& f, int i, int j, int nt) {
  return f(i, (j + 1) % nt) - f(i, (j + nt - 1) % nt);
}

}  // namespace

Field PolarOps::divergence(const PolarVector& p) const {
  Field out(nr(), nt());
  const double rin = grid_.inner_radius;
  for (int j = 0; j < nt(); ++j)
    for (int i = 0; i < nr(); ++i) {
      const double R = radius_(i);
      const double Rm = rin + (i - 0.5) * dr(), Rp = rin + (i + 1.5) * dr();
      const double dR = (Rp * p.radial(i + 2, j) - Rm * p.radial(i, j)) / (2.0 * dr());
      out(i, j) = (dR + dth(p.angular, i + 1, j, nt()) / (2.0 * dtheta())) / R;
    }
  return out;
}

Field PolarOps::curl(const PolarVector& p) const {
  Field out(nr(), nt());
  const double rin = grid_.inner_radius;
  for (int j = 0; j < nt(); ++j)
    for (int i = 0; i < nr(); ++i) {
      const double R = radius_(i);
      const double Rm = rin + (i - 0.5) * dr(), Rp = rin + (i + 1.5) * dr();
      const double dR = (Rp * p.angular(i + 2, j) - Rm * p.angular(i, j)) / (2.0 * dr());
      out(i, j) = -(dR - dth(p.radial, i + 1, j, nt()) / (2.0 * dtheta())) / R;
    }
  return out;
}

PolarVector PolarOps::gradient(const Field& p) const {
  PolarVector g{Field(nr(), nt()), Field(nr(), nt())};
  for (int j = 0; j < nt(); ++j)
    for (int i = 0; i < nr(); ++i) {
      g.radial(i, j) = (p(i + 2, j) - p(i, j)) / (2.0 * dr());
      g.angular(i, j) = dth(p, i + 1, j, nt()) / (2.0 * dtheta() * radius_(i));
    }
  return g;
}

PolarVector PolarOps::perp_gradient(const Field& p) const {
  PolarVector g = gradient(p);
  // rotate by +90 degrees: (a, b) -> (-b, a)
  return {-g.angular, g.radial};
}

PolarVector PolarOps::advection(const PolarVector& p) const {
  PolarVector out{Field(nr(), nt()), Field(nr(), nt())};
  for (int j = 0; j < nt(); ++j)
    for (int i = 0; i < nr(); ++i) {
      const double R = radius_(i);
      const double ur = p.radial(i + 1, j), ut = p.angular(i + 1, j);
      const double dR_r = (p.radial(i + 2, j) - p.radial(i, j)) / (2.0 * dr());
      const double dR_t = (p.angular(i + 2, j) - p.angular(i, j)) / (2.0 * dr());
      const double dT_r = dth(p.radial, i + 1, j, nt()) / (2.0 * dtheta());
      const double dT_t = dth(p.angular, i + 1, j, nt()) / (2.0 * dtheta());
      out.radial(i, j) = ur * dR_r + ut / R * dT_r - ut * ut / R;
      out.angular(i, j) = ur * dR_t + ut / R * dT_t + ur * ut / R;
    }
  return out;
}

namespace {

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace

Field PolarOps::mass_rate(const Field& rho, const PolarVector& v, bool muscl) const {
  return mass_rate(rho, v, muscl, Field::Zero(nr(), nt()));
}

Field PolarOps::mass_rate(const Field& rho, const PolarVector& v, bool muscl, const Field& sound) const {
  const int n = nr(), m = nt();
  const double rin = grid_.inner_radius;
  Field out = Field::Zero(n, m);
  // local Lax-Friedrichs flux with speed |u| + c on reconstructed face states
  auto face_flux = [](double uf, double left, double right, double c) {
    return 0.5 * uf * (left + right) - 0.5 * (std::abs(uf) + c) * (right - left);
  };
  // radial faces i + 1/2, i = 0..n-2; walls carry no flux
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const double uf = 0.5 * (v.radial(i, j) + v.radial(i + 1, j));
      double left = rho(i, j), right = rho(i + 1, j);
      if (muscl) {
        // one-sided slope in the wall cells
        const double sl = i > 0 ? minmod(rho(i, j) - rho(i - 1, j), rho(i + 1, j) - rho(i, j)) : rho(1, j) - rho(0, j);
        const double sr = i + 2 < n ? minmod(rho(i + 1, j) - rho(i, j), rho(i + 2, j) - rho(i + 1, j))
                                    : rho(n - 1, j) - rho(n - 2, j);
        left += 0.5 * sl;
        right -= 0.5 * sr;
      }
      const double c = std::max(sound(i, j), sound(i + 1, j));
      const double flux = (rin + (i + 1) * dr()) * dtheta() * face_flux(uf, left, right, c);
      out(i, j) -= flux;
      out(i + 1, j) += flux;
    }
  }
  // angular faces j + 1/2; rotate both cell velocities into the face basis
  const double ch = std::cos(0.5 * dtheta()), sh = std::sin(0.5 * dtheta());
  for (int j = 0; j < m; ++j) {
    const int jp = (j + 1) % m, jm = (j + m - 1) % m, jpp = (j + 2) % m;
    for (int i = 0; i < n; ++i) {
      const double ul = v.angular(i, j) * ch - v.radial(i, j) * sh;
      const double ur = v.angular(i, jp) * ch + v.radial(i, jp) * sh;
      const double uf = 0.5 * (ul + ur);
      double left = rho(i, j), right = rho(i, jp);
      if (muscl) {
        left += 0.5 * minmod(rho(i, j) - rho(i, jm), rho(i, jp) - rho(i, j));
        right -= 0.5 * minmod(rho(i, jp) - rho(i, j), rho(i, jpp) - rho(i, jp));
      }
      const double c = std::max(sound(i, j), sound(i, jp));
      const double flux = dr() * face_flux(uf, left, right, c);
      out(i, j) -= flux;
      out(i, jp) += flux;
    }
  }
  for (int i = 0; i < n; ++i) out.row(i) /= weight_row_(i);
  return out;
}

double PolarOps::integrate(const Field& f) const {
  double total = 0.0;
  for (int i = 0; i < nr(); ++i) total += f.row(i).sum() * weight_row_(i);
  return total;
}

double PolarOps::wall_integral(const Eigen::ArrayXd& outer, const Eigen::ArrayXd& inner) const {
  return (outer.sum() * 1.0 + inner.sum() * grid_.inner_radius) * dtheta();
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> PolarOps::wall_tangential(const PolarVector& p) const {
  const int n = nr();
  Eigen::ArrayXd outer = 0.5 * (p.angular.row(n) + p.angular.row(n + 1)).transpose();
  Eigen::ArrayXd inner = 0.5 * (p.angular.row(0) + p.angular.row(1)).transpose();
  return {outer, inner};
}

PolarVector PolarOps::vector_laplacian(const PolarVector& p) const {
  const int m = nt();
  const double rin = grid_.inner_radius, dr2 = dr() * dr(), dt2 = dtheta() * dtheta();
  PolarVector out{Field(nr(), m), Field(nr(), m)};
  for (int j = 0; j < m; ++j) {
    const int jp = (j + 1) % m, jm = (j + m - 1) % m;
    for (int i = 0; i < nr(); ++i) {
      const int c = i + 1;
      const double R = radius_(i), rm = rin + i * dr(), rp = rin + (i + 1) * dr();
      auto scalar = [&](const Field& f) {
        return (rp * (f(c + 1, j) - f(c, j)) - rm * (f(c, j) - f(c - 1, j))) / (R * dr2) +
               (f(c, jp) - 2.0 * f(c, j) + f(c, jm)) / (R * R * dt2);
      };
      const double dtr = (p.radial(c, jp) - p.radial(c, jm)) / (2.0 * dtheta());
      const double dtt = (p.angular(c, jp) - p.angular(c, jm)) / (2.0 * dtheta());
      out.radial(i, j) = scalar(p.radial) - (p.radial(c, j) + 2.0 * dtt) / (R * R);
      out.angular(i, j) = scalar(p.angular) - (p.angular(c, j) - 2.0 * dtr) / (R * R);
    }
  }
  return out;
}

MomentumTerms momentum_terms(const PolarOps& ops, const Field& rho, const PolarVector& u, const PhysParams& params,
                             const WallFriction& k) {
  MomentumTerms t;
  t.velocity = ops.pad_velocity(u, k);
  t.divergence = ops.divergence(t.velocity);
  t.vorticity = ops.curl(t.velocity);
  t.advection = ops.advection(t.velocity);
  const Field pressure = rho.unaryExpr([&](double r) { return params.pressure(r); });
  t.pressure_gradient = ops.gradient(ops.pad(pressure));
  const Field bulk = (params.mu + rho.pow(params.beta)) * t.divergence;
  const PolarVector gd = ops.gradient(ops.pad(bulk));
  const PolarVector lap = ops.vector_laplacian(t.velocity);
  t.viscous = {gd.radial + params.mu * lap.radial, gd.angular + params.mu * lap.angular};
  return t;
}

WallTrace wall_trace(const PolarOps& ops, const Field& f, bool outer) {
  const int n = ops.nr();
  const int a = outer ? n - 1 : 0, b = outer ? n - 2 : 1, c = outer ? n - 3 : 2;
  WallTrace w;
  w.value = ((15.0 * f.row(a) - 10.0 * f.row(b) + 3.0 * f.row(c)) / 8.0).transpose();
  w.d_radial = ((-2.0 * f.row(a) + 3.0 * f.row(b) - f.row(c)) / ops.dr()).transpose();
  if (outer) w.d_radial = -w.d_radial;
  return w;
}

}  // namespace mcflow
