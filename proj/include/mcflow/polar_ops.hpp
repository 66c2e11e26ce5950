#pragma once

#include <Eigen/Dense>

#include "mcflow/geometry.hpp"

namespace mcflow {

// Cell-centred fields on the annulus polar grid: rows are radii, columns angles.
using Field = Eigen::ArrayXXd;

struct PolarVector {
  Field radial, angular;
};

// Friction coefficient per angular node on each wall.
struct WallFriction {
  Eigen::ArrayXd outer, inner;
  static WallFriction constant(int n_angular, double outer_value, double inner_value);
  bool is_zero() const;
  double max() const;
};

struct PhysParams {
  double mu = 0.1;
  double beta = 1.5;
  double gamma = 1.4;
  double lambda(double rho) const;
  double pressure(double rho) const;
};

// Second-order finite differences on the polar grid. Padded fields carry one
// ghost ring on each wall (row 0 inside the inner wall, row n+1 outside the
// outer one).
class PolarOps {
 public:
  explicit PolarOps(const Grid& grid);

  const Grid& grid() const { return grid_; }
  int nr() const { return grid_.n_radial; }
  int nt() const { return grid_.n_angular; }
  double dr() const { return grid_.dr; }
  double dtheta() const { return grid_.dtheta; }
  const Eigen::ArrayXd& radii() const { return radius_; }
  const Eigen::ArrayXd& cosines() const { return cos_; }
  const Eigen::ArrayXd& sines() const { return sin_; }

  Field zeros() const { return Field::Zero(nr(), nt()); }
  Field constant(double v) const { return Field::Constant(nr(), nt(), v); }
  Field sample(const std::function<double(Complex)>& f) const;

  PolarVector to_polar(const Field& u1, const Field& u2) const;
  std::pair<Field, Field> to_cartesian(const PolarVector& v) const;

  // Quadratic extrapolation into the ghost rings.
  Field pad(const Field& f) const;
  // u_R odd across each wall, u_theta from the Robin relation that the slip
  // condition becomes on a circle.
  PolarVector pad_velocity(const PolarVector& v, const WallFriction& k) const;
  // Robin factor g = factor * a relating ghost and first interior u_theta.
  double ghost_factor(bool outer, double k) const;

  Field divergence(const PolarVector& padded) const;
  // curl u = d2 u1 - d1 u2
  Field curl(const PolarVector& padded) const;
  PolarVector gradient(const Field& padded) const;
  PolarVector perp_gradient(const Field& padded) const;
  // Compact three-point vector Laplacian; sees odd-even modes that the
  // composed central operators miss.
  PolarVector vector_laplacian(const PolarVector& padded) const;
  // u . grad u in polar components at each cell.
  PolarVector advection(const PolarVector& padded) const;
  // -div(rho u), conservative, with optional minmod reconstruction. `sound`
  // adds the acoustic speed to the upwind dissipation (local Lax-Friedrichs);
  // without it the flux is plain upwind.
  Field mass_rate(const Field& rho, const PolarVector& v, bool muscl) const;
  Field mass_rate(const Field& rho, const PolarVector& v, bool muscl, const Field& sound) const;

  double integrate(const Field& f) const;
  double norm_l2(const Field& f) const { return std::sqrt(integrate(f * f)); }
  // Sum over both walls of f * arc length, f given per angular node.
  double wall_integral(const Eigen::ArrayXd& outer, const Eigen::ArrayXd& inner) const;
  // Wall values of u_theta from the ghost relation (mean of ghost and interior).
  std::pair<Eigen::ArrayXd, Eigen::ArrayXd> wall_tangential(const PolarVector& padded) const;

 private:
  Grid grid_;
  Eigen::ArrayXd radius_, cos_, sin_, weight_row_;
};

// Pieces of the momentum balance rho u_t = viscous - rho u.grad u - grad P.
// viscous = grad((2 mu + lambda) div u) - mu grad_perp(curl u), evaluated as
// grad((mu + lambda) div u) + mu lap u with the compact Laplacian; the slip
// condition enters through the u_theta ghost.
struct MomentumTerms {
  PolarVector velocity;  // padded
  Field divergence, vorticity;
  PolarVector advection, pressure_gradient, viscous;
};

MomentumTerms momentum_terms(const PolarOps& ops, const Field& rho, const PolarVector& u, const PhysParams& params,
                             const WallFriction& k);

// Wall value and one-sided d/dR from the three cells next to a wall; used by
// boundary diagnostics that must not see the ghost closure.
struct WallTrace {
  Eigen::ArrayXd value, d_radial;
};
WallTrace wall_trace(const PolarOps& ops, const Field& f, bool outer);

}  // namespace mcflow
