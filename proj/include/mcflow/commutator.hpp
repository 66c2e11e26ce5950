#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mcflow/greens.hpp"
#include "mcflow/quadrature.hpp"
#include "mcflow/simulator.hpp"

namespace mcflow {

struct QuadratureOptions {
  double patch_radius = 0.1;   // capped at 0.9 times the distance to the walls
  double min_patch_cells = 2.0;
  int radial = 12;             // Gauss nodes on each half of the patch radius
  int angular = 64;
};

// Volume integrals over the annulus polar grid with kernels that blow up like
// |x - y|^-1 at x. A smooth cutoff chi(|y - x| / radius) splits the integrand:
// (1 - chi) part by the midpoint rule on the cells, chi part by a polar rule
// about x whose Jacobian cancels the leading kernel. The radius does not
// shrink with h, so the midpoint part stays second order.
class SingularQuadrature {
 public:
  explicit SingularQuadrature(const PolarOps& ops, QuadratureOptions options = {});

  const PolarOps& ops() const { return *ops_; }
  // Throws commutator.patch_outside below min_patch_cells radial cells.
  double patch_radius(Complex x) const;

  // fields: sampled at y and passed in order; out has `outputs` slots.
  using Integrand = std::function<void(Complex y, const double* fields, double* out)>;
  std::vector<double> integrate(Complex x, const std::vector<const Field*>& fields, int outputs,
                                const Integrand& integrand) const;

  // Bilinear in (R, theta), linear extrapolation past the outermost centres.
  double interpolate(const Field& f, Complex z) const;

  // 1 on [0, 1/2], 0 from 1 on, smooth in between.
  static double cutoff(double s);

  // Integral of log|x - y| over the rectangle [lo, hi]: edge-swept polar rule
  // about x, and the closed form.
  static double log_cell(Complex x, Complex lo, Complex hi, int nodes = 16);
  static double log_cell_closed_form(Complex x, Complex lo, Complex hi);

 private:
  const PolarOps* ops_;
  QuadratureOptions options_;
  GaussRule half_;  // on [0, 1/2]
};

// -int d_{y_j} N(x, y) rho u_j(y) dy at each point.
std::vector<double> inv_laplace_div(const NeumannGreen& green, const SingularQuadrature& quad, const FluidState& s,
                                    const std::vector<Complex>& points);

// -int d_{x_i} d_{y_j} N(x, y) (u_i(x) - u_i(y)) rho u_j(y) dy.
double inner_commutator(const NeumannGreen& green, const SingularQuadrature& quad, const FluidState& s, Complex x);

struct CommutatorBound {
  double value = 0.0;
  double integral = 0.0;  // int |u(y) - u(x)| / |y - x|^2 rho |u| dy
  double kernel = 0.0;    // sup over the grid of |x - y|^2 |d_x d_y N|
};
CommutatorBound inner_commutator_bound(const NeumannGreen& green, const SingularQuadrature& quad,
                                       const FluidState& s, Complex x);

struct BoundaryTerm {
  double value = 0.0;
  bool near = false;            // dist(x, Gamma_j) <= d/4, split about u(x_j)
  std::size_t component = 0;    // nearest wall
  Complex projection;           // x_j
  double energy = 0.0;          // int rho |u|^2
  double near_bound = 0.0;      // int |u - u(x_j)| / |y - x_j|^2 rho |u| + int rho |u|^2 / |y - x_j|
};

// int (d_{x_i} d_{y_j} + d_{y_i} d_{y_j}) N(x, y) rho u_i u_j(y) dy. The
// fundamental parts cancel, so only H enters.
BoundaryTerm boundary_term_B(const NeumannGreen& green, const PolarOps& ops, const FluidState& s, Complex x);

struct SingularityReport {
  std::vector<double> distances, split_sup, kernel_sup;
  double split_slope = 0.0, kernel_slope = 0.0;
};
// Sup over y near x_j of the split B integrand for x at d/4, d/8, ... from
// wall j of the annulus (0 outer, 1 inner), u and rho closed form.
SingularityReport b_integrand_singularity(const NeumannGreen& green, std::size_t component,
                                          const std::function<Eigen::Vector2d(Complex)>& u,
                                          const std::function<double(Complex)>& rho, int levels = 5,
                                          double angle = 0.3);

// Wall traces per angular node.
struct WallValues {
  Eigen::ArrayXd outer, inner;
};

// n_perp . grad(K u . n_perp) on both walls, spectral in theta.
WallValues friction_flux(const PolarOps& ops, const FluidState& s, const WallFriction& k);
WallValues wall_values(const PolarOps& ops, const Field& f);

// l^-1 int F dS - mu int N(x, y) n_perp . grad(K u . n_perp) dS_y.
double remainder_R(const NeumannGreen& green, const PolarOps& ops, const FluidState& s, const PhysParams& params,
                   const WallFriction& k, const WallValues& f_boundary, Complex x);

// F from Delta F = div G, d_n F = G . n + mu n_perp . grad(K u . n_perp), zero
// boundary mean; finite volumes with a sparse direct solve. G in polar components.
Field solve_flux_neumann(const PolarOps& ops, const PolarVector& rho_udot, const FluidState& s,
                         const PhysParams& params, const WallFriction& k);

struct NeumannResidual {
  double interior = 0.0;  // max |Delta F - div(rho u_dot)| at least d/8 from the walls
  double boundary = 0.0;  // max |d_n F - rho u_dot . n - mu n_perp . grad(K u . n_perp)|
  double interior_scale = 0.0, boundary_scale = 0.0;  // max |div(rho u_dot)|, max |d_n F|
};
NeumannResidual neumann_F_check(const PolarOps& ops, const FluidState& prev, const FluidState& next,
                                const PhysParams& params, const WallFriction& k);

struct SamplePoint {
  Complex x;
  std::size_t component = 0;  // nearest wall
  double distance = 0.0;
  bool band = false;          // one of the d/8 near-band points
};
// 16 interior points stratified by distance to each wall, 8 in each d/8 band.
std::vector<SamplePoint> sample_points(const CircularDomain& annulus);

struct RepresentationInput {
  FluidState prev, next;
  PhysParams params;
  WallFriction friction;
  // When set, F_direct solves the Neumann problem with this rho u_dot (polar,
  // midpoint time) instead of using the constitutive F.
  std::optional<PolarVector> exact_rho_udot;
};

struct RepresentationRow {
  SamplePoint point;
  double direct = 0.0, c512 = 0.0, qp11 = 0.0;
  double transport = 0.0, commutator = 0.0, boundary = 0.0, remainder = 0.0;
};

struct RepresentationReport {
  std::vector<RepresentationRow> rows;
  double scale = 0.0;  // sup |F_direct| on the grid
  double err_direct_c512 = 0.0, err_direct_qp11 = 0.0, err_c512_qp11 = 0.0;  // relative to scale
};

// Throws commutator.identical_times when distinct snapshots share a time and
// commutator.unsupported_domain off the concentric annulus.
RepresentationReport verify_representation(const NeumannGreen& green, const PolarOps& ops,
                                           const RepresentationInput& input, QuadratureOptions options = {});

// Momentum a(t) M with M = amplitude grad_perp psi0 + eps grad v0, psi0 =
// (R - r)^2 (R - 1)^2 (1 + cos(theta)/2), v0 = cos(pi (R - r)/(1 - r)) cos(theta),
// a = 1 + t; rho = 1 - (t + t^2/2) div M solves continuity exactly.
class ManufacturedFlow {
 public:
  explicit ManufacturedFlow(double inner_radius, double amplitude = 10.0, double eps = 0.01);
  FluidState state(const PolarOps& ops, double t) const;
  PolarVector rho_udot(const PolarOps& ops, double t) const;
  Eigen::Vector2d momentum_shape(Complex z) const;  // M
  double div_shape(Complex z) const;                // div M

 private:
  double r_, amplitude_, eps_;
};

}  // namespace mcflow
