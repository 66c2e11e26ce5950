#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mcflow/geometry.hpp"
#include "mcflow/laplace.hpp"

namespace mcflow {

// Value and Jacobian of a planar field, grad(i, k) = d_k u_i.
struct FieldJet {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
  double div() const { return grad(0, 0) + grad(1, 1); }
  double curl() const { return grad(0, 1) - grad(1, 0); }
};

using JetFunction = std::function<FieldJet(Complex)>;

struct VectorField {
  Grid grid;
  Eigen::VectorXd u1, u2;                 // at grid.nodes
  std::function<Complex(Complex)> eval;   // u1 + i u2 anywhere in the closure
  JetFunction jet;                        // empty unless the field is closed form
  bool slip = false;
  double slip_tolerance = 0.0;

  Complex at(Complex z) const { return eval(z); }
  // u at grid.boundary nodes, one vector per component
  std::vector<std::vector<Complex>> boundary_trace() const;
  double max_normal_trace() const;
  // Throws divcurl.slip_violation when flagged slip and the trace exceeds the tolerance.
  void check_slip() const;
};

VectorField make_field(const Grid& grid, std::function<Complex(Complex)> eval, JetFunction jet = {});

struct DivCurlResidual {
  double max_div = 0.0;
  double max_curl = 0.0;
};
// Central differences of the evaluator with step h/2 at every node except cut cells.
DivCurlResidual discrete_div_curl(const VectorField& field);

Eigen::MatrixXd gram_matrix(const std::vector<VectorField>& fields);
// Integral of u . n_perp over component j, n_perp = (n2, -n1).
double circulation(const std::function<Complex(Complex)>& u, const CircularDomain& domain, std::size_t j,
                   int samples = 512);

// grad_perp of the harmonic measure of each hole, l = 1..k-1.
std::vector<VectorField> cr_nullspace(const CircularDomain& domain, int resolution = 64, LaplaceOptions options = {});
JetFunction perp_gradient_jet(const SeriesHarmonic& h);

struct PointConstraint {
  Complex point;
  Complex value;  // u1 + i u2
};

// Integral of u . n_perp over the arc of component `component` between the two
// angles (counterclockwise from begin).
struct IntervalConstraint {
  std::size_t component = 0;
  double angle_begin = 0.0;
  double angle_end = 0.0;
  double value = 0.0;
};

struct DivCurlConstraints {
  std::vector<PointConstraint> points;
  std::vector<IntervalConstraint> intervals;
  std::size_t size() const { return points.size() + intervals.size(); }
};

struct DivCurlOptions {
  int resolution = 64;         // output grid
  int quadrature = 0;          // rings of the compatibility check, 0 picks resolution
  int angles = 128;            // directions of the polar rule about each target
  int radial = 24;             // Gauss nodes along each direction
  int modes = 16;              // Laurent modes per boundary circle
  double constraint_weight = 1e6;
  double compatibility_tolerance = 1e-3;  // relative to the integral of |f|
};

struct DivCurlSolution {
  VectorField field;
  bool modulo_nullspace = false;
  double boundary_residual = 0.0;    // sup |u . n| on held-out boundary points
  double constraint_residual = 0.0;  // largest constraint mismatch
  double compatibility = 0.0;        // integral of f over the domain
};

// div u = f, curl u = g, u . n = 0 with exactly 2k - 3 constraints, or none (the
// result is then fixed only modulo the null space). f and g are evaluated on
// the whole closed unit disc.
DivCurlSolution solve_divcurl(const CircularDomain& domain, const std::function<double(Complex)>& f,
                              const std::function<double(Complex)>& g, const DivCurlConstraints& constraints = {},
                              DivCurlOptions options = {});

// 2k - 3 interior points at distance gap/2 from the holes.
std::vector<Complex> default_anchor_points(const CircularDomain& domain);

struct DivCurlTerms {
  double grad = 0.0;      // |grad u|_p
  double div = 0.0;       // |div u|_p
  double curl = 0.0;      // |curl u|_p
  double points = 0.0;    // sum over anchors of |u(xi)|
  double friction = 0.0;  // integral over the boundary of K |u|^2
  double density = 0.0;   // |rho^(1/2) u|_2 with rho = 1
};

DivCurlTerms divcurl_terms(const Grid& grid, const JetFunction& u, double p,
                           const std::vector<Complex>& anchors, double friction = 1.0);

// Ratios of the three estimates; 0 when u vanishes.
double point_ratio(const DivCurlTerms& t);
double friction_ratio(const DivCurlTerms& t);
double density_ratio(const DivCurlTerms& t);
double witness_ratio(const DivCurlTerms& t);  // point terms deleted

// u = grad_perp(b P) + grad(b^2 Q) + sum_l c_l grad_perp(w_l), with b vanishing on
// every circle and P, Q random polynomials, so u . n = 0 exactly. Each basis
// field is scaled to unit RMS gradient.
class RandomSlipFamily {
 public:
  RandomSlipFamily(const CircularDomain& domain, int degree, LaplaceOptions options = {});
  int degree() const { return degree_; }
  std::size_t size() const { return 2 * monomials_ + measures_.size(); }
  JetFunction field(const Eigen::VectorXd& coefficients) const;
  Eigen::VectorXd draw(std::uint64_t seed) const;
  // All basis jets at the given points, basis-major.
  std::vector<std::vector<FieldJet>> basis_at(const std::vector<Complex>& points) const;
  const std::vector<SeriesHarmonic>& measures() const { return measures_; }

 private:
  FieldJet basis(std::size_t index, Complex z) const;
  FieldJet raw_basis(std::size_t index, Complex z) const;
  CircularDomain domain_;
  int degree_;
  std::size_t monomials_;
  std::vector<SeriesHarmonic> measures_;
  std::vector<double> scale_;
};

struct WitnessSample {
  double epsilon = 0.0;
  double ratio = 0.0;
};

struct EnsembleOptions {
  int resolution = 48;
  int degree = 4;
  std::uint64_t seed = 7;
  double friction = 1.0;
  std::vector<Complex> anchors;  // empty picks default_anchor_points
};

struct EnsembleReport {
  double p = 0.0;
  std::vector<double> ratios;           // point-anchored estimate
  std::vector<double> friction_ratios;  // boundary friction variant, squared form
  std::vector<double> density_ratios;   // density variant with rho = 1
  double max_ratio = 0.0;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  double stability = 0.0;  // second_half_max / max_ratio
  double friction_max = 0.0;
  double density_max = 0.0;
  std::vector<WitnessSample> witness;  // u = grad_perp w_1 + eps noise, point terms deleted
  double witness_ratio = 0.0;          // at the smallest eps
};

// Member i uses seed splitmix(seed + i); results do not depend on the thread count.
EnsembleReport inequality_ensemble(const CircularDomain& domain, double p, int count, EnsembleOptions options = {});

struct WeightedCheck {
  double lhs = 0.0;          // integral of |u|^nu |grad u|^2
  double div_curl = 0.0;     // integral of |u|^nu (div^2 + curl^2)
  double density = 0.0;      // integral of rho |u|^(2 + nu)
  double mass = 0.0;         // integral of rho
  double ratio = 0.0;        // lhs / (div_curl + density), 0 when both sides vanish
};

WeightedCheck weighted_divcurl_check(const CircularDomain& domain, const JetFunction& u, double nu,
                                     const std::function<double(Complex)>& rho, int resolution = 64);

}  // namespace mcflow
