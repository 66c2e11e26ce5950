#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mcflow/geometry.hpp"

namespace mcflow {

// h = Re g with g(z) = c0 + sum_m a_m z^m
//                    + sum_j [alpha_j log(z - b_j) + sum_m c_jm ((z - b_j)/r_j)^(-m)].
// Every term is harmonic away from the hole centres.
class SeriesHarmonic {
 public:
  SeriesHarmonic() = default;
  SeriesHarmonic(std::vector<Circle> holes, int modes);

  int modes() const { return modes_; }
  const std::vector<Circle>& holes() const { return holes_; }

  double constant = 0.0;
  std::vector<Complex> outer;                 // a_m, m = 1..M
  std::vector<double> log_coeff;              // alpha_j
  std::vector<std::vector<Complex>> inner;    // c_jm, m = 1..M
  double fit_residual = 0.0;

  double value(Complex z) const { return analytic(z, 0).real(); }
  // g^(order)(z); order 1 gives h_x - i h_y.
  Complex analytic(Complex z, int order) const;
  Eigen::Vector2d gradient(Complex z) const;
  Eigen::Matrix2d second_derivatives(Complex z) const;
  // grad h at z rotated by 90 degrees: (-h_y, h_x)
  Eigen::Vector2d perp_gradient(Complex z) const;

  bool is_constant(double tol = 1e-12) const;

  SeriesHarmonic& operator+=(const SeriesHarmonic& o);
  SeriesHarmonic& operator*=(double s);
  friend SeriesHarmonic operator+(SeriesHarmonic a, const SeriesHarmonic& b) { return a += b; }
  friend SeriesHarmonic operator*(double s, SeriesHarmonic a) { return a *= s; }

 private:
  std::vector<Circle> holes_;
  int modes_ = 0;
};

struct LaplaceOptions {
  int modes = 24;
  double max_condition = 1e13;
};

struct CollocationPoint {
  std::size_t component;
  Complex point;
  Complex normal;
  double weight;  // arc length share for boundary quadrature
};

// Least-squares collocation with the log-source + Laurent basis, 8M points per
// boundary circle and unit-norm columns. The QR factorizations depend only on
// the domain and are reused for every right-hand side.
class LaplaceSolver {
 public:
  explicit LaplaceSolver(const CircularDomain& domain, LaplaceOptions options = {});

  const CircularDomain& domain() const { return domain_; }
  int modes() const { return options_.modes; }
  const std::vector<CollocationPoint>& points() const { return points_; }
  double condition_estimate() const { return condition_; }

  SeriesHarmonic solve_dirichlet(const std::function<double(std::size_t, Complex)>& data) const;
  SeriesHarmonic solve_dirichlet(const std::vector<double>& constants) const;
  SeriesHarmonic solve_dirichlet_values(const Eigen::VectorXd& values) const;

  // Neumann data g(component, point, outer normal); the additive constant is
  // left at zero. Throws if the data has nonzero total flux.
  SeriesHarmonic solve_neumann(const std::function<double(std::size_t, Complex, Complex)>& data) const;
  SeriesHarmonic solve_neumann_values(const Eigen::VectorXd& flux) const;
  // Coefficients for several right-hand sides at once (columns of `flux`).
  std::vector<SeriesHarmonic> solve_neumann_batch(const Eigen::MatrixXd& flux) const;

  // Sup of |h - data| on boundary points placed between the collocation nodes.
  double held_out_residual(const SeriesHarmonic& h, const std::function<double(std::size_t, Complex)>& data) const;
  double held_out_neumann_residual(const SeriesHarmonic& h,
                                   const std::function<double(std::size_t, Complex, Complex)>& data) const;

 private:
  SeriesHarmonic unpack(const Eigen::VectorXd& c, bool with_constant) const;
  CircularDomain domain_;
  LaplaceOptions options_;
  std::vector<CollocationPoint> points_;
  Eigen::VectorXd dir_scale_, neu_scale_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> dir_qr_, neu_qr_;
  double condition_ = 1.0;
};

SeriesHarmonic solve_dirichlet(const CircularDomain& domain, const std::vector<double>& constants,
                               LaplaceOptions options = {});
SeriesHarmonic harmonic_measure(const CircularDomain& domain, std::size_t j, LaplaceOptions options = {});
std::vector<SeriesHarmonic> harmonic_measures(const LaplaceSolver& solver);

Eigen::Vector2d gradient(const SeriesHarmonic& h, Complex z);
Eigen::Matrix2d second_derivatives(const SeriesHarmonic& h, Complex z);

struct PeriodMatrix {
  Eigen::MatrixXd a;
  double symmetry_defect = 0.0;
  double condition = 0.0;
};

// a_jl = closed integral over Γ_j of (d_y w_l dx - d_x w_l dy), with Γ_j
// traversed so the fluid lies on its left.
PeriodMatrix period_matrix(const CircularDomain& domain, LaplaceOptions options = {});
PeriodMatrix period_matrix(const LaplaceSolver& solver, const std::vector<SeriesHarmonic>& measures);

struct CriticalPoint {
  Complex location;
  int multiplicity = 1;
  bool on_boundary = false;
};

struct CriticalPointOptions {
  double cell_size = 0.0;   // 0 picks gap/8
  int winding_samples = 256;
  double boundary_dip = 1e-6;
};

struct CriticalPointReport {
  std::vector<CriticalPoint> points;
  double weighted_count = 0.0;
  int expected = 0;
};

// Throws laplace.index_mismatch (with the found set in the message) when the
// weighted count differs from k - 2.
CriticalPointReport find_critical_points(const SeriesHarmonic& h, const CircularDomain& domain,
                                         CriticalPointOptions options = {});
// Same search without the final index check.
CriticalPointReport locate_critical_points(const SeriesHarmonic& h, const CircularDomain& domain,
                                           CriticalPointOptions options = {});
// Winding number of g' = h_x - i h_y around a circle.
int analytic_winding(const SeriesHarmonic& h, Complex center, double radius, int samples = 256);

}  // namespace mcflow
