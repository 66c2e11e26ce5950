#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mcflow/geometry.hpp"

namespace mcflow {

struct CurveSolverOptions {
  int nodes = 256;      // per curve
  int oversample = 8;   // evaluation nodes per solve node
};

// Dirichlet solver on a smooth multiply connected domain: double layer with
// trapezoid Nystrom discretisation plus one log source per hole, densities on
// holes constrained to zero mean. Evaluation uses the Cauchy integral of the
// density, so the harmonic conjugate comes for free; its interior trace is
// evaluated with the barycentric Cauchy formula, which stays accurate up to
// the boundary.
class CurveDirichlet {
 public:
  explicit CurveDirichlet(SmoothDomain domain, CurveSolverOptions options = {});

  struct Solution {
    std::vector<std::vector<double>> density;  // solve nodes, per curve
    std::vector<double> log_coeff;             // per hole
    // interior boundary values of the Cauchy integral and of its derivative
    // on the fine nodes
    std::vector<std::vector<Complex>> trace, trace_derivative;
    double boundary_residual = 0.0;  // on half-offset nodes
  };

  Solution solve(const std::function<double(std::size_t, Complex)>& data) const;

  // Cauchy integral of the density plus the log terms; Re is the solution.
  // The log branch is only meaningful through exp or the real part.
  Complex analytic(const Solution& s, Complex z) const;
  Complex cauchy(const Solution& s, Complex z) const;
  Complex cauchy_derivative(const Solution& s, Complex z) const;
  double value(const Solution& s, Complex z) const { return analytic(s, z).real(); }
  double distance_to_boundary(Complex z) const;

  const SmoothDomain& domain() const { return domain_; }
  const std::vector<Complex>& hole_centers() const { return centers_; }

 private:
  Complex barycentric(const std::vector<std::vector<Complex>>& values, Complex z) const;
  struct Node {
    Complex point, tangent;  // d zeta / dt
    double weight;           // dt
  };
  SmoothDomain domain_;
  CurveSolverOptions options_;
  std::vector<std::vector<Node>> coarse_, fine_;
  std::vector<Complex> centers_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Conformal map of a doubly connected smooth domain onto r < |zeta| < 1.
class AnnulusMap {
 public:
  static AnnulusMap identity(double modulus);

  double modulus() const { return modulus_; }
  Complex forward(Complex z) const;
  Complex derivative(Complex z) const;
  Complex inverse(Complex zeta) const;
  bool in_domain(Complex z) const;
  double distance_to_boundary(Complex z) const;

  double construction_residual() const { return residual_; }
  // |phi| - 1 on the outer curve, |phi| - r on the inner, sampled between nodes.
  double boundary_correspondence() const;

 private:
  friend AnnulusMap to_annulus(const SmoothDomain&, CurveSolverOptions);
  AnnulusMap() = default;
  double modulus_ = 1.0;
  double residual_ = 0.0;
  Complex center_;
  std::shared_ptr<const CurveDirichlet> solver_;
  std::shared_ptr<const CurveDirichlet::Solution> solution_;
  std::vector<std::pair<Complex, Complex>> seeds_;  // (z, phi(z)) for inverse starts
};

AnnulusMap to_annulus(const SmoothDomain& domain, CurveSolverOptions options = {});

struct MapReport {
  double cauchy_riemann = 0.0;  // relative
  double min_derivative = 0.0, max_derivative = 0.0;
  double bilipschitz = 1.0;
  double boundary = 0.0;
  double angle = 0.0;           // relative defect of <d phi v1, d phi v2> = |phi'|^2 <v1, v2>
  double round_trip = 0.0;
};

MapReport verify_map(const AnnulusMap& map, const std::vector<Complex>& samples, unsigned seed = 1);

template <class F>
auto pull_back(const AnnulusMap& map, F field) {
  return [map, field](Complex z) { return field(map.forward(z)); };
}

template <class F>
auto push_forward(const AnnulusMap& map, F field) {
  return [map, field](Complex zeta) { return field(map.inverse(zeta)); };
}

// d_z (f o phi) = phi'(z) d_zeta f(phi(z)).
template <class F>
auto pull_back_derivative(const AnnulusMap& map, F d_zeta) {
  return [map, d_zeta](Complex z) { return map.derivative(z) * d_zeta(map.forward(z)); };
}

}  // namespace mcflow
