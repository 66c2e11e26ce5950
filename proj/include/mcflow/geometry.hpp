#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mcflow/core.hpp"

namespace mcflow {

struct Circle {
  Complex center;
  double radius = 1.0;
};

// Point on a boundary component with the outer normal of the fluid region
// (radially outward on the outer circle, toward the center on holes) and the
// tangent n_perp = (n2, -n1).
struct BoundaryFrame {
  Complex point;
  Complex normal;
  Complex tangent;
};

// Unit disc minus disjoint closed disks. Component 0 is the outer circle,
// components 1..k-1 are the holes.
class CircularDomain {
 public:
  CircularDomain() = default;
  explicit CircularDomain(std::vector<Circle> holes);
  // Rescales so that `outer` becomes the unit circle at the origin.
  CircularDomain(const Circle& outer, std::vector<Circle> holes);

  static CircularDomain unit_disc() { return CircularDomain(std::vector<Circle>{}); }
  static CircularDomain annulus(double inner_radius) { return CircularDomain({Circle{0.0, inner_radius}}); }

  std::size_t num_components() const { return holes_.size() + 1; }
  std::size_t num_holes() const { return holes_.size(); }
  const std::vector<Circle>& holes() const { return holes_; }
  Circle component(std::size_t j) const;

  double gap() const { return gap_; }
  double boundary_length() const;
  double area() const;

  bool contains(Complex z) const;
  bool in_closure(Complex z, double tol = 1e-12) const;
  double distance_to(Complex z, std::size_t j) const;
  double distance_to_boundary(Complex z) const;
  std::size_t nearest_component(Complex z) const;

  BoundaryFrame boundary_frame(std::size_t j, double angle) const;
  Complex project(Complex z, std::size_t j) const;

  // Common center within `tol` and exactly one hole.
  bool is_concentric_annulus(double tol = 1e-8) const;

 private:
  void check_component(std::size_t j) const;
  std::vector<Circle> holes_;
  double gap_ = 1.0;
};

double gap(const CircularDomain& domain);

// Closed curve given by uniformly spaced samples and reconstructed with a
// trigonometric interpolant, parameter t in [0, 2pi).
class SmoothCurve {
 public:
  SmoothCurve() = default;
  explicit SmoothCurve(const std::vector<Complex>& samples);
  static SmoothCurve from_function(const std::function<Complex(double)>& z, std::size_t n);
  static SmoothCurve circle(Complex center, double radius, std::size_t n = 128);

  std::size_t sample_count() const { return samples_.size(); }
  const std::vector<Complex>& samples() const { return samples_; }
  Complex point(double t) const;
  Complex derivative(double t, int order = 1) const;
  double signed_area() const;
  bool counterclockwise() const { return signed_area() > 0.0; }
  SmoothCurve reversed() const;
  SmoothCurve transformed(Complex scale, Complex shift) const;
  // Largest jump of the sampled second difference, relative to its scale.
  double second_difference_defect() const;
  // Resample at n uniformly spaced parameters (band-limited).
  std::vector<Complex> resample(std::size_t n) const;

 private:
  std::vector<Complex> samples_;
  std::vector<Complex> coeffs_;  // coefficient of e^{i m t}, m in [-n/2, n/2)
  int mode(std::size_t idx) const;
};

// Smooth multiply connected domain. The outer curve is stored counterclockwise
// and holes clockwise, so the fluid lies to the left of every curve.
class SmoothDomain {
 public:
  SmoothDomain(SmoothCurve outer, std::vector<SmoothCurve> holes);
  std::size_t num_components() const { return holes_.size() + 1; }
  const SmoothCurve& outer() const { return outer_; }
  const std::vector<SmoothCurve>& holes() const { return holes_; }
  const SmoothCurve& curve(std::size_t j) const { return j == 0 ? outer_ : holes_.at(j - 1); }
  bool contains(Complex z) const;
  BoundaryFrame boundary_frame(std::size_t j, double t) const;
  SmoothDomain transformed(Complex scale, Complex shift) const;
  static SmoothDomain from_circular(const CircularDomain& d, std::size_t samples = 128);

 private:
  SmoothCurve outer_;
  std::vector<SmoothCurve> holes_;
};

double winding_number(const SmoothCurve& c, Complex z);

enum class NodeKind : std::uint8_t { Exterior, Interior, Cut };

struct BoundaryNode {
  Complex point;
  Complex normal;
  double weight;  // arc length
};

// Either an exact polar grid of a concentric annulus (cell centres at
// (R_i, theta_j)) or a masked Cartesian grid of cell centres. Quadrature
// weights are cell areas; cut cells carry the covered fraction.
struct Grid {
  enum class Layout { Polar, Cartesian };
  Layout layout = Layout::Polar;
  double h = 0.0;

  // polar
  double inner_radius = 0.0;
  int n_radial = 0, n_angular = 0;
  double dr = 0.0, dtheta = 0.0;

  // cartesian
  int nx = 0, ny = 0;
  Complex origin;  // centre of cell (0,0)
  std::vector<NodeKind> kind;
  std::vector<int> active_index;  // cell -> node index or -1

  std::vector<Complex> nodes;
  std::vector<double> weights;
  std::vector<std::vector<BoundaryNode>> boundary;  // per component

  std::size_t size() const { return nodes.size(); }
  double radius(int i) const { return inner_radius + (i + 0.5) * dr; }
  double angle(int j) const { return (j + 0.5) * dtheta; }
  std::size_t polar_index(int i, int j) const { return static_cast<std::size_t>(i) * n_angular + j; }
};

Grid build_grid(const CircularDomain& domain, int resolution);
Grid polar_grid(double inner_radius, int n_radial, int n_angular);

}  // namespace mcflow
