#pragma once

#include <optional>
#include <string>

#include "mcflow/laplace.hpp"
#include "mcflow/polar_ops.hpp"

namespace mcflow {

struct StationaryState {
  enum class Kind { Trivial, AnnulusRotating };
  Kind kind = Kind::Trivial;
  double c1 = 0.0, c2 = 0.0, gamma = 2.0, inner_radius = 0.5;
  double rho_hat = 1.0;  // trivial state density

  double density(Complex z) const;
  // u1 - i u2 = i c1 / z
  Eigen::Vector2d velocity(Complex z) const;
  double mass() const;
  double min_density() const;
};

StationaryState trivial_state(double rho_hat, double gamma, double inner_radius);
// Rotating family on r < |z| < 1; throws stationary.vacuum when the density
// would touch zero.
StationaryState annulus_family(double c1, double c2, double gamma, double inner_radius);
// Bisection on c2 so that the state carries the target mass.
StationaryState match_mass(double c1, double gamma, double inner_radius, double target_mass);

struct ResidualReport {
  double mass_l2 = 0.0, mass_sup = 0.0;
  double momentum_l2 = 0.0, momentum_sup = 0.0;
  double slip_sup = 0.0;   // |u.n| at the walls
  double curl_sup = 0.0;   // |curl u + K u.n_perp| at the walls
  double h = 0.0;
};

// Discrete residuals of the steady system on a polar grid with `resolution`
// radial cells.
ResidualReport residual(const StationaryState& state, const PhysParams& params, double k_outer, double k_inner,
                        int resolution);

enum class SteadyCase { A, B, C };

struct Classification {
  SteadyCase kind;
  std::string description;
};

char case_letter(SteadyCase c);

// K sampled per boundary component (any number of samples each).
Classification classify(const CircularDomain& domain, const std::vector<std::vector<double>>& friction);
Classification classify(const SmoothDomain& domain, const std::vector<std::vector<double>>& friction);

struct LevelCurve {
  std::vector<Complex> points;
  double level = 0.0;
  double min_speed = 0.0, max_speed = 0.0;
  double variation = 0.0;  // (max - min) / max of |grad w| along the curve
  bool closed = false;
  bool terminated = false;  // ran into a critical-point neighbourhood or the boundary
};

struct LevelSetReport {
  std::vector<LevelCurve> curves;
  double max_variation = 0.0;
  bool degenerate = false;  // constant field, no level curves
  std::string notice;
};

struct LevelSetOptions {
  double step = 0.01;          // the tracer advances step / 4
  double critical_radius = 0.02;
  int max_steps = 20000;
};

LevelCurve trace_level_curve(const SeriesHarmonic& w, const CircularDomain& domain, Complex start,
                             const LevelSetOptions& options = {});
LevelSetReport level_set_speed_check(const SeriesHarmonic& w, const CircularDomain& domain,
                                     const std::vector<Complex>& starts, const LevelSetOptions& options = {});

}  // namespace mcflow
