#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcflow/geometry.hpp"
#include "mcflow/polar_ops.hpp"

namespace mcflow {

enum class InitialPreset { Rest, SteadyFamily, PerturbedSteady, RandomSlip };

struct InitialData {
  InitialPreset preset = InitialPreset::Rest;
  double rho_hat = 1.0;
  double c1 = 1.0, c2 = 3.0;  // steady-family parameters
  double density_amplitude = 0.1;
  double velocity_amplitude = 0.1;
  unsigned seed = 1;
  int modes = 3;  // angular modes in the random slip field
};

struct SimulationConfig {
  double inner_radius = 0.5;
  int resolution = 32;  // radial cells; 4x as many angular cells
  PhysParams params;
  double k_outer = 0.0, k_inner = 0.0;
  InitialData initial;
  double final_time = 1.0;
  double cadence = 0.1;
  double safety = 0.4;
  bool muscl = true;
  bool implicit_viscosity = true;  // stabilised viscous update; false gives the fully explicit scheme
  double floor_factor = 1e-8;      // density floor relative to rho_hat
  bool allow_parameter_override = false;
  double band_constant = 4.0;      // truncation part of the energy-budget band
};

struct FluidState {
  double time = 0.0;
  Field rho, u1, u2;  // Cartesian velocity components at cell centres
};

struct DiagnosticsRow {
  double t = 0.0, dt = 0.0;
  double mass = 0.0;
  double a2 = 0.0, b2 = 0.0;
  double sup_rho = 0.0, r_t = 0.0;
  double rho_dev_l2 = 0.0, grad_u_l2 = 0.0;
  double energy = 0.0, dissipation = 0.0;
  // (E_new - E_old)/dt + mean dissipation; positive values mean energy gain
  double budget_residual = 0.0;
  // dt * W + band_constant * h^2 * (E - E_rest + D), E - E_rest the relative energy. W bounds the dissipation the
  // viscous stabiliser holds back per unit time: for a viscous mode with rate
  // lambda the withheld share is dt sigma lambda / (1 + dt sigma lambda).
  double budget_band = 0.0;
  double flux_mean = 0.0, flux_sup = 0.0;
  long floor_events = 0;
};

struct BudgetSample {
  double t = 0.0, dt = 0.0;
  double residual = 0.0;
  double withheld = 0.0;     // dt * W part of the band
  double truncation = 0.0;   // h^2 * (E - E_rest + D), before band_constant
  double dissipation = 0.0;
};

struct RunResult {
  std::vector<DiagnosticsRow> rows;
  std::vector<BudgetSample> budget;  // one per step
  FluidState final_state;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
  double max_mass_drift = 0.0;      // per step, relative
  double max_budget_excess = 0.0;   // max over steps of residual - band (<= 0 is within band)
  double max_budget_residual = -1e300;
  long floor_events = 0;
};

struct DecayFit {
  double alpha = 0.0;
  double r2 = 0.0;
  double intercept = 0.0;
};

// Least squares line through (t, log a) on t in [t0, t1].
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& a, double t0, double t1);
// Least-squares slope of v against t on [t0, t1].
double linear_trend(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1);

// Solves (I - dt sigma_i L) x = b for each polar component, L the scalar
// Laplacian minus 1/R^2, by FFT in theta and tridiagonal sweeps in R.
class ViscousStabilizer {
 public:
  explicit ViscousStabilizer(const PolarOps& ops) : ops_(&ops) {}
  // ghost_inner/outer: ghost = factor * first interior value.
  Field solve(const Field& b, double dt, const Eigen::ArrayXd& sigma, double ghost_inner, double ghost_outer) const;

 private:
  const PolarOps* ops_;
};

class PolarSimulator {
 public:
  explicit PolarSimulator(SimulationConfig config);

  const SimulationConfig& config() const { return config_; }
  const PolarOps& ops() const { return ops_; }
  const WallFriction& friction() const { return friction_; }
  double rho_hat() const { return rho_hat_; }

  FluidState initial_state() const;
  double max_stable_dt(const FluidState& s) const;

  struct StepResult {
    FluidState state;
    long floor_events = 0;
    double dissipation = 0.0;  // of the input state
    double withheld = 0.0;     // stabiliser bound, see DiagnosticsRow::budget_band
  };
  // Throws simulator.cfl_violation above max_stable_dt.
  StepResult step(const FluidState& s, double dt) const;

  double mass(const FluidState& s) const { return ops_.integrate(s.rho); }
  double energy(const FluidState& s) const;
  // energy minus its value at rest with the same mass; the budget uses it
  double relative_energy(const FluidState& s) const;
  double dissipation(const FluidState& s) const;
  double a2(const FluidState& s) const;
  double grad_u_l2(const FluidState& s) const;

  RunResult run(const std::function<void(const FluidState&, const DiagnosticsRow&)>& on_output = {}) const;

 private:
  struct Rates {
    Field rho;
    PolarVector u;
    double dissipation = 0.0;
    double withheld = 0.0;
  };
  double dissipation_from(const Field& rho, const MomentumTerms& t) const;
  Rates rates(const FluidState& s) const;
  FluidState advance(const FluidState& s, const Rates& r, double dt, const Eigen::ArrayXd& sigma, long& floors) const;

  SimulationConfig config_;
  PolarOps ops_;
  WallFriction friction_;
  ViscousStabilizer stabilizer_;
  double rho_hat_ = 1.0;
  double floor_ = 0.0;
};

// F = (2 mu + lambda) div u - (P - mean P), and the vorticity.
std::pair<Field, Field> effective_flux(const PolarOps& ops, const FluidState& s, const PhysParams& params,
                                       const WallFriction& k);

// rho u_dot from two snapshots: time difference plus upwind advection at the
// midpoint state. Polar components.
PolarVector material_derivative(const PolarOps& ops, const FluidState& prev, const FluidState& next,
                                const WallFriction& k);

// rho u_dot predicted by the momentum balance, grad F + mu grad_perp(curl u) in
// continuous form; returned as viscous - grad P.
PolarVector momentum_balance(const PolarOps& ops, const FluidState& s, const PhysParams& params,
                             const WallFriction& k);

}  // namespace mcflow

namespace mcflow {

// Explicit solver on a masked Cartesian grid for circular domains with any
// number of holes. Walls are staircased: fluid cells exchange mass only with
// fluid neighbours, and exterior neighbours carry ghost velocities reflected
// across the nearest circle. The wall closure is first order.
struct MaskedConfig {
  CircularDomain domain;
  int resolution = 48;            // cells across the bounding square [-1, 1]^2
  PhysParams params;
  std::vector<double> friction;   // K per boundary component; empty means 0
  double rho_hat = 1.0;
  double velocity_amplitude = 0.0;  // swirl added to the rest state
  double density_amplitude = 0.0;
  unsigned seed = 1;
  double final_time = 1.0;
  double cadence = 0.1;
  double safety = 0.4;
  double floor_factor = 1e-8;
  bool allow_parameter_override = false;
};

struct MaskedRow {
  double t = 0.0, mass = 0.0, energy = 0.0, kinetic = 0.0, sup_rho = 0.0, sup_u = 0.0;
};

struct MaskedRun {
  std::vector<MaskedRow> rows;
  FluidState final_state;
  long steps = 0;
  double max_mass_drift = 0.0;
  long floor_events = 0;
  bool aborted = false;
  std::string abort_reason;
};

class MaskedSimulator {
 public:
  explicit MaskedSimulator(MaskedConfig config);

  const Grid& grid() const { return grid_; }
  const MaskedConfig& config() const { return config_; }
  // Fields are (ny, nx) arrays; exterior cells hold zeros.
  FluidState initial_state() const;
  double max_stable_dt(const FluidState& s) const;
  FluidState step(const FluidState& s, double dt, long* floor_events = nullptr) const;
  double mass(const FluidState& s) const;
  double kinetic_energy(const FluidState& s) const;
  double energy(const FluidState& s) const;
  MaskedRun run(const std::function<void(const FluidState&, const MaskedRow&)>& on_output = {}) const;

 private:
  struct Ghost {
    int cell;           // exterior cell index
    int source;         // fluid cell it mirrors
    Complex normal;     // outward unit normal of the nearest circle
    double tangential;  // Robin factor for the tangential component
  };
  struct Rates {
    Field rho, u1, u2;
  };
  Rates rates(const FluidState& s) const;
  void fill_ghosts(Field& u1, Field& u2, Field& rho) const;

  MaskedConfig config_;
  Grid grid_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> fluid_;
  Field area_;  // cell area share for quadrature
  std::vector<Ghost> ghosts_;
  double floor_ = 0.0;
};

}  // namespace mcflow
