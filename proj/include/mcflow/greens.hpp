#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "mcflow/laplace.hpp"

namespace mcflow {

// Closed-form reflected sources. Each is Re Phi(z, conj w) with Phi analytic
// in both slots; the outer circle uses the disc formula, holes the exterior
// circle formula. Templated so oracles can run in extended precision.
template <class S>
struct ImageTerm {
  using C = std::complex<S>;
  static constexpr S kInvTwoPi = S(1) / (S(2) * S(3.14159265358979323846264338327950288L));

  // Phi, Phi_z, Phi_zz, Phi_wbar, Phi_z_wbar for component j (0 = outer).
  struct Parts {
    C phi, phi_z, phi_zz, phi_w, phi_zw;
  };

  static Parts outer(C z, C w) {
    const C wb = std::conj(w);
    const C q = S(1) - z * wb;
    return {kInvTwoPi * std::log(q), -kInvTwoPi * wb / q, -kInvTwoPi * wb * wb / (q * q), -kInvTwoPi * z / q,
            -kInvTwoPi / (q * q)};
  }
  static Parts hole(C z, C w, C center, S radius) {
    const C Z = z - center, W = std::conj(w - center);
    const S r2 = radius * radius;
    const C D = Z * W - r2;
    return {kInvTwoPi * std::log(S(1) - r2 / (Z * W)), kInvTwoPi * (W / D - S(1) / Z),
            kInvTwoPi * (-W * W / (D * D) + S(1) / (Z * Z)), kInvTwoPi * (Z / D - S(1) / W),
            -kInvTwoPi * r2 / (D * D)};
  }
};

// Field (z) and source (w) derivatives of a real kernel K(z, w).
struct KernelDerivatives {
  double value = 0.0;
  Eigen::Vector2d grad_field = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess_field = Eigen::Matrix2d::Zero();
  Eigen::Vector2d grad_source = Eigen::Vector2d::Zero();
  Eigen::Matrix2d mixed = Eigen::Matrix2d::Zero();  // (i, j) = d_{w_i} d_{z_j}

  KernelDerivatives& operator+=(const KernelDerivatives& o);
  KernelDerivatives& operator-=(const KernelDerivatives& o);
};

KernelDerivatives image_derivatives(const CircularDomain& domain, std::size_t j, Complex z, Complex w);
KernelDerivatives fundamental_derivatives(Complex z, Complex w);

// Smooth part of H(., w) left after subtracting every image term, with its
// first derivatives in the source position. `constant` fixes the boundary
// mean of N = Gamma + H to zero, which keeps N symmetric.
struct GreenSource {
  Complex source;
  SeriesHarmonic remainder, d_source_x, d_source_y;
  double constant = 0.0, d_constant_x = 0.0, d_constant_y = 0.0;
  double neumann_residual = 0.0;
};

struct GreenOptions {
  int modes = 32;
  std::size_t cache_capacity = 4096;
  double quantum = 1e-9;
};

// Neumann Green's function N = Gamma + H with d_n N = 1/l on the boundary and
// zero boundary mean.
class NeumannGreen {
 public:
  explicit NeumannGreen(const CircularDomain& domain, GreenOptions options = {});

  const CircularDomain& domain() const { return solver_.domain(); }
  double boundary_length() const { return length_; }
  const LaplaceSolver& solver() const { return solver_; }

  std::shared_ptr<const GreenSource> source(Complex w) const;

  KernelDerivatives H(Complex z, Complex w) const;
  KernelDerivatives H(Complex z, const GreenSource& src) const;
  KernelDerivatives N(Complex z, Complex w) const;

  double eval_N(Complex z, Complex w) const;
  Eigen::Vector2d eval_gradN(Complex z, Complex w) const;
  Eigen::Matrix2d eval_hessN(Complex z, Complex w) const;

  std::size_t cache_size() const;

 private:
  std::shared_ptr<const GreenSource> compute(Complex w) const;
  LaplaceSolver solver_;
  GreenOptions options_;
  double length_;
  mutable std::mutex mutex_;
  mutable std::list<std::pair<std::pair<long long, long long>, std::shared_ptr<const GreenSource>>> lru_;
  struct KeyHash {
    std::size_t operator()(const std::pair<long long, long long>& k) const {
      return std::hash<long long>()(k.first * 1000003LL ^ k.second);
    }
  };
  mutable std::unordered_map<std::pair<long long, long long>, decltype(lru_)::iterator, KeyHash> index_;
};

// Direct corrector solve; refuses sources within 1e-6 of the boundary.
GreenSource solve_H(const NeumannGreen& green, Complex w);

struct GreenSplit {
  std::size_t component = 0;
  double principal = 0.0, remainder = 0.0;
  Eigen::Vector2d principal_grad, remainder_grad;
};

// N = N_j + R_j near component j; requires dist(w, Gamma_j) <= gap/4.
GreenSplit principal_part(const NeumannGreen& green, std::size_t j, Complex z, Complex w);

struct FirstOrderCombo {
  Complex combo;
  double magnitude = 0.0;
  double reference_gradient = 0.0;  // |grad_z H|
};

// tau d_z H + conj(tau) d_{conj w} H with tau = i w (outer) or i (w - b_j).
FirstOrderCombo cancellation_first_order(const NeumannGreen& green, std::size_t j, Complex z, Complex w);
// (tau d_z + conj(tau) d_{conj w}) d_z H, same tau.
Complex cancellation_second_order_complex(const NeumannGreen& green, std::size_t j, Complex z, Complex w);
// |sum_s tau_s (d_{x_s} + d_{y_s}) d_{y_p} N(x, y)| with tau the unit tangent at
// the projection of x on Gamma_j; p in {1, 2}.
double cancellation_second_order(const NeumannGreen& green, std::size_t j, Complex x, Complex y, int p);

struct LadderRow {
  double distance = 0.0;
  double image_distance = 0.0;  // from the projection to the reflected source
  double sup_grad_H = 0.0, sup_hess_H = 0.0, sup_grad_R = 0.0, sup_combo1 = 0.0, sup_combo2 = 0.0;
};

struct LadderReport {
  std::size_t component = 0;
  std::vector<LadderRow> rows;
  double slope_grad_H = 0.0, slope_hess_H = 0.0, slope_hess_H_image = 0.0, slope_combo1 = 0.0, slope_combo2 = 0.0;
  double grad_R_growth = 0.0;  // max sup|grad R_j| over the ladder / value at d/4
};

// Sources at distances d/4, d/8, ... (levels entries) from Gamma_j along the
// ray through `angle`; suprema over a sample set concentrated near the
// projection of the source.
LadderReport singularity_ladder(const NeumannGreen& green, std::size_t j, int levels = 5, double angle = 0.3);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mcflow
