#include "mcflow/greens.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mcflow {

namespace {

constexpr double kInvTwoPi = 1.0 / kTwoPi;

KernelDerivatives from_parts(const ImageTerm<double>::Parts& p) {
  KernelDerivatives k;
  k.value = p.phi.real();
  k.grad_field = {p.phi_z.real(), -p.phi_z.imag()};
  k.hess_field << p.phi_zz.real(), -p.phi_zz.imag(), -p.phi_zz.imag(), -p.phi_zz.real();
  k.grad_source = {p.phi_w.real(), p.phi_w.imag()};
  k.mixed << p.phi_zw.real(), -p.phi_zw.imag(), p.phi_zw.imag(), p.phi_zw.real();
  return k;
}

ImageTerm<double>::Parts image_parts(const CircularDomain& d, std::size_t j, Complex z, Complex w) {
  if (j == 0) return ImageTerm<double>::outer(z, w);
  const Circle c = d.component(j);
  return ImageTerm<double>::hole(z, w, c.center, c.radius);
}

// Mean over Gamma_i of the image term of component j, and its d/d(conj w).
std::pair<double, Complex> image_circle_mean(const CircularDomain& d, std::size_t i, std::size_t j, Complex w) {
  if (i == 0) return {0.0, 0.0};
  const Complex ci = d.component(i).center;
  const Complex wb = std::conj(w);
  if (j == 0) {
    const Complex q = 1.0 - ci * wb;
    return {kInvTwoPi * std::log(std::abs(q)), -kInvTwoPi * ci / q};
  }
  if (i == j) return {0.0, 0.0};
  const Circle cj = d.component(j);
  const Complex W = wb - std::conj(cj.center);
  const Complex p = cj.center + cj.radius * cj.radius / W;
  const Complex dp = -cj.radius * cj.radius / (W * W);
  return {kInvTwoPi * (std::log(std::abs(ci - p)) - std::log(std::abs(ci - cj.center))), -kInvTwoPi * dp / (ci - p)};
}

// Exact mean of a log + Laurent series over Gamma_i.
double series_circle_mean(const SeriesHarmonic& h, const CircularDomain& d, std::size_t i) {
  if (i == 0) return h.constant;
  const Circle ci = d.component(i);
  double m = h.constant;
  Complex zp(1.0);
  for (int k = 0; k < h.modes(); ++k) {
    zp *= ci.center;
    m += (h.outer[k] * zp).real();
  }
  for (std::size_t j = 1; j < d.num_components(); ++j) {
    if (j == i) {
      m += h.log_coeff[j - 1] * std::log(ci.radius);
      continue;
    }
    const Circle cj = d.component(j);
    const Complex dd = ci.center - cj.center;
    m += h.log_coeff[j - 1] * std::log(std::abs(dd));
    const Complex u = cj.radius / dd;
    Complex up(1.0);
    for (int k = 0; k < h.modes(); ++k) {
      up *= u;
      m += (h.inner[j - 1][k] * up).real();
    }
  }
  return m;
}

}  // namespace

KernelDerivatives& KernelDerivatives::operator+=(const KernelDerivatives& o) {
  value += o.value;
  grad_field += o.grad_field;
  hess_field += o.hess_field;
  grad_source += o.grad_source;
  mixed += o.mixed;
  return *this;
}

KernelDerivatives& KernelDerivatives::operator-=(const KernelDerivatives& o) {
  value -= o.value;
  grad_field -= o.grad_field;
  hess_field -= o.hess_field;
  grad_source -= o.grad_source;
  mixed -= o.mixed;
  return *this;
}

KernelDerivatives image_derivatives(const CircularDomain& domain, std::size_t j, Complex z, Complex w) {
  return from_parts(image_parts(domain, j, z, w));
}

KernelDerivatives fundamental_derivatives(Complex z, Complex w) {
  const Complex dz = z - w;
  const double r2 = std::norm(dz);
  if (r2 == 0.0) throw Error("greens.singular_evaluation", "field and source points coincide");
  KernelDerivatives k;
  const Eigen::Vector2d d(dz.real(), dz.imag());
  k.value = 0.5 * kInvTwoPi * std::log(r2);
  k.grad_field = kInvTwoPi * d / r2;
  k.hess_field = kInvTwoPi * (Eigen::Matrix2d::Identity() * r2 - 2.0 * d * d.transpose()) / (r2 * r2);
  k.grad_source = -k.grad_field;
  k.mixed = -k.hess_field;
  return k;
}

NeumannGreen::NeumannGreen(const CircularDomain& domain, GreenOptions options)
    : solver_(domain, LaplaceOptions{options.modes}), options_(options), length_(domain.boundary_length()) {}

std::shared_ptr<const GreenSource> NeumannGreen::compute(Complex w) const {
  const CircularDomain& d = domain();
  const auto& pts = solver_.points();
  const std::size_t k = d.num_components();
  Eigen::MatrixXd rhs(pts.size(), 3);
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const auto& p = pts[n];
    double v = 1.0 / length_ - (p.component == 0 ? kInvTwoPi : 0.0);
    Complex dv(0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == p.component) continue;
      const auto parts = image_parts(d, j, p.point, w);
      v -= (parts.phi_z * p.normal).real();
      dv -= parts.phi_zw * p.normal;
    }
    rhs(n, 0) = v;
    rhs(n, 1) = dv.real();
    rhs(n, 2) = (Complex(0.0, -1.0) * dv).real();
  }
  auto sols = solver_.solve_neumann_batch(rhs);
  auto src = std::make_shared<GreenSource>();
  src->source = w;
  src->remainder = std::move(sols[0]);
  src->d_source_x = std::move(sols[1]);
  src->d_source_y = std::move(sols[2]);
  double mean = 0.0;
  Complex dmean(0.0);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double len = kTwoPi * d.component(i).radius;
    double mi = series_circle_mean(src->remainder, d, i);
    for (std::size_t j = 0; j < k; ++j) {
      const auto [m, dm] = image_circle_mean(d, i, j, w);
      mi += m;
      dmean += len * dm;
    }
    mean += len * mi;
    mx += len * series_circle_mean(src->d_source_x, d, i);
    my += len * series_circle_mean(src->d_source_y, d, i);
  }
  // boundary integral of Gamma(., w); the outer circle contributes nothing
  for (std::size_t i = 1; i < k; ++i) {
    const Circle ci = d.component(i);
    const Complex inv = 1.0 / (w - ci.center);
    mean += ci.radius * std::log(std::abs(w - ci.center));
    dmean += ci.radius * std::conj(inv);
  }
  src->constant = -mean / length_;
  src->d_constant_x = -(mx + dmean.real()) / length_;
  src->d_constant_y = -(my + dmean.imag()) / length_;
  // held-out Neumann check of d_n N = 1/l
  double res = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const int n = 8 * solver_.modes();
    for (int q = 0; q < n; ++q) {
      const auto f = d.boundary_frame(i, (q + 0.5) * kTwoPi / n);
      if (std::abs(f.point - w) < 1e-12) continue;
      const KernelDerivatives kd = fundamental_derivatives(f.point, w);
      KernelDerivatives h = H(f.point, *src);
      const double dn = (kd.grad_field + h.grad_field).dot(Eigen::Vector2d(f.normal.real(), f.normal.imag()));
      res = std::max(res, std::abs(dn - 1.0 / length_));
    }
  }
  src->neumann_residual = res;
  return src;
}

std::shared_ptr<const GreenSource> NeumannGreen::source(Complex w) const {
  if (!domain().contains(w)) throw Error("greens.source_outside", "source point must lie inside the domain");
  const auto key = std::make_pair(std::llround(w.real() / options_.quantum), std::llround(w.imag() / options_.quantum));
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
  }
  const Complex wq(key.first * options_.quantum, key.second * options_.quantum);
  auto src = compute(domain().contains(wq) ? wq : w);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second->second;
  lru_.emplace_front(key, src);
  index_[key] = lru_.begin();
  while (lru_.size() > options_.cache_capacity) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return src;
}

std::size_t NeumannGreen::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return lru_.size();
}

KernelDerivatives NeumannGreen::H(Complex z, const GreenSource& src) const {
  const CircularDomain& d = domain();
  const Complex w = src.source;
  KernelDerivatives k;
  for (std::size_t j = 0; j < d.num_components(); ++j) k += image_derivatives(d, j, z, w);
  // the images above use the requested source; the remainder is smooth in w
  const Complex g1 = src.remainder.analytic(z, 1), g2 = src.remainder.analytic(z, 2);
  k.value += src.remainder.value(z) + src.constant;
  k.grad_field += Eigen::Vector2d(g1.real(), -g1.imag());
  Eigen::Matrix2d hr;
  hr << g2.real(), -g2.imag(), -g2.imag(), -g2.real();
  k.hess_field += hr;
  k.grad_source += Eigen::Vector2d(src.d_source_x.value(z) + src.d_constant_x, src.d_source_y.value(z) + src.d_constant_y);
  k.mixed.row(0) += src.d_source_x.gradient(z).transpose();
  k.mixed.row(1) += src.d_source_y.gradient(z).transpose();
  return k;
}

KernelDerivatives NeumannGreen::H(Complex z, Complex w) const {
  auto src = source(w);
  GreenSource exact = *src;
  exact.source = w;
  return H(z, exact);
}

KernelDerivatives NeumannGreen::N(Complex z, Complex w) const {
  KernelDerivatives k = fundamental_derivatives(z, w);
  k += H(z, w);
  return k;
}

double NeumannGreen::eval_N(Complex z, Complex w) const { return N(z, w).value; }
Eigen::Vector2d NeumannGreen::eval_gradN(Complex z, Complex w) const { return N(z, w).grad_field; }
Eigen::Matrix2d NeumannGreen::eval_hessN(Complex z, Complex w) const { return N(z, w).hess_field; }

GreenSource solve_H(const NeumannGreen& green, Complex w) {
  if (!green.domain().contains(w)) throw Error("greens.source_outside", "source point must lie inside the domain");
  if (green.domain().distance_to_boundary(w) < 1e-6)
    throw Error("greens.near_boundary_source", "source within 1e-6 of the boundary; use principal_part");
  GreenSource s = *green.source(w);
  s.source = w;
  return s;
}

GreenSplit principal_part(const NeumannGreen& green, std::size_t j, Complex z, Complex w) {
  const CircularDomain& d = green.domain();
  if (d.distance_to(w, j) > 0.25 * d.gap())
    throw Error("greens.not_near_component", "source is farther than gap/4 from the component");
  const KernelDerivatives n = green.N(z, w);
  KernelDerivatives p = fundamental_derivatives(z, w);
  p += image_derivatives(d, j, z, w);
  GreenSplit s;
  s.component = j;
  s.principal = p.value;
  s.principal_grad = p.grad_field;
  s.remainder = n.value - p.value;
  s.remainder_grad = n.grad_field - p.grad_field;
  return s;
}

namespace {

Complex combo_tau(const CircularDomain& d, std::size_t j, Complex w) {
  return Complex(0.0, 1.0) * (w - d.component(j).center);
}

void require_near(const CircularDomain& d, std::size_t j, Complex w) {
  if (d.distance_to(w, j) > 0.25 * d.gap() * (1.0 + 1e-12))
    throw Error("greens.not_near_component", "point is farther than gap/4 from the component");
}

}  // namespace

FirstOrderCombo cancellation_first_order(const NeumannGreen& green, std::size_t j, Complex z, Complex w) {
  const CircularDomain& d = green.domain();
  require_near(d, j, w);
  const KernelDerivatives h = green.H(z, w);
  const Complex tau = combo_tau(d, j, w);
  const Complex dz = 0.5 * Complex(h.grad_field(0), -h.grad_field(1));
  const Complex dwbar = 0.5 * Complex(h.grad_source(0), h.grad_source(1));
  FirstOrderCombo c;
  c.combo = tau * dz + std::conj(tau) * dwbar;
  c.magnitude = std::abs(c.combo);
  c.reference_gradient = h.grad_field.norm();
  return c;
}

Complex cancellation_second_order_complex(const NeumannGreen& green, std::size_t j, Complex z, Complex w) {
  const CircularDomain& d = green.domain();
  require_near(d, j, w);
  const KernelDerivatives h = green.H(z, w);
  const Complex tau = combo_tau(d, j, w);
  const Eigen::Matrix2d& A = h.hess_field;
  const Eigen::Matrix2d& M = h.mixed;
  const Complex dzz = 0.25 * Complex(A(0, 0) - A(1, 1), -2.0 * A(0, 1));
  const Complex dwbar_dz = 0.25 * Complex(M(0, 0) + M(1, 1), M(1, 0) - M(0, 1));
  return tau * dzz + std::conj(tau) * dwbar_dz;
}

double cancellation_second_order(const NeumannGreen& green, std::size_t j, Complex x, Complex y, int p) {
  const CircularDomain& d = green.domain();
  require_near(d, j, x);
  if (p != 1 && p != 2) throw Error("greens.invalid_component", "derivative index p must be 1 or 2");
  const Complex xj = d.project(x, j);
  const Complex t = d.boundary_frame(j, std::arg(xj - d.component(j).center)).tangent;
  // the fundamental solution depends on x - y only, so its part cancels exactly
  const KernelDerivatives h = green.H(y, x);
  const Eigen::Vector2d tau(t.real(), t.imag());
  const int q = p - 1;
  return std::abs(tau(0) * (h.mixed(0, q) + h.hess_field(0, q)) + tau(1) * (h.mixed(1, q) + h.hess_field(1, q)));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LadderReport singularity_ladder(const NeumannGreen& green, std::size_t j, int levels, double angle) {
  const CircularDomain& d = green.domain();
  const Circle c = d.component(j);
  const Complex dir = std::polar(1.0, angle);
  LadderReport rep;
  rep.component = j;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> background;
  while (background.size() < 200) {
    const Complex z(u(rng), u(rng));
    if (d.contains(z)) background.push_back(z);
  }
  for (int level = 0; level < levels; ++level) {
    const double delta = 0.25 * d.gap() / std::pow(2.0, level);
    const Complex w = j == 0 ? (1.0 - delta) * dir : c.center + (c.radius + delta) * dir;
    const Complex wj = d.project(w, j);
    const double base = std::arg(wj - c.center);
    std::vector<Complex> samples = background;
    for (int s = -24; s <= 24; ++s) {
      const double t = base + s * 0.25 * delta / c.radius;
      for (double depth : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double rad = j == 0 ? 1.0 - depth * delta : c.radius + depth * delta;
        const Complex z = c.center + std::polar(rad, t);
        if (d.in_closure(z) && std::abs(z - w) > 0.05 * delta) samples.push_back(z);
      }
    }
    LadderRow row;
    row.distance = delta;
    const Complex image = j == 0 ? 1.0 / std::conj(w) : c.center + c.radius * c.radius / std::conj(w - c.center);
    row.image_distance = std::abs(image - wj);
    for (const Complex z : samples) {
      const KernelDerivatives h = green.H(z, w);
      row.sup_grad_H = std::max(row.sup_grad_H, h.grad_field.norm());
      row.sup_hess_H = std::max(row.sup_hess_H, h.hess_field.norm());
      const KernelDerivatives img = image_derivatives(d, j, z, w);
      row.sup_grad_R = std::max(row.sup_grad_R, (h.grad_field - img.grad_field).norm());
      row.sup_combo1 = std::max(row.sup_combo1, cancellation_first_order(green, j, z, w).magnitude);
      for (int p : {1, 2}) row.sup_combo2 = std::max(row.sup_combo2, cancellation_second_order(green, j, w, z, p));
    }
    rep.rows.push_back(row);
  }
  std::vector<double> dist, image_dist, gH, hH, c1, c2;
  for (const auto& r : rep.rows) {
    dist.push_back(r.distance);
    image_dist.push_back(r.image_distance);
    gH.push_back(r.sup_grad_H);
    hH.push_back(r.sup_hess_H);
    c1.push_back(r.sup_combo1);
    c2.push_back(r.sup_combo2);
    rep.grad_R_growth = std::max(rep.grad_R_growth, r.sup_grad_R / rep.rows.front().sup_grad_R);
  }
  rep.slope_grad_H = loglog_slope(dist, gH);
  rep.slope_hess_H = loglog_slope(dist, hH);
  rep.slope_hess_H_image = loglog_slope(image_dist, hH);
  rep.slope_combo1 = loglog_slope(dist, c1);
  rep.slope_combo2 = loglog_slope(dist, c2);
  return rep;
}

}  // namespace mcflow
