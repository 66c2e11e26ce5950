#include "mcflow/laplace.hpp"

#include <algorithm>
#include <cmath>

namespace mcflow {

SeriesHarmonic::SeriesHarmonic(std::vector<Circle> holes, int modes)
    : outer(modes, Complex(0.0)),
      log_coeff(holes.size(), 0.0),
      inner(holes.size(), std::vector<Complex>(modes, Complex(0.0))),
      holes_(std::move(holes)),
      modes_(modes) {}

Complex SeriesHarmonic::analytic(Complex z, int order) const {
  Complex acc = order == 0 ? Complex(constant) : Complex(0.0);
  Complex zp(1.0);  // z^(m - order)
  for (int m = std::max(order, 1); m <= modes_; ++m) {
    if (m == std::max(order, 1)) zp = std::pow(z, m - order);
    double factor = 1.0;
    for (int q = 0; q < order; ++q) factor *= (m - q);
    acc += factor * outer[m - 1] * zp;
    zp *= z;
  }
  for (std::size_t j = 0; j < holes_.size(); ++j) {
    const Complex d = z - holes_[j].center;
    const double r = holes_[j].radius;
    const Complex u = r / d;
    switch (order) {
      case 0: acc += log_coeff[j] * std::log(d); break;
      case 1: acc += log_coeff[j] / d; break;
      case 2: acc += -log_coeff[j] / (d * d); break;
      default: acc += log_coeff[j] * 2.0 / (d * d * d); break;
    }
    Complex up = std::pow(u, order);  // u^(m+order) starts at m = 0
    const Complex scale = std::pow(Complex(-1.0 / r), order);
    for (int m = 1; m <= modes_; ++m) {
      up *= u;
      double factor = 1.0;
      for (int q = 0; q < order; ++q) factor *= (m + q);
      acc += inner[j][m - 1] * factor * scale * up;
    }
  }
  return acc;
}

Eigen::Vector2d SeriesHarmonic::gradient(Complex z) const {
  const Complex f = analytic(z, 1);
  return {f.real(), -f.imag()};
}

Eigen::Vector2d SeriesHarmonic::perp_gradient(Complex z) const {
  const Eigen::Vector2d g = gradient(z);
  return {-g(1), g(0)};
}

Eigen::Matrix2d SeriesHarmonic::second_derivatives(Complex z) const {
  const Complex f = analytic(z, 2);
  Eigen::Matrix2d H;
  H << f.real(), -f.imag(), -f.imag(), -f.real();
  return H;
}

bool SeriesHarmonic::is_constant(double tol) const {
  double s = 0.0;
  for (auto c : outer) s = std::max(s, std::abs(c));
  for (auto c : log_coeff) s = std::max(s, std::abs(c));
  for (const auto& v : inner)
    for (auto c : v) s = std::max(s, std::abs(c));
  return s <= tol;
}

SeriesHarmonic& SeriesHarmonic::operator+=(const SeriesHarmonic& o) {
  if (o.modes_ != modes_ || o.holes_.size() != holes_.size())
    throw Error("laplace.shape_mismatch", "series with different layouts cannot be added");
  constant += o.constant;
  for (int m = 0; m < modes_; ++m) outer[m] += o.outer[m];
  for (std::size_t j = 0; j < holes_.size(); ++j) {
    log_coeff[j] += o.log_coeff[j];
    for (int m = 0; m < modes_; ++m) inner[j][m] += o.inner[j][m];
  }
  fit_residual += o.fit_residual;
  return *this;
}

SeriesHarmonic& SeriesHarmonic::operator*=(double s) {
  constant *= s;
  for (auto& c : outer) c *= s;
  for (auto& c : log_coeff) c *= s;
  for (auto& v : inner)
    for (auto& c : v) c *= s;
  fit_residual *= std::abs(s);
  return *this;
}

Eigen::Vector2d gradient(const SeriesHarmonic& h, Complex z) { return h.gradient(z); }
Eigen::Matrix2d second_derivatives(const SeriesHarmonic& h, Complex z) { return h.second_derivatives(z); }

namespace {

// Analytic basis functions phi_c (so the column is Re phi_c) and their derivatives.
struct BasisRow {
  std::vector<Complex> value, deriv;
};

BasisRow basis_row(const CircularDomain& d, int modes, Complex z, bool with_constant) {
  BasisRow row;
  const std::size_t cols = (with_constant ? 1 : 0) + 2 * modes + d.num_holes() * (1 + 2 * modes);
  row.value.reserve(cols);
  row.deriv.reserve(cols);
  const Complex minus_i(0.0, -1.0);
  if (with_constant) {
    row.value.push_back(1.0);
    row.deriv.push_back(0.0);
  }
  Complex zp(1.0);
  for (int m = 1; m <= modes; ++m) {
    const Complex dz = double(m) * zp;
    zp *= z;
    row.value.push_back(zp);
    row.deriv.push_back(dz);
    row.value.push_back(minus_i * zp);
    row.deriv.push_back(minus_i * dz);
  }
  for (const auto& h : d.holes()) {
    const Complex dd = z - h.center;
    const Complex u = h.radius / dd;
    row.value.push_back(std::log(dd));
    row.deriv.push_back(1.0 / dd);
    Complex up(1.0);
    for (int m = 1; m <= modes; ++m) {
      up *= u;
      const Complex der = -double(m) * up * u / h.radius;
      row.value.push_back(up);
      row.deriv.push_back(der);
      row.value.push_back(minus_i * up);
      row.deriv.push_back(minus_i * der);
    }
  }
  return row;
}

std::vector<CollocationPoint> make_points(const CircularDomain& d, int per_circle, double offset) {
  std::vector<CollocationPoint> pts;
  for (std::size_t j = 0; j < d.num_components(); ++j) {
    const double r = d.component(j).radius;
    for (int k = 0; k < per_circle; ++k) {
      const auto f = d.boundary_frame(j, (k + offset) * kTwoPi / per_circle);
      pts.push_back({j, f.point, f.normal, kTwoPi * r / per_circle});
    }
  }
  return pts;
}

}  // namespace

LaplaceSolver::LaplaceSolver(const CircularDomain& domain, LaplaceOptions options)
    : domain_(domain), options_(options) {
  if (options_.modes < 1) throw Error("laplace.invalid_modes", "number of modes must be positive");
  points_ = make_points(domain_, 8 * options_.modes, 0.0);
  const int M = options_.modes;
  const Eigen::Index rows = static_cast<Eigen::Index>(points_.size());
  const Eigen::Index dir_cols = 1 + 2 * M + Eigen::Index(domain_.num_holes()) * (1 + 2 * M);
  Eigen::MatrixXd A(rows, dir_cols), B(rows, dir_cols - 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& p = points_[i];
    const BasisRow row = basis_row(domain_, M, p.point, true);
    for (Eigen::Index c = 0; c < dir_cols; ++c) {
      A(i, c) = row.value[c].real();
      if (c > 0) B(i, c - 1) = (row.deriv[c] * p.normal).real();
    }
  }
  dir_scale_ = A.colwise().norm().transpose();
  neu_scale_ = B.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < A.cols(); ++c) A.col(c) /= dir_scale_(c);
  for (Eigen::Index c = 0; c < B.cols(); ++c) B.col(c) /= neu_scale_(c);
  dir_qr_.compute(A);
  neu_qr_.compute(B);
  auto cond = [](const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
    const auto R = qr.matrixR().diagonal().cwiseAbs();
    return R.maxCoeff() / std::max(R.minCoeff(), 1e-300);
  };
  condition_ = std::max(cond(dir_qr_), cond(neu_qr_));
  if (condition_ > options_.max_condition)
    throw Error("laplace.ill_conditioned", "collocation matrix condition " + std::to_string(condition_) +
                                               " exceeds the threshold; lower the number of modes M or separate the holes");
}

SeriesHarmonic LaplaceSolver::unpack(const Eigen::VectorXd& c, bool with_constant) const {
  const int M = options_.modes;
  SeriesHarmonic h(domain_.holes(), M);
  Eigen::Index k = 0;
  if (with_constant) h.constant = c(k++);
  for (int m = 0; m < M; ++m, k += 2) h.outer[m] = Complex(c(k), -c(k + 1));
  for (std::size_t j = 0; j < domain_.num_holes(); ++j) {
    h.log_coeff[j] = c(k++);
    for (int m = 0; m < M; ++m, k += 2) h.inner[j][m] = Complex(c(k), -c(k + 1));
  }
  return h;
}

SeriesHarmonic LaplaceSolver::solve_dirichlet_values(const Eigen::VectorXd& values) const {
  Eigen::VectorXd c = dir_qr_.solve(values);
  c = c.cwiseQuotient(dir_scale_);
  return unpack(c, true);
}

SeriesHarmonic LaplaceSolver::solve_dirichlet(const std::function<double(std::size_t, Complex)>& data) const {
  Eigen::VectorXd rhs(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) rhs(i) = data(points_[i].component, points_[i].point);
  SeriesHarmonic h = solve_dirichlet_values(rhs);
  h.fit_residual = held_out_residual(h, data);
  return h;
}

SeriesHarmonic LaplaceSolver::solve_dirichlet(const std::vector<double>& constants) const {
  if (constants.size() != domain_.num_components())
    throw Error("laplace.invalid_data", "need one boundary value per component");
  return solve_dirichlet([&](std::size_t j, Complex) { return constants[j]; });
}

SeriesHarmonic LaplaceSolver::solve_neumann_values(const Eigen::VectorXd& flux) const {
  double net = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    net += flux(i) * points_[i].weight;
    scale += std::abs(flux(i)) * points_[i].weight;
  }
  if (std::abs(net) > 1e-8 * std::max(scale, 1.0))
    throw Error("laplace.incompatible_data", "Neumann data has nonzero total flux " + std::to_string(net));
  Eigen::VectorXd c = neu_qr_.solve(flux).cwiseQuotient(neu_scale_);
  return unpack(c, false);
}

std::vector<SeriesHarmonic> LaplaceSolver::solve_neumann_batch(const Eigen::MatrixXd& flux) const {
  const Eigen::MatrixXd C = neu_qr_.solve(flux);
  std::vector<SeriesHarmonic> out;
  out.reserve(flux.cols());
  for (Eigen::Index k = 0; k < C.cols(); ++k) out.push_back(unpack(C.col(k).cwiseQuotient(neu_scale_), false));
  return out;
}

SeriesHarmonic LaplaceSolver::solve_neumann(const std::function<double(std::size_t, Complex, Complex)>& data) const {
  Eigen::VectorXd rhs(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    rhs(i) = data(points_[i].component, points_[i].point, points_[i].normal);
  SeriesHarmonic h = solve_neumann_values(rhs);
  h.fit_residual = held_out_neumann_residual(h, data);
  return h;
}

double LaplaceSolver::held_out_residual(const SeriesHarmonic& h,
                                        const std::function<double(std::size_t, Complex)>& data) const {
  double r = 0.0;
  for (const auto& p : make_points(domain_, 8 * options_.modes, 0.5))
    r = std::max(r, std::abs(h.value(p.point) - data(p.component, p.point)));
  return r;
}

double LaplaceSolver::held_out_neumann_residual(
    const SeriesHarmonic& h, const std::function<double(std::size_t, Complex, Complex)>& data) const {
  double r = 0.0;
  for (const auto& p : make_points(domain_, 8 * options_.modes, 0.5)) {
    const double dn = (h.analytic(p.point, 1) * p.normal).real();
    r = std::max(r, std::abs(dn - data(p.component, p.point, p.normal)));
  }
  return r;
}

SeriesHarmonic solve_dirichlet(const CircularDomain& domain, const std::vector<double>& constants,
                               LaplaceOptions options) {
  return LaplaceSolver(domain, options).solve_dirichlet(constants);
}

SeriesHarmonic harmonic_measure(const CircularDomain& domain, std::size_t j, LaplaceOptions options) {
  if (j >= domain.num_components()) throw Error("laplace.unknown_component", "harmonic measure index out of range");
  std::vector<double> g(domain.num_components(), 0.0);
  g[j] = 1.0;
  return solve_dirichlet(domain, g, options);
}

std::vector<SeriesHarmonic> harmonic_measures(const LaplaceSolver& solver) {
  std::vector<SeriesHarmonic> out;
  for (std::size_t j = 0; j < solver.domain().num_components(); ++j) {
    std::vector<double> g(solver.domain().num_components(), 0.0);
    g[j] = 1.0;
    out.push_back(solver.solve_dirichlet(g));
  }
  return out;
}

PeriodMatrix period_matrix(const LaplaceSolver& solver, const std::vector<SeriesHarmonic>& measures) {
  const CircularDomain& d = solver.domain();
  const std::size_t n = d.num_holes();
  if (n == 0) throw Error("laplace.simply_connected", "period matrix needs k >= 2");
  PeriodMatrix pm;
  pm.a.resize(n, n);
  const int samples = 16 * solver.modes();
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t l = 1; l <= n; ++l) {
      // d_y w dx - d_x w dy along the fluid-left orientation equals -d_n w dS
      double s = 0.0;
      const double r = d.component(j).radius;
      for (int k = 0; k < samples; ++k) {
        const auto f = d.boundary_frame(j, (k + 0.5) * kTwoPi / samples);
        s -= (measures[l].analytic(f.point, 1) * f.normal).real();
      }
      pm.a(j - 1, l - 1) = s * kTwoPi * r / samples;
    }
  pm.symmetry_defect = (pm.a - pm.a.transpose()).cwiseAbs().maxCoeff();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(pm.a);
  const auto sv = svd.singularValues();
  pm.condition = sv(0) / sv(sv.size() - 1);
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw Error("laplace.singular_period_matrix", "period matrix is singular to tolerance");
  return pm;
}

PeriodMatrix period_matrix(const CircularDomain& domain, LaplaceOptions options) {
  LaplaceSolver solver(domain, options);
  return period_matrix(solver, harmonic_measures(solver));
}

}  // namespace mcflow
