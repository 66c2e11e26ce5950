#include "mcflow/divcurl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mcflow/jet.hpp"
#include "mcflow/quadrature.hpp"

namespace mcflow {

namespace {

using Jet = Jet2<double>;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

FieldJet perp_of(const Jet& psi) {
  FieldJet j;
  j.u << -psi.g(1), psi.g(0);
  j.grad << -psi.H(1, 0), -psi.H(1, 1), psi.H(0, 0), psi.H(0, 1);
  return j;
}

FieldJet gradient_of(const Jet& chi) {
  FieldJet j;
  j.u = chi.g;
  j.grad = chi.H;
  return j;
}

FieldJet& accumulate(FieldJet& a, const FieldJet& b, double s) {
  a.u += s * b.u;
  a.grad += s * b.grad;
  return a;
}

// Midpoint rule on a disc with rings of width radius / rings and near-square cells.
struct DiscRule {
  std::vector<Complex> points;
  std::vector<double> weights;
};

DiscRule disc_rule(Complex center, double radius, int rings) {
  DiscRule rule;
  const double dr = radius / rings;
  for (int i = 0; i < rings; ++i) {
    const double r = (i + 0.5) * dr;
    const int count = std::max(6, int(std::ceil(kTwoPi * (i + 0.5))));
    const double dt = kTwoPi / count;
    for (int k = 0; k < count; ++k) {
      rule.points.push_back(center + std::polar(r, (k + 0.5) * dt));
      rule.weights.push_back(r * dr * dt);
    }
  }
  return rule;
}

// grad N[f] - i grad N[g] with N the logarithmic potential over the unit disc,
// so div = f and curl = g. In polar coordinates about the target the kernel
// cancels the Jacobian:
//   grad N[f](z) = -1/(2 pi) int dphi e^{i phi} int drho f(z + rho e^{i phi}).
class ParticularField {
 public:
  ParticularField(std::function<double(Complex)> f, std::function<double(Complex)> g, int angles, int radial)
      : f_(std::move(f)), g_(std::move(g)), angles_(angles), radial_(gauss_legendre(radial, 0.0, 1.0)),
        visible_(gauss_legendre(angles / 2, -1.0, 1.0)) {}

  Complex operator()(Complex z) const {
    const double r2 = std::norm(z);
    Complex acc(0.0);
    auto ray = [&](double phi, double weight) {
      const Complex e = std::polar(1.0, phi);
      const double b = dot(z, e), disc = b * b + 1.0 - r2;
      if (disc <= 0.0) return;
      const double hi = -b + std::sqrt(disc), lo = r2 < 1.0 ? 0.0 : std::max(0.0, -b - std::sqrt(disc));
      if (hi <= lo) return;
      Complex line(0.0);
      for (Eigen::Index q = 0; q < radial_.nodes.size(); ++q) {
        const Complex w = z + (lo + (hi - lo) * radial_.nodes(q)) * e;
        line += radial_.weights(q) * Complex(f_(w), -g_(w));
      }
      acc += weight * (hi - lo) * line * e;
    };
    if (r2 < 1.0 - 1e-9) {
      for (int k = 0; k < angles_; ++k) ray((k + 0.5) * kTwoPi / angles_, kTwoPi / angles_);
    } else {
      // directions that meet the disc
      const double centre = std::arg(-z), half = std::asin(std::min(1.0, 1.0 / std::sqrt(r2)));
      for (Eigen::Index k = 0; k < visible_.nodes.size(); ++k)
        ray(centre + half * visible_.nodes(k), half * visible_.weights(k));
    }
    return -acc / kTwoPi;
  }

 private:
  std::function<double(Complex)> f_, g_;
  int angles_;
  GaussRule radial_, visible_;
};

// G(z) = sum_m a_m z^m + sum_j sum_m c_jm ((z - b_j) / r_j)^(-m); the field is conj(G).
class AnalyticBasis {
 public:
  AnalyticBasis(const CircularDomain& d, int modes) : domain_(d), modes_(modes) {}
  std::size_t complex_size() const { return std::size_t(modes_ + 1) + domain_.num_holes() * modes_; }
  std::size_t size() const { return 2 * complex_size(); }

  std::vector<Complex> values(Complex z) const {
    std::vector<Complex> v;
    v.reserve(complex_size());
    Complex p(1.0);
    for (int m = 0; m <= modes_; ++m, p *= z) v.push_back(p);
    for (const auto& h : domain_.holes()) {
      const Complex w = h.radius / (z - h.center);
      Complex q = w;
      for (int m = 1; m <= modes_; ++m, q *= w) v.push_back(q);
    }
    return v;
  }

  Complex field(const Eigen::VectorXd& c, Complex z) const {
    const auto v = values(z);
    Complex G(0.0);
    for (std::size_t i = 0; i < v.size(); ++i) G += Complex(c(2 * i), c(2 * i + 1)) * v[i];
    return std::conj(G);
  }

 private:
  CircularDomain domain_;
  int modes_;
};

double arc_length_fraction(double begin, double end) {
  double span = std::fmod(end - begin, kTwoPi);
  if (span <= 0.0) span += kTwoPi;
  return span;
}

bool arcs_overlap(const IntervalConstraint& a, const IntervalConstraint& b) {
  auto inside = [](double t, double begin, double span) {
    double d = std::fmod(t - begin, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    return d < span;
  };
  const double sa = arc_length_fraction(a.angle_begin, a.angle_end);
  const double sb = arc_length_fraction(b.angle_begin, b.angle_end);
  return inside(b.angle_begin, a.angle_begin, sa) || inside(a.angle_begin, b.angle_begin, sb);
}

constexpr int kArcSamples = 256;

template <class Fn>
void for_arc(const CircularDomain& d, const IntervalConstraint& c, Fn&& fn) {
  const double span = arc_length_fraction(c.angle_begin, c.angle_end);
  const double r = d.component(c.component).radius;
  for (int k = 0; k < kArcSamples; ++k) {
    const double t = c.angle_begin + (k + 0.5) * span / kArcSamples;
    const BoundaryFrame f = d.boundary_frame(c.component, t);
    fn(f.point, Complex(f.normal.imag(), -f.normal.real()), r * span / kArcSamples);
  }
}

double lp_norm(double integral, double p) { return std::pow(std::max(integral, 0.0), 1.0 / p); }

}  // namespace

std::vector<std::vector<Complex>> VectorField::boundary_trace() const {
  std::vector<std::vector<Complex>> out;
  for (const auto& comp : grid.boundary) {
    out.emplace_back();
    for (const auto& node : comp) out.back().push_back(eval(node.point));
  }
  return out;
}

double VectorField::max_normal_trace() const {
  double m = 0.0;
  for (const auto& comp : grid.boundary)
    for (const auto& node : comp) m = std::max(m, std::abs(dot(eval(node.point), node.normal)));
  return m;
}

void VectorField::check_slip() const {
  if (slip && max_normal_trace() > slip_tolerance)
    throw Error("divcurl.slip_violation", "normal trace exceeds the declared slip tolerance");
}

VectorField make_field(const Grid& grid, std::function<Complex(Complex)> eval, JetFunction jet) {
  VectorField v;
  v.grid = grid;
  v.eval = std::move(eval);
  v.jet = std::move(jet);
  v.u1.resize(grid.size());
  v.u2.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Complex u = v.eval(grid.nodes[i]);
    v.u1(i) = u.real();
    v.u2(i) = u.imag();
  });
  return v;
}

DivCurlResidual discrete_div_curl(const VectorField& field) {
  const double s = 0.5 * field.grid.h;
  DivCurlResidual r;
  const Grid& g = field.grid;
  std::vector<bool> skip(g.size(), false);
  // cut cells would difference across the wall
  for (std::size_t cell = 0; cell < g.kind.size(); ++cell)
    if (g.kind[cell] == NodeKind::Cut) skip[std::size_t(g.active_index[cell])] = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (skip[i]) continue;
    const Complex z = g.nodes[i];
    const Complex ex = (field.eval(z + s) - field.eval(z - s)) / (2.0 * s);
    const Complex ey = (field.eval(z + Complex(0.0, s)) - field.eval(z - Complex(0.0, s))) / (2.0 * s);
    r.max_div = std::max(r.max_div, std::abs(ex.real() + ey.imag()));
    r.max_curl = std::max(r.max_curl, std::abs(ey.real() - ex.imag()));
  }
  return r;
}

Eigen::MatrixXd gram_matrix(const std::vector<VectorField>& fields) {
  const std::size_t n = fields.size();
  Eigen::MatrixXd g(n, n);
  if (n == 0) return g;
  const Eigen::Map<const Eigen::VectorXd> w(fields[0].grid.weights.data(), Eigen::Index(fields[0].grid.size()));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      g(a, b) = (w.array() * (fields[a].u1.array() * fields[b].u1.array() +
                              fields[a].u2.array() * fields[b].u2.array())).sum();
  return g;
}

double circulation(const std::function<Complex(Complex)>& u, const CircularDomain& domain, std::size_t j,
                   int samples) {
  const double r = domain.component(j).radius;
  double s = 0.0;
  for (int k = 0; k < samples; ++k) {
    const BoundaryFrame f = domain.boundary_frame(j, (k + 0.5) * kTwoPi / samples);
    s += dot(u(f.point), Complex(f.normal.imag(), -f.normal.real()));
  }
  return s * kTwoPi * r / samples;
}

JetFunction perp_gradient_jet(const SeriesHarmonic& h) {
  return [h](Complex z) {
    const Eigen::Vector2d g = h.gradient(z);
    const Eigen::Matrix2d H = h.second_derivatives(z);
    FieldJet j;
    j.u << -g(1), g(0);
    j.grad << -H(1, 0), -H(1, 1), H(0, 0), H(0, 1);
    return j;
  };
}

std::vector<VectorField> cr_nullspace(const CircularDomain& domain, int resolution, LaplaceOptions options) {
  std::vector<VectorField> out;
  if (domain.num_holes() == 0) return out;
  const LaplaceSolver solver(domain, options);
  const Grid grid = build_grid(domain, resolution);
  for (std::size_t l = 1; l < domain.num_components(); ++l) {
    std::vector<double> g(domain.num_components(), 0.0);
    g[l] = 1.0;
    const SeriesHarmonic w = solver.solve_dirichlet(g);
    VectorField v = make_field(
        grid, [w](Complex z) { const Eigen::Vector2d p = w.perp_gradient(z); return Complex(p(0), p(1)); },
        perp_gradient_jet(w));
    v.slip = true;
    v.slip_tolerance = 1e-6;
    out.push_back(std::move(v));
  }
  return out;
}

DivCurlSolution solve_divcurl(const CircularDomain& domain, const std::function<double(Complex)>& f,
                              const std::function<double(Complex)>& g, const DivCurlConstraints& constraints,
                              DivCurlOptions options) {
  const std::size_t k = domain.num_components();
  const long required = 2 * long(k) - 3;
  const long given = long(constraints.size());
  if (given > 0 && given < required)
    throw Error("divcurl.underdetermined", "expected " + std::to_string(required) + " constraints, got " +
                                               std::to_string(given));
  if (given > 0 && given > required)
    throw Error("divcurl.overdetermined", "expected " + std::to_string(std::max(required, 0L)) +
                                              " constraints, got " + std::to_string(given));
  for (const auto& p : constraints.points)
    if (!domain.in_closure(p.point, 1e-12)) throw Error("divcurl.invalid_constraint", "constraint point outside the domain");
  for (std::size_t a = 0; a < constraints.intervals.size(); ++a) {
    const auto& c = constraints.intervals[a];
    if (c.component >= k) throw Error("divcurl.invalid_constraint", "interval on an unknown component");
    for (std::size_t b = a + 1; b < constraints.intervals.size(); ++b)
      if (constraints.intervals[b].component == c.component && arcs_overlap(c, constraints.intervals[b]))
        throw Error("divcurl.invalid_constraint", "constraint intervals overlap");
  }
  if (options.quadrature <= 0) options.quadrature = options.resolution;

  DivCurlSolution sol;
  {
    const double rings = options.quadrature;
    const DiscRule disc = disc_rule(0.0, 1.0, int(rings));
    double total = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < disc.points.size(); ++q) {
      const double v = f(disc.points[q]);
      total += disc.weights[q] * v;
      scale += disc.weights[q] * std::abs(v);
    }
    for (const auto& h : domain.holes()) {
      const DiscRule hr = disc_rule(h.center, h.radius, std::max(4, int(std::ceil(rings * h.radius))));
      for (std::size_t q = 0; q < hr.points.size(); ++q) total -= hr.weights[q] * f(hr.points[q]);
    }
    sol.compatibility = total;
    if (std::abs(total) > options.compatibility_tolerance * scale + 1e-12)
      throw Error("divcurl.incompatible", "the integral of f over the domain does not vanish");
  }

  const auto particular = std::make_shared<ParticularField>(f, g, options.angles, options.radial);
  const AnalyticBasis basis(domain, options.modes);
  const std::size_t per_circle = 8 * std::size_t(options.modes);

  struct Row {
    std::vector<double> coeff;
    double rhs;
  };
  auto normal_row = [&](Complex z, Complex dir, double weight) {
    // weight * (conj(G) . dir) = weight * Re(G dir)
    const auto v = basis.values(z);
    Row r{std::vector<double>(basis.size()), 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Complex p = v[i] * dir;
      r.coeff[2 * i] = weight * p.real();
      r.coeff[2 * i + 1] = -weight * p.imag();
    }
    return r;
  };

  std::vector<Row> rows;
  std::vector<Complex> targets;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t q = 0; q < per_circle; ++q) {
      const BoundaryFrame fr = domain.boundary_frame(j, (q + 0.25) * kTwoPi / per_circle);
      rows.push_back(normal_row(fr.point, fr.normal, 1.0));
      targets.push_back(fr.point);
    }
  const double w = options.constraint_weight;
  for (const auto& p : constraints.points) {
    rows.push_back(normal_row(p.point, 1.0, w));
    targets.push_back(p.point);
    rows.push_back(normal_row(p.point, Complex(0.0, 1.0), w));
    targets.push_back(p.point);
  }
  for (const auto& c : constraints.intervals) {
    Row r{std::vector<double>(basis.size(), 0.0), 0.0};
    for_arc(domain, c, [&](Complex z, Complex tangent, double ds) {
      const Row s = normal_row(z, tangent, w * ds);
      for (std::size_t i = 0; i < r.coeff.size(); ++i) r.coeff[i] += s.coeff[i];
    });
    rows.push_back(std::move(r));
    targets.push_back(std::numeric_limits<double>::quiet_NaN());
  }

  // particular field at every collocation target; arcs need their own samples
  std::vector<Complex> up(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    if (!std::isnan(targets[i].real())) up[i] = (*particular)(targets[i]);
  });
  std::size_t row = 0;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t q = 0; q < per_circle; ++q, ++row) {
      const BoundaryFrame fr = domain.boundary_frame(j, (q + 0.25) * kTwoPi / per_circle);
      rows[row].rhs = -dot(up[row], fr.normal);
    }
  for (const auto& p : constraints.points) {
    rows[row].rhs = w * (p.value.real() - up[row].real());
    ++row;
    rows[row].rhs = w * (p.value.imag() - up[row].imag());
    ++row;
  }
  auto arc_integral = [&](const IntervalConstraint& c, const std::function<Complex(Complex)>& u) {
    double s = 0.0;
    for_arc(domain, c, [&](Complex z, Complex tangent, double ds) { s += ds * dot(u(z), tangent); });
    return s;
  };
  for (const auto& c : constraints.intervals) {
    rows[row].rhs = w * (c.value - arc_integral(c, [&](Complex z) { return (*particular)(z); }));
    ++row;
  }

  Eigen::MatrixXd A(rows.size(), basis.size());
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(Eigen::Index(i)) = Eigen::Map<const Eigen::RowVectorXd>(rows[i].coeff.data(), Eigen::Index(basis.size()));
    b(Eigen::Index(i)) = rows[i].rhs;
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < scale.size(); ++i)
    if (scale(i) == 0.0) scale(i) = 1.0;
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(As);
  const Eigen::VectorXd coeff = (cod.solve(b).array() / scale.array()).matrix();

  auto eval = [particular, basis, coeff](Complex z) { return (*particular)(z) + basis.field(coeff, z); };
  sol.field = make_field(build_grid(domain, options.resolution), eval);
  sol.modulo_nullspace = k >= 2 && constraints.size() == 0;

  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t q = 0; q < per_circle; ++q) {
      const BoundaryFrame fr = domain.boundary_frame(j, (q + 0.75) * kTwoPi / per_circle);
      sol.boundary_residual = std::max(sol.boundary_residual, std::abs(dot(eval(fr.point), fr.normal)));
    }
  for (const auto& p : constraints.points)
    sol.constraint_residual = std::max(sol.constraint_residual, std::abs(eval(p.point) - p.value));
  for (const auto& c : constraints.intervals)
    sol.constraint_residual = std::max(sol.constraint_residual, std::abs(arc_integral(c, eval) - c.value));
  sol.field.slip = true;
  sol.field.slip_tolerance = 10.0 * sol.boundary_residual + 1e-12;
  return sol;
}

std::vector<Complex> default_anchor_points(const CircularDomain& domain) {
  std::vector<Complex> out;
  const long count = 2 * long(domain.num_components()) - 3;
  const std::size_t holes = domain.num_holes();
  for (long i = 0; i < count; ++i) {
    const Circle& h = domain.holes()[std::size_t(i) % holes];
    const double angle = 0.5 + kTwoPi * double(i) / double(count);
    out.push_back(h.center + std::polar(h.radius + 0.5 * domain.gap(), angle));
  }
  return out;
}

DivCurlTerms divcurl_terms(const Grid& grid, const JetFunction& u, double p,
                           const std::vector<Complex>& anchors, double friction) {
  DivCurlTerms t;
  double grad = 0.0, div = 0.0, curl = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FieldJet j = u(grid.nodes[i]);
    const double w = grid.weights[i];
    grad += w * std::pow(j.grad.norm(), p);
    div += w * std::pow(std::abs(j.div()), p);
    curl += w * std::pow(std::abs(j.curl()), p);
    mass += w * j.u.squaredNorm();
  }
  t.grad = lp_norm(grad, p);
  t.div = lp_norm(div, p);
  t.curl = lp_norm(curl, p);
  t.density = std::sqrt(mass);
  for (const Complex z : anchors) t.points += u(z).u.norm();
  for (const auto& comp : grid.boundary)
    for (const auto& node : comp) t.friction += friction * node.weight * u(node.point).u.squaredNorm();
  return t;
}

namespace {
double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}
}  // namespace

double point_ratio(const DivCurlTerms& t) { return safe_ratio(t.grad, t.div + t.curl + t.points); }
double friction_ratio(const DivCurlTerms& t) {
  return safe_ratio(t.grad * t.grad, t.div * t.div + t.curl * t.curl + t.friction);
}
double density_ratio(const DivCurlTerms& t) { return safe_ratio(t.grad, t.div + t.curl + t.density); }
double witness_ratio(const DivCurlTerms& t) { return safe_ratio(t.grad, t.div + t.curl); }

RandomSlipFamily::RandomSlipFamily(const CircularDomain& domain, int degree, LaplaceOptions options)
    : domain_(domain), degree_(degree), monomials_(std::size_t((degree + 1) * (degree + 2) / 2)) {
  if (degree < 0) throw Error("divcurl.invalid_degree", "polynomial degree must be non-negative");
  if (domain.num_holes() > 0) {
    const LaplaceSolver solver(domain, options);
    for (std::size_t l = 1; l < domain.num_components(); ++l) {
      std::vector<double> g(domain.num_components(), 0.0);
      g[l] = 1.0;
      measures_.push_back(solver.solve_dirichlet(g));
    }
  }
  // unit root-mean-square gradient on a coarse grid
  const Grid coarse = build_grid(domain, std::max(16, int(std::ceil(8.0 / domain.gap())) + 1));
  for (std::size_t b = 0; b < size(); ++b) {
    double s = 0.0, area = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      s += coarse.weights[i] * raw_basis(b, coarse.nodes[i]).grad.squaredNorm();
      area += coarse.weights[i];
    }
    scale_.push_back(s > 0.0 ? std::sqrt(area / s) : 1.0);
  }
}

FieldJet RandomSlipFamily::basis(std::size_t index, Complex z) const {
  FieldJet j = raw_basis(index, z);
  if (!scale_.empty()) accumulate(j, j, scale_[index] - 1.0);
  return j;
}

FieldJet RandomSlipFamily::raw_basis(std::size_t index, Complex z) const {
  if (index >= 2 * monomials_) return perp_gradient_jet(measures_.at(index - 2 * monomials_))(z);
  const Jet x = Jet::variable(z.real(), 0), y = Jet::variable(z.imag(), 1);
  Jet b = 1.0 - x * x - y * y;
  for (const auto& h : domain_.holes()) {
    const Jet dx = x - h.center.real(), dy = y - h.center.imag();
    b = b * (dx * dx + dy * dy - h.radius * h.radius);
  }
  std::size_t m = index % monomials_;
  int total = 0;
  while (m > std::size_t(total)) m -= std::size_t(++total);
  const int py = int(m), px = total - py;
  Jet mono(1.0);
  for (int a = 0; a < px; ++a) mono = mono * x;
  for (int a = 0; a < py; ++a) mono = mono * y;
  return index < monomials_ ? perp_of(b * mono) : gradient_of(b * b * mono);
}

std::vector<std::vector<FieldJet>> RandomSlipFamily::basis_at(const std::vector<Complex>& points) const {
  std::vector<std::vector<FieldJet>> out(size(), std::vector<FieldJet>(points.size()));
  parallel_for(points.size(), [&](std::size_t i) {
    for (std::size_t b = 0; b < size(); ++b) out[b][i] = basis(b, points[i]);
  });
  return out;
}

JetFunction RandomSlipFamily::field(const Eigen::VectorXd& coefficients) const {
  if (std::size_t(coefficients.size()) != size())
    throw Error("divcurl.invalid_coefficients", "coefficient count does not match the family");
  return [this, coefficients](Complex z) {
    FieldJet j;
    for (std::size_t b = 0; b < size(); ++b)
      if (coefficients(Eigen::Index(b)) != 0.0) accumulate(j, basis(b, z), coefficients(Eigen::Index(b)));
    return j;
  };
}

Eigen::VectorXd RandomSlipFamily::draw(std::uint64_t seed) const {
  std::mt19937_64 rng(splitmix(seed));
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(static_cast<Eigen::Index>(size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
  return c;
}

namespace {

// Terms for a linear combination of precomputed basis jets.
struct BasisCache {
  std::vector<std::vector<FieldJet>> nodes, anchors, boundary;
  std::vector<double> weights, boundary_weights;

  DivCurlTerms terms(const Eigen::VectorXd& c, double p, double friction) const {
    auto combine = [&](const std::vector<std::vector<FieldJet>>& set, std::size_t i) {
      FieldJet j;
      for (std::size_t b = 0; b < set.size(); ++b) accumulate(j, set[b][i], c(Eigen::Index(b)));
      return j;
    };
    DivCurlTerms t;
    double grad = 0.0, div = 0.0, curl = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const FieldJet j = combine(nodes, i);
      grad += weights[i] * std::pow(j.grad.norm(), p);
      div += weights[i] * std::pow(std::abs(j.div()), p);
      curl += weights[i] * std::pow(std::abs(j.curl()), p);
      mass += weights[i] * j.u.squaredNorm();
    }
    t.grad = lp_norm(grad, p);
    t.div = lp_norm(div, p);
    t.curl = lp_norm(curl, p);
    t.density = std::sqrt(mass);
    if (!anchors.empty())
      for (std::size_t i = 0; i < anchors[0].size(); ++i) t.points += combine(anchors, i).u.norm();
    for (std::size_t i = 0; i < boundary_weights.size(); ++i)
      t.friction += friction * boundary_weights[i] * combine(boundary, i).u.squaredNorm();
    return t;
  }
};

}  // namespace

EnsembleReport inequality_ensemble(const CircularDomain& domain, double p, int count, EnsembleOptions options) {
  if (count < 2) throw Error("divcurl.invalid_ensemble", "ensemble needs at least two members");
  if (!(p >= 1.0)) throw Error("divcurl.invalid_exponent", "p must be at least 1");
  if (domain.num_holes() == 0) throw Error("divcurl.simply_connected", "the ensemble needs k >= 2");
  const Grid grid = build_grid(domain, options.resolution);
  const RandomSlipFamily family(domain, options.degree);
  const std::vector<Complex> anchors = options.anchors.empty() ? default_anchor_points(domain) : options.anchors;

  BasisCache cache;
  cache.nodes = family.basis_at(grid.nodes);
  cache.anchors = family.basis_at(anchors);
  std::vector<Complex> bpoints;
  for (const auto& comp : grid.boundary)
    for (const auto& node : comp) bpoints.push_back(node.point), cache.boundary_weights.push_back(node.weight);
  cache.boundary = family.basis_at(bpoints);
  cache.weights = grid.weights;

  EnsembleReport rep;
  rep.p = p;
  rep.ratios.resize(std::size_t(count));
  rep.friction_ratios.resize(std::size_t(count));
  rep.density_ratios.resize(std::size_t(count));
  parallel_for(std::size_t(count), [&](std::size_t i) {
    const DivCurlTerms t = cache.terms(family.draw(options.seed + i), p, options.friction);
    rep.ratios[i] = point_ratio(t);
    rep.friction_ratios[i] = friction_ratio(t);
    rep.density_ratios[i] = density_ratio(t);
  });
  const auto half = rep.ratios.begin() + count / 2;
  rep.first_half_max = *std::max_element(rep.ratios.begin(), half);
  rep.second_half_max = *std::max_element(half, rep.ratios.end());
  rep.max_ratio = std::max(rep.first_half_max, rep.second_half_max);
  rep.stability = rep.second_half_max / rep.max_ratio;
  rep.friction_max = *std::max_element(rep.friction_ratios.begin(), rep.friction_ratios.end());
  rep.density_max = *std::max_element(rep.density_ratios.begin(), rep.density_ratios.end());

  // null-space field plus shrinking noise without its point terms
  Eigen::VectorXd null = Eigen::VectorXd::Zero(Eigen::Index(family.size()));
  null(Eigen::Index(family.size() - family.measures().size())) = 1.0;
  Eigen::VectorXd noise = family.draw(options.seed + std::uint64_t(count));
  noise.tail(Eigen::Index(family.measures().size())).setZero();
  noise *= cache.terms(null, p, options.friction).grad / cache.terms(noise, p, options.friction).grad;
  for (double eps = 1e-1; eps > 1e-6; eps *= 0.1) {
    const DivCurlTerms t = cache.terms(null + eps * noise, p, options.friction);
    rep.witness.push_back({eps, witness_ratio(t)});
  }
  rep.witness_ratio = rep.witness.back().ratio;
  return rep;
}

WeightedCheck weighted_divcurl_check(const CircularDomain& domain, const JetFunction& u, double nu,
                                     const std::function<double(Complex)>& rho, int resolution) {
  if (!(nu > 0.0 && nu <= 0.2)) throw Error("divcurl.invalid_weight", "nu must lie in (0, 0.2]");
  const Grid grid = build_grid(domain, resolution);
  WeightedCheck c;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = rho(grid.nodes[i]);
    if (!(r >= 0.0)) throw Error("divcurl.invalid_density", "density must be non-negative");
    const FieldJet j = u(grid.nodes[i]);
    const double w = grid.weights[i];
    const double a = std::pow(j.u.norm(), nu);
    c.lhs += w * a * j.grad.squaredNorm();
    c.div_curl += w * a * (j.div() * j.div() + j.curl() * j.curl());
    c.density += w * r * a * j.u.squaredNorm();
    c.mass += w * r;
  }
  if (!(c.mass > 0.0)) throw Error("divcurl.invalid_density", "density has no mass");
  c.ratio = safe_ratio(c.lhs, c.div_curl + c.density);
  return c;
}

}  // namespace mcflow
