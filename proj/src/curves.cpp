#include <algorithm>
#include <cmath>

#include "mcflow/geometry.hpp"

namespace mcflow {

SmoothCurve::SmoothCurve(const std::vector<Complex>& samples) : samples_(samples) {
  const std::size_t n = samples_.size();
  if (n < 64) throw Error("geometry.invalid_curve", "smooth curves need at least 64 samples");
  coeffs_.assign(n, Complex(0.0));
  for (std::size_t idx = 0; idx < n; ++idx) {
    const int m = mode(idx);
    Complex acc(0.0);
    for (std::size_t k = 0; k < n; ++k) acc += samples_[k] * std::polar(1.0, -kTwoPi * m * double(k) / double(n));
    coeffs_[idx] = acc / double(n);
  }
}

int SmoothCurve::mode(std::size_t idx) const {
  const int n = static_cast<int>(samples_.size());
  const int i = static_cast<int>(idx);
  return i < (n + 1) / 2 ? i : i - n;
}

SmoothCurve SmoothCurve::from_function(const std::function<Complex(double)>& z, std::size_t n) {
  std::vector<Complex> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = z(kTwoPi * double(k) / double(n));
  return SmoothCurve(s);
}

SmoothCurve SmoothCurve::circle(Complex center, double radius, std::size_t n) {
  return from_function([=](double t) { return center + std::polar(radius, t); }, n);
}

Complex SmoothCurve::point(double t) const { return derivative(t, 0); }

Complex SmoothCurve::derivative(double t, int order) const {
  const std::size_t n = samples_.size();
  const bool even = n % 2 == 0;
  Complex acc(0.0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const int m = mode(idx);
    Complex factor = std::pow(Complex(0.0, double(m)), order);
    if (order == 0) factor = 1.0;
    if (even && m == -int(n / 2)) {
      // split the Nyquist mode evenly so the interpolant stays real-symmetric
      const Complex fp = order == 0 ? Complex(1.0) : std::pow(Complex(0.0, -double(m)), order);
      acc += 0.5 * coeffs_[idx] * (factor * std::polar(1.0, m * t) + fp * std::polar(1.0, -m * t));
    } else {
      acc += coeffs_[idx] * factor * std::polar(1.0, m * t);
    }
  }
  return acc;
}

double SmoothCurve::signed_area() const {
  double a = 0.0;
  const std::size_t n = samples_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Complex p = samples_[k], q = samples_[(k + 1) % n];
    a += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * a;
}

SmoothCurve SmoothCurve::reversed() const {
  std::vector<Complex> s(samples_.size());
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) s[k] = samples_[(n - k) % n];
  return SmoothCurve(s);
}

SmoothCurve SmoothCurve::transformed(Complex scale, Complex shift) const {
  std::vector<Complex> s(samples_);
  for (auto& z : s) z = scale * z + shift;
  return SmoothCurve(s);
}

double SmoothCurve::second_difference_defect() const {
  const std::size_t n = samples_.size();
  std::vector<Complex> d2(n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    d2[k] = samples_[(k + 1) % n] - 2.0 * samples_[k] + samples_[(k + n - 1) % n];
    scale = std::max(scale, std::abs(d2[k]));
  }
  double jump = 0.0;
  for (std::size_t k = 0; k < n; ++k) jump = std::max(jump, std::abs(d2[(k + 1) % n] - d2[k]));
  return scale > 0.0 ? jump / scale : 0.0;
}

std::vector<Complex> SmoothCurve::resample(std::size_t n) const {
  std::vector<Complex> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = point(kTwoPi * double(k) / double(n));
  return s;
}

double winding_number(const SmoothCurve& c, Complex z) {
  const auto& s = c.samples();
  double total = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) total += std::arg((s[(k + 1) % s.size()] - z) / (s[k] - z));
  return total / kTwoPi;
}

namespace {

bool segments_cross(Complex a, Complex b, Complex c, Complex d) {
  auto orient = [](Complex p, Complex q, Complex r) {
    return (q.real() - p.real()) * (r.imag() - p.imag()) - (q.imag() - p.imag()) * (r.real() - p.real());
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0.0 && o3 * o4 < 0.0;
}

bool polylines_cross(const std::vector<Complex>& p, const std::vector<Complex>& q, bool same) {
  const std::size_t n = p.size(), m = q.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = same ? i + 2 : 0; j < m; ++j) {
      if (same && i == 0 && j == n - 1) continue;
      if (segments_cross(p[i], p[(i + 1) % n], q[j], q[(j + 1) % m])) return true;
    }
  return false;
}

void validate_curve(const SmoothCurve& c) {
  if (c.second_difference_defect() > 0.5)
    throw Error("geometry.invalid_curve", "curve samples are not smooth enough for a C2 interpolant");
  if (polylines_cross(c.samples(), c.samples(), true)) throw Error("geometry.invalid_curve", "curve is not simple");
}

}  // namespace

SmoothDomain::SmoothDomain(SmoothCurve outer, std::vector<SmoothCurve> holes)
    : outer_(outer.counterclockwise() ? std::move(outer) : outer.reversed()) {
  validate_curve(outer_);
  for (auto& h : holes) {
    validate_curve(h);
    holes_.push_back(h.counterclockwise() ? h.reversed() : std::move(h));
  }
  for (std::size_t i = 0; i < holes_.size(); ++i) {
    for (const auto& z : holes_[i].samples())
      if (std::abs(winding_number(outer_, z)) < 0.5) throw Error("geometry.invalid_domain", "hole leaves the outer curve");
    if (polylines_cross(holes_[i].samples(), outer_.samples(), false))
      throw Error("geometry.invalid_domain", "hole intersects the outer curve");
    for (std::size_t j = i + 1; j < holes_.size(); ++j) {
      if (polylines_cross(holes_[i].samples(), holes_[j].samples(), false) ||
          std::abs(winding_number(holes_[j], holes_[i].samples()[0])) > 0.5 ||
          std::abs(winding_number(holes_[i], holes_[j].samples()[0])) > 0.5)
        throw Error("geometry.invalid_domain", "holes are not disjoint");
    }
  }
}

bool SmoothDomain::contains(Complex z) const {
  if (std::abs(winding_number(outer_, z)) < 0.5) return false;
  for (const auto& h : holes_)
    if (std::abs(winding_number(h, z)) > 0.5) return false;
  return true;
}

BoundaryFrame SmoothDomain::boundary_frame(std::size_t j, double t) const {
  if (j > holes_.size()) throw Error("geometry.unknown_component", "component index out of range");
  const SmoothCurve& c = curve(j);
  const Complex d = c.derivative(t, 1);
  const Complex tangent_left = d / std::abs(d);  // fluid on the left
  const Complex n = Complex(0.0, -1.0) * tangent_left;
  return {c.point(t), n, Complex(0.0, -1.0) * n};
}

SmoothDomain SmoothDomain::transformed(Complex scale, Complex shift) const {
  std::vector<SmoothCurve> hs;
  for (const auto& h : holes_) hs.push_back(h.transformed(scale, shift));
  return SmoothDomain(outer_.transformed(scale, shift), std::move(hs));
}

SmoothDomain SmoothDomain::from_circular(const CircularDomain& d, std::size_t samples) {
  std::vector<SmoothCurve> hs;
  for (const auto& h : d.holes()) hs.push_back(SmoothCurve::circle(h.center, h.radius, samples));
  return SmoothDomain(SmoothCurve::circle(0.0, 1.0, samples), std::move(hs));
}

}  // namespace mcflow
