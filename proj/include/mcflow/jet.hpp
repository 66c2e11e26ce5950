#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace mcflow {

// Second-order forward-mode value in two variables: value, gradient, Hessian.
template <class Scalar>
struct Jet2 {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  using Mat = Eigen::Matrix<Scalar, 2, 2>;
  Scalar v{0};
  Vec g = Vec::Zero();
  Mat H = Mat::Zero();

  Jet2() = default;
  Jet2(Scalar value) : v(value) {}  // NOLINT: constants promote implicitly
  Jet2(Scalar value, Vec grad, Mat hess) : v(value), g(grad), H(hess) {}

  static Jet2 variable(Scalar value, int axis) {
    Jet2 j(value);
    j.g(axis) = Scalar(1);
    return j;
  }
  Scalar laplacian() const { return H(0, 0) + H(1, 1); }
};

template <class S>
Jet2<S> chain(const Jet2<S>& a, S f, S df, S ddf) {
  return {f, df * a.g, df * a.H + ddf * a.g * a.g.transpose()};
}

template <class S> Jet2<S> operator+(const Jet2<S>& a, const Jet2<S>& b) { return {a.v + b.v, a.g + b.g, a.H + b.H}; }
template <class S> Jet2<S> operator-(const Jet2<S>& a, const Jet2<S>& b) { return {a.v - b.v, a.g - b.g, a.H - b.H}; }
template <class S> Jet2<S> operator-(const Jet2<S>& a) { return {-a.v, -a.g, -a.H}; }
template <class S> Jet2<S> operator*(const Jet2<S>& a, const Jet2<S>& b) {
  return {a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.H + b.v * a.H + a.g * b.g.transpose() + b.g * a.g.transpose()};
}
template <class S> Jet2<S> operator/(const Jet2<S>& a, const Jet2<S>& b) {
  const S inv = S(1) / b.v;
  return a * chain(b, inv, -inv * inv, S(2) * inv * inv * inv);
}
template <class S> Jet2<S> operator+(const Jet2<S>& a, S s) { return {a.v + s, a.g, a.H}; }
template <class S> Jet2<S> operator+(S s, const Jet2<S>& a) { return a + s; }
template <class S> Jet2<S> operator-(const Jet2<S>& a, S s) { return {a.v - s, a.g, a.H}; }
template <class S> Jet2<S> operator-(S s, const Jet2<S>& a) { return {s - a.v, -a.g, -a.H}; }
template <class S> Jet2<S> operator*(const Jet2<S>& a, S s) { return {a.v * s, a.g * s, a.H * s}; }
template <class S> Jet2<S> operator*(S s, const Jet2<S>& a) { return a * s; }
template <class S> Jet2<S> operator/(const Jet2<S>& a, S s) { return a * (S(1) / s); }
template <class S> Jet2<S> operator/(S s, const Jet2<S>& a) { return Jet2<S>(s) / a; }

template <class S> Jet2<S> sqrt(const Jet2<S>& a) {
  using std::sqrt;
  const S r = sqrt(a.v);
  return chain(a, r, S(0.5) / r, S(-0.25) / (r * a.v));
}
template <class S> Jet2<S> exp(const Jet2<S>& a) {
  using std::exp;
  const S e = exp(a.v);
  return chain(a, e, e, e);
}
template <class S> Jet2<S> log(const Jet2<S>& a) {
  using std::log;
  return chain(a, log(a.v), S(1) / a.v, S(-1) / (a.v * a.v));
}
template <class S> Jet2<S> sin(const Jet2<S>& a) {
  using std::sin; using std::cos;
  return chain(a, sin(a.v), cos(a.v), -sin(a.v));
}
template <class S> Jet2<S> cos(const Jet2<S>& a) {
  using std::sin; using std::cos;
  return chain(a, cos(a.v), -sin(a.v), -cos(a.v));
}
template <class S> Jet2<S> pow(const Jet2<S>& a, S p) {
  using std::pow;
  return chain(a, pow(a.v, p), p * pow(a.v, p - 1), p * (p - 1) * pow(a.v, p - 2));
}
// Angle of the point (x, y).
template <class S> Jet2<S> atan2(const Jet2<S>& y, const Jet2<S>& x) {
  using std::atan2;
  const S r2 = x.v * x.v + y.v * y.v, r4 = r2 * r2;
  const S fx = -y.v / r2, fy = x.v / r2;
  const S fxx = S(2) * x.v * y.v / r4, fyy = -fxx, fxy = (y.v * y.v - x.v * x.v) / r4;
  Eigen::Matrix<S, 2, 2> J;
  J.col(0) = x.g;
  J.col(1) = y.g;
  Eigen::Matrix<S, 2, 2> F;
  F << fxx, fxy, fxy, fyy;
  return {atan2(y.v, x.v), fx * x.g + fy * y.g, fx * x.H + fy * y.H + J * F * J.transpose()};
}

}  // namespace mcflow
