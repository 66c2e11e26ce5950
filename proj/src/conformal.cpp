#include "mcflow/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

namespace mcflow {

namespace {

constexpr Complex kI(0.0, 1.0);

// Band-limited resampling of a periodic real sequence to m points, and its
// t-derivative.
std::pair<std::vector<double>, std::vector<double>> trig_resample(const std::vector<double>& v, std::size_t m) {
  const std::size_t n = v.size();
  Eigen::FFT<double> fft;
  std::vector<Complex> in(v.begin(), v.end()), spec, up(m, 0.0), dup(m, 0.0);
  fft.fwd(spec, in);
  const int half = int(n) / 2;
  for (int k = 0; k < int(n); ++k) {
    int mode = k <= half ? k : k - int(n);
    Complex c = spec[k] / double(n);
    if (n % 2 == 0 && k == half) {
      // split the Nyquist mode across +-n/2
      up[half] += 0.5 * c;
      up[m - half] += 0.5 * c;
      dup[half] += 0.5 * c * kI * double(half);
      dup[m - half] += -0.5 * c * kI * double(half);
      continue;
    }
    const std::size_t idx = mode >= 0 ? std::size_t(mode) : m - std::size_t(-mode);
    up[idx] += c;
    dup[idx] += c * kI * double(mode);
  }
  std::vector<Complex> a, b;
  fft.inv(a, up);
  fft.inv(b, dup);
  std::vector<double> ra(m), rb(m);
  for (std::size_t k = 0; k < m; ++k) {
    ra[k] = a[k].real() * double(m);
    rb[k] = b[k].real() * double(m);
  }
  return {ra, rb};
}

}  // namespace

CurveDirichlet::CurveDirichlet(SmoothDomain domain, CurveSolverOptions options)
    : domain_(std::move(domain)), options_(options) {
  if (options_.nodes < 16 || options_.oversample < 1)
    throw Error("conformal.invalid_options", "need at least 16 nodes per curve");
  const std::size_t k = domain_.num_components();
  const int n = options_.nodes, nf = n * options_.oversample;
  coarse_.resize(k);
  fine_.resize(k);
  std::vector<std::vector<Complex>> second(k);
  for (std::size_t j = 0; j < k; ++j) {
    const SmoothCurve& c = domain_.curve(j);
    for (int m = 0; m < n; ++m) {
      const double t = kTwoPi * m / n;
      coarse_[j].push_back({c.point(t), c.derivative(t, 1), kTwoPi / n});
      second[j].push_back(c.derivative(t, 2));
    }
    for (int m = 0; m < nf; ++m) {
      const double t = kTwoPi * m / nf;
      fine_[j].push_back({c.point(t), c.derivative(t, 1), kTwoPi / nf});
    }
    if (j > 0) {
      Complex centre(0.0);
      for (const Complex z : c.samples()) centre += z;
      centre /= double(c.samples().size());
      if (std::abs(winding_number(c, centre)) < 0.5)
        throw Error("conformal.nonconvex_hole", "hole centroid lies outside the hole curve");
      centers_.push_back(centre);
    }
  }
  const std::size_t total = k * n, holes = k - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total + holes, total + holes);
  for (std::size_t ci = 0; ci < k; ++ci) {
    for (int i = 0; i < n; ++i) {
      const std::size_t row = ci * n + i;
      const Complex z = coarse_[ci][i].point;
      for (std::size_t cm = 0; cm < k; ++cm) {
        for (int m = 0; m < n; ++m) {
          const Node& nd = coarse_[cm][m];
          double kern;
          if (cm == ci && m == i)
            kern = (second[ci][i] / (2.0 * nd.tangent)).imag() / kTwoPi + 0.5 / nd.weight;
          else
            kern = (nd.tangent / (nd.point - z)).imag() / kTwoPi;
          a(row, cm * n + m) = kern * nd.weight;
        }
      }
      for (std::size_t h = 0; h < holes; ++h) a(row, total + h) = std::log(std::abs(z - centers_[h]));
    }
  }
  for (std::size_t h = 0; h < holes; ++h)
    for (int m = 0; m < n; ++m) a(total + h, (h + 1) * n + m) = coarse_[h + 1][m].weight;
  lu_.compute(a);
}

CurveDirichlet::Solution CurveDirichlet::solve(const std::function<double(std::size_t, Complex)>& data) const {
  const std::size_t k = domain_.num_components();
  const int n = options_.nodes;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k * n + k - 1);
  for (std::size_t j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) rhs(j * n + i) = data(j, coarse_[j][i].point);
  const Eigen::VectorXd x = lu_.solve(rhs);
  if (!x.allFinite()) throw Error("conformal.solve_failed", "Nystrom system is singular");
  Solution s;
  std::vector<std::vector<double>> sig_t(k);
  for (std::size_t j = 0; j < k; ++j) {
    s.density.emplace_back(x.data() + j * n, x.data() + (j + 1) * n);
    sig_t[j] = trig_resample(s.density[j], n).second;
  }
  for (std::size_t h = 0; h + 1 < k; ++h) s.log_coeff.push_back(x(k * n + h));
  // interior limit at the solve nodes: subtract the local density value
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> re(n), im(n);
    for (int i = 0; i < n; ++i) {
      const Complex z = coarse_[j][i].point;
      const double ref = s.density[j][i];
      Complex acc(0.0);
      for (std::size_t c = 0; c < k; ++c)
        for (int m = 0; m < n; ++m) {
          const Node& nd = coarse_[c][m];
          if (c == j && m == i)
            acc += sig_t[j][i] * nd.weight;
          else
            acc += (s.density[c][m] - ref) * nd.tangent * nd.weight / (nd.point - z);
        }
      const Complex v = acc / (kTwoPi * kI) + ref;
      re[i] = v.real();
      im[i] = v.imag();
    }
    const std::size_t nf = fine_[j].size();
    auto [fr, fr_t] = trig_resample(re, nf);
    auto [fi, fi_t] = trig_resample(im, nf);
    std::vector<Complex> tr(nf), trd(nf);
    for (std::size_t m = 0; m < nf; ++m) {
      tr[m] = Complex(fr[m], fi[m]);
      trd[m] = Complex(fr_t[m], fi_t[m]) / fine_[j][m].tangent;
    }
    s.trace.push_back(std::move(tr));
    s.trace_derivative.push_back(std::move(trd));
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) {
      const Complex z = domain_.curve(j).point(kTwoPi * (i + 0.5) / n);
      s.boundary_residual = std::max(s.boundary_residual, std::abs(value(s, z) - data(j, z)));
    }
  }
  return s;
}

double CurveDirichlet::distance_to_boundary(Complex z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& curve : fine_)
    for (const Node& nd : curve) d = std::min(d, std::abs(nd.point - z));
  return d;
}

Complex CurveDirichlet::barycentric(const std::vector<std::vector<Complex>>& values, Complex z) const {
  Complex num(0.0), den(0.0);
  for (std::size_t j = 0; j < fine_.size(); ++j)
    for (std::size_t m = 0; m < fine_[j].size(); ++m) {
      const Node& nd = fine_[j][m];
      const Complex diff = nd.point - z;
      if (std::abs(diff) < 1e-15) return values[j][m];
      const Complex q = nd.tangent * nd.weight / diff;
      num += values[j][m] * q;
      den += q;
    }
  return num / den;
}

Complex CurveDirichlet::cauchy(const Solution& s, Complex z) const { return barycentric(s.trace, z); }

Complex CurveDirichlet::cauchy_derivative(const Solution& s, Complex z) const {
  return barycentric(s.trace_derivative, z);
}

Complex CurveDirichlet::analytic(const Solution& s, Complex z) const {
  Complex g = cauchy(s, z);
  for (std::size_t h = 0; h < centers_.size(); ++h) g += s.log_coeff[h] * std::log(z - centers_[h]);
  return g;
}

AnnulusMap AnnulusMap::identity(double modulus) {
  if (!(modulus > 0.0 && modulus < 1.0)) throw Error("conformal.invalid_modulus", "modulus must lie in (0, 1)");
  AnnulusMap m;
  m.modulus_ = modulus;
  return m;
}

Complex AnnulusMap::forward(Complex z) const {
  if (!solver_) return z;
  return (z - center_) * std::exp(std::log(modulus_) * solver_->cauchy(*solution_, z));
}

Complex AnnulusMap::derivative(Complex z) const {
  if (!solver_) return 1.0;
  const double lr = std::log(modulus_);
  const Complex e = std::exp(lr * solver_->cauchy(*solution_, z));
  return e * (1.0 + (z - center_) * lr * solver_->cauchy_derivative(*solution_, z));
}

bool AnnulusMap::in_domain(Complex z) const {
  if (!solver_) return std::abs(z) > modulus_ && std::abs(z) < 1.0;
  return solver_->domain().contains(z);
}

double AnnulusMap::distance_to_boundary(Complex z) const {
  if (!solver_) return std::min(std::abs(z) - modulus_, 1.0 - std::abs(z));
  return solver_->distance_to_boundary(z);
}

Complex AnnulusMap::inverse(Complex zeta) const {
  const double a = std::abs(zeta);
  if (a < modulus_ * (1.0 - 1e-12) || a > 1.0 + 1e-12)
    throw Error("conformal.outside_annulus", "point is outside the image annulus");
  if (!solver_) return zeta;
  Complex z = seeds_.front().first;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : seeds_) {
    const double d = std::abs(q - zeta);
    if (d < best) best = d, z = p;
  }
  Complex res = forward(z) - zeta;
  for (int it = 0; it < 60 && std::abs(res) > 1e-14; ++it) {
    const Complex step = res / derivative(z);
    double lambda = 1.0;
    Complex next = z - step, next_res = forward(next) - zeta;
    while ((!solver_->domain().contains(next) || std::abs(next_res) > std::abs(res)) && lambda > 1e-6) {
      lambda *= 0.5;
      next = z - lambda * step;
      next_res = forward(next) - zeta;
    }
    if (lambda <= 1e-6) break;
    z = next;
    res = next_res;
  }
  if (std::abs(res) > 1e-9) throw Error("conformal.inverse_failed", "Newton iteration for the inverse did not converge");
  return z;
}

double AnnulusMap::boundary_correspondence() const {
  if (!solver_) return 0.0;
  double worst = 0.0;
  const SmoothDomain& d = solver_->domain();
  for (std::size_t j = 0; j < 2; ++j) {
    const double target = j == 0 ? 1.0 : modulus_;
    for (int i = 0; i < 257; ++i) {
      const Complex z = d.curve(j).point(kTwoPi * (i + 0.5) / 257);
      worst = std::max(worst, std::abs(std::abs(forward(z)) - target));
    }
  }
  return worst;
}

AnnulusMap to_annulus(const SmoothDomain& domain, CurveSolverOptions options) {
  if (domain.num_components() != 2)
    throw Error("conformal.not_doubly_connected", "annulus maps need exactly one hole");
  auto solver = std::make_shared<CurveDirichlet>(domain, options);
  auto sol = std::make_shared<CurveDirichlet::Solution>(
      solver->solve([](std::size_t j, Complex) { return j == 0 ? 0.0 : 1.0; }));
  const double a = sol->log_coeff[0];
  if (!(a < 0.0) || !std::isfinite(a))
    throw Error("conformal.conjugate_period", "harmonic measure has the wrong flux sign");
  AnnulusMap m;
  // exp(log r * A log(z - c)) must be single valued, so log r = 1 / A
  m.modulus_ = std::exp(1.0 / a);
  m.residual_ = sol->boundary_residual;
  m.center_ = solver->hole_centers()[0];
  m.solver_ = solver;
  m.solution_ = sol;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Complex z : domain.outer().samples()) {
    x0 = std::min(x0, z.real()), x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag()), y1 = std::max(y1, z.imag());
  }
  const int g = 48;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const Complex z(x0 + (x1 - x0) * (i + 0.5) / g, y0 + (y1 - y0) * (j + 0.5) / g);
      if (domain.contains(z)) m.seeds_.emplace_back(z, m.forward(z));
    }
  if (m.seeds_.empty()) throw Error("conformal.degenerate_domain", "no interior seed points");
  return m;
}

MapReport verify_map(const AnnulusMap& map, const std::vector<Complex>& samples, unsigned seed) {
  MapReport r;
  r.min_derivative = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  auto directional = [&](Complex z, Complex v, double h) {
    return (-map.forward(z + 2.0 * h * v) + 8.0 * map.forward(z + h * v) - 8.0 * map.forward(z - h * v) +
            map.forward(z - 2.0 * h * v)) /
           (12.0 * h);
  };
  for (const Complex z : samples) {
    const double h = std::min(std::ldexp(1.0, -10), map.distance_to_boundary(z) / 4.0);
    const Complex fx = directional(z, 1.0, h), fy = directional(z, kI, h);
    r.cauchy_riemann = std::max(r.cauchy_riemann, std::abs(fy - kI * fx) / std::abs(fx));
    const double d = std::abs(map.derivative(z));
    r.min_derivative = std::min(r.min_derivative, d);
    r.max_derivative = std::max(r.max_derivative, d);
    const Complex v1 = std::polar(1.0, angle(rng)), v2 = std::polar(1.0, angle(rng));
    const Complex p1 = directional(z, v1, h), p2 = directional(z, v2, h);
    const double lhs = (std::conj(p1) * p2).real(), rhs = d * d * (std::conj(v1) * v2).real();
    r.angle = std::max(r.angle, std::abs(lhs - rhs) / (d * d));
    r.round_trip = std::max(r.round_trip, std::abs(map.inverse(map.forward(z)) - z));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const std::size_t n = std::min<std::size_t>(samples.size(), 200);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dz = std::abs(samples[i] - samples[j]);
      if (dz == 0.0) continue;
      const double q = std::abs(map.forward(samples[i]) - map.forward(samples[j])) / dz;
      lo = std::min(lo, q), hi = std::max(hi, q);
    }
  if (hi > 0.0) r.bilipschitz = std::max(hi, 1.0 / lo);
  r.boundary = map.boundary_correspondence();
  return r;
}

}  // namespace mcflow
