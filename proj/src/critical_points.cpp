#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcflow/laplace.hpp"

namespace mcflow {

namespace {

double arg_step(Complex a, Complex b) { return std::arg(b / a); }

// Total change of arg f along the polyline through `pts`, refining segments
// whose increment looks too large to be resolved.
double arg_change(const SeriesHarmonic& h, Complex a, Complex b, Complex fa, Complex fb, int depth) {
  const double step = arg_step(fa, fb);
  if (std::abs(step) < kPi / 4 || depth > 12) return step;
  const Complex mid = 0.5 * (a + b);
  const Complex fm = h.analytic(mid, 1);
  return arg_change(h, a, mid, fa, fm, depth + 1) + arg_change(h, mid, b, fm, fb, depth + 1);
}

int square_winding(const SeriesHarmonic& h, Complex lo, double size) {
  const Complex corners[4] = {lo, lo + size, lo + Complex(size, size), lo + Complex(0.0, size)};
  constexpr int per_edge = 8;
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const Complex a = corners[e], b = corners[(e + 1) % 4];
    Complex prev = a, fprev = h.analytic(a, 1);
    for (int s = 1; s <= per_edge; ++s) {
      const Complex p = a + (b - a) * (double(s) / per_edge);
      const Complex fp = h.analytic(p, 1);
      total += arg_change(h, prev, p, fprev, fp, 0);
      prev = p;
      fprev = fp;
    }
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

std::optional<Complex> newton(const SeriesHarmonic& h, Complex z, double max_step) {
  const Complex start = z;
  for (int it = 0; it < 60; ++it) {
    const Complex f = h.analytic(z, 1), df = h.analytic(z, 2);
    if (std::abs(df) < 1e-300) break;
    Complex dz = f / df;
    if (std::abs(dz) > max_step) dz *= max_step / std::abs(dz);
    z -= dz;
    if (std::abs(z - start) > 4.0 * max_step) return std::nullopt;
    if (std::abs(dz) < 1e-14 * std::max(1.0, std::abs(z))) return z;
  }
  return std::abs(h.analytic(z, 1)) < 1e-8 ? std::optional<Complex>(z) : std::nullopt;
}

}  // namespace

int analytic_winding(const SeriesHarmonic& h, Complex center, double radius, int samples) {
  double total = 0.0;
  Complex prev_pt = center + radius, prev = h.analytic(prev_pt, 1);
  for (int k = 1; k <= samples; ++k) {
    const Complex p = center + std::polar(radius, kTwoPi * k / samples);
    const Complex f = h.analytic(p, 1);
    total += arg_change(h, prev_pt, p, prev, f, 0);
    prev_pt = p;
    prev = f;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

CriticalPointReport locate_critical_points(const SeriesHarmonic& h, const CircularDomain& domain,
                                           CriticalPointOptions options) {
  if (h.is_constant()) throw Error("laplace.constant_field", "critical points of a constant function are undefined");
  const double gap = domain.gap();
  const double cell = options.cell_size > 0.0 ? options.cell_size : gap / 8.0;
  CriticalPointReport report;
  report.expected = static_cast<int>(domain.num_components()) - 2;

  // interior: cells with nonzero winding seed Newton
  std::vector<Complex> candidates;
  const double shift = 0.1234567 * cell;
  const int n = static_cast<int>(std::ceil(2.0 / cell)) + 1;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Complex lo(-1.0 - shift + ix * cell, -1.0 - shift + iy * cell);
      const Complex c = lo + Complex(0.5 * cell, 0.5 * cell);
      if (!domain.contains(c) || domain.distance_to_boundary(c) < 0.75 * cell) continue;
      if (square_winding(h, lo, cell) == 0) continue;
      auto z = newton(h, c, cell);
      candidates.push_back(z && domain.contains(*z) ? *z : c);
    }
  // cells straddling the boundary band: Newton only
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Complex c(-1.0 - shift + (ix + 0.5) * cell, -1.0 - shift + (iy + 0.5) * cell);
      if (!domain.contains(c) || domain.distance_to_boundary(c) >= 0.75 * cell) continue;
      auto z = newton(h, c, 0.5 * cell);
      if (z && domain.contains(*z) && domain.distance_to_boundary(*z) > 1e-7 && std::abs(*z - c) < cell)
        candidates.push_back(*z);
    }

  // merge clusters; the winding circle then counts the combined multiplicity
  const double merge_radius = 2.0 * std::max(1e-3 * gap, 1e-9);
  std::vector<Complex> merged;
  for (const Complex& z : candidates) {
    bool dup = false;
    for (auto& m : merged)
      if (std::abs(m - z) < merge_radius) dup = true;
    if (!dup) merged.push_back(z);
  }
  for (std::size_t i = 0; i < merged.size(); ++i) {
    double rho = gap / 8.0;
    for (std::size_t j = 0; j < merged.size(); ++j)
      if (j != i) rho = std::min(rho, 0.5 * std::abs(merged[i] - merged[j]));
    rho = std::min(rho, 0.9 * domain.distance_to_boundary(merged[i]));
    const int m = analytic_winding(h, merged[i], rho, options.winding_samples);
    if (m > 0) report.points.push_back({merged[i], m, false});
  }

  // boundary: dips of |grad h| along each circle
  for (std::size_t j = 0; j < domain.num_components(); ++j) {
    constexpr int samples = 2048;
    std::vector<double> mag(samples);
    const double r = domain.component(j).radius;
    for (int k = 0; k < samples; ++k)
      mag[k] = std::abs(h.analytic(domain.boundary_frame(j, kTwoPi * k / samples).point, 1));
    std::vector<double> sorted = mag;
    std::nth_element(sorted.begin(), sorted.begin() + samples / 2, sorted.end());
    const double median = sorted[samples / 2];
    for (int k = 0; k < samples; ++k) {
      const double prev = mag[(k + samples - 1) % samples], next = mag[(k + 1) % samples];
      if (!(mag[k] <= prev && mag[k] < next)) continue;
      // golden-section refinement of the local minimum in angle
      double a = kTwoPi * (k - 1) / samples, b = kTwoPi * (k + 1) / samples;
      auto f = [&](double t) { return std::abs(h.analytic(domain.boundary_frame(j, t).point, 1)); };
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        (f(c) < f(d) ? b : a) = (f(c) < f(d) ? d : c);
      }
      const double t = 0.5 * (a + b);
      if (f(t) > options.boundary_dip * median) continue;
      const auto frame = domain.boundary_frame(j, t);
      const double rho = std::min(gap / 8.0, 0.25 * r);
      // arg change of g' along the fluid-side half circle, doubled
      const Complex inward = -frame.normal;
      double total = 0.0;
      constexpr int half = 256;
      Complex prev_pt = frame.point + rho * frame.tangent;
      Complex prev_f = h.analytic(prev_pt, 1);
      for (int s = 1; s <= half; ++s) {
        const double phi = kPi * s / half;
        const Complex p = frame.point + rho * (frame.tangent * std::cos(phi) + inward * std::sin(phi));
        const Complex fp = h.analytic(p, 1);
        total += arg_change(h, prev_pt, p, prev_f, fp, 0);
        prev_pt = p;
        prev_f = fp;
      }
      const int m = static_cast<int>(std::lround(std::abs(total) / kPi));
      if (m > 0) report.points.push_back({frame.point, m, true});
    }
  }
  for (const auto& p : report.points) report.weighted_count += p.on_boundary ? 0.5 * p.multiplicity : p.multiplicity;
  return report;
}

CriticalPointReport find_critical_points(const SeriesHarmonic& h, const CircularDomain& domain,
                                         CriticalPointOptions options) {
  CriticalPointReport report = locate_critical_points(h, domain, options);
  if (std::abs(report.weighted_count - report.expected) > 1e-12) {
    std::ostringstream msg;
    msg << "weighted critical-point count " << report.weighted_count << " differs from k-2 = " << report.expected
        << "; found:";
    for (const auto& p : report.points)
      msg << " (" << p.location.real() << "," << p.location.imag() << ",m=" << p.multiplicity
          << (p.on_boundary ? ",boundary)" : ")");
    throw Error("laplace.index_mismatch", msg.str());
  }
  return report;
}

}  // namespace mcflow
