#include "mcflow/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace mcflow {

namespace {
std::atomic<std::size_t> g_threads{0};
}

std::size_t thread_count() {
  std::size_t n = g_threads.load();
  if (n == 0) {
    if (const char* env = std::getenv("MCFLOW_THREADS")) n = static_cast<std::size_t>(std::max(1, std::atoi(env)));
    else n = std::max(1u, std::thread::hardware_concurrency());
    g_threads.store(n);
  }
  return n;
}

void set_thread_count(std::size_t n) { g_threads.store(std::max<std::size_t>(1, n)); }

CircularDomain::CircularDomain(std::vector<Circle> holes) : holes_(std::move(holes)) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < holes_.size(); ++i) {
    const auto& c = holes_[i];
    if (!(c.radius > 0.0)) throw Error("geometry.invalid_domain", "hole radius must be positive");
    d = std::min(d, 1.0 - std::abs(c.center) - c.radius);
    for (std::size_t j = i + 1; j < holes_.size(); ++j)
      d = std::min(d, std::abs(c.center - holes_[j].center) - c.radius - holes_[j].radius);
  }
  if (holes_.empty()) d = 1.0;
  if (!(d > 0.0)) throw Error("geometry.invalid_domain", "holes must be disjoint and inside the unit disc (gap <= 0)");
  gap_ = d;
}

CircularDomain::CircularDomain(const Circle& outer, std::vector<Circle> holes) {
  if (!(outer.radius > 0.0)) throw Error("geometry.invalid_domain", "outer radius must be positive");
  for (auto& h : holes) {
    h.center = (h.center - outer.center) / outer.radius;
    h.radius /= outer.radius;
  }
  *this = CircularDomain(std::move(holes));
}

void CircularDomain::check_component(std::size_t j) const {
  if (j > holes_.size()) throw Error("geometry.unknown_component", "component index " + std::to_string(j) + " out of range");
}

Circle CircularDomain::component(std::size_t j) const {
  check_component(j);
  return j == 0 ? Circle{0.0, 1.0} : holes_[j - 1];
}

double gap(const CircularDomain& domain) { return domain.gap(); }

double CircularDomain::boundary_length() const {
  double l = kTwoPi;
  for (const auto& h : holes_) l += kTwoPi * h.radius;
  return l;
}

double CircularDomain::area() const {
  double a = kPi;
  for (const auto& h : holes_) a -= kPi * h.radius * h.radius;
  return a;
}

bool CircularDomain::contains(Complex z) const {
  if (std::abs(z) >= 1.0) return false;
  for (const auto& h : holes_)
    if (std::abs(z - h.center) <= h.radius) return false;
  return true;
}

bool CircularDomain::in_closure(Complex z, double tol) const {
  if (std::abs(z) > 1.0 + tol) return false;
  for (const auto& h : holes_)
    if (std::abs(z - h.center) < h.radius - tol) return false;
  return true;
}

double CircularDomain::distance_to(Complex z, std::size_t j) const {
  const Circle c = component(j);
  return std::abs(std::abs(z - c.center) - c.radius);
}

double CircularDomain::distance_to_boundary(Complex z) const { return distance_to(z, nearest_component(z)); }

std::size_t CircularDomain::nearest_component(Complex z) const {
  std::size_t best = 0;
  double d = distance_to(z, 0);
  for (std::size_t j = 1; j < num_components(); ++j) {
    const double dj = distance_to(z, j);
    if (dj < d) d = dj, best = j;
  }
  return best;
}

BoundaryFrame CircularDomain::boundary_frame(std::size_t j, double angle) const {
  const Circle c = component(j);
  const Complex e = std::polar(1.0, angle);
  const Complex n = j == 0 ? e : -e;
  return {c.center + c.radius * e, n, Complex(0.0, -1.0) * n};
}

Complex CircularDomain::project(Complex z, std::size_t j) const {
  const Circle c = component(j);
  const double dist = std::abs(z - c.center);
  if (dist < 1e-14) throw Error("geometry.degenerate_projection", "point coincides with the circle center");
  return c.center + c.radius * (z - c.center) / dist;
}

bool CircularDomain::is_concentric_annulus(double tol) const {
  return holes_.size() == 1 && std::abs(holes_[0].center) <= tol;
}

}  // namespace mcflow
