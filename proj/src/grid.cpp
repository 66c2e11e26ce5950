#include <algorithm>
#include <cmath>

#include "mcflow/geometry.hpp"

namespace mcflow {

namespace {

std::vector<BoundaryNode> circle_nodes(const CircularDomain& d, std::size_t j, int count) {
  std::vector<BoundaryNode> out(count);
  const Circle c = d.component(j);
  for (int k = 0; k < count; ++k) {
    const double t = (k + 0.5) * kTwoPi / count;
    const auto f = d.boundary_frame(j, t);
    out[k] = {f.point, f.normal, kTwoPi * c.radius / count};
  }
  return out;
}

}  // namespace

Grid polar_grid(double inner_radius, int n_radial, int n_angular) {
  Grid g;
  g.layout = Grid::Layout::Polar;
  g.inner_radius = inner_radius;
  g.n_radial = n_radial;
  g.n_angular = n_angular;
  g.dr = (1.0 - inner_radius) / n_radial;
  g.dtheta = kTwoPi / n_angular;
  g.h = g.dr;
  g.nodes.resize(std::size_t(n_radial) * n_angular);
  g.weights.resize(g.nodes.size());
  for (int i = 0; i < n_radial; ++i)
    for (int j = 0; j < n_angular; ++j) {
      const double r = g.radius(i);
      g.nodes[g.polar_index(i, j)] = std::polar(r, g.angle(j));
      g.weights[g.polar_index(i, j)] = r * g.dr * g.dtheta;
    }
  const CircularDomain d = CircularDomain::annulus(inner_radius);
  g.boundary = {circle_nodes(d, 0, n_angular), circle_nodes(d, 1, n_angular)};
  return g;
}

Grid build_grid(const CircularDomain& domain, int resolution) {
  if (resolution < 8) throw Error("geometry.resolution_too_small", "grid resolution must be at least 8");
  if (domain.is_concentric_annulus(1e-12)) {
    const double r = domain.holes()[0].radius;
    const double h = (1.0 - r) / resolution;
    if (domain.gap() < 4.0 * h) throw Error("geometry.gap_too_small", "domain gap is below 4h");
    return polar_grid(r, resolution, 4 * resolution);
  }
  Grid g;
  g.layout = Grid::Layout::Cartesian;
  g.h = 2.0 / resolution;
  if (domain.gap() < 4.0 * g.h) throw Error("geometry.gap_too_small", "domain gap is below 4h");
  g.nx = g.ny = resolution;
  g.origin = Complex(-1.0 + 0.5 * g.h, -1.0 + 0.5 * g.h);
  g.kind.assign(std::size_t(g.nx) * g.ny, NodeKind::Exterior);
  g.active_index.assign(g.kind.size(), -1);
  constexpr int sub = 8;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Complex c = g.origin + g.h * Complex(ix, iy);
      const std::size_t cell = std::size_t(iy) * g.nx + ix;
      if (!domain.contains(c)) continue;
      double frac = 1.0;
      if (domain.distance_to_boundary(c) < 0.75 * g.h) {
        int inside = 0;
        for (int a = 0; a < sub; ++a)
          for (int b = 0; b < sub; ++b)
            inside += domain.contains(c + g.h * Complex((a + 0.5) / sub - 0.5, (b + 0.5) / sub - 0.5));
        frac = double(inside) / (sub * sub);
        g.kind[cell] = NodeKind::Cut;
      } else {
        g.kind[cell] = NodeKind::Interior;
      }
      g.active_index[cell] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(c);
      g.weights.push_back(frac * g.h * g.h);
    }
  for (std::size_t j = 0; j < domain.num_components(); ++j) {
    const int count = std::max(16, int(std::ceil(kTwoPi * domain.component(j).radius / g.h)));
    g.boundary.push_back(circle_nodes(domain, j, count));
  }
  return g;
}

}  // namespace mcflow
