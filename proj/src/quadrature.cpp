#include "mcflow/quadrature.hpp"

#include <cmath>

#include "mcflow/core.hpp"

namespace mcflow {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error("quadrature.invalid_order", "Gauss rule needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  return {eig.eigenvalues(), 2.0 * eig.eigenvectors().row(0).transpose().array().square().matrix()};
}

GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_legendre(n);
  r.nodes = (0.5 * (b - a) * (r.nodes.array() + 1.0) + a).matrix();
  r.weights *= 0.5 * (b - a);
  return r;
}

}  // namespace mcflow
