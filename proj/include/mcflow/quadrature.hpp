#pragma once

#include <Eigen/Dense>

namespace mcflow {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Golub-Welsch: eigenvalues of the Jacobi matrix.
GaussRule gauss_legendre(int n);
// Nodes and weights mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace mcflow
