#pragma once

#include <vector>

namespace srd {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

// n-point Gauss-Jacobi rule on [-1, 1] for the weight
// (1 - x)^alpha (1 + x)^beta, alpha, beta > -1 (Golub-Welsch).
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

}  // namespace srd
