#pragma once

#include <vector>

namespace sidx {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b]. Nodes come from Newton
/// iteration on P_n started at the Chebyshev-like guess cos(pi (i + 3/4) / (n + 1/2)).
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace sidx
