#ifndef KVDG_QUADRATURE_HPP
#define KVDG_QUADRATURE_HPP

#include <array>
#include <vector>

namespace kvdg {

/// Quadrature rule on a reference domain.
///
/// Triangle rules live on {(x,y): x,y >= 0, x+y <= 1} and their weights sum
/// to 1/2. Edge rules live on [0,1] (stored in points[i][0], second
/// coordinate zero) and their weights sum to 1.
struct QuadRule {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    int exactness_degree = 0;

    int size() const { return static_cast<int>(points.size()); }
};

/// Symmetric Gauss rule on the reference triangle, exact for total degree
/// <= degree. Supported range: 1..6. Rules are tabulated constants.
const QuadRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1], exact for degree <= degree (range 1..6).
const QuadRule& edge_rule(int degree);

} // namespace kvdg

#endif
