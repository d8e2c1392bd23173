#pragma once

#include <array>
#include <vector>

namespace lmmg {

/// Quadrature rule on the reference triangle, stored in barycentric
/// coordinates with weights normalized to sum to 1, so that
///   integral over T of g  ~=  |T| * sum_k w_k g(x_k).
struct QuadratureRule {
    struct Point {
        std::array<double, 3> bary;
        double weight;
    };

    std::vector<Point> points;
    int degree = 0; ///< every polynomial up to this total degree is integrated exactly
};

/// Returns a rule exact for polynomials of total degree <= degree.  Rules
/// are conical products of Gauss-Legendre formulas mapped through the
/// square-to-triangle collapse, so exactness holds to rounding for any
/// requested degree.  Results are cached per degree.
const QuadratureRule& triangle_quadrature(int degree);

} // namespace lmmg
