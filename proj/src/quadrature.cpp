#include <lmmg/quadrature.hpp>

#include <cmath>
#include <map>

#include <lmmg/errors.hpp>

namespace lmmg {
namespace {

struct Gauss1d {
    std::vector<double> nodes;   ///< on [0, 1]
    std::vector<double> weights; ///< sum to 1
};

/// m-point Gauss-Legendre rule, found by Newton iteration on the Legendre
/// polynomial with the usual Chebyshev-based initial guesses.
Gauss1d gauss_legendre(int m)
{
    Gauss1d rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const double pi = std::acos(-1.0);

    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1]; total weight 2 becomes 1.
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[m - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[m - 1 - i] = 0.5 * w;
    }
    return rule;
}

/// Conical product rule on the reference triangle via the collapse
/// (u, v) -> (u, v (1 - u)) with Jacobian (1 - u).  For a degree-d
/// integrand the pulled-back integrand has degree d+1 in u and d in v, so
/// m-point Gauss-Legendre per direction with 2m - 1 >= d + 1 is exact.
QuadratureRule build_rule(int degree)
{
    const int m = (degree + 3) / 2;
    const Gauss1d g = gauss_legendre(m);

    QuadratureRule rule;
    rule.degree = degree;
    rule.points.reserve(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double x = g.nodes[i];
            const double y = g.nodes[j] * (1.0 - g.nodes[i]);
            QuadratureRule::Point p;
            p.bary = {1.0 - x - y, x, y};
            p.weight = 2.0 * g.weights[i] * g.weights[j] * (1.0 - g.nodes[i]);
            rule.points.push_back(p);
        }
    }
    return rule;
}

} // namespace

const QuadratureRule& triangle_quadrature(int degree)
{
    if (degree < 1)
        throw InvalidInput("quadrature degree must be at least 1");
    static std::map<int, QuadratureRule> cache;
    auto it = cache.find(degree);
    if (it == cache.end())
        it = cache.emplace(degree, build_rule(degree)).first;
    return it->second;
}

} // namespace lmmg
