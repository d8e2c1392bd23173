#include <lmmg/estimator.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <lmmg/errors.hpp>

namespace lmmg {

double indicator_weight(double epsilon, double nu, double h)
{
    const double diffusion_weight = h / std::sqrt(epsilon);
    return nu > 0.0 ? std::min(1.0 / std::sqrt(nu), diffusion_weight) : diffusion_weight;
}

double ErrorIndicators::total() const
{
    return std::sqrt(total_sq);
}

ErrorIndicators element_indicators(const ProblemOperators& ops, const FeFunction& u,
                                   Oscillation oscillation)
{
    const FeSpace& space = *ops.space;
    const SemilinearProblem& p = ops.problem;
    const Triangulation& mesh = space.mesh();
    const QuadratureRule& rule = triangle_quadrature(p.quadrature_degree);
    const Vector values = vertex_values(u);

    ErrorIndicators result;
    result.eta_sq.assign(mesh.n_elements(), 0.0);
    if (oscillation == Oscillation::split)
        result.osc_sq.assign(mesh.n_elements(), 0.0);

    std::vector<double> alpha(mesh.n_elements());
    std::vector<Vec2> gradient(mesh.n_elements());

    for (int e = 0; e < mesh.n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        const auto& el = mesh.element(e);
        alpha[e] = indicator_weight(p.epsilon, p.nu, g.diameter);

        Vec2 grad = {0.0, 0.0};
        for (int k = 0; k < 3; ++k)
            grad = grad + values[el[k]] * g.basis_gradient[k];
        gradient[e] = grad;

        // Interior residual of the strong form; the second derivatives of a
        // P1 iterate vanish on each element.
        double mean_f = 0.0;
        if (oscillation == Oscillation::split) {
            for (const auto& q : rule.points) {
                const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                    + q.bary[2] * g.corner[2];
                const double uq = q.bary[0] * values[el[0]] + q.bary[1] * values[el[1]]
                    + q.bary[2] * values[el[2]];
                mean_f += q.weight * p.f(x, uq);
            }
        }

        double residual_sq = 0.0;
        double osc_sq = 0.0;
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                + q.bary[2] * g.corner[2];
            const double uq = q.bary[0] * values[el[0]] + q.bary[1] * values[el[1]]
                + q.bary[2] * values[el[2]];
            const double fx = p.f(x, uq);
            const double reaction = p.has_q() ? p.q(x) * uq : 0.0;
            if (oscillation == Oscillation::split) {
                const double r = mean_f - reaction;
                residual_sq += q.weight * r * r;
                osc_sq += q.weight * (fx - mean_f) * (fx - mean_f);
            } else {
                const double r = fx - reaction;
                residual_sq += q.weight * r * r;
            }
        }
        result.eta_sq[e] = alpha[e] * alpha[e] * g.area * residual_sq;
        if (oscillation == Oscillation::split)
            result.osc_sq[e] = alpha[e] * alpha[e] * g.area * osc_sq;
    }

    // Jump of the diffusive flux across interior edges; constant per edge
    // for P1, so its squared L2 norm is |edge| * jump^2.  Each edge feeds
    // the indicators of both adjacent elements.
    const EdgeTable edges(mesh);
    const double eps_root = std::sqrt(p.epsilon);
    for (const auto& edge : edges.edges) {
        if (edge.on_boundary())
            continue;
        const Vec2 a = mesh.vertex(edge.v0);
        const Vec2 b = mesh.vertex(edge.v1);
        const double length = distance(a, b);
        const Vec2 normal = {(b.y - a.y) / length, -(b.x - a.x) / length};
        const Vec2 diff = gradient[edge.elem[0]] - gradient[edge.elem[1]];
        const double jump = p.epsilon * dot(diff, normal);
        const double jump_norm_sq = length * jump * jump;
        for (int side = 0; side < 2; ++side)
            result.eta_sq[edge.elem[side]] += 0.5 / eps_root * alpha[edge.elem[side]]
                * jump_norm_sq;
    }

    result.total_sq = std::accumulate(result.eta_sq.begin(), result.eta_sq.end(), 0.0);
    return result;
}

std::vector<int> dorfler_mark(const std::vector<double>& eta_sq, double theta)
{
    if (!(theta > 0.0) || theta > 1.0)
        throw InvalidInput("marking fraction must lie in (0, 1]");
    for (double v : eta_sq)
        if (!(v >= 0.0))
            throw InvalidInput("squared indicators must be nonnegative");

    const double total = std::accumulate(eta_sq.begin(), eta_sq.end(), 0.0);
    if (total == 0.0)
        return {};

    std::vector<int> order(eta_sq.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&eta_sq](int a, int b) {
        return eta_sq[a] != eta_sq[b] ? eta_sq[a] > eta_sq[b] : a < b;
    });

    std::vector<int> marked;
    double sum = 0.0;
    for (int e : order) {
        marked.push_back(e);
        sum += eta_sq[e];
        if (sum >= theta * total)
            break;
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

} // namespace lmmg
