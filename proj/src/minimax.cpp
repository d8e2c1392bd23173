#include <lmmg/minimax.hpp>

#include <algorithm>
#include <cmath>

#include <lmmg/errors.hpp>

namespace lmmg {
namespace {

/// Gaussian elimination with partial pivoting for the small dense systems
/// of subspace coefficients.
Vector dense_solve(std::vector<double> a, Vector b)
{
    const int n = static_cast<int>(b.size());
    double scale = 0.0;
    for (double x : a)
        scale = std::max(scale, std::abs(x));

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col]))
                pivot = row;
        if (std::abs(a[pivot * n + col]) <= 1e-14 * scale)
            throw SolverError("subspace basis is numerically dependent");
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double factor = a[row * n + col] / a[col * n + col];
            for (int j = col; j < n; ++j)
                a[row * n + j] -= factor * a[col * n + j];
            b[row] -= factor * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j)
            s -= a[row * n + j] * b[j];
        b[row] = s / a[row * n + row];
    }
    return b;
}

void check_unit_direction(const ProblemOperators& ops, const FeFunction& v)
{
    if (static_cast<int>(v.coeffs.size()) != ops.space->n_dofs())
        throw InvalidInput("direction does not live on the context space");
    const double n = eps_norm(ops, v.coeffs);
    if (std::abs(n - 1.0) > 1e-6)
        throw InvalidInput("peak selection requires a unit direction (got norm "
                           + std::to_string(n) + ")");
}

/// Root of g'(t) = t Q - (1/c) (f(., c t v), v) on t > 0 by doubling /
/// halving until a sign change brackets it, then safeguarded Newton.  With
/// c = 1 this is the ray derivative of the energy; c = sqrt(eps) gives the
/// rescaled variant with the same maximizer up to the factor c.
double solve_ray_root(const MinimaxContext& ctx, const Vector& v_values, double c, double q_norm_sq)
{
    const SemilinearProblem& p = ctx.ops.problem;
    const FeSpace& space = *ctx.ops.space;

    const auto derivative = [&](double t, double* second) {
        const RayIntegrals ri = f_ray_integrals(p, space, v_values, c * t);
        if (second)
            *second = q_norm_sq - ri.ft_vv;
        return t * q_norm_sq - ri.f_v / c;
    };

    double t_lo = 0.0;
    double t_hi = 0.0;
    const double g1 = derivative(1.0, nullptr);
    if (g1 == 0.0)
        return 1.0;
    if (g1 > 0.0) {
        t_lo = 1.0;
        for (double t = 2.0; t <= ctx.peak.bracket_limit; t *= 2.0) {
            if (derivative(t, nullptr) < 0.0) {
                t_hi = t;
                break;
            }
            t_lo = t;
        }
        if (t_hi == 0.0)
            throw PeakSelectionFailure("no energy maximizer along the ray below coefficient "
                                       + std::to_string(ctx.peak.bracket_limit));
    } else {
        t_hi = 1.0;
        for (double t = 0.5; t >= 1e-12; t *= 0.5) {
            if (derivative(t, nullptr) > 0.0) {
                t_lo = t;
                break;
            }
            t_hi = t;
        }
        if (t_lo == 0.0)
            throw PeakSelectionFailure("energy has no ascent along the ray near zero");
    }

    double t = 0.5 * (t_lo + t_hi);
    for (int iter = 0; iter < 200; ++iter) {
        double second = 0.0;
        const double first = derivative(t, &second);
        if (std::abs(first) <= ctx.peak.root_rel_tol * q_norm_sq * t)
            return t;
        (first > 0.0 ? t_lo : t_hi) = t;
        double next = second != 0.0 ? t - first / second : 0.0;
        if (!(next > t_lo && next < t_hi))
            next = 0.5 * (t_lo + t_hi);
        t = next;
    }
    throw PeakSelectionFailure("ray maximizer iteration did not converge");
}

PeakSelection ray_peak(const MinimaxContext& ctx, const FeFunction& v, double c)
{
    check_unit_direction(ctx.ops, v);
    const Vector values = vertex_values(v);
    const double q_norm_sq = problem_norm_sq(ctx.ops, v.coeffs);
    if (!(q_norm_sq > 0.0))
        throw InvalidInput("direction has zero problem norm");

    const double t = c * solve_ray_root(ctx, values, c, q_norm_sq);

    PeakSelection peak;
    peak.t = t;
    peak.w = {v.space, v.coeffs};
    for (double& x : peak.w.coeffs)
        x *= t;
    peak.energy = 0.5 * t * t * q_norm_sq
        - F_ray_integral(ctx.ops.problem, *ctx.ops.space, values, t);
    return peak;
}

} // namespace

Subspace Subspace::build(const ProblemOperators& ops, std::vector<FeFunction> basis)
{
    Subspace sub;
    sub.basis = std::move(basis);
    const int dim = sub.dim();
    sub.gram.assign(static_cast<size_t>(dim) * dim, 0.0);
    for (int j = 0; j < dim; ++j) {
        if (sub.basis[j].space->mesh_ptr() != ops.space->mesh_ptr()
            || static_cast<int>(sub.basis[j].coeffs.size()) != ops.space->n_dofs())
            throw InvalidInput("subspace basis function does not live on the context space");
        const Vector gw = ops.gram.multiply(sub.basis[j].coeffs);
        for (int i = 0; i < dim; ++i)
            sub.gram[static_cast<size_t>(i) * dim + j] = dot(sub.basis[i].coeffs, gw);
    }
    return sub;
}

FeFunction project_unit_Lperp(const MinimaxContext& ctx, const FeFunction& v)
{
    if (static_cast<int>(v.coeffs.size()) != ctx.ops.space->n_dofs())
        throw InvalidInput("direction does not live on the context space");

    const Vector gv = ctx.ops.gram.multiply(v.coeffs);
    const double input_norm = std::sqrt(std::max(0.0, dot(v.coeffs, gv)));

    Vector coeffs = v.coeffs;
    const int dim = ctx.L.dim();
    if (dim > 0) {
        Vector rhs(dim);
        for (int i = 0; i < dim; ++i)
            rhs[i] = dot(ctx.L.basis[i].coeffs, gv);
        const Vector c = dense_solve(ctx.L.gram, rhs);
        for (int i = 0; i < dim; ++i)
            axpy(-c[i], ctx.L.basis[i].coeffs, coeffs);
    }

    const double n = eps_norm(ctx.ops, coeffs);
    if (n < 1e-12 * std::max(1.0, input_norm))
        throw DegenerateDirection("direction lies in the frozen subspace");
    for (double& x : coeffs)
        x /= n;
    return {v.space, std::move(coeffs)};
}

PeakSelection peak_select_1d(const MinimaxContext& ctx, const FeFunction& v)
{
    return ray_peak(ctx, v, 1.0);
}

PeakSelection peak_select_scaled(const MinimaxContext& ctx, const FeFunction& v)
{
    return ray_peak(ctx, v, std::sqrt(ctx.ops.problem.epsilon));
}

HalfSpaceMax maximize_half_space(const HalfSpaceObjective& objective, int dim,
                                 const std::vector<double>& metric_gram, double t_init,
                                 double t_floor, const PeakSelectOptions& options)
{
    HalfSpaceMax state;
    state.a.assign(dim, 0.0);
    state.t = std::max(t_init, t_floor);
    state.value = objective.value(state.a, state.t);

    const int n = dim + 1;
    Vector grad_a(dim);
    double grad_t = 0.0;
    std::vector<double> hess(static_cast<size_t>(n) * n);
    double alpha_grad = 1.0;

    // One candidate direction per line search attempt, with its own initial
    // step length: Newton always restarts at 1, gradient steps remember the
    // scale that last worked.
    struct Candidate {
        Vector dir_a;
        double dir_t = 0.0;
        double alpha0 = 1.0;
        bool is_gradient = false;
    };

    for (int iter = 0; iter < options.max_ascent_iterations; ++iter) {
        objective.gradient(state.a, state.t, grad_a, grad_t);
        const bool pinned = state.t <= t_floor * (1.0 + 1e-9);

        // Convergence is measured on the projected gradient: at a pinned t
        // the inward-pointing component cannot be followed anyway.
        const double pg_t = pinned && grad_t < 0.0 ? 0.0 : grad_t;
        const Vector precond_a = dim > 0 ? dense_solve(metric_gram, grad_a) : Vector{};
        const double slope = dot(grad_a, precond_a) + pg_t * pg_t;
        state.gradient_norm = std::sqrt(std::max(0.0, slope));
        state.iterations = iter;

        if (state.gradient_norm <= options.ascent_grad_tol * std::max(1.0, std::abs(state.value))) {
            if (pinned)
                throw BoundaryDegeneracy("half-space maximizer pinned at the ray floor");
            return state;
        }

        std::vector<Candidate> candidates;
        if (objective.hessian) {
            objective.hessian(state.a, state.t, hess);
            Vector rhs(n);
            for (int i = 0; i < dim; ++i)
                rhs[i] = -grad_a[i];
            rhs[dim] = -grad_t;
            try {
                Vector s = dense_solve(hess, std::move(rhs));
                double ascent = grad_t * s[dim];
                for (int i = 0; i < dim; ++i)
                    ascent += grad_a[i] * s[i];
                if (ascent > 0.0) {
                    Candidate newton;
                    newton.dir_a.assign(s.begin(), s.begin() + dim);
                    newton.dir_t = s[dim];
                    candidates.push_back(std::move(newton));
                }
            } catch (const SolverError&) {
                // singular Hessian: the gradient candidate below remains
            }
        }
        {
            Candidate gradient;
            gradient.dir_a = precond_a;
            gradient.dir_t = pg_t;
            gradient.alpha0 = alpha_grad;
            gradient.is_gradient = true;
            candidates.push_back(std::move(gradient));
        }

        bool accepted = false;
        for (const Candidate& cand : candidates) {
            double alpha = cand.alpha0;
            for (int backtrack = 0; backtrack < 60; ++backtrack, alpha *= 0.5) {
                Vector a_try = state.a;
                axpy(alpha, cand.dir_a, a_try);
                const double t_try = std::max(state.t + alpha * cand.dir_t, t_floor);
                // Armijo condition on the realized displacement, which
                // differs from alpha * direction when the floor clamps t.
                const double gain =
                    alpha * dot(grad_a, cand.dir_a) + grad_t * (t_try - state.t);
                if (gain <= 0.0)
                    continue;
                const double value_try = objective.value(a_try, t_try);
                if (value_try >= state.value + 1e-4 * gain) {
                    // A step too small to change the iterate in double
                    // precision means the maximum is resolved as well as
                    // the arithmetic allows.
                    if (a_try == state.a && t_try == state.t) {
                        if (pinned)
                            throw BoundaryDegeneracy(
                                "half-space maximizer pinned at the ray floor");
                        return state;
                    }
                    state.a = std::move(a_try);
                    state.t = t_try;
                    state.value = value_try;
                    if (cand.is_gradient)
                        alpha_grad = std::min(alpha * 2.0, 1e6);
                    accepted = true;
                    break;
                }
            }
            if (accepted)
                break;
        }
        if (!accepted) {
            if (pinned && grad_t <= 0.0)
                throw BoundaryDegeneracy("half-space maximizer pinned at the ray floor");
            throw PeakSelectionFailure("half-space ascent line search failed");
        }
    }
    throw PeakSelectionFailure("half-space ascent exceeded its iteration cap");
}

PeakSelection peak_select_nd(const MinimaxContext& ctx, const FeFunction& v)
{
    check_unit_direction(ctx.ops, v);
    const int dim = ctx.L.dim();

    // The restricted ray through v alone provides the starting coefficient.
    const double c = ctx.ops.problem.epsilon < ctx.peak.scaled_threshold
        ? std::sqrt(ctx.ops.problem.epsilon)
        : 1.0;
    const double t_init = ray_peak(ctx, v, c).t;

    const auto assemble = [&](const Vector& a, double t) {
        FeFunction u{v.space, v.coeffs};
        for (double& x : u.coeffs)
            x *= t;
        for (int i = 0; i < dim; ++i)
            axpy(a[i], ctx.L.basis[i].coeffs, u.coeffs);
        return u;
    };

    // Basis of the restricted space in the coordinate order (a_0, ..., t)
    // along with everything the Hessian quadrature needs.
    const int n = dim + 1;
    std::vector<const FeFunction*> basis(n);
    for (int i = 0; i < dim; ++i)
        basis[i] = &ctx.L.basis[i];
    basis[dim] = &v;
    std::vector<Vector> basis_values(n);
    for (int i = 0; i < n; ++i)
        basis_values[i] = vertex_values(*basis[i]);

    // Linear part of the restricted Hessian: eps (grad z_i, grad z_j)
    // + (q z_i, z_j), independent of the evaluation point.
    std::vector<double> hess_static(static_cast<size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        Vector col = ctx.ops.stiffness.multiply(basis[j]->coeffs);
        for (double& x : col)
            x *= ctx.ops.problem.epsilon;
        if (ctx.ops.has_mass_q()) {
            const Vector mq = ctx.ops.mass_q.multiply(basis[j]->coeffs);
            axpy(1.0, mq, col);
        }
        for (int i = 0; i <= j; ++i) {
            const double s = dot(basis[i]->coeffs, col);
            hess_static[static_cast<size_t>(i) * n + j] = s;
            hess_static[static_cast<size_t>(j) * n + i] = s;
        }
    }

    HalfSpaceObjective objective;
    objective.value = [&](const Vector& a, double t) { return energy(ctx.ops, assemble(a, t)); };
    objective.gradient = [&](const Vector& a, double t, Vector& grad_a, double& grad_t) {
        const Vector b = assemble_semilinear_residual(ctx.ops, assemble(a, t));
        for (int i = 0; i < dim; ++i)
            grad_a[i] = dot(b, ctx.L.basis[i].coeffs);
        grad_t = dot(b, v.coeffs);
    };
    objective.hessian = [&](const Vector& a, double t, std::vector<double>& hess) {
        hess = hess_static;
        const FeSpace& space = *ctx.ops.space;
        const SemilinearProblem& p = ctx.ops.problem;
        const QuadratureRule& rule = triangle_quadrature(p.quadrature_degree);
        const Vector u_values = vertex_values(assemble(a, t));
        std::vector<double> z(n);
        for (int e = 0; e < space.mesh().n_elements(); ++e) {
            const ElementGeometry& g = space.geometry(e);
            const auto& el = space.mesh().element(e);
            for (const auto& q : rule.points) {
                const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                    + q.bary[2] * g.corner[2];
                const double uq = q.bary[0] * u_values[el[0]] + q.bary[1] * u_values[el[1]]
                    + q.bary[2] * u_values[el[2]];
                const double weight = g.area * q.weight * p.f_t(x, uq);
                for (int i = 0; i < n; ++i)
                    z[i] = q.bary[0] * basis_values[i][el[0]] + q.bary[1] * basis_values[i][el[1]]
                        + q.bary[2] * basis_values[i][el[2]];
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        const double d = weight * z[i] * z[j];
                        hess[static_cast<size_t>(i) * n + j] -= d;
                        if (i != j)
                            hess[static_cast<size_t>(j) * n + i] -= d;
                    }
            }
        }
    };

    const double t_floor = ctx.peak.t_floor_scale * std::max(1.0, ctx.domain_diameter);
    const HalfSpaceMax max = maximize_half_space(objective, dim, ctx.L.gram, t_init, t_floor,
                                                 ctx.peak);

    PeakSelection peak;
    peak.w = assemble(max.a, max.t);
    peak.t = max.t;
    peak.a = max.a;
    peak.energy = max.value;
    return peak;
}

PeakSelection peak_select(const MinimaxContext& ctx, const FeFunction& v)
{
    if (ctx.L.dim() > 0)
        return peak_select_nd(ctx, v);
    if (ctx.ops.problem.epsilon < ctx.peak.scaled_threshold)
        return peak_select_scaled(ctx, v);
    return peak_select_1d(ctx, v);
}

MinimaxState initial_state(const MinimaxContext& ctx, const FeFunction& v_unit)
{
    return {v_unit, peak_select(ctx, v_unit), 0};
}

int initial_bisection_exponent(double direction_norm)
{
    if (!(direction_norm > 0.0) || !std::isfinite(direction_norm))
        throw InvalidInput("direction norm must be positive and finite");
    int m = static_cast<int>(std::ceil(std::log2(direction_norm)));
    while (std::ldexp(1.0, m) <= direction_norm)
        ++m;
    while (std::ldexp(1.0, m - 1) > direction_norm)
        --m;
    return m;
}

StepSizeResult step_size(const MinimaxContext& ctx, const MinimaxState& state,
                         const FeFunction& d, double d_norm)
{
    if (!(d_norm > 0.0))
        throw InvalidInput("step_size requires a nonzero descent direction");
    if (d.coeffs.size() != state.v.coeffs.size())
        throw InvalidInput("descent direction and state dimensions differ");

    const int m0 = initial_bisection_exponent(d_norm);
    for (int m = m0; m <= m0 + 60; ++m) {
        const double s = std::ldexp(ctx.lambda, -m);

        FeFunction trial{state.v.space, state.v.coeffs};
        axpy(s, d.coeffs, trial.coeffs);

        FeFunction v_new;
        PeakSelection peak_new;
        try {
            v_new = project_unit_Lperp(ctx, trial);
            peak_new = peak_select(ctx, v_new);
        } catch (const PeakSelectionFailure&) {
            continue;
        } catch (const BoundaryDegeneracy&) {
            continue;
        }

        Vector dv = v_new.coeffs;
        axpy(-1.0, state.v.coeffs, dv);
        const double required = 0.5 * state.peak.t * d_norm * eps_norm(ctx.ops, dv);

        if (peak_new.energy - state.peak.energy <= -required) {
            StepSizeResult result;
            result.step = s;
            result.exponent = m;
            result.v_new = std::move(v_new);
            result.peak_new = std::move(peak_new);
            result.required_drop = required;
            return result;
        }
    }
    throw StepFailure("no step satisfied the energy decrease condition within 60 halvings");
}

MinimaxState minimax_step(const MinimaxContext& ctx, const MinimaxState& state,
                          const DiscreteResidual& residual, StepDiagnostics* diagnostics)
{
    if (!(residual.norm_eps > 0.0))
        throw InvalidInput("minimax_step called at a discrete critical point");

    StepSizeResult step = step_size(ctx, state, residual.direction, residual.norm_eps);

    if (diagnostics) {
        diagnostics->residual_norm = residual.norm_eps;
        diagnostics->duality_gap_rel = residual.duality_gap_rel;
        diagnostics->energy_drop = state.peak.energy - step.peak_new.energy;
        diagnostics->required_drop = step.required_drop;
        diagnostics->step = step.step;
        diagnostics->exponent = step.exponent;
        diagnostics->cg_iterations = residual.cg_iterations;
    }

    MinimaxState next;
    next.v = std::move(step.v_new);
    next.peak = std::move(step.peak_new);
    next.k = state.k + 1;
    return next;
}

MinimaxState minimax_step(const MinimaxContext& ctx, const MinimaxState& state,
                          StepDiagnostics* diagnostics)
{
    return minimax_step(ctx, state, discrete_residual(ctx.ops, state.peak.w), diagnostics);
}

} // namespace lmmg
