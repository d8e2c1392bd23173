#pragma once

#include <functional>
#include <vector>

#include <lmmg/problem.hpp>

namespace lmmg {

/// Previously found solutions spanning the frozen subspace L, together
/// with their Gram matrix in the eps inner product.  The basis is kept in
/// order of increasing energy.  An empty basis means L = {0}.
struct Subspace {
    std::vector<FeFunction> basis;
    std::vector<double> gram; ///< dim x dim, row-major

    int dim() const { return static_cast<int>(basis.size()); }

    static Subspace build(const ProblemOperators& ops, std::vector<FeFunction> basis);
};

struct PeakSelectOptions {
    /// Problems with epsilon below this threshold use the rescaled ray
    /// functional, whose maximizer has a moderate coefficient even when
    /// the solution amplitude scales like sqrt(epsilon).
    double scaled_threshold = 1e-4;
    /// Accept the ray maximizer t once |g'(t)| <= root_rel_tol * Q * t,
    /// where Q is the squared problem norm of the direction.
    double root_rel_tol = 1e-10;
    /// Give up bracketing the ray maximizer beyond this coefficient.
    double bracket_limit = 1e12;
    int max_ascent_iterations = 500;
    /// The half-space ascent stops once the metric norm of the projected
    /// gradient drops below ascent_grad_tol * max(1, |E|); scaling by the
    /// objective keeps the target above the rounding floor of the energy
    /// evaluation.
    double ascent_grad_tol = 1e-8;
    /// t_floor = t_floor_scale * max(1, domain diameter).
    double t_floor_scale = 1e-8;
};

/// Everything a minimax iteration needs besides its state: the assembled
/// operators of the current space, the frozen subspace, and parameters.
struct MinimaxContext {
    const ProblemOperators& ops;
    const Subspace& L;
    double lambda = 0.5;
    double domain_diameter = 1.0;
    PeakSelectOptions peak;
};

/// Result of a peak selection: the local maximizer w = sum_i a_i w_i + t v
/// of the energy over the half-space spanned by L and the ray through v,
/// its coefficients, and its energy.
struct PeakSelection {
    FeFunction w;
    double t = 0.0;
    Vector a;
    double energy = 0.0;
};

/// Component of v orthogonal (in the eps inner product) to the subspace,
/// normalized to unit eps norm.  Directions whose orthogonal component
/// nearly vanishes are rejected as degenerate.
FeFunction project_unit_Lperp(const MinimaxContext& ctx, const FeFunction& v);

/// Maximizes E(t v) over t > 0 for a unit direction v by solving
///   g'(t) = t (eps |grad v|^2 + (q v, v)) - (f(., t v), v) = 0
/// with a bracketed Newton iteration (bisection fallback).  Requires L = {0}
/// semantics: the subspace plays no role here.
PeakSelection peak_select_1d(const MinimaxContext& ctx, const FeFunction& v);

/// Same maximizer, found through the rescaled functional
///   t -> E(sqrt(eps) t v) / eps,
/// which keeps the root near O(1) for singularly perturbed problems.
PeakSelection peak_select_scaled(const MinimaxContext& ctx, const FeFunction& v);

/// Maximizes E over { sum_i a_i w_i + t v : t >= t_floor } by metric
/// projected gradient ascent started from a = 0 and the restricted-ray
/// maximizer t_init.  A maximizer pinned at t_floor is reported as
/// boundary-degenerate.
PeakSelection peak_select_nd(const MinimaxContext& ctx, const FeFunction& v);

/// Dispatch: nd when L is nontrivial, otherwise scaled or plain depending
/// on epsilon.
PeakSelection peak_select(const MinimaxContext& ctx, const FeFunction& v);

/// Generic ascent core behind peak_select_nd, exposed so the search can be
/// exercised on synthetic objectives.  Maximizes value(a, t) over the
/// half-space t >= t_floor in the metric given by the subspace Gram matrix
/// (the t coordinate has unit metric weight).  When the optional hessian
/// callback is present the search takes safeguarded Newton steps and only
/// falls back to preconditioned gradient ascent where the Newton direction
/// is no ascent direction; without it every step is a gradient step.
struct HalfSpaceObjective {
    std::function<double(const Vector& a, double t)> value;
    std::function<void(const Vector& a, double t, Vector& grad_a, double& grad_t)> gradient;
    /// Fills the (dim+1) x (dim+1) row-major matrix of second derivatives
    /// in the coordinates (a_0, ..., a_{dim-1}, t).
    std::function<void(const Vector& a, double t, std::vector<double>& hess)> hessian;
};

struct HalfSpaceMax {
    Vector a;
    double t = 0.0;
    double value = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
};

HalfSpaceMax maximize_half_space(const HalfSpaceObjective& objective, int dim,
                                 const std::vector<double>& metric_gram, double t_init,
                                 double t_floor, const PeakSelectOptions& options);

/// State of the local minimax iteration on one space.
struct MinimaxState {
    FeFunction v;       ///< unit ascent direction, eps-orthogonal to L
    PeakSelection peak; ///< current iterate w with its coefficients and energy
    int k = 0;          ///< accepted steps on this space
};

MinimaxState initial_state(const MinimaxContext& ctx, const FeFunction& v_unit);

/// Minimal integer m with 2^m > direction_norm (m may be negative).
int initial_bisection_exponent(double direction_norm);

struct StepSizeResult {
    double step = 0.0; ///< lambda / 2^m
    int exponent = 0;  ///< accepted m
    FeFunction v_new;
    PeakSelection peak_new;
    double required_drop = 0.0; ///< (1/2) t |d| |v_new - v|, the decrease the step had to beat
};

/// Armijo-type search along the descent direction: starting from the
/// smallest m with 2^m > |d|, increase m until the trial
///   v(s) = project_unit_Lperp(v + s d),  s = lambda / 2^m,
/// satisfies the energy decrease condition
///   E(p(v(s))) - E(w) <= -(1/2) t |d| |v(s) - v|.
/// Fails after 60 unsuccessful halvings.
StepSizeResult step_size(const MinimaxContext& ctx, const MinimaxState& state,
                         const FeFunction& d, double d_norm);

struct StepDiagnostics {
    double residual_norm = 0.0;   ///< |R(w)| before the step; equals the eps norm of d
    double duality_gap_rel = 0.0; ///< relative defect of <E'(w), d> = -|R(w)|^2
    double energy_drop = 0.0;     ///< E(w_old) - E(w_new) > 0
    double required_drop = 0.0;
    double step = 0.0;
    int exponent = 0;
    long cg_iterations = 0;
};

/// One accepted step of the local minimax iteration, reusing a residual
/// the caller has already computed at state.peak.w.  Rejects calls at a
/// discrete critical point (zero residual).
MinimaxState minimax_step(const MinimaxContext& ctx, const MinimaxState& state,
                          const DiscreteResidual& residual, StepDiagnostics* diagnostics = nullptr);

/// Convenience overload that computes the residual itself.
MinimaxState minimax_step(const MinimaxContext& ctx, const MinimaxState& state,
                          StepDiagnostics* diagnostics = nullptr);

} // namespace lmmg
