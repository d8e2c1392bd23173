#pragma once

#include <functional>
#include <string>
#include <vector>

#include <lmmg/fespace.hpp>

namespace lmmg {

/// Data of the boundary value problem
///
///   -eps Laplace(u) + q(x) u = f(x, u)  in Omega,   u = 0 on the boundary,
///
/// together with the constants entering the solver's inner product.  The
/// reaction coefficient satisfies nu <= q(x) <= c_nu * nu with constant
/// nu >= 0; a null q stands for q identically 0 (and then nu = 0).  The
/// energy functional whose saddle points are sought is
///
///   E(u) = eps/2 |grad u|^2 + 1/2 (q u, u) - integral of F(x, u),
///
/// where F is the primitive of f in its second argument with F(x, 0) = 0.
/// All nonlinear integrals use a rule exact to quadrature_degree.
struct SemilinearProblem {
    std::string name;
    double epsilon = 1.0;
    double nu = 0.0;
    double c_nu = 0.0;
    std::function<double(Vec2)> q;
    std::function<double(Vec2, double)> f;
    std::function<double(Vec2, double)> f_t; ///< derivative of f in the second argument
    std::function<double(Vec2, double)> F;   ///< primitive of f in the second argument
    int quadrature_degree = 6;

    bool has_q() const { return static_cast<bool>(q); }
};

/// A catalog entry: the problem plus the rectangle it is posed on.
struct ProblemSetup {
    SemilinearProblem problem;
    Vec2 domain_lo;
    Vec2 domain_hi;
};

/// Built-in problems:
///   lane_emden             -Lap u = u^3            on (0,1)^2,   eps = 1
///   henon                  -Lap u + u = |x|^9 u^3  on (0,1)^2,   eps = 1
///   henon_q0               -Lap u = |x|^9 u^3      on (-1,1)^2,  eps = 1
///   henon_perturbed        eps = 1e-3 variant of henon
///   lane_emden_perturbed   -eps Lap u + u = u^3    on (0,1)^2,   eps = 1e-8
/// Unknown names are rejected.
ProblemSetup builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();

/// Sampled structure checks on the nonlinearity (f(x,0) = 0, dF/dt = f,
/// d f/dt matches f_t, f(x,t)/t nondecreasing for t > 0, q within
/// [nu, c_nu * nu] when nu > 0).  Violations come back as human-readable
/// warnings; an empty result means all sampled checks passed.
std::vector<std::string> validate_problem(const SemilinearProblem& p, Vec2 lo, Vec2 hi);

/// Matrices of one (problem, space) pair, assembled once and shared by the
/// solver loops: stiffness K, the q-weighted mass matrix, and the Gram
/// matrix eps K + nu M of the inner product
///   (u, v)_eps = eps (grad u, grad v) + nu (u, v).
struct ProblemOperators {
    ProblemOperators(SemilinearProblem problem, SpacePtr space);

    SemilinearProblem problem;
    SpacePtr space;
    SparseMatrix stiffness;
    SparseMatrix mass_q; ///< empty when q is identically 0
    SparseMatrix gram;

    bool has_mass_q() const { return mass_q.size() > 0; }
};

/// Residual vector of the energy functional: entry i equals
///   eps (grad u, grad phi_i) + (q u, phi_i) - (f(., u), phi_i),
/// i.e. the derivative of E at u against the basis function phi_i.
Vector assemble_semilinear_residual(const FeSpace& space, const SemilinearProblem& p,
                                    const FeFunction& u);
Vector assemble_semilinear_residual(const ProblemOperators& ops, const FeFunction& u);

double energy(const SemilinearProblem& p, const FeFunction& u);
double energy(const ProblemOperators& ops, const FeFunction& u);

/// Inner product and norm induced by the Gram matrix.
double eps_inner(const ProblemOperators& ops, const Vector& u, const Vector& v);
double eps_norm(const ProblemOperators& ops, const Vector& u);
double eps_inner(const SemilinearProblem& p, const FeFunction& u, const FeFunction& v);
double eps_norm(const SemilinearProblem& p, const FeFunction& u);

/// Square of the problem norm eps |grad v|^2 + (q v, v) that appears in
/// the scalar peak selection equation (it uses q itself, not the constant
/// lower bound nu of the Gram inner product).
double problem_norm_sq(const ProblemOperators& ops, const Vector& v);

/// One-pass quadrature of the two ray integrals used by scalar peak
/// selection at ray point factor * v:
///   f_v   = integral of f(x, factor v) v
///   ft_vv = integral of f_t(x, factor v) v^2
struct RayIntegrals {
    double f_v = 0.0;
    double ft_vv = 0.0;
};
RayIntegrals f_ray_integrals(const SemilinearProblem& p, const FeSpace& space,
                             const Vector& v_vertex_values, double factor);

/// Quadrature of the primitive along the same ray: integral of F(x, factor * v).
double F_ray_integral(const SemilinearProblem& p, const FeSpace& space,
                      const Vector& v_vertex_values, double factor);

/// Steepest descent data in the eps inner product: the direction d solves
/// (d, z)_eps = -<E'(u), z> for all z, so d = -riesz(E'(u)) and
/// norm_eps = |E'(u)| in the dual norm.
struct DiscreteResidual {
    FeFunction direction;
    double norm_eps = 0.0;
    double duality_gap_rel = 0.0; ///< |<E'(u), d> + norm_eps^2| / norm_eps^2 achieved by the solve
    long cg_iterations = 0;
};

DiscreteResidual discrete_residual(const SemilinearProblem& p, const FeFunction& u);
DiscreteResidual discrete_residual(const ProblemOperators& ops, const FeFunction& u,
                                   double rel_tol = 1e-10);

} // namespace lmmg
