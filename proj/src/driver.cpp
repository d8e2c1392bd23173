#include <lmmg/driver.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <lmmg/estimator.hpp>
#include <lmmg/io.hpp>

namespace lmmg {
namespace {

void validate_config(const LmmgConfig& cfg) {
    if (!(cfg.gamma > 0.0))
        throw ConfigError("gamma must be positive");
    if (!(cfg.lambda > 0.0))
        throw ConfigError("lambda must be positive");
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0))
        throw ConfigError("theta must lie in (0, 1]");
    if (!(cfg.eps_tol >= 0.0))
        throw ConfigError("eps_tol must be nonnegative");
    if (cfg.initial_divisions < 1)
        throw ConfigError("initial_divisions must be at least 1");
    const long initial_elements = 2L * cfg.initial_divisions * cfg.initial_divisions;
    if (cfg.max_elements < initial_elements)
        throw ConfigError("max_elements is below the initial mesh size of " +
                          std::to_string(initial_elements) + " elements");
    if (cfg.inner_iteration_cap < 1)
        throw ConfigError("inner_iteration_cap must be at least 1");
    if (!(cfg.cg_rel_tol > 0.0))
        throw ConfigError("cg_rel_tol must be positive");
    if (cfg.initial_guess != "sine")
        throw ConfigError("unknown initial guess '" + cfg.initial_guess + "' (supported: sine)");
    if (cfg.epsilon && !(*cfg.epsilon > 0.0))
        throw ConfigError("epsilon must be positive");
    if (cfg.domain_lo.has_value() != cfg.domain_hi.has_value())
        throw ConfigError("a domain override needs both corners");
}

ProblemSetup resolve_setup(const LmmgConfig& cfg) {
    ProblemSetup setup = [&cfg] {
        try {
            return builtin_problem(cfg.problem);
        } catch (const InvalidInput& err) {
            // A bad problem name is a configuration mistake, not a solver
            // failure; rethrow so callers map it to the right exit path.
            throw ConfigError(err.what());
        }
    }();
    if (cfg.epsilon)
        setup.problem.epsilon = *cfg.epsilon;
    if (cfg.domain_lo) {
        setup.domain_lo = *cfg.domain_lo;
        setup.domain_hi = *cfg.domain_hi;
    }
    if (!(setup.domain_lo.x < setup.domain_hi.x && setup.domain_lo.y < setup.domain_hi.y))
        throw ConfigError("the domain rectangle is empty");
    return setup;
}

FeFunction sine_bump(SpacePtr space, Vec2 lo, Vec2 hi) {
    const double wx = hi.x - lo.x;
    const double wy = hi.y - lo.y;
    return nodal_interpolant(space, [=](Vec2 p) {
        return std::sin(std::numbers::pi * (p.x - lo.x) / wx) *
               std::sin(std::numbers::pi * (p.y - lo.y) / wy);
    });
}

std::vector<int> mark_all(int n_elements) {
    std::vector<int> marked(static_cast<size_t>(n_elements));
    for (int e = 0; e < n_elements; ++e)
        marked[e] = e;
    return marked;
}

RunResult run_impl(const LmmgConfig& cfg, std::vector<FeFunction> stored) {
    validate_config(cfg);
    const ProblemSetup setup = resolve_setup(cfg);
    const SemilinearProblem& problem = setup.problem;
    const double diameter = distance(setup.domain_lo, setup.domain_hi);

    for (const std::string& stem : cfg.subspace_files)
        stored.push_back(load_solution(stem));
    std::stable_sort(stored.begin(), stored.end(),
                     [&](const FeFunction& a, const FeFunction& b) {
                         return energy(problem, a) < energy(problem, b);
                     });

    if (!cfg.checkpoint_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.checkpoint_dir, ec);
        if (ec)
            throw IoError("cannot create checkpoint directory '" + cfg.checkpoint_dir +
                          "': " + ec.message());
    }

    RunLog log;
    MeshPtr mesh = create_square_mesh(setup.domain_lo, setup.domain_hi, cfg.initial_divisions);
    log.initial_elements = mesh->n_elements();

    SpacePtr space;
    MinimaxState state;
    FeFunction v_previous;

    for (int gen = 0;; ++gen) {
        space = std::make_shared<FeSpace>(mesh, DofMode::zero_boundary);
        ProblemOperators ops(problem, space);

        std::vector<FeFunction> basis;
        basis.reserve(stored.size());
        for (const FeFunction& s : stored)
            basis.push_back(interpolate_onto(s, space));
        const Subspace L = Subspace::build(ops, std::move(basis));
        const MinimaxContext ctx{ops, L, cfg.lambda, diameter, cfg.peak};

        try {
            FeFunction v0;
            if (gen == 0) {
                v0 = project_unit_Lperp(ctx, sine_bump(space, setup.domain_lo, setup.domain_hi));
                if (L.dim() > 0) {
                    // The search above the previous solutions only makes sense
                    // if moving off the best of them along v0 raises the
                    // energy.
                    const FeFunction& w_prev = L.basis.back();
                    FeFunction probe{space, w_prev.coeffs};
                    axpy(1e-3, v0.coeffs, probe.coeffs);
                    if (!(energy(ops, probe) > energy(ops, w_prev)))
                        log.warnings.push_back(
                            "initial direction is not an ascent direction at the previous "
                            "solution");
                }
            } else {
                v0 = project_unit_Lperp(ctx, prolongate(v_previous, space));
            }
            state = initial_state(ctx, v0);
        } catch (const SolverError& err) {
            throw LmmgFailure("generation " + std::to_string(gen) +
                                  ": initial peak selection failed: " + err.what(),
                              log);
        }

        const double sigma = gen == 0 ? 0.0 : sigma_threshold(log.r0, mesh->n_elements());
        DiscreteResidual res;
        ErrorIndicators indicators;
        for (;;) {
            try {
                res = discrete_residual(ops, state.peak.w, cfg.cg_rel_tol);
            } catch (const SolverError& err) {
                throw LmmgFailure("generation " + std::to_string(gen) +
                                      ": residual solve failed: " + err.what(),
                                  log);
            }
            log.max_duality_gap = std::max(log.max_duality_gap, res.duality_gap_rel);
            indicators = element_indicators(ops, state.peak.w);

            if (gen == 0) {
                if (state.k >= 1 || res.norm_eps == 0.0)
                    break;
            } else if (res.norm_eps <= cfg.gamma * indicators.total() && res.norm_eps <= sigma) {
                break;
            }
            if (state.k >= cfg.inner_iteration_cap)
                throw LmmgFailure("generation " + std::to_string(gen) + ": no convergence in " +
                                      std::to_string(cfg.inner_iteration_cap) + " minimax steps",
                                  log);

            StepDiagnostics diag;
            try {
                state = minimax_step(ctx, state, res, &diag);
            } catch (const SolverError& err) {
                throw LmmgFailure("generation " + std::to_string(gen) + ", step " +
                                      std::to_string(state.k) + ": " + err.what(),
                                  log);
            }
            ++log.total_steps;
            if (!(diag.energy_drop > 0.0))
                ++log.energy_violations;
            log.min_energy_drop = std::min(log.min_energy_drop, diag.energy_drop);
        }

        if (gen == 0) {
            log.r0 = res.norm_eps;
        } else {
            log.records.push_back({gen, mesh->n_elements(), space->n_dofs(), indicators.total(),
                                   res.norm_eps, state.peak.energy, state.k, sigma});
        }
        if (!cfg.checkpoint_dir.empty())
            export_native(cfg.checkpoint_dir + "/gen" + std::to_string(gen), state.peak.w);

        if (res.norm_eps == 0.0) {
            log.warnings.push_back("generation " + std::to_string(gen) +
                                   " hit an exact critical point");
            break;
        }
        if (cfg.eps_tol > 0.0 && res.norm_eps < cfg.eps_tol)
            break;

        std::vector<int> marked = cfg.refinement == RefinementMode::uniform
                                      ? mark_all(mesh->n_elements())
                                      : dorfler_mark(indicators.eta_sq, cfg.theta);
        if (marked.empty()) {
            log.warnings.push_back("generation " + std::to_string(gen) +
                                   ": error indicators vanished, nothing to refine");
            break;
        }
        MeshPtr next = refine(mesh, marked);
        if (next->n_elements() > cfg.max_elements)
            break;
        v_previous = state.v;
        mesh = next;
    }

    return RunResult{mesh, space, state.peak.w, state.v, std::move(log)};
}

} // namespace

double sigma_threshold(double r0, long elements) {
    if (elements <= 0)
        throw InvalidInput("sigma threshold needs a positive element count");
    return r0 / std::sqrt(static_cast<double>(elements));
}

RunResult run_lmmg(const LmmgConfig& config) {
    return run_impl(config, {});
}

RunResult restart_with_subspace(const LmmgConfig& config,
                                const std::vector<FeFunction>& previous) {
    return run_impl(config, previous);
}

} // namespace lmmg
