#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <lmmg/errors.hpp>
#include <lmmg/minimax.hpp>

namespace lmmg {

enum class RefinementMode { adaptive, uniform };

/// Everything a solver run needs.  Defaults reproduce the standard
/// adaptive setup on the unit square.
struct LmmgConfig {
    std::string problem = "lane_emden";
    /// Overrides the catalog diffusion coefficient when set.
    std::optional<double> epsilon;
    /// Overrides the catalog domain when both are set.
    std::optional<Vec2> domain_lo;
    std::optional<Vec2> domain_hi;

    double gamma = 0.25;   ///< estimator safety factor in the stopping test
    double lambda = 0.5;   ///< step size basis, s = lambda / 2^m
    double theta = 0.5;    ///< bulk marking fraction
    double eps_tol = 0.0;  ///< absolute residual target; 0 disables it
    long max_elements = 50000;
    int initial_divisions = 4;
    RefinementMode refinement = RefinementMode::adaptive;
    std::string initial_guess = "sine";

    /// Stems of previously exported solutions (<stem>.mesh/<stem>.sol)
    /// spanning the subspace the new search is orthogonalized against.
    std::vector<std::string> subspace_files;

    /// When nonempty, every completed generation is exported there as
    /// gen<N>.mesh / gen<N>.sol.
    std::string checkpoint_dir;

    int inner_iteration_cap = 200;  ///< per-generation minimax step budget
    double cg_rel_tol = 1e-10;
    PeakSelectOptions peak;
};

/// One row of the convergence history: the state of a generation at the
/// moment its stopping test was met.
struct GenerationRecord {
    int generation = 0;
    long elements = 0;
    long dofs = 0;
    double eta = 0.0;       ///< total error indicator
    double res_norm = 0.0;  ///< discrete residual norm
    double energy = 0.0;
    int minimax_steps = 0;  ///< steps this generation took
    double sigma = 0.0;     ///< mesh-scaled residual threshold
};

struct RunLog {
    /// Residual norm after the single bootstrap step on the initial mesh;
    /// it anchors the sigma thresholds of all later generations.
    double r0 = 0.0;
    long initial_elements = 0;
    /// One record per refined generation; each satisfies
    /// res_norm <= min(gamma * eta, sigma) by construction.
    std::vector<GenerationRecord> records;
    long total_steps = 0;
    long energy_violations = 0;  ///< minimax steps that failed to decrease E
    double max_duality_gap = 0.0;
    double min_energy_drop = std::numeric_limits<double>::infinity();
    std::vector<std::string> warnings;
};

struct RunResult {
    MeshPtr mesh;
    SpacePtr space;
    FeFunction solution;
    FeFunction direction;  ///< final unit search direction
    RunLog log;
};

/// Thrown when the solver gives up mid-run; carries the history collected
/// so far so callers can still persist it.
class LmmgFailure : public SolverError {
public:
    LmmgFailure(const std::string& what, RunLog partial)
        : SolverError(what), log(std::move(partial)) {}

    RunLog log;
};

/// Residual threshold tied to the mesh resolution: r0 / sqrt(elements).
double sigma_threshold(double r0, long elements);

/// Runs the full adaptive solve described by the configuration, loading
/// any subspace files it names.
RunResult run_lmmg(const LmmgConfig& config);

/// Same run with additional in-memory solutions spanning the subspace;
/// they may live on arbitrary meshes of the same initial geometry.
RunResult restart_with_subspace(const LmmgConfig& config,
                                const std::vector<FeFunction>& previous);

} // namespace lmmg
