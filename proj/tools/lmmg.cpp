// Command line front end of the adaptive local minimax solver.
//
// Exit codes: 0 success, 2 configuration problems, 3 solver failure (the
// convergence history collected so far is still written).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lmmg/config.hpp>
#include <lmmg/io.hpp>
#include <lmmg/report.hpp>

namespace {

void print_summary(const lmmg::RunLog& log) {
    std::printf("r0 = %s on %ld elements\n", lmmg::format_full(log.r0).c_str(),
                log.initial_elements);
    for (const lmmg::GenerationRecord& r : log.records)
        std::printf("N=%d  elements=%ld  dofs=%ld  eta=%.6e  |R|=%.6e  E=%.10g  steps=%d\n",
                    r.generation, r.elements, r.dofs, r.eta, r.res_norm, r.energy,
                    r.minimax_steps);
    std::printf("total minimax steps: %ld, energy violations: %ld, max duality gap: %.3e\n",
                log.total_steps, log.energy_violations, log.max_duality_gap);
    for (const std::string& w : log.warnings)
        std::printf("warning: %s\n", w.c_str());
}

void write_outputs(const std::string& out_dir, const lmmg::RunLog& log,
                   const lmmg::FeFunction* solution, bool vtk) {
    std::filesystem::create_directories(out_dir);
    lmmg::write_run_csv(out_dir + "/history.csv", log);
    if (solution != nullptr) {
        lmmg::export_native(out_dir + "/solution", *solution);
        if (vtk)
            lmmg::export_vtk(out_dir + "/solution.vtk", *solution);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive local minimax solver for semilinear elliptic problems"};

    std::string preset = "lane_emden";
    std::string config_file;
    std::string out_dir = "out";
    std::vector<std::string> subspace;
    std::optional<double> gamma, lambda, theta, epsilon, eps_tol;
    std::optional<long> max_elements;
    std::optional<int> divisions;
    std::string refinement;
    bool vtk = false;

    app.add_option("--preset", preset, "Built-in problem preset")->capture_default_str();
    app.add_option("--config", config_file, "Configuration file of key = value lines");
    app.add_option("--gamma", gamma, "Estimator safety factor in the stopping test");
    app.add_option("--lambda", lambda, "Step size basis, s = lambda / 2^m");
    app.add_option("--theta", theta, "Bulk marking fraction");
    app.add_option("--epsilon", epsilon, "Diffusion coefficient override");
    app.add_option("--eps-tol", eps_tol, "Absolute residual target (0 disables)");
    app.add_option("--max-elements", max_elements, "Element budget");
    app.add_option("--divisions", divisions, "Initial mesh divisions per side");
    app.add_option("--refinement", refinement, "adaptive or uniform");
    app.add_option("--L", subspace,
                   "Solution stems (<stem>.mesh/<stem>.sol) spanning the search subspace")
        ->delimiter(',');
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--export-vtk", vtk, "Also write the solution as legacy VTK");

    CLI11_PARSE(app, argc, argv);

    lmmg::LmmgConfig config;
    try {
        config = lmmg::preset_config(preset);
        if (!config_file.empty())
            config = lmmg::parse_config_file(config_file, config);
        if (gamma)
            config.gamma = *gamma;
        if (lambda)
            config.lambda = *lambda;
        if (theta)
            config.theta = *theta;
        if (epsilon)
            config.epsilon = *epsilon;
        if (eps_tol)
            config.eps_tol = *eps_tol;
        if (max_elements)
            config.max_elements = *max_elements;
        if (divisions)
            config.initial_divisions = *divisions;
        if (!refinement.empty())
            lmmg::apply_config_key(config, "refinement", refinement);
        if (!subspace.empty())
            config.subspace_files = subspace;
    } catch (const lmmg::ConfigError& err) {
        std::fprintf(stderr, "configuration error: %s\n", err.what());
        return 2;
    }

    try {
        const lmmg::RunResult result = lmmg::run_lmmg(config);
        print_summary(result.log);
        write_outputs(out_dir, result.log, &result.solution, vtk);
        std::printf("wrote %s/history.csv\n", out_dir.c_str());
        return 0;
    } catch (const lmmg::ConfigError& err) {
        std::fprintf(stderr, "configuration error: %s\n", err.what());
        return 2;
    } catch (const lmmg::LmmgFailure& err) {
        std::fprintf(stderr, "solver failure: %s\n", err.what());
        try {
            write_outputs(out_dir, err.log, nullptr, false);
            std::fprintf(stderr, "partial history written to %s/history.csv\n", out_dir.c_str());
        } catch (const std::exception& io_err) {
            std::fprintf(stderr, "could not write partial history: %s\n", io_err.what());
        }
        return 3;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 3;
    }
}
