#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <lmmg/config.hpp>
#include <lmmg/driver.hpp>
#include <lmmg/errors.hpp>
#include <lmmg/io.hpp>
#include <lmmg/report.hpp>

using namespace lmmg;

namespace {

std::filesystem::path fresh_dir(const std::string& tag)
{
    auto dir = std::filesystem::temp_directory_path() / ("lmmg_driver_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Invariants every completed run must satisfy, checked record by record.
void check_run_invariants(const LmmgConfig& config, const RunLog& log)
{
    CHECK(log.r0 > 0.0);
    CHECK(log.initial_elements == 2L * config.initial_divisions * config.initial_divisions);
    REQUIRE_FALSE(log.records.empty());
    CHECK(log.energy_violations == 0);
    CHECK(log.max_duality_gap <= 1e-10);
    CHECK(log.min_energy_drop > 0.0);

    long steps = 1; // the bootstrap step on the initial mesh
    long previous_elements = log.initial_elements;
    int expected_generation = 1;
    for (const auto& rec : log.records) {
        CAPTURE(rec.generation);
        CHECK(rec.generation == expected_generation++);
        CHECK(rec.elements > previous_elements);
        previous_elements = rec.elements;
        CHECK(rec.dofs > 0);
        CHECK(rec.dofs < rec.elements);
        CHECK(rec.eta > 0.0);
        CHECK(rec.sigma == doctest::Approx(sigma_threshold(log.r0, rec.elements)));

        // The stopping certificate that ended this generation.
        CHECK(rec.res_norm <= config.gamma * rec.eta * (1.0 + 1e-12));
        CHECK(rec.res_norm <= rec.sigma * (1.0 + 1e-12));
        CHECK(rec.minimax_steps >= 0);
        steps += rec.minimax_steps;
    }
    CHECK(log.total_steps == steps);
    CHECK(log.records.back().elements <= config.max_elements);
}

} // namespace

TEST_CASE("sigma threshold: definition and halving law")
{
    CHECK(sigma_threshold(1.0, 100) == doctest::Approx(0.1));
    CHECK(sigma_threshold(0.5, 64) == doctest::Approx(0.0625));
    // Doubling the element count divides sigma by sqrt(2).
    CHECK(sigma_threshold(1.0, 200)
          == doctest::Approx(sigma_threshold(1.0, 100) / std::sqrt(2.0)));
    CHECK_THROWS_AS(sigma_threshold(1.0, 0), InvalidInput);
    CHECK_THROWS_AS(sigma_threshold(1.0, -4), InvalidInput);
}

TEST_CASE("configuration validation rejects out-of-range values")
{
    const auto expect_rejected = [](auto&& mutate) {
        LmmgConfig config;
        config.max_elements = 500;
        mutate(config);
        CHECK_THROWS_AS(run_lmmg(config), ConfigError);
    };

    expect_rejected([](LmmgConfig& c) { c.gamma = 0.0; });
    expect_rejected([](LmmgConfig& c) { c.gamma = -0.25; });
    expect_rejected([](LmmgConfig& c) { c.lambda = 0.0; });
    expect_rejected([](LmmgConfig& c) { c.lambda = -0.5; });
    expect_rejected([](LmmgConfig& c) { c.theta = 0.0; });
    expect_rejected([](LmmgConfig& c) { c.theta = 1.2; });
    expect_rejected([](LmmgConfig& c) { c.eps_tol = -1.0; });
    expect_rejected([](LmmgConfig& c) { c.max_elements = 16; }); // below the initial mesh
    expect_rejected([](LmmgConfig& c) { c.initial_divisions = 0; });
    expect_rejected([](LmmgConfig& c) { c.initial_guess = "flat"; });
    expect_rejected([](LmmgConfig& c) { c.problem = "unknown_problem"; });
    expect_rejected([](LmmgConfig& c) { c.epsilon = -2.0; });
    expect_rejected([](LmmgConfig& c) { c.inner_iteration_cap = 0; });
    expect_rejected([](LmmgConfig& c) { c.cg_rel_tol = 0.0; });
    expect_rejected([](LmmgConfig& c) { c.domain_lo = Vec2{0.0, 0.0}; }); // missing hi
    expect_rejected([](LmmgConfig& c) {
        c.domain_lo = Vec2{1.0, 0.0};
        c.domain_hi = Vec2{0.0, 1.0}; // empty rectangle
    });
}

TEST_CASE("adaptive run: certificates, bookkeeping, solution shape")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 2000;

    const auto result = run_lmmg(config);
    check_run_invariants(config, result.log);

    // The returned mesh/space/solution triple is the last recorded state.
    const auto& last = result.log.records.back();
    CHECK(result.mesh->n_elements() == last.elements);
    CHECK(result.space->n_dofs() == last.dofs);
    CHECK(energy(builtin_problem("lane_emden").problem, result.solution)
          == doctest::Approx(last.energy).epsilon(1e-12));

    // Energy decreases from the first recorded generation to the last.
    CHECK(last.energy < result.log.records.front().energy);

    // The ground state of this problem is a single positive interior bump.
    double max_coeff = 0.0;
    double min_coeff = 0.0;
    for (double c : result.solution.coeffs) {
        max_coeff = std::max(max_coeff, c);
        min_coeff = std::min(min_coeff, c);
    }
    CHECK(max_coeff > 1.0);
    CHECK(min_coeff >= -1e-8 * max_coeff);
    const double center = evaluate(result.solution, {0.5, 0.5});
    CHECK(center == doctest::Approx(max_coeff).epsilon(0.05));

    // The final search direction is still a unit direction.
    CHECK(eps_norm(builtin_problem("lane_emden").problem, result.direction)
          == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("uniform mode refines everything and stops at the budget")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.refinement = RefinementMode::uniform;
    config.max_elements = 600;

    const auto result = run_lmmg(config);
    check_run_invariants(config, result.log);

    long expected = 64;
    REQUIRE(result.log.records.size() == 4); // 64, 128, 256, 512; 1024 > 600
    for (const auto& rec : result.log.records) {
        CHECK(rec.elements == expected);
        expected *= 2;
    }
    CHECK(mesh_statistics(*result.mesh).min_angle
          == doctest::Approx(std::atan(1.0)).epsilon(1e-12));
}

TEST_CASE("absolute tolerance ends the run early")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 50000;
    config.eps_tol = 0.05;

    const auto result = run_lmmg(config);
    check_run_invariants(config, result.log);
    CHECK(result.log.records.back().res_norm < 0.05);
    // The tolerance, not the budget, stopped this run.
    CHECK(result.log.records.back().elements < 50000);
}

TEST_CASE("checkpoints are written for every recorded generation")
{
    const auto dir = fresh_dir("checkpoints");
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 500;
    config.checkpoint_dir = dir.string();

    const auto result = run_lmmg(config);
    for (const auto& rec : result.log.records) {
        const auto stem = dir / ("gen" + std::to_string(rec.generation));
        CAPTURE(rec.generation);
        CHECK(std::filesystem::exists(stem.string() + ".mesh"));
        CHECK(std::filesystem::exists(stem.string() + ".sol"));
    }

    // The last checkpoint reproduces the returned solution bit for bit
    // (17 significant digits round-trip).
    const auto last = dir / ("gen" + std::to_string(result.log.records.back().generation));
    const auto reloaded = load_solution(last.string());
    CHECK(reloaded.space->mesh().n_elements() == result.mesh->n_elements());
    REQUIRE(reloaded.coeffs.size() == result.solution.coeffs.size());
    for (std::size_t i = 0; i < reloaded.coeffs.size(); ++i)
        CHECK(reloaded.coeffs[i] == result.solution.coeffs[i]);

    std::filesystem::remove_all(dir);
}

TEST_CASE("runs are deterministic")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 1000;

    const auto a = run_lmmg(config);
    const auto b = run_lmmg(config);
    CHECK(run_csv_text(a.log) == run_csv_text(b.log));
    CHECK(a.solution.coeffs == b.solution.coeffs);
}

TEST_CASE("restart with an empty subspace reproduces the plain run")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 800;

    const auto plain = run_lmmg(config);
    const auto restarted = restart_with_subspace(config, {});
    CHECK(run_csv_text(plain.log) == run_csv_text(restarted.log));
}

TEST_CASE("restart against the first solution finds a distinct higher state")
{
    LmmgConfig config;
    config.problem = "henon";
    config.max_elements = 3000;

    const auto first = run_lmmg(config);
    const auto second = restart_with_subspace(config, {first.solution});

    check_run_invariants(config, second.log);
    CHECK(second.log.records.back().energy
          > 1.5 * first.log.records.back().energy);

    // Compare the iterates on the second run's mesh: the new solution is
    // far from the span of the old one.
    const auto w1 = interpolate_onto(first.solution, second.space);
    const auto setup = builtin_problem("henon");
    const double n1 = eps_norm(setup.problem, w1);
    Vector diff = second.solution.coeffs;
    axpy(-1.0, w1.coeffs, diff);
    FeFunction diff_fn{second.space, diff};
    CHECK(eps_norm(setup.problem, diff_fn) > 0.1 * n1);

    // Loading the same subspace from exported files gives the same run.
    const auto dir = fresh_dir("subspace");
    const auto stem = (dir / "w1").string();
    export_native(stem, first.solution);
    auto config_files = config;
    config_files.subspace_files = {stem};
    const auto from_files = run_lmmg(config_files);
    CHECK(run_csv_text(from_files.log) == run_csv_text(second.log));
    std::filesystem::remove_all(dir);
}

TEST_CASE("a too-small step budget fails loudly but keeps the history")
{
    LmmgConfig config;
    config.problem = "lane_emden";
    config.max_elements = 2000;
    config.inner_iteration_cap = 1;

    try {
        run_lmmg(config);
        FAIL("expected LmmgFailure");
    } catch (const LmmgFailure& failure) {
        CHECK(std::string(failure.what()).find("generation") != std::string::npos);
        CHECK(failure.log.r0 > 0.0);
        CHECK(failure.log.total_steps >= 1);
    }
}

TEST_CASE("indicator slope and interpolation helpers")
{
    // Synthetic power law eta = 8 elements^{-1/2}.
    std::vector<GenerationRecord> records;
    for (int k = 0; k < 6; ++k) {
        GenerationRecord rec;
        rec.generation = k + 1;
        rec.elements = 100L << k;
        rec.eta = 8.0 / std::sqrt(static_cast<double>(rec.elements));
        records.push_back(rec);
    }

    CHECK(indicator_slope(records, 6) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(indicator_slope(records, 3) == doctest::Approx(-0.5).epsilon(1e-12));
    // Window larger than the list uses everything.
    CHECK(indicator_slope(records, 100) == doctest::Approx(-0.5).epsilon(1e-12));

    // The window applies to the tail: doctor the early records and make
    // sure a small window never sees them.
    auto doctored = records;
    doctored[0].eta *= 10.0;
    CHECK(indicator_slope(doctored, 3) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(indicator_slope(doctored, 6) != doctest::Approx(-0.5).epsilon(1e-3));

    // Log-log interpolation recovers the power law anywhere in range.
    CHECK(eta_at_elements(records, 1000.0)
          == doctest::Approx(8.0 / std::sqrt(1000.0)).epsilon(1e-12));
    // And extrapolates it outside.
    CHECK(eta_at_elements(records, 50.0)
          == doctest::Approx(8.0 / std::sqrt(50.0)).epsilon(1e-12));
    CHECK(eta_at_elements(records, 100000.0)
          == doctest::Approx(8.0 / std::sqrt(100000.0)).epsilon(1e-12));

    std::vector<GenerationRecord> too_few(1, records[0]);
    CHECK_THROWS_AS(indicator_slope(too_few, 4), InvalidInput);
    CHECK_THROWS_AS(eta_at_elements(too_few, 100.0), InvalidInput);
}

TEST_CASE("history CSV: golden text and round trip")
{
    RunLog log;
    log.r0 = 1.0;
    log.initial_elements = 32;
    GenerationRecord rec;
    rec.generation = 1;
    rec.elements = 64;
    rec.dofs = 25;
    rec.eta = 0.5;
    rec.res_norm = 0.125;
    rec.energy = 40.0;
    rec.minimax_steps = 3;
    rec.sigma = 0.125;
    log.records.push_back(rec);

    CHECK(run_csv_text(log)
          == "N,elements,dofs,eta,res_norm,energy,minimax_steps,sigma\n"
             "1,64,25,0.5,0.125,40,3,0.125\n");

    // Full-precision round trip through a file.
    rec.generation = 2;
    rec.elements = 128;
    rec.eta = 0.123456789012345678;
    rec.res_norm = 1.0 / 3.0;
    rec.energy = -37.730948759876543;
    rec.sigma = std::sqrt(2.0) * 1e-3;
    log.records.push_back(rec);

    const auto dir = fresh_dir("csv");
    const auto path = (dir / "history.csv").string();
    write_run_csv(path, log);
    const auto back = read_run_csv(path);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].generation == log.records[i].generation);
        CHECK(back[i].elements == log.records[i].elements);
        CHECK(back[i].dofs == log.records[i].dofs);
        CHECK(back[i].eta == log.records[i].eta);           // bitwise
        CHECK(back[i].res_norm == log.records[i].res_norm); // bitwise
        CHECK(back[i].energy == log.records[i].energy);     // bitwise
        CHECK(back[i].minimax_steps == log.records[i].minimax_steps);
        CHECK(back[i].sigma == log.records[i].sigma); // bitwise
    }
    std::filesystem::remove_all(dir);
}
