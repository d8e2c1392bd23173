#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <lmmg/errors.hpp>
#include <lmmg/fespace.hpp>
#include <lmmg/quadrature.hpp>

using namespace lmmg;

namespace {

/// Entry (i, j) of a CSR matrix, 0 when not stored.
double entry(const SparseMatrix& m, int i, int j)
{
    for (int k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k)
        if (m.columns()[k] == j)
            return m.values()[k];
    return 0.0;
}

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

/// Exact monomial integral over the reference triangle with corners
/// (0,0), (1,0), (0,1):  integral of x^a y^b = a! b! / (a + b + 2)!.
double reference_monomial_integral(int a, int b)
{
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

MeshPtr reference_triangle()
{
    return std::make_shared<const Triangulation>(
        std::vector<Vec2>{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}},
        std::vector<std::array<int, 3>>{{{0, 1, 2}}});
}

} // namespace

TEST_CASE("triangle quadrature integrates monomials exactly")
{
    CHECK_THROWS_AS(triangle_quadrature(0), InvalidInput);
    for (int degree = 1; degree <= 12; ++degree) {
        const auto& rule = triangle_quadrature(degree);
        CHECK(rule.degree >= degree);

        double weight_sum = 0.0;
        for (const auto& p : rule.points) {
            weight_sum += p.weight;
            CHECK(p.bary[0] + p.bary[1] + p.bary[2] == doctest::Approx(1.0).epsilon(1e-13));
            for (double b : p.bary) {
                CHECK(b >= 0.0);
                CHECK(b <= 1.0);
            }
        }
        CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-13));

        // On the reference triangle: x = bary[1], y = bary[2], |T| = 1/2.
        for (int a = 0; a + 0 <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                double quad = 0.0;
                for (const auto& p : rule.points)
                    quad += p.weight * std::pow(p.bary[1], a) * std::pow(p.bary[2], b);
                quad *= 0.5;
                CAPTURE(degree);
                CAPTURE(a);
                CAPTURE(b);
                CHECK(quad == doctest::Approx(reference_monomial_integral(a, b))
                                  .epsilon(1e-13));
            }
    }
}

TEST_CASE("dof numbering: boundary elimination and vertex order")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 4);
    const auto space = std::make_shared<FeSpace>(mesh);

    CHECK(space->n_dofs() == 9); // 25 vertices, 16 on the boundary

    int previous_vertex = -1;
    for (int d = 0; d < space->n_dofs(); ++d) {
        const int v = space->vertex_of_dof(d);
        CHECK(v > previous_vertex); // vertex-id order
        previous_vertex = v;
        CHECK_FALSE(mesh->is_boundary_vertex(v));
        CHECK(space->dof_of_vertex(v) == d);
    }
    for (int v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->is_boundary_vertex(v))
            CHECK(space->dof_of_vertex(v) == -1);

    for (int e = 0; e < mesh->n_elements(); ++e) {
        const auto dofs = space->element_dofs(e);
        for (int k = 0; k < 3; ++k) {
            const int v = mesh->element(e)[k];
            CHECK(dofs[k] == (mesh->is_boundary_vertex(v) ? -1 : space->dof_of_vertex(v)));
        }
    }

    const auto free_space = std::make_shared<FeSpace>(mesh, DofMode::all_free);
    CHECK(free_space->n_dofs() == 25);
}

TEST_CASE("reference triangle stiffness and mass matrices")
{
    const auto space = std::make_shared<FeSpace>(reference_triangle(), DofMode::all_free);

    const auto K = assemble_stiffness(*space);
    const double k_expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(entry(K, i, j) == doctest::Approx(k_expect[i][j]).epsilon(1e-14));

    const auto M = assemble_mass(*space, [](Vec2) { return 1.0; }, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(entry(M, i, j) == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0)
                                        .epsilon(1e-14));

    // Weighted mass, weight w(x, y) = x, against the monomial oracle:
    // (x phi_1, phi_1) = integral of x^3, (x phi_0, phi_1) = integral of
    // x^2 (1 - x - y).
    const auto Mx = assemble_mass(*space, [](Vec2 p) { return p.x; }, 3);
    CHECK(entry(Mx, 1, 1) == doctest::Approx(reference_monomial_integral(3, 0)));
    const double ref01 = reference_monomial_integral(2, 0) - reference_monomial_integral(3, 0)
        - reference_monomial_integral(2, 1);
    CHECK(entry(Mx, 0, 1) == doctest::Approx(ref01));

    // Gram = eps K + nu M entrywise.
    const auto G = assemble_gram(*space, 2.5, 0.3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(entry(G, i, j)
                  == doctest::Approx(2.5 * entry(K, i, j) + 0.3 * entry(M, i, j))
                         .epsilon(1e-13));
}

TEST_CASE("stiffness annihilates constants and gram is positive definite")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 4);
    const auto space = std::make_shared<FeSpace>(mesh, DofMode::all_free);

    const auto K = assemble_stiffness(*space);
    const Vector ones(space->n_dofs(), 1.0);
    for (double v : K.multiply(ones))
        CHECK(v == doctest::Approx(0.0).epsilon(1e-13));

    const auto G = assemble_gram(*space, 1e-3, 1.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vector x(space->n_dofs());
        for (auto& v : x)
            v = coeff(rng);
        CHECK(dot(x, G.multiply(x)) > 0.0);
    }
}

TEST_CASE("interpolated sine has the continuous Dirichlet energy")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 64);
    const auto space = std::make_shared<FeSpace>(mesh);
    const auto u = nodal_interpolant(space, [](Vec2 p) {
        return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
    });

    const auto K = assemble_stiffness(*space);
    const double dirichlet = dot(u.coeffs, K.multiply(u.coeffs));
    CHECK(dirichlet
          == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(5e-3));

    // Mass-matrix check of the L2 norm: integral of sin^2 sin^2 = 1/4.
    const auto M = assemble_mass(*space, [](Vec2) { return 1.0; }, 2);
    CHECK(dot(u.coeffs, M.multiply(u.coeffs)) == doctest::Approx(0.25).epsilon(5e-3));
}

TEST_CASE("vertex values scatter coefficients and zero the boundary")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 2);
    const auto space = std::make_shared<FeSpace>(mesh);
    auto u = zero_function(space);
    CHECK(static_cast<int>(u.coeffs.size()) == space->n_dofs());
    for (int d = 0; d < space->n_dofs(); ++d)
        u.coeffs[d] = d + 1.0;

    const auto values = vertex_values(u);
    REQUIRE(static_cast<int>(values.size()) == mesh->n_vertices());
    for (int v = 0; v < mesh->n_vertices(); ++v) {
        if (mesh->is_boundary_vertex(v))
            CHECK(values[v] == 0.0);
        else
            CHECK(values[v] == u.coeffs[space->dof_of_vertex(v)]);
    }
}

TEST_CASE("point location agrees with a brute-force walk")
{
    auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 3);
    mesh = refine(mesh, {0, 4, 7, 11});
    mesh = refine(mesh, {2, 3});
    const PointLocator locator(mesh);

    const auto brute = [&](Vec2 p) {
        for (int e = 0; e < mesh->n_elements(); ++e) {
            const auto& el = mesh->element(e);
            const Vec2 a = mesh->vertex(el[0]);
            const Vec2 b = mesh->vertex(el[1]);
            const Vec2 c = mesh->vertex(el[2]);
            const double area2 = cross(a, b, c);
            if (cross(a, b, p) >= -1e-14 * area2 && cross(b, c, p) >= -1e-14 * area2
                && cross(c, a, p) >= -1e-14 * area2)
                return e;
        }
        return -1;
    };

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coord(0.01, 0.99);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 p{coord(rng), coord(rng)};
        const int expected = brute(p);
        REQUIRE(expected >= 0);
        // Skip points within a whisker of an edge, where the tie-break
        // convention rather than geometry decides.
        const auto& el = mesh->element(expected);
        const Vec2 a = mesh->vertex(el[0]);
        const Vec2 b = mesh->vertex(el[1]);
        const Vec2 c = mesh->vertex(el[2]);
        const double area2 = cross(a, b, c);
        if (cross(a, b, p) < 1e-6 * area2 || cross(b, c, p) < 1e-6 * area2
            || cross(c, a, p) < 1e-6 * area2)
            continue;
        CHECK(locator.locate(p) == expected);
        ++compared;
    }
    CHECK(compared > 100);

    CHECK(locator.locate({-0.5, 0.5}) == -1);
    CHECK(locator.locate({0.5, 1.5}) == -1);
}

TEST_CASE("evaluate reproduces affine functions exactly")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 3);
    const auto space = std::make_shared<FeSpace>(mesh, DofMode::all_free);
    const auto affine = [](Vec2 p) { return 2.0 * p.x - 3.0 * p.y + 0.25; };
    const auto u = nodal_interpolant(space, affine);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    const PointLocator locator(mesh);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec2 p{coord(rng), coord(rng)};
        CHECK(evaluate(u, p) == doctest::Approx(affine(p)).epsilon(1e-13));
        CHECK(evaluate(u, locator, p) == doctest::Approx(affine(p)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(evaluate(u, {2.0, 2.0}), InvalidInput);
}

TEST_CASE("prolongation represents the coarse function exactly")
{
    const auto coarse_mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 2);
    const auto coarse = std::make_shared<FeSpace>(coarse_mesh);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    auto u = zero_function(coarse);
    for (auto& c : u.coeffs)
        c = coeff(rng);

    auto fine_mesh = refine(coarse_mesh, {0, 3, 5});
    fine_mesh = refine(fine_mesh, {1, 2, 8});
    const auto fine = std::make_shared<FeSpace>(fine_mesh);

    // Two-level prolongation through the intermediate space.
    const auto mid = std::make_shared<FeSpace>(fine_mesh->parent_mesh());
    const auto u_fine = prolongate(prolongate(u, mid), fine);

    std::uniform_real_distribution<double> coord(0.001, 0.999);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 p{coord(rng), coord(rng)};
        CHECK(evaluate(u_fine, p) == doctest::Approx(evaluate(u, p)).epsilon(1e-13));
    }

    // interpolate_onto takes the exact path on nested meshes.
    const auto via_interp = interpolate_onto(u, fine);
    for (int d = 0; d < fine->n_dofs(); ++d)
        CHECK(via_interp.coeffs[d] == doctest::Approx(u_fine.coeffs[d]).epsilon(1e-14));
}

TEST_CASE("interpolate_onto between unrelated meshes of the same square")
{
    const auto source_space =
        std::make_shared<FeSpace>(create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 3),
                                  DofMode::all_free);
    const auto target_space =
        std::make_shared<FeSpace>(create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 4));

    const auto affine = [](Vec2 p) { return 1.5 * p.x + 0.5 * p.y - 0.125; };
    const auto u = nodal_interpolant(source_space, affine);
    const auto v = interpolate_onto(u, target_space);

    for (int d = 0; d < target_space->n_dofs(); ++d) {
        const Vec2 p = target_space->mesh().vertex(target_space->vertex_of_dof(d));
        CHECK(v.coeffs[d] == doctest::Approx(affine(p)).epsilon(1e-12));
    }
}

TEST_CASE("mesh integration of pointwise integrands")
{
    const auto mesh = create_square_mesh({0.0, 0.0}, {1.0, 1.0}, 4);
    const FeSpace space(mesh);

    CHECK(integrate(space, 1, [](Vec2 p) { return p.x; }) == doctest::Approx(0.5));
    CHECK(integrate(space, 2, [](Vec2 p) { return p.x * p.y; }) == doctest::Approx(0.25));

    // The overload with the function value: integral of u^2 for the
    // interpolant of an affine function is exact at degree 2.
    const auto space_free = std::make_shared<FeSpace>(mesh, DofMode::all_free);
    const auto u = nodal_interpolant(space_free, [](Vec2 p) { return p.x + p.y; });
    // integral of (x + y)^2 over the unit square = 7/6.
    CHECK(integrate(u, 2, [](Vec2, double value) { return value * value; })
          == doctest::Approx(7.0 / 6.0).epsilon(1e-13));
}
