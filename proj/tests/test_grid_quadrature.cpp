#include <catch2/catch_amalgamated.hpp>

#include <sglab/field.hpp>
#include <sglab/grid.hpp>
#include <sglab/liouville.hpp>
#include <sglab/quadrature.hpp>

#include "oracles.hpp"

using namespace sglab;

TEST_CASE("build_grid basics")
{
    SECTION("64x64 grid integrates the unit disk area to 1e-12")
    {
        auto g = build_grid(64, 64, 1.0);
        double total = g->center_quad_weight;
        for (double w : g->quad_weights) total += w * g->n_theta;
        REQUIRE(std::abs(total - M_PI) < 1e-12);
    }
    SECTION("minimal 8x8 grid integrates the area to 1e-10")
    {
        auto g = build_grid(8, 8, 1.0);
        double total = g->center_quad_weight;
        for (double w : g->quad_weights) total += w * g->n_theta;
        REQUIRE(std::abs(total - M_PI) < 1e-10);
    }
    SECTION("odd angular count is rejected")
    {
        REQUIRE_THROWS_AS(build_grid(64, 63, 1.0), std::invalid_argument);
    }
    SECTION("non-positive sizes are rejected")
    {
        REQUIRE_THROWS_AS(build_grid(4, 64, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(build_grid(64, 4, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(build_grid(64, 64, -1.0), std::invalid_argument);
    }
    SECTION("radial nodes strictly increasing in (0, radius]")
    {
        for (double stretch : {1.0, 1.05}) {
            auto g = build_grid(32, 16, 0.7, stretch);
            REQUIRE(g->radial_nodes.front() > 0.0);
            REQUIRE(g->radial_nodes.back() == 0.7);
            for (int i = 1; i < g->n_r; ++i)
                REQUIRE(g->radial_nodes[i] > g->radial_nodes[i - 1]);
        }
    }
    SECTION("graded spacing ratio matches the stretch factor at the reference size")
    {
        auto g = build_grid(64, 16, 1.0, 1.05);
        const auto& r = g->radial_nodes;
        const double ratio = (r[33] - r[32]) / (r[32] - r[31]);
        REQUIRE(std::abs(ratio - 1.05) < 1e-10);
    }
}

TEST_CASE("area_integral")
{
    auto g = build_grid(128, 64, 1.0);

    SECTION("constant over the whole disk")
    {
        const double val = area_integral(*g, [](Vec2) { return 1.0; });
        REQUIRE(std::abs(val - M_PI) < 1e-10);
    }
    SECTION("constant over a sub-disk")
    {
        const double val = area_integral(*g, [](Vec2) { return 1.0; }, SubDisk{{0.0, 0.0}, 0.5});
        REQUIRE(std::abs(val - M_PI / 4.0) < 1e-8);
    }
    SECTION("bubble density over a sub-disk matches the adaptive radial oracle")
    {
        // oracle: adaptive 1-D integration of 8 l^2 rho / (1 + l^2 rho^2)^2 on [0, 0.5], times 2 pi
        const double lambda = 20.0;
        const double oracle = 2.0 * M_PI * oracles::integrate(
            [&](double rho) {
                const double t = 1.0 + lambda * lambda * rho * rho;
                return 8.0 * lambda * lambda * rho / (t * t);
            },
            0.0, 0.5);
        const double val = area_integral(
            *g, [&](Vec2 p) { return std::exp(bubble_profile(lambda, 1.0, norm(p))); },
            SubDisk{{0.0, 0.0}, 0.5});
        REQUIRE(std::abs(val - oracle) / oracle < 1e-6);
    }
    SECTION("region escaping the disk is rejected")
    {
        REQUIRE_THROWS_AS(area_integral(*g, [](Vec2) { return 1.0; }, SubDisk{{0.8, 0.0}, 0.5}),
                          std::invalid_argument);
    }
}

TEST_CASE("quadrature exactness invariants")
{
    SECTION("pure angular modes integrate to zero")
    {
        auto g = build_grid(64, 64, 1.0);
        for (int m : {1, 2, 3, 5}) {
            const double val = area_integral(*g, [m](Vec2 p) {
                const double r = norm(p), t = std::atan2(p.y, p.x);
                return r * r * std::cos(m * t);
            });
            REQUIRE(std::abs(val) < 1e-10);
        }
    }
    SECTION("radial monomials on a uniform 64-ring grid")
    {
        auto g = build_grid(64, 16, 1.0, 1.0);
        for (int k : {1, 2, 3, 4, 6}) {
            const double val = area_integral(*g, [k](Vec2 p) { return std::pow(norm(p), k); });
            const double exact = 2.0 * M_PI / (k + 2);
            REQUIRE(std::abs(val - exact) < 1e-8);
        }
    }
    SECTION("low-degree radial monomials are exact on graded grids")
    {
        auto g = build_grid(64, 16, 1.0, 1.05);
        for (int k : {1, 2, 3, 4, 5}) {
            const double val = area_integral(*g, [k](Vec2 p) { return std::pow(norm(p), k); });
            const double exact = 2.0 * M_PI / (k + 2);
            REQUIRE(std::abs(val - exact) < 1e-12);
        }
    }
    SECTION("refinement convergence is monotone for a smooth integrand")
    {
        auto f = [](Vec2 p) { return std::exp(p.x) * std::cos(2.0 * p.y); };
        std::vector<double> vals;
        for (int n : {32, 64, 128, 256})
            vals.push_back(area_integral(*build_grid(n, n, 1.0), f));
        const double d1 = std::abs(vals[0] - vals[1]);
        const double d2 = std::abs(vals[1] - vals[2]);
        const double d3 = std::abs(vals[2] - vals[3]);
        REQUIRE(d1 > d2);
        REQUIRE(d2 > d3);
    }
}

TEST_CASE("circle_average")
{
    SECTION("constant field")
    {
        auto g = build_grid(128, 128, 1.0);
        auto f = Field::sample(g, [](Vec2) { return 3.25; });
        REQUIRE(std::abs(circle_average(f, {{0.1, -0.2}, 0.3, 256}) - 3.25) < 1e-12);
    }
    SECTION("-(1/2pi) log|x| at r = 0.5")
    {
        auto g = build_grid(512, 16, 1.0, 1.0);
        auto f = Field::sample(g, [](Vec2 p) {
            const double r = std::max(norm(p), 1e-14);
            return -std::log(r) / (2.0 * M_PI);
        });
        const double expect = -std::log(0.5) / (2.0 * M_PI);
        REQUIRE(std::abs(circle_average(f, {{0.0, 0.0}, 0.5, 512}) - expect) < 1e-6);
    }
    SECTION("bubble profile is radial: average equals the 1-D profile value")
    {
        auto g = build_grid(2560, 16, 1.0, 1.0);
        const double lambda = 20.0;
        auto f = bubble_field({{0.0, 0.0}, lambda, +1, 1.0}, g);
        const double expect = oracles::bubble_profile(lambda, 1.0, 0.5);
        REQUIRE(std::abs(circle_average(f, {{0.0, 0.0}, 0.5, 512}) - expect) < 1e-6);
    }
    SECTION("radial fields equal their profile at several radii")
    {
        auto g = build_grid(512, 16, 1.0, 1.0);
        auto f = Field::sample(g, [](Vec2 p) { return std::cos(3.0 * norm(p)); });
        for (double r : {0.2, 0.45, 0.8})
            REQUIRE(std::abs(circle_average(f, {{0.0, 0.0}, r, 512}) - std::cos(3.0 * r)) < 1e-5);
    }
    SECTION("probe escaping the grid is rejected")
    {
        auto g = build_grid(64, 16, 1.0);
        auto f = Field::sample(g, [](Vec2) { return 0.0; });
        REQUIRE_THROWS_AS(circle_average(f, {{0.8, 0.0}, 0.5, 64}), std::invalid_argument);
    }
}

TEST_CASE("circle_oscillation")
{
    auto g = build_grid(128, 128, 1.0);

    SECTION("constant field has zero oscillation")
    {
        auto f = Field::sample(g, [](Vec2) { return -7.0; });
        REQUIRE(circle_oscillation(f, {{0.0, 0.0}, 0.5, 256}) == 0.0);
    }
    SECTION("linear field x.e1 on the r = 0.5 circle oscillates by 1")
    {
        auto f = Field::sample(g, [](Vec2 p) { return p.x; });
        REQUIRE(std::abs(circle_oscillation(f, {{0.0, 0.0}, 0.5, 512}) - 1.0) < 1e-6);
    }
    SECTION("off-center bubble vs dense 4096-point sampling oracle")
    {
        auto f = synth_family({{{{0.3, 0.0}, 50.0, +1, 1.0}}, 0.0}, g);
        const double osc = circle_oscillation(f, {{0.0, 0.0}, 0.6, 512});
        // oracle: dense sampling of the same interpolant
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < 4096; ++k) {
            const double t = 2.0 * M_PI * k / 4096;
            const double v = f(Vec2{0.6 * std::cos(t), 0.6 * std::sin(t)});
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        REQUIRE(osc > 0.0);
        REQUIRE(std::abs(osc - (hi - lo)) < 1e-4);
    }
}

TEST_CASE("interpolation caps and cell sizes")
{
    auto g = build_grid(64, 64, 1.0);
    auto f = Field::sample(g, [](Vec2 p) { return p.x + 2.0 * p.y; });
    SECTION("linear reproduction away from the origin")
    {
        REQUIRE(std::abs(f({0.37, 0.22}) - (0.37 + 0.44)) < 2e-3);
    }
    SECTION("points outside the disk are rejected")
    {
        REQUIRE_THROWS_AS(f({1.2, 0.0}), std::domain_error);
    }
    SECTION("cell size is positive and bounded by the coarse spacing")
    {
        REQUIRE(g->cell_size({0.0, 0.0}) > 0.0);
        REQUIRE(g->cell_size({0.9, 0.0}) < 0.2);
    }
}
