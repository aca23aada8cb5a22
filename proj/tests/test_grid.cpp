#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "twophase/error.hpp"
#include "twophase/grid.hpp"
#include "twophase/random.hpp"

using namespace twophase;
using std::numbers::pi;

TEST_CASE("build_grid") {
    SUBCASE("1-D, n = 9") {
        auto g = build_grid(1, 9);
        CHECK(g->h() == 0.25);
        CHECK(g->size() == 9);
        for (std::size_t k : g->interior_nodes()) {
            CHECK(g->coord(k)[0] > -1.0);
            CHECK(g->coord(k)[0] < 1.0);
        }
        CHECK(g->kind(0) != NodeKind::interior);
        CHECK(g->kind(8) != NodeKind::interior);
    }
    SUBCASE("2-D area") {
        auto g = build_grid(2, 65);
        CHECK(std::abs(g->measure() - pi) / pi <= 2.0 * g->h());
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(build_grid(3, 33), InputError);
        CHECK_THROWS_AS(build_grid(2, 32), InputError);
        CHECK_THROWS_AS(build_grid(2, 7), InputError);
        CHECK_THROWS_AS(build_grid(2, 33, 0.0), InputError);
    }
    SUBCASE("mask") {
        auto g = build_grid(2, 33);
        for (std::size_t k = 0; k < g->size(); ++k) {
            if (g->is_interior(k)) CHECK(g->radius(k) < 1.0 - 0.5 * g->h());
            if (g->kind(k) == NodeKind::band) CHECK(g->weight(k) >= 0.0);
            if (g->is_exterior(k)) CHECK(g->weight(k) == 0.0);
            if (g->is_interior(k)) CHECK(g->weight(k) == g->h() * g->h());
        }
        // every interior stencil stays on non-exterior nodes
        for (std::size_t k : g->interior_nodes()) {
            const auto idx = g->multi_index(k);
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b) CHECK_FALSE(g->is_exterior(g->flat(idx[0] + a, idx[1] + b)));
        }
    }
}

TEST_CASE("refining never turns an interior point exterior") {
    for (int dim : {1, 2}) {
        auto coarse = build_grid(dim, 17), fine = build_grid(dim, 33);
        for (std::size_t k : coarse->interior_nodes()) {
            const auto idx = coarse->multi_index(k);
            const std::size_t j = dim == 1 ? fine->flat(2 * idx[0]) : fine->flat(2 * idx[0], 2 * idx[1]);
            CHECK(fine->is_interior(j));
        }
    }
}

TEST_CASE("hessian stencils") {
    auto g = build_grid(2, 33);
    SUBCASE("x1^2") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return x[0] * x[0]; });
        for (std::size_t k : g->interior_nodes()) {
            const SymMatrix H = hessian_at(u, k);
            CHECK(H(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
            CHECK(std::abs(H(1, 1)) <= 1e-10);
            CHECK(std::abs(H(0, 1)) <= 1e-10);
        }
    }
    SUBCASE("x1 x2") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return x[0] * x[1]; });
        for (std::size_t k : g->interior_nodes()) CHECK(hessian_at(u, k)(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("random quadratics are differentiated exactly") {
        for (std::uint64_t s = 0; s < 10; ++s) {
            auto rng = sample_stream(3, s);
            std::normal_distribution<double> N(0.0, 1.0);
            const double q00 = N(rng), q01 = N(rng), q11 = N(rng), b0 = N(rng), b1 = N(rng), c = N(rng);
            auto u = ScalarField::from_function(g, [&](const Point& x) {
                return 0.5 * (q00 * x[0] * x[0] + 2 * q01 * x[0] * x[1] + q11 * x[1] * x[1]) + b0 * x[0] + b1 * x[1] + c;
            });
            const HessianField H = hessian(u);
            for (std::size_t k : g->interior_nodes()) {
                // rounding of second differences is about eps * |u| / h^2
                const double tol = 1e-12 / (g->h() * g->h()) * 10.0;
                CHECK(std::abs(H.values[k](0, 0) - q00) <= tol);
                CHECK(std::abs(H.values[k](0, 1) - q01) <= tol);
                CHECK(std::abs(H.values[k](1, 1) - q11) <= tol);
            }
        }
    }
    SUBCASE("second-order convergence on sin(x1) cos(x2)") {
        std::vector<double> err;
        for (int n : {17, 33, 65, 129}) {
            auto gn = build_grid(2, n);
            auto u = ScalarField::from_function(gn, [](const Point& x) { return std::sin(x[0]) * std::cos(x[1]); });
            double e = 0.0;
            for (std::size_t k : gn->interior_nodes()) {
                const Point x = gn->coord(k);
                const SymMatrix H = hessian_at(u, k);
                const double s = std::sin(x[0]) * std::cos(x[1]);
                const double c = std::cos(x[0]) * std::sin(x[1]);
                e = std::max({e, std::abs(H(0, 0) + s), std::abs(H(1, 1) + s), std::abs(H(0, 1) + c)});
            }
            err.push_back(e);
        }
        for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) >= 1.9);
    }
}

TEST_CASE("gradient stencil is exact on quadratics") {
    auto g = build_grid(2, 17);
    auto u = ScalarField::from_function(g, [](const Point& x) { return x[0] * x[0] + 3 * x[0] * x[1] - x[1]; });
    for (std::size_t k : g->interior_nodes()) {
        const Point x = g->coord(k);
        const auto d = gradient_at(u, k);
        CHECK(d[0] == doctest::Approx(2 * x[0] + 3 * x[1]).epsilon(1e-12).scale(1.0));
        CHECK(d[1] == doctest::Approx(3 * x[0] - 1).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("apply_trace") {
    auto g = build_grid(2, 17);
    auto u = ScalarField::from_function(g, [](const Point& x) { return 1.0 + x[0]; });
    SUBCASE("zero data") {
        ScalarField zero(g);
        BoundaryData bd;
        bd.g = zero;
        const ScalarField r = apply_trace(u, bd);
        for (std::size_t k = 0; k < g->size(); ++k) CHECK(r[k] == (g->is_interior(k) ? u[k] : 0.0));
    }
    SUBCASE("u equal to g is unchanged") {
        auto bd = BoundaryData::from_field(u, false);
        CHECK(apply_trace(u, bd).values == u.values);
    }
    SUBCASE("1 inside, 2 on the band") {
        auto bd = BoundaryData::from_profile(g, [](const Point&) { return 2.0; }, true);
        const ScalarField r = apply_trace(ScalarField(g, 1.0), bd);
        for (std::size_t k : g->non_exterior_nodes()) CHECK(r[k] == (g->is_interior(k) ? 1.0 : 2.0));
    }
}

TEST_CASE("boundary data enforces A4 when asked") {
    auto g = build_grid(2, 17);
    CHECK_THROWS_AS(BoundaryData::from_profile(g, [](const Point& x) { return x[0]; }, true), InputError);
    CHECK_THROWS_AS(BoundaryData::from_profile(g, [](const Point&) { return 0.0; }, true), InputError);
    CHECK_NOTHROW(BoundaryData::from_profile(g, [](const Point& x) { return x[0]; }, false));
    auto bd = BoundaryData::from_profile(g, [](const Point& x) { return 1.0 + x[0] * x[0]; }, true);
    auto fine = build_grid(2, 33);
    auto moved = bd.on(fine);
    CHECK(moved.g.grid == fine);
    for (std::size_t k : fine->non_exterior_nodes()) {
        const Point x = fine->coord(k);
        CHECK(moved.g[k] == doctest::Approx(1.0 + x[0] * x[0]));
    }
}

TEST_CASE("quadrature") {
    auto g = build_grid(2, 65);
    const double h = g->h();
    CHECK(std::abs(integrate(ScalarField(g, 1.0)) - pi) / pi <= 2 * h);
    CHECK(integrate(ScalarField(g, 0.0)) == 0.0);
    auto half = ScalarField::from_function(g, [](const Point& x) { return x[0] > 0.0 ? 1.0 : 0.0; });
    CHECK(std::abs(integrate(half) - pi / 2) / (pi / 2) <= 2 * h);

    auto f = ScalarField::from_function(g, [](const Point& x) { return std::cos(3 * x[0]) + x[1]; });
    auto q = ScalarField::from_function(g, [](const Point& x) { return x[0] * x[0]; });
    ScalarField lin(g);
    for (std::size_t k = 0; k < g->size(); ++k) lin[k] = 2.0 * f[k] - 3.0 * q[k];
    CHECK(integrate(lin) == doctest::Approx(2.0 * integrate(f) - 3.0 * integrate(q)).epsilon(1e-13));
    CHECK(integrate(q) >= 0.0);
}

TEST_CASE("interpolation reproduces affine fields") {
    auto coarse = build_grid(2, 17), fine = build_grid(2, 65);
    auto u = ScalarField::from_function(coarse, [](const Point& x) { return 2.0 * x[0] - x[1] + 0.5; });
    const ScalarField v = interpolate(u, fine);
    for (std::size_t k : fine->interior_nodes()) {
        const Point x = fine->coord(k);
        CHECK(v[k] == doctest::Approx(2.0 * x[0] - x[1] + 0.5).epsilon(1e-12).scale(1.0));
    }
    for (std::size_t k = 0; k < fine->size(); ++k)
        if (fine->is_exterior(k)) CHECK(v[k] == 0.0);
}

TEST_CASE("field CSV round trip") {
    for (int dim : {1, 2}) {
        auto g = build_grid(dim, 17);
        auto u = ScalarField::from_function(g, [](const Point& x) { return std::exp(x[0]) / 3.0 - x[1]; });
        std::stringstream ss;
        write_field_csv(ss, u);
        const ScalarField r = read_field_csv(ss, g);
        for (std::size_t k : g->non_exterior_nodes()) CHECK(r[k] == u[k]);
    }
    auto g = build_grid(2, 17);
    std::stringstream bad("x,y,value\n");
    CHECK_THROWS_AS(read_field_csv(bad, g), InputError);
    std::stringstream ss;
    write_field_csv(ss, ScalarField(build_grid(2, 33), 1.0));
    CHECK_THROWS_AS(read_field_csv(ss, g), InputError);
}
