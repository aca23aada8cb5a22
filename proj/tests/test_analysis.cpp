#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twophase/analysis.hpp"
#include "twophase/error.hpp"
#include "twophase/random.hpp"

using namespace twophase;
using std::numbers::pi;

namespace {

ProblemConfig make_cfg(BoundaryData bd, Operator op, double p, double gp, double gm) {
    ProblemConfig cfg;
    cfg.op = std::move(op);
    cfg.p = p;
    cfg.gamma_plus = gp;
    cfg.gamma_minus = gm;
    cfg.boundary = std::move(bd);
    return cfg;
}

SolutionPair pair_with(const ScalarField& u, const ScalarField& m, double p) {
    SolutionPair s{u, m, p, make_trace(u.grid->dim()), 0};
    return s;
}

double dist(const Point& x, const Point& y) { return std::hypot(x[0] - y[0], x[1] - y[1]); }

}  // namespace

TEST_CASE("lq_norm") {
    auto g = build_grid(2, 65);
    const double h = g->h();
    CHECK(std::abs(lq_norm(ScalarField(g, 1.0), 1.0) - pi) / pi <= 2 * h);
    CHECK(std::abs(lq_norm(ScalarField(g, 1.0), 2.0) - std::sqrt(pi)) / std::sqrt(pi) <= 2 * h);
    CHECK(lq_norm(ScalarField(g, 0.0), 1.0) == 0.0);
    CHECK(std::abs(lq_norm(ScalarField(g, 1.0), 1.0, 0.5) - pi / 4) / (pi / 4) <= 4 * h);
    CHECK_THROWS_AS(lq_norm(ScalarField(g, 1.0), 0.5), InputError);

    // subdomain monotonicity
    auto rng = sample_stream(31, 0);
    std::uniform_real_distribution<double> U(0.0, 5.0);
    for (int i = 0; i < 10; ++i) {
        ScalarField m(g);
        for (std::size_t k : g->interior_nodes()) m[k] = U(rng);
        CHECK(lq_norm(m, 1.0, 0.5) <= lq_norm(m, 1.0, 1.0));
    }
}

TEST_CASE("exponents") {
    CHECK(gain_exponent(2) == 2.0);
    CHECK(regularity_exponent(2, 3.0) == 4.0);
    CHECK(holder_exponent(2, 3.0) == 0.5);
    for (double p : {2.5, 3.0, 4.0, 7.25}) {
        const double q = regularity_exponent(2, p);
        CHECK(std::abs(holder_exponent(2, p) - (1.0 - 2.0 / q)) <= 1e-12);
    }
    CHECK_THROWS_AS(holder_exponent(2, 2.0), InputError);
    CHECK_THROWS_AS(holder_exponent(2, 1.5), InputError);
}

TEST_CASE("localization and integrability gain on constant densities") {
    auto g = build_grid(2, 65);
    const double h = g->h();
    const ScalarField u(g);
    SUBCASE("m = 0") {
        const auto pair = pair_with(u, ScalarField(g), 2.0);
        const auto v1 = check_localization(pair, 0.5);
        CHECK(v1.lhs == 0.0);
        CHECK(v1.fitted_constant == 0.0);
        for (const auto& [name, value] : v1.rhs_components)
            if (name != "f_inf") CHECK(value == 0.0);
        CHECK(v1.stable);
        const auto v2 = check_integrability_gain(pair, 0.5);
        CHECK(v2.lhs == 0.0);
        CHECK(v2.fitted_constant == 0.0);
        CHECK(v2.stable);
    }
    SUBCASE("m = 1") {
        const double f = 0.5;
        const auto pair = pair_with(u, ScalarField(g, 1.0), 2.0);
        const auto v1 = check_localization(pair, f);
        CHECK(std::abs(v1.fitted_constant * f - 3 * pi / 4) / (3 * pi / 4) <= 4 * h);
        const auto v2 = check_integrability_gain(pair, f);
        const double expect = std::sqrt(pi) / (pi + f);
        CHECK(std::abs(v2.fitted_constant - expect) / expect <= 4 * h);
    }
}

TEST_CASE("regularity check on the zero pair") {
    auto g = build_grid(2, 33);
    auto cfg = make_cfg(BoundaryData::from_field(ScalarField(g), false), make_trace(2), 2.0, 1.0, 0.0);
    const auto v = check_regularity(pair_with(ScalarField(g), ScalarField(g), 2.0), cfg);
    CHECK(v.lhs == 0.0);
    CHECK(v.fitted_constant == 0.0);
    CHECK(v.stable);
}

TEST_CASE("w2q_norm of half |x|^2") {
    // int_{B_1/2} |x|^4/4 + |x|^2 + 2 = 2 pi (1/1536 + 1/64 + 1/4)
    const double exact = std::sqrt(2 * pi * (1.0 / 1536 + 1.0 / 64 + 0.25));
    for (int n : {65, 129}) {
        auto g = build_grid(2, n);
        auto u = ScalarField::from_function(g, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
        CHECK(std::abs(w2q_norm(u, 2.0) - exact) / exact <= 4 * g->h());
    }
}

TEST_CASE("regularity lhs on the quartic") {
    // u = 1 - (x^2 - 1)(x^2 - 5)/48, q = 2 in one dimension; the node sum over
    // |x| < 1/2 is the trapezoid rule without its endpoint half-weights
    auto u0 = [](double x) { return 1.0 - (x * x - 1.0) * (x * x - 5.0) / 48.0; };
    auto u1 = [](double x) { return -(4.0 * x * x * x - 12.0 * x) / 48.0; };
    auto u2 = [](double x) { return (1.0 - x * x) / 4.0; };
    auto f = [&](double x) { return u0(x) * u0(x) + u1(x) * u1(x) + u2(x) * u2(x); };
    double exact = 0.0;
    const int panels = 20000;
    for (int i = 0; i <= panels; ++i) {
        const double x = -0.5 + static_cast<double>(i) / panels;
        exact += (i == 0 || i == panels ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f(x);
    }
    exact /= 3.0 * panels;
    for (int n : {65, 129, 257}) {
        auto g = build_grid(1, n);
        const double h = g->h();
        auto u = ScalarField::from_function(g, [&](const Point& x) { return u0(x[0]); });
        auto cfg = make_cfg(BoundaryData::from_field(ScalarField(g, 1.0), true), make_trace(1), 2.0, 1.0, 0.0);
        const auto v = check_regularity(pair_with(u, ScalarField(g), 2.0), cfg);
        CHECK(v.heuristic);
        const double sum = v.lhs * v.lhs;
        INFO("n = " << n);
        CHECK(std::abs(sum + h * f(0.5) - exact) <= h * h);
    }
}

TEST_CASE("Hoelder seminorm") {
    auto g = build_grid(2, 33);
    SUBCASE("affine") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return 1.0 + 2.0 * x[0] - x[1]; });
        CHECK(holder_seminorm(u, 0.5, 500, 0) <= 1e-12);
    }
    SUBCASE("half |x|^2 against brute force") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
        const double alpha = 0.5;
        std::vector<Point> pts;
        for (std::size_t k : g->interior_nodes())
            if (g->radius(k) < 0.5) pts.push_back(g->coord(k));
        double brute = 0.0;
        for (const Point& x : pts)
            for (const Point& y : pts) {
                const double r = dist(x, y);
                if (r >= 2 * g->h() * (1 - 1e-12)) brute = std::max(brute, std::pow(r, 1 - alpha));
            }
        const double sampled = holder_seminorm(u, alpha, 2000, 0);
        CHECK(brute <= 1.0);
        CHECK(sampled <= brute * (1 + 1e-12));
        CHECK(sampled >= 0.9 * brute);
    }
    SUBCASE("monotone in alpha") {
        // every sampled pair has |x - y| < 1, so |x - y|^-alpha grows with alpha
        auto u = ScalarField::from_function(g, [](const Point& x) { return std::sin(2 * x[0]) * std::cos(3 * x[1]); });
        double prev = 0.0;
        for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double s = holder_seminorm(u, alpha, 1000, 3);
            CHECK(s >= prev);
            prev = s;
        }
    }
    SUBCASE("reproducible") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return std::exp(x[0]) * x[1]; });
        CHECK(holder_seminorm(u, 0.5, 300, 9) == holder_seminorm(u, 0.5, 300, 9));
    }
    SUBCASE("check_holder preconditions") {
        auto cfg = make_cfg(BoundaryData::from_field(ScalarField(g), false), make_trace(2), 2.0, 1.0, 0.0);
        const auto pair = pair_with(ScalarField(g), ScalarField(g), 2.0);
        CHECK_THROWS_AS(check_holder(pair, cfg, 2000, 0), InputError);
        cfg.p = 3.0;
        CHECK_THROWS_AS(check_holder(pair, cfg, 10, 0), InputError);
        const auto v = check_holder(pair, cfg, 200, 0);
        CHECK(v.tracked == 0.0);
        CHECK(v.stable);
    }
}

TEST_CASE("trace stability") {
    CHECK(trace_is_stable({}));
    CHECK(trace_is_stable({{0.1, 0.0}, {0.05, 0.0}}));
    CHECK(trace_is_stable({{0.1, 1.0}, {0.05, 1.5}, {0.025, 2.0}}));
    CHECK_FALSE(trace_is_stable({{0.1, 1.0}, {0.05, 2.01}}));
    CHECK_FALSE(trace_is_stable({{0.1, 1.0}, {0.05, std::nan("")}}));
}

TEST_CASE("free boundary") {
    auto g = build_grid(2, 65);
    const double h = g->h();
    auto partition_ok = [&](const FreeBoundary& fb) {
        CHECK(fb.positive_cells.size() + fb.negative_cells.size() + fb.zero_cells.size() ==
              g->non_exterior_nodes().size());
        const double total = fb.positive_measure + fb.negative_measure + fb.zero_measure;
        CHECK(total == doctest::Approx(integrate(ScalarField(g, 1.0))).epsilon(1e-14));
        for (std::size_t k = 0; k < g->size(); ++k) CHECK((fb.labels[k] == 'x') == g->is_exterior(k));
    };
    SUBCASE("u = 1") {
        const auto fb = extract_free_boundary(ScalarField(g, 1.0), 0.0);
        CHECK(fb.positive_cells.size() == g->non_exterior_nodes().size());
        CHECK(fb.boundary_cells.empty());
        partition_ok(fb);
    }
    SUBCASE("u = x1") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return x[0]; });
        const auto fb = extract_free_boundary(u, 0.0);
        CHECK(std::abs(fb.positive_measure - pi / 2) <= 2 * h);
        CHECK(std::abs(fb.negative_measure - pi / 2) <= 2 * h);
        CHECK_FALSE(fb.boundary_cells.empty());
        for (std::size_t k : fb.boundary_cells) CHECK(std::abs(g->coord(k)[0]) <= h * (1 + 1e-12));
        for (std::size_t k : g->non_exterior_nodes())
            if (std::abs(std::abs(g->coord(k)[0]) - h) <= 1e-12) CHECK(fb.labels[k] == 'G');
        partition_ok(fb);
    }
    SUBCASE("plateau") {
        auto u = ScalarField::from_function(g, [](const Point& x) {
            return std::max(x[0] * x[0] + x[1] * x[1] - 1.0 / 16, 0.0);
        });
        const auto fb = extract_free_boundary(u, 0.0);
        CHECK(std::abs(fb.zero_measure - pi / 16) <= 2 * h);
        CHECK(fb.negative_cells.empty());
        CHECK_FALSE(fb.boundary_cells.empty());
        for (std::size_t k : fb.boundary_cells) {
            CHECK(g->radius(k) >= 0.25);
            CHECK(g->radius(k) <= 0.25 + std::sqrt(2.0) * h + 1e-12);
        }
        partition_ok(fb);
    }
    SUBCASE("tau widens the zero phase") {
        auto u = ScalarField::from_function(g, [](const Point& x) { return x[0]; });
        const auto fb = extract_free_boundary(u, 0.2);
        for (std::size_t k : fb.zero_cells) CHECK(std::abs(g->coord(k)[0]) <= 0.2);
        partition_ok(fb);
        CHECK_THROWS_AS(extract_free_boundary(u, -1.0), InputError);
    }
}

TEST_CASE("barrier field") {
    auto g = build_grid(2, 17);
    const double delta = 0.1;
    const ScalarField b = barrier_field(g, delta);
    for (std::size_t k = 0; k < g->size(); ++k) {
        const double r = g->radius(k);
        CHECK(b[k] == doctest::Approx(std::pow(std::pow(1 + delta, 2) - r * r, 2)));
        if (r <= 1.0) CHECK(b[k] >= std::pow(2 * delta + delta * delta, 2) * (1 - 1e-12));
    }
    CHECK(b[g->flat(8, 8)] == doctest::Approx(std::pow(1 + delta, 4)));
    CHECK_THROWS_AS(barrier_field(g, 0.0), InputError);
}

TEST_CASE("Poincare fit") {
    for (int dim : {1, 2}) {
        auto g = build_grid(dim, 33);
        auto cfg = make_cfg(BoundaryData::from_profile(g, [](const Point& x) { return 1.0 + 0.5 * x[0]; }, true),
                            make_trace(dim), 2.0, 1.0, 0.0);
        const PoincareFit fit = fit_poincare(cfg, 50, 100, 0);
        CHECK(fit.cp_estimate > 0.0);
        CHECK(fit.c < fit.cp_estimate);
        CHECK(fit.c1 > 0.0);
        CHECK(fit.violations == 0);
        const auto v = check_poincare(cfg, 50, 100, 0);
        CHECK(v.fitted_constant == fit.c1);
        CHECK(v.stable);
    }
    auto g = build_grid(2, 17);
    auto cfg = make_cfg(BoundaryData::from_field(ScalarField(g, 1.0), true), make_trace(2), 2.0, 1.0, 0.0);
    CHECK_THROWS_AS(fit_poincare(cfg, 0, 10, 0), InputError);
}

TEST_CASE("refinement driver") {
    const std::vector<GridPtr> grids{build_grid(2, 33), build_grid(2, 65)};
    auto cfg = make_cfg(BoundaryData::from_profile(grids[0], [](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); }, true),
                        make_frobenius(2), 2.0, 1.0, 0.0);
    CheckSelection checks;
    checks.n_pairs = 500;

    SUBCASE("shape and stability on a convex instance") {
        const RefinementResult r = refinement_driver(cfg, grids, SolveOptions{}, checks);
        CHECK_FALSE(r.partial);
        REQUIRE(r.levels.size() == 2);
        CHECK(r.levels[0].n == 33);
        CHECK(r.levels[1].n == 65);
        REQUIRE(r.verdicts.size() == 4);
        const EstimateId ids[] = {EstimateId::L44_1, EstimateId::L44_2, EstimateId::T44, EstimateId::P26};
        for (std::size_t i = 0; i < 4; ++i) {
            INFO(to_string(r.verdicts[i].id));
            CHECK(r.verdicts[i].id == ids[i]);
            REQUIRE(r.verdicts[i].refinement_trace.size() == 2);
            CHECK(r.verdicts[i].refinement_trace[0].first == grids[0]->h());
            CHECK(r.verdicts[i].refinement_trace[1].first == grids[1]->h());
            CHECK_FALSE(r.verdicts[i].unconverged);
            CHECK(r.verdicts[i].stable);
        }
        for (const auto& lvl : r.levels) {
            CHECK(lvl.solve.converged);
            CHECK(lvl.norms.l1_half <= lvl.norms.l1_ball);
            CHECK_FALSE(lvl.norms.holder_alpha.has_value());
        }
    }
    SUBCASE("an unconverged solve is flagged") {
        SolveOptions o;
        o.max_iters = 1;
        const RefinementResult r = refinement_driver(cfg, grids, o, checks);
        for (const auto& v : r.verdicts) {
            CHECK(v.unconverged);
            CHECK_FALSE(v.stable);
        }
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(refinement_driver(cfg, {grids[0]}, SolveOptions{}, checks), InputError);
        CHECK_THROWS_AS(refinement_driver(cfg, {grids[1], grids[0]}, SolveOptions{}, checks), InputError);
        CheckSelection c45 = checks;
        c45.c45 = true;
        CHECK_THROWS_AS(refinement_driver(cfg, grids, SolveOptions{}, c45), InputError);
    }
}
