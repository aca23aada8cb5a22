// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "twophase/analysis.hpp"
#include "twophase/certification.hpp"
#include "twophase/cli.hpp"
#include "twophase/parallel.hpp"
#include "twophase/random.hpp"

using namespace twophase;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

BoundaryData radial_bump(GridPtr g) {
    return BoundaryData::from_profile(g, [](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); }, true);
}

bool is_minus_identity(const SymMatrix& M) {
    for (int i = 0; i < M.dim(); ++i)
        for (int j = 0; j < M.dim(); ++j)
            if (M(i, j) != (i == j ? -1.0 : 0.0)) return false;
    return true;
}

Outcome certification_matrix() {
    const std::size_t n = 10000;
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (int d : {1, 2}) {
        const Operator tr = make_trace(d), fr = make_frobenius(d);
        const auto a1t = certify_A1(tr, n, 0), a2t = certify_A2(tr, n, 0), a3t = certify_A3(tr, n, 0);
        const auto a1f = certify_A1(fr, n, 0), a2f = certify_A2(fr, n, 0), a3f = certify_A3(fr, n, 0);
        bool minus_i = false;
        for (const auto& v : a1f.violations) minus_i = minus_i || is_minus_identity(v.M);
        const bool samples = a1t.samples >= n && a2t.samples >= n && a3t.samples >= n && a1f.samples >= n &&
                             a2f.samples >= n && a3f.samples >= n;
        ok = ok && samples && a1t.pass && a2t.pass && !a3t.pass && !a1f.pass && a2f.pass && a3f.pass && minus_i;
        detail += fmt("d=%d trace A1/A2/A3 %s/%s/%s, frobenius %s/%s/%s (M=-I recorded: %s); ", d,
                      a1t.pass ? "pass" : "fail", a2t.pass ? "pass" : "fail", a3t.pass ? "pass" : "fail",
                      a1f.pass ? "pass" : "fail", a2f.pass ? "pass" : "fail", a3f.pass ? "pass" : "fail",
                      minus_i ? "yes" : "no");
    }
    const double t = seconds(t0);
    detail += fmt("%zu samples each, %.2f s", n, t);
    return {ok && t < 5.0, detail};
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    int pairs = 0, bad = 0;
    double worst = 0.0;
    for (int dim : {1, 2}) {
        for (int n : {33, 65}) {
            auto g = build_grid(dim, n);
            for (std::uint64_t s = 0; s < 6; ++s) {
                auto rng = sample_stream(2000 + 10 * dim + static_cast<std::uint64_t>(n), s);
                std::uniform_real_distribution<double> U(0.0, 1.0);
                std::normal_distribution<double> N(0.0, 1.0);
                ProblemConfig cfg;
                cfg.op = s % 2 ? make_frobenius(dim) : make_trace(dim);
                cfg.p = 2.0 + U(rng);
                cfg.gamma_plus = 2.0 * U(rng);
                cfg.gamma_minus = 2.0 * U(rng) - 0.5;
                cfg.boundary = BoundaryData::from_field(ScalarField(g), false);
                const double eps = s % 3 == 0 ? 1e-3 : 1e-2;
                const double c0 = N(rng), c1 = N(rng), c2 = N(rng), k = 1.0 + 2.0 * U(rng);
                auto u = ScalarField::from_function(g, [=](const Point& x) {
                    return c0 * (x[0] * x[0] + x[1] * x[1]) + c1 * std::sin(k * x[0]) + c2 * x[1] + 0.1;
                });
                ScalarField d(g);
                for (std::size_t i : g->interior_nodes()) d[i] = g->h() * (2.0 * U(rng) - 1.0);
                const EnergyOptions eo{eps, NegativeF::clamp};
                const auto gr = gradient(cfg, u, eo);
                double lin = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) lin += gr.grad[i] * d[i];
                const double t = 1e-6;
                ScalarField up = u, um = u;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    up[i] += t * d[i];
                    um[i] -= t * d[i];
                }
                const double fd = (evaluate(cfg, up, eo).total - evaluate(cfg, um, eo).total) / (2 * t);
                const double rel = std::abs(lin - fd) / std::abs(fd);
                worst = std::max(worst, rel);
                if (!(rel <= 1e-5)) ++bad;
                ++pairs;
            }
        }
    }
    const double t = seconds(t0);
    return {pairs >= 20 && bad == 0 && t < 30.0,
            fmt("%d pairs, worst relative error %.2e, %d above 1e-5, %.2f s", pairs, worst, bad, t)};
}

Outcome quartic_oracle() {
    const auto t0 = Clock::now();
    const double gamma = 1.0, a = 1.0;
    std::vector<double> err;
    std::string detail;
    bool ok = true;
    for (int n : {65, 129}) {
        auto g = build_grid(1, n);
        ProblemConfig cfg;
        cfg.op = make_trace(1);
        cfg.gamma_plus = gamma;
        cfg.gamma_minus = 0.0;
        cfg.boundary = BoundaryData::from_profile(g, [a](const Point&) { return a; }, true);
        const SolveResult r = minimize(cfg, g, SolveOptions{});
        double e = 0.0;
        for (std::size_t k : g->interior_nodes()) {
            const double x = g->coord(k)[0];
            e = std::max(e, std::abs(r.u_star[k] - (a - gamma * (x * x - 1.0) * (x * x - 5.0) / 48.0)));
        }
        const double h = g->h();
        ok = ok && r.converged && e <= 5 * h * h;
        detail += fmt("n=%d error %.3e (5h^2 = %.3e)%s; ", n, e, 5 * h * h, r.converged ? "" : " unconverged");
        err.push_back(e);
    }
    const double order = std::log2(err[0] / err[1]);
    const double t = seconds(t0);
    detail += fmt("order %.2f, %.2f s", order, t);
    return {ok && order >= 1.8 && t < 60.0, detail};
}

Outcome zero_data() {
    const auto t0 = Clock::now();
    auto g = build_grid(2, 65);
    ProblemConfig cfg;
    cfg.op = make_trace(2);
    cfg.gamma_plus = 1.0;
    cfg.gamma_minus = 1.0;
    cfg.boundary = BoundaryData::from_field(ScalarField(g), false);
    const SolveResult r = minimize(cfg, g, SolveOptions{});
    const SolutionPair pair = build_pair(cfg, r.u_star);
    double m_sup = 0.0;
    for (double v : pair.m.values) m_sup = std::max(m_sup, std::abs(v));
    const double energy = evaluate(cfg, r.u_star).total;
    const double t = seconds(t0);
    return {energy <= 1e-8 && m_sup == 0.0 && t < 10.0, fmt("I[u*] = %.3e, max |m| = %.3e, %.2f s", energy, m_sup, t)};
}

Outcome coercivity() {
    const auto t0 = Clock::now();
    int bad = 0;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        auto rng = sample_stream(5000, i);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const int dim = i % 2 ? 2 : 1;
        auto g = build_grid(dim, 33);
        ProblemConfig cfg;
        cfg.op = make_frobenius(dim);
        cfg.p = 1.5 + 2.5 * U(rng);
        cfg.gamma_plus = 2.0 * U(rng);
        cfg.gamma_minus = 2.0 * U(rng);
        cfg.boundary = BoundaryData::from_field(ScalarField(g), false);
        ScalarField u(g);
        const double amp = std::pow(10.0, -2.0 + 4.0 * U(rng));
        for (std::size_t k : g->non_exterior_nodes()) u[k] = amp * (2.0 * U(rng) - 1.0);
        const CoercivityCheck c = coercivity_check(cfg, u);
        const double rel = (c.rhs - c.lhs) / std::max(std::abs(c.rhs), 1e-300);
        worst = std::max(worst, rel);
        if (c.lhs < c.rhs - 1e-10 * std::abs(c.rhs)) ++bad;
    }
    const double t = seconds(t0);
    return {bad == 0 && t < 10.0, fmt("100 fields, %d violations, largest relative shortfall %.2e, %.2f s", bad, worst, t)};
}

struct RefinementRun {
    RefinementResult result;
    double seconds = 0.0;
};

RefinementRun convex_refinement() {
    const std::vector<GridPtr> grids{build_grid(2, 33), build_grid(2, 65), build_grid(2, 129)};
    ProblemConfig cfg;
    cfg.op = make_trace(2);
    cfg.p = 2.0;
    cfg.gamma_plus = 1.0;
    cfg.gamma_minus = 0.0;
    cfg.boundary = radial_bump(grids[0]);
    CheckSelection checks;
    checks.n_tests = 25;
    const auto t0 = Clock::now();
    RefinementRun r;
    r.result = refinement_driver(cfg, grids, SolveOptions{}, checks);
    r.seconds = seconds(t0);
    return r;
}

Outcome weak_residual(const RefinementRun& run) {
    const auto& levels = run.result.levels;
    if (levels.size() != 3) return {false, "refinement run stopped early: " + run.result.failure};
    std::vector<double> r;
    bool converged = true;
    for (const auto& l : levels) {
        r.push_back(l.residuals.el_residual_max);
        converged = converged && l.solve.converged;
    }
    const double o1 = std::log2(r[0] / r[1]), o2 = std::log2(r[1] / r[2]);
    const bool ok = converged && r[1] < r[0] && r[2] < r[1] && o1 >= 0.9 && o2 >= 0.9 && run.seconds < 600.0;
    return {ok, fmt("el_residual_max %.3e, %.3e, %.3e at n = 33, 65, 129; orders %.2f, %.2f; %s%.1f s", r[0], r[1],
                    r[2], o1, o2, converged ? "" : "unconverged solve; ", run.seconds)};
}

Outcome integrability_gain(const RefinementRun& run) {
    for (const auto& v : run.result.verdicts) {
        if (v.id != EstimateId::L44_2) continue;
        double lo = 1e300, hi = -1e300;
        std::string trace;
        for (const auto& [h, c] : v.refinement_trace) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            trace += fmt("%.4f ", c);
        }
        const bool ok = v.refinement_trace.size() == 3 && v.stable && hi - lo <= 0.5 * std::abs(hi);
        return {ok, fmt("fitted constants %s(variation %.1f%%)", trace.c_str(), 100.0 * (hi - lo) / std::abs(hi))};
    }
    return {false, "no L44_2 verdict"};
}

Outcome regularity_exponents() {
    const auto t0 = Clock::now();
    const double q = regularity_exponent(2, 3.0), alpha = holder_exponent(2, 3.0);
    const double identity = std::abs(alpha - (1.0 - 2.0 / q));
    const std::vector<GridPtr> grids{build_grid(2, 65), build_grid(2, 129)};
    ProblemConfig cfg;
    cfg.op = make_trace(2);
    cfg.p = 3.0;
    cfg.gamma_plus = 1.0;
    cfg.gamma_minus = 0.0;
    cfg.boundary = radial_bump(grids[0]);
    CheckSelection checks;
    checks.l44_1 = checks.l44_2 = checks.t44 = checks.p26 = false;
    checks.c45 = true;
    const RefinementResult r = refinement_driver(cfg, grids, SolveOptions{}, checks);
    bool ok = q == 4.0 && alpha == 0.5 && identity <= 1e-12 && r.verdicts.size() == 1 && r.verdicts[0].stable;
    std::string trace;
    if (!r.verdicts.empty())
        for (const auto& [h, s] : r.verdicts[0].refinement_trace) trace += fmt("%.4f ", s);
    const double t = seconds(t0);
    ok = ok && t < 600.0;
    return {ok, fmt("q = %g, alpha = %g, |alpha - (1 - d/q)| = %.1e; seminorm %sat n = 65, 129; %.1f s", q, alpha,
                    identity, trace.c_str(), t)};
}

Outcome free_boundary() {
    const auto t0 = Clock::now();
    auto g = build_grid(2, 65);
    const double h = g->h();
    double region = 0.0;
    for (std::size_t k : g->non_exterior_nodes()) region += g->weight(k);
    auto sign_changing = ScalarField::from_function(g, [](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return x[0] >= 0.0 ? std::max(r2 - 0.1, 0.0) : -std::max(r2 - 0.1, 0.0);
    });
    const FreeBoundary fb = extract_free_boundary(sign_changing, 0.0);
    const double sum = fb.positive_measure + fb.negative_measure + fb.zero_measure;
    const bool parts = fb.positive_measure > 0 && fb.negative_measure > 0 && fb.zero_measure > 0;
    const double sum_err = std::abs(sum - region) / region;

    const FreeBoundary half =
        extract_free_boundary(ScalarField::from_function(g, [](const Point& x) { return x[0]; }), 0.0);
    const double ep = std::abs(half.positive_measure - std::numbers::pi / 2);
    const double en = std::abs(half.negative_measure - std::numbers::pi / 2);
    const double t = seconds(t0);
    const bool ok = parts && sum_err <= 1e-14 && ep <= 2 * h && en <= 2 * h && t < 5.0;
    return {ok, fmt("phase sum relative mismatch %.1e; half-space |+| - pi/2 = %.4f, |-| - pi/2 = %.4f (2h = %.4f); %.2f s",
                    sum_err, ep, en, 2 * h, t)};
}

Outcome determinism(double criterion6_seconds) {
    RunConfig c = parse_run_config(
        "problem.operator = trace\nproblem.p = 2\nproblem.gamma_plus = 1\nproblem.gamma_minus = 0\n"
        "problem.boundary = radial_bump\ngrid.dim = 2\ngrid.n = 33, 65\nsolver.seed = 7\n");
    const auto t0 = Clock::now();
    RunOverrides one, four;
    one.threads = 1;
    four.threads = 4;
    const RunOutcome a = run_pipeline(c, one, false), b = run_pipeline(c, four, false);
    set_thread_count(0);
    const double t = seconds(t0);
    const bool same = a.exit_code == kExitOk && b.exit_code == kExitOk &&
                      strip_timings(a.report_json) == strip_timings(b.report_json);
    return {same && t < 2.0 * criterion6_seconds,
            fmt("threads 1 vs 4 reports %s, %.1f s (limit %.1f s)", same ? "identical" : "differ", t,
                2.0 * criterion6_seconds)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* title, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("criterion %2d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };
    report(1, "operator certification matrix", certification_matrix);
    report(2, "energy gradient vs central differences", gradient_check);
    report(3, "one-dimensional quartic oracle", quartic_oracle);
    report(4, "zero-data instance", zero_data);
    report(5, "coercivity invariant", coercivity);
    RefinementRun run;
    try {
        run = convex_refinement();
    } catch (const std::exception& e) {
        run.result.failure = e.what();
    }
    report(6, "weak Euler-Lagrange residual under refinement", [&] { return weak_residual(run); });
    report(7, "integrability gain constant", [&] { return integrability_gain(run); });
    report(8, "regularity exponents and Hoelder seminorm", regularity_exponents);
    report(9, "free-boundary partition", free_boundary);
    report(10, "determinism across thread counts", [&] { return determinism(run.seconds); });
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
