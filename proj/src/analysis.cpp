#include "twophase/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "twophase/error.hpp"
#include "twophase/parallel.hpp"
#include "twophase/random.hpp"

namespace twophase {

namespace {

bool in_radius(const Grid& g, std::size_t k, double radius) { return radius >= 1.0 || g.radius(k) < radius; }

double norm3(const std::array<double, 3>& v, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += v[a] * v[a];
    return std::sqrt(s);
}

double sup_abs(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t k : f.grid->non_exterior_nodes()) s = std::max(s, std::abs(f[k]));
    return s;
}

}  // namespace

double lq_norm(const ScalarField& f, double q, double radius) {
    if (!(q >= 1.0)) throw InputError("lq_norm: q must be at least 1");
    if (!(radius > 0.0 && radius <= 1.0)) throw InputError("lq_norm: radius must lie in (0, 1]");
    const Grid& g = *f.grid;
    double s = 0.0;
    for (std::size_t k : g.non_exterior_nodes())
        if (in_radius(g, k, radius)) s += std::pow(std::abs(f[k]), q) * g.weight(k);
    return std::pow(s, 1.0 / q);
}

double gain_exponent(int dim) { return dim == 1 ? 2.0 : dim / (dim - 1.0); }

double regularity_exponent(int dim, double p) {
    if (dim == 1) return std::max(1.0, 2.0 * (p - 1.0));
    return dim * (p - 1.0) / (dim - 1.0);
}

double holder_exponent(int dim, double p) {
    if (!(p > dim)) throw InputError("Hoelder estimate requires p > d (got p = " + std::to_string(p) + ", d = " +
                                     std::to_string(dim) + ")");
    return 1.0 - (dim - 1.0) / (p - 1.0);
}

double rhs_sup(const ProblemConfig& cfg) { return std::max(cfg.gamma_plus, std::abs(cfg.gamma_minus)) / cfg.p; }

double w2q_norm(const ScalarField& u, double q, double radius) {
    if (!(q >= 1.0)) throw InputError("w2q_norm: q must be at least 1");
    const Grid& g = *u.grid;
    double s = 0.0;
    for (std::size_t k : g.interior_nodes()) {
        if (!in_radius(g, k, radius)) continue;
        const double du = norm3(gradient_at(u, k), g.dim());
        const double d2u = hessian_at(u, k).frobenius_norm();
        s += (std::pow(std::abs(u[k]), q) + std::pow(du, q) + std::pow(d2u, q)) * g.weight(k);
    }
    return std::pow(s, 1.0 / q);
}

double holder_seminorm(const ScalarField& u, double alpha, int n_pairs, std::uint64_t seed, double radius) {
    const Grid& g = *u.grid;
    const int d = g.dim();
    const double h = g.h();
    auto snap = [&](const Point& x) {
        int i[2] = {0, 0};
        for (int a = 0; a < d; ++a) i[a] = static_cast<int>(std::lround((x[a] + 1.0) / h));
        return g.flat(i[0], i[1]);
    };
    std::vector<double> ratio(static_cast<std::size_t>(std::max(n_pairs, 0)), 0.0);
    parallel_for(ratio.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto rng = sample_stream(seed, i);
            std::uniform_real_distribution<double> unif(-radius, radius);
            auto draw = [&] {
                for (;;) {
                    Point x{};
                    double r2 = 0.0;
                    for (int a = 0; a < d; ++a) {
                        x[a] = unif(rng);
                        r2 += x[a] * x[a];
                    }
                    if (r2 < radius * radius) return x;
                }
            };
            for (int attempt = 0; attempt < 64; ++attempt) {
                const std::size_t kx = snap(draw()), ky = snap(draw());
                if (!g.is_interior(kx) || !g.is_interior(ky)) continue;
                if (!in_radius(g, kx, radius) || !in_radius(g, ky, radius)) continue;
                const Point x = g.coord(kx), y = g.coord(ky);
                double dist = 0.0;
                for (int a = 0; a < d; ++a) dist += (x[a] - y[a]) * (x[a] - y[a]);
                dist = std::sqrt(dist);
                if (dist < 2.0 * h * (1.0 - 1e-12)) continue;
                const auto gx = gradient_at(u, kx), gy = gradient_at(u, ky);
                std::array<double, 3> diff{gx[0] - gy[0], gx[1] - gy[1], gx[2] - gy[2]};
                ratio[i] = norm3(diff, d) / std::pow(dist, alpha);
                break;
            }
        }
    });
    double worst = 0.0;
    for (double r : ratio) worst = std::max(worst, r);
    return worst;
}

NormSuite compute_norms(const SolutionPair& pair, const ProblemConfig& cfg, int n_pairs, std::uint64_t seed) {
    const int d = pair.u.grid->dim();
    NormSuite s;
    s.l1_ball = lq_norm(pair.m, 1.0, 1.0);
    s.l1_half = lq_norm(pair.m, 1.0, 0.5);
    s.l_gain = lq_norm(pair.m, gain_exponent(d), 1.0);
    s.f_inf = rhs_sup(cfg);
    s.w2q_half = w2q_norm(pair.u, regularity_exponent(d, cfg.p), 0.5);
    s.u_inf = sup_abs(pair.u);
    if (cfg.p > d) {
        s.holder_alpha = holder_exponent(d, cfg.p);
        s.holder_seminorm = holder_seminorm(pair.u, *s.holder_alpha, n_pairs, seed);
    }
    return s;
}

std::string to_string(EstimateId id) {
    switch (id) {
        case EstimateId::L44_1: return "L44_1";
        case EstimateId::L44_2: return "L44_2";
        case EstimateId::T44: return "T44";
        case EstimateId::C45: return "C45";
        case EstimateId::P26: return "P26";
    }
    throw InternalError("unknown estimate id");
}

bool trace_is_stable(const std::vector<std::pair<double, double>>& trace) {
    if (trace.empty()) return true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [h, v] : trace) {
        if (!std::isfinite(v)) return false;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo <= 0.5 * std::abs(hi);
}

namespace {

EstimateVerdict single_level(EstimateId id, double h, double lhs,
                             std::vector<std::pair<std::string, double>> rhs, double fitted) {
    EstimateVerdict v;
    v.id = id;
    v.lhs = lhs;
    v.rhs_components = std::move(rhs);
    v.fitted_constant = fitted;
    v.tracked = fitted;
    v.refinement_trace = {{h, fitted}};
    v.stable = trace_is_stable(v.refinement_trace);
    return v;
}

}  // namespace

EstimateVerdict check_localization(const SolutionPair& pair, double f_inf) {
    const double l1 = lq_norm(pair.m, 1.0, 1.0), l1h = lq_norm(pair.m, 1.0, 0.5);
    return single_level(EstimateId::L44_1, pair.u.grid->h(), l1, {{"l1_half", l1h}, {"f_inf", f_inf}},
                        (l1 - l1h) / std::max(f_inf, 1e-12));
}

EstimateVerdict check_integrability_gain(const SolutionPair& pair, double f_inf) {
    const int d = pair.u.grid->dim();
    const double gain = lq_norm(pair.m, gain_exponent(d), 1.0), l1 = lq_norm(pair.m, 1.0, 1.0);
    const double denom = l1 + f_inf;
    auto v = single_level(EstimateId::L44_2, pair.u.grid->h(), gain, {{"l1_ball", l1}, {"f_inf", f_inf}},
                          denom > 0.0 ? gain / denom : 0.0);
    v.heuristic = d == 1;
    return v;
}

EstimateVerdict check_regularity(const SolutionPair& pair, const ProblemConfig& cfg) {
    if (!(cfg.p > 1.0)) throw InputError("regularity check: p must exceed 1");
    const int d = pair.u.grid->dim();
    const double q = regularity_exponent(d, cfg.p);
    const double lhs = w2q_norm(pair.u, q, 0.5);
    const double u_inf = sup_abs(pair.u);
    const double m_term = std::pow(lq_norm(pair.m, 1.0, 1.0), 1.0 / (cfg.p - 1.0));
    const double denom = u_inf + m_term;
    auto v = single_level(EstimateId::T44, pair.u.grid->h(), lhs, {{"u_inf", u_inf}, {"m_l1_root", m_term}},
                          denom > 0.0 ? lhs / denom : 0.0);
    v.heuristic = d == 1;
    return v;
}

EstimateVerdict check_holder(const SolutionPair& pair, const ProblemConfig& cfg, int n_pairs, std::uint64_t seed) {
    const int d = pair.u.grid->dim();
    const double alpha = holder_exponent(d, cfg.p);
    if (n_pairs < 100) throw InputError("Hoelder check: n_pairs must be at least 100");
    const double semi = holder_seminorm(pair.u, alpha, n_pairs, seed);
    const double u_inf = sup_abs(pair.u);
    const double m_term = std::pow(lq_norm(pair.m, 1.0, 1.0), 1.0 / (cfg.p - 1.0));
    const double denom = u_inf + m_term;
    EstimateVerdict v = single_level(EstimateId::C45, pair.u.grid->h(), u_inf + semi,
                                     {{"u_inf", u_inf}, {"m_l1_root", m_term}, {"alpha", alpha}, {"seminorm", semi}},
                                     denom > 0.0 ? (u_inf + semi) / denom : 0.0);
    v.tracked = semi;
    v.refinement_trace = {{pair.u.grid->h(), semi}};
    return v;
}

namespace {

struct PoincareSums {
    double du = 0.0;  // int |Du|^p
    double u = 0.0;   // int |u|^p
    double dv = 0.0;
    double v = 0.0;
};

// u = g + v, v supported on interior nodes; integrals over interior nodes.
PoincareSums poincare_sample(const ProblemConfig& cfg, std::uint64_t seed, std::size_t index) {
    const Grid& g = *cfg.grid();
    const int d = g.dim();
    auto rng = sample_stream(seed, index);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double amp = std::pow(10.0, -2.0 + 4.0 * unit(rng));
    ScalarField v(cfg.grid());
    const int kind = static_cast<int>(index % 3);
    struct Mode {
        std::array<double, 2> k;
        double phase, c;
    };
    std::vector<Mode> modes;
    for (int j = 0; j < 3; ++j) modes.push_back({{4.0 * unit(rng), 4.0 * unit(rng)}, 6.283185307179586 * unit(rng), normal(rng)});
    for (std::size_t k : g.interior_nodes()) {
        const Point x = g.coord(k);
        const double bump = 1.0 - g.radius(k) * g.radius(k);
        if (kind == 0) {
            double s = 0.0;
            for (const auto& m : modes) s += m.c * std::cos(m.k[0] * x[0] + (d > 1 ? m.k[1] * x[1] : 0.0) + m.phase);
            v[k] = amp * bump * s;
        } else if (kind == 1) {
            v[k] = amp * normal(rng);
        } else {
            v[k] = amp * bump;
        }
    }
    ScalarField u = v;
    for (std::size_t k : g.non_exterior_nodes()) u[k] += cfg.boundary.g[k];
    PoincareSums s;
    for (std::size_t k : g.interior_nodes()) {
        const double w = g.weight(k);
        s.du += std::pow(norm3(gradient_at(u, k), d), cfg.p) * w;
        s.u += std::pow(std::abs(u[k]), cfg.p) * w;
        s.dv += std::pow(norm3(gradient_at(v, k), d), cfg.p) * w;
        s.v += std::pow(std::abs(v[k]), cfg.p) * w;
    }
    return s;
}

}  // namespace

PoincareFit fit_poincare(const ProblemConfig& cfg, int n_train, int n_test, std::uint64_t seed) {
    if (n_train < 1 || n_test < 1) throw InputError("Poincare check: need at least one training and one test field");
    PoincareFit fit;
    fit.n_train = n_train;
    fit.n_test = n_test;
    const std::size_t total = static_cast<std::size_t>(n_train + n_test);
    std::vector<PoincareSums> sums(total);
    parallel_for(total, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) sums[i] = poincare_sample(cfg, seed, i);
    });
    fit.cp_estimate = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_train; ++i)
        if (sums[i].v > 0.0) fit.cp_estimate = std::min(fit.cp_estimate, sums[i].dv / sums[i].v);
    if (!std::isfinite(fit.cp_estimate)) throw NumericFailure("Poincare check: no usable training field");
    fit.c = 0.25 * fit.cp_estimate;
    fit.c1 = (1.0 - fit.c / fit.cp_estimate) * fit.cp_estimate / (4.0 * (1.0 + fit.cp_estimate));
    auto deficit = [&](const PoincareSums& s) { return fit.c1 * (s.du + s.u) - (s.du - fit.c * s.u); };
    double worst = 0.0;
    for (int i = 0; i < n_train; ++i) worst = std::max(worst, deficit(sums[i]));
    fit.c2 = 1.1 * worst;
    for (std::size_t i = static_cast<std::size_t>(n_train); i < total; ++i) {
        const double scale = sums[i].du + sums[i].u;
        if (deficit(sums[i]) > fit.c2 + 1e-12 * scale) ++fit.violations;
    }
    return fit;
}

EstimateVerdict check_poincare(const ProblemConfig& cfg, int n_train, int n_test, std::uint64_t seed) {
    const PoincareFit fit = fit_poincare(cfg, n_train, n_test, seed);
    EstimateVerdict v = single_level(EstimateId::P26, cfg.grid()->h(), fit.c1,
                                     {{"cp_estimate", fit.cp_estimate},
                                      {"c", fit.c},
                                      {"c2", fit.c2},
                                      {"violations", static_cast<double>(fit.violations)}},
                                     fit.c1);
    v.stable = v.stable && fit.violations == 0;
    return v;
}

FreeBoundary extract_free_boundary(const ScalarField& u, double tau) {
    if (!(tau >= 0.0)) throw InputError("extract_free_boundary: tau must be nonnegative");
    const Grid& g = *u.grid;
    FreeBoundary fb;
    fb.grid = u.grid;
    fb.tau = tau;
    fb.labels.assign(g.size(), 'x');
    for (std::size_t k : g.non_exterior_nodes()) {
        const char c = u[k] > tau ? '+' : (u[k] < -tau ? '-' : '0');
        fb.labels[k] = c;
        const double w = g.weight(k);
        if (c == '+') {
            fb.positive_cells.push_back(k);
            fb.positive_measure += w;
        } else if (c == '-') {
            fb.negative_cells.push_back(k);
            fb.negative_measure += w;
        } else {
            fb.zero_cells.push_back(k);
            fb.zero_measure += w;
        }
    }
    const int n = g.n();
    const int d = g.dim();
    std::vector<char> phase = fb.labels;
    for (std::size_t k : g.non_exterior_nodes()) {
        const char c = phase[k];
        if (c != '+' && c != '-') continue;
        const auto idx = g.multi_index(k);
        bool edge = false;
        for (int a = -1; a <= 1 && !edge; ++a)
            for (int b = (d == 2 ? -1 : 0); b <= (d == 2 ? 1 : 0) && !edge; ++b) {
                const int i1 = idx[0] + a, i2 = idx[1] + b;
                if (i1 < 0 || i1 >= n || i2 < 0 || (d == 2 && i2 >= n)) continue;
                const std::size_t j = g.flat(i1, i2);
                if (phase[j] != 'x' && phase[j] != c) edge = true;
            }
        if (edge) {
            fb.boundary_cells.push_back(k);
            fb.labels[k] = 'G';
        }
    }
    return fb;
}

ScalarField barrier_field(GridPtr grid, double delta) {
    if (!(delta > 0.0)) throw InputError("barrier_field: delta must be positive");
    return ScalarField::from_function(std::move(grid), [delta](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const double s = (1.0 + delta) * (1.0 + delta) - r2;
        return s * s;
    });
}

RefinementResult analyze_levels(const ProblemConfig& cfg, const std::vector<GridPtr>& grids, const SolveOptions& opts,
                                const CheckSelection& checks, int n_starts) {
    if (grids.empty()) throw InputError("analyze_levels: no grids");
    for (std::size_t i = 1; i < grids.size(); ++i)
        if (grids[i]->n() <= grids[i - 1]->n()) throw InputError("refinement_driver: grid sizes must increase strictly");
    if (checks.c45) holder_exponent(grids.front()->dim(), cfg.p);

    RefinementResult out;
    std::vector<EstimateId> ids;
    if (checks.l44_1) ids.push_back(EstimateId::L44_1);
    if (checks.l44_2) ids.push_back(EstimateId::L44_2);
    if (checks.t44) ids.push_back(EstimateId::T44);
    if (checks.c45) ids.push_back(EstimateId::C45);
    if (checks.p26) ids.push_back(EstimateId::P26);
    std::vector<std::vector<EstimateVerdict>> per_level;

    const double f_inf = rhs_sup(cfg);
    for (const GridPtr& grid : grids) {
        ProblemConfig level_cfg = cfg;
        if (grid != cfg.grid()) level_cfg.boundary = cfg.boundary.on(grid);
        SolveOptions o = opts;
        if (!out.levels.empty()) {
            o.init = InitKind::provided;
            o.initial = interpolate(out.levels.back().solve.u_star, grid);
        }
        RefinementLevel lvl;
        try {
            lvl.solve = n_starts > 1 ? multistart(level_cfg, grid, o, n_starts) : minimize(level_cfg, grid, o);
        } catch (const SolverFailure& e) {
            out.partial = true;
            out.failure = e.what();
            break;
        }
        lvl.n = grid->n();
        lvl.h = grid->h();
        lvl.pair = build_pair(level_cfg, lvl.solve.u_star);
        lvl.residuals =
            weak_residual_second_equation(lvl.pair, level_cfg, default_test_suite(*grid, checks.n_tests, checks.seed));
        lvl.norms = compute_norms(lvl.pair, level_cfg, checks.n_pairs, checks.seed);
        lvl.free_boundary = extract_free_boundary(lvl.solve.u_star, lvl.residuals.phase_tolerance);

        std::vector<EstimateVerdict> vs;
        for (EstimateId id : ids) {
            switch (id) {
                case EstimateId::L44_1: vs.push_back(check_localization(lvl.pair, f_inf)); break;
                case EstimateId::L44_2: vs.push_back(check_integrability_gain(lvl.pair, f_inf)); break;
                case EstimateId::T44: vs.push_back(check_regularity(lvl.pair, level_cfg)); break;
                case EstimateId::C45:
                    vs.push_back(check_holder(lvl.pair, level_cfg, checks.n_pairs, checks.seed));
                    break;
                case EstimateId::P26:
                    vs.push_back(check_poincare(level_cfg, checks.poincare_train, checks.poincare_test, checks.seed));
                    break;
            }
        }
        per_level.push_back(std::move(vs));
        out.levels.push_back(std::move(lvl));
    }

    bool unconverged = out.partial;
    for (const auto& lvl : out.levels) unconverged = unconverged || !lvl.solve.converged;
    for (std::size_t j = 0; j < ids.size(); ++j) {
        EstimateVerdict v;
        v.id = ids[j];
        bool inner_ok = true;
        for (const auto& level : per_level) {
            const EstimateVerdict& lv = level[j];
            v.refinement_trace.push_back(lv.refinement_trace.front());
            inner_ok = inner_ok && lv.stable;
            v.heuristic = lv.heuristic;
        }
        if (!per_level.empty()) {
            const EstimateVerdict& last = per_level.back()[j];
            v.lhs = last.lhs;
            v.rhs_components = last.rhs_components;
            v.fitted_constant = last.fitted_constant;
            v.tracked = last.tracked;
        }
        v.unconverged = unconverged;
        v.stable = !unconverged && inner_ok && trace_is_stable(v.refinement_trace);
        out.verdicts.push_back(std::move(v));
    }
    return out;
}

RefinementResult refinement_driver(const ProblemConfig& cfg, const std::vector<GridPtr>& grids,
                                   const SolveOptions& opts, const CheckSelection& checks) {
    if (grids.size() < 2) throw InputError("refinement_driver: need at least two grids");
    return analyze_levels(cfg, grids, opts, checks, 1);
}

}  // namespace twophase
