#include "twophase/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twophase/error.hpp"
#include "twophase/random.hpp"

namespace twophase {

std::string to_string(InitKind k) {
    switch (k) {
        case InitKind::boundary_extension: return "boundary_extension";
        case InitKind::zero: return "zero";
        case InitKind::random: return "random";
        case InitKind::provided: return "provided";
    }
    return "?";
}

InitKind init_kind_from_string(const std::string& s) {
    if (s == "boundary_extension") return InitKind::boundary_extension;
    if (s == "zero") return InitKind::zero;
    if (s == "random") return InitKind::random;
    if (s == "provided") return InitKind::provided;
    throw InputError("unknown init kind '" + s + "'");
}

void SolveOptions::validate() const {
    if (max_iters < 1) throw InputError("solver: max_iters must be at least 1");
    if (!(grad_tol > 0.0)) throw InputError("solver: grad_tol must be positive");
    if (eps_schedule.empty()) throw InputError("solver: eps_schedule is empty");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0)) throw InputError("solver: eps_schedule entries must be positive");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw InputError("solver: eps_schedule must be strictly decreasing");
    }
    if (!(step.initial_step > 0.0)) throw InputError("solver: initial_step must be positive");
    if (!(step.shrink > 0.0 && step.shrink < 1.0)) throw InputError("solver: shrink must lie in (0,1)");
    if (!(step.sufficient_decrease > 0.0 && step.sufficient_decrease < 1.0))
        throw InputError("solver: sufficient_decrease must lie in (0,1)");
    if (init == InitKind::provided && !initial) throw InputError("solver: init = provided but no field given");
}

double stationarity(const ScalarField& grad) {
    const Grid& g = *grad.grid;
    double m = 0.0;
    for (std::size_t k : g.interior_nodes()) m = std::max(m, std::abs(grad[k]) / g.weight(k));
    return m;
}

ScalarField boundary_extension(const BoundaryData& bd, int sweeps) {
    ScalarField u = bd.g;
    const Grid& g = *u.grid;
    const int d = g.dim();
    std::vector<double> next = u.values;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t k : g.interior_nodes()) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += u[k + g.stride(a)] + u[k - g.stride(a)];
            next[k] = s / (2.0 * d);
        }
        for (std::size_t k : g.interior_nodes()) u[k] = next[k];
    }
    return u;
}

namespace {

class Metric {
public:
    Metric(const Grid& g, bool preconditioned) : grid_(g), preconditioned_(preconditioned) {
        free_index_.assign(g.size(), -1);
        const auto& interior = g.interior_nodes();
        for (std::size_t i = 0; i < interior.size(); ++i) free_index_[interior[i]] = static_cast<long>(i);
        if (preconditioned_) factorize();
    }

    /// Direction d = P^{-1} grad on interior nodes.
    std::vector<double> direction(const ScalarField& grad) const {
        const auto& interior = grid_.interior_nodes();
        std::vector<double> out(interior.size());
        if (!preconditioned_) {
            for (std::size_t i = 0; i < interior.size(); ++i) out[i] = grad[interior[i]];
            return out;
        }
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior.size()));
        for (std::size_t i = 0; i < interior.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = grad[interior[i]];
        const Eigen::VectorXd sol = ldlt_.solve(rhs);
        for (std::size_t i = 0; i < interior.size(); ++i) out[i] = sol[static_cast<Eigen::Index>(i)];
        return out;
    }

private:
    using Stencil = std::vector<std::pair<std::size_t, double>>;

    void add_gram(std::vector<Eigen::Triplet<double>>& trip, const Stencil& st, double w) const {
        for (const auto& [ka, ca] : st) {
            const long ia = free_index_[ka];
            if (ia < 0) continue;
            for (const auto& [kb, cb] : st) {
                const long ib = free_index_[kb];
                if (ib < 0) continue;
                trip.emplace_back(ia, ib, w * ca * cb);
            }
        }
    }

    void factorize() {
        const Grid& g = grid_;
        const double inv_h2 = 1.0 / (g.h() * g.h());
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t k : g.interior_nodes()) {
            const double w = g.weight(k);
            for (int a = 0; a < g.dim(); ++a) {
                const std::ptrdiff_t s = g.stride(a);
                add_gram(trip, {{k + s, inv_h2}, {k, -2.0 * inv_h2}, {k - s, inv_h2}}, w);
            }
            if (g.dim() == 2) {
                const std::ptrdiff_t s0 = g.stride(0), s1 = g.stride(1);
                const double c = 0.25 * inv_h2;
                add_gram(trip, {{k + s0 + s1, c}, {k + s0 - s1, -c}, {k - s0 + s1, -c}, {k - s0 - s1, c}}, 2.0 * w);
            }
        }
        const auto m = static_cast<Eigen::Index>(g.interior_nodes().size());
        Eigen::SparseMatrix<double> Q(m, m);
        Q.setFromTriplets(trip.begin(), trip.end());
        ldlt_.compute(Q);
        if (ldlt_.info() != Eigen::Success) throw InternalError("solver: preconditioner factorization failed");
    }

    const Grid& grid_;
    bool preconditioned_;
    std::vector<long> free_index_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

ScalarField initial_field(const ProblemConfig& cfg, const SolveOptions& opts, double scale) {
    const GridPtr& grid = cfg.grid();
    switch (opts.init) {
        case InitKind::zero: return apply_trace(ScalarField(grid), cfg.boundary);
        case InitKind::provided: {
            const ScalarField& f = *opts.initial;
            ScalarField u = f.grid == grid ? f : interpolate(f, grid);
            return apply_trace(u, cfg.boundary);
        }
        case InitKind::random: {
            ScalarField u = boundary_extension(cfg.boundary, opts.jacobi_sweeps);
            auto rng = sample_stream(opts.seed, 0);
            std::uniform_real_distribution<double> noise(-0.01 * scale, 0.01 * scale);
            for (std::size_t k : grid->interior_nodes()) u[k] += noise(rng);
            return u;
        }
        case InitKind::boundary_extension: break;
    }
    return boundary_extension(cfg.boundary, opts.jacobi_sweeps);
}

bool finite(const ScalarField& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string numeric_failure_message(const char* what, int iteration, double eps) {
    std::ostringstream os;
    os << "solver: " << what << " at iteration " << iteration << " (eps = " << eps << ")";
    return os.str();
}

}  // namespace

SolveResult minimize(const ProblemConfig& cfg_in, const GridPtr& grid, const SolveOptions& opts) {
    opts.validate();
    ProblemConfig cfg = cfg_in;
    if (grid != cfg.grid()) cfg.boundary = cfg.boundary.on(grid);
    cfg.validate();

    const Grid& g = *grid;
    const auto& interior = g.interior_nodes();
    const double g_scale = cfg.boundary.sup_norm() > 0.0 ? cfg.boundary.sup_norm() : 1.0;
    const Metric metric(g, opts.preconditioned);
    const StepRule& rule = opts.step;
    const double max_step = 16.0 * rule.initial_step;

    SolveResult res;
    ScalarField x = initial_field(cfg, opts, g_scale);
    double initial_energy = std::numeric_limits<double>::quiet_NaN();
    bool stage_converged = false;

    for (double rel_eps : opts.eps_schedule) {
        const double eps = rel_eps * g_scale;
        const EnergyOptions eo = EnergyOptions::solve_path(eps);
        res.stage_eps.push_back(eps);
        res.stage_starts.push_back(res.energy_history.size());

        auto energy = [&](const ScalarField& u) { return evaluate(cfg, u, eo).total; };
        auto grad_of = [&](const ScalarField& u, int it) {
            GradientResult gr = gradient(cfg, u, eo);
            if (!finite(gr.grad)) throw NumericFailure(numeric_failure_message("non-finite gradient", it, eps));
            return std::move(gr.grad);
        };

        double e_x = energy(x);
        if (!std::isfinite(e_x)) throw NumericFailure(numeric_failure_message("non-finite energy", res.iterations, eps));
        if (std::isnan(initial_energy)) initial_energy = e_x;
        ScalarField grad_x = grad_of(x, res.iterations);
        res.energy_history.push_back(e_x);

        ScalarField x_prev = x;
        double theta = 1.0;
        double step = rule.initial_step;
        stage_converged = false;

        for (int it = 0; it < opts.max_iters; ++it) {
            if (stationarity(grad_x) <= opts.grad_tol) {
                stage_converged = true;
                break;
            }
            ++res.iterations;

            const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            const double beta = (theta - 1.0) / theta_next;
            ScalarField y = x;
            double e_y = e_x;
            ScalarField grad_y = grad_x;
            if (beta > 0.0) {
                for (std::size_t k : interior) y[k] = x[k] + beta * (x[k] - x_prev[k]);
                e_y = energy(y);
                grad_y = grad_of(y, res.iterations);
            }

            const std::vector<double> dir = metric.direction(grad_y);
            double slope = 0.0;
            for (std::size_t i = 0; i < interior.size(); ++i) slope += grad_y[interior[i]] * dir[i];

            // below this size energy differences are rounding noise, so the
            // line search falls back to the sign of the directional derivative
            const double noise = 1e-13 * (1.0 + std::abs(e_y));
            bool accepted = false;
            ScalarField z = y;
            ScalarField grad_z;
            double e_z = e_y;
            double t = step;
            if (slope > 0.0 && std::isfinite(e_y)) {
                for (int bt = 0; bt < 60; ++bt) {
                    for (std::size_t i = 0; i < interior.size(); ++i) z[interior[i]] = y[interior[i]] - t * dir[i];
                    e_z = energy(z);
                    if (e_z <= e_y - rule.sufficient_decrease * t * slope) {
                        accepted = true;
                        break;
                    }
                    if (t * slope <= noise && e_z <= e_y + noise) {
                        grad_z = grad_of(z, res.iterations);
                        double curv = 0.0;
                        for (std::size_t i = 0; i < interior.size(); ++i) curv += grad_z[interior[i]] * dir[i];
                        if (curv >= 0.0) {
                            accepted = true;
                            break;
                        }
                        grad_z.values.clear();
                    }
                    t *= rule.shrink;
                }
            }

            bool uphill = e_z > e_x + noise;
            if (accepted && !uphill && std::abs(e_z - e_x) <= noise) {
                double dot = 0.0;
                for (std::size_t k : interior) dot += grad_y[k] * (z[k] - x[k]);
                uphill = dot > 0.0;
            }
            if (!accepted || uphill) {
                if (beta > 0.0) {
                    // adaptive restart: drop the momentum and retry from x
                    theta = 1.0;
                    x_prev = x;
                    continue;
                }
                break;  // no descent left at this resolution
            }

            x_prev = std::move(x);
            x = std::move(z);
            e_x = e_z;
            grad_x = grad_z.values.empty() ? grad_of(x, res.iterations) : std::move(grad_z);
            theta = theta_next;
            step = std::min(t / rule.shrink, max_step);
            res.energy_history.push_back(e_x);

            if (e_x > 1e3 * std::max(std::abs(initial_energy), 1e-300) && e_x > initial_energy) {
                std::ostringstream os;
                os << "solver: energy diverged to " << e_x << " (initial " << initial_energy << ") at iteration "
                   << res.iterations;
                throw SolverFailure(os.str());
            }
        }
        if (!stage_converged && stationarity(grad_x) <= opts.grad_tol) stage_converged = true;
        res.grad_norm_final = stationarity(grad_x);
    }

    res.converged = stage_converged;
    res.u_star = std::move(x);
    const EnergyBreakdown fin = evaluate(cfg, res.u_star, EnergyOptions{0.0, NegativeF::clamp});
    res.final_energy = fin.total;
    res.clamp_count = fin.clamp_count;
    return res;
}

SolveResult multistart(const ProblemConfig& cfg, const GridPtr& grid, const SolveOptions& opts, int n_starts) {
    if (n_starts < 1) throw InputError("multistart: n_starts must be at least 1");
    std::vector<SolveResult> results;
    std::vector<std::string> failures;
    for (int s = 0; s < n_starts; ++s) {
        SolveOptions o = opts;
        if (s == 1) {
            o.init = opts.init == InitKind::zero ? InitKind::boundary_extension : InitKind::zero;
        } else if (s >= 2) {
            o.init = InitKind::random;
            o.seed = splitmix64(opts.seed + static_cast<std::uint64_t>(s));
        }
        try {
            results.push_back(minimize(cfg, grid, o));
        } catch (const SolverFailure& e) {
            failures.push_back("start " + std::to_string(s) + ": " + e.what());
        }
    }
    if (results.empty()) {
        std::string msg = "multistart: all starts failed";
        for (const auto& f : failures) msg += "; " + f;
        throw SolverFailure(msg);
    }
    std::size_t best = 0;
    double lo = results[0].final_energy, hi = lo;
    std::vector<double> energies;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const double e = results[i].final_energy;
        energies.push_back(e);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        if (e < results[best].final_energy) best = i;
    }
    SolveResult out = std::move(results[best]);
    out.start_energies = std::move(energies);
    out.energy_spread = hi - lo;
    out.best_start = best;
    return out;
}

}  // namespace twophase
