#include "twophase/system_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twophase/error.hpp"
#include "twophase/parallel.hpp"
#include "twophase/random.hpp"

namespace twophase {

SolutionPair build_pair(const ProblemConfig& cfg, const ScalarField& u) {
    const Grid& g = *u.grid;
    if (cfg.op.dim() != g.dim()) throw InputError("build_pair: operator dimension does not match the grid");
    SolutionPair pair{u, ScalarField(u.grid), cfg.p, cfg.op, 0};
    const auto& interior = g.interior_nodes();
    std::vector<unsigned char> clamped(interior.size(), 0);
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t k = interior[i];
            const double f = cfg.op.eval(hessian_at(u, k), g.coord(k));
            if (f < 0.0) clamped[i] = 1;
            pair.m[k] = f > 0.0 ? std::pow(f, cfg.p - 1.0) : 0.0;
        }
    });
    for (unsigned char c : clamped) pair.clamped_count += c;
    return pair;
}

double check_first_equation(const SolutionPair& pair) {
    const Grid& g = *pair.u.grid;
    const auto& interior = g.interior_nodes();
    std::vector<double> r(interior.size());
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t k = interior[i];
            const double f = pair.op.eval(hessian_at(pair.u, k), g.coord(k));
            const double mk = pair.m[k];
            const double root = mk > 0.0 ? std::pow(mk, 1.0 / (pair.p - 1.0)) : 0.0;
            r[i] = std::abs(f - root);
        }
    });
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, v);
    return worst;
}

namespace {

double dist2(const Point& x, const Point& c, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
    return s;
}

double halton(std::uint64_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

double unit_from_bits(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace

bool TestFunction::contains(const Point& x, int dim) const { return dist2(x, center, dim) < radius * radius; }

double TestFunction::value(const Point& x, int dim) const {
    const double s = dist2(x, center, dim) / (radius * radius);
    if (s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s));
}

SymMatrix TestFunction::hessian(const Point& x, int dim) const {
    SymMatrix H = SymMatrix::zero(dim);
    const double r2 = radius * radius;
    const double s = dist2(x, center, dim) / r2;
    if (s >= 1.0) return H;
    const double q = 1.0 / (1.0 - s);
    const double psi = std::exp(-q);
    const double d1 = -psi * q * q;
    const double d2 = psi * (q * q * q * q - 2.0 * q * q * q);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double yi = x[i] - center[i], yj = x[j] - center[j];
            double v = d2 * 4.0 * yi * yj / (r2 * r2);
            if (i == j) v += d1 * 2.0 / r2;
            H.set(i, j, v);
        }
    return H;
}

std::vector<TestFunction> default_test_suite(const Grid& grid, int k, std::uint64_t seed) {
    if (k < 1) throw InputError("default_test_suite: k must be at least 1");
    constexpr double kCentreRadius = 0.7, kReach = 0.85, kRmin = 0.15, kRmax = 0.3;
    const std::uint64_t s0 = splitmix64(seed);
    const double shift[3] = {unit_from_bits(s0), unit_from_bits(splitmix64(s0)),
                             unit_from_bits(splitmix64(splitmix64(s0)))};
    std::vector<TestFunction> out;
    out.push_back({0, Point{}, kRmax});
    for (int i = 1; i < k; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        auto frac = [](double v) { return v - std::floor(v); };
        const double u1 = frac(halton(idx, 2) + shift[0]);
        const double u2 = frac(halton(idx, 3) + shift[1]);
        const double u3 = frac(halton(idx, 5) + shift[2]);
        TestFunction t;
        t.id = static_cast<std::size_t>(i);
        double norm = 0.0;
        if (grid.dim() == 1) {
            t.center[0] = kCentreRadius * (2.0 * u1 - 1.0);
            norm = std::abs(t.center[0]);
        } else {
            const double rho = kCentreRadius * std::sqrt(u1);
            const double theta = 2.0 * std::numbers::pi * u2;
            t.center[0] = rho * std::cos(theta);
            t.center[1] = rho * std::sin(theta);
            norm = rho;
        }
        t.radius = std::min(kRmin + (kRmax - kRmin) * u3, kReach - norm);
        out.push_back(t);
    }
    return out;
}

void validate_test_supports(const Grid& g, const std::vector<TestFunction>& tests) {
    for (const auto& t : tests) {
        if (!(t.radius > 0.0)) throw InputError("test function " + std::to_string(t.id) + " has radius <= 0");
        for (std::size_t k : g.non_exterior_nodes()) {
            if (!g.is_interior(k) && t.contains(g.coord(k), g.dim())) {
                std::ostringstream os;
                os << "support of test function " << t.id << " (centre " << t.center[0] << ", " << t.center[1]
                   << ", radius " << t.radius << ") reaches the boundary band of the n = " << g.n() << " grid";
                throw InputError(os.str());
            }
        }
    }
}

double default_phase_tolerance(const ScalarField& u) {
    double sup = 0.0;
    for (std::size_t k : u.grid->non_exterior_nodes()) sup = std::max(sup, std::abs(u[k]));
    const double h = u.grid->h();
    return 10.0 * h * h * (sup > 0.0 ? sup : 1.0);
}

ResidualReport weak_residual_second_equation(const SolutionPair& pair, const ProblemConfig& cfg,
                                             const std::vector<TestFunction>& tests, double tau) {
    const Grid& g = *pair.u.grid;
    const int d = g.dim();
    ResidualReport rep;
    rep.phase_tolerance = tau >= 0.0 ? tau : default_phase_tolerance(pair.u);
    rep.first_eq_residual = check_first_equation(pair);
    const double t0 = rep.phase_tolerance, t1 = 0.1 * rep.phase_tolerance;

    validate_test_supports(g, tests);

    // F_ij(D^2u) m once per node; m == 0 contributes nothing and may sit at a
    // singular point of F
    const auto& interior = g.interior_nodes();
    std::vector<SymMatrix> flux(interior.size(), SymMatrix::zero(d));
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t k = interior[i];
            if (pair.m[k] == 0.0) continue;
            flux[i] = pair.op.derivative(hessian_at(pair.u, k), g.coord(k)) * pair.m[k];
        }
    });

    const double gp = cfg.gamma_plus / pair.p, gm = cfg.gamma_minus / pair.p;
    auto f_tilde = [&](double v, double tol) { return v > tol ? gp : (v < -tol ? -gm : 0.0); };

    rep.weak_residuals.resize(tests.size());
    parallel_for(tests.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            const TestFunction& t = tests[j];
            WeakResidual r;
            r.id = t.id;
            double rhs_fine = 0.0, abs_phi = 0.0, abs_phi_band = 0.0;
            for (std::size_t i = 0; i < interior.size(); ++i) {
                const std::size_t k = interior[i];
                const Point x = g.coord(k);
                if (!t.contains(x, d)) continue;
                const double w = g.weight(k);
                const double phi = t.value(x, d);
                if (pair.m[k] != 0.0) r.lhs += flux[i].frobenius_dot(t.hessian(x, d)) * w;
                r.rhs -= f_tilde(pair.u[k], t0) * phi * w;
                rhs_fine -= f_tilde(pair.u[k], t1) * phi * w;
                abs_phi += std::abs(phi) * w;
                if (std::abs(pair.u[k]) <= t0) abs_phi_band += std::abs(phi) * w;
            }
            r.residual = std::abs(r.lhs - r.rhs);
            r.rhs_bound = std::max(cfg.gamma_plus, std::abs(cfg.gamma_minus)) / pair.p * abs_phi;
            r.tau_shift = std::abs(r.rhs - rhs_fine);
            r.tau_shift_bound = (cfg.gamma_plus + std::abs(cfg.gamma_minus)) / pair.p * abs_phi_band;
            rep.weak_residuals[j] = r;
        }
    });
    for (const auto& r : rep.weak_residuals) rep.el_residual_max = std::max(rep.el_residual_max, r.residual);
    return rep;
}

}  // namespace twophase
