#include "twophase/energy.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "twophase/error.hpp"
#include "twophase/parallel.hpp"

namespace twophase {

void ProblemConfig::validate() const {
    if (!grid()) throw InputError("problem: boundary data is not attached to a grid");
    if (!(p > 1.0)) throw InputError("problem: p must exceed 1");
    if (!(gamma_plus >= 0.0)) throw InputError("problem: hypothesis gamma_plus >= 0 violated");
    if (!(gamma_plus + gamma_minus > 0.0)) throw InputError("problem: hypothesis gamma_plus + gamma_minus > 0 violated");
    if (!(p > grid()->dim() / 2.0)) throw InputError("problem: need p > d/2");
    if (op.dim() != grid()->dim())
        throw InputError("problem: operator dimension " + std::to_string(op.dim()) + " does not match grid dimension " +
                         std::to_string(grid()->dim()));
    if (!(smoothing_eps >= 0.0)) throw InputError("problem: smoothing_eps must be nonnegative");
}

double smoothed_positive_part(double u, double eps) {
    if (eps == 0.0) return u > 0.0 ? u : 0.0;
    const double r = std::hypot(u, eps);
    const double half_sum = u >= 0.0 ? 0.5 * (u + r) : 0.5 * eps * eps / (r - u);
    return half_sum - 0.5 * eps;
}

double smoothed_positive_part_derivative(double u, double eps) {
    if (eps == 0.0) return u > 0.0 ? 1.0 : (u < 0.0 ? 0.0 : 0.5);
    const double r = std::hypot(u, eps);
    return u >= 0.0 ? 0.5 * (1.0 + u / r) : 0.5 * eps * eps / (r * (r - u));
}

namespace {

bool is_even_integer(double p) { return std::floor(p) == p && std::fmod(p, 2.0) == 0.0; }

enum class NodeStatus : unsigned char { ok, clamped, domain_error };

struct HessianTermNodes {
    std::vector<double> power;     // w * [F]^p
    std::vector<double> lower;     // w * |D^2u|_F^p
    std::vector<double> value;     // F(D^2u)
    std::vector<SymMatrix> hess;
    std::vector<NodeStatus> status;
};

HessianTermNodes hessian_term_nodes(const ProblemConfig& cfg, const ScalarField& u, NegativeF policy) {
    const Grid& g = *u.grid;
    const auto& interior = g.interior_nodes();
    const std::size_t m = interior.size();
    HessianTermNodes out{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m),
                         std::vector<SymMatrix>(m), std::vector<NodeStatus>(m, NodeStatus::ok)};
    const bool even = is_even_integer(cfg.p);
    parallel_for(m, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t k = interior[i];
            const double w = g.weight(k);
            out.hess[i] = hessian_at(u, k);
            const double F = cfg.op.eval(out.hess[i], g.coord(k));
            out.value[i] = F;
            out.lower[i] = std::pow(out.hess[i].frobenius_norm(), cfg.p) * w;
            if (F >= 0.0) {
                out.power[i] = std::pow(F, cfg.p) * w;
            } else if (policy == NegativeF::clamp) {
                out.power[i] = 0.0;
                out.status[i] = NodeStatus::clamped;
            } else if (even) {
                out.power[i] = std::pow(F, cfg.p) * w;
            } else {
                out.status[i] = NodeStatus::domain_error;
            }
        }
    });
    for (std::size_t i = 0; i < m; ++i) {
        if (out.status[i] == NodeStatus::domain_error) {
            const Point x = g.coord(interior[i]);
            std::ostringstream os;
            os.precision(6);
            os << "energy: F(D^2u) = " << out.value[i] << " < 0 at node " << interior[i] << " x = (" << x[0];
            if (g.dim() == 2) os << ", " << x[1];
            os << ") with non-even p = " << cfg.p << " (operator fails A3 on this Hessian)";
            throw DomainError(os.str());
        }
    }
    return out;
}

double phase_density(const ProblemConfig& cfg, double u, double eps) {
    return cfg.gamma_plus * smoothed_positive_part(u, eps) + cfg.gamma_minus * smoothed_positive_part(-u, eps);
}

double phase_slope(const ProblemConfig& cfg, double u, double eps) {
    return cfg.gamma_plus * smoothed_positive_part_derivative(u, eps) -
           cfg.gamma_minus * smoothed_positive_part_derivative(-u, eps);
}

}  // namespace

EnergyBreakdown evaluate(const ProblemConfig& cfg, const ScalarField& u, EnergyOptions opts) {
    const Grid& g = *u.grid;
    const HessianTermNodes nodes = hessian_term_nodes(cfg, u, opts.policy);
    EnergyBreakdown out;
    double lower = 0.0;
    for (std::size_t i = 0; i < nodes.power.size(); ++i) {
        out.hessian_term += nodes.power[i];
        lower += nodes.lower[i];
        out.clamp_count += nodes.status[i] == NodeStatus::clamped;
    }
    for (std::size_t k : g.non_exterior_nodes()) out.phase_term += phase_density(cfg, u[k], opts.eps) * g.weight(k);
    out.total = out.hessian_term + out.phase_term;
    out.coercivity_lower_bound = std::pow(cfg.op.lambda(), cfg.p) * lower;
    return out;
}

GradientResult gradient(const ProblemConfig& cfg, const ScalarField& u, EnergyOptions opts) {
    const Grid& g = *u.grid;
    const int d = g.dim();
    const double p = cfg.p;
    const HessianTermNodes nodes = hessian_term_nodes(cfg, u, opts.policy);
    const auto& interior = g.interior_nodes();

    // G_k = w p [F]^{p-1} F_ij(D^2u) per interior node, zero elsewhere
    std::vector<SymMatrix> G(g.size(), SymMatrix(d));
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double F = nodes.value[i];
            if (F == 0.0 || nodes.status[i] == NodeStatus::clamped) continue;
            const std::size_t k = interior[i];
            const double scale = g.weight(k) * p * std::pow(F, p - 1.0);
            G[k] = scale * cfg.op.derivative(nodes.hess[i], g.coord(k));
        }
    });

    GradientResult out{ScalarField(u.grid), {}, 0};
    for (auto s : nodes.status) out.clamp_count += s == NodeStatus::clamped;
    const double inv_h2 = 1.0 / (g.h() * g.h());
    parallel_for(interior.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t k = interior[i];
            double sum = 0.0;
            for (int a = 0; a < d; ++a) {
                const std::ptrdiff_t s = g.stride(a);
                sum += (G[k + s](a, a) - 2.0 * G[k](a, a) + G[k - s](a, a)) * inv_h2;
            }
            if (d == 2) {
                const std::ptrdiff_t s0 = g.stride(0), s1 = g.stride(1);
                // transpose of the cross stencil; factor 2 for the (0,1) and (1,0) entries
                sum += 2.0 * 0.25 * inv_h2 *
                       (G[k - s0 - s1](0, 1) - G[k - s0 + s1](0, 1) - G[k + s0 - s1](0, 1) + G[k + s0 + s1](0, 1));
            }
            sum += phase_slope(cfg, u[k], opts.eps) * g.weight(k);
            out.grad[k] = sum;
        }
    });

    if (opts.eps == 0.0) {
        double scale = 1.0;
        for (std::size_t k : interior) scale = std::max(scale, std::abs(u[k]));
        const double kink_tol = 1e-12 * scale;
        for (std::size_t k : interior)
            if (std::abs(u[k]) <= kink_tol) out.kink_nodes.push_back(k);
    }
    return out;
}

GradientResult gradient(const ProblemConfig& cfg, const ScalarField& u) {
    return gradient(cfg, u, EnergyOptions::solve_path(cfg.smoothing_eps));
}

CoercivityCheck coercivity_check(const ProblemConfig& cfg, const ScalarField& u) {
    if (cfg.gamma_minus < 0.0) {
        throw InputError(
            "coercivity_check: gamma_minus < 0 is not covered; the bound gamma_+ u^+ + gamma_- u^- >= 0 "
            "used to drop the phase term needs both coefficients nonnegative");
    }
    const EnergyBreakdown e = evaluate(cfg, u, EnergyOptions::exact());
    CoercivityCheck c;
    c.lhs = e.total;
    c.rhs = e.coercivity_lower_bound;
    c.pass = c.lhs >= c.rhs - 1e-10 * (1.0 + std::abs(c.lhs));
    return c;
}

}  // namespace twophase
