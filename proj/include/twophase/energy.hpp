#pragma once

#include <cstddef>
#include <vector>

#include "twophase/grid.hpp"
#include "twophase/operator.hpp"

namespace twophase {

/// Parameters of I[u] = int [F(D^2u)]^p + gamma_plus u^+ + gamma_minus u^-.
struct ProblemConfig {
    double p = 2.0;
    double gamma_plus = 1.0;
    double gamma_minus = 0.0;
    Operator op = make_trace(2);
    BoundaryData boundary;
    double smoothing_eps = 0.0;

    const GridPtr& grid() const { return boundary.g.grid; }

    /// gamma_plus >= 0, gamma_plus + gamma_minus > 0, p > 1, p > d/2,
    /// operator dimension equal to the grid dimension.
    void validate() const;
};

/// How [F]^p treats F < 0.
enum class NegativeF {
    strict,  ///< literal power for even-integer p, DomainError otherwise
    clamp,   ///< F -> max(F, 0), counted in clamp_count
};

struct EnergyOptions {
    double eps = 0.0;  ///< smoothing scale for u^+ and u^-; 0 is exact
    NegativeF policy = NegativeF::strict;

    static EnergyOptions exact() { return {}; }
    static EnergyOptions solve_path(double eps) { return {eps, NegativeF::clamp}; }
};

struct EnergyBreakdown {
    double hessian_term = 0.0;
    double phase_term = 0.0;
    double total = 0.0;
    double coercivity_lower_bound = 0.0;  ///< lambda^p sum |D^2u|_F^p w
    std::size_t clamp_count = 0;
};

/// 1/2 (u + sqrt(u^2 + eps^2)) - eps/2, written to avoid cancellation.
double smoothed_positive_part(double u, double eps);
double smoothed_positive_part_derivative(double u, double eps);

EnergyBreakdown evaluate(const ProblemConfig& cfg, const ScalarField& u,
                         EnergyOptions opts = EnergyOptions::exact());

struct GradientResult {
    ScalarField grad;  ///< zero on band and exterior nodes
    std::vector<std::size_t> kink_nodes;  ///< only filled when eps == 0
    std::size_t clamp_count = 0;
};

/// Gradient of the discrete energy with respect to interior node values.
/// With eps == 0 the phase part is a subgradient (slope 1/2 at u == 0) and
/// nodes at the kink are reported.
GradientResult gradient(const ProblemConfig& cfg, const ScalarField& u, EnergyOptions opts);
/// Solve-path gradient at cfg.smoothing_eps.
GradientResult gradient(const ProblemConfig& cfg, const ScalarField& u);

struct CoercivityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// I[u] >= lambda^p |D^2u|^p_{L^p}. Refuses gamma_minus < 0.
CoercivityCheck coercivity_check(const ProblemConfig& cfg, const ScalarField& u);

}  // namespace twophase
