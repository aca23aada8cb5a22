#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twophase/energy.hpp"
#include "twophase/grid.hpp"
#include "twophase/operator.hpp"

namespace twophase {

/// (u, m) with m = [max(F(D^2u), 0)]^(p-1) at interior nodes and 0 elsewhere.
struct SolutionPair {
    ScalarField u;
    ScalarField m;
    double p = 2.0;
    Operator op = make_trace(2);
    std::size_t clamped_count = 0;  ///< interior nodes with F(D^2u) < 0
};

SolutionPair build_pair(const ProblemConfig& cfg, const ScalarField& u);

/// max over interior nodes of |F(D^2u) - m^(1/(p-1))|, with 0^(1/(p-1)) = 0.
double check_first_equation(const SolutionPair& pair);

/// phi(x) = exp(-1 / (1 - |x - c|^2 / r^2)) inside the ball B_r(c), 0 outside.
struct TestFunction {
    std::size_t id = 0;
    Point center{};
    double radius = 0.3;

    double value(const Point& x, int dim) const;
    SymMatrix hessian(const Point& x, int dim) const;
    bool contains(const Point& x, int dim) const;
};

/// k bumps: the first at the origin with radius 0.3, the rest with centres on
/// a rotated Halton sequence in B_0.7 and radii in [0.15, 0.3], shrunk where
/// needed so that |c| + r <= 0.85.
std::vector<TestFunction> default_test_suite(const Grid& grid, int k, std::uint64_t seed);

/// Throws InputError when a support has nonpositive radius or contains a
/// non-interior node of the grid.
void validate_test_supports(const Grid& grid, const std::vector<TestFunction>& tests);

struct WeakResidual {
    std::size_t id = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  ///< |lhs - rhs|
    /// max(gamma_plus, |gamma_minus|)/p * int |phi|; |rhs| never exceeds it.
    double rhs_bound = 0.0;
    /// |rhs(tau) - rhs(tau/10)| and its bound (gamma_plus + |gamma_minus|)/p * int_{|u|<=tau} |phi|.
    double tau_shift = 0.0;
    double tau_shift_bound = 0.0;
};

struct ResidualReport {
    double first_eq_residual = 0.0;
    std::vector<WeakResidual> weak_residuals;
    double el_residual_max = 0.0;
    double phase_tolerance = 0.0;
};

/// 10 h^2 max(|u|_inf, 1 if u == 0).
double default_phase_tolerance(const ScalarField& u);

/// Weak form of the second equation against each test function:
///   lhs = sum F_ij(D^2u) m phi_ij w,   rhs = -sum f phi w,
/// with f = gamma_plus/p [u > tau] - gamma_minus/p [u < -tau]. A negative
/// tau selects default_phase_tolerance. Throws InputError when a support
/// reaches a non-interior node.
ResidualReport weak_residual_second_equation(const SolutionPair& pair, const ProblemConfig& cfg,
                                             const std::vector<TestFunction>& tests, double tau = -1.0);

}  // namespace twophase
