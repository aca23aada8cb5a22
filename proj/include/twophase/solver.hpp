#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twophase/energy.hpp"
#include "twophase/grid.hpp"

namespace twophase {

enum class InitKind { boundary_extension, zero, random, provided };

std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);

struct StepRule {
    double initial_step = 1.0;
    double shrink = 0.5;
    double sufficient_decrease = 0.5;
};

struct SolveOptions {
    int max_iters = 2000;  ///< per smoothing stage
    /// Stationarity tolerance on max_k |dI/du_k| / w_k over interior nodes,
    /// i.e. the gradient expressed as a density so it does not scale with h^d.
    double grad_tol = 1e-6;
    /// Smoothing scales relative to |g|_inf (1 when g == 0); strictly decreasing.
    std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    StepRule step;
    std::uint64_t seed = 0;
    InitKind init = InitKind::boundary_extension;
    std::optional<ScalarField> initial;  ///< used with InitKind::provided
    /// Precondition the gradient with the discrete second-derivative Gram
    /// matrix sum_i w_i |D^2_h(.)_i|_F^2 (fixed per grid).
    bool preconditioned = true;
    int jacobi_sweeps = 400;

    void validate() const;
};

struct SolveResult {
    ScalarField u_star;
    std::vector<double> energy_history;  ///< smoothed energy of every accepted iterate
    std::vector<std::size_t> stage_starts;  ///< index into energy_history per stage
    std::vector<double> stage_eps;  ///< absolute smoothing scale per stage
    double grad_norm_final = 0.0;
    int iterations = 0;
    std::size_t clamp_count = 0;
    bool converged = false;
    double final_energy = 0.0;  ///< exact (eps = 0) energy, clamped F
    // multistart only
    std::vector<double> start_energies;
    double energy_spread = 0.0;
    std::size_t best_start = 0;
};

/// Boundary extension: g on every node, then Jacobi sweeps of the discrete
/// Laplace equation on the interior.
ScalarField boundary_extension(const BoundaryData& bd, int sweeps);

/// Minimizes the discrete energy over fields whose band values equal g.
/// The boundary data is re-sampled when `grid` differs from cfg.grid().
SolveResult minimize(const ProblemConfig& cfg, const GridPtr& grid, const SolveOptions& opts);

/// Runs minimize from n_starts initializations (opts.init, then zero or
/// boundary extension, then seeded random perturbations) and returns the
/// lowest final energy with the spread of all final energies.
SolveResult multistart(const ProblemConfig& cfg, const GridPtr& grid, const SolveOptions& opts, int n_starts);

/// Stationarity measure used by the solver.
double stationarity(const ScalarField& grad);

}  // namespace twophase
