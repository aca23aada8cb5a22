#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twophase/analysis.hpp"

namespace twophase {

/// Flat `key = value` run description. Unknown keys are rejected; missing
/// keys keep the defaults below. See README for the schema.
struct RunConfig {
    int schema_version = 1;

    std::string op = "trace";  ///< trace | frobenius | weighted_constant | positive_trace
    double op_lambda = 1.0;    ///< frobenius
    double op_Lambda = 1.0;    ///< frobenius
    double op_a = 1.0;         ///< weighted_constant
    double p = 2.0;
    double gamma_plus = 1.0;
    double gamma_minus = 0.0;
    std::string boundary = "constant";  ///< constant | affine | radial_bump | csv
    double boundary_a = 1.0;
    std::string boundary_path;
    bool require_a4 = true;

    int dim = 2;
    std::vector<int> n{33};  ///< one or more sizes; the last is the reported grid
    double band_width = 0.5;

    int max_iters = 2000;
    double grad_tol = 1e-6;
    std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    double step_initial = 1.0;
    double step_shrink = 0.5;
    double step_sufficient_decrease = 0.5;
    std::uint64_t seed = 0;
    std::string init = "boundary_extension";
    std::string init_path;
    bool preconditioned = true;
    int jacobi_sweeps = 400;
    int n_starts = 1;

    bool certify = true;
    int certification_samples = 10000;
    bool l44_1 = true;
    bool l44_2 = true;
    bool t44 = true;
    bool c45 = false;
    bool p26 = true;
    int n_tests = 25;
    int n_pairs = 2000;
    int poincare_train = 50;
    int poincare_test = 100;
    bool strict = false;

    std::string output_dir;
    bool write_fields = true;
};

/// Throws InputError naming the line on malformed input or unknown keys.
RunConfig parse_run_config(const std::string& text);
/// Relative CSV paths in the file are taken relative to its directory.
RunConfig load_run_config(const std::string& path);
/// Canonical text form: every key, fixed order, shortest round-trip numbers.
std::string to_text(const RunConfig& cfg);

/// Command-line overrides applied on top of the file.
struct RunOverrides {
    bool strict = false;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> output_dir;
};

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitValidation = 2, kExitSolver = 3, kExitUnstable = 4 };

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;      ///< "<stage>: <what>" on failure
    std::string report_json;  ///< empty when validation failed
    std::string output_dir;   ///< where files were (or would have been) written
};

/// Environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "TWOPHASE_OUTPUT_DIR";

/// Validates, runs the pipeline and writes report.json, u.csv, m.csv and
/// phase.csv. Nothing is written when validation fails.
RunOutcome run_pipeline(const RunConfig& cfg, const RunOverrides& ov = {}, bool write = true);
RunOutcome run(const std::string& config_path, const RunOverrides& ov = {});

/// Report with the "timings" member removed, for comparing numerics.
std::string strip_timings(const std::string& report_json);

/// Long-format plot CSVs (plot_u.csv, plot_m.csv, plot_phase.csv) from a run
/// directory. Returns kExitValidation when run artifacts are missing.
int emit_plot_data(const std::string& report_dir, std::string* message = nullptr);

}  // namespace twophase
