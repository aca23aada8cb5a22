#include "twophase/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "twophase/certification.hpp"
#include "twophase/error.hpp"
#include "twophase/parallel.hpp"

namespace twophase {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InternalError("format_real: to_chars failed");
    return std::string(buf, end);
}

double parse_real(const std::string& s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
        throw InputError("expected a finite real, got '" + s + "'");
    return v;
}

long long parse_integer(const std::string& s) {
    long long v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw InputError("expected an integer, got '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    const long long v = parse_integer(s);
    if (v < -2147483647LL || v > 2147483647LL) throw InputError("integer out of range: '" + s + "'");
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw InputError("expected an unsigned integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw InputError("expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (out.back().empty()) throw InputError("expected a comma-separated list without empty items");
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key real_key(std::string name, T RunConfig::*field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { c.*field = parse_real(v); },
            [field](const RunConfig& c) { return format_real(c.*field); }};
}

Key int_key(std::string name, int RunConfig::*field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v); },
            [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

Key bool_key(std::string name, bool RunConfig::*field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
            [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Key string_key(std::string name, std::string RunConfig::*field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { c.*field = v; },
            [field](const RunConfig& c) { return c.*field; }};
}

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = {
        int_key("schema_version", &RunConfig::schema_version),
        string_key("problem.operator", &RunConfig::op),
        real_key("problem.operator.lambda", &RunConfig::op_lambda),
        real_key("problem.operator.Lambda", &RunConfig::op_Lambda),
        real_key("problem.operator.a", &RunConfig::op_a),
        real_key("problem.p", &RunConfig::p),
        real_key("problem.gamma_plus", &RunConfig::gamma_plus),
        real_key("problem.gamma_minus", &RunConfig::gamma_minus),
        string_key("problem.boundary", &RunConfig::boundary),
        real_key("problem.boundary.a", &RunConfig::boundary_a),
        string_key("problem.boundary.path", &RunConfig::boundary_path),
        bool_key("problem.require_a4", &RunConfig::require_a4),
        int_key("grid.dim", &RunConfig::dim),
        {"grid.n",
         [](RunConfig& c, const std::string& v) {
             c.n.clear();
             for (const auto& s : split_list(v)) c.n.push_back(parse_int(s));
         },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.n.size(); ++i) s += (i ? "," : "") + std::to_string(c.n[i]);
             return s;
         }},
        real_key("grid.band_width", &RunConfig::band_width),
        int_key("solver.max_iters", &RunConfig::max_iters),
        real_key("solver.grad_tol", &RunConfig::grad_tol),
        {"solver.eps_schedule",
         [](RunConfig& c, const std::string& v) {
             c.eps_schedule.clear();
             for (const auto& s : split_list(v)) c.eps_schedule.push_back(parse_real(s));
         },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.eps_schedule.size(); ++i) s += (i ? "," : "") + format_real(c.eps_schedule[i]);
             return s;
         }},
        real_key("solver.step.initial", &RunConfig::step_initial),
        real_key("solver.step.shrink", &RunConfig::step_shrink),
        real_key("solver.step.sufficient_decrease", &RunConfig::step_sufficient_decrease),
        {"solver.seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        string_key("solver.init", &RunConfig::init),
        string_key("solver.init.path", &RunConfig::init_path),
        bool_key("solver.preconditioned", &RunConfig::preconditioned),
        int_key("solver.jacobi_sweeps", &RunConfig::jacobi_sweeps),
        int_key("solver.n_starts", &RunConfig::n_starts),
        bool_key("checks.certify", &RunConfig::certify),
        int_key("checks.certification_samples", &RunConfig::certification_samples),
        bool_key("checks.L44_1", &RunConfig::l44_1),
        bool_key("checks.L44_2", &RunConfig::l44_2),
        bool_key("checks.T44", &RunConfig::t44),
        bool_key("checks.C45", &RunConfig::c45),
        bool_key("checks.P26", &RunConfig::p26),
        int_key("checks.n_tests", &RunConfig::n_tests),
        int_key("checks.n_pairs", &RunConfig::n_pairs),
        int_key("checks.poincare_train", &RunConfig::poincare_train),
        int_key("checks.poincare_test", &RunConfig::poincare_test),
        bool_key("checks.strict", &RunConfig::strict),
        string_key("output.dir", &RunConfig::output_dir),
        bool_key("output.fields", &RunConfig::write_fields),
    };
    return keys;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    std::map<std::string, const Key*> index;
    for (const auto& k : schema()) index[k.name] = &k;
    RunConfig cfg;
    std::map<std::string, int> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw InputError(where + "unknown key '" + key + "'");
        if (seen.count(key)) throw InputError(where + "duplicate key '" + key + "' (first on line " +
                                              std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        try {
            it->second->set(cfg, value);
        } catch (const InputError& e) {
            throw InputError(where + key + ": " + e.what());
        }
    }
    if (cfg.schema_version != 1)
        throw InputError("config: unsupported schema_version " + std::to_string(cfg.schema_version) + " (expected 1)");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_run_config(ss.str());
    const fs::path base = fs::path(path).parent_path();
    for (std::string* p : {&cfg.boundary_path, &cfg.init_path})
        if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    return cfg;
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : schema()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

namespace {

struct Prepared {
    RunConfig cfg;
    ProblemConfig problem;  // on the finest grid
    std::vector<GridPtr> grids;
    SolveOptions solve;
    CheckSelection checks;
    fs::path output_dir;
};

Operator make_operator(const RunConfig& c) {
    if (c.op == "trace") return make_trace(c.dim);
    if (c.op == "frobenius") return make_frobenius(c.dim, c.op_lambda, c.op_Lambda);
    if (c.op == "weighted_constant") return make_weighted_constant(c.dim, c.op_a);
    if (c.op == "positive_trace") return make_positive_trace(c.dim);
    throw InputError("problem.operator: unknown operator '" + c.op +
                     "' (expected trace, frobenius, weighted_constant or positive_trace)");
}

ScalarField read_csv_file(const std::string& path, const GridPtr& grid, const std::string& key) {
    std::ifstream in(path);
    if (!in) throw InputError(key + ": cannot read '" + path + "'");
    try {
        return read_field_csv(in, grid);
    } catch (const InputError& e) {
        throw InputError(key + ": " + e.what());
    }
}

fs::path resolve_output_dir(const RunConfig& c, const RunOverrides& ov) {
    if (ov.output_dir) return *ov.output_dir;
    if (!c.output_dir.empty()) return c.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "twophase_out";
}

Prepared prepare(const RunConfig& in, const RunOverrides& ov) {
    Prepared pr;
    pr.cfg = in;
    RunConfig& c = pr.cfg;
    if (ov.seed) c.seed = *ov.seed;
    if (ov.strict) c.strict = true;

    if (c.dim != 1 && c.dim != 2) throw InputError("grid.dim must be 1 or 2");
    if (c.n.empty()) throw InputError("grid.n: at least one grid size is required");
    for (std::size_t i = 0; i < c.n.size(); ++i) {
        if (i > 0 && c.n[i] <= c.n[i - 1]) throw InputError("grid.n: sizes must increase strictly");
        pr.grids.push_back(build_grid(c.dim, c.n[i], c.band_width));
    }
    const GridPtr& fine = pr.grids.back();

    ProblemConfig& pc = pr.problem;
    pc.p = c.p;
    pc.gamma_plus = c.gamma_plus;
    pc.gamma_minus = c.gamma_minus;
    pc.op = make_operator(c);
    const double a = c.boundary_a;
    if (c.boundary == "csv") {
        if (c.boundary_path.empty()) throw InputError("problem.boundary.path is required for csv boundary data");
        pc.boundary = BoundaryData::from_field(read_csv_file(c.boundary_path, fine, "problem.boundary.path"), c.require_a4);
    } else {
        std::function<double(const Point&)> profile;
        if (c.boundary == "constant") {
            profile = [a](const Point&) { return a; };
        } else if (c.boundary == "affine") {
            profile = [a](const Point& x) { return 0.5 * a * (1.0 + x[0]); };
        } else if (c.boundary == "radial_bump") {
            profile = [a](const Point& x) { return a * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); };
        } else {
            throw InputError("problem.boundary: unknown profile '" + c.boundary +
                             "' (expected constant, affine, radial_bump or csv)");
        }
        pc.boundary = BoundaryData::from_profile(fine, profile, c.require_a4);
    }
    pc.validate();

    SolveOptions& so = pr.solve;
    so.max_iters = c.max_iters;
    so.grad_tol = c.grad_tol;
    so.eps_schedule = c.eps_schedule;
    so.step = {c.step_initial, c.step_shrink, c.step_sufficient_decrease};
    so.seed = c.seed;
    so.init = init_kind_from_string(c.init);
    so.preconditioned = c.preconditioned;
    so.jacobi_sweeps = c.jacobi_sweeps;
    if (so.init == InitKind::provided) {
        if (c.init_path.empty()) throw InputError("solver.init.path is required when solver.init = provided");
        so.initial = read_csv_file(c.init_path, pr.grids.front(), "solver.init.path");
    }
    so.validate();
    if (c.n_starts < 1) throw InputError("solver.n_starts must be at least 1");

    CheckSelection& cs = pr.checks;
    cs.l44_1 = c.l44_1;
    cs.l44_2 = c.l44_2;
    cs.t44 = c.t44;
    cs.c45 = c.c45;
    cs.p26 = c.p26;
    cs.n_tests = c.n_tests;
    cs.n_pairs = c.n_pairs;
    cs.poincare_train = c.poincare_train;
    cs.poincare_test = c.poincare_test;
    cs.seed = c.seed;
    if (c.certification_samples < 0) throw InputError("checks.certification_samples must be nonnegative");
    if (cs.n_tests < 1) throw InputError("checks.n_tests must be at least 1");
    if (cs.c45) {
        if (!(c.p > c.dim))
            throw InputError("checks.C45: the Hoelder estimate assumes p > d (got p = " + format_real(c.p) +
                             ", d = " + std::to_string(c.dim) + ")");
        if (cs.n_pairs < 100) throw InputError("checks.n_pairs must be at least 100");
    }
    if (cs.p26 && (cs.poincare_train < 1 || cs.poincare_test < 1))
        throw InputError("checks.poincare_train and checks.poincare_test must be at least 1");
    for (const auto& g : pr.grids) validate_test_supports(*g, default_test_suite(*g, cs.n_tests, cs.seed));

    pr.output_dir = resolve_output_dir(c, ov);
    if (fs::exists(pr.output_dir) && !fs::is_directory(pr.output_dir))
        throw InputError("output directory '" + pr.output_dir.string() + "' exists and is not a directory");
    return pr;
}

json certification_json(const CertificationReport& r, bool claimed) {
    json j;
    j["assumption"] = to_string(r.assumption);
    j["claimed"] = claimed;
    j["samples"] = r.samples;
    j["pass"] = r.pass;
    j["violation_count"] = r.violation_count;
    j["worst_margin"] = r.worst_margin;
    if (!r.violations.empty()) {
        const Counterexample& ce = r.violations.front();
        j["first_counterexample"] = {{"sample", ce.sample}, {"M", ce.M.to_string()}, {"N", ce.N.to_string()},
                                     {"margin", ce.margin}};
    }
    return j;
}

json trace_json(const std::vector<std::pair<double, double>>& t) {
    json a = json::array();
    for (const auto& [h, v] : t) a.push_back({{"h", h}, {"value", v}});
    return a;
}

json level_json(const RefinementLevel& l) {
    json j;
    j["n"] = l.n;
    j["h"] = l.h;
    const SolveResult& s = l.solve;
    j["solve"] = {{"converged", s.converged},
                  {"iterations", s.iterations},
                  {"grad_norm_final", s.grad_norm_final},
                  {"final_energy", s.final_energy},
                  {"clamp_count", s.clamp_count},
                  {"stage_eps", s.stage_eps},
                  {"stage_starts", s.stage_starts},
                  {"energy_history", s.energy_history}};
    if (!s.start_energies.empty()) {
        j["solve"]["start_energies"] = s.start_energies;
        j["solve"]["energy_spread"] = s.energy_spread;
        j["solve"]["best_start"] = s.best_start;
    }
    j["pair"] = {{"clamped_count", l.pair.clamped_count}};
    const ResidualReport& r = l.residuals;
    json weak = json::array();
    for (const auto& w : r.weak_residuals)
        weak.push_back({{"id", w.id},
                        {"lhs", w.lhs},
                        {"rhs", w.rhs},
                        {"residual", w.residual},
                        {"rhs_bound", w.rhs_bound},
                        {"tau_shift", w.tau_shift},
                        {"tau_shift_bound", w.tau_shift_bound}});
    j["residuals"] = {{"first_eq_residual", r.first_eq_residual},
                      {"el_residual_max", r.el_residual_max},
                      {"phase_tolerance", r.phase_tolerance},
                      {"weak", weak}};
    const NormSuite& n = l.norms;
    j["norms"] = {{"l1_ball", n.l1_ball}, {"l1_half", n.l1_half}, {"l_gain", n.l_gain},  {"f_inf", n.f_inf},
                  {"w2q_half", n.w2q_half}, {"u_inf", n.u_inf}};
    if (n.holder_alpha) {
        j["norms"]["holder_alpha"] = *n.holder_alpha;
        j["norms"]["holder_seminorm"] = *n.holder_seminorm;
    }
    const FreeBoundary& fb = l.free_boundary;
    j["free_boundary"] = {{"tau", fb.tau},
                          {"positive_nodes", fb.positive_cells.size()},
                          {"negative_nodes", fb.negative_cells.size()},
                          {"zero_nodes", fb.zero_cells.size()},
                          {"boundary_nodes", fb.boundary_cells.size()},
                          {"positive_measure", fb.positive_measure},
                          {"negative_measure", fb.negative_measure},
                          {"zero_measure", fb.zero_measure}};
    return j;
}

json verdict_json(const EstimateVerdict& v) {
    json rhs = json::object();
    for (const auto& [k, x] : v.rhs_components) rhs[k] = x;
    return {{"estimate_id", to_string(v.id)},
            {"lhs", v.lhs},
            {"rhs_components", rhs},
            {"fitted_constant", v.fitted_constant},
            {"tracked", v.tracked},
            {"refinement_trace", trace_json(v.refinement_trace)},
            {"verdict", v.stable ? "stable" : "unstable"},
            {"heuristic", v.heuristic},
            {"unconverged", v.unconverged}};
}

std::string phase_label(char c) {
    switch (c) {
        case '+': return "+";
        case '-': return "-";
        case '0': return "0";
        case 'G': return "\xCE\x93";  // Greek capital gamma
        default: return "";
    }
}

void write_phase_csv(std::ostream& os, const FreeBoundary& fb) {
    const Grid& g = *fb.grid;
    os << (g.dim() == 1 ? "x1,phase\n" : "x1,x2,phase\n");
    os.precision(17);
    for (std::size_t k : g.non_exterior_nodes()) {
        const Point x = g.coord(k);
        os << x[0] << ',';
        if (g.dim() == 2) os << x[1] << ',';
        os << phase_label(fb.labels[k]) << '\n';
    }
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config, const RunOverrides& ov, bool write) {
    RunOutcome out;
    if (ov.threads) set_thread_count(*ov.threads);

    Prepared pr;
    try {
        pr = prepare(config, ov);
    } catch (const std::exception& e) {
        out.exit_code = kExitValidation;
        out.message = std::string("validation: ") + e.what();
        return out;
    }
    out.output_dir = pr.output_dir.string();

    json report;
    json timings;
    report["schema_version"] = 1;
    report["config_text"] = to_text(pr.cfg);
    json echo = json::object();
    for (const auto& k : schema()) echo[k.name] = k.get(pr.cfg);
    report["config"] = echo;

    // certification
    const auto t_cert = std::chrono::steady_clock::now();
    json certs = json::array();
    json warnings = json::array();
    if (pr.cfg.certify) {
        const Operator& op = pr.problem.op;
        const auto n = static_cast<std::size_t>(pr.cfg.certification_samples);
        const CertificationReport reps[] = {certify_A1(op, n, pr.cfg.seed), certify_A2(op, n, pr.cfg.seed),
                                            certify_A3(op, n, pr.cfg.seed),
                                            certify_derivative_bounds(op, n, pr.cfg.seed)};
        const bool claimed[] = {op.claims(Assumption::A1_elliptic), op.claims(Assumption::A2_convex),
                                op.claims(Assumption::A3_growth), op.claims(Assumption::A1_elliptic)};
        for (int i = 0; i < 4; ++i) {
            certs.push_back(certification_json(reps[i], claimed[i]));
            if (claimed[i] && !reps[i].pass)
                warnings.push_back("operator " + op.name() + " claims " + to_string(reps[i].assumption) +
                                   " but sampling found " + std::to_string(reps[i].violation_count) + " violations");
        }
        if (!reps[1].pass) warnings.push_back("A2 (convexity) not certified; minimizers may be local");
        if (!reps[2].pass) warnings.push_back("A3 (growth) not certified; coercivity is not guaranteed");
    }
    if (pr.cfg.gamma_minus < 0.0 && pr.cfg.n_starts == 1)
        warnings.push_back("gamma_minus < 0 makes the problem nonconvex; consider solver.n_starts > 1");
    report["certification"] = certs;
    report["warnings"] = warnings;
    timings["certification"] = seconds_since(t_cert);

    // solve and checks
    const auto t_solve = std::chrono::steady_clock::now();
    RefinementResult rr;
    try {
        rr = analyze_levels(pr.problem, pr.grids, pr.solve, pr.checks, pr.cfg.n_starts);
    } catch (const SolverFailure& e) {
        rr.partial = true;
        rr.failure = e.what();
    } catch (const std::exception& e) {
        out.exit_code = kExitInternal;
        out.message = std::string("analysis: ") + e.what();
        return out;
    }
    timings["solve_and_checks"] = seconds_since(t_solve);

    json levels = json::array();
    for (const auto& l : rr.levels) levels.push_back(level_json(l));
    report["levels"] = levels;
    json verdicts = json::array();
    bool any_unstable = false;
    for (const auto& v : rr.verdicts) {
        verdicts.push_back(verdict_json(v));
        any_unstable = any_unstable || !v.stable;
    }
    report["estimates"] = verdicts;
    report["partial"] = rr.partial;
    if (rr.partial) report["solver_failure"] = rr.failure;

    if (rr.partial) {
        out.exit_code = kExitSolver;
        out.message = "solve: " + rr.failure;
    } else if (pr.cfg.strict && any_unstable) {
        out.exit_code = kExitUnstable;
        std::string ids;
        for (const auto& v : rr.verdicts)
            if (!v.stable) ids += (ids.empty() ? "" : ", ") + to_string(v.id);
        out.message = "checks: unstable verdicts in strict mode: " + ids;
    }
    report["status"] = out.exit_code == kExitOk ? "ok" : out.message;
    report["timings"] = timings;
    out.report_json = report.dump(2);

    if (write) {
        try {
            fs::create_directories(pr.output_dir);
            write_file(pr.output_dir / "report.json", [&](std::ostream& os) { os << out.report_json << '\n'; });
            if (pr.cfg.write_fields && !rr.levels.empty()) {
                const RefinementLevel& fine = rr.levels.back();
                write_file(pr.output_dir / "u.csv", [&](std::ostream& os) { write_field_csv(os, fine.solve.u_star); });
                write_file(pr.output_dir / "m.csv", [&](std::ostream& os) { write_field_csv(os, fine.pair.m); });
                write_file(pr.output_dir / "phase.csv",
                           [&](std::ostream& os) { write_phase_csv(os, fine.free_boundary); });
            }
        } catch (const std::exception& e) {
            out.exit_code = kExitInternal;
            out.message = std::string("output: ") + e.what();
        }
    }
    return out;
}

RunOutcome run(const std::string& config_path, const RunOverrides& ov) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const std::exception& e) {
        RunOutcome out;
        out.exit_code = kExitValidation;
        out.message = std::string("validation: ") + e.what();
        return out;
    }
    return run_pipeline(cfg, ov, true);
}

std::string strip_timings(const std::string& report_json) {
    json j = json::parse(report_json);
    j.erase("timings");
    return j.dump(2);
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("missing run artifact '" + path.string() + "'");
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(trim(item));
        return out;
    };
    if (!std::getline(in, line)) throw InputError("empty run artifact '" + path.string() + "'");
    t.header = split(trim(line));
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size())
            throw InputError("malformed row in '" + path.string() + "': '" + line + "'");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void emit_long(const CsvTable& t, const std::string& column, const fs::path& path) {
    const bool two_d = t.header.size() == 3;
    if (t.header.size() != 2 && !two_d) throw InputError("unexpected header in run artifact for " + column);
    write_file(path, [&](std::ostream& os) {
        os << "x1,x2," << column << '\n';
        for (const auto& r : t.rows) os << r[0] << ',' << (two_d ? r[1] : "0") << ',' << r.back() << '\n';
    });
}

}  // namespace

int emit_plot_data(const std::string& report_dir, std::string* message) {
    const fs::path dir(report_dir);
    try {
        if (!fs::is_directory(dir)) throw InputError("'" + report_dir + "' is not a run directory");
        if (!fs::exists(dir / "report.json")) throw InputError("missing run artifact '" + (dir / "report.json").string() + "'");
        const CsvTable u = read_csv(dir / "u.csv"), m = read_csv(dir / "m.csv"), ph = read_csv(dir / "phase.csv");
        if (u.rows.size() != m.rows.size() || u.rows.size() != ph.rows.size())
            throw InputError("run artifacts disagree on the number of nodes");
        emit_long(u, "u", dir / "plot_u.csv");
        emit_long(m, "m", dir / "plot_m.csv");
        emit_long(ph, "phase", dir / "plot_phase.csv");
    } catch (const InputError& e) {
        if (message) *message = std::string("plot: ") + e.what();
        return kExitValidation;
    } catch (const std::exception& e) {
        if (message) *message = std::string("plot: ") + e.what();
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace twophase
