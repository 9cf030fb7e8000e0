// Command-line front end: problem validation, single solves, two-mesh
// convergence sweeps, mesh dumps, and layer diagnostics, all emitting CSV
// artifacts.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fitmesh/fitmesh.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fitmesh;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSolver = 4;
constexpr int kExitIo = 5;

struct RunConfig {
    std::string mode;
    std::string problem;
    int space_intervals = 0;      // --N
    int time_intervals = 0;       // --M
    std::vector<std::string> eta_texts;
    std::vector<int> resolutions;
    std::string alpha_text;       // optional override
    std::string out_dir;
    bool dense_fallback = false;
    double tolerance = 1e-10;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

double parse_constant(const std::string& text, const std::string& what) {
    try {
        const Expression e = parse_expression(text);
        if (!e.is_constant()) throw ConfigError(what + " must be a constant expression");
        return e(0.0, 0.0);
    } catch (const ParseError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

ProblemSpec load_problem(const RunConfig& config) {
    ProblemSpec spec;
    if (config.problem == "builtin:example1") {
        if (config.eta_texts.empty())
            throw ConfigError("builtin problems need --eta to derive the epsilon values");
        spec = builtin_example1({});
    } else {
        std::ifstream in(config.problem);
        if (!in) throw ConfigError("cannot open problem file " + config.problem);
        std::stringstream buffer;
        buffer << in.rdbuf();
        spec = parse_problem_config(buffer.str());
    }
    if (!config.alpha_text.empty()) spec.alpha = parse_constant(config.alpha_text, "--alpha");
    if (!config.eta_texts.empty()) {
        const double eta = parse_constant(config.eta_texts.front(), "--eta");
        spec.epsilons = default_epsilon_ladder(eta, spec.n);
    }
    require_well_formed(spec);
    return spec;
}

std::vector<double> parse_etas(const RunConfig& config) {
    if (config.eta_texts.empty()) throw ConfigError("this mode needs --eta");
    std::vector<double> etas;
    for (const std::string& text : config.eta_texts) etas.push_back(parse_constant(text, "--eta"));
    return etas;
}

void emit_artifact(const fs::path& path, const std::string& content) {
    write_file_atomic(path, content);
    std::cout << "artifact: " << path.string() << "\n";
}

void print_validation(const ValidationReport& report) {
    auto line = [](const char* name, bool ok, const std::string& detail) {
        std::printf("check %-20s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
    };
    char buf[160];
    std::snprintf(buf, sizeof buf, "min margin = %.6g", report.diagonal_dominance_margin);
    line("diagonal_dominance", report.diagonal_dominance_ok, buf);
    std::snprintf(buf, sizeof buf, "max off-diagonal entry = %.6g", report.offdiagonal_max);
    line("offdiagonal_sign", report.offdiagonal_sign_ok, buf);
    std::snprintf(buf, sizeof buf, "min row sum = %.6g (needs > alpha)", report.min_row_sum);
    line("row_sum_vs_alpha", report.row_sum_ok, buf);
    std::snprintf(buf, sizeof buf, "sqrt(eps_n) = %.6g vs sqrt(alpha)/6 = %.6g",
                  report.sqrt_epsilon_n, report.sqrt_alpha_over_6);
    line("epsilon_condition", report.epsilon_ok, buf);
    if (!report.evaluation_ok)
        line("coefficient_eval", false, report.failure_location);
}

int run_validate(const RunConfig& config) {
    Timer timer;
    const ProblemSpec spec = load_problem(config);
    const ValidationReport report = validate_assumptions(spec);
    print_validation(report);
    std::printf("summary mode=validate pass=%d min_row_sum=%.6g alpha=%.6g wall_ms=%lld\n",
                report.pass ? 1 : 0, report.min_row_sum, spec.alpha, timer.ms());
    return report.pass ? kExitOk : kExitValidation;
}

SolverOptions solver_options(const RunConfig& config) {
    SolverOptions options;
    options.residual_tolerance = config.tolerance;
    options.dense_fallback = config.dense_fallback;
    return options;
}

int run_solve(const RunConfig& config) {
    Timer timer;
    if (config.space_intervals < 1 || config.time_intervals < 1)
        throw ConfigError("solve needs --N and --M");
    const ProblemSpec spec = load_problem(config);
    const ValidationReport report = validate_assumptions(spec);
    if (!report.pass) {
        print_validation(report);
        std::printf("summary mode=solve pass=0 wall_ms=%lld\n", timer.ms());
        return kExitValidation;
    }
    const SpaceMesh smesh = build_shishkin_mesh(spec.epsilons, spec.alpha, config.space_intervals);
    const TimeMesh tmesh = build_time_mesh(spec.horizon, config.time_intervals);
    const GridFunction grid = time_march(spec, smesh, tmesh, solver_options(config));

    double lo = grid.values.front(), hi = grid.values.front();
    for (double v : grid.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    char name[64];
    std::snprintf(name, sizeof name, "grid_N%d_M%d.csv", config.space_intervals,
                  config.time_intervals);
    emit_artifact(fs::path(config.out_dir) / name, grid_csv(grid));
    std::printf("summary mode=solve N=%d M=%d u_min=%.12g u_max=%.12g wall_ms=%lld\n",
                config.space_intervals, config.time_intervals, lo, hi, timer.ms());
    return kExitOk;
}

int run_sweep_mode(const RunConfig& config, SweepAxis axis) {
    Timer timer;
    const int fixed = axis == SweepAxis::time ? config.space_intervals : config.time_intervals;
    if (fixed < 1)
        throw ConfigError(axis == SweepAxis::time ? "sweep-time needs --N (fixed space mesh)"
                                                  : "sweep-space needs --M (fixed time mesh)");
    if (config.resolutions.size() < 2)
        throw ConfigError("sweep modes need --resolutions with at least two doubling values");

    ProblemSpec base = load_problem(config);

    SweepConfig sweep;
    sweep.axis = axis;
    sweep.etas = parse_etas(config);
    sweep.eta_labels = config.eta_texts;
    sweep.resolutions = config.resolutions;
    sweep.fixed_resolution = fixed;
    sweep.solver = solver_options(config);

    // Validate once per eta; the sweep assumes the assumptions hold.
    for (double eta : sweep.etas) {
        ProblemSpec probe = base;
        probe.epsilons = default_epsilon_ladder(eta, base.n);
        const ValidationReport report = validate_assumptions(probe);
        if (!report.pass) {
            std::printf("validation failed for eta=%.6g:\n", eta);
            print_validation(report);
            return kExitValidation;
        }
    }

    const ConvergenceReport report = run_sweep(base, sweep);
    char name[64];
    if (axis == SweepAxis::time)
        std::snprintf(name, sizeof name, "table_time_N%d.csv", fixed);
    else
        std::snprintf(name, sizeof name, "table_space_M%d.csv", fixed);
    emit_artifact(fs::path(config.out_dir) / name, report_csv(report));
    std::printf("summary mode=%s fixed=%d p_star=%.7g c_star=%.7g wall_ms=%lld\n",
                axis == SweepAxis::time ? "sweep-time" : "sweep-space", fixed,
                report.uniform_order, report.uniform_constant, timer.ms());
    return kExitOk;
}

int run_mesh_dump(const RunConfig& config) {
    Timer timer;
    if (config.space_intervals < 1) throw ConfigError("mesh-dump needs --N");
    const ProblemSpec spec = load_problem(config);
    const SpaceMesh mesh = build_shishkin_mesh(spec.epsilons, spec.alpha, config.space_intervals);
    char name[64];
    std::snprintf(name, sizeof name, "mesh_N%d.csv", config.space_intervals);
    emit_artifact(fs::path(config.out_dir) / name, mesh_csv(mesh));
    std::string sigma_list;
    for (double s : mesh.sigmas) sigma_list += " " + format_full(s);
    std::printf("summary mode=mesh-dump N=%d sigmas=%s J_size=%zu wall_ms=%lld\n",
                config.space_intervals, sigma_list.c_str(), mesh.change_set.size(), timer.ms());
    return kExitOk;
}

int run_diagnostics(const RunConfig& config) {
    Timer timer;
    if (config.space_intervals < 1) throw ConfigError("diagnostics needs --N");
    const ProblemSpec spec = load_problem(config);
    const int N = config.space_intervals;
    const SpaceMesh mesh = build_shishkin_mesh(spec.epsilons, spec.alpha, N);

    std::string out = "record,i,j,s,value,reference,rel_error\n";
    double worst = 0.0;
    const double inv_nn = 1.0 / (static_cast<double>(N) * N);
    for (int i = 0; i < spec.n; ++i) {
        // layer function at its transition abscissa, against the exact N^-2
        const double transition = 2.0 * std::sqrt(spec.epsilons[static_cast<std::size_t>(i)] / spec.alpha) *
                                  std::log(static_cast<double>(N));
        const double value = layer_function(i, transition, LayerSide::left, spec.epsilons, spec.alpha);
        const double rel = std::abs(value - inv_nn) / inv_nn;
        worst = std::max(worst, rel);
        out += "layer_transition," + std::to_string(i + 1) + ",,," + format_full(value) + "," +
               format_full(inv_nn) + "," + format_full(rel) + "\n";
    }
    for (int i = 0; i < spec.n; ++i)
        for (int j = i + 1; j < spec.n; ++j)
            for (double s : {1.0, 1.5}) {
                const double point = interesting_point(i, j, s, spec.epsilons, spec.alpha);
                const double lhs = layer_function(i, point, LayerSide::left, spec.epsilons, spec.alpha) /
                                   std::pow(spec.epsilons[static_cast<std::size_t>(i)], s);
                const double rhs = layer_function(j, point, LayerSide::left, spec.epsilons, spec.alpha) /
                                   std::pow(spec.epsilons[static_cast<std::size_t>(j)], s);
                const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
                worst = std::max(worst, rel);
                out += "interesting_point," + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                       "," + format_full(s) + "," + format_full(point) + "," +
                       format_full(2.0 * s * std::sqrt(spec.epsilons[static_cast<std::size_t>(j)] / spec.alpha)) +
                       "," + format_full(rel) + "\n";
            }
    for (int r = 0; r < spec.n; ++r)
        out += "sigma," + std::to_string(r + 1) + ",,," + format_full(mesh.sigmas[static_cast<std::size_t>(r)]) +
               ",," + "\n";
    for (int r = 0; r < spec.n; ++r)
        out += "d," + std::to_string(r + 1) + ",,," + format_full(mesh.d_values[static_cast<std::size_t>(r)]) +
               ",," + "\n";

    char name[64];
    std::snprintf(name, sizeof name, "diagnostics_N%d.csv", N);
    emit_artifact(fs::path(config.out_dir) / name, out);
    std::printf("summary mode=diagnostics N=%d max_rel_error=%.6g wall_ms=%lld\n", N, worst,
                timer.ms());
    return kExitOk;
}

int dispatch(const RunConfig& config) {
    if (config.mode == "validate") return run_validate(config);
    if (config.mode == "solve") return run_solve(config);
    if (config.mode == "sweep-time") return run_sweep_mode(config, SweepAxis::time);
    if (config.mode == "sweep-space") return run_sweep_mode(config, SweepAxis::space);
    if (config.mode == "mesh-dump") return run_mesh_dump(config);
    if (config.mode == "diagnostics") return run_diagnostics(config);
    throw ConfigError("unknown mode " + config.mode);
}

} // namespace

int main(int argc, char** argv) {
    RunConfig config;
    if (const char* env = std::getenv("FITMESH_OUT")) config.out_dir = env;
    if (config.out_dir.empty()) config.out_dir = ".";

    CLI::App app{"fitted-mesh solver for singularly perturbed reaction-diffusion systems"};
    app.add_option("--mode", config.mode,
                   "validate | solve | sweep-time | sweep-space | mesh-dump | diagnostics")
        ->required();
    app.add_option("--problem", config.problem, "problem config path or builtin:example1");
    app.add_option("--N", config.space_intervals, "space intervals (fixed mesh for sweep-time)");
    app.add_option("--M", config.time_intervals, "time intervals (fixed mesh for sweep-space)");
    app.add_option("--eta", config.eta_texts,
                   "comma-separated parameter values, e.g. 2^-7,2^-8 (constant expressions)")
        ->delimiter(',');
    app.add_option("--resolutions", config.resolutions,
                   "comma-separated doubling resolution list for sweep modes")
        ->delimiter(',');
    app.add_option("--alpha", config.alpha_text, "override the problem's alpha");
    app.add_option("--out", config.out_dir, "output directory (default: $FITMESH_OUT or .)");
    app.add_flag("--dense-fallback", config.dense_fallback,
                 "retry failed block solves with a dense full-matrix solve");
    app.add_option("--tolerance", config.tolerance, "solver residual tolerance (default 1e-10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (config.problem.empty()) {
            // mesh-dump and diagnostics only need epsilons and alpha
            if (config.mode == "mesh-dump" || config.mode == "diagnostics")
                config.problem = "builtin:example1";
            else
                throw ConfigError("--problem is required");
        }
        return dispatch(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MeshError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
