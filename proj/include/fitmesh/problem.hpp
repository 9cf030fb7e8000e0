#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fitmesh/errors.hpp"

namespace fitmesh {

using SpaceTimeFn = std::function<double(double x, double t)>; // coefficient / source entries
using TimeFn = std::function<double(double t)>;                // Robin data entries
using SpaceFn = std::function<double(double x)>;               // initial data entries

/// Continuous problem data for the parabolic reaction-diffusion system
///
///   u_t - E u_xx + A(x,t) u = f(x,t)       on (0,1) x (0,T],
///   u - E_* u_x = phi_left(t)              at x = 0,
///   u + E_* u_x = phi_right(t)             at x = 1,
///   u = phi_bottom(x)                      at t = 0,
///
/// with E = diag(epsilons) and E_* = diag(sqrt(epsilons)).
///
/// Coefficients are arbitrary callables through this API; the config loader
/// backs them with parsed expressions. Instances are immutable by convention
/// after construction and safe to share across threads (evaluation is pure).
struct ProblemSpec {
    int n = 0;                                 // number of equations
    std::vector<double> epsilons;              // strictly increasing, in (0,1)
    std::vector<std::vector<SpaceTimeFn>> coeff; // A entries, n x n
    std::vector<SpaceTimeFn> source;           // f entries
    std::vector<TimeFn> phi_left;
    std::vector<TimeFn> phi_right;
    std::vector<SpaceFn> phi_bottom;
    double horizon = 1.0;                      // T
    double alpha = 0.0;                        // stability constant
};

/// Structural sanity of a ProblemSpec (sizes, ordering, positivity).
/// Throws ConfigError with a description of the first violation.
inline void require_well_formed(const ProblemSpec& spec) {
    if (spec.n < 1) throw ConfigError("problem: n must be >= 1");
    const auto size = static_cast<std::size_t>(spec.n);
    if (spec.epsilons.size() != size) throw ConfigError("problem: epsilons must have n entries");
    for (int i = 0; i < spec.n; ++i) {
        if (!(spec.epsilons[i] > 0.0)) throw ConfigError("problem: epsilons must be positive");
        if (i > 0 && !(spec.epsilons[i - 1] < spec.epsilons[i]))
            throw ConfigError("problem: epsilons must be strictly increasing");
    }
    if (spec.coeff.size() != size) throw ConfigError("problem: A must have n rows");
    for (const auto& row : spec.coeff) {
        if (row.size() != size) throw ConfigError("problem: A must have n columns per row");
        for (const auto& entry : row)
            if (!entry) throw ConfigError("problem: A has an empty entry");
    }
    auto check_vec = [&](const auto& v, const char* name) {
        if (v.size() != size) throw ConfigError(std::string("problem: ") + name + " must have n entries");
        for (const auto& entry : v)
            if (!entry) throw ConfigError(std::string("problem: ") + name + " has an empty entry");
    };
    check_vec(spec.source, "f");
    check_vec(spec.phi_left, "phi_left");
    check_vec(spec.phi_right, "phi_right");
    check_vec(spec.phi_bottom, "phi_bottom");
    if (!(spec.horizon > 0.0)) throw ConfigError("problem: T must be positive");
    if (!(spec.alpha > 0.0)) throw ConfigError("problem: alpha must be positive");
}

/// Outcome of checking the structural assumptions on a sample grid.
///
/// The four checks, each evaluated on a tensor grid over [0,1] x [0,T]:
///   1. diagonal dominance:  a_ii > sum_{j != i} |a_ij|   (margin reported)
///   2. off-diagonal sign:   a_ij <= 0 for i != j         (largest entry reported)
///   3. row sums vs alpha:   alpha < min_i sum_j a_ij     (minimum reported)
///   4. parameter size:      sqrt(eps_n) <= sqrt(alpha)/6
/// `pass` is true iff every individual check passes and no coefficient
/// evaluation failed.
struct ValidationReport {
    bool pass = false;

    bool diagonal_dominance_ok = false;
    double diagonal_dominance_margin = 0.0; // min over samples of a_ii - sum_{j!=i}|a_ij|

    bool offdiagonal_sign_ok = false;
    double offdiagonal_max = 0.0;           // max over samples of a_ij, i != j

    bool row_sum_ok = false;
    double min_row_sum = 0.0;               // min over samples of sum_j a_ij

    bool epsilon_ok = false;
    double sqrt_epsilon_n = 0.0;
    double sqrt_alpha_over_6 = 0.0;

    bool evaluation_ok = false;
    std::string failure_location;           // set when a coefficient failed to evaluate

    int samples_x = 0;
    int samples_t = 0;
};

/// Check the structural assumptions by dense sampling (default resolution is
/// chosen by callers; both counts must be >= 2). Evaluation failures are
/// reported through the returned ValidationReport, not thrown.
inline ValidationReport validate_assumptions(const ProblemSpec& spec, int samples_x = 257,
                                             int samples_t = 257) {
    require_well_formed(spec);
    if (samples_x < 2 || samples_t < 2)
        throw ConfigError("validate: sampling counts must be >= 2");

    ValidationReport report;
    report.samples_x = samples_x;
    report.samples_t = samples_t;
    report.evaluation_ok = true;

    double min_margin = std::numeric_limits<double>::infinity();
    double max_offdiag = -std::numeric_limits<double>::infinity();
    double min_row_sum = std::numeric_limits<double>::infinity();

    for (int it = 0; it < samples_t && report.evaluation_ok; ++it) {
        const double t = spec.horizon * static_cast<double>(it) / (samples_t - 1);
        for (int ix = 0; ix < samples_x && report.evaluation_ok; ++ix) {
            const double x = static_cast<double>(ix) / (samples_x - 1);
            for (int i = 0; i < spec.n; ++i) {
                double diag = 0.0;
                double offdiag_abs = 0.0;
                double row_sum = 0.0;
                for (int j = 0; j < spec.n; ++j) {
                    double a;
                    try {
                        a = spec.coeff[i][j](x, t);
                    } catch (const Error& e) {
                        char loc[128];
                        std::snprintf(loc, sizeof loc, "A[%d][%d] at (x=%.6g, t=%.6g): ", i + 1,
                                      j + 1, x, t);
                        report.evaluation_ok = false;
                        report.failure_location = std::string(loc) + e.what();
                        break;
                    }
                    row_sum += a;
                    if (j != i) {
                        offdiag_abs += std::abs(a);
                        max_offdiag = std::max(max_offdiag, a);
                    } else {
                        diag = a;
                    }
                }
                if (!report.evaluation_ok) break;
                min_margin = std::min(min_margin, diag - offdiag_abs);
                min_row_sum = std::min(min_row_sum, row_sum);
            }
        }
    }

    if (report.evaluation_ok) {
        report.diagonal_dominance_margin = min_margin;
        report.diagonal_dominance_ok = min_margin > 0.0;
        report.offdiagonal_max = spec.n > 1 ? max_offdiag : 0.0;
        report.offdiagonal_sign_ok = spec.n > 1 ? max_offdiag <= 0.0 : true;
        report.min_row_sum = min_row_sum;
        report.row_sum_ok = min_row_sum > spec.alpha;
    }
    report.sqrt_epsilon_n = std::sqrt(spec.epsilons.back());
    report.sqrt_alpha_over_6 = std::sqrt(spec.alpha) / 6.0;
    report.epsilon_ok = report.sqrt_epsilon_n <= report.sqrt_alpha_over_6;

    report.pass = report.evaluation_ok && report.diagonal_dominance_ok &&
                  report.offdiagonal_sign_ok && report.row_sum_ok && report.epsilon_ok;
    return report;
}

/// The built-in two-component example problem:
///
///   A = [[4+3t, -1], [-1, 4+3t]],  f = (2+e^{3t}, 2+e^{3t}),
///   phi_left = phi_right = (1+t^8, 1+t^8),  phi_bottom = (1, 1),
///   T = 1,  alpha = 2.9.
///
/// The perturbation parameters are supplied by the caller.
inline ProblemSpec builtin_example1(std::vector<double> epsilons) {
    ProblemSpec spec;
    spec.n = 2;
    spec.epsilons = std::move(epsilons);
    spec.horizon = 1.0;
    spec.alpha = 2.9;

    SpaceTimeFn diag = [](double, double t) { return 4.0 + 3.0 * t; };
    SpaceTimeFn offdiag = [](double, double) { return -1.0; };
    spec.coeff = {{diag, offdiag}, {offdiag, diag}};

    SpaceTimeFn f = [](double, double t) { return 2.0 + std::exp(3.0 * t); };
    spec.source = {f, f};

    TimeFn robin = [](double t) { return 1.0 + std::pow(t, 8.0); };
    spec.phi_left = {robin, robin};
    spec.phi_right = {robin, robin};

    SpaceFn bottom = [](double) { return 1.0; };
    spec.phi_bottom = {bottom, bottom};
    return spec;
}

} // namespace fitmesh
