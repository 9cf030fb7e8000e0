#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fitmesh/discretization.hpp"
#include "fitmesh/errors.hpp"
#include "fitmesh/mesh.hpp"
#include "fitmesh/problem.hpp"

namespace fitmesh {

enum class SweepAxis { time, space };

/// Two-mesh convergence measurements along one axis: differences per
/// parameter value, their column maxima D, orders p, the uniform order p*
/// (the row minimum), and error constants C.
struct ConvergenceReport {
    SweepAxis axis = SweepAxis::time;
    std::vector<double> etas;
    std::vector<std::string> eta_labels;
    std::vector<int> resolutions;    // M values (time axis) or N values (space axis)
    int fixed_resolution = 0;        // N for the time axis, M for the space axis

    std::vector<std::vector<double>> differences; // [eta][resolution]
    std::vector<double> uniform_differences;      // D row: max over eta
    std::vector<double> orders;                   // p_r = log2(D_r / D_{2r})
    double uniform_order = 0.0;                   // p* = min_r p_r
    std::vector<double> constants;                // C_r = D_r * r^{p*} / (1 - 2^{-p*})
    double uniform_constant = 0.0;                // C* = max_r C_r
};

/// Insert the midpoint of every interval. Transition parameters are kept
/// (every input point is an output point), so the result nests the input.
inline SpaceMesh bisect_space_mesh(const SpaceMesh& mesh) {
    const int N = mesh.intervals();
    if (N < 1) throw MeshError("bisect: empty mesh");
    SpaceMesh fine;
    fine.sigmas = mesh.sigmas;
    fine.d_values = mesh.d_values;
    fine.points.assign(static_cast<std::size_t>(2 * N) + 1, 0.0);
    // Midpoints are generated on the left half and mirrored, so a symmetric
    // input yields an exactly symmetric output.
    for (int j = 0; j <= N; ++j) fine.points[static_cast<std::size_t>(2 * j)] = mesh.points[static_cast<std::size_t>(j)];
    for (int j = 0; 2 * j + 1 <= 2 * N - (2 * j + 1); ++j)
        fine.points[static_cast<std::size_t>(2 * j) + 1] =
            0.5 * (mesh.points[static_cast<std::size_t>(j)] + mesh.points[static_cast<std::size_t>(j) + 1]);
    for (int idx = 1; idx < 2 * N; idx += 2) {
        const int mirror = 2 * N - idx;
        if (mirror > idx) fine.points[static_cast<std::size_t>(mirror)] = 1.0 - fine.points[static_cast<std::size_t>(idx)];
    }
    fine.change_set = detail::detect_step_changes(fine.points);
    return fine;
}

/// Uniform refinement in time: M -> 2M with the same horizon. The coarse
/// points k*T/M reappear exactly as the even fine points.
inline TimeMesh bisect_time_mesh(const TimeMesh& mesh) {
    return build_time_mesh(mesh.horizon, 2 * mesh.intervals());
}

namespace detail {

/// Map each coarse point to its index in the fine point set. Accepts either
/// an identical point set or one refined by bisection; anything else is a
/// containment violation.
inline std::vector<int> containment_map(const std::vector<double>& coarse,
                                        const std::vector<double>& fine) {
    std::vector<int> map(coarse.size());
    int stride = 0;
    if (fine.size() == coarse.size()) stride = 1;
    else if (fine.size() == 2 * coarse.size() - 1) stride = 2;
    else throw ConfigError("two_mesh_difference: point sets are not nested");
    for (std::size_t j = 0; j < coarse.size(); ++j) {
        const std::size_t target = j * static_cast<std::size_t>(stride);
        if (std::abs(fine[target] - coarse[j]) > 1e-12)
            throw ConfigError("two_mesh_difference: point sets are not nested");
        map[j] = static_cast<int>(target);
    }
    return map;
}

} // namespace detail

/// Maximum over all coarse grid points and components of the difference
/// between the two solutions at shared points (no interpolation).
inline double two_mesh_difference(const GridFunction& coarse, const GridFunction& fine) {
    if (coarse.components != fine.components)
        throw ConfigError("two_mesh_difference: component count mismatch");
    const std::vector<int> xmap = detail::containment_map(coarse.space.points, fine.space.points);
    const std::vector<int> tmap = detail::containment_map(coarse.time.points, fine.time.points);

    double worst = 0.0;
    for (int k = 0; k < coarse.time_points(); ++k)
        for (int j = 0; j < coarse.space_points(); ++j)
            for (int i = 0; i < coarse.components; ++i)
                worst = std::max(worst, std::abs(coarse.value(k, j, i) -
                                                 fine.value(tmap[static_cast<std::size_t>(k)],
                                                            xmap[static_cast<std::size_t>(j)], i)));
    return worst;
}

struct OrderEstimate {
    std::vector<double> orders;
    double uniform_order = 0.0;
    std::vector<double> constants;
    double uniform_constant = 0.0;
};

/// Orders and error constants from a row of two-mesh differences at doubling
/// resolutions:
///
///   p_r = log2(D_r / D_{2r}),   p* = min_r p_r,
///   C_r = D_r * r^{p*} / (1 - 2^{-p*}),   C* = max_r C_r.
inline OrderEstimate estimate_orders(std::span<const double> differences,
                                     std::span<const int> resolutions) {
    if (differences.size() < 2) throw ConfigError("estimate_orders: need at least 2 resolutions");
    if (differences.size() != resolutions.size())
        throw ConfigError("estimate_orders: row lengths differ");
    for (std::size_t r = 0; r < resolutions.size(); ++r) {
        if (!(differences[r] > 0.0)) throw ConfigError("estimate_orders: nonpositive difference");
        if (r > 0 && resolutions[r] != 2 * resolutions[r - 1])
            throw ConfigError("estimate_orders: resolutions must double");
    }

    OrderEstimate est;
    est.orders.resize(differences.size() - 1);
    for (std::size_t r = 0; r + 1 < differences.size(); ++r)
        est.orders[r] = std::log2(differences[r] / differences[r + 1]);
    est.uniform_order = *std::min_element(est.orders.begin(), est.orders.end());

    const double denom = 1.0 - std::exp2(-est.uniform_order);
    est.constants.resize(differences.size());
    for (std::size_t r = 0; r < differences.size(); ++r)
        est.constants[r] =
            differences[r] * std::pow(static_cast<double>(resolutions[r]), est.uniform_order) / denom;
    est.uniform_constant = *std::max_element(est.constants.begin(), est.constants.end());
    return est;
}

/// One axis of the two-mesh study.
struct SweepConfig {
    SweepAxis axis = SweepAxis::time;
    std::vector<double> etas;
    std::vector<std::string> eta_labels;           // optional; defaults to printed values
    std::vector<int> resolutions;                  // doubling M values (time) or N values (space)
    int fixed_resolution = 0;                      // N (time axis) or M (space axis)
    std::function<std::vector<double>(double)> eta_to_epsilons; // defaults to the halving ladder ending at eta/8
    SolverOptions solver;
};

/// Halving ladder ending at eta/8: eps_i = eta * 2^(i - n - 3) for 1-based i.
/// For two-component problems this is (eta/16, eta/8).
inline std::vector<double> default_epsilon_ladder(double eta, int n) {
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        eps[static_cast<std::size_t>(i)] = eta * std::exp2(static_cast<double>(i + 1 - n) - 3.0);
    return eps;
}

/// Run the two-mesh study: for every (eta, resolution) cell solve on the
/// coarse grid and on its bisection along the chosen axis, with the
/// complementary axis held fixed, and reduce to D, p, p* and C.
///
/// The base spec supplies everything except the perturbation parameters,
/// which are derived from eta per cell. For two-component problems the
/// default map is eps = (eta/16, eta/8).
inline ConvergenceReport run_sweep(const ProblemSpec& base, const SweepConfig& config) {
    require_well_formed(base);
    if (config.etas.empty()) throw ConfigError("run_sweep: eta list is empty");
    if (config.resolutions.size() < 2)
        throw ConfigError("run_sweep: need at least 2 resolutions");
    for (std::size_t r = 1; r < config.resolutions.size(); ++r)
        if (config.resolutions[r] != 2 * config.resolutions[r - 1])
            throw ConfigError("run_sweep: resolutions must double");
    if (config.fixed_resolution < 1)
        throw ConfigError("run_sweep: fixed resolution must be positive");
    if (!config.eta_labels.empty() && config.eta_labels.size() != config.etas.size())
        throw ConfigError("run_sweep: eta label count mismatch");

    ConvergenceReport report;
    report.axis = config.axis;
    report.etas = config.etas;
    report.resolutions = config.resolutions;
    report.fixed_resolution = config.fixed_resolution;
    report.eta_labels = config.eta_labels;
    if (report.eta_labels.empty()) {
        for (double eta : config.etas) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", eta);
            report.eta_labels.emplace_back(buf);
        }
    }

    const auto eta_map = config.eta_to_epsilons
                             ? config.eta_to_epsilons
                             : [&base](double eta) { return default_epsilon_ladder(eta, base.n); };

    report.differences.assign(config.etas.size(),
                              std::vector<double>(config.resolutions.size(), 0.0));
    for (std::size_t e = 0; e < config.etas.size(); ++e) {
        ProblemSpec spec = base;
        spec.epsilons = eta_map(config.etas[e]);
        if (static_cast<int>(spec.epsilons.size()) != base.n)
            throw ConfigError("run_sweep: eta map returned wrong number of epsilons");

        if (config.axis == SweepAxis::time) {
            const SpaceMesh smesh =
                build_shishkin_mesh(spec.epsilons, spec.alpha, config.fixed_resolution);
            for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
                const TimeMesh coarse_t = build_time_mesh(spec.horizon, config.resolutions[r]);
                const TimeMesh fine_t = bisect_time_mesh(coarse_t);
                const GridFunction coarse = time_march(spec, smesh, coarse_t, config.solver);
                const GridFunction fine = time_march(spec, smesh, fine_t, config.solver);
                report.differences[e][r] = two_mesh_difference(coarse, fine);
            }
        } else {
            const TimeMesh tmesh = build_time_mesh(spec.horizon, config.fixed_resolution);
            for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
                const SpaceMesh coarse_x =
                    build_shishkin_mesh(spec.epsilons, spec.alpha, config.resolutions[r]);
                const SpaceMesh fine_x = bisect_space_mesh(coarse_x);
                const GridFunction coarse = time_march(spec, coarse_x, tmesh, config.solver);
                const GridFunction fine = time_march(spec, fine_x, tmesh, config.solver);
                report.differences[e][r] = two_mesh_difference(coarse, fine);
            }
        }
    }

    report.uniform_differences.assign(config.resolutions.size(), 0.0);
    for (std::size_t r = 0; r < config.resolutions.size(); ++r)
        for (std::size_t e = 0; e < config.etas.size(); ++e)
            report.uniform_differences[r] =
                std::max(report.uniform_differences[r], report.differences[e][r]);

    const OrderEstimate est = estimate_orders(report.uniform_differences, report.resolutions);
    report.orders = est.orders;
    report.uniform_order = est.uniform_order;
    report.constants = est.constants;
    report.uniform_constant = est.uniform_constant;
    return report;
}

} // namespace fitmesh
