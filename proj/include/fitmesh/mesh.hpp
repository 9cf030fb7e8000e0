#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fitmesh/errors.hpp"

namespace fitmesh {

/// Piecewise-uniform fitted space mesh on [0,1].
///
/// The interval is split into 2n+1 bands
///   [0,s_1], (s_1,s_2], ..., (s_{n-1},s_n], (s_n,1-s_n], ..., (1-s_1,1]
/// with N/(4n) uniform intervals in each layer band and N/2 in the outer
/// band. The transition parameters satisfy 0 < s_1 < ... < s_n <= 1/4, the
/// point set is symmetric about 1/2, and the step can only change at a
/// transition point.
///
/// Meshes are immutable after construction; everything in this header is
/// pure and safe for concurrent use.
struct SpaceMesh {
    std::vector<double> points;   // x_0 = 0 < ... < x_N = 1
    std::vector<double> sigmas;   // transition parameters s_1..s_n
    std::vector<double> d_values; // d_r = r*s_{r+1}/(r+1) - s_r, with s_{n+1} := 1/2
    std::vector<int> change_set;  // indices j with differing left/right step (the set J)

    int intervals() const { return static_cast<int>(points.size()) - 1; }

    /// Step h_j = x_j - x_{j-1}, defined for 1 <= j <= N.
    double step(int j) const { return points[static_cast<std::size_t>(j)] - points[static_cast<std::size_t>(j) - 1]; }
};

/// Uniform time mesh on [0,T] with M intervals, t_k = k*T/M.
struct TimeMesh {
    std::vector<double> points;
    double horizon = 0.0;

    int intervals() const { return static_cast<int>(points.size()) - 1; }
    double step() const { return horizon / intervals(); }
};

namespace detail {

/// Indices j in 1..N-1 where the local step changes, using relative
/// tolerance 1e-12 so membership in J is unambiguous.
inline std::vector<int> detect_step_changes(const std::vector<double>& points) {
    std::vector<int> changes;
    for (int j = 1; j + 1 < static_cast<int>(points.size()); ++j) {
        const double left = points[static_cast<std::size_t>(j)] - points[static_cast<std::size_t>(j) - 1];
        const double right = points[static_cast<std::size_t>(j) + 1] - points[static_cast<std::size_t>(j)];
        if (std::abs(right - left) > 1e-12 * std::max(left, right)) changes.push_back(j);
    }
    return changes;
}

inline void require_epsilons(std::span<const double> epsilons, double alpha) {
    if (epsilons.empty()) throw MeshError("mesh: epsilons must be nonempty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] < 1.0))
            throw MeshError("mesh: epsilons must lie in (0,1)");
        if (i > 0 && !(epsilons[i - 1] < epsilons[i]))
            throw MeshError("mesh: epsilons must be strictly increasing");
    }
    if (!(alpha > 0.0)) throw MeshError("mesh: alpha must be positive");
}

} // namespace detail

/// Build the fitted piecewise-uniform space mesh for the given perturbation
/// parameters. Transition parameters are computed top-down:
///
///   s_n = min{ 1/4, 2*sqrt(eps_n/alpha)*ln N },
///   s_r = min{ r*s_{r+1}/(r+1), 2*sqrt(eps_r/alpha)*ln N },  r = n-1..1.
///
/// When every parameter takes its geometric ("left") choice the mesh
/// degenerates to the classical uniform mesh with step 1/N.
///
/// Preconditions: N divisible by 4n; for two-component problems N must be a
/// multiple of 8 with N >= 24.
inline SpaceMesh build_shishkin_mesh(std::span<const double> epsilons, double alpha, int N) {
    detail::require_epsilons(epsilons, alpha);
    const int n = static_cast<int>(epsilons.size());
    if (N < 4 * n || N % (4 * n) != 0)
        throw MeshError("mesh: N must be a positive multiple of 4n (n = " + std::to_string(n) +
                        "), got N = " + std::to_string(N));
    if (n == 2 && (N % 8 != 0 || N < 24))
        throw MeshError("mesh: for n = 2, N must be a multiple of 8 with N >= 24, got N = " +
                        std::to_string(N));

    const double log_n_pts = std::log(static_cast<double>(N));
    const double sqrt_alpha = std::sqrt(alpha);

    SpaceMesh mesh;
    mesh.sigmas.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = n; r >= 1; --r) {
        const double layer_width = 2.0 * std::sqrt(epsilons[static_cast<std::size_t>(r) - 1]) / sqrt_alpha * log_n_pts;
        const double geometric = (r == n) ? 0.25
                                          : static_cast<double>(r) * mesh.sigmas[static_cast<std::size_t>(r)] /
                                                (r + 1);
        mesh.sigmas[static_cast<std::size_t>(r) - 1] = std::min(geometric, layer_width);
    }

    mesh.d_values.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 1; r <= n; ++r) {
        const double sigma_next = (r == n) ? 0.5 : mesh.sigmas[static_cast<std::size_t>(r)];
        mesh.d_values[static_cast<std::size_t>(r) - 1] =
            static_cast<double>(r) * sigma_next / (r + 1) - mesh.sigmas[static_cast<std::size_t>(r) - 1];
    }

    // Left half: n layer bands of N/(4n) intervals, then a half outer band of
    // N/4 intervals up to 1/2. The right half mirrors it exactly.
    const int band_count = N / (4 * n);
    mesh.points.assign(static_cast<std::size_t>(N) + 1, 0.0);
    int base = 0;
    double band_start = 0.0;
    for (int r = 1; r <= n; ++r) {
        const double band_end = mesh.sigmas[static_cast<std::size_t>(r) - 1];
        for (int i = 1; i < band_count; ++i)
            mesh.points[static_cast<std::size_t>(base + i)] =
                band_start + (band_end - band_start) * i / band_count;
        mesh.points[static_cast<std::size_t>(base + band_count)] = band_end; // transition point, exact
        base += band_count;
        band_start = band_end;
    }
    const int half_outer = N / 4;
    for (int i = 1; i < half_outer; ++i)
        mesh.points[static_cast<std::size_t>(base + i)] = band_start + (0.5 - band_start) * i / half_outer;
    mesh.points[static_cast<std::size_t>(N) / 2] = 0.5;
    for (int j = 0; j < N / 2; ++j)
        mesh.points[static_cast<std::size_t>(N - j)] = 1.0 - mesh.points[static_cast<std::size_t>(j)];

    mesh.change_set = detail::detect_step_changes(mesh.points);
    return mesh;
}

/// Plain uniform mesh on [0,1] with N intervals (no transition parameters).
inline SpaceMesh uniform_space_mesh(int N) {
    if (N < 1) throw MeshError("mesh: N must be >= 1");
    SpaceMesh mesh;
    mesh.points.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (int j = 0; j <= N; ++j)
        mesh.points[static_cast<std::size_t>(j)] = static_cast<double>(j) / N;
    return mesh;
}

/// Uniform time mesh with M intervals on [0,T].
inline TimeMesh build_time_mesh(double T, int M) {
    if (!(T > 0.0)) throw MeshError("mesh: T must be positive");
    if (M < 1) throw MeshError("mesh: M must be >= 1");
    TimeMesh mesh;
    mesh.horizon = T;
    mesh.points.assign(static_cast<std::size_t>(M) + 1, 0.0);
    for (int k = 0; k <= M; ++k)
        mesh.points[static_cast<std::size_t>(k)] = static_cast<double>(k) * T / M;
    return mesh;
}

enum class LayerSide { left, right, sum };

/// Layer envelope of component i (0-based):
///   left:  exp(-x*sqrt(alpha/eps_i)),  right: left mirrored about 1/2,
///   sum:   their sum.
inline double layer_function(int i, double x, LayerSide side, std::span<const double> epsilons,
                             double alpha) {
    detail::require_epsilons(epsilons, alpha);
    if (i < 0 || i >= static_cast<int>(epsilons.size()))
        throw MeshError("layer_function: component index out of range");
    const double rate = std::sqrt(alpha / epsilons[static_cast<std::size_t>(i)]);
    switch (side) {
        case LayerSide::left: return std::exp(-x * rate);
        case LayerSide::right: return std::exp(-(1.0 - x) * rate);
        case LayerSide::sum: return std::exp(-x * rate) + std::exp(-(1.0 - x) * rate);
    }
    return 0.0;
}

/// Crossover abscissa where the eps^s-scaled left layer functions of
/// components i < j balance:
///
///   exp(-x*sqrt(alpha/eps_i)) / eps_i^s = exp(-x*sqrt(alpha/eps_j)) / eps_j^s.
///
/// The equation is log-linear, so the root is returned in closed form:
///   x = s*ln(eps_j/eps_i) / (sqrt(alpha) * (1/sqrt(eps_i) - 1/sqrt(eps_j))).
inline double interesting_point(int i, int j, double s, std::span<const double> epsilons,
                                double alpha) {
    detail::require_epsilons(epsilons, alpha);
    if (i < 0 || j >= static_cast<int>(epsilons.size()))
        throw MeshError("interesting_point: component index out of range");
    if (i >= j) throw MeshError("interesting_point: requires i < j");
    if (!(s > 0.0 && s <= 1.5)) throw MeshError("interesting_point: s must lie in (0, 3/2]");
    const double eps_i = epsilons[static_cast<std::size_t>(i)];
    const double eps_j = epsilons[static_cast<std::size_t>(j)];
    return s * std::log(eps_j / eps_i) /
           (std::sqrt(alpha) * (1.0 / std::sqrt(eps_i) - 1.0 / std::sqrt(eps_j)));
}

} // namespace fitmesh
