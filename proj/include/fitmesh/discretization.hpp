#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fitmesh/errors.hpp"
#include "fitmesh/linalg.hpp"
#include "fitmesh/mesh.hpp"
#include "fitmesh/problem.hpp"

namespace fitmesh {

/// Discrete n-vector solution over the full space-time grid.
/// Storage is row-major in (time, space, component); row k = 0 holds the
/// initial data sampled at the mesh points.
struct GridFunction {
    SpaceMesh space;
    TimeMesh time;
    int components = 0;
    std::vector<double> values; // (M+1) * (N+1) * n

    int space_points() const { return static_cast<int>(space.points.size()); }
    int time_points() const { return static_cast<int>(time.points.size()); }

    double value(int k, int j, int i) const {
        return values[(static_cast<std::size_t>(k) * space_points() + j) * components + i];
    }
    double& value(int k, int j, int i) {
        return values[(static_cast<std::size_t>(k) * space_points() + j) * components + i];
    }

    /// One time row as a flat block-contiguous span (component fastest).
    std::span<const double> row(int k) const {
        const std::size_t stride = static_cast<std::size_t>(space_points()) * components;
        return {values.data() + static_cast<std::size_t>(k) * stride, stride};
    }
};

/// Three-point second difference on a nonuniform step pair,
///
///   (2/(h_l+h_r)) * ((y_p - y_0)/h_r - (y_0 - y_m)/h_l),
///
/// the unique three-point formula exact on quadratics.
inline double second_difference(double y_minus, double y_center, double y_plus, double h_left,
                                double h_right) {
    if (!(h_left > 0.0 && h_right > 0.0))
        throw MeshError("second_difference: steps must be positive");
    return 2.0 / (h_left + h_right) *
           ((y_plus - y_center) / h_right - (y_center - y_minus) / h_left);
}

/// Assemble the linear system of one implicit time step at t_k.
///
/// Interior block row j (backward time difference, fully implicit coupling):
///   main  = (1/tau) I + A(x_j, t_k) + E * c_j,
///   sub   = -E * a_j,   super = -E * b_j,
///   rhs   = f(x_j, t_k) + U(x_j, t_{k-1}) / tau,
/// where a_j, b_j, c_j are the nonuniform second-difference weights. The
/// first and last block rows carry the Robin operators, discretized with
/// one-sided first-order differences over the first/last mesh step:
///   row 0:  (I + E_*/h_1) U_0 - (E_*/h_1) U_1         = phi_left(t_k),
///   row N:  (I + E_*/h_N) U_N - (E_*/h_N) U_{N-1}     = phi_right(t_k).
inline BlockTridiagonalSystem assemble_step(const ProblemSpec& spec, const SpaceMesh& smesh,
                                            const TimeMesh& tmesh, int k,
                                            std::span<const double> previous_row) {
    require_well_formed(spec);
    const int n = spec.n;
    const int N = smesh.intervals();
    if (k < 1 || k > tmesh.intervals())
        throw ConfigError("assemble_step: time index out of range");
    if (previous_row.size() != static_cast<std::size_t>(N + 1) * n)
        throw ConfigError("assemble_step: previous row has wrong size");

    const double t = tmesh.points[static_cast<std::size_t>(k)];
    const double tau = t - tmesh.points[static_cast<std::size_t>(k) - 1];

    BlockTridiagonalSystem sys;
    sys.lower.assign(static_cast<std::size_t>(N) + 1, Matrix());
    sys.diag.assign(static_cast<std::size_t>(N) + 1, Matrix());
    sys.upper.assign(static_cast<std::size_t>(N) + 1, Matrix());
    sys.rhs.assign(static_cast<std::size_t>(N + 1) * n, 0.0);

    // Robin row at x = 0: I - E_* D_x^+ over the first step.
    {
        const double h1 = smesh.step(1);
        Matrix main(n, n), super(n, n);
        for (int i = 0; i < n; ++i) {
            const double ratio = std::sqrt(spec.epsilons[static_cast<std::size_t>(i)]) / h1;
            main(i, i) = 1.0 + ratio;
            super(i, i) = -ratio;
            sys.rhs[static_cast<std::size_t>(i)] = spec.phi_left[static_cast<std::size_t>(i)](t);
        }
        sys.diag[0] = std::move(main);
        sys.upper[0] = std::move(super);
    }

    for (int j = 1; j < N; ++j) {
        const double x = smesh.points[static_cast<std::size_t>(j)];
        const double h_left = smesh.step(j);
        const double h_right = smesh.step(j + 1);
        const double w_left = 2.0 / (h_left * (h_left + h_right));
        const double w_right = 2.0 / (h_right * (h_left + h_right));
        const double w_center = w_left + w_right;

        Matrix sub(n, n), main(n, n), super(n, n);
        for (int i = 0; i < n; ++i) {
            const double eps = spec.epsilons[static_cast<std::size_t>(i)];
            sub(i, i) = -eps * w_left;
            super(i, i) = -eps * w_right;
            for (int c = 0; c < n; ++c) main(i, c) = spec.coeff[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)](x, t);
            main(i, i) += 1.0 / tau + eps * w_center;
            sys.rhs[static_cast<std::size_t>(j) * n + i] =
                spec.source[static_cast<std::size_t>(i)](x, t) +
                previous_row[static_cast<std::size_t>(j) * n + i] / tau;
        }
        sys.lower[static_cast<std::size_t>(j)] = std::move(sub);
        sys.diag[static_cast<std::size_t>(j)] = std::move(main);
        sys.upper[static_cast<std::size_t>(j)] = std::move(super);
    }

    // Robin row at x = 1: I + E_* D_x^- over the last step.
    {
        const double hN = smesh.step(N);
        Matrix main(n, n), sub(n, n);
        for (int i = 0; i < n; ++i) {
            const double ratio = std::sqrt(spec.epsilons[static_cast<std::size_t>(i)]) / hN;
            main(i, i) = 1.0 + ratio;
            sub(i, i) = -ratio;
            sys.rhs[static_cast<std::size_t>(N) * n + i] = spec.phi_right[static_cast<std::size_t>(i)](t);
        }
        sys.diag[static_cast<std::size_t>(N)] = std::move(main);
        sys.lower[static_cast<std::size_t>(N)] = std::move(sub);
    }
    return sys;
}

/// March the implicit scheme over the whole time mesh. Row 0 is the sampled
/// initial data; every later row solves its step system.
///
/// The structural assumptions on A and alpha are the caller's concern
/// (see validate_assumptions); this routine checks shapes only.
///
/// The march is sequential in time (hard data dependence), but distinct
/// invocations share no state and may run concurrently.
inline GridFunction time_march(const ProblemSpec& spec, const SpaceMesh& smesh,
                               const TimeMesh& tmesh, const SolverOptions& options = {}) {
    require_well_formed(spec);
    const int n = spec.n;
    const int N = smesh.intervals();
    const int M = tmesh.intervals();
    if (N < 2) throw MeshError("time_march: need at least 2 space intervals");

    GridFunction grid;
    grid.space = smesh;
    grid.time = tmesh;
    grid.components = n;
    grid.values.assign(static_cast<std::size_t>(M + 1) * (N + 1) * n, 0.0);

    for (int j = 0; j <= N; ++j) {
        const double x = smesh.points[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) grid.value(0, j, i) = spec.phi_bottom[static_cast<std::size_t>(i)](x);
    }

    for (int k = 1; k <= M; ++k) {
        const BlockTridiagonalSystem sys = assemble_step(spec, smesh, tmesh, k, grid.row(k - 1));
        const std::vector<double> solution = solve_block_tridiagonal(sys, options);
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i < n; ++i) grid.value(k, j, i) = solution[static_cast<std::size_t>(j) * n + i];
    }
    return grid;
}

} // namespace fitmesh
